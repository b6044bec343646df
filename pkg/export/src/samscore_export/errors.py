"""Error types for the export pipeline."""


class ExportError(Exception):
    """Base class for export-side failures."""


class ExportFailure(ExportError):
    """Graph export could not be completed; message carries the diagnostic."""


class ParityFailure(ExportError):
    """Source-framework and exported-graph outputs diverged beyond tolerance."""
