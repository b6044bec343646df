"""Independent scalar reference implementations used as test oracles.

Everything here is written as plain loops over Python floats, on
purpose: these functions stay independent of the vectorized code paths
they check. Slow is fine; small inputs only.
"""

import math


def ref_resize_bilinear(pixels, out_h, out_w):
    """Half-pixel-centered bilinear resize of a nested [h][w][c] float list."""
    in_h = len(pixels)
    in_w = len(pixels[0])
    channels = len(pixels[0][0])
    out = []
    for oy in range(out_h):
        sy = (oy + 0.5) * (in_h / out_h) - 0.5
        y0 = math.floor(sy)
        wy = sy - y0
        y0c = min(max(y0, 0), in_h - 1)
        y1c = min(max(y0 + 1, 0), in_h - 1)
        row = []
        for ox in range(out_w):
            sx = (ox + 0.5) * (in_w / out_w) - 0.5
            x0 = math.floor(sx)
            wx = sx - x0
            x0c = min(max(x0, 0), in_w - 1)
            x1c = min(max(x0 + 1, 0), in_w - 1)
            px = []
            for c in range(channels):
                top = pixels[y0c][x0c][c] * (1 - wx) + pixels[y0c][x1c][c] * wx
                bot = pixels[y1c][x0c][c] * (1 - wx) + pixels[y1c][x1c][c] * wx
                px.append(top * (1 - wy) + bot * wy)
            row.append(px)
        out.append(row)
    return out


def ref_sample_bilinear(pixels, y, x):
    """Single bilinear sample with edge replication; [h][w][c] float list."""
    in_h = len(pixels)
    in_w = len(pixels[0])
    y0 = math.floor(y)
    x0 = math.floor(x)
    wy = y - y0
    wx = x - x0
    y0c = min(max(y0, 0), in_h - 1)
    y1c = min(max(y0 + 1, 0), in_h - 1)
    x0c = min(max(x0, 0), in_w - 1)
    x1c = min(max(x0 + 1, 0), in_w - 1)
    out = []
    for c in range(len(pixels[0][0])):
        top = pixels[y0c][x0c][c] * (1 - wx) + pixels[y0c][x1c][c] * wx
        bot = pixels[y1c][x0c][c] * (1 - wx) + pixels[y1c][x1c][c] * wx
        out.append(top * (1 - wy) + bot * wy)
    return out


def ref_cosine(u, v, eps=1e-12):
    dot = 0.0
    nu = 0.0
    nv = 0.0
    for a, b in zip(u, v):
        dot += a * b
        nu += a * a
        nv += b * b
    nu = math.sqrt(nu)
    nv = math.sqrt(nv)
    if nu < eps and nv < eps:
        return 1.0
    if nu < eps or nv < eps:
        return 0.0
    return dot / (nu * nv)


def ref_similarity_map(x, y, eps=1e-12):
    """x, y: nested [c][h][w] float lists -> [h][w] of cosines."""
    channels = len(x)
    height = len(x[0])
    width = len(x[0][0])
    out = []
    for h in range(height):
        row = []
        for w in range(width):
            u = [x[c][h][w] for c in range(channels)]
            v = [y[c][h][w] for c in range(channels)]
            row.append(ref_cosine(u, v, eps))
        out.append(row)
    return out


def ref_samscore(x, y, eps=1e-12):
    sim = ref_similarity_map(x, y, eps)
    total = 0.0
    count = 0
    for row in sim:
        for v in row:
            total += v
            count += 1
    return total / count


def ref_pearson(xs, ys):
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    sxy = 0.0
    sxx = 0.0
    syy = 0.0
    for a, b in zip(xs, ys):
        sxy += (a - mx) * (b - my)
        sxx += (a - mx) ** 2
        syy += (b - my) ** 2
    return sxy / math.sqrt(sxx * syy)


def ref_confusion(gt, pred, num_classes, ignore_id=None):
    """gt, pred: nested [h][w] int lists."""
    counts = [[0] * num_classes for _ in range(num_classes)]
    for grow, prow in zip(gt, pred):
        for g, p in zip(grow, prow):
            if ignore_id is not None and g == ignore_id:
                continue
            counts[g][p] += 1
    return counts


def ref_fcn_scores(counts):
    num_classes = len(counts)
    total = sum(sum(row) for row in counts)
    trace = sum(counts[c][c] for c in range(num_classes))
    acc = trace / total
    ious = []
    for c in range(num_classes):
        row = sum(counts[c])
        col = sum(counts[r][c] for r in range(num_classes))
        denom = row + col - counts[c][c]
        if denom > 0:
            ious.append(counts[c][c] / denom)
    return acc, sum(ious) / len(ious)


def _gaussian_window(size=11, sigma=1.5):
    half = size // 2
    vals = [math.exp(-((i - half) ** 2) / (2 * sigma * sigma)) for i in range(size)]
    window = [[vals[i] * vals[j] for j in range(size)] for i in range(size)]
    total = sum(sum(row) for row in window)
    return [[w / total for w in row] for row in window]


def ref_ssim_single_channel(a, b, dynamic_range, size=11, sigma=1.5, k1=0.01, k2=0.03):
    """Valid-mode windowed SSIM over a [h][w] float channel pair."""
    window = _gaussian_window(size, sigma)
    c1 = (k1 * dynamic_range) ** 2
    c2 = (k2 * dynamic_range) ** 2
    height = len(a)
    width = len(a[0])
    scores = []
    for top in range(height - size + 1):
        for left in range(width - size + 1):
            mu_a = mu_b = 0.0
            for i in range(size):
                for j in range(size):
                    w = window[i][j]
                    mu_a += w * a[top + i][left + j]
                    mu_b += w * b[top + i][left + j]
            var_a = var_b = cov = 0.0
            for i in range(size):
                for j in range(size):
                    w = window[i][j]
                    da = a[top + i][left + j] - mu_a
                    db = b[top + i][left + j] - mu_b
                    var_a += w * da * da
                    var_b += w * db * db
                    cov += w * da * db
            num = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
            den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
            scores.append(num / den)
    return sum(scores) / len(scores)


def ref_affine_from_triangle(src, dst):
    """Affine coefficients mapping three source points onto three
    destination points, solved with Cramer's rule.

    Returns ((ay, by, cy), (ax, bx, cx)) such that
    out_y = ay*y + by*x + cy, out_x = ax*y + bx*x + cx.
    """
    (y1, x1), (y2, x2), (y3, x3) = src
    det = y1 * (x2 - x3) - x1 * (y2 - y3) + (y2 * x3 - y3 * x2)
    coeffs = []
    for k in range(2):
        t1, t2, t3 = dst[0][k], dst[1][k], dst[2][k]
        a = t1 * (x2 - x3) - x1 * (t2 - t3) + (t2 * x3 - t3 * x2)
        b = y1 * (t2 - t3) - t1 * (y2 - y3) + (y2 * t3 - y3 * t2)
        c = y1 * (x2 * t3 - x3 * t2) - x1 * (y2 * t3 - y3 * t2) + t1 * (y2 * x3 - y3 * x2)
        coeffs.append((a / det, b / det, c / det))
    return coeffs[0], coeffs[1]


def ref_piecewise_affine_warp(pixels, centers_y, centers_x, disp, rows, cols):
    """Scalar warp over the fixed-diagonal triangulation.

    pixels: [h][w][c] floats; centers: control-point coordinates;
    disp: [r][c] -> (dy, dx). Returns float samples (no quantization).
    """
    height = len(pixels)
    width = len(pixels[0])
    cell_h = height / rows
    cell_w = width / cols
    out = []
    for y in range(height):
        row_out = []
        for x in range(width):
            ci = min(max(math.floor((y - centers_y[0]) / cell_h), 0), rows - 2)
            cj = min(max(math.floor((x - centers_x[0]) / cell_w), 0), cols - 2)
            fy = (y - centers_y[ci]) / cell_h
            fx = (x - centers_x[cj]) / cell_w
            tl = (ci, cj)
            tr = (ci, cj + 1)
            bl = (ci + 1, cj)
            br = (ci + 1, cj + 1)
            tri = (tl, tr, br) if fx >= fy else (tl, br, bl)
            src_pts = [(centers_y[i], centers_x[j]) for i, j in tri]
            dst_pts = [
                (centers_y[i] + disp[i][j][0], centers_x[j] + disp[i][j][1])
                for i, j in tri
            ]
            (ay, by, cy), (ax, bx, cx) = ref_affine_from_triangle(src_pts, dst_pts)
            sy = ay * y + by * x + cy
            sx = ax * y + bx * x + cx
            row_out.append(ref_sample_bilinear(pixels, sy, sx))
        out.append(row_out)
    return out


def ref_orientation_bin(gx, gy):
    """Octant of atan2(gy, gx), bins [-pi + k*pi/4, -pi + (k+1)*pi/4)."""
    ax = abs(gx)
    ay = abs(gy)
    if gy < 0:
        if gx < 0:
            return 0 if ay < ax else 1
        if gx == 0 or ay > ax:
            return 2
        return 3
    if gy > 0:
        if gx > 0:
            return 4 if ay < ax else 5
        if gx == 0 or ay > ax:
            return 6
        return 7
    # gy == 0
    if gx > 0:
        return 4
    if gx < 0:
        return 0
    return 4  # zero vector; weight is zero anyway


def ref_stub_embedding(lum, patch=16, bins=8, eps=1e-12):
    """Scalar per-patch orientation histograms over a [h][w] luminance grid.

    Central differences with edge replication; histograms weighted by
    gradient magnitude and L2-normalized per patch (zero vectors kept).
    Returns nested [gh][gw][bins] floats.
    """
    height = len(lum)
    width = len(lum[0])
    gh = height // patch
    gw = width // patch

    def at(y, x):
        return lum[min(max(y, 0), height - 1)][min(max(x, 0), width - 1)]

    out = []
    for pi in range(gh):
        row = []
        for pj in range(gw):
            hist = [0.0] * bins
            for y in range(pi * patch, (pi + 1) * patch):
                for x in range(pj * patch, (pj + 1) * patch):
                    gx = (at(y, x + 1) - at(y, x - 1)) * 0.5
                    gy = (at(y + 1, x) - at(y - 1, x)) * 0.5
                    mag = math.hypot(gx, gy)
                    hist[ref_orientation_bin(gx, gy)] += mag
            norm = math.sqrt(sum(v * v for v in hist))
            if norm >= eps:
                hist = [v / norm for v in hist]
            row.append(hist)
        out.append(row)
    return out


def ref_rgb_to_hsv(r, g, b):
    maxc = max(r, g, b)
    minc = min(r, g, b)
    v = maxc
    if maxc == 0.0:
        return 0.0, 0.0, v
    s = (maxc - minc) / maxc
    if maxc == minc:
        return 0.0, s, v
    rc = (maxc - r) / (maxc - minc)
    gc = (maxc - g) / (maxc - minc)
    bc = (maxc - b) / (maxc - minc)
    if r == maxc:
        h = bc - gc
    elif g == maxc:
        h = 2.0 + rc - bc
    else:
        h = 4.0 + gc - rc
    return (h / 6.0) % 1.0, s, v


def ref_hsv_to_rgb(h, s, v):
    if s == 0.0:
        return v, v, v
    i = int(math.floor(h * 6.0)) % 6
    f = h * 6.0 - math.floor(h * 6.0)
    p = v * (1.0 - s)
    q = v * (1.0 - s * f)
    t = v * (1.0 - s * (1.0 - f))
    return [(v, t, p), (q, v, p), (p, v, t), (p, q, v), (t, p, v), (v, p, q)][i]


def ref_color_jitter(pixels, f_b, f_c, f_s, hue_shift, max_value):
    """Scalar B->C->S->H chain on [h][w][3] floats, clamping each stage."""
    height = len(pixels)
    width = len(pixels[0])
    wr, wg, wb = 0.299, 0.587, 0.114

    def clamp(v):
        return min(max(v, 0.0), max_value)

    stage = [[[clamp(c * f_b) for c in px] for px in row] for row in pixels]

    mean_lum = 0.0
    for row in stage:
        for r, g, b in row:
            mean_lum += wr * r + wg * g + wb * b
    mean_lum /= height * width
    stage = [
        [[clamp(mean_lum + (c - mean_lum) * f_c) for c in px] for px in row]
        for row in stage
    ]

    out = []
    for row in stage:
        new_row = []
        for r, g, b in row:
            lum = wr * r + wg * g + wb * b
            new_row.append([clamp(lum + (c - lum) * f_s) for c in (r, g, b)])
        out.append(new_row)
    stage = out

    out = []
    for row in stage:
        new_row = []
        for r, g, b in row:
            h, s, v = ref_rgb_to_hsv(r / max_value, g / max_value, b / max_value)
            h = (h + hue_shift) % 1.0
            r2, g2, b2 = ref_hsv_to_rgb(h, s, v)
            new_row.append([clamp(r2 * max_value), clamp(g2 * max_value), clamp(b2 * max_value)])
        out.append(new_row)
    return out
