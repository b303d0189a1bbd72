"""Pixel-level operators composed by the pupil-localization pipeline.

Conventions used across the package:

* a grayscale image is a ``numpy`` array of dtype ``uint8`` and shape
  ``(height, width)``;
* binary masks and edge maps are boolean arrays with the shape of the
  image they were derived from;
* points are ``(x, y)`` pairs where ``x`` is the column and ``y`` the row,
  with integer coordinates naming pixel centers.

Every operator is a pure function: identical inputs produce bit-identical
outputs, and nothing here keeps state between calls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Recorded constants of the artifact (tunable, see README).
LUMA_WEIGHTS = (0.299, 0.587, 0.114)  # BT.601 red/green/blue weights
CANNY_SIGMA = 1.4
CANNY_LOW_FRACTION = 0.10  # low threshold as a fraction of the max gradient
CANNY_HIGH_RATIO = 2.0  # high = ratio * low when not given explicitly
HOUGH_VOTE_FLOOR_SCALE = 0.35  # vote floor as a fraction of 2*pi*r


class DegenerateHistogramError(ValueError):
    """Raised when an image has a single intensity and no threshold splits it."""


class NoBlobError(ValueError):
    """Raised when a mask holds no foreground pixels."""


@dataclass(frozen=True)
class CircleCandidate:
    """One circle hypothesis scored by accumulator votes."""

    center: tuple[float, float]
    radius: float
    score: int


def _require_gray(img: np.ndarray, name: str = "image") -> np.ndarray:
    img = np.asarray(img)
    if img.ndim != 2 or img.dtype != np.uint8:
        raise ValueError(f"{name} must be a 2-D uint8 array, got "
                         f"shape {img.shape} dtype {img.dtype}")
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError(f"{name} must have positive dimensions")
    return img


def _require_mask(mask: np.ndarray, name: str = "mask") -> np.ndarray:
    mask = np.asarray(mask)
    if mask.ndim != 2 or mask.dtype != np.bool_:
        raise ValueError(f"{name} must be a 2-D bool array, got "
                         f"shape {mask.shape} dtype {mask.dtype}")
    if mask.shape[0] < 1 or mask.shape[1] < 1:
        raise ValueError(f"{name} must have positive dimensions")
    return mask


def to_grayscale(rgb: np.ndarray) -> np.ndarray:
    """Convert an (H, W, 3) uint8 raster to intensity via the BT.601 luma sum.

    The channel order is R, G, B and the weights are ``LUMA_WEIGHTS``.
    """
    rgb = np.asarray(rgb)
    if rgb.ndim != 3 or rgb.shape[2] != 3 or rgb.dtype != np.uint8:
        raise ValueError("expected an (H, W, 3) uint8 raster, got "
                         f"shape {rgb.shape} dtype {rgb.dtype}")
    if rgb.shape[0] < 1 or rgb.shape[1] < 1:
        raise ValueError("image must have positive dimensions")
    luma = rgb.astype(np.float64) @ np.array(LUMA_WEIGHTS, dtype=np.float64)
    return np.clip(np.rint(luma), 0, 255).astype(np.uint8)


def otsu_level(img: np.ndarray) -> int:
    """Return the threshold level maximizing between-class variance.

    The split at level ``t`` puts intensities ``<= t`` in the dark class and
    the rest in the bright class.  The comparison is carried out in exact
    integer arithmetic (the variance ranking reduces to comparing
    ``(s1*n0 - s0*n1)**2 / (n0*n1)`` across levels), so ties are exact and
    broken toward the lowest qualifying level.

    Raises ``DegenerateHistogramError`` for constant images, where every
    split leaves one class empty or the variance is zero everywhere.
    """
    img = _require_gray(img)
    hist = np.bincount(img.ravel(), minlength=256).tolist()
    total = sum(hist)

    best_level = -1
    best_num = 0  # squared weighted mean gap, numerator
    best_den = 1
    n0 = 0
    s0 = 0
    s_total = sum(i * h for i, h in enumerate(hist))
    for level in range(256):
        n0 += hist[level]
        s0 += level * hist[level]
        n1 = total - n0
        if n0 == 0 or n1 == 0:
            continue
        s1 = s_total - s0
        num = (s1 * n0 - s0 * n1) ** 2
        den = n0 * n1
        # num/den > best_num/best_den, exactly
        if num * best_den > best_num * den:
            best_num = num
            best_den = den
            best_level = level
    if best_level < 0 or best_num == 0:
        raise DegenerateHistogramError("image histogram has a single class")
    return best_level


def threshold_dark(img: np.ndarray, level: int) -> np.ndarray:
    """Binarize with the dark class as foreground: ``img <= level``."""
    img = _require_gray(img)
    if not 0 <= int(level) <= 255:
        raise ValueError(f"level must be in [0, 255], got {level}")
    return img <= np.uint8(level)


def adaptive_threshold(img: np.ndarray, window: int, bias: float = 0.0) -> np.ndarray:
    """Mark pixels strictly darker than their local window mean minus ``bias``.

    ``window`` is an odd box size; borders are handled by edge replication.
    Window sums are computed exactly with an integral image, so the output
    is deterministic down to the comparison ``img < mean - bias``.
    """
    img = _require_gray(img)
    window = int(window)
    if window < 3 or window % 2 == 0:
        raise ValueError(f"window must be odd and >= 3, got {window}")
    h, w = img.shape
    if window > min(h, w):
        raise ValueError(f"window {window} exceeds image dimensions {w}x{h}")
    r = window // 2
    padded = np.pad(img, r, mode="edge").astype(np.int64)
    integral = np.zeros((h + 2 * r + 1, w + 2 * r + 1), dtype=np.int64)
    integral[1:, 1:] = padded.cumsum(axis=0).cumsum(axis=1)
    sums = (integral[window:, window:] - integral[:-window, window:]
            - integral[window:, :-window] + integral[:-window, :-window])
    means = sums / float(window * window)
    return img < means - float(bias)


def _gaussian_kernel(sigma: float) -> np.ndarray:
    radius = max(1, int(round(3.0 * sigma)))
    xs = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(xs * xs) / (2.0 * sigma * sigma))
    return k / k.sum()


def _blur_f64(f: np.ndarray, sigma: float) -> np.ndarray:
    """Separable gaussian on float64 data with edge-replicated borders."""
    k = _gaussian_kernel(sigma)
    r = len(k) // 2
    padded = np.pad(f, ((r, r), (0, 0)), mode="edge")
    out = np.zeros_like(f)
    for i, wgt in enumerate(k):
        out += wgt * padded[i:i + f.shape[0], :]
    padded = np.pad(out, ((0, 0), (r, r)), mode="edge")
    out = np.zeros_like(f)
    for i, wgt in enumerate(k):
        out += wgt * padded[:, i:i + f.shape[1]]
    return out


def gaussian_blur(img: np.ndarray, sigma: float) -> np.ndarray:
    """Gaussian-blur a grayscale image (edge-replicated borders)."""
    img = _require_gray(img)
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    out = _blur_f64(img.astype(np.float64), sigma)
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def _sobel(f: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    p = np.pad(f, 1, mode="edge")
    h, w = f.shape
    c = p[1:h + 1, :]
    up = p[0:h, :]
    dn = p[2:h + 2, :]
    colsum = up + 2.0 * c + dn  # vertical [1,2,1] smoothing
    gx = colsum[:, 2:w + 2] - colsum[:, 0:w]
    cl = p[:, 1:w + 1]
    lf = p[:, 0:w]
    rt = p[:, 2:w + 2]
    rowsum = lf + 2.0 * cl + rt
    gy = rowsum[2:h + 2, :] - rowsum[0:h, :]
    return gx, gy


# Neighbor offsets for the eight 45-degree gradient sectors, (dx, dy).
_SECTOR_DX = np.array([1, 1, 0, -1, -1, -1, 0, 1], dtype=np.int64)
_SECTOR_DY = np.array([0, 1, 1, 1, 0, -1, -1, -1], dtype=np.int64)


def canny(img: np.ndarray, sigma: float = CANNY_SIGMA,
          low: float | None = None, high: float | None = None) -> np.ndarray:
    """Four-stage edge detector: blur, Sobel gradient, thinning, hysteresis.

    When thresholds are omitted they are derived from the gradient image:
    ``low = CANNY_LOW_FRACTION * max_magnitude`` and
    ``high = CANNY_HIGH_RATIO * low``.  Thinning keeps a pixel only when its
    magnitude beats the neighbor behind it along the gradient and at least
    ties the neighbor ahead, so ridge plateaus collapse to single lines.
    """
    img = _require_gray(img)
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    f = _blur_f64(img.astype(np.float64), sigma)
    gx, gy = _sobel(f)
    mag = np.hypot(gx, gy)
    peak = float(mag.max())
    if peak == 0.0:
        return np.zeros(img.shape, dtype=bool)

    if low is None and high is None:
        low = CANNY_LOW_FRACTION * peak
        high = CANNY_HIGH_RATIO * low
    elif low is None:
        low = float(high) / CANNY_HIGH_RATIO
    elif high is None:
        high = CANNY_HIGH_RATIO * float(low)
    low = float(low)
    high = float(high)
    if not 0.0 < low <= high:
        raise ValueError(f"need 0 < low <= high, got low={low} high={high}")

    angle = np.arctan2(gy, gx)
    sector = np.round(angle / (math.pi / 4.0)).astype(np.int64) % 8
    dx = _SECTOR_DX[sector]
    dy = _SECTOR_DY[sector]
    h, w = img.shape
    magp = np.pad(mag, 1, mode="edge")
    yy, xx = np.indices((h, w))
    ahead = magp[yy + 1 + dy, xx + 1 + dx]
    behind = magp[yy + 1 - dy, xx + 1 - dx]
    keep = (mag > 0.0) & (mag >= ahead) & (mag > behind)
    thin = np.where(keep, mag, 0.0)

    strong = thin >= high
    weak = thin >= low
    edges = strong.copy()
    while True:
        grown = _dilate8(edges) & weak & ~edges
        if not grown.any():
            break
        edges |= grown
    return edges


def _dilate8(b: np.ndarray) -> np.ndarray:
    p = np.pad(b, 1, mode="constant", constant_values=False)
    h, w = b.shape
    out = b.copy()
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if dy == 0 and dx == 0:
                continue
            out |= p[1 + dy:1 + dy + h, 1 + dx:1 + dx + w]
    return out


def largest_blob_centroid(mask: np.ndarray) -> tuple[float, float]:
    """Area centroid of the largest 8-connected foreground component.

    Ties in area go to the component whose first pixel appears earliest
    in row-major scan order.  Raises ``NoBlobError`` on an empty mask.
    """
    mask = _require_mask(mask)
    ys, xs = np.nonzero(mask)
    n = len(ys)
    if n == 0:
        raise NoBlobError("mask has no foreground pixels")

    label_img = np.full(mask.shape, -1, dtype=np.int64)
    parent = list(range(n))

    def find(a: int) -> int:
        root = a
        while parent[root] != root:
            root = parent[root]
        while parent[a] != root:
            parent[a], a = root, parent[a]
        return root

    h, w = mask.shape
    ys_l = ys.tolist()
    xs_l = xs.tolist()
    for i in range(n):
        y = ys_l[i]
        x = xs_l[i]
        label_img[y, x] = i
        # previously visited 8-neighbors in scan order
        if y > 0:
            for nx in (x - 1, x, x + 1):
                if 0 <= nx < w:
                    j = label_img[y - 1, nx]
                    if j >= 0:
                        ra, rb = find(i), find(int(j))
                        if ra != rb:
                            parent[max(ra, rb)] = min(ra, rb)
        if x > 0:
            j = label_img[y, x - 1]
            if j >= 0:
                ra, rb = find(i), find(int(j))
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)

    roots = np.array([find(i) for i in range(n)], dtype=np.int64)
    areas = np.bincount(roots, minlength=n)
    best_area = int(areas.max())
    # earliest-rooted component among the ties (roots are minimal indices)
    best_root = int(np.nonzero(areas == best_area)[0][0])
    sel = roots == best_root
    return (float(xs[sel].mean()), float(ys[sel].mean()))


def hough_circles(edges: np.ndarray, r_min: int, r_max: int, *,
                  vote_floor_scale: float = HOUGH_VOTE_FLOOR_SCALE) -> list[CircleCandidate]:
    """Rank circle candidates by accumulator votes over (cx, cy, r).

    Each edge pixel votes for every integer center whose rounded distance
    equals a radius in ``[r_min, r_max]``.  Candidates are voxels that are
    maximal over their 26-neighborhood and clear a per-radius vote floor of
    ``vote_floor_scale * 2 * pi * r``; near-duplicate peaks (centers within
    ``max(2, r_min)`` pixels of a stronger one) are suppressed.  Centers get
    sub-pixel refinement by a 3x3 accumulator centroid around the peak.
    """
    edges = _require_mask(edges, "edges")
    h, w = edges.shape
    r_min = int(r_min)
    r_max = int(r_max)
    if not 1 <= r_min <= r_max:
        raise ValueError(f"need 1 <= r_min <= r_max, got {r_min}, {r_max}")
    if r_max >= min(h, w) / 2:
        raise ValueError(f"r_max {r_max} must be < min(width, height)/2 = {min(h, w) / 2}")

    ys, xs = np.nonzero(edges)
    if len(ys) == 0:
        return []

    span = np.arange(-r_max, r_max + 1, dtype=np.int64)
    off_x, off_y = np.meshgrid(span, span)
    dist = np.round(np.hypot(off_x, off_y)).astype(np.int64)

    radii = list(range(r_min, r_max + 1))
    acc = np.zeros((len(radii), h, w), dtype=np.int64)
    for k, r in enumerate(radii):
        ring = dist == r
        odx = off_x[ring]
        ody = off_y[ring]
        cy = ys[:, None] + ody[None, :]
        cx = xs[:, None] + odx[None, :]
        ok = (cy >= 0) & (cy < h) & (cx >= 0) & (cx < w)
        flat = cy[ok] * w + cx[ok]
        acc[k] = np.bincount(flat, minlength=h * w).reshape(h, w)

    floors = np.array([max(1, math.ceil(vote_floor_scale * 2.0 * math.pi * r))
                       for r in radii], dtype=np.int64)
    padded = np.pad(acc, 1, mode="constant", constant_values=-1)
    neighbor_max = np.full_like(acc, -1)
    for dr in (-1, 0, 1):
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                if dr == dy == dx == 0:
                    continue
                view = padded[1 + dr:1 + dr + len(radii), 1 + dy:1 + dy + h, 1 + dx:1 + dx + w]
                np.maximum(neighbor_max, view, out=neighbor_max)
    is_peak = (acc >= neighbor_max) & (acc >= floors[:, None, None])

    rk, py, px = np.nonzero(is_peak)
    if len(rk) == 0:
        return []
    scores = acc[rk, py, px]
    order = np.lexsort((px, py, rk, -scores))

    sep2 = float(max(2, r_min)) ** 2
    kept: list[tuple[int, int]] = []
    out: list[CircleCandidate] = []
    for idx in order:
        y = int(py[idx])
        x = int(px[idx])
        if any((x - kx) ** 2 + (y - ky) ** 2 <= sep2 for kx, ky in kept):
            continue
        kept.append((x, y))
        k = int(rk[idx])
        y0, y1 = max(0, y - 1), min(h, y + 2)
        x0, x1 = max(0, x - 1), min(w, x + 2)
        win = acc[k, y0:y1, x0:x1].astype(np.float64)
        wy, wx = np.indices(win.shape)
        total = win.sum()
        cx_ref = x0 + float((win * wx).sum() / total)
        cy_ref = y0 + float((win * wy).sum() / total)
        out.append(CircleCandidate(center=(cx_ref, cy_ref),
                                   radius=float(radii[k]),
                                   score=int(scores[idx])))
    return out
