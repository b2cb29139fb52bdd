"""Corner selection and sparse pyramidal flow tracking.

Corners are scored by the minimum eigenvalue of the local gradient structure
tensor and thinned by non-maximum suppression. Tracking solves the classic
iterative least-squares flow update per point, coarse to fine over a blurred
and decimated image pyramid, with bilinear subpixel sampling and clamp-to-edge
borders throughout.

All arrays are (h, w) grayscale images; point coordinates are (x, y) with x
along columns. Both operations are pure; points are processed independently
and results keep input order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch

# 2x2 gradient matrices with mean min-eigenvalue below this are treated as
# untrackable (flat or single-edge windows)
MIN_EIG_FLOOR = 1e-3

_BLUR = np.array([1.0, 4.0, 6.0, 4.0, 1.0]) / 16.0


@dataclass(frozen=True)
class FlowConfig:
    max_corners: int = 1250
    quality_level: float = 0.01
    min_distance: float = 7.0
    pyramid_levels: int = 3
    window: int = 21
    max_iterations: int = 30
    epsilon: float = 0.01

    def __post_init__(self):
        if self.window < 3 or self.window % 2 == 0:
            raise ValueError("window must be odd and >= 3")
        if self.pyramid_levels < 1:
            raise ValueError("pyramid_levels must be >= 1")
        if not 0.0 < self.quality_level < 1.0:
            raise ValueError("quality_level must lie in (0, 1)")


@dataclass(frozen=True)
class FlowTrack:
    prev: tuple[float, float]
    cur: tuple[float, float]
    tracked: bool
    residual: float

    @property
    def displacement(self) -> tuple[float, float]:
        return (self.cur[0] - self.prev[0], self.cur[1] - self.prev[1])


def _blur5(img: np.ndarray) -> np.ndarray:
    """Separable 5-tap blur with clamp-to-edge borders."""
    padded = np.pad(img, 2, mode="edge")
    tmp = np.zeros_like(img, dtype=np.float32)
    for k in range(5):
        tmp += _BLUR[k] * padded[2:-2, k:k + img.shape[1]]
    padded = np.pad(tmp, 2, mode="edge")
    out = np.zeros_like(img, dtype=np.float32)
    for k in range(5):
        out += _BLUR[k] * padded[k:k + img.shape[0], 2:-2]
    return out


def build_pyramid(img: np.ndarray, levels: int) -> list[np.ndarray]:
    """Level 0 is the input; each next level is blurred then 2x decimated."""
    base = np.asarray(img, dtype=np.float32)
    pyr = [base]
    for _ in range(levels - 1):
        pyr.append(_blur5(pyr[-1])[::2, ::2])
    return pyr


def _bilinear(img: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Sample img at float coordinates with clamp-to-edge behavior."""
    h, w = img.shape
    x = np.clip(x, 0.0, w - 1.0)
    y = np.clip(y, 0.0, h - 1.0)
    x0 = np.minimum(x.astype(np.int32), w - 2) if w > 1 else np.zeros_like(x, np.int32)
    y0 = np.minimum(y.astype(np.int32), h - 2) if h > 1 else np.zeros_like(y, np.int32)
    fx = (x - x0).astype(np.float32)
    fy = (y - y0).astype(np.float32)
    flat = img.ravel()
    idx = y0.astype(np.intp) * w + x0
    p00 = flat[idx]
    p01 = flat[idx + 1] if w > 1 else p00
    p10 = flat[idx + w] if h > 1 else p00
    p11 = flat[idx + w + 1] if (w > 1 and h > 1) else p00
    top = p00 + fx * (p01 - p00)
    bot = p10 + fx * (p11 - p10)
    return top + fy * (bot - top)


def detect_corners(img: np.ndarray, cfg: FlowConfig) -> list[tuple[float, float]]:
    """Strongest-first corner list with non-maximum suppression.

    Flat images return an empty list. At most cfg.max_corners points are
    returned and all pairwise distances respect cfg.min_distance.
    """
    gray = np.asarray(img, dtype=np.float32)
    h, w = gray.shape
    if h < cfg.window or w < cfg.window:
        return []

    gx = np.zeros_like(gray)
    gy = np.zeros_like(gray)
    gx[:, 1:-1] = (gray[:, 2:] - gray[:, :-2]) * 0.5
    gy[1:-1, :] = (gray[2:, :] - gray[:-2, :]) * 0.5

    # 3x3 box sums of the structure tensor entries
    def box3(a):
        s = np.zeros_like(a)
        p = np.pad(a, 1, mode="constant")
        for dy in range(3):
            for dx in range(3):
                s += p[dy:dy + h, dx:dx + w]
        return s

    sxx = box3(gx * gx)
    syy = box3(gy * gy)
    sxy = box3(gx * gy)
    trace = sxx + syy
    delta = np.sqrt((sxx - syy) ** 2 + 4.0 * sxy * sxy)
    response = 0.5 * (trace - delta)

    margin = cfg.window // 2
    response[:margin, :] = 0
    response[-margin:, :] = 0
    response[:, :margin] = 0
    response[:, -margin:] = 0

    peak = float(response.max())
    if peak <= 0.0:
        return []
    threshold = cfg.quality_level * peak

    # local 3x3 maxima only, then greedy distance suppression strongest-first
    p = np.pad(response, 1, mode="constant")
    is_max = np.ones_like(response, dtype=bool)
    for dy in range(3):
        for dx in range(3):
            if dy == 1 and dx == 1:
                continue
            is_max &= response >= p[dy:dy + h, dx:dx + w]
    ys, xs = np.nonzero((response >= threshold) & is_max)
    scores = response[ys, xs]
    order = np.argsort(-scores, kind="stable")

    cell = max(cfg.min_distance, 1.0)
    buckets: dict[tuple[int, int], list[tuple[float, float]]] = {}
    min_d2 = cfg.min_distance * cfg.min_distance
    corners: list[tuple[float, float]] = []
    for k in order:
        x, y = float(xs[k]), float(ys[k])
        bx, by = int(x / cell), int(y / cell)
        ok = True
        for nx in (bx - 1, bx, bx + 1):
            for ny in (by - 1, by, by + 1):
                for (cx, cy) in buckets.get((nx, ny), ()):
                    if (cx - x) ** 2 + (cy - y) ** 2 < min_d2:
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                break
        if ok:
            corners.append((x, y))
            buckets.setdefault((bx, by), []).append((x, y))
            if len(corners) >= cfg.max_corners:
                break
    return corners


def track_pyr_lk(prev: np.ndarray, cur: np.ndarray, points,
                 cfg: FlowConfig | None = None) -> list[FlowTrack]:
    """Track points from prev to cur, coarse to fine over the pyramid.

    A point comes back untracked when its window leaves the image or the
    gradient matrix is too ill-conditioned to invert meaningfully.
    """
    cfg = cfg or FlowConfig()
    prev = np.asarray(prev, dtype=np.float32)
    cur = np.asarray(cur, dtype=np.float32)
    if prev.shape != cur.shape:
        raise DimensionMismatch(f"frame sizes differ: {prev.shape} vs {cur.shape}")

    pts = np.asarray([(p[0], p[1]) for p in points], dtype=np.float64).reshape(-1, 2)
    n = len(pts)
    if n == 0:
        return []

    # cap levels so the top of the pyramid still fits a window
    levels = cfg.pyramid_levels
    min_dim = min(prev.shape)
    while levels > 1 and (min_dim >> (levels - 1)) < cfg.window + 2:
        levels -= 1
    pyr_prev = build_pyramid(prev, levels)
    pyr_cur = build_pyramid(cur, levels)

    hw = cfg.window // 2
    off = np.arange(-hw, hw + 1, dtype=np.float64)
    off_x = np.tile(off, cfg.window)                  # row-major window offsets
    off_y = np.repeat(off, cfg.window)
    offg_x = np.tile(np.arange(-hw - 1, hw + 2, dtype=np.float64), cfg.window + 2)
    offg_y = np.repeat(np.arange(-hw - 1, hw + 2, dtype=np.float64), cfg.window + 2)

    tracked = np.ones(n, dtype=bool)
    g = np.zeros((n, 2))
    v = np.zeros((n, 2))
    residual = np.zeros(n)
    win_area = cfg.window * cfg.window

    for level in range(levels - 1, -1, -1):
        img_i = pyr_prev[level]
        img_j = pyr_cur[level]
        h, w = img_i.shape
        p_l = pts / (2 ** level)
        v[:] = 0.0

        active = tracked.copy()
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break

        # template patch with a 1-px apron for central-difference gradients
        gxs = p_l[idx, 0:1] + offg_x[None, :]
        gys = p_l[idx, 1:2] + offg_y[None, :]
        patch = _bilinear(img_i, gxs, gys).reshape(idx.size, cfg.window + 2, cfg.window + 2)
        tmpl = patch[:, 1:-1, 1:-1].reshape(idx.size, -1)
        ix = 0.5 * (patch[:, 1:-1, 2:] - patch[:, 1:-1, :-2]).reshape(idx.size, -1)
        iy = 0.5 * (patch[:, 2:, 1:-1] - patch[:, :-2, 1:-1]).reshape(idx.size, -1)

        gxx = np.sum(ix * ix, axis=1, dtype=np.float64)
        gyy = np.sum(iy * iy, axis=1, dtype=np.float64)
        gxy = np.sum(ix * iy, axis=1, dtype=np.float64)
        min_eig = 0.5 * (gxx + gyy - np.sqrt((gxx - gyy) ** 2 + 4 * gxy * gxy)) / win_area
        bad = min_eig < MIN_EIG_FLOOR
        tracked[idx[bad]] = False
        keep = ~bad
        idx = idx[keep]
        if idx.size == 0:
            continue
        tmpl, ix, iy = tmpl[keep], ix[keep], iy[keep]
        gxx, gyy, gxy = gxx[keep], gyy[keep], gxy[keep]
        det = gxx * gyy - gxy * gxy

        live = np.ones(idx.size, dtype=bool)  # not yet converged at this level
        for _ in range(cfg.max_iterations):
            sub = np.nonzero(live)[0]
            if sub.size == 0:
                break
            rows = idx[sub]
            cx = p_l[rows, 0] + g[rows, 0] + v[rows, 0]
            cy = p_l[rows, 1] + g[rows, 1] + v[rows, 1]
            out = (cx < 0) | (cx > w - 1) | (cy < 0) | (cy > h - 1)
            if np.any(out):
                tracked[rows[out]] = False
                live[sub[out]] = False
                sub = sub[~out]
                if sub.size == 0:
                    break
                rows = idx[sub]
                cx, cy = cx[~out], cy[~out]
            jxs = cx[:, None] + off_x[None, :]
            jys = cy[:, None] + off_y[None, :]
            window_j = _bilinear(img_j, jxs, jys)
            it = window_j - tmpl[sub]
            bx = np.sum(it * ix[sub], axis=1, dtype=np.float64)
            by = np.sum(it * iy[sub], axis=1, dtype=np.float64)
            d = det[sub]
            dx = -(gyy[sub] * bx - gxy[sub] * by) / d
            dy = -(gxx[sub] * by - gxy[sub] * bx) / d
            v[rows, 0] += dx
            v[rows, 1] += dy
            done = np.hypot(dx, dy) < cfg.epsilon
            live[sub[done]] = False

        if level == 0:
            rows = np.nonzero(tracked)[0]
            if rows.size:
                cx = p_l[rows, 0] + g[rows, 0] + v[rows, 0]
                cy = p_l[rows, 1] + g[rows, 1] + v[rows, 1]
                out = (cx < 0) | (cx > w - 1) | (cy < 0) | (cy > h - 1)
                tracked[rows[out]] = False
                rows = rows[~out]
                if rows.size:
                    jxs = cx[~out][:, None] + off_x[None, :]
                    jys = cy[~out][:, None] + off_y[None, :]
                    gxs = p_l[rows, 0:1] + off_x[None, :]
                    gys = p_l[rows, 1:2] + off_y[None, :]
                    diff = _bilinear(img_j, jxs, jys) - _bilinear(img_i, gxs, gys)
                    residual[rows] = np.sum(diff * diff, axis=1, dtype=np.float64)
        g = 2.0 * (g + v)

    d_final = g / 2.0  # undo the last doubling after level 0
    tracks = []
    for i in range(n):
        px, py = float(pts[i, 0]), float(pts[i, 1])
        if tracked[i]:
            tracks.append(FlowTrack((px, py),
                                    (px + float(d_final[i, 0]), py + float(d_final[i, 1])),
                                    True, float(residual[i])))
        else:
            tracks.append(FlowTrack((px, py), (px, py), False, 0.0))
    return tracks
