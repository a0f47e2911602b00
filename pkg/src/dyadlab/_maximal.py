"""Exact strong maximal function over all grid-aligned (wrapping) boxes on the periodic grid.

The 2-d kernel is O(N**4): for every box height and every start row it sweeps
box widths from long to short, so the running maximum of averages over boxes
ending at a given column only grows.  A final suffix maximum over heights and a
scatter over vertical offsets turns per-box-corner maxima into per-point values.
"""

import numba
import numpy as np


@numba.njit(cache=True)
def _max_1d(f):
    n = f.shape[0]
    prefix = np.zeros(2 * n + 1)
    for i in range(2 * n):
        prefix[i + 1] = prefix[i] + f[i % n]
    out = np.zeros(n)
    for a in range(n):
        best = 0.0
        for length in range(n, 0, -1):
            v = (prefix[a + length] - prefix[a]) / length
            if v > best:
                best = v
            x = (a + length - 1) % n
            if best > out[x]:
                out[x] = best
    return out


@numba.njit(cache=True)
def _max_2d(f):
    n = f.shape[0]
    inv = np.empty(n + 1)
    for l in range(1, n + 1):
        inv[l] = 1.0 / l
    rows = np.zeros((n, 2 * n + 1))
    for x in range(n):
        for j in range(2 * n):
            rows[x, j + 1] = rows[x, j] + f[x, j % n]
    cols = np.empty((2 * n + 1, n))
    best = np.empty(n)
    # corner[h-1, x, s]: best average over boxes of height h starting at row s whose
    # x-extent ends at x (taken over every x-start and width that reaches x last)
    corner = np.zeros((n, n, n))
    for h in range(1, n + 1):
        cols[0, :] = 0.0
        for i in range(2 * n):
            xi = i % n
            for s in range(n):
                cols[i + 1, s] = cols[i, s] + (rows[xi, s + h] - rows[xi, s]) * inv[h]
        m = corner[h - 1]
        for a in range(n):
            best[:] = 0.0
            for width in range(n, 0, -1):
                x = (a + width - 1) % n
                iw = inv[width]
                for s in range(n):
                    v = (cols[a + width, s] - cols[a, s]) * iw
                    if v > best[s]:
                        best[s] = v
                    if best[s] > m[x, s]:
                        m[x, s] = best[s]
    out = np.zeros((n, n))
    tall = np.empty((n, n))
    for x in range(n):
        # tall[d, s]: best over boxes from row s with height > d, i.e. covering row s + d
        for s in range(n):
            tall[n - 1, s] = corner[n - 1, x, s]
        for d in range(n - 2, -1, -1):
            for s in range(n):
                v = corner[d, x, s]
                w = tall[d + 1, s]
                tall[d, s] = v if v > w else w
        for y in range(n):
            b = 0.0
            for s in range(n):
                v = tall[(y - s) % n, s]
                if v > b:
                    b = v
            out[x, y] = b
    return out


def _max_3d(f: np.ndarray) -> np.ndarray:
    """Slab by slab in z: every z-window average is handed to the exact 2-d kernel."""
    n = f.shape[0]
    out = np.zeros_like(f)
    doubled = np.concatenate([f, f], axis=2)
    prefix = np.concatenate([np.zeros(f.shape[:2] + (1,)), np.cumsum(doubled, axis=2)], axis=2)
    for depth in range(1, n + 1):
        for c in range(n):
            slab = (prefix[:, :, c + depth] - prefix[:, :, c]) / depth
            best = _max_2d(np.ascontiguousarray(slab))
            for z in range(c, c + depth):
                np.maximum(out[:, :, z % n], best, out=out[:, :, z % n])
    return out


def strong_maximal(values: np.ndarray) -> np.ndarray:
    """Pointwise sup of averages of ``|values|`` over all grid boxes containing the point."""
    a = np.ascontiguousarray(np.abs(values), dtype=float)
    if a.ndim == 1:
        return _max_1d(a)
    if a.ndim == 2:
        return _max_2d(a)
    if a.ndim == 3:
        return _max_3d(a)
    raise ValueError("only 1, 2 or 3 dimensions are supported")


def maximal_along(values: np.ndarray, axis: int) -> np.ndarray:
    """1-d maximal function applied along one axis of an array."""
    moved = np.moveaxis(np.abs(values), axis, -1)
    flat = np.ascontiguousarray(moved.reshape(-1, moved.shape[-1]), dtype=float)
    out = np.empty_like(flat)
    for i in range(flat.shape[0]):
        out[i] = _max_1d(flat[i])
    return np.moveaxis(out.reshape(moved.shape), -1, axis)
