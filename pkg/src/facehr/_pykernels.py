"""Pure-Python/numpy versions of the hot loops.

Same signatures and semantics as the compiled ``_ckernels`` module; selected
by :mod:`facehr.kernels` when the extension is unavailable.
"""
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def nlms_filter(d, x, order, mu, eps):
    """Run the a-priori NLMS recursion.

    Parameters
    ----------
    d : ndarray, shape (n,)
        Desired (primary) signal.
    x : ndarray, shape (n,)
        Reference signal.
    order : int
        Number of taps.
    mu, eps : float
        Step size and regularizer.

    Returns
    -------
    y : ndarray, shape (n,)
        Filter output computed with the pre-update weights at each step.
    w : ndarray, shape (order,)
        Weights after the last update.
    """
    d = np.ascontiguousarray(d, dtype=np.float64)
    x = np.ascontiguousarray(x, dtype=np.float64)
    n = d.shape[0]
    # row t is [x[t], x[t-1], ..., x[t-L+1]] with zeros before t=0
    padded = np.concatenate([np.zeros(order - 1), x])
    taps = sliding_window_view(padded, order)[:, ::-1]
    energy = np.einsum("ij,ij->i", taps, taps)
    w = np.zeros(order)
    y = np.empty(n)
    for t in range(n):
        xt = taps[t]
        yt = float(xt @ w)
        y[t] = yt
        w += (mu * (d[t] - yt) / (eps + energy[t])) * xt
    return y, w


def _bilinear(img, xs, ys):
    h, w = img.shape
    xs = np.clip(xs, 0.0, w - 1.0)
    ys = np.clip(ys, 0.0, h - 1.0)
    x0 = np.floor(xs).astype(np.intp)
    y0 = np.floor(ys).astype(np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = xs - x0
    fy = ys - y0
    top = img[y0, x0] * (1.0 - fx) + img[y0, x1] * fx
    bot = img[y1, x0] * (1.0 - fx) + img[y1, x1] * fx
    return top * (1.0 - fy) + bot * fy


def lk_level(prev, grad_x, grad_y, nxt, pts, guess, half, max_iter, tol):
    """Iterative Lucas-Kanade refinement at one pyramid level.

    ``pts`` are point positions (x, y) in this level's coordinates and
    ``guess`` the flow carried down from the coarser level. Returns the
    refined flow (n, 2) and a boolean array that is False where the
    structure tensor is singular.
    """
    pts = np.asarray(pts, dtype=np.float64).reshape(-1, 2)
    flow = np.array(guess, dtype=np.float64).reshape(-1, 2)
    n = pts.shape[0]
    ok = np.ones(n, dtype=bool)
    if n == 0:
        return flow, ok
    off = np.arange(-half, half + 1, dtype=np.float64)
    ox, oy = np.meshgrid(off, off)
    ox = ox.ravel()
    oy = oy.ravel()
    px = pts[:, :1] + ox
    py = pts[:, 1:] + oy
    patch = _bilinear(prev, px, py)
    gx = _bilinear(grad_x, px, py)
    gy = _bilinear(grad_y, px, py)
    gxx = np.sum(gx * gx, axis=1)
    gxy = np.sum(gx * gy, axis=1)
    gyy = np.sum(gy * gy, axis=1)
    det = gxx * gyy - gxy * gxy
    trace = gxx + gyy
    min_eig = 0.5 * (trace - np.sqrt(np.maximum(trace * trace - 4.0 * det, 0.0)))
    ok = min_eig > 1e-6 * ox.size
    active = ok.copy()
    safe_det = np.where(ok, det, 1.0)
    for _ in range(max_iter):
        if not active.any():
            break
        idx = np.flatnonzero(active)
        warped = _bilinear(
            nxt, px[idx] + flow[idx, :1], py[idx] + flow[idx, 1:]
        )
        diff = patch[idx] - warped
        bx = np.sum(diff * gx[idx], axis=1)
        by = np.sum(diff * gy[idx], axis=1)
        dx = (gyy[idx] * bx - gxy[idx] * by) / safe_det[idx]
        dy = (gxx[idx] * by - gxy[idx] * bx) / safe_det[idx]
        flow[idx, 0] += dx
        flow[idx, 1] += dy
        done = dx * dx + dy * dy < tol * tol
        active[idx[done]] = False
    return flow, ok
