# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the hot loops in :mod:`facehr._pykernels`."""
import numpy as np

from libc.math cimport floor, sqrt


def nlms_filter(d, x, int order, double mu, double eps):
    cdef const double[::1] dv = np.ascontiguousarray(d, dtype=np.float64)
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = dv.shape[0]
    cdef Py_ssize_t t, k
    cdef double yt, energy, step, xk
    out = np.empty(n, dtype=np.float64)
    weights = np.zeros(order, dtype=np.float64)
    cdef double[::1] y = out
    cdef double[::1] w = weights
    with nogil:
        for t in range(n):
            yt = 0.0
            energy = 0.0
            for k in range(order):
                if t - k >= 0:
                    xk = xv[t - k]
                    yt = yt + w[k] * xk
                    energy = energy + xk * xk
            y[t] = yt
            step = mu * (dv[t] - yt) / (eps + energy)
            for k in range(order):
                if t - k >= 0:
                    w[k] = w[k] + step * xv[t - k]
    return out, weights


cdef inline double _sample(const double[:, ::1] img, double x, double y) noexcept nogil:
    cdef Py_ssize_t h = img.shape[0]
    cdef Py_ssize_t w = img.shape[1]
    cdef Py_ssize_t x0, y0, x1, y1
    cdef double fx, fy
    if x < 0.0:
        x = 0.0
    elif x > w - 1.0:
        x = w - 1.0
    if y < 0.0:
        y = 0.0
    elif y > h - 1.0:
        y = h - 1.0
    x0 = <Py_ssize_t>floor(x)
    y0 = <Py_ssize_t>floor(y)
    x1 = x0 + 1 if x0 + 1 < w else w - 1
    y1 = y0 + 1 if y0 + 1 < h else h - 1
    fx = x - x0
    fy = y - y0
    return ((img[y0, x0] * (1.0 - fx) + img[y0, x1] * fx) * (1.0 - fy)
            + (img[y1, x0] * (1.0 - fx) + img[y1, x1] * fx) * fy)


def lk_level(prev, grad_x, grad_y, nxt, pts, guess, int half, int max_iter, double tol):
    cdef const double[:, ::1] I = np.ascontiguousarray(prev, dtype=np.float64)
    cdef const double[:, ::1] Ix = np.ascontiguousarray(grad_x, dtype=np.float64)
    cdef const double[:, ::1] Iy = np.ascontiguousarray(grad_y, dtype=np.float64)
    cdef const double[:, ::1] J = np.ascontiguousarray(nxt, dtype=np.float64)
    cdef const double[:, ::1] P = np.ascontiguousarray(np.reshape(pts, (-1, 2)), dtype=np.float64)
    flow_arr = np.array(np.reshape(guess, (-1, 2)), dtype=np.float64, order="C")
    cdef double[:, ::1] F = flow_arr
    cdef Py_ssize_t n = P.shape[0]
    ok_arr = np.ones(n, dtype=np.uint8)
    cdef unsigned char[::1] ok = ok_arr
    cdef int side = 2 * half + 1
    cdef int m = side * side
    patch_arr = np.empty(m, dtype=np.float64)
    gx_arr = np.empty(m, dtype=np.float64)
    gy_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] patch = patch_arr
    cdef double[::1] gx = gx_arr
    cdef double[::1] gy = gy_arr
    cdef Py_ssize_t i, a, b, k
    cdef int it
    cdef double px, py, sx, sy, gxx, gxy, gyy, det, tr, min_eig, bx, by, diff, dx, dy
    with nogil:
        for i in range(n):
            px = P[i, 0]
            py = P[i, 1]
            gxx = 0.0
            gxy = 0.0
            gyy = 0.0
            k = 0
            for a in range(-half, half + 1):
                for b in range(-half, half + 1):
                    sx = px + b
                    sy = py + a
                    patch[k] = _sample(I, sx, sy)
                    gx[k] = _sample(Ix, sx, sy)
                    gy[k] = _sample(Iy, sx, sy)
                    gxx = gxx + gx[k] * gx[k]
                    gxy = gxy + gx[k] * gy[k]
                    gyy = gyy + gy[k] * gy[k]
                    k = k + 1
            det = gxx * gyy - gxy * gxy
            tr = gxx + gyy
            min_eig = tr * tr - 4.0 * det
            if min_eig < 0.0:
                min_eig = 0.0
            min_eig = 0.5 * (tr - sqrt(min_eig))
            if not (min_eig > 1e-6 * m):
                ok[i] = 0
                continue
            for it in range(max_iter):
                bx = 0.0
                by = 0.0
                k = 0
                for a in range(-half, half + 1):
                    for b in range(-half, half + 1):
                        diff = patch[k] - _sample(J, px + b + F[i, 0], py + a + F[i, 1])
                        bx = bx + diff * gx[k]
                        by = by + diff * gy[k]
                        k = k + 1
                dx = (gyy * bx - gxy * by) / det
                dy = (gxx * by - gxy * bx) / det
                F[i, 0] = F[i, 0] + dx
                F[i, 1] = F[i, 1] + dy
                if dx * dx + dy * dy < tol * tol:
                    break
    return flow_arr, ok_arr.astype(bool)
