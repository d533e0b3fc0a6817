"""Small numerical kernels shared by the solver and residual modules.

Everything here operates on plain numpy arrays (real or complex) and is
deterministic: no randomness, no iteration-order ambiguity.
"""

from __future__ import annotations

import numpy as np

from .errors import GridError


def check_grid(x):
    x = np.asarray(x, dtype=float)
    if x.size < 2:
        raise GridError("grid needs at least two nodes")
    if not np.all(np.diff(x) > 0):
        raise GridError("grid must be strictly increasing")
    if not np.all(np.isfinite(x)):
        raise GridError("grid contains non-finite nodes")
    return x


def trapezoid(y, x):
    """Composite trapezoid on an arbitrary (graded) grid."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y)
    return np.trapezoid(y, x, axis=0)


def cumtrapz0(y, x):
    """Cumulative trapezoid with value 0 at the first node."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y)
    dx = np.diff(x)
    if y.ndim > 1:
        dx = dx.reshape((-1,) + (1,) * (y.ndim - 1))
    out = np.zeros(y.shape, dtype=np.result_type(y.dtype, float))
    out[1:] = np.cumsum(0.5 * (y[1:] + y[:-1]) * dx, axis=0)
    return out


def cumquad0(y, x):
    """Cumulative integral with piecewise-parabolic cells, 0 at the first node.

    Each cell [x_i, x_{i+1}] integrates the Lagrange parabola through three
    neighbouring nodes (local error O(h^4)); needed where a cumulative
    integral gets divided by r^2 near a singular origin, where trapezoid
    accuracy is not enough.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y)
    n = x.size
    if n < 3:
        return cumtrapz0(y, x)
    # stencil (j0,j1,j2) for cell i: (i-1,i,i+1), first cell uses (0,1,2)
    i = np.arange(n - 1)
    j0 = np.maximum(i - 1, 0)
    j1 = j0 + 1
    j2 = j0 + 2
    a, b = x[:-1], x[1:]
    x0, x1, x2 = x[j0], x[j1], x[j2]

    def basis_integral(xk, xp, xq):
        # integral over [a,b] of (t-xp)(t-xq) / ((xk-xp)(xk-xq))
        den = (xk - xp) * (xk - xq)
        Fb = b**3 / 3.0 - (xp + xq) * b**2 / 2.0 + xp * xq * b
        Fa = a**3 / 3.0 - (xp + xq) * a**2 / 2.0 + xp * xq * a
        return (Fb - Fa) / den

    w0 = basis_integral(x0, x1, x2)
    w1 = basis_integral(x1, x0, x2)
    w2 = basis_integral(x2, x0, x1)
    if y.ndim > 1:
        w0 = w0.reshape((-1,) + (1,) * (y.ndim - 1))
        w1 = w1.reshape((-1,) + (1,) * (y.ndim - 1))
        w2 = w2.reshape((-1,) + (1,) * (y.ndim - 1))
    cells = w0 * y[j0] + w1 * y[j1] + w2 * y[j2]
    out = np.zeros(y.shape, dtype=np.result_type(y.dtype, float))
    out[1:] = np.cumsum(cells, axis=0)
    return out


def fd_weights(x, x0, m):
    """Fornberg weights for derivatives 0..m at x0 from nodes x.

    Returns an array of shape (m+1, len(x)); row k gives the k-th
    derivative weights. Standard recursion, exact for polynomials of
    degree len(x)-1.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    c = np.zeros((m + 1, n))
    c1 = 1.0
    c4 = x[0] - x0
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = x[i] - x0
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[k, i] = c1 * (k * c[k - 1, i - 1] - c5 * c[k, i - 1]) / c2
                c[0, i] = -c1 * c5 * c[0, i - 1] / c2
            for k in range(mn, 0, -1):
                c[k, j] = (c4 * c[k, j] - k * c[k - 1, j]) / c3
            c[0, j] = c4 * c[0, j] / c3
        c1 = c2
    return c


def derivative_nonuniform(x, y, order=1, stencil=5):
    """order-th derivative of samples y(x) at every node, nonuniform grid.

    Uses a sliding Fornberg stencil (default 5 points, 4th-order accurate
    for the first derivative on smooth grids). y may be complex or an
    (N, k) array of columns.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y)
    n = x.size
    stencil = min(stencil, n)
    if stencil <= order:
        raise GridError("stencil too small for requested derivative order")
    out = np.zeros(y.shape, dtype=np.result_type(y.dtype, float))
    half = stencil // 2
    for i in range(n):
        lo = min(max(i - half, 0), n - stencil)
        w = fd_weights(x[lo:lo + stencil], x[i], order)[order]
        out[i] = np.tensordot(w, y[lo:lo + stencil], axes=(0, 0))
    return out


def hermite_eval(xq, x, y, d):
    """Evaluate the piecewise cubic Hermite interpolant (and derivative).

    x: (N,) increasing nodes; y, d: values and derivatives at the nodes,
    shape (N,) or (N, k). Returns (H(xq), H'(xq)). Queries outside the
    node range are clamped to the end intervals.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y)
    d = np.asarray(d)
    xq = np.atleast_1d(np.asarray(xq, dtype=float))
    idx = np.clip(np.searchsorted(x, xq, side="right") - 1, 0, x.size - 2)
    h = x[idx + 1] - x[idx]
    s = (xq - x[idx]) / h
    h00 = (1 + 2 * s) * (1 - s) ** 2
    h10 = s * (1 - s) ** 2
    h01 = s**2 * (3 - 2 * s)
    h11 = s**2 * (s - 1)
    g00 = 6 * s * (s - 1) / h
    g10 = (1 - s) * (1 - 3 * s)
    g01 = -6 * s * (s - 1) / h
    g11 = s * (3 * s - 2)
    if y.ndim > 1:
        sh = (-1,) + (1,) * (y.ndim - 1)
        h00, h10, h01, h11 = (w.reshape(sh) for w in (h00, h10, h01, h11))
        g00, g10, g01, g11 = (w.reshape(sh) for w in (g00, g10, g01, g11))
        h = h.reshape(sh)
    val = h00 * y[idx] + h10 * h * d[idx] + h01 * y[idx + 1] + h11 * h * d[idx + 1]
    der = g00 * y[idx] + g10 * d[idx] + g01 * y[idx + 1] + g11 * d[idx + 1]
    return val, der


def sphere_surface_measure(d):
    """Measure of the unit sphere S^{d-1} in R^d: 2 pi^{d/2} / Gamma(d/2)."""
    from math import gamma, pi

    return 2.0 * pi ** (d / 2.0) / gamma(d / 2.0)
