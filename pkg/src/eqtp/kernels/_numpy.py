"""Vectorized numpy kernels.

Each kernel writes into a preallocated ``out`` and returns the multiply count
of the reference loop algorithm (the same count the numba kernels accumulate).
"""

import numpy as np


def dense_bilinear(c, x, y, out):
    n1, n2, n3 = c.shape
    out[:] = np.einsum("bi,bj,ijk->bk", x, y, c, optimize=True)
    return 2 * x.shape[0] * n1 * n2 * n3


def gather_bilinear(coef, idx, x, y, out):
    out[:] = 0.0
    ops = 0
    for p in range(coef.shape[0]):
        k, i = np.nonzero(idx[p] >= 0)
        if len(k) == 0:
            continue
        j = idx[p][k, i]
        terms = coef[p][k, i] * x[:, i] * y[:, j]
        np.add.at(out, (slice(None), k), terms)
        ops += 2 * x.shape[0] * len(k)
    return ops


def coo_matvec(rows, cols, vals, x, out):
    out[:] = 0.0
    np.add.at(out, (slice(None), rows), vals * x[:, cols])
    return x.shape[0] * len(vals)


def dense_matvec(m, x, out):
    np.matmul(x, m.T, out=out)
    return x.shape[0] * m.shape[0] * m.shape[1]


def batched_matmul(a, b, out):
    np.matmul(a, b, out=out)
    return a.shape[0] * a.shape[1] * a.shape[2] * b.shape[2]


def pointwise_mul(f, g, out):
    np.multiply(f, g, out=out)
    return f.size


def _rows_for_m(m, lo, hi):
    return np.array([l * l + l + m for l in range(max(lo, abs(m)), hi + 1)], dtype=np.int64)


def legendre_synthesis(x, plm, lo, hi, out):
    out[:] = 0.0
    ops = 0
    for m in range(-hi, hi + 1):
        rows = _rows_for_m(m, lo, hi)
        if len(rows) == 0:
            continue
        out[:, :, m + hi] = x[:, rows] @ plm[rows, :]
        ops += x.shape[0] * plm.shape[1] * len(rows)
    return ops


def legendre_analysis(h, wplm, lo, hi, out):
    out[:] = 0.0
    half = (h.shape[2] - 1) // 2
    ops = 0
    for m in range(-hi, hi + 1):
        rows = _rows_for_m(m, lo, hi)
        if len(rows) == 0:
            continue
        out[:, rows] = h[:, :, m + half] @ wplm[rows, :].T
        ops += h.shape[0] * wplm.shape[1] * len(rows)
    return ops
