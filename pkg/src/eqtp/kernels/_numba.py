"""Loop kernels compiled with numba.

Signatures mirror :mod:`eqtp.kernels._numpy`; every kernel counts the scalar
multiplies it executes and returns the total.
"""

from numba import njit


@njit(cache=True)
def dense_bilinear(c, x, y, out):
    n1, n2, n3 = c.shape
    ops = 0
    for b in range(x.shape[0]):
        for k in range(n3):
            out[b, k] = 0.0
        for i in range(n1):
            xi = x[b, i]
            for j in range(n2):
                xy = xi * y[b, j]
                for k in range(n3):
                    out[b, k] += c[i, j, k] * xy
                ops += 2 * n3
    return ops


@njit(cache=True)
def gather_bilinear(coef, idx, x, y, out):
    npass, n3, n1 = coef.shape
    ops = 0
    for b in range(x.shape[0]):
        for k in range(n3):
            out[b, k] = 0.0
        for p in range(npass):
            for k in range(n3):
                for i in range(n1):
                    j = idx[p, k, i]
                    if j >= 0:
                        out[b, k] += coef[p, k, i] * x[b, i] * y[b, j]
                        ops += 2
    return ops


@njit(cache=True)
def coo_matvec(rows, cols, vals, x, out):
    ops = 0
    for b in range(x.shape[0]):
        for r in range(out.shape[1]):
            out[b, r] = 0.0
        for e in range(vals.shape[0]):
            out[b, rows[e]] += vals[e] * x[b, cols[e]]
        ops += vals.shape[0]
    return ops


@njit(cache=True)
def dense_matvec(m, x, out):
    nrow, ncol = m.shape
    ops = 0
    for b in range(x.shape[0]):
        for r in range(nrow):
            out[b, r] = 0.0
            for c in range(ncol):
                out[b, r] += m[r, c] * x[b, c]
            ops += ncol
    return ops


@njit(cache=True)
def batched_matmul(a, b, out):
    nb, n, kk = a.shape
    p = b.shape[2]
    ops = 0
    for s in range(nb):
        for i in range(n):
            for j in range(p):
                out[s, i, j] = 0.0
            for k in range(kk):
                aik = a[s, i, k]
                for j in range(p):
                    out[s, i, j] += aik * b[s, k, j]
                ops += p
    return ops


@njit(cache=True)
def pointwise_mul(f, g, out):
    flat_f = f.reshape(-1)
    flat_g = g.reshape(-1)
    flat_o = out.reshape(-1)
    for i in range(flat_f.shape[0]):
        flat_o[i] = flat_f[i] * flat_g[i]
    return flat_f.shape[0]


@njit(cache=True)
def legendre_synthesis(x, plm, lo, hi, out):
    ntheta = plm.shape[1]
    ops = 0
    for b in range(x.shape[0]):
        for j in range(ntheta):
            for mi in range(out.shape[2]):
                out[b, j, mi] = 0.0
        for l in range(lo, hi + 1):
            for m in range(-l, l + 1):
                row = l * l + l + m
                c = x[b, row]
                for j in range(ntheta):
                    out[b, j, m + hi] += c * plm[row, j]
                ops += ntheta
    return ops


@njit(cache=True)
def legendre_analysis(h, wplm, lo, hi, out):
    ntheta = wplm.shape[1]
    half = (h.shape[2] - 1) // 2
    ops = 0
    for b in range(h.shape[0]):
        for r in range(out.shape[1]):
            out[b, r] = 0.0
        for l in range(lo, hi + 1):
            for m in range(-l, l + 1):
                row = l * l + l + m
                acc = 0.0
                for j in range(ntheta):
                    acc += wplm[row, j] * h[b, j, m + half]
                out[b, row] = acc
                ops += ntheta
    return ops
