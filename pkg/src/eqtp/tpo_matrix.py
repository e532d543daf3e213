"""Matrix tensor product: embed irreps into an l~ x l~ tensor-product-rep matrix,
multiply the two matrices, and extract irreps again with the same CG tables.

The embedding ``X[m1, m2] = sum_l sum_m3 C^{l,m3}_{l~,m1,l~,m2} x^(l)_m3`` is an
orthogonal change of basis restricted to degrees 0..2l~, so extraction is its
transpose. ``naive`` uses the dense embedding/extraction matrices; ``sparse``
keeps only the nonzero CG entries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels
from .irreps import IrrepVector, single_copies
from .wigner import cg_real, cg_real_dense, triangle

IMPLS = ("naive", "sparse")


def default_l_tilde(L1: int, L2: int, L3: int) -> int:
    return math.ceil(max(L1, L2, L3) / 2)


@dataclass(frozen=True, eq=False)
class TensorRepMatrix:
    l_tilde: int
    values: np.ndarray  # (..., 2l~+1, 2l~+1)

    def __post_init__(self):
        n = 2 * self.l_tilde + 1
        if self.values.shape[-2:] != (n, n):
            raise ValueError(f"matrix for l_tilde={self.l_tilde} needs trailing shape {(n, n)}")


@lru_cache(maxsize=128)
def embedding_matrix(L: int, l_tilde: int) -> np.ndarray:
    """Dense ``((2l~+1)^2, (L+1)^2)`` map from single copies 0..L to the flattened matrix."""
    n = 2 * l_tilde + 1
    out = np.zeros((n * n, (L + 1) ** 2))
    for l in range(min(L, 2 * l_tilde) + 1):
        c = cg_real_dense(l_tilde, l_tilde, l)
        out[:, l * l: (l + 1) ** 2] = c.reshape(n * n, 2 * l + 1)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=128)
def embedding_coo(L: int, l_tilde: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Nonzero entries of :func:`embedding_matrix` as (rows, cols, vals)."""
    n = 2 * l_tilde + 1
    rows, cols, vals = [], [], []
    for l in range(min(L, 2 * l_tilde) + 1):
        t = cg_real(l_tilde, l_tilde, l)
        rows.append((t.m1 + l_tilde) * n + (t.m2 + l_tilde))
        cols.append(l * l + l + t.m3)
        vals.append(t.values)
    arrays = tuple(np.concatenate(a) if a else np.zeros(0, dtype=d)
                   for a, d in zip((rows, cols, vals), (np.int64, np.int64, np.float64)))
    for a in arrays:
        a.setflags(write=False)
    return arrays


def _check(x: IrrepVector, name: str) -> int:
    if not x.irreps.is_single_copies():
        raise ValueError(f"{name} must be single copies 0..L, got {x.irreps}")
    return x.irreps.lmax


def _embed_flat(flat: np.ndarray, L: int, l_tilde: int, impl: str, counter) -> np.ndarray:
    n = 2 * l_tilde + 1
    if impl == "naive":
        return kernels.dense_matvec(embedding_matrix(L, l_tilde), flat, counter, "mtp.embed")
    if impl == "sparse":
        rows, cols, vals = embedding_coo(L, l_tilde)
        return kernels.coo_matvec(rows, cols, vals, flat, n * n, counter, "mtp.embed")
    raise ValueError(f"unknown MTP impl {impl!r}; expected one of {IMPLS}")


def mtp_embed(x: IrrepVector, l_tilde: int, impl: str = "sparse", counter=None) -> TensorRepMatrix:
    L = _check(x, "x")
    if 2 * l_tilde < L:
        raise ValueError(f"l_tilde={l_tilde} too small for degree {L} (need 2*l_tilde >= L)")
    n = 2 * l_tilde + 1
    flat = _embed_flat(x.data.reshape(-1, x.irreps.dim), L, l_tilde, impl, counter)
    return TensorRepMatrix(l_tilde, flat.reshape(x.data.shape[:-1] + (n, n)))


def mtp_extract(z: TensorRepMatrix, L_out: int, impl: str = "sparse", counter=None) -> IrrepVector:
    """Project a tensor-product-rep matrix onto single copies 0..L_out."""
    lt = z.l_tilde
    if L_out > 2 * lt:
        raise ValueError(f"L_out={L_out} exceeds 2*l_tilde={2 * lt}")
    n = 2 * lt + 1
    flat = z.values.reshape(-1, n * n)
    dim = (L_out + 1) ** 2
    if impl == "naive":
        out = kernels.dense_matvec(embedding_matrix(L_out, lt).T, flat, counter, "mtp.extract")
    elif impl == "sparse":
        rows, cols, vals = embedding_coo(L_out, lt)
        out = kernels.coo_matvec(cols, rows, vals, flat, dim, counter, "mtp.extract")
    else:
        raise ValueError(f"unknown MTP impl {impl!r}; expected one of {IMPLS}")
    return IrrepVector(single_copies(L_out), out.reshape(z.values.shape[:-2] + (dim,)))


def mtp(x: IrrepVector, y: IrrepVector, L3: int | None = None, impl: str = "sparse",
        counter=None, l_tilde: int | None = None) -> IrrepVector:
    """``extract(embed(x) @ embed(y))`` up to degree L3 (default L1 + L2, capped at 2 l~)."""
    L1, L2 = _check(x, "x"), _check(y, "y")
    if x.data.shape[:-1] != y.data.shape[:-1]:
        raise ValueError(f"batch shapes differ: {x.data.shape[:-1]} vs {y.data.shape[:-1]}")
    if L3 is None:
        L3 = L1 + L2
    if l_tilde is None:
        l_tilde = default_l_tilde(L1, L2, L3)
    if L3 > 2 * l_tilde:
        raise ValueError(f"L3={L3} exceeds 2*l_tilde={2 * l_tilde}")
    n = 2 * l_tilde + 1
    batch = x.data.shape[:-1]
    a = mtp_embed(x, l_tilde, impl, counter).values.reshape(-1, n, n)
    b = mtp_embed(y, l_tilde, impl, counter).values.reshape(-1, n, n)
    z = kernels.batched_matmul(a, b, counter, "mtp.matmul")
    return mtp_extract(TensorRepMatrix(l_tilde, z.reshape(batch + (n, n))), L3, impl, counter)


def mtp_path_tensor(l1: int, l2: int, l3: int, l_tilde: int) -> np.ndarray:
    """The bilinear map V^l1 x V^l2 -> V^l3 that MTP realizes, as a (2l1+1, 2l2+1, 2l3+1) array."""
    c1 = cg_real_dense(l_tilde, l_tilde, l1)  # [a, b, m1]
    c2 = cg_real_dense(l_tilde, l_tilde, l2)  # [b, c, m2]
    c3 = cg_real_dense(l_tilde, l_tilde, l3)  # [a, c, m3]
    return np.einsum("abi,bcj,ack->ijk", c1, c2, c3, optimize=True)


def mtp_path_weights(l1: int, l2: int, l3: int, l_tilde: int) -> float:
    """Scalar ``w`` with ``MTP restricted to [l1, l2, l3] = w * cgtp_path``.

    Raises if the restricted map is not a multiple of the CG table, which
    would contradict the multiplicity-one decomposition of l1 x l2.
    """
    if not triangle(l1, l2, l3) or max(l1, l2, l3) > 2 * l_tilde:
        return 0.0
    t = mtp_path_tensor(l1, l2, l3, l_tilde)
    c = cg_real_dense(l1, l2, l3)
    w = float(np.sum(t * c) / np.sum(c * c))
    residual = np.max(np.abs(t - w * c))
    if residual > 1e-10:
        raise ArithmeticError(f"MTP path [{l1},{l2},{l3}] is not proportional to CG (residual {residual:.3e})")
    return w
