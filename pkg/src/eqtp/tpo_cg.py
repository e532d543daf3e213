"""Clebsch-Gordan tensor product over single paths and full single-copy inputs.

Two implementations share one contract:

* ``naive`` contracts the dense real CG array, (2l1+1)(2l2+1)(2l3+1) terms.
* ``sparse`` splits the table into four sign-pattern passes
  ``m2 = m1+m3, m1-m3, -m1+m3, -m1-m3``; each pass claims its coefficients and
  zeroes them so later passes cannot count them twice. Each pass then is a
  gather over (m3, m1) with a single m2, so a path costs O(l1 * l3).
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

from . import kernels
from .irreps import IrrepVector, Irreps
from .wigner import ZERO_TOL, cg_real_dense, triangle

IMPLS = ("naive", "sparse")

# (s1, s3) with m2 = s1*m1 + s3*m3, in the claiming order of the passes
SIGN_PASSES = ((1, 1), (1, -1), (-1, 1), (-1, -1))


@dataclass(frozen=True, order=True)
class Path:
    l1: int
    l2: int
    l3: int

    @property
    def valid(self) -> bool:
        return min(self.l1, self.l2, self.l3) >= 0 and triangle(self.l1, self.l2, self.l3)

    @property
    def origin(self) -> tuple[int, int]:
        return (self.l1, self.l2)

    def __iter__(self):
        return iter((self.l1, self.l2, self.l3))


@dataclass(frozen=True)
class PathTable:
    """Ordered paths; output copy ``i`` of a CGTP comes from ``paths[i]``."""

    paths: tuple[Path, ...]

    def __len__(self) -> int:
        return len(self.paths)

    def __iter__(self) -> Iterator[Path]:
        return iter(self.paths)

    def __getitem__(self, i: int) -> Path:
        return self.paths[i]

    @property
    def origins(self) -> tuple[tuple[int, int], ...]:
        return tuple(p.origin for p in self.paths)

    @cached_property
    def output_irreps(self) -> Irreps:
        return Irreps([(1, p.l3) for p in self.paths])

    def multiplicity(self, l3: int) -> int:
        return sum(p.l3 == l3 for p in self.paths)


def valid_paths(L1: int, L2: int, L3: int) -> PathTable:
    """All triangle-valid ``[l1, l2, l3]`` with ``l_i <= L_i``, lexicographic."""
    return PathTable(tuple(
        Path(l1, l2, l3)
        for l1 in range(L1 + 1)
        for l2 in range(L2 + 1)
        for l3 in range(L3 + 1)
        if triangle(l1, l2, l3)
    ))


_lock = threading.RLock()
_sparse_cache: dict[tuple[int, int, int], tuple[np.ndarray, np.ndarray]] = {}


def _build_sparse(l1: int, l2: int, l3: int) -> tuple[np.ndarray, np.ndarray]:
    c = np.array(cg_real_dense(l1, l2, l3))
    n1, n3 = 2 * l1 + 1, 2 * l3 + 1
    coef = np.zeros((4, n3, n1))
    idx = np.full((4, n3, n1), -1, dtype=np.int64)
    for p, (s1, s3) in enumerate(SIGN_PASSES):
        for m3 in range(-l3, l3 + 1):
            for m1 in range(-l1, l1 + 1):
                m2 = s1 * m1 + s3 * m3
                if abs(m2) > l2:
                    continue
                value = c[m1 + l1, m2 + l2, m3 + l3]
                c[m1 + l1, m2 + l2, m3 + l3] = 0.0
                if abs(value) >= ZERO_TOL:
                    coef[p, m3 + l3, m1 + l1] = value
                    idx[p, m3 + l3, m1 + l1] = m2 + l2
    if np.any(np.abs(c) >= ZERO_TOL):
        raise ArithmeticError(f"CG ({l1},{l2},{l3}) has entries outside the four sign patterns")
    for a in (coef, idx):
        a.setflags(write=False)
    return coef, idx


def sparse_tables(l1: int, l2: int, l3: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-pass coefficients ``coef[p, m3, m1]`` and y-indices ``idx[p, m3, m1]`` (-1 = skip)."""
    key = (int(l1), int(l2), int(l3))
    out = _sparse_cache.get(key)
    if out is None:
        with _lock:
            out = _sparse_cache.get(key)
            if out is None:
                out = _sparse_cache[key] = _build_sparse(*key)
    return out


def _batch(a, l: int) -> tuple[np.ndarray, tuple[int, ...]]:
    a = np.asarray(a, dtype=np.float64)
    if a.shape[-1] != 2 * l + 1:
        raise ValueError(f"expected trailing axis {2 * l + 1} for degree {l}, got {a.shape}")
    return a.reshape(-1, 2 * l + 1), a.shape[:-1]


def _path_product(x, y, path: Path, impl: str, counter) -> np.ndarray:
    l1, l2, l3 = path
    xb, batch = _batch(x, l1)
    yb, ybatch = _batch(y, l2)
    if batch != ybatch:
        raise ValueError(f"batch shapes differ: {batch} vs {ybatch}")
    if not path.valid:
        return np.zeros(batch + (2 * l3 + 1,))
    if impl == "naive":
        out = kernels.dense_bilinear(cg_real_dense(l1, l2, l3), xb, yb, counter, "cgtp.naive")
    elif impl == "sparse":
        coef, idx = sparse_tables(l1, l2, l3)
        out = kernels.gather_bilinear(coef, idx, xb, yb, counter, "cgtp.sparse")
    else:
        raise ValueError(f"unknown CGTP impl {impl!r}; expected one of {IMPLS}")
    return out.reshape(batch + (2 * l3 + 1,))


def cgtp_path_naive(x_l1, y_l2, path: Path | Sequence[int], counter=None) -> np.ndarray:
    """One path by dense contraction; trailing axes 2l1+1, 2l2+1 -> 2l3+1."""
    return _path_product(x_l1, y_l2, Path(*path), "naive", counter)


def cgtp_path_sparse(x_l1, y_l2, path: Path | Sequence[int], counter=None) -> np.ndarray:
    """One path by the four sign-pattern gather passes; same output as the naive form."""
    return _path_product(x_l1, y_l2, Path(*path), "sparse", counter)


def cgtp_path(x_l1, y_l2, path, impl: str = "sparse", counter=None) -> np.ndarray:
    return _path_product(x_l1, y_l2, Path(*path), impl, counter)


def _single_lmax(x: IrrepVector, name: str) -> int:
    if not x.irreps.is_single_copies():
        raise ValueError(f"{name} must be single copies 0..L, got {x.irreps}")
    return x.irreps.lmax


def cgtp_paths(x: IrrepVector, y: IrrepVector, paths: PathTable, impl: str = "sparse",
               counter=None) -> IrrepVector:
    """Evaluate the given paths on single-copy inputs; one output copy per path."""
    L1, L2 = _single_lmax(x, "x"), _single_lmax(y, "y")
    batch = x.data.shape[:-1]
    if y.data.shape[:-1] != batch:
        raise ValueError(f"batch shapes differ: {batch} vs {y.data.shape[:-1]}")
    irreps = paths.output_irreps
    out = np.empty(batch + (irreps.dim,))
    for path, (_, _, _, sl) in zip(paths, irreps.copies()):
        l1, l2, _ = path
        if l1 > L1 or l2 > L2:
            raise ValueError(f"path {tuple(path)} needs degrees beyond the inputs ({L1}, {L2})")
        xs = x.data[..., l1 * l1: (l1 + 1) ** 2]
        ys = y.data[..., l2 * l2: (l2 + 1) ** 2]
        out[..., sl] = _path_product(xs, ys, path, impl, counter)
    return IrrepVector(irreps, out)


def cgtp_mimo(x: IrrepVector, y: IrrepVector, impl: str = "sparse", counter=None,
              L_out: int | None = None) -> IrrepVector:
    """Full CGTP of single copies 0..L1 and 0..L2 into all valid paths (l3 <= L_out)."""
    L1, L2 = _single_lmax(x, "x"), _single_lmax(y, "y")
    L3 = L1 + L2 if L_out is None else L_out
    return cgtp_paths(x, y, valid_paths(L1, L2, L3), impl, counter)
