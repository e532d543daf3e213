"""Clebsch-Gordan and Gaunt coefficients, real-basis change, Wigner-D matrices.

Conventions
-----------
* Complex CG coefficients follow Condon-Shortley and are evaluated with the
  Racah closed-form sum (log-gamma factorials at low degree, exact integers
  above ``RACAH_FLOAT_LMAX``).
* Real spherical harmonics are orthonormal, carry no Condon-Shortley phase, and
  use ``sin(|m| phi)`` for m < 0, ``cos(m phi)`` for m > 0.
* ``cg_real(l1, l2, l3)[m1, m2, m3]`` couples ``x^(l1)_{m1} y^(l2)_{m2}`` into
  the output component ``m3``; every table is an intertwiner for the Wigner-D
  matrices returned by :func:`wigner_d`.
"""

from __future__ import annotations

import math
import threading
from fractions import Fraction
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

import numpy as np
from scipy.special import gammaln

# values below this magnitude are structural zeros
ZERO_TOL = 1e-12
# imaginary residue tolerated when converting to the real basis
IMAG_TOL = 1e-10

_LMAX_RACAH = 64
# largest degree evaluated with the floating-point Racah sum
RACAH_FLOAT_LMAX = 10
_FACTORIALS = [math.factorial(n) for n in range(3 * _LMAX_RACAH + 2)]


def triangle(l1: int, l2: int, l3: int) -> bool:
    return abs(l1 - l2) <= l3 <= l1 + l2


@dataclass(frozen=True)
class CGTable:
    """Sparse coupling table for one ``(l1, l2, l3)`` triple.

    Entries are stored as parallel arrays; only nonzero values are kept.
    """

    l1: int
    l2: int
    l3: int
    m1: np.ndarray
    m2: np.ndarray
    m3: np.ndarray
    values: np.ndarray

    @classmethod
    def from_dense(cls, l1: int, l2: int, l3: int, dense: np.ndarray) -> "CGTable":
        i1, i2, i3 = np.nonzero(np.abs(dense) >= ZERO_TOL)
        arrays = [i1 - l1, i2 - l2, i3 - l3, dense[i1, i2, i3]]
        for a in arrays:
            a.setflags(write=False)
        return cls(l1, l2, l3, *arrays)

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self) -> Iterator[tuple[int, int, int, float]]:
        for a, b, c, v in zip(self.m1, self.m2, self.m3, self.values):
            yield int(a), int(b), int(c), float(v)

    @property
    def shape(self) -> tuple[int, int, int]:
        return (2 * self.l1 + 1, 2 * self.l2 + 1, 2 * self.l3 + 1)

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.shape)
        out[self.m1 + self.l1, self.m2 + self.l2, self.m3 + self.l3] = self.values
        return out


def cg_complex(l1: int, l2: int, l3: int) -> np.ndarray:
    """Complex-basis CG coefficients ``<l1 m1 l2 m2 | l3 m3>`` as a dense array.

    Indexed ``[m1 + l1, m2 + l2, m3 + l3]``. All zeros when the triangle
    inequality fails. Up to degree ``RACAH_FLOAT_LMAX`` the Racah sum runs in
    floating point with log-gamma factorials; above it the alternating sum
    cancels too much (about 1e-12 error at degree 20, 3e-10 at 32), so it is
    evaluated exactly in integers and rounded once.
    """
    for l in (l1, l2, l3):
        if l < 0:
            raise ValueError("degrees must be non-negative")
    if max(l1, l2, l3) > _LMAX_RACAH:
        raise ValueError(f"degrees above {_LMAX_RACAH} are not supported")
    out = np.zeros((2 * l1 + 1, 2 * l2 + 1, 2 * l3 + 1))
    if not triangle(l1, l2, l3):
        return out
    if max(l1, l2, l3) > RACAH_FLOAT_LMAX:
        for m1 in range(-l1, l1 + 1):
            for m2 in range(max(-l2, -l3 - m1), min(l2, l3 - m1) + 1):
                out[m1 + l1, m2 + l2, m1 + m2 + l3] = cg_entry_exact(l1, l2, l3, m1, m2)
        return out

    m1 = np.arange(-l1, l1 + 1)[:, None]
    m2 = np.arange(-l2, l2 + 1)[None, :]
    m3 = m1 + m2
    valid = np.abs(m3) <= l3
    m1, m2 = np.broadcast_arrays(m1, m2)
    m1, m2, m3 = m1[valid], m2[valid], m3[valid]

    def lf(n):
        return gammaln(np.asarray(n, dtype=np.float64) + 1.0)

    log_pref = 0.5 * (
        math.log(2 * l3 + 1)
        + lf(l3 + l1 - l2) + lf(l3 - l1 + l2) + lf(l1 + l2 - l3) - lf(l1 + l2 + l3 + 1)
        + lf(l3 + m3) + lf(l3 - m3) + lf(l1 - m1) + lf(l1 + m1) + lf(l2 - m2) + lf(l2 + m2)
    )
    k = np.arange(0, l1 + l2 - l3 + 1)[None, :]
    args = [
        np.broadcast_to(k, (len(m1), k.shape[1])),
        np.broadcast_to(l1 + l2 - l3 - k, (len(m1), k.shape[1])),
        l1 - m1[:, None] - k,
        l2 + m2[:, None] - k,
        l3 - l2 + m1[:, None] + k,
        l3 - l1 - m2[:, None] + k,
    ]
    ok = np.all([a >= 0 for a in args], axis=0)
    log_den = sum(lf(np.where(ok, a, 0)) for a in args)
    sign = np.where(k % 2 == 0, 1.0, -1.0)
    terms = np.where(ok, sign * np.exp(log_pref[:, None] - log_den), 0.0)
    out[m1 + l1, m2 + l2, m3 + l3] = terms.sum(axis=1)
    return out


def cg_entry_exact(l1: int, l2: int, l3: int, m1: int, m2: int) -> float:
    """One CG coefficient from the Racah sum in exact integer arithmetic."""
    m3 = m1 + m2
    if not triangle(l1, l2, l3) or abs(m1) > l1 or abs(m2) > l2 or abs(m3) > l3:
        return 0.0
    f = _FACTORIALS.__getitem__
    kmin = max(0, l2 - l3 - m1, l1 - l3 + m2)
    kmax = min(l1 + l2 - l3, l1 - m1, l2 + m2)
    if kmin > kmax:
        return 0.0

    def den(k):
        return f(k) * f(l1 + l2 - l3 - k) * f(l1 - m1 - k) * f(l2 + m2 - k) * f(l3 - l2 + m1 + k) * f(l3 - l1 - m2 + k)

    # common multiple of every term's denominator, so the sum stays integral
    q = (f(kmax) * f(l1 + l2 - l3 - kmin) * f(l1 - m1 - kmin) * f(l2 + m2 - kmin)
         * f(l3 - l2 + m1 + kmax) * f(l3 - l1 - m2 + kmax))
    s = sum((-1) ** k * (q // den(k)) for k in range(kmin, kmax + 1))
    if s == 0:
        return 0.0
    num = ((2 * l3 + 1) * f(l3 + l1 - l2) * f(l3 - l1 + l2) * f(l1 + l2 - l3)
           * f(l3 + m3) * f(l3 - m3) * f(l1 - m1) * f(l1 + m1) * f(l2 - m2) * f(l2 + m2))
    value = math.sqrt(Fraction(num * s * s, f(l1 + l2 + l3 + 1) * q * q))
    return value if s > 0 else -value


@lru_cache(maxsize=None)
def real_basis_change(l: int) -> np.ndarray:
    """Unitary ``U`` with ``Y_real[m] = sum_mu U[m, mu] Y_complex[mu]``.

    Rows are real components m = -l..l, columns complex components mu = -l..l.
    """
    u = np.zeros((2 * l + 1, 2 * l + 1), dtype=np.complex128)
    s = 1.0 / math.sqrt(2.0)
    u[l, l] = 1.0
    for m in range(1, l + 1):
        sign = (-1) ** m
        # cos(m phi) component
        u[l + m, l + m] = sign * s
        u[l + m, l - m] = s
        # sin(m phi) component
        u[l - m, l + m] = -1j * sign * s
        u[l - m, l - m] = 1j * s
    u.setflags(write=False)
    return u


def _apply_basis(t: np.ndarray, u: np.ndarray, axis: int) -> np.ndarray:
    """Contract ``u`` into one axis of ``t`` using that ``u`` only couples m and -m."""
    l = (u.shape[0] - 1) // 2
    diag = np.diag(u).copy()
    anti = u[np.arange(2 * l + 1), np.arange(2 * l, -1, -1)].copy()
    anti[l] = 0.0
    shape = [1] * t.ndim
    shape[axis] = -1
    return diag.reshape(shape) * t + anti.reshape(shape) * np.flip(t, axis=axis)


def _real_coupling(l1: int, l2: int, l3: int) -> np.ndarray:
    """Complex CG conjugated into the real basis: ``U1 U2 C U3^dagger``."""
    t = cg_complex(l1, l2, l3).astype(np.complex128)
    t = _apply_basis(t, real_basis_change(l1), 0)
    t = _apply_basis(t, real_basis_change(l2), 1)
    t = _apply_basis(t, real_basis_change(l3).conj(), 2)
    return t


_lock = threading.RLock()
_cg_cache: dict[tuple[int, int, int], CGTable] = {}
_gaunt_cache: dict[tuple[int, int, int], CGTable] = {}


def _cached(cache: dict, key, build):
    table = cache.get(key)
    if table is None:
        with _lock:
            table = cache.get(key)
            if table is None:
                table = build(*key)
                cache[key] = table
    return table


def _build_cg_real(l1: int, l2: int, l3: int) -> CGTable:
    if not triangle(l1, l2, l3):
        return CGTable.from_dense(l1, l2, l3, np.zeros((2 * l1 + 1, 2 * l2 + 1, 2 * l3 + 1)))
    t = _real_coupling(l1, l2, l3)
    # odd l1+l2+l3 gives a purely imaginary tensor; rotate the phase onto the real axis
    if (l1 + l2 + l3) % 2 == 1:
        t = -1j * t
    residue = np.max(np.abs(t.imag))
    if residue > IMAG_TOL:
        raise ArithmeticError(f"real CG ({l1},{l2},{l3}) has imaginary residue {residue:.3e}")
    return CGTable.from_dense(l1, l2, l3, t.real)


def cg_real(l1: int, l2: int, l3: int) -> CGTable:
    """Real-basis CG coefficients (sparse, memoized)."""
    return _cached(_cg_cache, (int(l1), int(l2), int(l3)), _build_cg_real)


@lru_cache(maxsize=4096)
def cg_real_dense(l1: int, l2: int, l3: int) -> np.ndarray:
    out = cg_real(l1, l2, l3).to_dense()
    out.setflags(write=False)
    return out


def gaunt_scale(l1: int, l2: int, l3: int) -> float:
    """Factor ``k`` such that ``gaunt_real = k * cg_real`` (zero for odd parity)."""
    if (l1 + l2 + l3) % 2 == 1 or not triangle(l1, l2, l3):
        return 0.0
    c0 = cg_entry_exact(l1, l2, l3, 0, 0)
    return math.sqrt((2 * l1 + 1) * (2 * l2 + 1) / (4 * math.pi * (2 * l3 + 1))) * c0


def _build_gaunt_real(l1: int, l2: int, l3: int) -> CGTable:
    k = gaunt_scale(l1, l2, l3)
    return CGTable.from_dense(l1, l2, l3, k * cg_real_dense(l1, l2, l3))


def gaunt_real(l1: int, l2: int, l3: int) -> CGTable:
    """Gaunt coefficients ``G`` with ``Y_{l1,m1} Y_{l2,m2} = sum G Y_{l3,m3}`` (real SH)."""
    return _cached(_gaunt_cache, (int(l1), int(l2), int(l3)), _build_gaunt_real)


@lru_cache(maxsize=4096)
def gaunt_real_dense(l1: int, l2: int, l3: int) -> np.ndarray:
    out = gaunt_real(l1, l2, l3).to_dense()
    out.setflags(write=False)
    return out


def clear_caches() -> None:
    with _lock:
        _cg_cache.clear()
        _gaunt_cache.clear()
    cg_real_dense.cache_clear()
    gaunt_real_dense.cache_clear()


@dataclass(frozen=True)
class Rotation:
    """A proper rotation of R^3 stored as its 3x3 matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        r = np.array(self.matrix, dtype=np.float64)
        if r.shape != (3, 3):
            raise ValueError("rotation matrix must be 3x3")
        if not np.allclose(r.T @ r, np.eye(3), atol=1e-10, rtol=0) or abs(np.linalg.det(r) - 1) > 1e-10:
            raise ValueError("matrix is not a proper rotation")
        r.setflags(write=False)
        object.__setattr__(self, "matrix", r)

    @classmethod
    def identity(cls) -> "Rotation":
        return cls(np.eye(3))

    @classmethod
    def from_axis_angle(cls, axis, angle: float) -> "Rotation":
        axis = np.asarray(axis, dtype=np.float64)
        axis = axis / np.linalg.norm(axis)
        k = np.array([[0, -axis[2], axis[1]], [axis[2], 0, -axis[0]], [-axis[1], axis[0], 0]])
        return cls(np.eye(3) + math.sin(angle) * k + (1 - math.cos(angle)) * (k @ k))

    @classmethod
    def random(cls, rng: np.random.Generator) -> "Rotation":
        q = rng.standard_normal(4)
        w, x, y, z = q / np.linalg.norm(q)
        return cls(np.array([
            [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
            [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
            [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
        ]))

    def __matmul__(self, other: "Rotation") -> "Rotation":
        return Rotation(self.matrix @ other.matrix)

    def inverse(self) -> "Rotation":
        return Rotation(self.matrix.T)


# real l=1 harmonics are proportional to (y, z, x)
XYZ_TO_REAL = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])


def wigner_d_all(L: int, rot: Rotation) -> dict[int, np.ndarray]:
    """``{l: D^l(rot)}`` for l = 0..L, built by recursive CG projection."""
    out = {0: np.ones((1, 1))}
    if L >= 1:
        out[1] = XYZ_TO_REAL @ rot.matrix @ XYZ_TO_REAL.T
    for l in range(2, L + 1):
        c = cg_real_dense(1, l - 1, l).reshape(3 * (2 * l - 1), 2 * l + 1)
        out[l] = c.T @ np.kron(out[1], out[l - 1]) @ c
    return out


def wigner_d(l: int, rot: Rotation) -> np.ndarray:
    """Real-basis Wigner-D matrix of degree ``l``: ``Y_l(R r) = D^l(R) Y_l(r)``."""
    if l < 0:
        raise ValueError("l must be non-negative")
    return wigner_d_all(l, rot)[l]
