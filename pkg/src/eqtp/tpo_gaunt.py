"""Gaunt tensor product: spherical-grid and 2D-Fourier implementations.

Both multiply the spherical signals ``f_x = sum x_lm Y_lm`` and ``f_y`` and
project the product back onto real SH. The grid route samples on
``make_grid(L1 + L2)``, which integrates the product against every Y up to
degree L1+L2 exactly.

The Fourier route lifts signals to the torus ``[0, 2pi)^2`` by sending
theta in (pi, 2pi) to the antipodal sphere point ``(2pi - theta, phi + pi)``.
The lifted Y_lm is a trigonometric polynomial of band l in theta and has
phi-frequencies ``v = +-m`` only, so encoding is sparse. Products stay in the
lifted space, and decoding uses a per-|v| pseudo-inverse of the band-2L encode
map.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels
from .irreps import IrrepVector, single_copies
from .sphere import cs_table, from_sphere, legendre_table, make_grid, pointwise_mul, to_sphere
from .wigner import cg_real, gaunt_scale, triangle

IMPLS = ("grid", "fourier")

# round-trip residual above which Fourier table construction aborts
ROUNDTRIP_TOL = 1e-8
# sparsity leak tolerated outside v = +-m when building the encode table
LEAK_TOL = 1e-12


def _degrees(x: IrrepVector, name: str) -> int:
    if not x.irreps.is_single_copies():
        raise ValueError(f"{name} must be single copies 0..L, got {x.irreps}")
    return x.irreps.lmax


def _check_pair(x: IrrepVector, y: IrrepVector, L3: int | None) -> tuple[int, int, int]:
    L1, L2 = _degrees(x, "x"), _degrees(y, "y")
    if x.data.shape[:-1] != y.data.shape[:-1]:
        raise ValueError(f"batch shapes differ: {x.data.shape[:-1]} vs {y.data.shape[:-1]}")
    L3 = L1 + L2 if L3 is None else int(L3)
    if not 0 <= L3 <= L1 + L2:
        raise ValueError(f"L3={L3} must lie in [0, L1+L2={L1 + L2}]")
    return L1, L2, L3


def gtp_grid(x: IrrepVector, y: IrrepVector, L3: int | None = None, counter=None,
             phi: str = "direct", lo: tuple[int, int, int] = (0, 0, 0)) -> IrrepVector:
    """``fromsphere(f_x * f_y)`` up to degree L3 on the exactness-sized grid.

    ``lo`` gives the lowest degree used for x, y and the output; lower input
    degrees are ignored and lower output degrees are left zero.
    """
    L1, L2, L3 = _check_pair(x, y, L3)
    grid = make_grid(L1 + L2)
    fx = to_sphere(x, grid, counter, phi, lo[0])
    fy = to_sphere(y, grid, counter, phi, lo[1])
    return from_sphere(pointwise_mul(fx, fy, counter), L3, counter, phi, lo[2])


def gaunt_contraction(x: IrrepVector, y: IrrepVector, L3: int | None = None) -> IrrepVector:
    """Reference GTP: sum over even paths of the Gaunt-scaled real CG contraction."""
    L1, L2, L3 = _check_pair(x, y, L3)
    out = np.zeros(x.data.shape[:-1] + ((L3 + 1) ** 2,))
    for l1 in range(L1 + 1):
        xs = x.data[..., l1 * l1: (l1 + 1) ** 2]
        for l2 in range(L2 + 1):
            ys = y.data[..., l2 * l2: (l2 + 1) ** 2]
            for l3 in range(abs(l1 - l2), min(l1 + l2, L3) + 1):
                k = gaunt_scale(l1, l2, l3)
                if k == 0.0:
                    continue
                t = cg_real(l1, l2, l3)
                terms = k * t.values * xs[..., t.m1 + l1] * ys[..., t.m2 + l2]
                block = np.zeros(x.data.shape[:-1] + (2 * l3 + 1,))
                np.add.at(block, (..., t.m3 + l3), terms)
                out[..., l3 * l3: (l3 + 1) ** 2] += block
    return IrrepVector(single_copies(L3), out)


def weighted_gtp(x: IrrepVector, y: IrrepVector, a, b, c, L3: int | None = None,
                 counter=None) -> IrrepVector:
    """``c . gtp_grid(a . x, b . y)`` with per-degree scalar weights."""
    L1, L2, L3 = _check_pair(x, y, L3)
    a, b, c = (np.asarray(w, dtype=np.float64) for w in (a, b, c))
    for name, w, n in (("a", a, L1 + 1), ("b", b, L2 + 1), ("c", c, L3 + 1)):
        if w.shape != (n,):
            raise ValueError(f"weights {name} must have length {n}, got shape {w.shape}")
    out = gtp_grid(_rescale(x, a), _rescale(y, b), L3, counter)
    return _rescale(out, c)


def _rescale(x: IrrepVector, w: np.ndarray) -> IrrepVector:
    per_component = np.repeat(w, 2 * np.arange(len(w)) + 1)
    return IrrepVector(x.irreps, x.data * per_component)


# ---------------------------------------------------------------------------
# 2D Fourier route


@dataclass(frozen=True, eq=False)
class Fourier2DCoeffs:
    """Complex coefficients ``c[..., u + band, v + band]`` of ``exp(i(u theta + v phi))``."""

    band: int
    values: np.ndarray

    def __post_init__(self):
        n = 2 * self.band + 1
        if self.values.shape[-2:] != (n, n):
            raise ValueError(f"coefficients for band {self.band} need trailing shape {(n, n)}")

    def conjugate_symmetry_error(self) -> float:
        flipped = self.values[..., ::-1, ::-1].conj()
        return float(np.max(np.abs(self.values - flipped), initial=0.0))


@dataclass(frozen=True, eq=False)
class FourierEncodeTable:
    """COO map from SH coefficients (cols, l*l+l+m) to flattened (u, v) modes (rows)."""

    L: int
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray

    @property
    def band(self) -> int:
        return self.L

    def entries(self):
        """Yield ``(l, m, u, v, value)`` for every stored coefficient."""
        n = 2 * self.L + 1
        for r, c, val in zip(self.rows, self.cols, self.vals):
            l = math.isqrt(int(c))
            yield l, int(c) - l * l - l, int(r) // n - self.L, int(r) % n - self.L, complex(val)


@dataclass(frozen=True, eq=False)
class FourierDecodeTable:
    """COO map from flattened (u, v) modes of band ``band`` to SH coefficients up to ``L_out``."""

    band: int
    L_out: int
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray


def _torus_samples(L: int, n: int) -> np.ndarray:
    """Lifted Y_lm on the n x n torus grid, shape ((L+1)^2, n, n)."""
    t = 2.0 * np.pi * np.arange(n) / n
    theta, phi = np.meshgrid(t, t, indexing="ij")
    back = theta > np.pi
    # antipodal identification of the lower half of the theta circle
    theta_s = np.where(back, 2.0 * np.pi - theta, theta)
    phi_s = np.where(back, phi + np.pi, phi)
    plm = legendre_table(L, np.cos(theta_s), np.abs(np.sin(theta_s)))
    cs = cs_table(L, phi_s)
    out = np.empty(((L + 1) ** 2, n, n))
    for l in range(L + 1):
        for m in range(-l, l + 1):
            out[l * l + l + m] = plm[l * l + l + m] * cs[L + m]
    return out


def _encode_dense(L: int) -> np.ndarray:
    """Dense encode coefficients ``y[lm, u + L, v + L]`` by exact 2D DFT."""
    n = 2 * L + 2
    spec = np.fft.fft2(_torus_samples(L, n), axes=(1, 2)) / (n * n)
    freqs = np.arange(-L, L + 1) % n
    return spec[:, freqs][:, :, freqs]


_lock = threading.RLock()
_tables: dict[tuple, object] = {}


def _memo(key, build):
    table = _tables.get(key)
    if table is None:
        with _lock:
            table = _tables.get(key)
            if table is None:
                table = _tables[key] = build()
    return table


def encode_table(L: int) -> FourierEncodeTable:
    def build():
        y = _encode_dense(L)
        n = 2 * L + 1
        keep = np.zeros_like(y, dtype=bool)
        for l in range(L + 1):
            for m in range(-l, l + 1):
                keep[l * l + l + m, :, m + L] = True
                keep[l * l + l + m, :, -m + L] = True
        leak = np.max(np.abs(y[~keep]), initial=0.0)
        if leak > LEAK_TOL:
            raise ArithmeticError(f"encode table leaks {leak:.3e} outside v = +-m")
        y = np.where(keep & (np.abs(y) > LEAK_TOL), y, 0.0)
        lm, u, v = np.nonzero(y)
        vals = y[lm, u, v]
        rows = u * n + v
        for a in (rows, lm, vals):
            a.setflags(write=False)
        return FourierEncodeTable(L, rows.astype(np.int64), lm.astype(np.int64), vals)

    return _memo(("enc", int(L)), build)


def decode_table(band: int, L_out: int | None = None) -> FourierDecodeTable:
    """Pseudo-inverse of the band-``band`` encode map, one block per |v|."""
    L_out = band if L_out is None else int(L_out)
    if not 0 <= L_out <= band:
        raise ValueError(f"L_out={L_out} must lie in [0, {band}]")

    def build():
        enc = _encode_dense(band)
        n = 2 * band + 1
        rows, cols, vals = [], [], []
        worst = 0.0
        for v in range(band + 1):
            ms = (v,) if v == 0 else (v, -v)
            lms = [l * l + l + m for l in range(v, band + 1) for m in ms]
            vs = sorted({v + band, -v + band})
            modes = [(u, w) for u in range(n) for w in vs]
            e = np.array([[enc[lm, u, w] for lm in lms] for u, w in modes])
            z = np.linalg.pinv(e)
            worst = max(worst, float(np.max(np.abs(z @ e - np.eye(len(lms))))))
            for i, lm in enumerate(lms):
                if lm >= (L_out + 1) ** 2:
                    continue
                for j, (u, w) in enumerate(modes):
                    rows.append(lm)
                    cols.append(u * n + w)
                    vals.append(z[i, j])
        if worst > ROUNDTRIP_TOL:
            raise ArithmeticError(f"Fourier decode round-trip residual {worst:.3e} exceeds {ROUNDTRIP_TOL}")
        arrays = [np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64), np.array(vals)]
        for a in arrays:
            a.setflags(write=False)
        return FourierDecodeTable(band, L_out, *arrays)

    return _memo(("dec", int(band), L_out), build)


def build_fourier_tables(L: int) -> tuple[FourierEncodeTable, FourierDecodeTable]:
    """Encode table for band L inputs and decode table for band 2L products."""
    if L < 0:
        raise ValueError("L must be non-negative")
    return encode_table(L), decode_table(2 * L)


@lru_cache(maxsize=256)
def _restricted(table, lo: int, on_rows: bool):
    """COO entries of a table whose SH index is at degree >= lo."""
    keys = table.rows if on_rows else table.cols
    keep = keys >= lo * lo
    return table.rows[keep], table.cols[keep], table.vals[keep]


def fourier_encode(x: IrrepVector, counter=None, lo: int = 0) -> Fourier2DCoeffs:
    """Encode single copies 0..L (degrees below ``lo`` ignored) into band-L Fourier coefficients."""
    L = _degrees(x, "x")
    rows, cols, vals = _restricted(encode_table(L), lo, False)
    flat = x.data.reshape(-1, x.irreps.dim)
    n = 2 * L + 1
    c = kernels.coo_matvec(rows, cols, vals, flat, n * n, counter, "fourier.encode")
    return Fourier2DCoeffs(L, c.reshape(x.data.shape[:-1] + (n, n)))


def fourier_decode(c: Fourier2DCoeffs, L_out: int, counter=None, lo: int = 0) -> IrrepVector:
    """Decode Fourier coefficients onto single copies 0..L_out (degrees below ``lo`` left zero)."""
    rows, cols, vals = _restricted(decode_table(c.band, L_out), lo, True)
    n = 2 * c.band + 1
    flat = c.values.reshape(-1, n * n)
    out = kernels.coo_matvec(rows, cols, vals, flat, (L_out + 1) ** 2, counter, "fourier.decode")
    return IrrepVector(single_copies(L_out), out.real.reshape(c.values.shape[:-2] + ((L_out + 1) ** 2,)))


@lru_cache(maxsize=64)
def _dft_matrices(band_in: int, band_out: int) -> tuple[np.ndarray, np.ndarray]:
    """Synthesis (n x modes_in) and analysis (modes_out x n) on an n-point circle, n = 2*band_out + 2."""
    n = 2 * band_out + 2
    t = 2.0 * np.pi * np.arange(n) / n
    synth = np.exp(1j * np.outer(t, np.arange(-band_in, band_in + 1)))
    analysis = np.exp(-1j * np.outer(np.arange(-band_out, band_out + 1), t)) / n
    for a in (synth, analysis):
        a.setflags(write=False)
    return synth, analysis


def _along(m: np.ndarray, a: np.ndarray, axis: int, counter, stage: str) -> np.ndarray:
    """Apply matrix ``m`` to one axis of ``a``."""
    moved = np.moveaxis(a, axis, -1)
    out = kernels.dense_matvec(m, moved.reshape(-1, moved.shape[-1]), counter, stage)
    return np.moveaxis(out.reshape(moved.shape[:-1] + (m.shape[0],)), -1, axis)


def fourier_product(a: Fourier2DCoeffs, b: Fourier2DCoeffs, counter=None,
                    transform: str = "dft") -> Fourier2DCoeffs:
    """2D convolution of two coefficient arrays, evaluated through torus samples."""
    band = a.band + b.band
    n = 2 * band + 2
    if transform == "fft":
        if counter is not None:
            raise ValueError("operation counting is only defined for the dft transform")
        fa, fb = (_fft_samples(c, n) for c in (a, b))
        spec = np.fft.fft2(fa * fb, axes=(-2, -1)) / (n * n)
        freqs = np.arange(-band, band + 1) % n
        return Fourier2DCoeffs(band, spec[..., freqs, :][..., freqs])
    if transform != "dft":
        raise ValueError(f"unknown transform {transform!r}")
    samples = []
    for c in (a, b):
        synth, _ = _dft_matrices(c.band, band)
        f = _along(synth, c.values, -2, counter, "fourier.synth")
        f = _along(synth, f, -1, counter, "fourier.synth")
        samples.append(np.ascontiguousarray(f.real))
    prod = kernels.pointwise_mul(samples[0], samples[1], counter, "pointwise")
    _, analysis = _dft_matrices(band, band)
    out = _along(analysis, prod, -2, counter, "fourier.analysis")
    out = _along(analysis, out, -1, counter, "fourier.analysis")
    return Fourier2DCoeffs(band, out)


def _fft_samples(c: Fourier2DCoeffs, n: int) -> np.ndarray:
    full = np.zeros(c.values.shape[:-2] + (n, n), dtype=np.complex128)
    freqs = np.arange(-c.band, c.band + 1) % n
    full[..., freqs[:, None], freqs[None, :]] = c.values
    return (np.fft.ifft2(full, axes=(-2, -1)) * (n * n)).real


def gtp_fourier(x: IrrepVector, y: IrrepVector, L3: int | None = None, counter=None,
                transform: str = "dft", lo: tuple[int, int, int] = (0, 0, 0)) -> IrrepVector:
    """GTP through the 2D Fourier basis: encode, convolve, decode. ``lo`` as in :func:`gtp_grid`."""
    L1, L2, L3 = _check_pair(x, y, L3)
    a = fourier_encode(x, counter, lo[0])
    b = fourier_encode(y, counter, lo[1])
    return fourier_decode(fourier_product(a, b, counter, transform), L3, counter, lo[2])


def gtp(x: IrrepVector, y: IrrepVector, L3: int | None = None, impl: str = "grid",
        counter=None, lo: tuple[int, int, int] = (0, 0, 0)) -> IrrepVector:
    if impl == "grid":
        return gtp_grid(x, y, L3, counter, lo=lo)
    if impl == "fourier":
        return gtp_fourier(x, y, L3, counter, lo=lo)
    raise ValueError(f"unknown GTP impl {impl!r}; expected one of {IMPLS}")


def path_allowed(l1: int, l2: int, l3: int) -> bool:
    """GTP selection rule: triangle inequality and even degree sum."""
    return triangle(l1, l2, l3) and (l1 + l2 + l3) % 2 == 0
