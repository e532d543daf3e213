"""Product grids on S^2 and the tosphere / fromsphere transforms.

A grid built by ``make_grid(L)`` has L+1 Gauss-Legendre nodes in cos(theta)
and 2L+1 equispaced azimuths, which integrates every product of two
band-limit-L signals exactly. Synthesis factors through

    g_m(theta_j) = sum_l x_{l,m} N_{l,m} P_l^m(cos theta_j)
    F(theta_j, phi_k) = sum_m g_m(theta_j) cs_m(phi_k)

and analysis runs the same two stages in reverse with quadrature weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels
from .irreps import IrrepVector, single_copies


def legendre_table(L: int, cos_theta, sin_theta=None) -> np.ndarray:
    """Normalized associated Legendre values, one row per (l, m).

    Row ``l*l + l + m`` holds ``N_{l,m} P_l^{|m|}(cos theta)`` including the
    sqrt(2) of the real harmonics for m != 0, so that
    ``Y_{l,m} = row * cs_m(phi)``. No Condon-Shortley phase.
    """
    x = np.atleast_1d(np.asarray(cos_theta, dtype=np.float64))
    s = np.sqrt(np.clip(1.0 - x * x, 0.0, None)) if sin_theta is None else np.atleast_1d(sin_theta)
    p = np.zeros((L + 1, L + 1) + x.shape)  # [l, m]
    p[0, 0] = 1.0 / math.sqrt(4.0 * math.pi)
    for m in range(1, L + 1):
        p[m, m] = math.sqrt((2 * m + 1) / (2 * m)) * s * p[m - 1, m - 1]
    for m in range(0, L):
        p[m + 1, m] = math.sqrt(2 * m + 3) * x * p[m, m]
        a_prev = math.sqrt(2 * m + 3)
        for l in range(m + 2, L + 1):
            a = math.sqrt((4 * l * l - 1) / (l * l - m * m))
            p[l, m] = a * (x * p[l - 1, m] - p[l - 2, m] / a_prev)
            a_prev = a
    out = np.empty(((L + 1) ** 2,) + x.shape)
    for l in range(L + 1):
        out[l * l + l] = p[l, 0]
        for m in range(1, l + 1):
            out[l * l + l + m] = math.sqrt(2.0) * p[l, m]
            out[l * l + l - m] = out[l * l + l + m]
    return out


def cs_table(L: int, phi) -> np.ndarray:
    """``cs_m(phi)`` rows for m = -L..L: sin(|m| phi), 1, cos(m phi)."""
    phi = np.atleast_1d(np.asarray(phi, dtype=np.float64))
    out = np.empty((2 * L + 1,) + phi.shape)
    out[L] = 1.0
    for m in range(1, L + 1):
        out[L + m] = np.cos(m * phi)
        out[L - m] = np.sin(m * phi)
    return out


def spherical_harmonics(L: int, xyz) -> np.ndarray:
    """Real orthonormal SH up to degree L at unit vectors; shape (..., (L+1)^2)."""
    xyz = np.asarray(xyz, dtype=np.float64)
    xyz = xyz / np.linalg.norm(xyz, axis=-1, keepdims=True)
    x, y, z = xyz[..., 0], xyz[..., 1], xyz[..., 2]
    phi = np.arctan2(y, x)
    plm = legendre_table(L, z, np.hypot(x, y))
    cs = cs_table(L, phi)
    out = np.empty(((L + 1) ** 2,) + z.shape)
    for l in range(L + 1):
        for m in range(-l, l + 1):
            out[l * l + l + m] = plm[l * l + l + m] * cs[L + m]
    return np.moveaxis(out, 0, -1)


@dataclass(frozen=True, eq=False)
class S2Grid:
    """Gauss-Legendre (in cos theta) x equispaced (in phi) product grid."""

    theta_nodes: np.ndarray  # cos(theta_j)
    theta_weights: np.ndarray
    n_phi: int
    L_max: int
    plm: np.ndarray  # ((L_max+1)^2, n_theta)
    wplm: np.ndarray  # theta_weights * plm
    cs: np.ndarray  # (2 L_max + 1, n_phi), synthesis
    cs_analysis: np.ndarray  # (2 pi / n_phi) * cs

    @property
    def n_theta(self) -> int:
        return len(self.theta_nodes)

    @property
    def theta(self) -> np.ndarray:
        return np.arccos(self.theta_nodes)

    @property
    def phi(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n_phi) / self.n_phi

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_theta, self.n_phi)

    def points(self) -> np.ndarray:
        """Unit vectors of shape (n_theta, n_phi, 3)."""
        th, ph = np.meshgrid(self.theta, self.phi, indexing="ij")
        return np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=-1)

    def integrate(self, values) -> np.ndarray:
        """Quadrature of signal values (..., n_theta, n_phi) over the sphere."""
        values = np.asarray(values)
        return (2.0 * np.pi / self.n_phi) * np.einsum("...jk,j->...", values, self.theta_weights)


@lru_cache(maxsize=64)
def make_grid(L_product: int) -> S2Grid:
    """Grid exact for products of two signals of band limit ``L_product``."""
    if L_product < 0:
        raise ValueError("L_product must be non-negative")
    nodes, weights = np.polynomial.legendre.leggauss(L_product + 1)
    n_phi = 2 * L_product + 1
    plm = legendre_table(L_product, nodes)
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    cs = cs_table(L_product, phi)
    arrays = dict(
        theta_nodes=nodes,
        theta_weights=weights,
        plm=plm,
        wplm=plm * weights[None, :],
        cs=cs,
        cs_analysis=cs * (2.0 * np.pi / n_phi),
    )
    for a in arrays.values():
        a.setflags(write=False)
    return S2Grid(n_phi=n_phi, L_max=L_product, **arrays)


@dataclass(frozen=True, eq=False)
class SphereSignal:
    grid: S2Grid
    values: np.ndarray  # (..., n_theta, n_phi)

    def __post_init__(self):
        if self.values.shape[-2:] != self.grid.shape:
            raise ValueError(f"values shape {self.values.shape} does not match grid {self.grid.shape}")


def _degree_bounds(x: IrrepVector) -> int:
    if not x.irreps.is_single_copies():
        raise ValueError(f"expected single copies 0..L, got {x.irreps}")
    return x.irreps.lmax


def _synthesize(coeffs, grid: S2Grid, lo: int, hi: int, counter=None, phi: str = "direct"):
    """Batch (B, (hi+1)^2) coefficients -> (B, n_theta, n_phi) samples."""
    if hi > grid.L_max:
        raise ValueError(f"grid band limit {grid.L_max} is too small for degree {hi}")
    nb = coeffs.shape[0]
    g = kernels.legendre_synthesis(coeffs, grid.plm[: (hi + 1) ** 2], lo, hi, counter, "tosphere.legendre")
    if phi == "fft":
        if counter is not None:
            raise ValueError("operation counting is only defined for the direct phi transform")
        spec = np.zeros((nb, grid.n_theta, grid.n_phi // 2 + 1), dtype=np.complex128)
        spec[..., 0] = g[..., hi]
        for m in range(1, hi + 1):
            spec[..., m] = 0.5 * (g[..., hi + m] - 1j * g[..., hi - m])
        return grid.n_phi * np.fft.irfft(spec, n=grid.n_phi, axis=-1)
    cs = grid.cs[grid.L_max - hi: grid.L_max + hi + 1]
    f = kernels.dense_matvec(cs.T, g.reshape(nb * grid.n_theta, 2 * hi + 1), counter, "tosphere.phi")
    return f.reshape(nb, grid.n_theta, grid.n_phi)


def _analyze(values, grid: S2Grid, lo: int, hi: int, counter=None, phi: str = "direct"):
    """Batch (B, n_theta, n_phi) samples -> (B, (hi+1)^2) coefficients (zeros below lo)."""
    if hi > grid.L_max:
        raise ValueError(f"grid band limit {grid.L_max} is too small for degree {hi}")
    nb = values.shape[0]
    if phi == "fft":
        if counter is not None:
            raise ValueError("operation counting is only defined for the direct phi transform")
        spec = np.fft.rfft(values, axis=-1) * (2.0 * np.pi / grid.n_phi)
        h = np.empty((nb, grid.n_theta, 2 * hi + 1))
        h[..., hi] = spec[..., 0].real
        for m in range(1, hi + 1):
            h[..., hi + m] = spec[..., m].real
            h[..., hi - m] = -spec[..., m].imag
    else:
        csa = grid.cs_analysis[grid.L_max - hi: grid.L_max + hi + 1]
        h = kernels.dense_matvec(csa, values.reshape(nb * grid.n_theta, grid.n_phi), counter, "fromsphere.phi")
        h = h.reshape(nb, grid.n_theta, 2 * hi + 1)
    return kernels.legendre_analysis(h, grid.wplm[: (hi + 1) ** 2], lo, hi, counter, "fromsphere.legendre")


def to_sphere(x: IrrepVector, grid: S2Grid, counter=None, phi: str = "direct", lo: int = 0) -> SphereSignal:
    """Sample ``f_x = sum x_{l,m} Y_{l,m}`` on the grid.

    Degrees below ``lo`` are skipped, i.e. treated as zero.
    """
    L = _degree_bounds(x)
    batch = x.data.shape[:-1]
    flat = x.data.reshape(-1, x.irreps.dim)
    values = _synthesize(flat, grid, lo, L, counter, phi)
    return SphereSignal(grid, values.reshape(batch + grid.shape))


def from_sphere(f: SphereSignal, L_out: int, counter=None, phi: str = "direct", lo: int = 0) -> IrrepVector:
    """Project a sampled signal onto real SH up to ``L_out`` by grid quadrature.

    Degrees below ``lo`` are not computed and come back as zeros.
    """
    grid = f.grid
    batch = f.values.shape[:-2]
    flat = f.values.reshape((-1,) + grid.shape)
    coeffs = _analyze(flat, grid, lo, L_out, counter, phi)
    return IrrepVector(single_copies(L_out), coeffs.reshape(batch + ((L_out + 1) ** 2,)))


def pointwise_mul(f: SphereSignal, g: SphereSignal, counter=None) -> SphereSignal:
    if f.grid is not g.grid and (f.grid.L_max != g.grid.L_max or f.grid.shape != g.grid.shape):
        raise ValueError("signals live on different grids")
    return SphereSignal(f.grid, kernels.pointwise_mul(f.values, g.values, counter, "pointwise"))
