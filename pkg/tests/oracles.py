"""Reference implementations that share no code with the package.

* CG coefficients in exact rational arithmetic (sympy).
* Real spherical harmonics from scipy's complex ``sph_harm_y``.
* Triple-product integrals by oversampled Gauss-Legendre x trapezoid quadrature
  built from scipy nodes.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.special import roots_legendre, sph_harm_y
from sympy import Integer
from sympy.physics.wigner import clebsch_gordan


@lru_cache(maxsize=None)
def cg_exact(l1: int, l2: int, l3: int) -> np.ndarray:
    """Complex-basis CG array [m1+l1, m2+l2, m3+l3] from sympy's exact formula."""
    out = np.zeros((2 * l1 + 1, 2 * l2 + 1, 2 * l3 + 1))
    for m1 in range(-l1, l1 + 1):
        for m2 in range(-l2, l2 + 1):
            m3 = m1 + m2
            if abs(m3) <= l3:
                v = clebsch_gordan(Integer(l1), Integer(l2), Integer(l3), Integer(m1), Integer(m2), Integer(m3))
                out[m1 + l1, m2 + l2, m3 + l3] = float(v)
    return out


def real_sh(l: int, theta, phi) -> np.ndarray:
    """Real orthonormal SH of degree l without Condon-Shortley phase; trailing axis m=-l..l."""
    theta = np.asarray(theta, dtype=np.float64)
    phi = np.asarray(phi, dtype=np.float64)
    out = np.empty(theta.shape + (2 * l + 1,))
    out[..., l] = sph_harm_y(l, 0, theta, phi).real
    for m in range(1, l + 1):
        y = sph_harm_y(l, m, theta, phi)  # includes (-1)^m
        out[..., l + m] = math.sqrt(2.0) * (-1) ** m * y.real
        out[..., l - m] = math.sqrt(2.0) * (-1) ** m * y.imag
    return out


def real_sh_xyz(l: int, xyz) -> np.ndarray:
    xyz = np.asarray(xyz, dtype=np.float64)
    r = np.linalg.norm(xyz, axis=-1)
    theta = np.arccos(np.clip(xyz[..., 2] / r, -1.0, 1.0))
    phi = np.arctan2(xyz[..., 1], xyz[..., 0])
    return real_sh(l, theta, phi)


@lru_cache(maxsize=None)
def _quadrature(n: int):
    x, w = roots_legendre(n)
    phi = 2.0 * np.pi * np.arange(2 * n) / (2 * n)
    theta = np.arccos(x)
    th, ph = np.meshgrid(theta, phi, indexing="ij")
    weights = np.outer(w, np.full(2 * n, np.pi / n))
    return th, ph, weights


def triple_integral(l1: int, l2: int, l3: int) -> np.ndarray:
    """``int Y_{l1 m1} Y_{l2 m2} Y_{l3 m3} dS`` for all m, real SH."""
    n = (l1 + l2 + l3) // 2 + 4
    th, ph, w = _quadrature(n)
    y1, y2, y3 = real_sh(l1, th, ph), real_sh(l2, th, ph), real_sh(l3, th, ph)
    return np.einsum("jka,jkb,jkc,jk->abc", y1, y2, y3, w)


def levi_civita() -> np.ndarray:
    eps = np.zeros((3, 3, 3))
    for (i, j, k), s in {(0, 1, 2): 1, (1, 2, 0): 1, (2, 0, 1): 1, (0, 2, 1): -1, (2, 1, 0): -1, (1, 0, 2): -1}.items():
        eps[i, j, k] = s
    return eps


# real l=1 components (m=-1, 0, 1) are proportional to (y, z, x)
XYZ_PERM = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Haar-random proper rotation via QR of a Gaussian matrix."""
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    q = q @ np.diag(np.sign(np.diag(r)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def random_unit_vectors(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.standard_normal((n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)
