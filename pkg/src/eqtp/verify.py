"""Invariant suites run by ``eqtp verify``.

Each suite returns :class:`Check` rows ``suite,check,L,max_err,threshold``
plus a verdict. Thresholds are module constants on purpose: they are not
configurable from the command line.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import bench
from .expressivity import expressivity_count, expressivity_rank, restricted_map
from .irreps import IrrepVector, LinearLayer, apply_linear, single_copies
from .sphere import from_sphere, make_grid, spherical_harmonics, to_sphere
from .tpo import all_tpos, apply_tpo
from .tpo_cg import cgtp_path, valid_paths
from .tpo_gaunt import fourier_decode, fourier_encode, gaunt_contraction
from .tpo_matrix import default_l_tilde, mtp, mtp_path_weights
from .wigner import XYZ_TO_REAL, Rotation, wigner_d_all

EQUIVARIANCE_TOL = 1e-9
LINEAR_EQUIVARIANCE_TOL = 1e-12
SPARSE_NAIVE_TOL = 1e-12
FOURIER_GRID_TOL = 1e-8
GRID_GAUNT_TOL = 1e-9
MTP_PATHS_TOL = 1e-10
PARITY_TOL = 1e-12
CROSS_REL_TOL = 1e-10
ROUNDTRIP_TOL = 1e-11
ORTHONORMAL_TOL = 1e-12
FOURIER_ROUNDTRIP_TOL = 1e-10
SLOPE_TOL = 0.3

SCALING_LS = (4, 6, 8, 12, 16)
MIMO_SLOPES = {
    ("cgtp", "naive"): 6.0,
    ("cgtp", "sparse"): 5.0,
    ("gtp", "grid"): 3.0,
    ("mtp", "naive"): 4.0,
    ("mtp", "sparse"): 3.0,
}
SISO_SLOPES = {("cgtp", "naive"): 3.0, ("cgtp", "sparse"): 2.0}
EXPRESSIVITY_SLOPES = {"cgtp": 3.0, "gtp": 1.0, "mtp": 1.0}
NORMALIZED_SLOPE = 2.0


@dataclass(frozen=True)
class Check:
    suite: str
    check: str
    L: int
    max_err: float
    threshold: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.max_err)) and self.max_err <= self.threshold

    def row(self, digits: int = 17) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"{self.suite},{self.check},{self.L},{self.max_err:.{digits}g},{self.threshold!r},{verdict}"


def _pairs(L: int, n: int, rng: np.random.Generator) -> tuple[IrrepVector, IrrepVector]:
    irreps = single_copies(L)
    return IrrepVector.random(irreps, rng, (n,)), IrrepVector.random(irreps, rng, (n,))


def equivariance_error(kind: str, impl: str, L: int, rotations: int, pairs: int, seed: int = 0) -> float:
    """Max |T(Dx, Dy) - D T(x, y)| over random rotations and input pairs."""
    rng = np.random.default_rng(seed)
    x, y = _pairs(L, pairs, rng)
    out = apply_tpo(kind, impl, x, y, 2 * L)
    worst = 0.0
    for _ in range(rotations):
        d = wigner_d_all(2 * L, Rotation.random(rng))
        rotated = apply_tpo(kind, impl, x.rotate(d), y.rotate(d), 2 * L)
        worst = max(worst, float(np.max(np.abs(rotated.data - out.rotate(d).data))))
    return worst


def cross_product_error(kind: str, pairs: int = 10, seed: int = 0) -> float:
    """Relative deviation of the [1,1,1] output from one fixed multiple of u x v."""
    rng = np.random.default_rng(seed)
    u = rng.standard_normal((pairs, 3))
    v = rng.standard_normal((pairs, 3))
    ref = np.cross(u, v) @ XYZ_TO_REAL.T
    if kind == "cgtp":
        out = cgtp_path(u @ XYZ_TO_REAL.T, v @ XYZ_TO_REAL.T, (1, 1, 1))
    else:
        pad = np.zeros((pairs, 1))
        x = IrrepVector(single_copies(1), np.hstack([pad, u @ XYZ_TO_REAL.T]))
        y = IrrepVector(single_copies(1), np.hstack([pad, v @ XYZ_TO_REAL.T]))
        out = apply_tpo(kind, None, x, y, 1).data[:, 1:4]
    scale = np.sum(out * ref) / np.sum(ref * ref)
    if abs(scale) < 1e-12:
        return float("inf")
    return float(np.max(np.abs(out - scale * ref)) / np.max(np.abs(scale * ref)))


def mtp_path_expansion(x: IrrepVector, y: IrrepVector, L3: int) -> np.ndarray:
    """``sum over paths of mtp_path_weights * cgtp_path``, the MTP oracle."""
    L1, L2 = x.irreps.lmax, y.irreps.lmax
    lt = default_l_tilde(L1, L2, L3)
    out = np.zeros(x.data.shape[:-1] + ((L3 + 1) ** 2,))
    for p in valid_paths(L1, L2, L3):
        w = mtp_path_weights(p.l1, p.l2, p.l3, lt)
        if w != 0.0:
            xs = x.data[..., p.l1 ** 2: (p.l1 + 1) ** 2]
            ys = y.data[..., p.l2 ** 2: (p.l2 + 1) ** 2]
            out[..., p.l3 ** 2: (p.l3 + 1) ** 2] += w * cgtp_path(xs, ys, p)
    return out


def suite_equivariance(L: int, seed: int = 0) -> list[Check]:
    checks = [
        Check("equivariance", f"{kind}-{impl}", L, equivariance_error(kind, impl, L, 20, 10, seed), EQUIVARIANCE_TOL)
        for kind, impl in all_tpos()
    ]
    rng = np.random.default_rng(seed)
    irreps = "2x0+1x1+2x2"
    layer = LinearLayer.random(irreps, "1x0+2x1+1x2", rng)
    x = IrrepVector.random(irreps, rng, (10,))
    worst = 0.0
    for _ in range(20):
        d = wigner_d_all(2, Rotation.random(rng))
        diff = apply_linear(layer, x.rotate(d)).data - apply_linear(layer, x).rotate(d).data
        worst = max(worst, float(np.max(np.abs(diff))))
    checks.append(Check("equivariance", "linear-layer", 2, worst, LINEAR_EQUIVARIANCE_TOL))
    return checks


def suite_oracle_equality(L: int, seed: int = 0) -> list[Check]:
    rng = np.random.default_rng(seed)
    x, y = _pairs(L, 100, rng)
    L3 = 2 * L
    cg_naive = apply_tpo("cgtp", "naive", x, y, L3).data
    cg_sparse = apply_tpo("cgtp", "sparse", x, y, L3).data
    grid = apply_tpo("gtp", "grid", x, y, L3).data
    fourier = apply_tpo("gtp", "fourier", x, y, L3).data
    gaunt = gaunt_contraction(x, y, L3).data
    expansion = mtp_path_expansion(x, y, L3)
    errs = [("cgtp-sparse-vs-naive", np.abs(cg_sparse - cg_naive), SPARSE_NAIVE_TOL),
            ("gtp-fourier-vs-grid", np.abs(fourier - grid), FOURIER_GRID_TOL),
            ("gtp-grid-vs-gaunt-contraction", np.abs(grid - gaunt), GRID_GAUNT_TOL)]
    for impl in ("naive", "sparse"):
        errs.append((f"mtp-{impl}-vs-path-expansion", np.abs(mtp(x, y, L3, impl).data - expansion), MTP_PATHS_TOL))
    return [Check("oracle-equality", name, L, float(np.max(e)), tol) for name, e, tol in errs]


def suite_selection_rules(L: int, seed: int = 0) -> list[Check]:
    odd = 0.0
    for l1 in range(L + 1):
        for l2 in range(L + 1):
            for l3 in range(abs(l1 - l2), l1 + l2 + 1):
                if (l1 + l2 + l3) % 2 == 1:
                    odd = max(odd, float(np.max(np.abs(restricted_map("gtp", l1, l2, l3)))))
    checks = [Check("selection-rules", "gtp-odd-parity-zero", L, odd, PARITY_TOL)]
    if L >= 1:
        checks.append(Check("selection-rules", "gtp-[1,1,1]-zero", 1,
                            float(np.max(np.abs(restricted_map("gtp", 1, 1, 1)))), PARITY_TOL))
        for kind in ("cgtp", "mtp"):
            checks.append(Check("selection-rules", f"{kind}-[1,1,1]-cross-product", 1,
                                cross_product_error(kind, seed=seed), CROSS_REL_TOL))
    return checks


def suite_roundtrip(L: int, seed: int = 0) -> list[Check]:
    rng = np.random.default_rng(seed)
    checks = []
    worst_rt = worst_on = 0.0
    for lv in range(L + 1):
        grid = make_grid(lv)
        x = IrrepVector.random(single_copies(lv), rng, (20,))
        worst_rt = max(worst_rt, float(np.max(np.abs(from_sphere(to_sphere(x, grid), lv).data - x.data))))
        y = spherical_harmonics(lv, grid.points())  # (n_theta, n_phi, dim)
        gram = grid.integrate(np.einsum("jka,jkb->abjk", y, y))
        worst_on = max(worst_on, float(np.max(np.abs(gram - np.eye(gram.shape[0])))))
    checks.append(Check("roundtrip", "sphere-roundtrip", L, worst_rt, ROUNDTRIP_TOL))
    checks.append(Check("roundtrip", "grid-orthonormality", L, worst_on, ORTHONORMAL_TOL))
    x = IrrepVector.random(single_copies(L), rng, (50,))
    enc = fourier_encode(x)
    decoded = fourier_decode(enc, L)
    checks.append(Check("roundtrip", "fourier-roundtrip", L, float(np.max(np.abs(decoded.data - x.data))),
                        FOURIER_ROUNDTRIP_TOL))
    return checks


def suite_expressivity(L: int, seed: int = 0) -> list[Check]:
    checks = []
    for Lr in range(min(L, 3) + 1):
        for kind in ("cgtp", "gtp", "mtp"):
            count = expressivity_count(kind, Lr)
            rank = expressivity_rank(kind, Lr, seed=seed)
            if kind == "cgtp":
                checks.append(Check("expressivity", "cgtp-rank-equals-paths", Lr, float(abs(rank - count)), 0.0))
            else:
                checks.append(Check("expressivity", f"{kind}-rank-within-bound", Lr, float(max(rank - count, 0)), 0.0))
    return checks


def scaling_slopes() -> dict[str, tuple[float, float]]:
    """``name -> (fitted slope, target)`` for every graded scaling fit."""
    out = {}
    Ls = SCALING_LS
    for (kind, impl), target in MIMO_SLOPES.items():
        out[f"mimo-{kind}-{impl}"] = (bench.fit_slope(Ls, bench.op_counts(kind, impl, "mimo", Ls)), target)
    for (kind, impl), target in SISO_SLOPES.items():
        out[f"siso-{kind}-{impl}"] = (bench.fit_slope(Ls, bench.op_counts(kind, impl, "siso", Ls)), target)
    for kind, target in EXPRESSIVITY_SLOPES.items():
        out[f"expressivity-{kind}"] = (bench.fit_slope(Ls, [expressivity_count(kind, L) for L in Ls]), target)
    ops = np.array(bench.op_counts("cgtp", "sparse", "mimo", Ls), dtype=float)
    expr = np.array([expressivity_count("cgtp", L) for L in Ls], dtype=float)
    out["ops-per-expr-cgtp-sparse"] = (bench.fit_slope(Ls, ops / expr), NORMALIZED_SLOPE)
    return out


def suite_scaling(L: int, seed: int = 0) -> list[Check]:
    return [
        Check("scaling", name, max(SCALING_LS), abs(slope - target), SLOPE_TOL)
        for name, (slope, target) in scaling_slopes().items()
    ]


SUITES: dict[str, Callable[[int, int], list[Check]]] = {
    "equivariance": suite_equivariance,
    "oracle-equality": suite_oracle_equality,
    "selection-rules": suite_selection_rules,
    "roundtrip": suite_roundtrip,
    "expressivity": suite_expressivity,
    "scaling": suite_scaling,
}


def run_suite(name: str, L: int, seed: int = 0) -> list[Check]:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; expected one of {sorted(SUITES)}")
    return SUITES[name](L, seed)
