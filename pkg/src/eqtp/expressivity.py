"""Expressivity and interactability of tensor-product operations.

A TPO ``T: X' x Y' -> Z'`` wrapped in equivariant linear layers builds the
family ``B_theta(x, y) = Lin_Z T(Lin_X x, Lin_Y y)`` from
``X x Y -> Z``. Here ``X = Y = 0+...+L`` and ``Z = 0+...+2L``. Expressivity is
the dimension of that family. It is counted analytically and also measured
as the rank of the Jacobian of ``theta -> B_theta``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .irreps import IrrepVector, Irreps, LinearLayer, single_copies
from .tpo import apply_tpo, check_kind
from .tpo_cg import valid_paths

RANK_RTOL = 1e-8
# outputs below this magnitude count as an exactly vanishing map
INTERACT_TOL = 1e-10


def expressivity_count(kind: str, L: int) -> int:
    """Analytic count for ``(0+...+L) x (0+...+L) -> (0+...+2L)``.

    CGTP: one independent output weight per valid path. GTP/MTP: the linear
    layer parameters ``(L+1) + (L+1) + (2L+1)`` minus the two overall scaling
    redundancies, an upper bound.
    """
    check_kind(kind)
    if L < 0:
        raise ValueError("L must be non-negative")
    if kind == "cgtp":
        return len(valid_paths(L, L, 2 * L))
    return (L + 1) + (L + 1) + (2 * L + 1) - 2


@dataclass(frozen=True)
class BilinearitySpec:
    """``X x Y -> Z`` around a TPO with internal descriptors ``X', Y' -> Z'``."""

    kind: str
    L: int
    impl: str | None = None

    @property
    def X(self) -> Irreps:
        return single_copies(self.L)

    @property
    def Y(self) -> Irreps:
        return single_copies(self.L)

    @property
    def Z(self) -> Irreps:
        return single_copies(2 * self.L)

    @cached_property
    def Z_inner(self) -> Irreps:
        if self.kind == "cgtp":
            return valid_paths(self.L, self.L, 2 * self.L).output_irreps
        return single_copies(2 * self.L)

    @property
    def num_params(self) -> tuple[int, int, int]:
        return (
            LinearLayer.num_weights(self.X, self.X),
            LinearLayer.num_weights(self.Y, self.Y),
            LinearLayer.num_weights(self.Z_inner, self.Z),
        )

    @cached_property
    def response(self) -> np.ndarray:
        """``T(e_i, e_j)`` for every basis pair, shape (dim X', dim Y', dim Z')."""
        nx, ny = self.X.dim, self.Y.dim
        ex = np.repeat(np.eye(nx), ny, axis=0)
        ey = np.tile(np.eye(ny), (nx, 1))
        out = apply_tpo(self.kind, self.impl, IrrepVector(self.X, ex), IrrepVector(self.Y, ey), 2 * self.L)
        if out.irreps != self.Z_inner:
            raise AssertionError(f"unexpected TPO output {out.irreps}, expected {self.Z_inner}")
        return out.data.reshape(nx, ny, -1)

    def _layer(self, inp: Irreps, out: Irreps, w: np.ndarray) -> np.ndarray:
        return LinearLayer(inp, out, w).matrix()

    def bilinearity(self, wx: np.ndarray, wy: np.ndarray, wz: np.ndarray) -> np.ndarray:
        """``B_theta`` as a (dim X, dim Y, dim Z) array."""
        ax = self._layer(self.X, self.X, wx)
        ay = self._layer(self.Y, self.Y, wy)
        az = self._layer(self.Z_inner, self.Z, wz)
        return np.einsum("ai,bj,ijk,ck->abc", ax, ay, self.response, az, optimize=True)

    def jacobian(self, wx: np.ndarray, wy: np.ndarray, wz: np.ndarray) -> np.ndarray:
        """Exact Jacobian of the flattened ``B_theta``; B is linear in each layer separately."""
        cols = []
        for which, w in enumerate((wx, wy, wz)):
            for k in range(len(w)):
                unit = np.zeros_like(w)
                unit[k] = 1.0
                args = [wx, wy, wz]
                args[which] = unit
                cols.append(self.bilinearity(*args).ravel())
        return np.stack(cols, axis=1)


def _rank(m: np.ndarray) -> int:
    s = np.linalg.svd(m, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > RANK_RTOL * s[0]))


def expressivity_ranks(kind: str, L: int, trials: int = 3, seed: int = 0, impl: str | None = None) -> list[int]:
    """Jacobian rank at ``trials`` random generic parameter draws."""
    spec = BilinearitySpec(kind, L, impl)
    rng = np.random.default_rng(seed)
    ranks = []
    for _ in range(trials):
        ws = [rng.standard_normal(n) for n in spec.num_params]
        ranks.append(_rank(spec.jacobian(*ws)))
    return ranks


def expressivity_rank(kind: str, L: int, trials: int = 3, seed: int = 0, impl: str | None = None) -> int:
    """Numerical dimension of the family of bilinearities (max over trials)."""
    ranks = expressivity_ranks(kind, L, trials, seed, impl)
    if len(set(ranks)) > 1:
        warnings.warn(f"unstable expressivity rank for {kind} L={L}: {ranks}", RuntimeWarning, stacklevel=2)
    return max(ranks)


def restricted_map(kind: str, l1: int, l2: int, l3: int, impl: str | None = None) -> np.ndarray:
    """The TPO restricted to ``V^l1 x V^l2 -> V^l3`` as a (2l1+1, 2l2+1, 2l3+1) array.

    Inputs are padded to single copies; for CGTP every output copy of degree
    l3 is concatenated along the last axis.
    """
    impl = check_kind(kind, impl)
    n1, n2 = 2 * l1 + 1, 2 * l2 + 1
    if l3 > l1 + l2:
        return np.zeros((n1, n2, 2 * l3 + 1))
    ex = np.zeros((n1 * n2, (l1 + 1) ** 2))
    ey = np.zeros((n1 * n2, (l2 + 1) ** 2))
    ex[:, l1 * l1:] = np.repeat(np.eye(n1), n2, axis=0)
    ey[:, l2 * l2:] = np.tile(np.eye(n2), (n1, 1))
    out = apply_tpo(kind, impl, IrrepVector(single_copies(l1), ex), IrrepVector(single_copies(l2), ey), l3)
    blocks = [out.data[:, sl] for *_, l, sl in out.irreps.copies() if l == l3]
    data = np.concatenate(blocks, axis=1) if blocks else np.zeros((n1 * n2, 2 * l3 + 1))
    return data.reshape(n1, n2, -1)


def interactable(kind: str, l1: int, l2: int, l3: int, impl: str | None = None) -> bool:
    """Whether the restricted map ``V^l1 x V^l2 -> V^l3`` is nonzero (exhaustive basis probing)."""
    return bool(np.max(np.abs(restricted_map(kind, l1, l2, l3, impl)), initial=0.0) > INTERACT_TOL)
