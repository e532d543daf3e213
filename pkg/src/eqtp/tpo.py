"""Uniform entry point over every tensor-product implementation."""

from __future__ import annotations

from .irreps import IrrepVector
from .tpo_cg import cgtp_mimo
from .tpo_gaunt import gtp_fourier, gtp_grid
from .tpo_matrix import mtp

KINDS: dict[str, tuple[str, ...]] = {
    "cgtp": ("naive", "sparse"),
    "gtp": ("grid", "fourier"),
    "mtp": ("naive", "sparse"),
}

DEFAULT_IMPL = {"cgtp": "sparse", "gtp": "grid", "mtp": "sparse"}


def check_kind(kind: str, impl: str | None = None) -> str:
    if kind not in KINDS:
        raise ValueError(f"unknown TPO kind {kind!r}; expected one of {sorted(KINDS)}")
    impl = DEFAULT_IMPL[kind] if impl is None else impl
    if impl not in KINDS[kind]:
        raise ValueError(f"unknown impl {impl!r} for {kind}; expected one of {KINDS[kind]}")
    return impl


def all_tpos() -> list[tuple[str, str]]:
    return [(k, i) for k, impls in KINDS.items() for i in impls]


def apply_tpo(kind: str, impl: str | None, x: IrrepVector, y: IrrepVector,
              L3: int | None = None, counter=None) -> IrrepVector:
    """Run one TPO on single-copy inputs; output degrees up to L3 (default L1 + L2)."""
    impl = check_kind(kind, impl)
    if kind == "cgtp":
        return cgtp_mimo(x, y, impl, counter, L_out=L3)
    if kind == "gtp":
        f = gtp_grid if impl == "grid" else gtp_fourier
        return f(x, y, L3, counter)
    return mtp(x, y, L3, impl, counter)
