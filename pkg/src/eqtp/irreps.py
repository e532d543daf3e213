"""Irrep descriptors, coefficient containers and Schur-constrained linear layers.

Components inside one irrep copy are ordered m = -l, ..., +l. Data arrays may
carry leading batch axes; the trailing axis is always the irreps axis.
"""

from __future__ import annotations

import builtins
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np


@dataclass(frozen=True, order=True)
class Irrep:
    l: int

    def __post_init__(self):
        if int(self.l) != self.l or self.l < 0:
            raise ValueError(f"irrep degree must be a non-negative integer, got {self.l!r}")

    @property
    def dim(self) -> int:
        return 2 * self.l + 1


_TERM = re.compile(r"^\s*(\d+)\s*x\s*(\d+)\s*$")


@dataclass(frozen=True)
class Irreps:
    """Ordered multiset of ``(mult, l)`` entries.

    Equality is structural: ``Irreps("1x0+1x1") != Irreps("1x1+1x0")``.
    """

    entries: tuple[tuple[int, int], ...]

    def __init__(self, entries: "str | Sequence[tuple[int, int]] | Irreps" = ()):
        if isinstance(entries, Irreps):
            parsed = entries.entries
        elif isinstance(entries, str):
            parsed = self._parse(entries)
        else:
            parsed = tuple((int(mul), int(l)) for mul, l in entries)
        for mul, l in parsed:
            if mul <= 0:
                raise ValueError(f"multiplicity must be positive, got {mul}")
            if l < 0:
                raise ValueError(f"degree must be non-negative, got {l}")
        object.__setattr__(self, "entries", parsed)

    @staticmethod
    def _parse(text: str) -> tuple[tuple[int, int], ...]:
        text = text.strip()
        if not text:
            return ()
        out = []
        for term in text.split("+"):
            match = _TERM.match(term)
            if match is None:
                raise ValueError(f"cannot parse irreps term {term!r} in {text!r}")
            out.append((int(match.group(1)), int(match.group(2))))
        return tuple(out)

    def __str__(self) -> str:
        return "+".join(f"{mul}x{l}" for mul, l in self.entries)

    def __repr__(self) -> str:
        return f"Irreps({str(self)!r})"

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return iter(self.entries)

    def __getitem__(self, i: int) -> tuple[int, int]:
        return self.entries[i]

    def __add__(self, other: "Irreps") -> "Irreps":
        return Irreps(self.entries + Irreps(other).entries)

    @cached_property
    def dim(self) -> int:
        return sum(mul * (2 * l + 1) for mul, l in self.entries)

    @cached_property
    def offsets(self) -> tuple[int, ...]:
        """Start index of every entry; the last element is ``dim``."""
        out = [0]
        for mul, l in self.entries:
            out.append(out[-1] + mul * (2 * l + 1))
        return tuple(out)

    @property
    def num_irreps(self) -> int:
        return sum(mul for mul, _ in self.entries)

    @property
    def lmax(self) -> int:
        return max((l for _, l in self.entries), default=-1)

    def index(self, entry: int, channel: int) -> slice:
        if not 0 <= entry < len(self.entries):
            raise IndexError(f"entry {entry} out of range for {self}")
        mul, l = self.entries[entry]
        if not 0 <= channel < mul:
            raise IndexError(f"channel {channel} out of range for entry {entry} ({mul}x{l})")
        start = self.offsets[entry] + channel * (2 * l + 1)
        return builtins.slice(start, start + 2 * l + 1)

    def copies(self) -> Iterator[tuple[int, int, int, slice]]:
        """Yield ``(entry, channel, l, slice)`` for every irrep copy in layout order."""
        for i, (mul, l) in enumerate(self.entries):
            for c in range(mul):
                yield i, c, l, self.index(i, c)

    def is_single_copies(self, L: int | None = None) -> bool:
        ls = [l for _, l in self.entries]
        ok = all(mul == 1 for mul, _ in self.entries) and ls == list(range(len(ls)))
        return ok and (L is None or len(ls) == L + 1)

    def block_diag(self, blocks: dict[int, np.ndarray]) -> np.ndarray:
        """Assemble a block-diagonal matrix from per-degree blocks (e.g. Wigner-D)."""
        out = np.zeros((self.dim, self.dim))
        for _, _, l, sl in self.copies():
            out[sl, sl] = blocks[l]
        return out


def single_copies(L: int) -> Irreps:
    """The descriptor ``1x0+1x1+...+1xL``."""
    if L < 0:
        raise ValueError("L must be non-negative")
    return Irreps([(1, l) for l in range(L + 1)])


def lm_index(l: int, m: int) -> int:
    """Flat position of component (l, m) inside ``single_copies(L)`` data."""
    return l * l + l + m


@dataclass(frozen=True)
class IrrepVector:
    irreps: Irreps
    data: np.ndarray

    def __post_init__(self):
        irreps = Irreps(self.irreps)
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim == 0 or data.shape[-1] != irreps.dim:
            raise ValueError(f"data trailing axis {data.shape} does not match {irreps} (dim {irreps.dim})")
        data = data.copy()
        data.setflags(write=False)
        object.__setattr__(self, "irreps", irreps)
        object.__setattr__(self, "data", data)

    @classmethod
    def zeros(cls, irreps: Irreps | str, batch: tuple[int, ...] = ()) -> "IrrepVector":
        irreps = Irreps(irreps)
        return cls(irreps, np.zeros(batch + (irreps.dim,)))

    @classmethod
    def random(cls, irreps: Irreps | str, rng: np.random.Generator, batch: tuple[int, ...] = ()) -> "IrrepVector":
        irreps = Irreps(irreps)
        return cls(irreps, rng.standard_normal(batch + (irreps.dim,)))

    def slice(self, entry: int, channel: int = 0) -> np.ndarray:
        return self.data[..., self.irreps.index(entry, channel)]

    def with_slice(self, entry: int, channel: int, values) -> "IrrepVector":
        """Return a copy with one m-block replaced."""
        data = np.array(self.data)
        data[..., self.irreps.index(entry, channel)] = values
        return IrrepVector(self.irreps, data)

    def rotate(self, wigner: dict[int, np.ndarray]) -> "IrrepVector":
        """Apply per-degree rotation matrices ``wigner[l]`` to every copy."""
        data = np.empty_like(self.data)
        for _, _, l, sl in self.irreps.copies():
            data[..., sl] = self.data[..., sl] @ wigner[l].T
        return IrrepVector(self.irreps, data)

    def __add__(self, other: "IrrepVector") -> "IrrepVector":
        _check_same(self.irreps, other.irreps)
        return IrrepVector(self.irreps, self.data + other.data)

    def __sub__(self, other: "IrrepVector") -> "IrrepVector":
        _check_same(self.irreps, other.irreps)
        return IrrepVector(self.irreps, self.data - other.data)

    def __mul__(self, scalar: float) -> "IrrepVector":
        return IrrepVector(self.irreps, self.data * scalar)

    __rmul__ = __mul__


def _check_same(a: Irreps, b: Irreps) -> None:
    if a != b:
        raise ValueError(f"irreps mismatch: {a} vs {b}")


@dataclass(frozen=True)
class LinearLayer:
    """Equivariant linear map between two irreps descriptors.

    By Schur's lemma only copies of equal degree are connected, each by a
    scalar multiple of the identity. Weights are ordered by output copy, then
    by input copy (both in layout order).
    """

    input: Irreps
    output: Irreps
    weights: np.ndarray = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "input", Irreps(self.input))
        object.__setattr__(self, "output", Irreps(self.output))
        n = self.num_weights(self.input, self.output)
        w = np.zeros(n) if self.weights is None else np.asarray(self.weights, dtype=np.float64)
        if w.shape != (n,):
            raise ValueError(f"expected {n} weights for {self.input} -> {self.output}, got shape {w.shape}")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @staticmethod
    def pairs(input: Irreps, output: Irreps) -> list[tuple[slice, slice, int]]:
        """``(out_slice, in_slice, l)`` for every connected pair, in weight order."""
        ins = list(Irreps(input).copies())
        return [
            (osl, isl, lo)
            for *_, lo, osl in Irreps(output).copies()
            for *_, li, isl in ins
            if li == lo
        ]

    @classmethod
    def num_weights(cls, input: Irreps, output: Irreps) -> int:
        return len(cls.pairs(input, output))

    @classmethod
    def identity(cls, irreps: Irreps | str) -> "LinearLayer":
        irreps = Irreps(irreps)
        w = [float(osl == isl) for osl, isl, _ in cls.pairs(irreps, irreps)]
        return cls(irreps, irreps, np.array(w))

    @classmethod
    def random(cls, input, output, rng: np.random.Generator) -> "LinearLayer":
        return cls(input, output, rng.standard_normal(cls.num_weights(input, output)))

    def matrix(self) -> np.ndarray:
        """Dense ``(output.dim, input.dim)`` matrix of the layer."""
        mat = np.zeros((self.output.dim, self.input.dim))
        for w, (osl, isl, l) in zip(self.weights, self.pairs(self.input, self.output)):
            mat[osl, isl] += w * np.eye(2 * l + 1)
        return mat


def apply_linear(layer: LinearLayer, x: IrrepVector) -> IrrepVector:
    _check_same(layer.input, x.irreps)
    out = np.zeros(x.data.shape[:-1] + (layer.output.dim,))
    for w, (osl, isl, _) in zip(layer.weights, layer.pairs(layer.input, layer.output)):
        out[..., osl] += w * x.data[..., isl]
    return IrrepVector(layer.output, out)


def slice(x: IrrepVector, entry: int, channel: int = 0) -> np.ndarray:  # noqa: A001
    """The contiguous m-block of copy ``channel`` of entry ``entry``."""
    return x.slice(entry, channel)
