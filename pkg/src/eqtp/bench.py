"""Benchmark harness: exact multiply counts, wall-clock timing, CSV sweeps.

Settings, with ``L`` the degree scale:

* ``siso``: the single path [L, L, L].
* ``simo``: inputs of degree L only, every output degree 0..2L.
* ``mimo``: single copies 0..L on both inputs, outputs 0..2L.

Multiply counts come from the same kernels that compute the result: every
kernel reports the scalar multiplies its reference loop performs, and an
:class:`~eqtp.kernels.OpCounter` accumulates them.
"""

from __future__ import annotations

import csv
import io
import logging
import statistics
import time
from dataclasses import dataclass, field
from pathlib import Path as FsPath
from typing import Iterable, Sequence, TextIO

import numpy as np

from . import kernels
from .irreps import IrrepVector, single_copies
from .tpo import KINDS, check_kind
from .tpo_cg import Path, PathTable, cgtp_paths, valid_paths
from .tpo_gaunt import gtp_fourier, gtp_grid
from .tpo_matrix import mtp

log = logging.getLogger(__name__)

MODES = ("siso", "simo", "mimo")

CSV_HEADER = (
    "kind", "impl", "mode", "L", "batch", "ops", "time_med_ns", "time_min_ns", "time_max_ns",
    "expressivity", "ops_per_expr", "time_per_expr_ns",
)


@dataclass(frozen=True)
class BenchSetting:
    mode: str
    L: int
    batch: int = 1

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.L < 0:
            raise ValueError("L must be non-negative")
        if self.batch < 1:
            raise ValueError("batch must be positive")

    @property
    def input_lo(self) -> int:
        """Lowest input degree carrying data."""
        return 0 if self.mode == "mimo" else self.L

    @property
    def output_range(self) -> tuple[int, int]:
        if self.mode == "siso":
            return self.L, self.L
        return 0, 2 * self.L

    def paths(self) -> PathTable:
        L = self.L
        if self.mode == "siso":
            return PathTable((Path(L, L, L),))
        if self.mode == "simo":
            return PathTable(tuple(Path(L, L, l3) for l3 in range(2 * L + 1)))
        return valid_paths(L, L, 2 * L)


def supported(kind: str, mode: str) -> bool:
    """MTP embeds whole single-copy inputs, so only the MIMO setting applies."""
    return kind != "mtp" or mode == "mimo"


def setting_expressivity(kind: str, setting: BenchSetting) -> int:
    """Expressivity of the setting's bilinearity family.

    CGTP: one weight per computed path. GTP/MTP: input plus output irreps
    minus the two scaling redundancies.
    """
    check_kind(kind)
    if kind == "cgtp":
        return len(setting.paths())
    n_in = setting.L - setting.input_lo + 1
    lo, hi = setting.output_range
    return n_in + n_in + (hi - lo + 1) - 2


def make_inputs(setting: BenchSetting, rng: np.random.Generator) -> tuple[IrrepVector, IrrepVector]:
    """Standard-normal inputs over single copies 0..L, zero below the setting's lowest degree."""
    L = setting.L
    out = []
    for _ in range(2):
        data = rng.standard_normal((setting.batch, (L + 1) ** 2))
        data[:, : setting.input_lo ** 2] = 0.0
        out.append(IrrepVector(single_copies(L), data))
    return out[0], out[1]


def run_setting(kind: str, impl: str, setting: BenchSetting, x: IrrepVector, y: IrrepVector,
                counter=None) -> IrrepVector:
    impl = check_kind(kind, impl)
    if not supported(kind, setting.mode):
        raise ValueError(f"{kind} supports only the mimo setting")
    lo3, hi3 = setting.output_range
    lo = (setting.input_lo, setting.input_lo, lo3)
    if kind == "cgtp":
        return cgtp_paths(x, y, setting.paths(), impl, counter)
    if kind == "gtp":
        f = gtp_grid if impl == "grid" else gtp_fourier
        return f(x, y, hi3, counter, lo=lo)
    return mtp(x, y, hi3, impl, counter)


def count_ops(kind: str, impl: str, setting: BenchSetting, seed: int = 0) -> int:
    """Exact multiply count of one instrumented execution (all batch samples)."""
    x, y = make_inputs(setting, np.random.default_rng(seed))
    counter = kernels.OpCounter()
    run_setting(kind, impl, setting, x, y, counter)
    return counter.total


@dataclass(frozen=True)
class BenchRecord:
    kind: str
    impl: str
    mode: str
    L: int
    batch: int
    ops: int
    time_med_ns: int
    time_min_ns: int
    time_max_ns: int
    expressivity: int

    @property
    def ops_per_expr(self) -> float:
        return self.ops / self.expressivity

    @property
    def time_per_expr_ns(self) -> float:
        return self.time_med_ns / self.expressivity

    def row(self, digits: int = 17) -> list[str]:
        return [
            self.kind, self.impl, self.mode, str(self.L), str(self.batch), str(self.ops),
            str(self.time_med_ns), str(self.time_min_ns), str(self.time_max_ns), str(self.expressivity),
            f"{self.ops_per_expr:.{digits}g}", f"{self.time_per_expr_ns:.{digits}g}",
        ]


def time_tpo(kind: str, impl: str, setting: BenchSetting, warmup: int = 1, repeats: int = 5,
             seed: int = 0) -> BenchRecord:
    """Median-of-repeats wall-clock timing; the first warmup run is the instrumented one."""
    if warmup < 1 or repeats < 5:
        raise ValueError("need warmup >= 1 and repeats >= 5")
    x, y = make_inputs(setting, np.random.default_rng([seed, setting.L]))
    counter = kernels.OpCounter()
    run_setting(kind, impl, setting, x, y, counter)
    for _ in range(warmup - 1):
        run_setting(kind, impl, setting, x, y)
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter_ns()
        run_setting(kind, impl, setting, x, y)
        times.append(time.perf_counter_ns() - t0)
    return BenchRecord(
        kind=kind, impl=impl, mode=setting.mode, L=setting.L, batch=setting.batch, ops=counter.total,
        time_med_ns=int(statistics.median(times)), time_min_ns=min(times), time_max_ns=max(times),
        expressivity=setting_expressivity(kind, setting),
    )


@dataclass(frozen=True)
class SweepConfig:
    kinds: tuple[str, ...] = ("cgtp", "gtp", "mtp")
    impls: tuple[str, ...] | None = None  # None = every impl of each kind
    mode: str = "mimo"
    Ls: tuple[int, ...] = tuple(range(4, 17))
    batch: int = 16
    seed: int = 0
    warmup: int = 1
    repeats: int = 5

    def pairs(self) -> list[tuple[str, str]]:
        out = []
        for kind in self.kinds:
            check_kind(kind)
            for impl in KINDS[kind]:
                if self.impls is None or impl in self.impls:
                    out.append((kind, impl))
        return out


def sweep(config: SweepConfig, out: str | FsPath | TextIO | None = None, digits: int = 17) -> list[BenchRecord]:
    """Time every (kind, impl, L) of the config; optionally write the CSV."""
    records = []
    for kind, impl in config.pairs():
        if not supported(kind, config.mode):
            log.info("skipping %s: mode %s not supported", kind, config.mode)
            continue
        for L in config.Ls:
            setting = BenchSetting(config.mode, L, config.batch)
            records.append(time_tpo(kind, impl, setting, config.warmup, config.repeats, config.seed))
            log.info("%s-%s %s L=%d done", kind, impl, config.mode, L)
    if out is not None:
        write_csv(records, out, digits)
    return records


def write_csv(records: Iterable[BenchRecord], out: str | FsPath | TextIO, digits: int = 17) -> None:
    if isinstance(out, (str, FsPath)):
        try:
            with open(out, "w", encoding="utf-8", newline="") as fh:
                _write(records, fh, digits)
        except OSError as exc:
            raise OSError(f"cannot write benchmark CSV to {out}: {exc}") from exc
    else:
        _write(records, out, digits)


def _write(records, fh: TextIO, digits: int) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in records:
        writer.writerow(r.row(digits))


def records_to_csv(records: Iterable[BenchRecord], digits: int = 17) -> str:
    buf = io.StringIO()
    _write(records, buf, digits)
    return buf.getvalue()


@dataclass(frozen=True)
class SlopeFit:
    """Log-log OLS fit of ``values`` against ``L + shift``."""

    Ls: tuple[int, ...]
    values: tuple[float, ...]
    shift: int = 1
    slope: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "slope", fit_slope(self.Ls, self.values, self.shift))


def fit_slope(Ls: Sequence[int], values: Sequence[float], shift: int = 1) -> float:
    """OLS slope of ``log(values)`` on ``log(L + shift)``.

    The default ``shift=1`` measures size by the number of degrees 0..L. Exact
    counts are polynomials in L+1, so this regressor removes most of the
    finite-size bias a plain ``log L`` fit shows at L <= 16.
    """
    Ls = np.asarray(Ls, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if len(Ls) != len(values) or len(Ls) < 2:
        raise ValueError("need at least two (L, value) points of equal length")
    if np.any(values <= 0) or np.any(Ls + shift <= 0):
        raise ValueError("log-log fit needs positive values and L + shift > 0")
    return float(np.polyfit(np.log(Ls + shift), np.log(values), 1)[0])


def op_counts(kind: str, impl: str, mode: str, Ls: Sequence[int]) -> list[int]:
    """Per-sample multiply counts over a list of L."""
    return [count_ops(kind, impl, BenchSetting(mode, L, 1)) for L in Ls]
