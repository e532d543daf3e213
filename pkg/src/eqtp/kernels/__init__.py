"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The backend is chosen once at import from ``EQTP_BACKEND`` (``numba`` by
default, ``numpy`` to disable JIT). :func:`use_backend` switches it
temporarily, which is how the tests and the backend benchmark compare both.

Every wrapper allocates its output, runs the active backend and, if a
:class:`OpCounter` is given, records the multiply count the kernel reports.
"""

from __future__ import annotations

import contextlib
import logging
import os
from collections import Counter
from types import ModuleType

import numpy as np

from . import _numpy

log = logging.getLogger(__name__)

BACKENDS: dict[str, ModuleType] = {"numpy": _numpy}
try:
    from . import _numba

    BACKENDS["numba"] = _numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    log.warning("numba unavailable; using the numpy kernels")

_requested = os.environ.get("EQTP_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ValueError(f"EQTP_BACKEND must be 'numba' or 'numpy', got {_requested!r}")
_active: ModuleType = BACKENDS.get(_requested, _numpy)


def backend() -> str:
    return "numba" if _active is BACKENDS.get("numba") else "numpy"


@contextlib.contextmanager
def use_backend(name: str):
    global _active
    if name not in BACKENDS:
        raise ValueError(f"backend {name!r} is not available (have {sorted(BACKENDS)})")
    prev, _active = _active, BACKENDS[name]
    try:
        yield
    finally:
        _active = prev


class OpCounter:
    """Accumulates multiply counts, optionally split by stage label.

    Complex arithmetic is weighted in real multiplies: complex*real = 2,
    complex*complex = 4.
    """

    def __init__(self):
        self.total = 0
        self.stages: Counter[str] = Counter()

    def add(self, ops: int, stage: str = "", weight: int = 1) -> None:
        n = int(ops) * weight
        self.total += n
        self.stages[stage] += n

    def __repr__(self):
        return f"OpCounter(total={self.total})"


def _weight(*arrays) -> int:
    cplx = sum(np.iscomplexobj(a) for a in arrays)
    return (1, 2, 4)[min(cplx, 2)]


def _record(counter, ops, stage, weight=1):
    if counter is not None:
        counter.add(ops, stage, weight)


def _c(a, dtype=None):
    return np.ascontiguousarray(a, dtype=dtype)


def dense_bilinear(c, x, y, counter=None, stage="bilinear"):
    """``out[b,k] = sum_ij c[i,j,k] x[b,i] y[b,j]`` (2 multiplies per term)."""
    x, y = _c(x, np.float64), _c(y, np.float64)
    out = np.empty((x.shape[0], c.shape[2]))
    _record(counter, _active.dense_bilinear(_c(c, np.float64), x, y, out), stage)
    return out


def gather_bilinear(coef, idx, x, y, counter=None, stage="bilinear"):
    """Sign-pattern passes: ``out[b,k] += coef[p,k,i] x[b,i] y[b,idx[p,k,i]]``."""
    x, y = _c(x, np.float64), _c(y, np.float64)
    out = np.empty((x.shape[0], coef.shape[1]))
    _record(counter, _active.gather_bilinear(_c(coef, np.float64), _c(idx, np.int64), x, y, out), stage)
    return out


def coo_matvec(rows, cols, vals, x, nrow, counter=None, stage="matvec"):
    """``out[b, rows[e]] += vals[e] * x[b, cols[e]]``."""
    x = _c(x)
    out = np.empty((x.shape[0], nrow), dtype=np.result_type(vals, x))
    ops = _active.coo_matvec(_c(rows, np.int64), _c(cols, np.int64), _c(vals), x, out)
    _record(counter, ops, stage, _weight(vals, x))
    return out


def dense_matvec(m, x, counter=None, stage="matvec"):
    """``out = x @ m.T`` for a batch of row vectors."""
    x = _c(x)
    out = np.empty((x.shape[0], m.shape[0]), dtype=np.result_type(m, x))
    ops = _active.dense_matvec(_c(m, out.dtype), _c(x, out.dtype), out)
    _record(counter, ops, stage, _weight(m, x))
    return out


def batched_matmul(a, b, counter=None, stage="matmul"):
    dtype = np.result_type(a, b)
    out = np.empty((a.shape[0], a.shape[1], b.shape[2]), dtype=dtype)
    ops = _active.batched_matmul(_c(a, dtype), _c(b, dtype), out)
    _record(counter, ops, stage, _weight(a, b))
    return out


def pointwise_mul(f, g, counter=None, stage="pointwise"):
    dtype = np.result_type(f, g)
    out = np.empty(np.broadcast_shapes(f.shape, g.shape), dtype=dtype)
    ops = _active.pointwise_mul(_c(f, dtype), _c(g, dtype), out)
    _record(counter, ops, stage, _weight(f, g))
    return out


def legendre_synthesis(x, plm, lo, hi, counter=None, stage="legendre"):
    """``out[b, j, m+hi] = sum_{lo<=l<=hi} x[b, lm(l,m)] plm[lm(l,m), j]``."""
    x = _c(x, np.float64)
    out = np.empty((x.shape[0], plm.shape[1], 2 * hi + 1))
    _record(counter, _active.legendre_synthesis(x, _c(plm, np.float64), int(lo), int(hi), out), stage)
    return out


def legendre_analysis(h, wplm, lo, hi, counter=None, stage="legendre"):
    """``out[b, lm(l,m)] = sum_j wplm[lm(l,m), j] h[b, j, m + half]`` for lo <= l <= hi."""
    h = _c(h, np.float64)
    out = np.empty((h.shape[0], (hi + 1) ** 2))
    _record(counter, _active.legendre_analysis(h, _c(wplm, np.float64), int(lo), int(hi), out), stage)
    return out
