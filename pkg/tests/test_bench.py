import io

import pytest

from eqtp import bench
from eqtp.bench import (
    CSV_HEADER, BenchSetting, SweepConfig, count_ops, fit_slope, op_counts, records_to_csv, setting_expressivity,
    supported, sweep, time_tpo,
)
from eqtp.tpo import all_tpos


def test_siso_naive_closed_form():
    # path [1,1,1]: 27 terms of two multiplies each
    assert count_ops("cgtp", "naive", BenchSetting("siso", 1)) == 2 * 27
    for L in (2, 5):
        assert count_ops("cgtp", "naive", BenchSetting("siso", L)) == 2 * (2 * L + 1) ** 3


def test_l0_counts_are_constants():
    assert count_ops("cgtp", "naive", BenchSetting("mimo", 0)) == 2
    assert count_ops("cgtp", "sparse", BenchSetting("siso", 0)) == 2
    for kind, impl in all_tpos():
        a = count_ops(kind, impl, BenchSetting("mimo", 0), seed=1)
        assert a == count_ops(kind, impl, BenchSetting("mimo", 0), seed=2) > 0


def test_sparse_over_naive_vanishes():
    ratios = [count_ops("cgtp", "sparse", BenchSetting("siso", L)) / count_ops("cgtp", "naive", BenchSetting("siso", L))
              for L in (4, 8, 16)]
    assert ratios[0] > ratios[1] > ratios[2]
    assert fit_slope((4, 8, 16), ratios) == pytest.approx(-1.0, abs=0.3)


def test_counts_scale_with_batch():
    one = count_ops("gtp", "grid", BenchSetting("mimo", 3, 1))
    assert count_ops("gtp", "grid", BenchSetting("mimo", 3, 4)) == 4 * one


@pytest.mark.parametrize("kind,impl", [(k, i) for k, i in all_tpos() if k != "mtp"])
def test_mimo_ge_simo_ge_siso(kind, impl):
    for L in (1, 3, 5):
        siso, simo, mimo = (count_ops(kind, impl, BenchSetting(m, L)) for m in ("siso", "simo", "mimo"))
        assert mimo >= simo >= siso


def test_mtp_only_mimo():
    assert supported("mtp", "mimo") and not supported("mtp", "siso")
    with pytest.raises(ValueError):
        count_ops("mtp", "sparse", BenchSetting("simo", 2))


def test_setting_expressivity():
    assert setting_expressivity("cgtp", BenchSetting("siso", 3)) == 1
    assert setting_expressivity("gtp", BenchSetting("siso", 3)) == 1
    assert setting_expressivity("cgtp", BenchSetting("simo", 3)) == 7
    assert setting_expressivity("gtp", BenchSetting("simo", 3)) == 7
    assert setting_expressivity("mtp", BenchSetting("mimo", 1)) == 5


def test_setting_validation():
    with pytest.raises(ValueError):
        BenchSetting("miso", 2)
    with pytest.raises(ValueError):
        BenchSetting("mimo", 2, batch=0)


def test_fit_slope_exact_power_law():
    Ls = (4, 6, 8, 12, 16)
    assert fit_slope(Ls, [3.0 * (L + 1) ** 4 for L in Ls]) == pytest.approx(4.0, abs=1e-12)
    assert fit_slope(Ls, [2.0 * L ** 3 for L in Ls], shift=0) == pytest.approx(3.0, abs=1e-12)
    with pytest.raises(ValueError):
        fit_slope((4,), (1.0,))
    with pytest.raises(ValueError):
        fit_slope((4, 8), (1.0, 0.0))


def test_op_counts_deterministic():
    a = op_counts("cgtp", "sparse", "mimo", (2, 3))
    assert a == op_counts("cgtp", "sparse", "mimo", (2, 3))
    assert all(isinstance(v, int) for v in a)


def test_time_tpo_record():
    rec = time_tpo("gtp", "grid", BenchSetting("mimo", 2, 3))
    assert rec.time_min_ns <= rec.time_med_ns <= rec.time_max_ns
    assert rec.ops == count_ops("gtp", "grid", BenchSetting("mimo", 2, 3), seed=7)
    assert rec.expressivity == 3 + 3 + 5 - 2
    assert rec.ops_per_expr == rec.ops / rec.expressivity
    with pytest.raises(ValueError):
        time_tpo("gtp", "grid", BenchSetting("mimo", 2), repeats=4)


def test_empty_sweep_is_header_only():
    buf = io.StringIO()
    assert sweep(SweepConfig(kinds=()), buf) == []
    assert buf.getvalue() == ",".join(CSV_HEADER) + "\n"


def test_sweep_csv_and_determinism(tmp_path):
    config = SweepConfig(kinds=("cgtp", "mtp"), mode="mimo", Ls=(1, 2), batch=2)
    path = tmp_path / "out.csv"
    records = sweep(config, path)
    text = path.read_text()
    lines = text.splitlines()
    assert lines[0] == ",".join(CSV_HEADER) and "\r" not in text
    assert len(lines) == 1 + 4 * 2
    again = sweep(config)
    assert [r.ops for r in records] == [r.ops for r in again]
    assert records_to_csv(records).splitlines()[0] == lines[0]


def test_sweep_skips_unsupported_mode():
    records = sweep(SweepConfig(kinds=("mtp", "cgtp"), impls=("sparse",), mode="siso", Ls=(2,)))
    assert [(r.kind, r.impl) for r in records] == [("cgtp", "sparse")]


def test_write_error_names_path(tmp_path):
    bad = tmp_path / "missing" / "out.csv"
    with pytest.raises(OSError, match="missing"):
        bench.write_csv([], bad)


def test_float_columns_round_trip():
    rec = bench.BenchRecord("cgtp", "naive", "mimo", 4, 1, 10, 7, 5, 9, 3)
    row = rec.row()
    assert float(row[-2]) == 10 / 3 and float(row[-1]) == 7 / 3
