import csv
import io
import subprocess
import sys

import pytest

from eqtp import verify
from eqtp.bench import CSV_HEADER
from eqtp.cli import EXIT_OK, EXIT_USAGE, EXIT_VERIFY, main, parse_range
from eqtp.wigner import cg_real


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_no_arguments_prints_usage(capsys):
    code, out, err = run(capsys)
    assert code == EXIT_USAGE and "usage" in err


def test_unknown_flag_is_usage_error(capsys):
    code, _, err = run(capsys, "cg-table", "--l1", "1", "--bogus")
    assert code == EXIT_USAGE and "error" in err


def test_help_lists_subcommands(capsys):
    code, out, _ = run(capsys, "--help")
    assert code == EXIT_OK
    for name in ("cg-table", "tp", "expressivity", "bench", "verify"):
        assert name in out


def test_cg_table_empty(capsys):
    code, out, _ = run(capsys, "cg-table", "--l1", "1", "--l2", "1", "--l3", "3")
    assert code == EXIT_OK and out == "m1,m2,m3,value\n"


def test_cg_table_values_round_trip(capsys):
    code, out, _ = run(capsys, "cg-table", "--l1", "2", "--l2", "2", "--l3", "2")
    rows = list(csv.DictReader(io.StringIO(out)))
    table = cg_real(2, 2, 2)
    assert len(rows) == len(table)
    for row, (m1, m2, m3, v) in zip(rows, table):
        assert (int(row["m1"]), int(row["m2"]), int(row["m3"])) == (m1, m2, m3)
        assert float(row["value"]) == v


def test_cg_table_gaunt_and_precision(capsys):
    _, out, _ = run(capsys, "cg-table", "--l1", "1", "--l2", "1", "--l3", "1", "--gaunt")
    assert out == "m1,m2,m3,value\n"
    _, out, _ = run(capsys, "cg-table", "--l1", "0", "--l2", "0", "--l3", "0", "--gaunt", "--precision-digits", "5")
    assert out.splitlines()[1] == "0,0,0,0.28209"


def test_tp_run_each_kind(capsys):
    for kind in ("cgtp", "gtp", "mtp"):
        code, out, _ = run(capsys, "tp", "run", "--kind", kind, "--L", "2", "--seed", "3")
        assert code == EXIT_OK
        rows = list(csv.DictReader(io.StringIO(out)))
        assert {r["vector"] for r in rows} == {"x", "y", "out"}
        again = run(capsys, "tp", "run", "--kind", kind, "--L", "2", "--seed", "3")[1]
        assert again == out


def test_tp_run_bad_impl(capsys):
    code, _, err = run(capsys, "tp", "run", "--kind", "gtp", "--impl", "sparse", "--L", "1")
    assert code == EXIT_USAGE and "sparse" in err
    code, _, _ = run(capsys, "tp", "run", "--kind", "gtp", "--L", "1", "--L3", "3")
    assert code == EXIT_USAGE
    code, _, _ = run(capsys, "tp")
    assert code == EXIT_USAGE


def test_expressivity_table(capsys):
    code, out, _ = run(capsys, "expressivity", "--kind", "gtp", "--L", "1")
    assert code == EXIT_OK
    head, tail = out.split("\n\n")
    assert head.splitlines() == ["kind,L,count,rank", "gtp,1,5,5"]
    assert "1,1,1,false" in tail.splitlines() and "1,1,2,true" in tail.splitlines()


def test_bench_csv(capsys, tmp_path):
    path = tmp_path / "b.csv"
    code, out, _ = run(capsys, "bench", "--kinds", "cgtp", "--impls", "sparse", "--L", "2..3", "--batch", "2",
                       "--out", str(path))
    assert code == EXIT_OK and out == ""
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(CSV_HEADER) and len(lines) == 3


def test_bench_backend_flag(capsys):
    code, out, _ = run(capsys, "bench", "--kinds", "mtp", "--L", "1", "--backend", "numpy")
    assert code == EXIT_OK and len(out.splitlines()) == 3


def test_bench_usage_errors(capsys):
    assert run(capsys, "bench", "--kinds", "xtp")[0] == EXIT_USAGE
    assert run(capsys, "bench", "--repeats", "3")[0] == EXIT_USAGE
    assert run(capsys, "bench", "--L", "5..2")[0] == EXIT_USAGE
    assert run(capsys, "bench", "--out", "/nonexistent/dir/x.csv", "--kinds", "cgtp", "--L", "1")[0] == EXIT_USAGE


def test_verify_equivariance(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "equivariance", "--L", "3")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert len(lines) == 7
    assert all(line.endswith(",PASS") and len(line.split(",")) == 6 for line in lines)


def test_verify_selection_rules_mentions_111(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "selection-rules", "--L", "2")
    assert code == EXIT_OK and "gtp-[1,1,1]-zero" in out


def test_verify_failure_exit_code(capsys, monkeypatch):
    monkeypatch.setitem(verify.SUITES, "roundtrip", lambda L, seed=0: [verify.Check("roundtrip", "x", L, 1.0, 0.5)])
    code, out, _ = run(capsys, "verify", "--suite", "roundtrip")
    assert code == EXIT_VERIFY and out.strip().endswith("FAIL")


def test_parse_range():
    assert parse_range("4..6") == [4, 5, 6]
    assert parse_range("4,8") == [4, 8]
    assert parse_range("3") == [3]


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "eqtp", "cg-table", "--l1", "0", "--l2", "0", "--l3", "0"],
                         capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout == "m1,m2,m3,value\n0,0,0,1\n"


@pytest.mark.parametrize("argv", [["cg-table", "--l1", "-1", "--l2", "0", "--l3", "0"], ["verify", "--suite", "nope"]])
def test_bad_values(capsys, argv):
    assert run(capsys, *argv)[0] == EXIT_USAGE
