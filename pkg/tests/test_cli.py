import subprocess
import sys

import numpy as np
import pytest

from greedynewton import load_libsvm, read_trace
from greedynewton.cli import EXIT_CHECK, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, main, parse_keyvalue
from greedynewton.data import write_trace


@pytest.fixture(scope="module")
def solved(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    data = d / "sc.svm"
    assert main(["generate", "--regime", "strongly-convex", "--seed", "0", "--out", str(data)]) == EXIT_OK
    trace = d / "gn.csv"
    code = main(["solve", "--method", "greedy-newton", "--data", str(data), "--reg", "1", "--max-iter", "25",
                 "--trace-out", str(trace)])
    assert code == EXIT_OK
    return d, data, trace


def test_generate_writes_libsvm(solved):
    _, data, _ = solved
    p = load_libsvm(data, dense=True)
    assert p.A.shape == (500, 20)


def test_solve_writes_trace_and_iterates(solved):
    d, _, trace = solved
    tf = read_trace(trace)
    assert tf.method == "greedy-newton" and tf.config["reg"] == "1"
    assert (d / "gn.csv.iterates.csv").exists()
    assert tf.records[-1].grad_norm <= 1e-10


@pytest.mark.parametrize("bounds", ["analytic", "estimate"])
def test_check_passes(solved, bounds, capsys):
    d, _, trace = solved
    opt = d / f"opt-{bounds}.txt"
    assert main(["check", "--trace", str(trace), "--bounds", bounds, "--optimum-out", str(opt)]) == EXIT_OK
    assert main(["check", "--trace", str(trace), "--bounds", bounds, "--optimum", str(opt)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "verdict: " + ("proven" if bounds == "analytic" else "consistent") in out
    assert "k\tlhs\trhs\tratio\tstatus\tfast_region" in out


def test_check_failure_exit_code(solved, tmp_path):
    _, _, trace = solved
    tf = read_trace(trace)
    tf.records[1].f = tf.records[0].f
    bad = tmp_path / "bad.csv"
    write_trace(bad, tf)
    assert main(["check", "--trace", str(bad), "--bounds", "analytic", "--checks", "global"]) == EXIT_CHECK


def test_usage_errors(tmp_path, capsys):
    with pytest.raises(SystemExit) as err:
        main(["solve", "--method", "bogus", "--data", "x", "--trace-out", "y"])
    assert err.value.code == EXIT_USAGE
    with pytest.raises(SystemExit) as err:
        main([])
    assert err.value.code == EXIT_USAGE
    assert main(["solve", "--method", "greedy-newton", "--data", str(tmp_path / "none.svm"),
                 "--trace-out", str(tmp_path / "t.csv")]) == EXIT_USAGE
    cfg = tmp_path / "c.cfg"
    cfg.write_text("colour = blue\n")
    assert main(["compare", "--config", str(cfg)]) == EXIT_USAGE
    assert main(["check", "--trace", str(tmp_path / "missing.csv"), "--bounds", "analytic"]) == EXIT_USAGE


def test_numerical_failure_exit_code(tmp_path):
    data = tmp_path / "inf.svm"
    data.write_text("+1 1:inf\n-1 1:1\n")
    assert main(["solve", "--method", "greedy-newton", "--data", str(data),
                 "--trace-out", str(tmp_path / "t.csv")]) == EXIT_NUMERICAL


def test_compare_and_plot(tmp_path, capsys):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text(
        "# small comparison\n[experiment]\nregimes = strongly-convex, repeated-features\nregs = 1\n"
        "methods = greedy-newton, hybrid\nmax_iter = 10\nplots = true\n"
    )
    assert main(["compare", "--config", str(cfg), "--out", str(tmp_path / "out")]) == EXIT_OK
    assert len(list((tmp_path / "out").glob("*.trace.csv"))) == 4
    assert len(list((tmp_path / "out").glob("*.svg"))) == 6
    traces = [str(p) for p in (tmp_path / "out").glob("*.trace.csv")]
    assert main(["plot", "--kind", "step", "--out", str(tmp_path / "plots"), *traces]) == EXIT_OK
    assert len(list((tmp_path / "plots").glob("*.svg"))) == 2


def test_sweep_armijo(tmp_path):
    code = main(["sweep-armijo", "--inits", "1,8", "--regimes", "strongly-convex", "--regs", "1",
                 "--out", str(tmp_path)])
    assert code == EXIT_OK
    assert len(list(tmp_path.glob("*.trace.csv"))) == 3


def test_parse_keyvalue(tmp_path):
    path = tmp_path / "k.cfg"
    path.write_text('a = 1\n\n# note\nb = "x, y"  # trailing\n')
    assert parse_keyvalue(path) == {"a": "1", "b": "x, y"}


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "greedynewton", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "sweep-armijo" in res.stdout
