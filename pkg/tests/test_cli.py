import json
import math
from pathlib import Path

import numpy as np
import pytest

from pdext.cli import run
from pdext.config import load_config
from pdext.errors import ConfigError, NonUniformGrid, OutOfDomain
from pdext.io import (
    read_kernel_csv,
    read_measure_csv,
    read_paths_csv,
    write_kernel_csv,
    write_measure_csv,
    write_paths_csv,
)
from pdext.kernel import DomainSet, hermitian_symmetry_check
from pdext.measure import DiscreteMeasure, cauchy_density

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def _report(tmp_path, argv, name="r.json"):
    path = tmp_path / name
    code = run([*argv, "--report", str(path)])
    return code, json.loads(path.read_text()) if path.exists() else None


def test_check_ou(tmp_path):
    code, rep = _report(tmp_path, ["check", "--config", str(CONFIGS / "ou.json")])
    assert code == 0 and rep["status"] == "pass"
    assert rep["result"]["checks"]["pd"]["min_eigenvalue"] > 0


def test_zero_pad_exit_one(tmp_path):
    out = tmp_path / "cand.csv"
    code, rep = _report(tmp_path, ["extend", "--method", "zero-pad", "--config",
                                   str(CONFIGS / "expneg.json"), "--out", str(out)])
    assert code == 1 and rep["result"]["verdict"] == "fail"
    assert rep["result"]["min_eig"] < 0 and rep["result"]["witness_points"]
    assert out.read_text().splitlines()[0] == "t,re,im"


def test_polya_extend(tmp_path):
    code, rep = _report(tmp_path, ["extend", "--config", str(CONFIGS / "expneg.json")])
    assert code == 0 and rep["result"]["validity"]["passed"]
    assert rep["result"]["tangent_zero"] == pytest.approx(2.0)


def test_missing_and_bad_configs(tmp_path, capsys):
    assert run(["check", "--config", str(tmp_path / "nope.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"kernel": {"type": "exponential"},\n "domain": }')
    assert run(["check", "--config", str(bad)]) == 2
    assert "line 2" in capsys.readouterr().err
    bad.write_text('{"kernel": {"type": "exponential"}, "bogus": 1}')
    assert run(["check", "--config", str(bad)]) == 2
    assert "bogus" in capsys.readouterr().err
    bad.write_text('{"kernel": {"type": "nosuch"}}')
    assert run(["check", "--config", str(bad)]) == 2
    assert run(["check"]) == 2


def test_spectral_command(tmp_path):
    code, rep = _report(tmp_path, ["spectral", "--omega", "0,1;2,3", "--lambda-pattern", "quarter",
                                   "--range", "5"])
    assert code == 0
    assert rep["result"]["max_offdiag"] <= 1e-12
    assert set(rep["result"]["parseval_defects"]) == {"bump", "exponential"}
    code, rep = _report(tmp_path, ["spectral", "--omega", "0,1;3,5", "--lambda-pattern", "half"])
    assert code == 1 and rep["result"]["max_offdiag"] >= 0.1
    assert run(["spectral", "--omega", "0,1;2"]) == 2


def test_unique_and_bochner(tmp_path):
    code, rep = _report(tmp_path, ["unique", "--config", str(CONFIGS / "expneg.json")])
    assert code == 0 and rep["result"]["verdict"] == "NonUnique" and rep["result"]["def_dim"] == 2
    code, rep = _report(tmp_path, ["bochner", "--config", str(CONFIGS / "expneg.json")])
    assert code == 0 and rep["result"]["restriction_residual"] < 1e-3


def test_gp_reports_identical_across_threads(tmp_path):
    argv = ["gp", "--config", str(CONFIGS / "ou.json"), "--paths", "3000"]
    run([*argv, "--threads", "1", "--report", str(tmp_path / "a.json"), "--out", str(tmp_path / "a.csv")])
    run([*argv, "--threads", "4", "--report", str(tmp_path / "b.json"), "--out", str(tmp_path / "b.csv")])
    run([*argv, "--threads", "1", "--report", str(tmp_path / "c.json")])
    a = (tmp_path / "a.json").read_bytes()
    assert a == (tmp_path / "b.json").read_bytes() == (tmp_path / "c.json").read_bytes()
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    paths = read_paths_csv(tmp_path / "a.csv")
    assert paths.n_paths == 3000


def test_global_options_before_subcommand(tmp_path):
    code, rep = _report(tmp_path, ["--seed", "5", "check", "--config", str(CONFIGS / "ou.json")])
    assert code == 0 and rep["config"]["seed"] == 5


def test_load_config_error_paths(tmp_path):
    p = tmp_path / "c.json"
    p.write_text('{"points": {"uniform": -1}}')
    with pytest.raises(ConfigError, match="points.uniform"):
        load_config(p)


def test_kernel_csv_roundtrip(tmp_path, unit):
    z = np.linspace(-1, 1, 101)
    write_kernel_csv(tmp_path / "k.csv", z, np.exp(-np.abs(z)))
    F = read_kernel_csv(tmp_path / "k.csv", unit)
    assert hermitian_symmetry_check(F, np.linspace(-0.99, 0.99, 51)).defect <= 1e-12
    rows = (tmp_path / "k.csv").read_text().splitlines()
    rng = np.random.default_rng(0)
    body = rows[1:]
    rng.shuffle(body)
    (tmp_path / "s.csv").write_text("\n".join([rows[0], *body]) + "\n")
    G = read_kernel_csv(tmp_path / "s.csv", unit)
    x = np.linspace(-0.9, 0.9, 7)
    assert np.array_equal(F(x), G(x))


def test_kernel_csv_errors(tmp_path, unit):
    (tmp_path / "n.csv").write_text("z,re,im\n-1,0.3,0\n0,1,0\n0.4,0.6,0\n1,0.3,0\n")
    with pytest.raises(NonUniformGrid):
        read_kernel_csv(tmp_path / "n.csv", unit)
    z = np.linspace(-2, 2, 5)
    write_kernel_csv(tmp_path / "w.csv", z, np.exp(-np.abs(z)))
    with pytest.raises(OutOfDomain):
        read_kernel_csv(tmp_path / "w.csv", unit)


def test_measure_csv_roundtrip(tmp_path):
    mu = DiscreteMeasure([-1.0, 0.5], [0.25, 0.75])
    write_measure_csv(tmp_path / "m.csv", mu)
    back = read_measure_csv(tmp_path / "m.csv")
    assert np.array_equal(back.positions, mu.positions) and np.array_equal(back.weights, mu.weights)
    c = cauchy_density(radius=10.0, step=0.5)
    write_measure_csv(tmp_path / "c.csv", c)
    back = read_measure_csv(tmp_path / "c.csv")
    assert np.array_equal(back.values, c.values)


def test_scatter_command_with_csv_measures(tmp_path):
    from pdext.extend import polya_extension
    from pdext.kernel import builtin_kernel
    F = builtin_kernel("exponential", DomainSet.interval(0, 1))
    write_measure_csv(tmp_path / "nu.csv", polya_extension(F, n_nodes=8192).backing_measure)
    write_measure_csv(tmp_path / "mu.csv", cauchy_density())
    code, rep = _report(tmp_path, ["scatter", "--config", str(CONFIGS / "expneg.json"),
                                   "--mu", str(tmp_path / "mu.csv"), "--nu", str(tmp_path / "nu.csv"),
                                   "--anchors", "8"])
    assert code == 0 and len(rep["result"]["defects"]) == 3
    assert rep["result"]["anchors"] == 8
    assert all(math.isfinite(d) for d in rep["result"]["defects"])
