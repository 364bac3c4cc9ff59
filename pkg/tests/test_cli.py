import json
import subprocess
import sys

import numpy as np
import pytest

from zerosurf import objio
from zerosurf.cli import main
from zerosurf.config import load_config, loads_config, read_density_csv
from zerosurf.errors import ConfigError
from zerosurf.surface import seed_torus

MINIMAL = """
[u]
type = builtin
family = sphere

[v]
expression = x1
"""


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def read_report(path):
    return json.loads(path.read_text())


def test_config_defaults():
    cfg = loads_config(MINIMAL)
    assert cfg.u.type == "builtin" and cfg.v.type == "expression"
    assert cfg.epsilon == 0.0 and cfg.oracle and cfg.threads == 1
    assert cfg.seed["type"] == "sphere" and cfg.seed["subdivisions"] == 3


def test_config_shipped_files(configs_dir):
    for path in sorted(configs_dir.glob("*.ini")):
        cfg = load_config(path)
        assert cfg.epsilon >= 0
    assert load_config(configs_dir / "sphere.ini").bounds["delta_cap"] is None


@pytest.mark.parametrize(
    "text",
    [
        "[u]\nfamily = sphere\n",  # missing [v]
        MINIMAL + "[run]\nepsilon = -1\n",
        MINIMAL + "[run]\nepsilon = abc\n",
        MINIMAL + "[run]\nspeed = 3\n",
        MINIMAL + "[extra]\na = 1\n",
        MINIMAL + "[seed]\ntype = cube\n",
        MINIMAL + "[solver]\nmax_iter = 2.5\n",
        MINIMAL + "[bounds]\ndelta_cap = wide\n",
        "[u]\ntype = magic\n[v]\nexpression = 1\n",
        "[u]\nfamily = sphere\nradius\n[v]\nexpression = 1\n",
    ],
)
def test_config_errors(text):
    with pytest.raises(ConfigError):
        loads_config(text)


def test_density_csv(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("index,re,im\n0,1,0\n1,0.5,-0.5\n2,2\n")
    np.testing.assert_array_equal(read_density_csv(p), [1, 0.5 - 0.5j, 2])
    p.write_text("0,1,0\n2,1,0\n")
    with pytest.raises(ConfigError):
        read_density_csv(p)


def test_perturb_sphere(capsys, configs_dir, tmp_path):
    code, out, _ = run_cli(capsys, "perturb", str(configs_dir / "sphere.ini"), "--output", str(tmp_path))
    assert code == 0 and out.startswith("ok")
    v, f = objio.read_obj(tmp_path / "perturbed.obj")
    assert len(v) == 642 and len(f) == 1280
    np.testing.assert_allclose(np.linalg.norm(v, axis=1), np.sqrt(0.9), atol=1e-10, rtol=0)
    rep = read_report(tmp_path / "report.json")
    assert rep["status"] == "ok"
    assert rep["oracle"]["max_deviation"] <= 1e-8
    assert rep["solve"]["converged"] == 642


def test_bounds_sphere(capsys, configs_dir, tmp_path):
    code, out, _ = run_cli(capsys, "bounds", "--config", str(configs_dir / "sphere.ini"), "--output", str(tmp_path), "--json")
    assert code == 0
    b = json.loads(out)["bounds"]
    assert b["c1"] == pytest.approx(1.0, abs=1e-12)
    assert b["c2_hat"] == pytest.approx(2.0, abs=1e-12)
    assert b["delta_pre_cap"] == pytest.approx(0.5, abs=1e-12)
    assert (tmp_path / "bounds_report.json").exists()
    assert not (tmp_path / "perturbed.obj").exists()


def test_gate_c1_zero(capsys, configs_dir, tmp_path):
    code, _, err = run_cli(capsys, "perturb", str(configs_dir / "squared_sphere.ini"), "--output", str(tmp_path))
    assert code == 2
    assert err.strip().splitlines()[-1].startswith("gate_failure cause=c1_zero")
    assert not (tmp_path / "perturbed.obj").exists()
    assert read_report(tmp_path / "report.json")["cause"] == "c1_zero"


def test_forced_remark_run(capsys, configs_dir, tmp_path):
    code, _, err = run_cli(capsys, "perturb", str(configs_dir / "squared_sphere.ini"), "--force", "--output", str(tmp_path))
    assert code == 3
    assert "cause=" in err
    rep = read_report(tmp_path / "report.json")
    assert len(rep["oracle"]["no_bracket"]) == 162
    assert rep["solve"]["status_counts"] == {"degenerate_gradient": 162}


def test_epsilon_too_large(capsys, configs_dir, tmp_path):
    code, _, err = run_cli(capsys, "perturb", str(configs_dir / "sphere.ini"), "--epsilon", "0.2", "--output", str(tmp_path))
    assert code == 2 and "cause=epsilon_too_large" in err
    code, _, _ = run_cli(capsys, "perturb", str(configs_dir / "sphere.ini"), "--epsilon", "0.2", "--force", "--output", str(tmp_path))
    assert code == 0


def test_config_error_exit(capsys, tmp_path):
    code, _, err = run_cli(capsys, "perturb", str(tmp_path / "missing.ini"))
    assert code == 4 and err.startswith("error cause=config")
    bad = tmp_path / "bad.ini"
    bad.write_text(MINIMAL + "[run]\nepsilon = x\n")
    assert run_cli(capsys, "bounds", str(bad))[0] == 4


def test_epsilon_zero_reproduces_seed(capsys, configs_dir, tmp_path):
    code, _, _ = run_cli(capsys, "perturb", str(configs_dir / "torus.ini"), "--epsilon", "0", "--output", str(tmp_path))
    assert code == 0
    rep = read_report(tmp_path / "report.json")
    assert rep["solve"]["max_abs_t"] <= rep["solve"]["tol_t"]
    v, f = objio.read_obj(tmp_path / "perturbed.obj")
    seed = seed_torus(2, 0.5, 16, 8)
    np.testing.assert_allclose(v, seed.vertices, atol=rep["solve"]["tol_t"], rtol=0)
    np.testing.assert_array_equal(f, seed.triangles)


def test_oracle_torus(capsys, configs_dir, tmp_path):
    code, _, _ = run_cli(capsys, "oracle", str(configs_dir / "torus.ini"), "--output", str(tmp_path))
    assert code == 0
    rep = read_report(tmp_path / "oracle_report.json")
    assert rep["oracle"]["max_deviation"] <= 1e-8
    assert len(rep["oracle"]["table"]) == 128


def test_herglotz_check(capsys, configs_dir, tmp_path):
    code, _, _ = run_cli(capsys, "herglotz-check", str(configs_dir / "herglotz.ini"), "--output", str(tmp_path))
    assert code == 0
    checks = read_report(tmp_path / "herglotz-check_report.json")["checks"]
    assert checks["u"]["sinc_max_error"] <= 1e-10
    assert checks["u"]["helmholtz_relative_residual"] <= 1e-12
    code, _, err = run_cli(capsys, "herglotz-check", str(configs_dir / "sphere.ini"), "--output", str(tmp_path))
    assert code == 4


def test_fd_check(capsys, configs_dir, tmp_path):
    code, _, _ = run_cli(capsys, "fd-check", str(configs_dir / "expression.ini"), "--output", str(tmp_path))
    assert code == 0
    checks = read_report(tmp_path / "fd-check_report.json")["checks"]
    assert checks["v"]["min_order"] >= 1.8


def test_thread_determinism(capsys, configs_dir, tmp_path):
    reports = []
    for n in ("1", "8"):
        out = tmp_path / n
        assert run_cli(capsys, "perturb", str(configs_dir / "torus.ini"), "--threads", n, "--output", str(out))[0] == 0
        reports.append(out)
    a, b = reports
    assert (a / "perturbed.obj").read_bytes() == (b / "perturbed.obj").read_bytes()
    ra, rb = (read_report(p / "report.json") for p in reports)
    for r in (ra, rb):
        for k in ("timings", "timestamp", "outputs"):
            r.pop(k)
    assert ra == rb


def test_module_entry_point(configs_dir, tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "zerosurf.cli", "bounds", str(configs_dir / "torus.ini"), "--output", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.strip() == "ok bounds"
