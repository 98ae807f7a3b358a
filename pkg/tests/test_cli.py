import json
import subprocess
import sys

import numpy as np
import pytest

from levysobolev import cli
from levysobolev.errors import ConfigError, IoError


def run_cli(*args):
    return subprocess.run([sys.executable, "-m", "levysobolev.cli", *args],
                          capture_output=True, text=True)


@pytest.fixture()
def cgmy_cfg(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({
        "process.family": "cgmy",
        "process.C": 1.0, "process.G": 5.0, "process.M": 5.0, "process.Y": 1.5,
    }))
    return str(path)


def test_index_task(cgmy_cfg, tmp_path):
    out = tmp_path / "out"
    res = run_cli("index", "--config", cgmy_cfg, "--out", str(out))
    assert res.returncode == 0, res.stderr
    doc = json.loads((out / "index.json").read_text())
    assert doc["result"]["sobolev_index"] == pytest.approx(1.5, abs=0.05)
    assert doc["result"]["beta"] == pytest.approx(1.5, abs=0.05)
    assert doc["result"]["verdicts"]["beta_ge_gamma"]["passed"]
    # one summary line per stage on stderr
    assert sum("index fit done" in line for line in res.stderr.splitlines()) == 1
    # plot CSV has the log-log columns
    lines = (out / "index.csv").read_text().splitlines()
    header = [ln for ln in lines if not ln.startswith("#")][0]
    assert header == "log_xi,log_abs_a,log_re_a"


def test_index_csv_slope_is_one_for_cauchy(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"process.family": "cauchy", "process.c": 1.0}))
    out = tmp_path / "out"
    res = run_cli("index", "--config", str(cfg), "--out", str(out))
    assert res.returncode == 0
    rows = [ln.split(",") for ln in (out / "index.csv").read_text().splitlines()
            if not ln.startswith("#")][1:]
    data = np.array(rows, dtype=float)
    s_abs = np.polyfit(data[:, 0], data[:, 1], 1)[0]
    s_re = np.polyfit(data[:, 0], data[:, 2], 1)[0]
    assert s_abs == pytest.approx(1.0, abs=0.01)
    assert s_re == pytest.approx(1.0, abs=0.01)


def test_config_error_exit_2(cgmy_cfg, tmp_path):
    res = run_cli("index", "--config", cgmy_cfg, "--set", "process.Y=2.5",
                  "--out", str(tmp_path / "o"))
    assert res.returncode == 2
    assert "Y < 2" in res.stderr


def test_missing_family_exit_2(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text("{}")
    res = run_cli("index", "--config", str(cfg), "--out", str(tmp_path / "o"))
    assert res.returncode == 2


def test_numerical_failure_exit_1(tmp_path):
    # VG has no Sobolev index: the inequalities task cannot pick alpha
    cfg = tmp_path / "vg.json"
    cfg.write_text(json.dumps({
        "process.family": "cgmy", "process.C": 1.0, "process.G": 5.0,
        "process.M": 5.0, "process.Y": 0.0,
    }))
    res = run_cli("inequalities", "--config", str(cfg), "--out", str(tmp_path / "o"))
    assert res.returncode == 1
    assert "no Sobolev index" in res.stderr


def test_determinism_byte_identical(cgmy_cfg, tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert run_cli("index", "--config", cgmy_cfg, "--out", str(out1)).returncode == 0
    assert run_cli("index", "--config", cgmy_cfg, "--out", str(out2)).returncode == 0
    assert (out1 / "index.json").read_bytes() == (out2 / "index.json").read_bytes()
    assert (out1 / "index.csv").read_bytes() == (out2 / "index.csv").read_bytes()


def test_inequalities_task(cgmy_cfg, tmp_path):
    out = tmp_path / "out"
    res = run_cli("inequalities", "--config", cgmy_cfg, "--out", str(out),
                  "--seed", "3", "--set", "ineq.trials=50", "--set", "freq.N=256")
    assert res.returncode == 0, res.stderr
    doc = json.loads((out / "inequalities.json").read_text())
    assert doc["result"]["passed"]
    assert doc["result"]["seed"] == 3
    assert doc["result"]["garding_c2"] > 0


def test_price_task_gaussian(tmp_path):
    cfg = tmp_path / "b.json"
    cfg.write_text(json.dumps({
        "process.family": "brownian", "process.sigma": 1.0, "process.b": 0.0,
        "price.x_points": "0.0,1.0", "price.tau": 1.0, "freq.N": 16384,
    }))
    out = tmp_path / "out"
    res = run_cli("price", "--config", str(cfg), "--out", str(out))
    assert res.returncode == 0, res.stderr
    doc = json.loads((out / "price.json").read_text())
    # Gaussian payoff width 1 against heat flow: e^{-x^2/4}/sqrt(2)
    assert doc["result"]["value"][0] == pytest.approx(1 / np.sqrt(2), abs=1e-8)
    assert doc["result"]["value"][1] == pytest.approx(np.exp(-0.25) / np.sqrt(2), abs=1e-8)


def test_density_task_cauchy(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({
        "process.family": "cauchy", "process.c": 1.0,
        "density.x_points": "0.0", "freq.N": 16384, "freq.Xi": 24.0,
    }))
    out = tmp_path / "out"
    res = run_cli("density", "--config", str(cfg), "--out", str(out))
    assert res.returncode == 0, res.stderr
    doc = json.loads((out / "density.json").read_text())
    assert doc["result"]["value"][0] == pytest.approx(1 / np.pi, abs=1e-6)
    assert doc["result"]["mass"] == pytest.approx(1.0, abs=1e-4)
    lines = (out / "density.csv").read_text().splitlines()
    assert any(ln.startswith("# freq.Xi=") for ln in lines)  # defaults echoed


def test_evolve_task(tmp_path):
    cfg = tmp_path / "e.json"
    cfg.write_text(json.dumps({
        "process.family": "cgmy",
        "process.C": 1.0, "process.G": 5.0, "process.M": 5.0, "process.Y": 1.5,
        "evolve.T": 0.5, "evolve.K": 4, "evolve.scheme": "crank_nicolson",
        "freq.N": 64, "freq.Xi": 16.0,
    }))
    out = tmp_path / "out"
    res = run_cli("evolve", "--config", str(cfg), "--out", str(out))
    assert res.returncode == 0, res.stderr
    doc = json.loads((out / "evolve.json").read_text())
    assert len(doc["result"]["times"]) == 5
    l2 = doc["result"]["l2_norms"]
    assert all(b <= a + 1e-12 for a, b in zip(l2, l2[1:]))


def test_symbol_eval_task(tmp_path):
    cfg = tmp_path / "s.json"
    cfg.write_text(json.dumps({"process.family": "cauchy", "process.c": 2.0,
                               "eval.u_count": 8}))
    out = tmp_path / "out"
    res = run_cli("symbol-eval", "--config", str(cfg), "--out", str(out))
    assert res.returncode == 0, res.stderr
    doc = json.loads((out / "symbol-eval.json").read_text())
    us = doc["result"]["u"]
    res_a = doc["result"]["re_a"]
    k = us.index(0.0)
    assert res_a[k] == 0.0
    assert res_a[-1] == pytest.approx(2.0 * us[-1], rel=1e-12)


def test_catalog_task(tmp_path):
    out = tmp_path / "out"
    res = run_cli("catalog", "--out", str(out))
    assert res.returncode == 0
    doc = json.loads((out / "catalog.json").read_text())
    table = {(row["family"], row["condition"]): row["sobolev_index"]
             for row in doc["result"]["catalog"]}
    assert table[("brownian", "positive definite sigma")] == "2"
    assert table[("gh", "expansion C1/x^2 + C2/|x| + C3/x")] == "1"
    assert table[("cgmy", "0 < Y < 2")] == "Y"
    assert table[("vg", "CGMY with Y = 0")] == "none"


def test_gh_family_via_density_route(tmp_path):
    cfg = tmp_path / "gh.json"
    cfg.write_text(json.dumps({
        "process.family": "gh", "process.C1": 0.5, "process.C2": 0.1,
        "process.C3": 0.05, "process.damping": 1.0,
        "grid.r_max": 1e5, "grid.points_per_decade": 8,
    }))
    out = tmp_path / "out"
    res = run_cli("index", "--config", str(cfg), "--out", str(out))
    assert res.returncode == 0, res.stderr
    doc = json.loads((out / "index.json").read_text())
    assert doc["result"]["sobolev_index"] == pytest.approx(1.0, abs=0.05)


def test_tabulated_density_route(tmp_path):
    xs = np.concatenate([-np.geomspace(1e-7, 20, 60)[::-1],
                         np.geomspace(1e-7, 20, 60)])
    fs = np.exp(-2 * np.abs(xs)) / np.abs(xs) ** 2.2
    table = tmp_path / "dens.csv"
    np.savetxt(table, np.column_stack([xs, fs]), delimiter=",")
    cfg = tmp_path / "t.json"
    cfg.write_text(json.dumps({
        "process.family": "tabulated", "process.path": str(table),
        "grid.r_max": 1e4, "grid.points_per_decade": 8,
    }))
    out = tmp_path / "out"
    res = run_cli("index", "--config", str(cfg), "--out", str(out))
    assert res.returncode == 0, res.stderr
    doc = json.loads((out / "index.json").read_text())
    assert doc["result"]["sobolev_index"] == pytest.approx(1.2, abs=0.1)


def test_emit_plot_data_refuses_empty(tmp_path):
    with pytest.raises(IoError, match="empty result"):
        cli.emit_plot_data([], ["a"], {}, str(tmp_path / "x.csv"))
    assert not (tmp_path / "x.csv").exists()


def test_load_config_rejects_non_object(tmp_path):
    p = tmp_path / "arr.json"
    p.write_text("[1,2]")
    with pytest.raises(ConfigError):
        cli.load_config(str(p))


def test_overrides_parse_json_scalars():
    cfg = cli.apply_overrides({}, ["a=1.5", "b=true", "c=text"])
    assert cfg == {"a": 1.5, "b": True, "c": "text"}


def test_report_round_trip_through_json(cgmy_cfg, tmp_path):
    out = tmp_path / "out"
    run_cli("index", "--config", cgmy_cfg, "--out", str(out))
    from levysobolev.indices import IndexReport
    doc = json.loads((out / "index.json").read_text())
    rec = {k: v for k, v in doc["result"].items() if k != "family"}
    rep = IndexReport.from_record(rec)
    assert rep.to_record() == rec
