"""Smoke tests for the Python extension and the command-line tool."""

import json
import math
import os
import subprocess

import numpy as np
import pytest

import klmmse


def test_toeplitz_cov():
    cov = klmmse.toeplitz_exp_cov(10, 0.9)
    assert cov.shape == (10, 10)
    assert np.trace(cov) == pytest.approx(10.0)
    assert cov[0, 1] == pytest.approx(math.exp(-0.9))


def test_scalar_mmse():
    one = np.eye(1)
    assert klmmse.mmse_gaussian(one, one) == pytest.approx(0.5)


def test_channel_operators_sum_to_identity():
    sx = klmmse.toeplitz_exp_cov(5, 0.7)
    sn = 0.5 * np.eye(5)
    w_x, w_n, d_x, d_n = klmmse.channel_operators(sx, sn)
    assert np.allclose(w_x + w_n, np.eye(5), atol=1e-10)
    assert np.trace(d_x) >= 0 and np.trace(d_n) >= 0


def test_bounds_straddle_nominal():
    s0 = klmmse.toeplitz_exp_cov(10, 0.9)
    sn = np.eye(10)
    nominal = klmmse.mmse_gaussian(s0, sn)
    lower, upper = klmmse.mmse_bounds(np.zeros(10), s0, sn, 2.0)
    assert lower < nominal < upper


def test_solver_matches_white_closed_form():
    k = 3
    s0, sn, eps = np.eye(k), 2.0 * np.eye(k), 0.5
    s_inf, s_sup = klmmse.white_variances(k, 1.0, 2.0, eps)
    sol = klmmse.solve_saddle(np.zeros(k), s0, sn, eps, "sup")
    assert np.allclose(sol.sigma_x, s_sup * np.eye(k), rtol=1e-8)
    assert sol.kl_achieved == pytest.approx(eps, abs=1e-9)
    assert sol.branch == "sup"
    sol_inf = klmmse.solve_saddle(np.zeros(k), s0, sn, eps, "inf")
    assert np.allclose(sol_inf.sigma_x, s_inf * np.eye(k), rtol=1e-8)


def test_nonconvergence_raises():
    s0 = klmmse.toeplitz_exp_cov(4, 0.9)
    with pytest.raises(RuntimeError):
        klmmse.solve_saddle(np.zeros(4), s0, np.eye(4), 2.0, "sup",
                            max_outer_iters=1, max_inner_iters=1)


def test_lambert_w_residuals():
    for branch, x in [(0, 1.0), (0, -0.2), (-1, -0.2), (-1, -1e-6)]:
        w = klmmse.lambert_w(branch, x)
        assert abs(w * math.exp(w) - x) < 1e-12


def test_gg_gaussian_case_collapses():
    gamma = 10 ** 0.5
    a = klmmse.gg_from_power(2.0, 1.0)
    lo, hi = klmmse.gg_kl_mmse_bounds(a, 2.0, gamma)
    crb = klmmse.bayesian_crb(a, 2.0, gamma)
    assert lo == pytest.approx(1.0 / (gamma + 1.0), abs=1e-10)
    assert hi == pytest.approx(lo, abs=1e-12)
    assert crb == pytest.approx(lo, abs=1e-10)
    assert klmmse.gg_kl_to_gaussian(2.0) == 0.0


def test_mc_mse_deterministic_and_close_to_analytic():
    s0 = np.eye(2)
    gain, anchor = klmmse.mmse_estimator(np.zeros(2), s0, s0)
    a = klmmse.mc_mse(gain, anchor, np.zeros(2), s0, s0, 100000, 7)
    b = klmmse.mc_mse(gain, anchor, np.zeros(2), s0, s0, 100000, 7)
    assert a.mean == b.mean and a.std_error == b.std_error
    analytic = klmmse.mse_linear_under_gaussian(gain, anchor, np.zeros(2), s0, s0)
    assert abs(a.mean - analytic) < 4 * a.std_error


def _cli():
    path = os.environ.get("KLMMSE_CLI")
    if not path or not os.path.exists(path):
        pytest.skip("KLMMSE_CLI not set")
    return path


def test_cli_bounds_roundtrip(tmp_path):
    cfg = {
        "sigma_0": {"toeplitz": {"dim": 6, "rate": 0.9}},
        "sigma_n": {"white": {"dim": 6, "variance": 1.0}},
        "epsilon": 1.0,
    }
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    out = subprocess.run([_cli(), "bounds", "--config", str(cfg_path)],
                         capture_output=True, text=True)
    assert out.returncode == 0, out.stderr
    payload = json.loads(out.stdout)
    assert payload["lower"] <= payload["nominal"] <= payload["upper"]
    assert abs(payload["residuals"]["sup"]["kl_achieved"] - 1.0) < 1e-8
    sigma_sup = np.array(payload["sigma_x_sup"]["rows"])
    assert sigma_sup.shape == (6, 6)


def test_cli_exit_code_on_bad_config(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{ not json")
    out = subprocess.run([_cli(), "bounds", "--config", str(bad)], capture_output=True)
    assert out.returncode == 2
    missing = tmp_path / "missing.json"
    missing.write_text(json.dumps({"epsilon": 1.0}))
    out = subprocess.run([_cli(), "bounds", "--config", str(missing)], capture_output=True)
    assert out.returncode == 2


def test_cli_exit_code_on_nonconvergence(tmp_path):
    cfg = {
        "sigma_0": {"toeplitz": {"dim": 6, "rate": 0.9}},
        "sigma_n": {"white": {"dim": 6, "variance": 1.0}},
        "epsilon": 2.0,
        "solver": {"max_outer_iters": 1, "max_inner_iters": 1},
    }
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    out = subprocess.run([_cli(), "bounds", "--config", str(cfg_path)],
                         capture_output=True, text=True)
    assert out.returncode == 3
    assert "solver" in out.stderr


def test_cli_sweep_csv(tmp_path):
    cfg = {
        "sigma_0": {"toeplitz": {"dim": 4, "rate": 0.9}},
        "epsilon": 1.0,
        "snr_db": {"values": [-3.0, 0.0, 3.0]},
    }
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    out_path = tmp_path / "rows.csv"
    res = subprocess.run(
        [_cli(), "sweep-snr", "--config", str(cfg_path), "--out", str(out_path), "--threads", "2"],
        capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    lines = out_path.read_text().splitlines()
    assert lines[0] == "snr_db,mse_f0_nominal,mse_f0_lfd,mse_fstar_nominal,mse_fstar_lfd"
    assert len(lines) == 4
    for line in lines[1:]:
        x, f0n, f0l, fsn, fsl = map(float, line.split(","))
        assert fsl <= f0l + 1e-10
        assert f0n <= fsn + 1e-10


def test_cli_validate_default_white_instance():
    res = subprocess.run([_cli(), "validate"], capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    payload = json.loads(res.stdout)
    assert payload["violations"] == 0
    assert payload["trials"] == 50
    assert payload["lower"] <= payload["nominal"] <= payload["upper"]


def test_cli_bounds_degenerate_ball(tmp_path):
    cfg = {
        "sigma_0": {"toeplitz": {"dim": 4, "rate": 0.9}},
        "sigma_n": {"white": {"dim": 4, "variance": 2.0}},
        "epsilon": 0.0,
    }
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    out = subprocess.run([_cli(), "bounds", "--config", str(cfg_path)],
                         capture_output=True, text=True)
    assert out.returncode == 0, out.stderr
    payload = json.loads(out.stdout)
    assert payload["lower"] == pytest.approx(payload["nominal"], abs=1e-12)
    assert payload["upper"] == pytest.approx(payload["nominal"], abs=1e-12)


def test_cli_validate_is_deterministic_and_tolerates_tiny_samples(tmp_path):
    cfg = {
        "sigma_0": {"white": {"dim": 2, "variance": 1.0}},
        "epsilon": 0.3,
        "seed": 11,
        "samples": 10,
        "trials": 3,
    }
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    first = subprocess.run([_cli(), "validate", "--config", str(cfg_path)],
                           capture_output=True, text=True)
    second = subprocess.run([_cli(), "validate", "--config", str(cfg_path)],
                            capture_output=True, text=True)
    assert first.stdout == second.stdout
    payload = json.loads(first.stdout)
    assert payload["trials"] == 3
    assert all(r["std_error"] > 0 for r in payload["analytic_vs_mc"])


def test_cli_gg_bounds_json():
    res = subprocess.run([_cli(), "gg-bounds", "--format", "json"],
                         capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    rows = json.loads(res.stdout)
    assert len(rows) == 60
    below = [r for r in rows if r["p"] <= 0.5]
    assert below and all(r["crb"] == 0.0 and r["kl_lower"] > 0.0 for r in below)
