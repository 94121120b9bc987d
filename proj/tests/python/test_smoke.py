import math
import os
import subprocess

import numpy as np
import pytest

import tcfou


def test_spec_round_trip():
    spec = tcfou.BernsteinSpec.parse("tempered:0.6:1")
    assert spec.alpha == 0.6 and spec.mu == 1.0
    assert tcfou.BernsteinSpec.parse(spec.token()) == spec
    with pytest.raises(tcfou.ContractError):
        tcfou.BernsteinSpec.parse("stable:1.5")


def test_phi_and_inverse():
    assert tcfou.phi("stable:0.5", 4.0) == pytest.approx(2.0, rel=1e-14)
    lam = tcfou.phi_inverse("tempered:0.6:1", 0.7)
    assert tcfou.phi("tempered:0.6:1", lam) == pytest.approx(0.7, rel=1e-12)


def test_half_stable_density_closed_form():
    x = np.array([0.25, 1.0, 4.0])
    exact = x**-1.5 * np.exp(-1.0 / (4.0 * x)) / (2.0 * math.sqrt(math.pi))
    np.testing.assert_allclose(tcfou.stable_density(0.5, x), exact, rtol=1e-10)
    s = np.array([0.3, 1.0, 2.0])
    f = tcfou.inverse_stable_density(0.5, s, 1.0)
    np.testing.assert_allclose(f, np.exp(-(s**2) / 4.0) / math.sqrt(math.pi), rtol=1e-10)


def test_variance_limits():
    h, theta = 0.75, 1.0
    v = tcfou.variance(h, theta, np.array([1e-3, 1.0, 60.0]))
    assert v[0] == pytest.approx(1e-3**1.5, rel=1e-2)
    assert v[2] == pytest.approx(tcfou.stationary_variance(h, theta), rel=1e-6)
    assert np.all(tcfou.variance_prime(h, theta, np.array([0.5, 2.0])) > 0)


def test_sampler_shapes_and_reproducibility():
    grid = tcfou.uniform_grid(1.0, 16)
    a = tcfou.sample_tcfou(0.75, 1.0, "stable:0.5", grid, 8, seed=7)
    b = tcfou.sample_tcfou(0.75, 1.0, "stable:0.5", grid, 8, seed=7)
    assert a["paths"].shape == (8, 17)
    np.testing.assert_array_equal(a["paths"], b["paths"])
    e = tcfou.sample_inverse_subordinator("stable:0.5", grid, 32, seed=1)
    assert np.all(np.diff(e["paths"], axis=1) >= 0)


def test_subordinate_constant_is_preserved():
    grid = np.linspace(0.0, 5.0, 51)
    out = tcfou.subordinate(grid, np.full_like(grid, 2.0), "stable:0.5", np.array([0.5, 3.0]))
    np.testing.assert_allclose(out, 2.0, atol=1e-8)


def test_caputo_of_linear_function():
    grid = np.linspace(0.0, 2.0, 201)
    t = np.array([1.0])
    d = tcfou.caputo(grid, grid, np.ones_like(grid), "stable:0.5", t)
    assert d[0] == pytest.approx(1.0 / math.gamma(1.5), rel=1e-10)


def test_fp_solver_matches_gaussian_oracle():
    x = np.linspace(-4.0, 4.0, 161)
    t = np.linspace(0.0, 1.0, 161)
    v0 = 0.25
    field = tcfou.solve_fp(0.75, 1.0, lambda y: math.exp(-y * y / (2 * v0)) / math.sqrt(2 * math.pi * v0), x, t)
    assert field.shape == (161, 161)
    exact = tcfou.gaussian_fp_oracle(v0, 0.75, 1.0, x, 1.0)
    assert np.max(np.abs(field[-1] - exact)) < 1e-3


def test_run_cli_moments():
    code, text = tcfou.run_cli(["moments", "--hurst", "0.75", "--times", "1", "--out", "-"])
    assert code == 0
    assert "# command = moments" in text


def test_executable_help():
    exe = os.environ.get("TCFOU_EXE")
    if not exe:
        pytest.skip("TCFOU_EXE not set")
    assert subprocess.run([exe, "--help"], capture_output=True).returncode == 0
