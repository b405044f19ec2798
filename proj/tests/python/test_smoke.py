import math

import numpy as np
import pytest

import kdvlab


@pytest.fixture(scope="module")
def data():
    return kdvlab.InitialData.neg_sech_squared()


def test_breakup_point(data):
    bp = kdvlab.breakup_point(data)
    assert bp.t_c == pytest.approx(math.sqrt(3) / 8, abs=1e-12)
    assert bp.u_c == pytest.approx(-2 / 3, abs=1e-12)
    assert bp.x_c == pytest.approx(-math.acosh(math.sqrt(1.5)) - math.sqrt(3) / 2, abs=1e-10)


def test_hopf_is_initial_data_at_time_zero(data):
    x = np.linspace(-3, 3, 13)
    assert np.allclose(kdvlab.hopf_evaluate(data, x, 0.0), -1 / np.cosh(x) ** 2, atol=1e-12)


def test_kdv_soliton_and_conservation():
    eps, c = 0.1, 1.0
    x0 = -3.0
    xs = np.linspace(-20, 20, 4001)
    prof = kdvlab.InitialData.from_table(xs, 0.5 * c / np.cosh((xs - x0) / (2 * eps)) ** 2)
    out = kdvlab.kdv_solve(prof, epsilon=eps, t_end=0.2, points=4096)
    x, u = out["x"], out["u"][-1]
    exact = 0.5 * c / np.cosh((x - x0 - c * 0.2) / (2 * eps)) ** 2
    assert np.max(np.abs(u - exact)) < 1e-4
    assert out["mass_drift"] < 1e-10


def test_ch_conserves(data):
    out = kdvlab.ch_solve(data, epsilon=0.1, t_end=0.1, points=4096)
    assert out["mass_drift"] < 1e-8
    assert out["energy_drift"] < 1e-8


def test_under_resolved_grid_is_refused(data):
    with pytest.raises(kdvlab.Error):
        kdvlab.kdv_solve(data, epsilon=0.01, t_end=0.1, points=1024)


def test_pi2_and_tail():
    sol = kdvlab.pi2_solve(0.0)
    assert sol["residual"] < 1e-3
    assert sol["U"][0] == pytest.approx(-np.cbrt(sol["X"][0]), rel=1e-2)
    a = kdvlab.laurent_coefficients(0.5)
    assert a[1] == pytest.approx(1.0)


def test_multiscale_at_breakup(data):
    bp = kdvlab.breakup_point(data)
    u = kdvlab.multiscale_u(bp, "kdv", 0.01, np.array([bp.x_c]), bp.t_c)
    assert u[0] == pytest.approx(bp.u_c + (0.01 / bp.k) ** (2 / 7) * -0.2747283752, abs=1e-6)


def test_whitham_edges(data):
    bp = kdvlab.breakup_point(data)
    assert kdvlab.whitham_edges(data, bp.t_c - 0.01) is None
    left, right = kdvlab.whitham_edges(data, 0.23)
    assert left < right


def test_domain_errors(data):
    with pytest.raises(kdvlab.DomainError):
        kdvlab.InitialData.neg_sech_squared(-1.0)
