import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wgqed.pipeline import make_system, resonance
from wgqed.two_channel import (FitError, TwoChannelParams, fit_pole, fit_resonance, linear_scaling,
                               lorentzian, two_channel_s)


def test_exact_points():
    s_plus = two_channel_s(0.0, TwoChannelParams(sign=1))
    s_minus = two_channel_s(0.0, TwoChannelParams(sign=-1))
    np.testing.assert_allclose(s_plus, [[0, -1], [-1, 0]], atol=1e-15)
    np.testing.assert_allclose(s_minus, np.eye(2), atol=1e-15)


@settings(max_examples=200, deadline=None)
@given(st.floats(0, np.pi), st.floats(-np.pi, np.pi), st.floats(1e-3, 10), st.floats(-50, 50), st.sampled_from([1, -1]))
def test_unitary_and_symmetric(alpha, delta2, gamma_c, dw, sign):
    s = two_channel_s(dw, TwoChannelParams(alpha, delta2, 0.0, gamma_c, sign))
    np.testing.assert_allclose(s @ s.conj().T, np.eye(2), atol=1e-14)
    np.testing.assert_allclose(s, s.T, atol=1e-15)


def test_invalid_params():
    with pytest.raises(ValueError):
        TwoChannelParams(sign=0)
    with pytest.raises(ValueError):
        TwoChannelParams(gamma_c=0.0)


def test_lorentzian_fit_recovers_parameters():
    d = np.linspace(-5, 5, 401)
    y = lorentzian(d, 0.25, 0.3, 1.2)
    p = fit_resonance(d, y)
    assert p.omega_star == pytest.approx(0.3, abs=1e-8)
    assert p.width == pytest.approx(1.2, rel=1e-8)
    assert p.gamma_c == pytest.approx(0.6, rel=1e-8)


def test_lorentzian_fit_rejects_doublet():
    d = np.linspace(-5, 5, 401)
    y = lorentzian(d, 1, -2, 0.5) + lorentzian(d, 1, 2, 0.5)
    with pytest.raises(FitError):
        fit_resonance(d, y)
    with pytest.raises(FitError):
        fit_resonance(d, np.zeros_like(d))


def test_pole_fit_on_shoulder():
    d = np.linspace(-3, 1, 301)
    r = 0.2 * np.exp(0.4j)
    y = 0.1 + 0.05j - 0.02 * d + r / (d + 1.1 + 0.5j * 0.35)
    p = fit_pole(d, y)
    assert p.omega_star == pytest.approx(-1.1, abs=1e-9)
    assert p.width == pytest.approx(0.35, rel=1e-9)
    assert p.gamma_c == pytest.approx(0.4, rel=1e-9)
    with pytest.raises(FitError):
        fit_pole(d[:3], y[:3])


def test_pole_fit_matches_exact_eigenvalue(model):
    sys_ = make_system(model, 40)
    p = resonance(sys_)
    ev = sys_.ham.eigenvalues()
    k = np.argmin(np.abs(ev - (p.omega_star - 0.5j * p.width)))
    assert abs(ev[k] - (p.omega_star - 0.5j * p.width)) < 5e-3 * p.width


def test_linear_scaling_exact_line():
    slope, intercept, r2 = linear_scaling([1, 2, 3, 4], [0.5, 0.7, 0.9, 1.1])
    assert slope == pytest.approx(0.2) and intercept == pytest.approx(0.3) and r2 == pytest.approx(1.0)
