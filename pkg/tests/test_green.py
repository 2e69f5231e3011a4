import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from wgqed.green import GreenError, FiberGreen, external_green, gaussian_fit, hankel_d_perp, vacuum_coincident, vacuum_green
from wgqed.modes import displacement_profiles, _radial_nodes
from wgqed.resolvent import decay_rates

# frozen for the default fiber
WAIST = 1.8410047155407776
RAYLEIGH = 1.6946491813216897


def _curl_curl(fun, x, h=1e-3):
    # grad div - laplacian by centered differences, column by column
    eye = np.eye(3)
    out = np.zeros((3, 3), complex)
    for j in range(3):
        def col(p):
            return fun(p)[:, j]
        lap = sum(col(x + h * e) - 2 * col(x) + col(x - h * e) for e in eye) / h**2
        gd = np.zeros(3, complex)
        for i in range(3):
            for k in range(3):
                if i == k:
                    gd[i] += (col(x + h * eye[i])[i] - 2 * col(x)[i] + col(x - h * eye[i])[i]) / h**2
                else:
                    d = (col(x + h * eye[i] + h * eye[k]) - col(x + h * eye[i] - h * eye[k])
                         - col(x - h * eye[i] + h * eye[k]) + col(x - h * eye[i] - h * eye[k]))
                    gd[i] += d[k] / (4 * h * h)
        out[:, j] = gd - lap
    return out


def test_vacuum_solves_wave_equation():
    x = np.array([0.8, -1.1, 2.3])
    g = vacuum_green(x)
    residual = _curl_curl(vacuum_green, x) - g
    assert np.abs(residual).max() < 1e-4 * np.abs(g).max()


def test_vacuum_radiative_limit():
    g = vacuum_green(np.array([1e-4, 0.0, 0.0]))
    np.testing.assert_allclose(g.imag, vacuum_coincident().imag, atol=1e-8)
    with pytest.raises(GreenError):
        vacuum_green(np.zeros(3))


def test_vacuum_reciprocal():
    R = np.array([0.3, 1.2, -0.4])
    np.testing.assert_allclose(vacuum_green(R), vacuum_green(-R).T, atol=1e-15)


def test_hankel_matches_lommel_closed_form(model):
    mode = model.mode
    a = mode.spec.radius
    h, qd = mode.u / a, mode.w / a
    # D_perp is A J0(h rho) inside and B K0(qd rho) outside
    amp_in = displacement_profiles(mode, 0.5 * a)[0] / special.j0(0.5 * h * a)
    amp_out = displacement_profiles(mode, 2 * a)[0] / special.k0(2 * qd * a)
    q = np.array([0.05, 0.4, 1.0, 2.5, 7.0])
    inner = a * (h * special.j1(h * a) * special.j0(q * a) - q * special.j0(h * a) * special.j1(q * a)) / (h**2 - q**2)
    outer = a * (qd * special.j0(q * a) * special.k1(qd * a) - q * special.j1(q * a) * special.k0(qd * a)) / (q**2 + qd**2)
    exact = 2 * np.pi * (amp_in * inner + amp_out * outer)
    np.testing.assert_allclose(hankel_d_perp(mode, q), exact, rtol=1e-9, atol=1e-12)


def test_hankel_parseval_with_tail(model):
    mode = model.mode
    rho, w = _radial_nodes(mode, 64)
    d = displacement_profiles(mode, rho)[0]
    direct = 2 * np.pi * np.sum(w * rho * d**2)
    cut = 50.0
    xg, wg = np.polynomial.legendre.leggauss(4000)
    q, wq = 0.5 * cut * (xg + 1), 0.5 * cut * wg
    f2 = hankel_d_perp(mode, q) ** 2
    body = np.sum(wq * q * f2) / (2 * np.pi)
    # the surface jump gives |F|^2 q ~ c / q^2; fit c on the upper half
    upper = q > cut / 2
    c = np.sum((wq * f2 * q**3)[upper]) / np.sum(wq[upper])
    assert abs((body + c / cut / (2 * np.pi)) / direct - 1) < 1e-4


def test_gaussian_fit_frozen(model):
    fit, spectrum = gaussian_fit(model.mode)
    assert fit.waist == pytest.approx(WAIST, rel=1e-8)
    assert fit.rayleigh_range == pytest.approx(RAYLEIGH, rel=1e-8)
    assert fit.rayleigh_range == pytest.approx(fit.waist**2 / 2, rel=1e-12)
    assert spectrum.d_perp_q.shape == spectrum.q.shape


points = st.tuples(st.floats(1.05, 4.0), st.floats(0, 2 * np.pi), st.floats(-30, 30))


@settings(max_examples=60, deadline=None)
@given(points, points)
def test_reciprocity(model, p1, p2):
    g = model.green
    a = model.spec.radius
    r1 = np.array([p1[0] * a, p1[1], p1[2]])
    r2 = np.array([p2[0] * a, p2[1], p2[2]])
    if np.linalg.norm(r1 - r2) < 1e-6:
        return
    for part in (g.guided, g.external):
        np.testing.assert_allclose(part(r1, r2), part(r2, r1).T, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(1.02, 5.0), st.floats(0, 2 * np.pi))
def test_passive_emission_rates(model, roa, phi):
    rates = decay_rates([roa * model.spec.radius, phi, 0.0], model.green)
    assert all(x > 0 for x in rates.legs_wg + rates.legs_ext)
    assert 0 < rates.beta < 1


def test_blend_continuity(model):
    g = model.green
    rho = 1.5 * model.spec.radius
    z_r = model.fit.rayleigh_range
    dz = np.linspace(1.0, 3.0, 4001) * z_r
    r = np.column_stack([np.full_like(dz, rho), np.zeros_like(dz), dz])
    tot = g.total(r, np.array([rho, 0.0, 0.0]))
    norm = np.linalg.norm(tot, axis=(1, 2))
    jump = np.linalg.norm(np.diff(tot, axis=0), axis=(1, 2)) / norm[:-1]
    assert jump.max() < 0.01


def test_external_rejects_points_inside(model):
    a = model.spec.radius
    with pytest.raises(GreenError):
        model.green.external(np.array([0.5 * a, 0, 0]), np.array([2 * a, 0, 1.0]))
    with pytest.raises(GreenError):
        external_green(np.array([2 * a, 0, 0]), np.array([2 * a, 0, 1.0]), model.mode, None)
    with pytest.raises(GreenError):
        FiberGreen(model.mode).subtraction(np.array([2 * a, 0, 0]), np.array([2 * a, 0, 1.0]))


def test_pair_table_matches_pointwise(model):
    a = model.spec.radius
    pos = np.array([[1.5 * a, 0.0, 0.0], [1.5 * a, 0.0, 2.7], [1.7 * a, 1.0, 9.0]])
    gw, ge = model.green.pair_table(pos)
    np.testing.assert_allclose(gw[2, 0], model.green.guided(pos[2], pos[0]), atol=1e-15)
    np.testing.assert_allclose(ge[0, 1], model.green.external(pos[0], pos[1]), atol=1e-15)
    cg, ce = model.green.coincident(pos[1])
    np.testing.assert_allclose(ge[1, 1], ce, atol=1e-15)
    np.testing.assert_allclose(gw[1, 1], cg, atol=1e-15)
