import math

import numpy as np
import pytest

from suval import forms
from suval.forms import PolyForm, SpherePoint, eval_at, ext_d, invariant_form, wedge


def dx(n, j):
    return PolyForm.differential(n, 2 * j)


def dy(n, j):
    return PolyForm.differential(n, 2 * j + 1)


def point_e1(n):
    zeta = np.zeros(n, complex)
    zeta[0] = 1
    return SpherePoint(np.zeros(n, complex), zeta)


def tangent(n, index):
    v = np.zeros(4 * n)
    v[index] = 1
    return v


def same(a, b, n, rng, samples=20):
    r = forms.check_identity_on_sphere_bundle(a, b, n, samples, 1e-10, rng)
    return r.passed


def test_alpha_at_base_point():
    n = 2
    alpha = invariant_form("alpha", n)
    assert eval_at(alpha, point_e1(n), [tangent(n, 0)]) == pytest.approx(1)
    assert eval_at(alpha, point_e1(n), [tangent(n, 1)]) == pytest.approx(0)


def test_theta2_at_base_point(rng):
    n = 3
    t2 = invariant_form("theta2", n)
    expected = sum((dx(n, j) ^ dy(n, j) for j in range(1, n)), PolyForm.zero(n, 2))
    p = point_e1(n)
    for _ in range(10):
        vs = rng.standard_normal((2, 4 * n))
        assert eval_at(t2, p, vs) == pytest.approx(eval_at(expected, p, vs), abs=1e-12)


def test_bad_names():
    with pytest.raises(forms.BadIndex):
        invariant_form("chi(2)", 2)
    with pytest.raises(forms.UnknownName):
        invariant_form("omega", 2)


def test_wedge_examples(rng):
    n = 2
    a = dx(n, 0) ^ dy(n, 0)
    assert wedge(dx(n, 0), dy(n, 0)).terms == a.terms
    beta = invariant_form("beta", n)
    assert wedge(beta, beta).is_zero()
    for n in (2, 3):
        for j in range(n):
            for k in range(n):
                w = wedge(invariant_form(f"chi({j})", n), invariant_form(f"chi({k})", n))
                if j + k != n - 1:
                    assert w.is_zero() or same(w, PolyForm.zero(n, w.degree), n, rng)


def test_graded_commutativity(rng):
    n = 2
    a, g = invariant_form("alpha", n), invariant_form("theta2", n)
    c = invariant_form("chi(1)", n)
    assert same(wedge(a, c), wedge(c, a) * (-1) ** (a.degree * c.degree), n, rng)
    assert same(wedge(g, c), wedge(c, g), n, rng)


def test_exterior_derivative_examples(rng):
    n = 2
    x1 = PolyForm.variable(n, 0)
    assert (ext_d(x1 ^ dy(n, 0)) - (dx(n, 0) ^ dy(n, 0))).is_zero()
    gamma, theta0 = invariant_form("gamma", n), invariant_form("theta0", n)
    assert (ext_d(gamma) - theta0 * 2).is_zero()
    for name in ("alpha", "beta", "chi(0)", "chi(1)", "thetas"):
        assert ext_d(ext_d(invariant_form(name, n))).is_zero()


def test_eval_multilinear_and_alternating(rng):
    n = 2
    f = invariant_form("theta0", n)
    p = forms.random_sphere_points(n, 1, rng)[0]
    u, v, w = rng.standard_normal((3, 4 * n))
    assert eval_at(f, p, [u, u]) == pytest.approx(0, abs=1e-12)
    lhs = eval_at(f, p, [2 * u + 3 * w, v])
    assert lhs == pytest.approx(2 * eval_at(f, p, [u, v]) + 3 * eval_at(f, p, [w, v]))
    with pytest.raises(forms.ArityMismatch):
        eval_at(f, p, [u])


def test_identity_examples(rng):
    n = 2
    a, b, g = (invariant_form(s, n) for s in ("alpha", "beta", "gamma"))
    ths = invariant_form("thetas", n)
    assert same(ext_d(a), -(b ^ g) - ths, n, rng)
    th0, th1 = invariant_form("theta0", n), invariant_form("theta1", n)
    chi0, chi1 = invariant_form("chi(0)", n), invariant_form("chi(1)", n)
    assert same(chi1 ^ th0, (chi0 ^ (ths - th1 * 1j)) * (-0.5j), n, rng)
    r = forms.check_identity_on_sphere_bundle(a, b, n, 20, 1e-9, rng)
    assert not r.passed and r.max_residual > 0.1
    with pytest.raises(forms.DegreeMismatch):
        forms.check_identity_on_sphere_bundle(a, th0, n, 5, 1e-9, rng)


@pytest.mark.parametrize("n", [2, 3])
def test_all_identities(n, rng):
    reports = forms.verify_forms(n, samples=100, rng=rng)
    bad = [(r.name, r.max_residual) for r in reports if not r.passed]
    assert not bad


def test_rumin_examples(rng):
    for n in (2, 3):
        d = forms.phi2_data(n)
        assert forms.rumin_verify(d.omega, d.xi, d.D, n, 50, 1e-9, rng).passed
    d = forms.phi1_data(2)
    assert forms.rumin_verify(d.omega, d.xi, d.D, 2, 50, 1e-9, rng).passed
    for n in (2, 3):
        w = invariant_form("gamma", n) ^ invariant_form("chi(0)", n) ^ invariant_form(f"chi({n - 1})", n)
        zero = PolyForm.zero(n, 2 * n - 2)
        assert forms.rumin_verify(w, zero, ext_d(w), n, 30, 1e-9, rng).passed
        assert ext_d(w).is_zero() or same(ext_d(w), PolyForm.zero(n, 2 * n), n, rng)


def test_rumin_rejects_wrong_D(rng):
    d = forms.phi2_data(2)
    assert not forms.rumin_verify(d.omega, d.xi, d.D * 2, 2, 20, 1e-9, rng).passed


@pytest.mark.parametrize("a,b,n,expected", [("phi1", "phi1", 2, 4.0), ("phi2", "phi2", 2, 16.0),
                                            ("phi2", "phi2", 3, -15 * math.pi)])
def test_product_constants(a, b, n, expected, rng):
    da = forms.phi1_data(n) if a == "phi1" else forms.phi2_data(n)
    pc = forms.product_constant(da.omega.conj(), da.D, n, rng=rng)
    assert pc.product == pytest.approx(expected, rel=1e-9)
    assert pc.spread < 1e-9


def test_product_constant_rejects_wrong_degree(rng):
    n = 2
    with pytest.raises(forms.DegreeMismatch):
        forms.product_constant(invariant_form("alpha", n), invariant_form("beta", n), n, rng=rng)


def test_odd_normalization_factor(rng):
    # i gamma ^ chi_0 ^ chibar_0 = i 2^{n-1} dvol_sphere when n is odd
    n = 3
    g, c0 = invariant_form("gamma", n), invariant_form("chi(0)", n)
    lhs = (g ^ c0 ^ c0.conj()) * 1j
    assert same(lhs, invariant_form("dvol_sphere", n) * (4j), n, rng)
