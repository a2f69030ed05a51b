import math

import numpy as np
import pytest

from suval import grassmann as gr
from suval.kinematics import sample_special_unitary, sample_unitary
from suval.numkernel import to_real


def span(*vectors):
    return gr.Subspace.from_complex(np.array(vectors, dtype=complex))


E1, IE1, E2, IE2 = [1, 0], [1j, 0], [0, 1], [0, 1j]


def w_theta(t):
    return span(E1, [1j * math.cos(t), math.sin(t)])


def test_kaehler_angle_examples():
    assert gr.kaehler_angles(span(E1, IE1)) == pytest.approx((0.0,), abs=1e-7)
    assert gr.kaehler_angles(span(E1, E2)) == pytest.approx((math.pi / 2,))
    assert gr.kaehler_angles(w_theta(0.6)) == pytest.approx((0.6,))


def test_theta_examples():
    th = gr.theta_invariant(span(E1, IE1))
    assert abs(th.value) < 1e-12 and not th.mod_sign
    th = gr.theta_invariant(span(E1, E2))
    assert th.value == pytest.approx(1) and th.mod_sign
    th = gr.theta_invariant(w_theta(0.6))
    assert th.value == pytest.approx(math.sin(0.6)) and not th.mod_sign


def test_theta_independent_of_basis(rng):
    for _ in range(50):
        W = gr.random_subspace(2, 2, rng)
        V = gr.random_rotation_within(W, rng)
        assert abs(gr.theta_invariant(V).value - gr.theta_invariant(W).value) < 1e-9


def test_apply_unitary_examples(rng):
    W = w_theta(0.4)
    assert gr.apply_unitary(np.eye(2), W).same_span(W)
    phi = 1.1
    g = np.diag([np.exp(1j * phi), 1])
    th = gr.theta_invariant(gr.apply_unitary(g, W))
    assert th.value == pytest.approx(np.exp(1j * phi) * math.sin(0.4))
    h = sample_special_unitary(2, rng)
    V = gr.apply_unitary(h, W)
    assert gr.kaehler_angles(V) == pytest.approx(gr.kaehler_angles(W))
    assert gr.theta_invariant(V).value == pytest.approx(gr.theta_invariant(W).value)
    with pytest.raises(gr.NotUnitary):
        gr.apply_unitary(2 * np.eye(2), W)


def test_angles_unitarily_invariant(rng):
    for n in (2, 3):
        for _ in range(30):
            W = gr.random_subspace(n, n, rng)
            g = sample_unitary(n, rng)
            assert np.allclose(gr.kaehler_angles(gr.apply_unitary(g, W)), gr.kaehler_angles(W), atol=1e-9)


def test_same_orbit_examples(rng):
    W = w_theta(0.7)
    assert gr.same_su_orbit(W, gr.apply_unitary(sample_special_unitary(2, rng), W))
    assert not gr.same_su_orbit(span(E1, E2), span(E1, IE2))
    assert not gr.same_su_orbit(W, gr.apply_unitary(np.diag([np.exp(0.9j), 1]), W))


def test_orbit_representative_examples():
    L = gr.orbit_representative((math.pi / 2,), 1, 2)
    assert gr.kaehler_angles(L) == pytest.approx((math.pi / 2,))
    assert gr.theta_invariant(L).agrees(gr.ThetaValue(1, True))
    C = gr.orbit_representative((0.0,), 0, 2)
    assert C.same_span(span(E1, IE1))
    with pytest.raises(gr.InconsistentTheta):
        gr.orbit_representative((0.3,), 1, 2)


@pytest.mark.parametrize("n", [2, 3])
def test_orbit_representative_round_trip(n, rng):
    for _ in range(500 if n == 2 else 200):
        W = gr.random_subspace(n, n, rng)
        R = gr.orbit_representative(gr.kaehler_angles(W), gr.theta_invariant(W).value, n)
        assert gr.same_su_orbit(R, W, tol=1e-7)


def test_complement_examples(rng):
    L = span(E1, E2)
    C = gr.orthogonal_complement(L)
    assert C.same_span(span(IE1, IE2))
    assert gr.theta_invariant(C).agrees(gr.theta_invariant(L))
    W = gr.random_subspace(3, 2, rng)
    assert gr.orthogonal_complement(gr.orthogonal_complement(W)).same_span(W)


def test_complement_of_standard_space_n3():
    # the complement of the standard orbit space of C^3 contains the line R i e_3
    C = gr.orthogonal_complement(gr.standard_orbit_space((0.5,), 3))
    ie3 = to_real(np.array([0, 0, 1j]))
    assert C.dim == 3
    assert np.allclose(C.projector() @ ie3, ie3)


@pytest.mark.parametrize("n", [2, 4])
def test_complement_law_even_n(n, rng):
    for _ in range(200):
        W = gr.random_subspace(n, n, rng)
        assert gr.theta_invariant(gr.orthogonal_complement(W)).agrees(gr.theta_invariant(W))


@pytest.mark.parametrize("n", [3, 5])
def test_complement_picks_up_factor_i_for_odd_n(n, rng):
    for _ in range(200):
        W = gr.random_subspace(n, n, rng)
        a = 1j * gr.theta_invariant(W).value
        b = gr.theta_invariant(gr.orthogonal_complement(W)).value
        assert min(abs(a - b), abs(a + b)) < 1e-9


def test_random_subspace_deterministic():
    a = gr.random_subspace(2, 2, np.random.default_rng(5))
    b = gr.random_subspace(2, 2, np.random.default_rng(5))
    assert np.array_equal(a.basis, b.basis)


def test_cos2_mean_reproducible_across_seeds():
    def run(seed, N=4000):
        rng = np.random.default_rng(seed)
        c = np.array([math.cos(gr.kaehler_angles(gr.random_subspace(2, 2, rng))[0]) ** 2 for _ in range(N)])
        return c.mean(), c.std(ddof=1) / math.sqrt(N)
    (m1, s1), (m2, s2) = run(1), run(2)
    assert abs(m1 - m2) <= 3 * math.hypot(s1, s2)


def test_subspace_json_round_trip(rng):
    W = gr.random_subspace(2, 2, rng)
    assert gr.Subspace.from_dict(W.to_dict()).same_span(W)


def test_wrong_dimension():
    with pytest.raises(gr.WrongDimension):
        gr.theta_invariant(span(E1))
