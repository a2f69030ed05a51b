import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from suval import valuations as va
from suval.grassmann import Subspace, WrongDimension, random_subspace
from suval.kinematics import sample_special_unitary, sample_unitary
from suval.polytope import Polytope, reflect, scale, transform, translate
from suval.oracles import box_phi2_closed_form, elementary_symmetric


def span(*vectors):
    return Subspace.from_complex(np.array(vectors, dtype=complex))


E1, IE1, E2 = [1, 0], [1j, 0], [0, 1]


def w_theta(t):
    return span(E1, [1j * math.cos(t), math.sin(t)])


def random_parallelotope(rng):
    return Polytope.from_parallelotope(rng.standard_normal(4), rng.standard_normal((4, 4)))


def test_klain_phi2_examples():
    assert abs(va.klain_phi2(span(E1, IE1))) < 1e-12
    assert va.klain_phi2(span(E1, E2)) == pytest.approx(1)
    assert va.klain_phi2(w_theta(0.3)) == pytest.approx(math.sin(0.3) ** 2)
    with pytest.raises(WrongDimension):
        va.klain_phi2(span(E1))


def test_klain_phi1_examples():
    assert abs(va.klain_phi1(span(E1, E2))) < 1e-12
    assert abs(va.klain_phi1(span(E1, IE1))) < 1e-12
    assert va.klain_phi1(w_theta(math.pi / 4)) == pytest.approx(0.5)
    with pytest.raises(va.OddN):
        va.klain_phi1(random_subspace(3, 3, np.random.default_rng(0)))


def test_evaluate_examples(rng):
    assert va.evaluate(va.valuation("euler", 2), random_parallelotope(rng)) == 1
    assert va.evaluate(va.valuation("one_k", 2, 2), Polytope.box([1, 1, 1, 1])) == pytest.approx(6)
    a1, a2, b1, b2 = 2.0, 0.5, 1.5, 3.0
    assert va.evaluate(va.valuation("phi2", 2), Polytope.box([a1, a2, b1, b2])) == pytest.approx((a1 - a2) * (b1 - b2))
    s = 1.7
    flat = Polytope.from_parallelotope(np.zeros(4), [[s, 0, 0, 0], [0, 0, s, 0]])
    assert va.evaluate(va.valuation("phi2", 2), flat) == pytest.approx(s * s)


def test_one_k_is_elementary_symmetric(rng):
    for _ in range(10):
        s = rng.uniform(0.2, 3, 4)
        for k in range(5):
            v = va.evaluate(va.valuation("one_k", 2, k), Polytope.box(s))
            assert v == pytest.approx(elementary_symmetric(s, k), abs=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0.1, 4), min_size=4, max_size=4))
def test_phi2_on_boxes(sides):
    v = va.evaluate(va.valuation("phi2", 2), Polytope.box(sides))
    assert v == pytest.approx(box_phi2_closed_form(sides), abs=1e-9)


def test_phi1_vanishes_on_boxes(rng):
    for _ in range(5):
        assert abs(va.evaluate(va.valuation("phi1", 2), Polytope.box(rng.uniform(0.5, 2, 4)))) < 1e-10


def test_weight_examples(rng):
    box = Polytope.box([2, 1, 2, 1])
    phi2 = va.valuation("phi2", 2)
    assert va.check_weight(phi2, box, sample_special_unitary(2, rng))
    flipped = va.evaluate(phi2, transform(box, np.diag([1j, 1])))
    assert flipped == pytest.approx(-va.evaluate(phi2, box))
    P = random_parallelotope(rng)
    assert va.check_weight(va.valuation("vol", 2), P, sample_unitary(2, rng))


@pytest.mark.parametrize("name", ["phi1", "phi2", "phi1_bar", "phi2_bar", "vol"])
def test_weight_law_random(name, rng):
    v = va.valuation(name, 2)
    for _ in range(20):
        assert va.check_weight(v, random_parallelotope(rng), sample_unitary(2, rng))


def test_conjugate_valuations(rng):
    P = random_parallelotope(rng)
    for name in ("phi1", "phi2"):
        v = va.valuation(name, 2)
        assert va.evaluate(v.conj(), P) == pytest.approx(va.evaluate(v, P).conjugate())
        assert v.conj().weight == -v.weight


def test_even_homogeneous_translation_invariant(rng):
    for name in ("phi1", "phi2"):
        v = va.valuation(name, 2)
        P = random_parallelotope(rng)
        base = va.evaluate(v, P)
        assert va.evaluate(v, reflect(P)) == pytest.approx(base, abs=1e-9)
        assert va.evaluate(v, scale(P, 1.7)) == pytest.approx(1.7 ** 2 * base, abs=1e-9)
        assert va.evaluate(v, translate(P, rng.standard_normal(4))) == pytest.approx(base, abs=1e-9)


def test_phi2_on_n3_box_vanishing_pattern():
    # boxes in C^3 have only coordinate 3-faces, whose Theta is 0 or a power of i
    P = Polytope.from_parallelotope(np.zeros(6), np.diag([1, 1, 1, 1, 1, 1]))
    v = va.evaluate(va.valuation("phi2", 3), P)
    assert abs(v.imag) < 1e-12


def test_scaled_valuation(rng):
    P = random_parallelotope(rng)
    v = va.valuation("phi2", 2)
    assert va.evaluate(2j * v, P) == pytest.approx(2j * va.evaluate(v, P))


def test_products():
    assert va.product_middle("phi1_bar", "phi1", 2) == pytest.approx(4, rel=1e-8)
    assert va.product_middle("phi2_bar", "phi2", 2) == pytest.approx(16, rel=1e-8)
    assert va.product_middle("phi2_bar", "phi2", 3) == pytest.approx(-15 * math.pi, rel=1e-8)
    assert va.product_middle("phi2", "phi2_bar", 3) == pytest.approx(-15 * math.pi, rel=1e-8)
    assert va.product_middle("phi1", "phi2", 2) == 0
    assert va.product_middle("phi2", "phi2", 2) == 0
    for n in (2, 3):
        closed = va.product_middle_closed_form("phi2_bar", "phi2", n)
        assert va.product_middle("phi2_bar", "phi2", n) == pytest.approx(closed, rel=1e-8)


def test_product_errors():
    with pytest.raises(va.OddN):
        va.product_middle("phi1_bar", "phi1", 3)
    with pytest.raises(KeyError):
        va.product_middle("vol", "phi1", 2)


def test_valuation_errors():
    with pytest.raises(KeyError):
        va.valuation("phi3", 2)
    with pytest.raises(va.OddN):
        va.valuation("phi1", 3)
    with pytest.raises(ValueError):
        va.valuation("one_k", 2)
    with pytest.raises(va.DimensionMismatch):
        va.evaluate(va.valuation("phi2", 3), Polytope.box([1, 1, 1, 1]))


def test_dimensions():
    assert va.dimension_su(2) == 10
    assert va.dimension_su(3) == 12
    assert va.dimension_u(2) == 6
    for n in range(2, 9):
        assert va.dimension_su(n) - va.dimension_u(n) == (4 if n % 2 == 0 else 2)
