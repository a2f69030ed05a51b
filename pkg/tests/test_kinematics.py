import math

import numpy as np
import pytest
from scipy import stats

from suval import kinematics as kin
from suval.polytope import Parallelotope, Polytope, Zonotope, intersect_hrep, transform
from suval.valuations import evaluate, valuation

BOX = Parallelotope(np.zeros(4), np.diag([2.0, 1.0, 2.0, 1.0]))


def test_haar_unitary_properties(rng):
    g = kin.sample_unitary(3, rng, size=2000)
    eye = np.eye(3)
    assert np.abs(g @ np.conj(np.swapaxes(g, 1, 2)) - eye).max() <= 1e-12
    assert np.abs(np.abs(np.linalg.det(g)) - 1).max() <= 1e-12


@pytest.mark.parametrize("n", [2, 3])
def test_haar_first_moment(n):
    rng = np.random.default_rng(n)
    g = kin.sample_unitary(n, rng, size=100_000)
    x = np.abs(g[:, 0, 0]) ** 2
    assert abs(x.mean() - 1 / n) <= 3 * x.std(ddof=1) / math.sqrt(len(x))


def test_coupled_pair(rng):
    gS, gU = kin.coupled_pair(3, rng, size=500)
    assert np.abs(np.linalg.det(gS) - 1).max() <= 1e-12
    assert np.abs(gS @ np.conj(np.swapaxes(gS, 1, 2)) - np.eye(3)).max() <= 1e-12
    # same columns apart from the first
    assert np.allclose(gS[:, :, 1:], gU[:, :, 1:])


def test_special_unitary_trace_ks():
    a = kin.sample_special_unitary(2, np.random.default_rng(1), size=20000)
    b = kin.sample_special_unitary(2, np.random.default_rng(2), size=20000)
    ta, tb = np.trace(a, axis1=1, axis2=2).real, np.trace(b, axis1=1, axis2=2).real
    assert stats.ks_2samp(ta, tb).pvalue > 0.0027


def test_special_unitary_left_invariance():
    rng = np.random.default_rng(9)
    k = kin.sample_special_unitary(2, rng)
    g = kin.sample_special_unitary(2, rng, size=50000)
    h = kin.sample_special_unitary(2, rng, size=50000)
    a = np.abs((k @ g)[:, 0, 0]) ** 2
    b = np.abs(h[:, 0, 0]) ** 2
    se = math.sqrt(a.var() / len(a) + b.var() / len(b))
    assert abs(a.mean() - b.mean()) <= 3 * se


def test_cube_maps_are_haar():
    from scipy.stats import qmc
    U = qmc.Sobol(4, scramble=True, seed=3).random_base2(14)
    gS, gU = kin.coupled_pair_from_cube(U)
    assert np.abs(np.linalg.det(gS) - 1).max() <= 1e-12
    assert np.mean(np.abs(gS[:, 0, 0]) ** 2) == pytest.approx(0.5, abs=1e-3)
    assert np.mean(gU[:, 0, 0]) == pytest.approx(0, abs=1e-3)
    assert np.abs(np.abs(np.linalg.det(gU)) - 1).max() <= 1e-12


def test_fast_sum_volume_matches_zonotope_formula(rng):
    GK, GL = rng.standard_normal((4, 4)), rng.standard_normal((4, 4))
    R = kin.realify_batch(kin.sample_unitary(2, rng, size=20))
    fast = kin._SumVolume(GK, GL)(R)
    from suval.polytope import zonotope_volume
    slow = zonotope_volume(np.stack([np.vstack([GK, GL @ Ri.T]) for Ri in R]))
    assert np.allclose(fast, slow, rtol=1e-11)


def test_correction_coefficients():
    for n in (2, 3):
        a, b = kin.correction_coefficients(n)
        assert a == b
    assert kin.correction_coefficients(2)[0] == pytest.approx(1 / 16)
    assert kin.kinematic_correction(BOX, BOX, 2) == pytest.approx(1 / 8)
    cube = Parallelotope(np.zeros(4), np.eye(4))
    assert kin.kinematic_correction(cube, cube, 2) == pytest.approx(0)


def test_additive_delta_small_run():
    est = kin.additive_kinematic_delta(BOX, BOX, 2, 2 ** 16, seed=1)
    assert est.reference == pytest.approx(1 / 8)
    assert est.passes()
    cube = Parallelotope(np.zeros(4), np.eye(4))
    est = kin.additive_kinematic_delta(cube, cube, 2, 2 ** 14, seed=1)
    assert est.reference == pytest.approx(0) and est.passes()


def test_principal_delta_small_run():
    s = 1.5
    F = Zonotope(np.zeros(4), [[s, 0, 0, 0], [0, 0, s, 0]])
    est = kin.principal_kinematic_delta(F, F, 2, 2 ** 16, seed=2)
    assert est.reference == pytest.approx(s ** 4 / 8)
    assert est.passes()


def test_plain_mc_design_and_n3(rng):
    est = kin.additive_kinematic_delta(BOX, BOX, 2, 20000, seed=4, design="mc")
    assert est.method == "mc-coupled" and est.passes(z=4)
    Z = Parallelotope(np.zeros(6), np.eye(6) + 0.2 * rng.standard_normal((6, 6)))
    est = kin.additive_kinematic_delta(Z, Z, 3, 2000, seed=5)
    assert est.reference is None and math.isfinite(est.stderr)


def test_coupling_reduces_variance():
    """Coupled samples versus independent U(n) and SU(n) samples, plain Monte Carlo."""
    c = kin.additive_kinematic_delta(BOX, BOX, 2, 40000, seed=6, design="mc")
    u = kin.additive_kinematic_delta(BOX, BOX, 2, 40000, seed=6, design="mc", uncoupled=True)
    assert u.stderr ** 2 / c.stderr ** 2 > 3
    # the default quasi-random coupled design beats plain independent sampling by far more
    q = kin.additive_kinematic_delta(BOX, BOX, 2, 40000, seed=6)
    assert u.stderr ** 2 / q.stderr ** 2 >= 10


@pytest.mark.parametrize("design", ["mc", "rqmc"])
def test_determinism_across_worker_counts(design):
    a = kin.additive_kinematic_delta(BOX, BOX, 2, 2 ** 15, seed=11, design=design, workers=1)
    b = kin.additive_kinematic_delta(BOX, BOX, 2, 2 ** 15, seed=11, design=design, workers=3)
    assert a.mean == b.mean and a.stderr == b.stderr


def test_reproducing_determinism_across_workers():
    K = BOX.to_polytope()
    a = kin.reproducing_check("phi2", K, K, 6, 16, seed=3, workers=1)
    b = kin.reproducing_check("phi2", K, K, 6, 16, seed=3, workers=2)
    assert a.mean == b.mean


@pytest.mark.parametrize("kind,name", [("phi2", "phi2"), ("phi1", "phi1"), ("one", "one_k"), ("vol", "vol")])
def test_slab_engine_matches_production(kind, name):
    rng = np.random.default_rng(21)
    K = Polytope.from_parallelotope(np.zeros(4), np.diag([2, 1, 2, 1]) + 0.3 * rng.standard_normal((4, 4)))
    L = Polytope.from_parallelotope(np.zeros(4), np.diag([1, 2, 1, 1.5]) + 0.3 * rng.standard_normal((4, 4)))
    SK, SL = kin.Slabs.from_polytope(K), kin.Slabs.from_polytope(L)
    v = valuation(name, 2, 2 if name == "one_k" else None)
    checked = 0
    for _ in range(6):
        R = kin.realify_batch(kin.sample_special_unitary(2, rng, 1))[0]
        batch = kin._TranslationBatch(SK, SL, R)
        outer = kin._outer_normals(batch.normals)
        T = rng.uniform(-1.0, 1.0, (8, 4))
        for t, item in zip(T, batch.vertices(T)):
            moved = transform(L, R, t)
            try:
                P = intersect_hrep(K, moved)
            except Exception:
                P = None
            if item is None:
                assert P is None or P.volume < 1e-9
                continue
            fast = kin._integrand(kind, item[0], item[1], outer)
            assert fast == pytest.approx(evaluate(v, P), abs=1e-9)
            checked += 1
    assert checked > 20


def test_reproducing_vol_small_run():
    K = BOX.to_polytope()
    est = kin.reproducing_check("vol", K, K, 8, 256, seed=5)
    assert est.reference == pytest.approx(16)
    assert est.passes(z=4)


def test_reproducing_errors():
    K = BOX.to_polytope()
    with pytest.raises(KeyError):
        kin.reproducing_check("euler", K, K, 2, 4)
    with pytest.raises(kin.UnsupportedBody):
        kin.additive_kinematic_delta(K, K, 2, 100)


def test_estimate_serialization():
    e = kin.MCEstimate(0.5 + 0j, 0.1, 100, 3, 0.4, "mc")
    d = e.to_dict()
    assert d["estimate"] == [0.5, 0.0] and d["provenance"] == "mc"
    assert d["z_score"] == pytest.approx(1.0) and d["pass"]
