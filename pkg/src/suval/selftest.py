"""Acceptance checks shared by ``suval selftest`` and the test suite.

Each ``criterion_*`` function returns a list of Check records.
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import forms, grassmann, kinematics, oracles, polytope, valuations
from .numkernel import unit_ball_volume
from .polytope import Parallelotope, Polytope, Zonotope

BOX = (2.0, 1.0, 2.0, 1.0)
FLAT_SIDE = 1.5


@dataclass
class Check:
    criterion: str
    name: str
    passed: bool
    value: object = None
    reference: object = None
    residual: float | None = None
    provenance: str = "exact"
    stderr: float | None = None
    z_score: float | None = None
    seconds: float = 0.0
    detail: str = ""
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        def enc(v):
            if isinstance(v, complex):
                return [v.real, v.imag]
            if isinstance(v, (np.floating, np.integer)):
                return v.item()
            return v
        out = {"criterion": self.criterion, "name": self.name, "pass": bool(self.passed),
               "provenance": self.provenance, "value": enc(self.value)}
        if self.reference is not None:
            out["reference"] = {"value": enc(self.reference), "provenance": "reference"}
        for key in ("residual", "stderr", "z_score"):
            v = getattr(self, key)
            if v is not None:
                out[key] = float(v)
        if self.detail:
            out["detail"] = self.detail
        out["seconds"] = round(self.seconds, 3)
        out.update(self.extra)
        return out

    def line(self):
        tag = "PASS" if self.passed else "FAIL"
        parts = [f"[{tag}] criterion {self.criterion}: {self.name}"]
        if self.residual is not None:
            parts.append(f"residual={self.residual:.3g}")
        if self.stderr is not None:
            parts.append(f"z={self.z_score:.2f} stderr={self.stderr:.3g}")
        if self.detail:
            parts.append(self.detail)
        return "  ".join(parts)


def _timed(fn):
    t = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t


def box(sides):
    return Polytope.box(sides)


# ---- 1: orbit invariants ----------------------------------------------------

def criterion_1(n, seed=0, count=1000, group_count=200):
    rng = np.random.default_rng([seed, 1, n])
    t0 = time.perf_counter()
    size_res, comp_res, comp_fail = 0.0, 0.0, 0
    oriented, exact_sign = 0, 0
    for _ in range(count):
        W = grassmann.random_subspace(n, n, rng)
        th = grassmann.theta_invariant(W)
        size = math.prod(math.sin(a) for a in grassmann.kaehler_angles(W))
        size_res = max(size_res, abs(abs(th.value) - size))
        tp = grassmann.theta_invariant(grassmann.orthogonal_complement(W))
        d = min(abs(tp.value - th.value), abs(tp.value + th.value))
        comp_res = max(comp_res, d)
        comp_fail += not tp.agrees(th, 1e-9)
        if not (th.mod_sign or tp.mod_sign):
            # reported only: equality in C, not just up to sign
            oriented += 1
            exact_sign += abs(tp.value - th.value) <= 1e-9
    eq_res = 0.0
    for _ in range(group_count):
        W = grassmann.random_subspace(n, n, rng)
        g = kinematics.sample_unitary(n, rng)
        lhs = grassmann.theta_invariant(grassmann.apply_unitary(g, W))
        rhs = grassmann.ThetaValue(np.linalg.det(g) * grassmann.theta_invariant(W).value,
                                   grassmann.theta_invariant(W).mod_sign)
        d = abs(lhs.value - rhs.value)
        if lhs.mod_sign or rhs.mod_sign:
            d = min(d, abs(lhs.value + rhs.value))
        eq_res = max(eq_res, d)
    secs = time.perf_counter() - t0
    return [
        Check("1", f"|Theta| = prod sin(theta_j), n={n}, {count} subspaces", size_res <= 1e-9,
              residual=size_res, seconds=secs),
        Check("1", f"Theta(W-perp) = Theta(W) mod sign, n={n}, {count} subspaces", comp_fail == 0,
              residual=comp_res, detail=f"{comp_fail}/{count} disagree",
              extra={"exact_sign_agreement": [exact_sign, oriented]}),
        Check("1", f"Theta(gW) = det(g) Theta(W), n={n}, {group_count} unitaries", eq_res <= 1e-9,
              residual=eq_res),
        Check("1", f"runtime < 10 s, n={n}", secs < 10, seconds=secs, detail="limit 10 s"),
    ]


def corrected_complement_law(n, seed=0, count=1000):
    """Theta(W-perp) = i^(n mod 2) Theta(W) mod sign (supplementary check)."""
    rng = np.random.default_rng([seed, 101, n])
    res = 0.0
    factor = 1j if n % 2 else 1.0
    for _ in range(count):
        W = grassmann.random_subspace(n, n, rng)
        a = grassmann.theta_invariant(W).value * factor
        b = grassmann.theta_invariant(grassmann.orthogonal_complement(W)).value
        res = max(res, min(abs(a - b), abs(a + b)))
    return Check("1 (supplement)", f"Theta(W-perp) = i^(n mod 2) Theta(W) mod sign, n={n}",
                 res <= 1e-9, residual=res)


# ---- 2, 3, 4: forms ----------------------------------------------------------

def _form_check(crit, name, reports, secs, tol=1e-9):
    worst = max(r.max_residual for r in reports)
    bad = [r.name for r in reports if not r.passed]
    return Check(crit, name, not bad and worst <= tol, residual=worst, seconds=secs,
                 detail=f"{len(reports)} identities" + (f"; failing: {bad}" if bad else ""),
                 extra={"identities": [r.to_dict() for r in reports]})


def criterion_2(n, seed=0, samples=100):
    rng = np.random.default_rng([seed, 2, n])

    def run():
        cases = forms.structure_identities(n) + forms.chi_differentials(n) + forms.chi_relations(n)
        return [forms.check_identity_on_sphere_bundle(l, r, n, samples, 1e-9, rng, name)
                for name, l, r in cases]

    reports, secs = _timed(run)
    return [_form_check("2", f"form identities, n={n}, {samples} points", reports, secs),
            Check("2", f"runtime < 60 s, n={n}", secs < 60, seconds=secs, detail="limit 60 s")]


def criterion_3(n, seed=0, samples=100):
    rng = np.random.default_rng([seed, 3, n])

    def run():
        return [forms.check_identity_on_sphere_bundle(l, r, n, samples, 1e-9, rng, name)
                for name, l, r in forms.normalization_identities(n)]

    reports, secs = _timed(run)
    return [_form_check("3", f"volume form normalizations, n={n}", reports, secs)]


def criterion_4(n, seed=0, samples=100):
    rng = np.random.default_rng([seed, 4, n])
    out = []
    w = unit_ball_volume
    cases = [("phi2", forms.phi2_data(n), (n + 2) * 4 ** (n - 1) / (n * w(n) ** 2))]
    if n % 2 == 0:
        cases.append(("phi1", forms.phi1_data(n), 2 ** (n - 1) * math.factorial(n - 1) / math.pi ** n))
    for name, data, expected in cases:
        rep, secs = _timed(lambda: forms.rumin_verify(data.omega, data.xi, data.D, n, samples, 1e-9, rng, name))
        out.append(Check("4", f"Rumin data of {name}, n={n}", rep.passed,
                         residual=max(rep.identity_residual, rep.vertical_residual), seconds=secs))
        pc = forms.product_constant(data.omega.conj(), data.D, n, rng=rng)
        rel = abs(pc.c - expected) / abs(expected)
        out.append(Check("4", f"conj(omega)^D omega / dvol for {name}, n={n}", rel <= 1e-9,
                         value=pc.c, reference=expected, residual=rel))
    return out


# ---- 5: products ---------------------------------------------------------------

def criterion_5(seed=0):
    out = []
    cases = [("phi1_bar", "phi1", 2, 4.0), ("phi2_bar", "phi2", 2, 16.0), ("phi2_bar", "phi2", 3, -15 * math.pi)]
    for a, b, n, expected in cases:
        v, secs = _timed(lambda: valuations.product_middle(a, b, n, rng=np.random.default_rng([seed, 5, n])))
        rel = abs(v - expected) / abs(expected)
        out.append(Check("5", f"{a} * {b} = {expected:.6g} vol, n={n}", rel <= 1e-8, value=v,
                         reference=expected, residual=rel, seconds=secs))
    return out


# ---- 6, 7, 8: polytopes and valuations ----------------------------------------

def criterion_6(seed=0, count=50):
    rng = np.random.default_rng([seed, 6])
    worst = 0.0
    for _ in range(count):
        s = rng.uniform(0.2, 3.0, 4)
        P = box(s)
        for k in range(5):
            v = valuations.evaluate(valuations.valuation("one_k", 2, k), P)
            worst = max(worst, abs(v - oracles.elementary_symmetric(s, k)))
    mu2 = valuations.evaluate(valuations.valuation("one_k", 2, 2), box([1, 1, 1, 1]))
    exact_res, dev, var, zmax = 0.0, 0.0, 0.0, 0.0
    for i in range(count):
        G = rng.standard_normal((4, 4))
        P = Polytope.from_parallelotope(rng.standard_normal(4), G)
        vs = P.faces(0)
        exact_res = max(exact_res, abs(sum(f.exterior_angle for f in vs) - 1))
        # Monte Carlo estimate of the same sum, one seeded stream per polytope
        mc_rng = np.random.default_rng([seed, 6, i])
        mc = [polytope.exterior_angle(P, f, "monte_carlo", mc_rng, return_stderr=True) for f in vs]
        d = sum(m for m, _ in mc) - 1
        v = sum(e * e for _, e in mc)
        zmax = max(zmax, abs(d) / math.sqrt(v))
        dev, var = dev + d, var + v
    pooled = dev / math.sqrt(var)
    return [
        Check("6", f"one_k(box) = e_k(sides), k=0..4, {count} boxes", worst <= 1e-10, residual=worst),
        Check("6", "mu_2([0,1]^4) = 6", abs(mu2 - 6) <= 1e-10, value=mu2, reference=6.0, residual=abs(mu2 - 6)),
        Check("6", f"sum of exact vertex angles = 1, {count} parallelotopes", exact_res <= 1e-9,
              residual=exact_res),
        Check("6", f"sum of Monte Carlo vertex angles = 1, {count} parallelotopes (pooled)", abs(pooled) <= 3,
              provenance="mc", z_score=pooled, stderr=math.sqrt(var) / count,
              detail=f"largest single-polytope |z|={zmax:.2f}"),
    ]


def criterion_7(seed=0, count=100):
    rng = np.random.default_rng([seed, 7])
    res_closed, res_oracle = 0.0, 0.0
    v = valuations.valuation("phi2", 2)
    for _ in range(count):
        s = rng.uniform(0.1, 3.0, 4)
        val = valuations.evaluate(v, box(s))
        res_closed = max(res_closed, abs(val - oracles.box_phi2_closed_form(s)))
        res_oracle = max(res_oracle, abs(val - oracles.box_phi2_bruteforce(s)))
    return [Check("7", f"phi2(box) = (a1-a2)(b1-b2), {count} boxes", res_closed <= 1e-9, residual=res_closed),
            Check("7", f"phi2(box) matches the independent face enumeration, {count} boxes",
                  res_oracle <= 1e-9, residual=res_oracle)]


def criterion_8(seed=0, count=100):
    rng = np.random.default_rng([seed, 8])
    out = []
    for name in ("phi2", "phi1", "vol"):
        v = valuations.valuation(name, 2)
        ok, parity = 0, 0.0
        for _ in range(count):
            P = Polytope.from_parallelotope(rng.standard_normal(4), rng.standard_normal((4, 4)))
            g = kinematics.sample_unitary(2, rng)
            ok += valuations.check_weight(v, P, g, tol=1e-8)
            if name != "vol":
                parity = max(parity, abs(valuations.evaluate(v, polytope.reflect(P)) - valuations.evaluate(v, P)))
        out.append(Check("8", f"weight law for {name} (l={v.weight}), {count} pairs (g, P)", ok == count,
                         detail=f"{ok}/{count}"))
        if name != "vol":
            out.append(Check("8", f"{name}(-P) = {name}(P), {count} parallelotopes", parity <= 1e-8, residual=parity))
    return out


# ---- 9 to 12: kinematics ----------------------------------------------------------

def _mc_check(crit, name, est, max_rel_stderr=None, secs=0.0):
    ok = est.passes()
    detail = ""
    if max_rel_stderr is not None:
        rel = est.stderr / abs(est.reference)
        ok = ok and rel <= max_rel_stderr
        detail = f"stderr/reference={rel:.4f} (limit {max_rel_stderr})"
    return Check(crit, name, ok, value=est.mean, reference=est.reference, provenance="mc",
                 stderr=est.stderr, z_score=est.z_score, seconds=secs, detail=detail,
                 extra={"estimate": est.to_dict()})


def criterion_9(seed=0, n_g=40, n_t=1024):
    K = box(BOX)
    est, secs = _timed(lambda: kinematics.reproducing_check("vol", K, K, n_g, n_t, seed=seed))
    return [_mc_check("9", f"vol reproducing check = vol(K) vol(L), N={est.n_samples}", est, 0.005, secs),
            Check("9", "runtime < 60 s", secs < 60, seconds=secs, detail="limit 60 s")]


def _bodies():
    K = Parallelotope(np.zeros(4), np.diag(BOX))
    s = FLAT_SIDE
    F = Zonotope(np.zeros(4), [[s, 0, 0, 0], [0, 0, s, 0]])
    return [("box(2,1,2,1)", K), (f"flat square side {s}", F)]


def criterion_10(seed=0, N=10 ** 6):
    out = []
    t0 = time.perf_counter()
    for label, K in _bodies():
        est, secs = _timed(lambda: kinematics.additive_kinematic_delta(K, K, 2, N, seed=seed))
        out.append(_mc_check("10", f"additive delta, K = L = {label}, N={est.n_samples}", est, 0.02, secs))
    secs = time.perf_counter() - t0
    out.append(Check("10", "runtime < 5 min", secs < 300, seconds=secs, detail="limit 300 s"))
    for n in (2, 3):
        a, b = kinematics.correction_coefficients(n)
        out.append(Check("10", f"(-1)^n and parity renderings of the phi2 coefficient agree, n={n}",
                         abs(a - b) <= 1e-15, value=a, reference=b, residual=abs(a - b)))
    return out


def criterion_11(seed=0, N=10 ** 6):
    out = []
    for label, K in _bodies():
        est, secs = _timed(lambda: kinematics.principal_kinematic_delta(K, K, 2, N, seed=seed + 1))
        out.append(_mc_check("11", f"principal delta, K = L = {label}, N={est.n_samples}", est, 0.02, secs))
    return out


def criterion_12(seed=0, n_g=1250, n_t=32):
    K = box(BOX)
    est, secs = _timed(lambda: kinematics.reproducing_check("phi2", K, K, n_g, n_t, seed=seed + 2))
    out = [_mc_check("12", f"SU(2) kinematic integral of phi2 = 8, N={est.n_samples}", est, None, secs)]
    est, secs = _timed(lambda: kinematics.u_invariant_delta(K, K, n_g // 2, n_t, seed=seed + 3))
    out.append(_mc_check("12", f"SU(2) - U(2) delta for mu_2 = 0, N={est.n_samples}", est, None, secs))
    return out


def criterion_13():
    out = [Check("13", "dimension_su(2) = 10", valuations.dimension_su(2) == 10, value=valuations.dimension_su(2)),
           Check("13", "dimension_su(3) = 12", valuations.dimension_su(3) == 12, value=valuations.dimension_su(3))]
    diffs = {n: valuations.dimension_su(n) - valuations.dimension_u(n) for n in range(2, 9)}
    ok = all(d == (4 if n % 2 == 0 else 2) for n, d in diffs.items())
    out.append(Check("13", "dimension_su(n) - dimension_u(n) = 4 (even n) / 2 (odd n), n=2..8", ok,
                     value=str(diffs)))
    return out


def run_all(ns=(2, 3), seed=0, supplementary=True):
    """Every criterion; per-n criteria run for each n in ``ns``."""
    checks = []
    for n in ns:
        checks += criterion_1(n, seed)
        if supplementary:
            checks.append(corrected_complement_law(n, seed))
    for crit in (criterion_2, criterion_3, criterion_4):
        for n in ns:
            checks += crit(n, seed)
    checks += criterion_5(seed)
    checks += criterion_6(seed)
    checks += criterion_7(seed)
    checks += criterion_8(seed)
    checks += criterion_9(seed)
    checks += criterion_10(seed)
    checks += criterion_11(seed)
    checks += criterion_12(seed)
    checks += criterion_13()
    return checks
