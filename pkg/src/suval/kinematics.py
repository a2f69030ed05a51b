"""Haar sampling on U(n) and SU(n) and Monte Carlo checks of kinematic formulas.

Group integrals use the probability Haar measure and translations use
Lebesgue measure on R^{2n}.

Samples are drawn in fixed-size chunks. Each chunk gets its own stream
spawned from the seed, so results do not depend on the worker count.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations, product

import numpy as np
from scipy.spatial import ConvexHull
from scipy.stats import qmc

from .numkernel import unit_ball_volume
from .polytope import Polytope, Zonotope, zonotope_volume
from .valuations import evaluate, valuation

CHUNK = 1 << 14
TOL = 1e-9


class UnsupportedBody(ValueError):
    pass


@dataclass
class MCEstimate:
    mean: complex
    stderr: float
    n_samples: int
    seed: int | None = None
    reference: complex | None = None
    method: str = "mc"

    @property
    def z_score(self):
        if self.reference is None:
            return None
        diff = abs(self.mean - self.reference)
        if self.stderr == 0:
            return 0.0 if diff == 0 else math.inf
        return diff / self.stderr

    def passes(self, z=3.0):
        return self.z_score is not None and self.z_score <= z

    def to_dict(self):
        c = complex(self.mean)
        out = {"estimate": [c.real, c.imag], "stderr": self.stderr, "n_samples": self.n_samples,
               "seed": self.seed, "method": self.method, "provenance": "mc"}
        if self.reference is not None:
            r = complex(self.reference)
            out.update(reference=[r.real, r.imag], z_score=self.z_score, **{"pass": self.passes()})
        return out


# ---- Haar sampling ---------------------------------------------------------

def sample_unitary(n, rng, size=None):
    """Haar unitary (QR of a complex Ginibre matrix with the phases of R fixed)."""
    shape = (() if size is None else (size,)) + (n, n)
    Z = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2)
    Q, R = np.linalg.qr(Z)
    d = np.diagonal(R, axis1=-2, axis2=-1)
    return Q * (d / np.abs(d))[..., None, :]


def coupled_pair(n, rng, size=None):
    """(g_SU, g_U) with g_U Haar on U(n) and g_SU = g_U diag(det(g_U)^-1, 1, ..., 1)."""
    gU = sample_unitary(n, rng, size)
    gS = gU.copy()
    gS[..., :, 0] /= np.linalg.det(gU)[..., None]
    return gS, gU


def sample_special_unitary(n, rng, size=None):
    return coupled_pair(n, rng, size)[0]


def su2_from_cube(U):
    """Map points of [0,1)^3 to SU(2); uniform points give Haar samples.

    Uses |h_11|^2 ~ U[0,1] and independent uniform phases for h_11, h_21.
    """
    U = np.atleast_2d(U)
    t, a, b = U[:, 0], 2 * math.pi * U[:, 1], 2 * math.pi * U[:, 2]
    u = np.sqrt(t) * np.exp(1j * a)
    v = np.sqrt(1 - t) * np.exp(1j * b)
    h = np.empty((len(U), 2, 2), dtype=complex)
    h[:, 0, 0], h[:, 0, 1] = u, -v.conj()
    h[:, 1, 0], h[:, 1, 1] = v, u.conj()
    return h


def coupled_pair_from_cube(U):
    """Coupled (g_SU, g_U) for n = 2 from points of [0,1)^4."""
    gS = su2_from_cube(U[:, :3])
    gU = gS.copy()
    gU[:, :, 0] *= np.exp(2j * math.pi * U[:, 3])[:, None]
    return gS, gU


def realify_batch(g):
    N, n, _ = g.shape
    R = np.empty((N, 2 * n, 2 * n))
    R[:, 0::2, 0::2] = g.real
    R[:, 0::2, 1::2] = -g.imag
    R[:, 1::2, 0::2] = g.imag
    R[:, 1::2, 1::2] = g.real
    return R


# ---- streams ---------------------------------------------------------------------

def _seed_of(rng, seed):
    if seed is not None:
        return int(seed)
    if rng is None:
        return 0
    return int(rng.integers(2 ** 63))


def _run(fn, tasks, workers):
    if workers is None or workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


# ---- additive / principal kinematic deltas ------------------------------------

def _generators(Z):
    if isinstance(Z, Zonotope):
        return Z.generators
    raise UnsupportedBody("volumes of K + gL are exact only for zonotopes")


def _minor_abs_sum(M):
    """Sum of |minor| over all square submatrices of M (batch, d x d), empty one included."""
    N, d, _ = M.shape
    total = 1.0 + np.abs(M).sum(axis=(1, 2))
    for k in range(2, d + 1):
        idx = np.array(list(combinations(range(d), k)))
        if k == 2:
            a, b = idx[:, 0], idx[:, 1]
            m = (M[:, a][:, :, a] * M[:, b][:, :, b] - M[:, a][:, :, b] * M[:, b][:, :, a])
            total += np.abs(m).sum(axis=(1, 2))
        else:
            # sub[:, r, c] is the k x k block on rows idx[r] and columns idx[c]
            sub = M[:, idx][..., idx].transpose(0, 1, 3, 2, 4)
            total += np.abs(np.linalg.det(sub)).sum(axis=(1, 2))
    return total


class _SumVolume:
    """vol(K + g L) for batches of real orthogonal g."""

    def __init__(self, GK, GL):
        self.GK, self.GL = GK, GL
        d = GK.shape[1]
        self.fast = GK.shape[0] == d and abs(np.linalg.det(GK)) > 1e-12 and GL.shape[0] == d
        if self.fast:
            self.Ainv = np.linalg.inv(GK)
            self.detA = abs(np.linalg.det(GK))

    def __call__(self, R):
        GLg = self.GL @ R.transpose(0, 2, 1)
        if self.fast:
            # det[K_S; (gL)_T] = det(A) * (minor of (gL) A^-1), so the sum runs over all minors
            return self.detA * _minor_abs_sum(GLg @ self.Ainv)
        GK = np.broadcast_to(self.GK, (len(R),) + self.GK.shape)
        return zonotope_volume(np.concatenate([GK, GLg], axis=1))


def correction_coefficients(n):
    """Coefficient of the phi_2 term, written as (-1)^n w_n^2 / ((n+2) 2^{2n-1} w_{2n}) and
    with an explicit sign by parity; both are returned so they can be compared."""
    w = unit_ball_volume
    mag = w(n) ** 2 / ((n + 2) * 2 ** (2 * n - 1) * w(2 * n))
    unified = (-1) ** n * mag
    by_parity = mag if n % 2 == 0 else -mag
    return unified, by_parity


def kinematic_correction(K, L, n):
    """(1/2^n)(phi1(K) phi1bar(L) + phi1bar(K) phi1(L)) + c_n (phi2(K) phi2bar(L) + phi2bar(K) phi2(L))."""
    P, Q = _as_polytope(K), _as_polytope(L)
    c2, _ = correction_coefficients(n)
    p2K, p2L = evaluate(valuation("phi2", n), P), evaluate(valuation("phi2", n), Q)
    total = c2 * (p2K * p2L.conjugate() + p2K.conjugate() * p2L)
    if n % 2 == 0:
        p1K, p1L = evaluate(valuation("phi1", n), P), evaluate(valuation("phi1", n), Q)
        total += (p1K * p1L.conjugate() + p1K.conjugate() * p1L) / 2 ** n
    return complex(total)


def _as_polytope(K):
    return K.to_polytope() if isinstance(K, Zonotope) else K


def _delta(K, L, n, N, rng, seed, design, replicates, workers, reference, negate, uncoupled=False):
    GK, GL = _generators(K), _generators(L)
    d = 2 * n
    if GK.shape[1] != d or GL.shape[1] != d:
        raise UnsupportedBody(f"bodies must live in R^{d}")
    if negate:
        GL = -GL
    vol = _SumVolume(GK, GL)
    seed = _seed_of(rng, seed)
    if design == "auto":
        design = "rqmc" if n == 2 else "mc"
    if design == "rqmc":
        if n != 2:
            raise ValueError("the quasi-random design is available for n = 2 only")
        m = max(1, round(math.log2(max(N // replicates, 2))))
        seeds = np.random.SeedSequence(seed).spawn(replicates)

        def rep(ss):
            if uncoupled:
                U1 = qmc.Sobol(4, scramble=True, seed=np.random.default_rng(ss)).random_base2(m)
                U2 = qmc.Sobol(4, scramble=True, seed=np.random.default_rng(ss.spawn(1)[0])).random_base2(m)
                gS, gU = coupled_pair_from_cube(U1)[0], coupled_pair_from_cube(U2)[1]
            else:
                U = qmc.Sobol(4, scramble=True, seed=np.random.default_rng(ss)).random_base2(m)
                gS, gU = coupled_pair_from_cube(U)
            return float(np.mean(vol(realify_batch(gS)) - vol(realify_batch(gU))))

        means = np.array(_run(rep, seeds, workers))
        mean = means.mean()
        stderr = float(means.std(ddof=1) / math.sqrt(len(means))) if len(means) > 1 else math.inf
        total = replicates * 2 ** m
        method = "rqmc-coupled" if not uncoupled else "rqmc-uncoupled"
    else:
        sizes = [CHUNK] * (N // CHUNK) + ([N % CHUNK] if N % CHUNK else [])
        seeds = np.random.SeedSequence(seed).spawn(len(sizes))

        def chunk(task):
            ss, size = task
            r = np.random.default_rng(ss)
            if uncoupled:
                gS = coupled_pair(n, r, size)[0]
                gU = sample_unitary(n, r, size)
            else:
                gS, gU = coupled_pair(n, r, size)
            x = vol(realify_batch(gS)) - vol(realify_batch(gU))
            return x.sum(), (x * x).sum(), len(x)

        parts = _run(chunk, list(zip(seeds, sizes)), workers)
        s = sum(p[0] for p in parts)
        s2 = sum(p[1] for p in parts)
        total = sum(p[2] for p in parts)
        mean = s / total
        var = max(s2 / total - mean * mean, 0.0) * total / max(total - 1, 1)
        stderr = math.sqrt(var / total)
        method = "mc-coupled" if not uncoupled else "mc-uncoupled"
    if reference == "auto":
        reference = kinematic_correction(K, L, n) if n == 2 else None
    return MCEstimate(complex(mean), stderr, total, seed, reference, method)


def additive_kinematic_delta(K, L, n, N, rng=None, seed=None, design="auto", replicates=16,
                             workers=1, reference="auto", uncoupled=False):
    """Estimate of the SU(n) minus U(n) average of vol(K + g L).

    ``design`` is "mc" (coupled Haar pairs) or "rqmc" (scrambled Sobol points
    on SU(2) x U(1), n = 2 only; the standard error comes from independent
    scrambles). The default reference is the phi_1/phi_2 correction term.
    """
    return _delta(K, L, n, N, rng, seed, design, replicates, workers, reference, False, uncoupled)


def principal_kinematic_delta(K, L, n, N, rng=None, seed=None, design="auto", replicates=16,
                              workers=1, reference="auto"):
    """Same delta for the Euler characteristic: the translation integral of
    chi(K ∩ (gL + t)) equals vol(K + (-gL))."""
    return _delta(K, L, n, N, rng, seed, design, replicates, workers, reference, True)


# ---- intersections of parallelotopes ------------------------------------------

class Slabs:
    """Intersection of slabs ``lo_j <= <n_j, x> <= hi_j`` in R^4 (unit n_j)."""

    def __init__(self, normals, lo, hi):
        self.normals = np.asarray(normals, dtype=float)
        self.lo = np.asarray(lo, dtype=float)
        self.hi = np.asarray(hi, dtype=float)

    @classmethod
    def from_polytope(cls, P):
        """Pairs opposite facets; fails for polytopes that are not parallelotopes."""
        N, off = P.halfspaces
        used, normals, lo, hi = set(), [], [], []
        for i in range(len(off)):
            if i in used:
                continue
            j = next((j for j in range(len(off)) if j not in used and j != i
                      and np.abs(N[i] + N[j]).max() <= 1e-9), None)
            if j is None:
                raise UnsupportedBody("body is not an intersection of slabs")
            used |= {i, j}
            normals.append(N[i])
            lo.append(-off[j])
            hi.append(off[i])
        return cls(normals, lo, hi)

    def moved(self, R, t):
        """Slabs of ``g L + t`` for the real orthogonal matrix R of g."""
        N = self.normals @ R.T
        s = N @ t
        return Slabs(N, self.lo + s, self.hi + s)


def _outer_normals(normals):
    # halfspace 2j is <n_j,x> >= lo_j (outer normal -n_j), 2j+1 is <n_j,x> <= hi_j
    out = np.empty((2 * len(normals), normals.shape[1]))
    out[0::2] = -normals
    out[1::2] = normals
    return out


class _TranslationBatch:
    """Vertices of ``K ∩ (g L + t)`` for fixed K, L, g and many translations t."""

    def __init__(self, SK, SL, R):
        gl = SL.normals @ R.T
        self.normals = np.vstack([SK.normals, gl])
        self.s = len(self.normals)
        self.lo0 = np.concatenate([SK.lo, SL.lo])
        self.hi0 = np.concatenate([SK.hi, SL.hi])
        self.k = len(SK.lo)
        combos = np.array(list(combinations(range(self.s), 4)))
        M = self.normals[combos]
        ok = np.abs(np.linalg.det(M)) > 1e-12
        self.combos = combos[ok]
        self.inv = np.linalg.inv(M[ok])
        self.sides = np.array(list(product((0, 1), repeat=4)))

    def bounds(self, T):
        shift = np.zeros((len(T), self.s))
        shift[:, self.k:] = T @ self.normals[self.k:].T
        return self.lo0 + shift, self.hi0 + shift

    def vertices(self, T):
        """Per translation: (vertex array, tight mask over the 2s halfspaces)."""
        lo, hi = self.bounds(T)
        both = np.stack([lo, hi], axis=-1)                            # T x s x 2
        beta = both[:, self.combos[:, None, :], self.sides[None, :, :]]  # T x c x 16 x 4
        X = np.einsum("cij,tcsj->tcsi", self.inv, beta)
        vals = X @ self.normals.T                                      # T x c x 16 x s
        scale = TOL * max(1.0, np.abs(both).max())
        feas = ((vals >= lo[:, None, None, :] - scale) & (vals <= hi[:, None, None, :] + scale)).all(-1)
        out = []
        for i in range(len(T)):
            Xi = X[i][feas[i]]
            if len(Xi) < 5:
                out.append(None)
                continue
            Xi = _unique_rows(Xi, 1e-8 * max(1.0, np.abs(Xi).max()))
            v = Xi @ self.normals.T
            tight = np.empty((len(Xi), 2 * self.s), dtype=bool)
            tight[:, 0::2] = np.abs(v - lo[i]) <= 10 * scale
            tight[:, 1::2] = np.abs(v - hi[i]) <= 10 * scale
            out.append((Xi, tight))
        return out


def _unique_rows(X, tol):
    keys = np.round(X / tol).astype(np.int64)
    _, first = np.unique(keys, axis=0, return_index=True)
    return X[np.sort(first)]


def _polygon_area(V):
    c = V.mean(axis=0)
    rest = V - c
    _, _, Vt = np.linalg.svd(rest)
    x, y = rest @ Vt[0], rest @ Vt[1]
    order = np.argsort(np.arctan2(y, x))
    x, y = x[order], y[order]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def _klain_batch(u1, u2, kind):
    """Klain values on the 2-planes with orthonormal bases u1, u2 (rows) in C^2.

    The planes are the normal planes of the faces; for n = 2, Theta^2 and
    Theta * cos agree on a plane and on its orthogonal complement.
    """
    if kind == "one":
        return np.ones(len(u1))
    z1 = u1[:, 0::2] + 1j * u1[:, 1::2]
    z2 = u2[:, 0::2] + 1j * u2[:, 1::2]
    theta = z1[:, 0] * z2[:, 1] - z1[:, 1] * z2[:, 0]
    if kind == "phi2":
        return theta * theta
    # w = <J u1, u2> is the Pfaffian of the Gram matrix <J w_i, w_j>; orienting
    # the basis to make it positive turns Theta * |w| into Theta * w
    ju1 = np.empty_like(u1)
    ju1[:, 0::2] = -u1[:, 1::2]
    ju1[:, 1::2] = u1[:, 0::2]
    w = (ju1 * u2).sum(axis=1)
    return np.where(np.abs(w) > 1e-12, theta * w, 0j)


def _face_term(X, rows, hs, outer, kind):
    """gamma * area * Klain value for one 2-face, any number of tight facets."""
    N = outer[hs]
    _, sv, Vt = np.linalg.svd(N)
    if (sv > 1e-9).sum() != 2:
        return 0j
    P = N @ Vt[:2].T
    P /= np.linalg.norm(P, axis=1, keepdims=True)
    gamma = np.arccos(np.clip((P @ P.T).min(), -1.0, 1.0)) / (2 * math.pi)
    kl = _klain_batch(Vt[:1], Vt[1:2], kind)[0]
    return gamma * _polygon_area(X[rows]) * kl


def _face_sum(X, tight, outer, kind):
    """Value of a degree-2 valuation (kind: phi1, phi2, one) on a polytope in R^4.

    X are the vertices and tight[i, j] says whether halfspace j (outer normal
    outer[j]) is active at vertex i. Two facets sharing three vertices meet
    in a 2-face.
    """
    ti = tight.astype(np.int32)
    ii, jj = np.nonzero(np.triu(ti.T @ ti >= 3, 1))
    if len(ii) == 0:
        return 0j
    masks = (tight[:, ii] & tight[:, jj]).T
    masks = masks[np.sort(np.unique(masks, axis=0, return_index=True)[1])]
    alltight = ~(masks[:, :, None] & ~tight[None]).any(axis=1)
    generic = alltight.sum(axis=1) == 2
    total = 0j
    for f in np.flatnonzero(~generic):
        total += _face_term(X, np.flatnonzero(masks[f]), np.flatnonzero(alltight[f]), outer, kind)
    masks, alltight = masks[generic], alltight[generic]
    if len(masks) == 0:
        return total
    hs = np.nonzero(alltight)[1].reshape(-1, 2)
    n1, n2 = outer[hs[:, 0]], outer[hs[:, 1]]
    c = np.clip((n1 * n2).sum(axis=1), -1.0, 1.0)
    gamma = np.arccos(c) / (2 * math.pi)
    u2 = n2 - c[:, None] * n1
    u2 /= np.linalg.norm(u2, axis=1, keepdims=True)
    kl = _klain_batch(n1, u2, kind)
    # face areas: coordinates in the face plane, angular order, shoelace
    _, _, Vt = np.linalg.svd(np.stack([n1, u2], axis=1))
    W = Vt[:, 2:, :]
    Y = np.einsum("vd,fkd->fvk", X, W)
    cnt = masks.sum(axis=1)
    cen = (Y * masks[:, :, None]).sum(axis=1) / cnt[:, None]
    rel = (Y - cen[:, None, :]) * masks[:, :, None]
    ang = np.where(masks, np.arctan2(rel[..., 1], rel[..., 0]), 10.0)
    order = np.argsort(ang, axis=1)
    rel = np.take_along_axis(rel, order[:, :, None], axis=1)
    x, y = rel[..., 0], rel[..., 1]
    s = (x[:, :-1] * y[:, 1:] - x[:, 1:] * y[:, :-1]).sum(axis=1)
    last = cnt - 1
    r = np.arange(len(x))
    s += x[r, last] * y[:, 0] - x[:, 0] * y[r, last]
    area = 0.5 * np.abs(s)
    return total + complex((gamma * area * kl).sum())


def _integrand(kind, X, tight, outer):
    if kind == "vol":
        try:
            return ConvexHull(X).volume
        except Exception:  # qhull rejects flat point sets
            return 0.0
    return _face_sum(X, tight, outer, kind)


def _body_slabs(K):
    if isinstance(K, Zonotope):
        K = K.to_polytope()
    return Slabs.from_polytope(K), K


_KINDS = {"phi1": "phi1", "phi2": "phi2", "vol": "vol", "one_2": "one"}


def _translation_integral(kind, SK, SL, VK, VL, R, U):
    """Integral over t of mu(K ∩ (gL + t)) from quasi-random points U in [0,1)^4."""
    gV = VL @ R.T
    lo = VK.min(axis=0) - gV.max(axis=0) - 1e-9
    hi = VK.max(axis=0) - gV.min(axis=0) + 1e-9
    T = lo + U * (hi - lo)
    batch = _TranslationBatch(SK, SL, R)
    outer = _outer_normals(batch.normals)
    total = 0j
    for start in range(0, len(T), 256):
        for item in batch.vertices(T[start:start + 256]):
            if item is not None:
                total += _integrand(kind, item[0], item[1], outer)
    return total / len(T) * float(np.prod(hi - lo))


def reproducing_check(mu, K, L, N_g, N_t, rng=None, seed=None, workers=1, reference="auto"):
    """Estimate of the SU(2) average of the integral over t of mu(K ∩ (gL + t)).

    One Haar g per replicate and N_t scrambled Sobol translations in the
    bounding box of K + (-gL); the standard error comes from the spread over
    the N_g independent replicates. mu is phi1, phi2, vol or one_2.
    """
    if mu not in _KINDS:
        raise KeyError(f"reproducing_check supports {', '.join(_KINDS)}")
    kind = _KINDS[mu]
    SK, PK = _body_slabs(K)
    SL, PL = _body_slabs(L)
    if PK.ambient_dim != 4 or PL.ambient_dim != 4:
        raise UnsupportedBody("intersections are computed in R^4 (n = 2)")
    seed = _seed_of(rng, seed)
    m = max(1, round(math.log2(max(N_t, 2))))
    seeds = np.random.SeedSequence(seed).spawn(N_g)

    def rep(ss):
        r = np.random.default_rng(ss)
        R = realify_batch(sample_special_unitary(2, r, 1))[0]
        U = qmc.Sobol(4, scramble=True, seed=r).random_base2(m)
        return _translation_integral(kind, SK, SL, PK.vertices, PL.vertices, R, U)

    vals = np.array(_run(rep, seeds, workers))
    if reference == "auto":
        reference = _reproducing_reference(mu, PK, PL)
    return MCEstimate(complex(vals.mean()), _stderr(vals), N_g * 2 ** m, seed, reference, "rqmc-translations")


def _stderr(vals):
    if len(vals) < 2:
        return math.inf
    return float(np.sqrt(np.var(vals.real, ddof=1) + np.var(vals.imag, ddof=1)) / math.sqrt(len(vals)))


def _reproducing_reference(mu, P, Q):
    if mu == "vol":
        return complex(P.volume * Q.volume)
    if mu == "one_2":
        return None
    v = valuation(mu, 2)
    return complex(evaluate(v, P) * Q.volume + P.volume * evaluate(v, Q))


def u_invariant_delta(K, L, N_g, N_t, rng=None, seed=None, workers=1):
    """SU(2) minus U(2) average of the translation integral of mu_2(K ∩ (gL + t)).

    Uses coupled pairs (g_SU, g_U) and the same quasi-random points for both
    members of a pair. For a U(n)-invariant valuation the difference is 0.
    """
    SK, PK = _body_slabs(K)
    SL, PL = _body_slabs(L)
    seed = _seed_of(rng, seed)
    m = max(1, round(math.log2(max(N_t, 2))))
    seeds = np.random.SeedSequence(seed).spawn(N_g)

    def rep(ss):
        r = np.random.default_rng(ss)
        gS, gU = coupled_pair(2, r, 1)
        U = qmc.Sobol(4, scramble=True, seed=r).random_base2(m)
        a = _translation_integral("one", SK, SL, PK.vertices, PL.vertices, realify_batch(gS)[0], U)
        b = _translation_integral("one", SK, SL, PK.vertices, PL.vertices, realify_batch(gU)[0], U)
        return a - b

    vals = np.array(_run(rep, seeds, workers))
    return MCEstimate(complex(vals.mean()), _stderr(vals), 2 * N_g * 2 ** m, seed, 0j, "rqmc-coupled")
