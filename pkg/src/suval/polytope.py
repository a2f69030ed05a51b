"""Convex polytopes with faces, face volumes and normalized exterior angles.

A polytope keeps its vertices, the outer normals and offsets of its facets
(inside the direction space of its affine hull) and the vertex/facet
incidence. Faces of every dimension are read off the incidence: each k-face
is cut out by some set of ``p - k`` facets, p being the dimension of the
polytope.

The exterior angle of a face F is the fraction of unit vectors in the normal
space of F that lie in the normal cone of F (equivalently, whose support set
on P is exactly F).
"""

import math
from dataclasses import dataclass, field
from itertools import combinations, product

import numpy as np
from scipy.integrate import quad
from scipy.spatial import ConvexHull

from .numkernel import orthonormalize, realify

TOL = 1e-9
MAX_GENERAL_DIM = 4
MC_SAMPLES = 20000
MC_SEED = 20240


class UnsupportedDimension(ValueError):
    pass


class DegeneratePolytope(ValueError):
    pass


class ExactUnavailable(ValueError):
    pass


class NotOrthogonal(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


class LowerDimensional(ValueError):
    """Raised when an intersection has empty interior; carries the result."""

    def __init__(self, polytope):
        super().__init__(f"intersection has dimension {polytope.dim}")
        self.polytope = polytope


@dataclass(frozen=True, eq=False)
class Face:
    dim: int
    vertices: tuple
    basis: np.ndarray          # dim x d orthonormal rows spanning W_F
    volume: float
    exterior_angle: float
    angle_stderr: float = 0.0  # 0 for exactly computed angles
    normals: np.ndarray = field(default=None, repr=False)  # outer normals of facets containing F


def _affine_hull(V):
    """Centroid and orthonormal basis (rows) of the direction space of aff(V)."""
    c = V.mean(axis=0)
    X = V - c
    if len(V) == 1:
        return c, np.zeros((0, V.shape[1]))
    _, s, Vt = np.linalg.svd(X, full_matrices=False)
    scale = max(1.0, np.abs(X).max())
    p = int((s > TOL * scale).sum())
    return c, Vt[:p].copy()


def _rank(X, scale=1.0):
    if len(X) == 0:
        return 0
    s = np.linalg.svd(np.atleast_2d(X), compute_uv=False)
    return int((s > TOL * max(scale, 1.0)).sum())


class Polytope:
    """Convex polytope in R^d."""

    def __init__(self, vertices, normals=None, offsets=None, incidence=None, _checked=False):
        V = np.atleast_2d(np.asarray(vertices, dtype=float))
        if normals is None:
            if V.shape[1] > MAX_GENERAL_DIM:
                raise UnsupportedDimension(
                    f"general polytopes are supported up to R^{MAX_GENERAL_DIM}; "
                    "use the box/parallelotope constructors in higher dimension")
            V, normals, offsets, incidence = _hull_data(V)
        self.vertices = V
        self.normals = np.asarray(normals, dtype=float).reshape(-1, V.shape[1])
        self.offsets = np.asarray(offsets, dtype=float).reshape(-1)
        self.incidence = np.asarray(incidence, dtype=bool).reshape(len(V), len(self.offsets))
        self.center, self.directions = _affine_hull(V)
        self._faces = {}
        for a in (self.vertices, self.normals, self.offsets, self.incidence):
            a.setflags(write=False)

    # ---- constructors -------------------------------------------------------
    @classmethod
    def from_halfspaces(cls, normals, offsets):
        """Polytope ``{x : normals @ x <= offsets}`` (must be bounded)."""
        A = np.atleast_2d(np.asarray(normals, dtype=float))
        b = np.asarray(offsets, dtype=float).reshape(-1)
        if A.shape[1] > MAX_GENERAL_DIM:
            raise UnsupportedDimension(f"H-representations are supported up to R^{MAX_GENERAL_DIM}")
        P = _from_hrep(A, b)
        if P is None:
            raise DegeneratePolytope("halfspaces have empty intersection")
        return P

    @classmethod
    def from_parallelotope(cls, base, generators):
        """``base + sum_i t_i g_i`` with t in [0,1]^m, built combinatorially."""
        base = np.asarray(base, dtype=float)
        G = np.atleast_2d(np.asarray(generators, dtype=float))
        m, d = G.shape
        if base.shape != (d,):
            raise DimensionMismatch("base point and generators have different dimensions")
        orthonormalize(G)  # raises RankDeficient for dependent generators
        bits = np.array(list(product((0, 1), repeat=m)), dtype=float).reshape(-1, m)
        V = base + bits @ G
        # dual vectors u_j with <u_j, g_i> = delta_ij inside span(G)
        U = np.linalg.pinv(G).T
        normals, offsets, cols = [], [], []
        for j in range(m):
            u = U[j] / np.linalg.norm(U[j])
            h0 = u @ base
            hj = u @ G[j]
            normals += [-u, u]
            offsets += [-h0, h0 + hj]
            cols += [bits[:, j] == 0, bits[:, j] == 1]
        inc = np.array(cols).T if cols else np.zeros((len(V), 0), dtype=bool)
        return cls(V, np.array(normals).reshape(-1, d), offsets, inc)

    @classmethod
    def box(cls, sides, base=None):
        sides = np.asarray(sides, dtype=float)
        base = np.zeros(len(sides)) if base is None else base
        return cls.from_parallelotope(base, np.diag(sides))

    @classmethod
    def simplex(cls, d):
        """Standard simplex conv(0, e_1, ..., e_d)."""
        V = np.vstack([np.zeros(d), np.eye(d)])
        normals = [-np.eye(d)[i] for i in range(d)] + [np.ones(d) / math.sqrt(d)]
        offsets = [0.0] * d + [1 / math.sqrt(d)]
        inc = np.array([[abs(np.dot(nv, v) - o) <= TOL for nv, o in zip(normals, offsets)]
                        for v in V])
        return cls(V, np.array(normals), offsets, inc)

    # ---- basic data ---------------------------------------------------------
    @property
    def ambient_dim(self):
        return self.vertices.shape[1]

    @property
    def dim(self):
        return self.directions.shape[0]

    @property
    def volume(self):
        """d-dimensional volume (0 for polytopes with empty interior)."""
        if self.dim < self.ambient_dim:
            return 0.0
        return _k_volume(self.vertices, np.eye(self.ambient_dim))

    @property
    def halfspaces(self):
        if self.dim < self.ambient_dim:
            raise DegeneratePolytope("H-representation needs a full-dimensional polytope")
        return self.normals, self.offsets

    def to_dict(self):
        return {"vertices": self.vertices.tolist()}

    # ---- faces --------------------------------------------------------------
    def faces(self, k):
        """All k-dimensional faces."""
        if k not in self._faces:
            self._faces[k] = self._enumerate_faces(k)
        return self._faces[k]

    def _intrinsic(self, X):
        return (np.asarray(X) - self.center) @ self.directions.T

    def _enumerate_faces(self, k):
        p = self.dim
        if not 0 <= k <= p:
            return []
        nf = len(self.offsets)
        if k == p:
            sets = [tuple(range(len(self.vertices)))]
        elif k == 0:
            sets = [(i,) for i in range(len(self.vertices))]
        else:
            found = {}
            for S in combinations(range(nf), p - k):
                rows = np.flatnonzero(self.incidence[:, list(S)].all(axis=1))
                if len(rows) < k + 1:
                    continue
                key = tuple(rows)
                if key in found:
                    continue
                if _rank(self.vertices[rows] - self.vertices[rows[0]]) == k:
                    found[key] = True
            sets = sorted(found)
        return [self._make_face(k, vs) for vs in sets]

    def _make_face(self, k, vs):
        vs = tuple(int(v) for v in vs)
        X = self.vertices[list(vs)]
        basis = orthonormalize(_span_rows(X - X[0], k)) if k else np.zeros((0, self.ambient_dim))
        vol = _k_volume(X, basis)
        facets = np.flatnonzero(self.incidence[list(vs)].all(axis=0)) if k < self.dim else []
        normals = self.normals[facets] if len(facets) else np.zeros((0, self.ambient_dim))
        face = Face(k, vs, basis, vol, float("nan"), 0.0, normals)
        try:
            gamma, err = _exact_angle(self, face), 0.0
        except ExactUnavailable:
            rng = np.random.default_rng([MC_SEED, len(vs), *vs])
            gamma, err = _mc_angle(self, face, rng, MC_SAMPLES)
        return Face(k, vs, basis, vol, gamma, err, normals)

    def contains(self, x, tol=TOL):
        x = np.asarray(x, dtype=float)
        if np.abs((x - self.center) - ((x - self.center) @ self.directions.T) @ self.directions).max() > tol:
            return False
        return bool((self.normals @ x <= self.offsets + tol).all())


def _span_rows(X, k):
    """k rows of X spanning its row space."""
    _, _, Vt = np.linalg.svd(X)
    return Vt[:k]


def _k_volume(X, basis):
    k = basis.shape[0]
    if k == 0:
        return 1.0
    Y = (X - X[0]) @ basis.T
    if k == 1:
        return float(Y.max() - Y.min())
    return float(ConvexHull(Y).volume)


def _hull_data(V):
    """Extreme points, facets and incidence of conv(V) via its affine hull."""
    c, D = _affine_hull(V)
    p = D.shape[0]
    Y = (V - c) @ D.T
    scale = max(1.0, np.abs(Y).max())
    if p == 0:
        return V[:1], np.zeros((0, V.shape[1])), [], np.zeros((1, 0), dtype=bool)
    if p == 1:
        y = Y[:, 0]
        i, j = int(np.argmin(y)), int(np.argmax(y))
        W = V[[i, j]]
        u = D[0]
        normals = np.array([-u, u])
        offsets = [-(u @ W[0]), u @ W[1]]
        return W, normals, offsets, np.array([[True, False], [False, True]])
    hull = ConvexHull(Y)
    ext = np.sort(hull.vertices)
    W, Yw = V[ext], Y[ext]
    eqs = []
    for eq in hull.equations:
        nv, off = eq[:-1], -eq[-1]
        if not any(np.abs(nv - a).max() <= 1e-8 and abs(off - b) <= 1e-8 * scale for a, b in eqs):
            eqs.append((nv, off))
    normals_i = np.array([a for a, _ in eqs])
    offsets_i = np.array([b for _, b in eqs])
    inc = np.abs(Yw @ normals_i.T - offsets_i) <= TOL * scale
    # back to ambient coordinates: n . x <= off + n . c  in the hull
    normals = normals_i @ D
    offsets = offsets_i + normals @ c
    return W, normals, offsets, inc


def hrep_vertices(A, b, tol=TOL):
    """Brute-force vertex enumeration of ``{x : A x <= b}``.

    Returns (vertices, tight) where ``tight[i, j]`` tells whether halfspace j
    is active at vertex i. Near-singular d-subsets are skipped.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float)
    m, d = A.shape
    if m < d:
        return np.zeros((0, d)), np.zeros((0, m), dtype=bool)
    idx = np.array(list(combinations(range(m), d)))
    M = A[idx]
    dets = np.linalg.det(M)
    ok = np.abs(dets) > 1e-12
    idx, M = idx[ok], M[ok]
    X = np.linalg.solve(M, b[idx][..., None])[..., 0]
    scale = max(1.0, np.abs(b).max())
    feas = (X @ A.T <= b + tol * scale).all(axis=1)
    X = X[feas]
    if len(X) == 0:
        return np.zeros((0, d)), np.zeros((0, m), dtype=bool)
    X = _dedupe(X, tol * scale * 10)
    tight = np.abs(X @ A.T - b) <= tol * scale * 10
    return X, tight


def _dedupe(X, tol):
    order = np.lexsort(X.T[::-1])
    X = X[order]
    keep = [0]
    for i in range(1, len(X)):
        if np.abs(X[i] - X[keep]).max(axis=1).min() > tol:
            keep.append(i)
    return X[keep]


def _clean_halfspaces(A, b):
    """Unit normals, duplicates removed."""
    norms = np.linalg.norm(A, axis=1)
    A, b = A / norms[:, None], b / norms
    keep = []
    for i in range(len(b)):
        if not any(np.abs(A[i] - A[j]).max() <= 1e-12 and abs(b[i] - b[j]) <= 1e-12 for j in keep):
            keep.append(i)
    return A[keep], b[keep]


def _from_hrep(A, b):
    A, b = _clean_halfspaces(A, b)
    X, tight = hrep_vertices(A, b)
    if len(X) == 0:
        return None
    # keep facet-defining halfspaces only
    facets = [j for j in range(len(b))
              if tight[:, j].sum() >= 1 and _rank(X[tight[:, j]] - X[tight[:, j]][0]) == _rank(X - X[0]) - 1]
    P = Polytope(X, A[facets], b[facets], tight[:, facets])
    return P


def _facet_normals_intrinsic(P, face):
    """Normal-cone generators of ``face`` as unit vectors in its normal space."""
    d = P.ambient_dim
    if face.dim:
        proj = np.eye(d) - face.basis.T @ face.basis
    else:
        proj = np.eye(d)
    # normal space of F inside the direction space of aff(P)
    D = P.directions
    N = D @ proj
    _, s, Vt = np.linalg.svd(N, full_matrices=False) if len(N) else (None, np.zeros(0), None)
    c = P.dim - face.dim
    Nb = Vt[:c] if c else np.zeros((0, d))
    G = face.normals @ Nb.T if c else np.zeros((0, 0))
    if len(G):
        G = G / np.linalg.norm(G, axis=1, keepdims=True)
    return G, Nb


def cone_fraction(G):
    """Fraction of the unit sphere of R^c covered by the cone spanned by rows of G.

    Exact for c <= 3, for orthants and for simplicial cones in R^4;
    otherwise raises ExactUnavailable.
    The rows are assumed to be the extreme rays of a pointed cone.
    """
    G = np.atleast_2d(np.asarray(G, dtype=float))
    c = G.shape[1] if G.size else 0
    if c == 0:
        return 1.0
    r = G.shape[0]
    if c == 1:
        return 0.5
    if c == 2:
        cosines = np.clip(G @ G.T, -1.0, 1.0)
        return float(np.arccos(cosines.min()) / (2 * math.pi))
    if r == c and np.abs(G @ G.T - np.eye(c)).max() <= 1e-10:
        return 2.0 ** -c
    if c == 3:
        return _solid_angle(G) / (4 * math.pi)
    if c == 4 and r == 4:
        return _simplicial_fraction_4d(G)
    raise ExactUnavailable(f"no exact formula for a {c}-dimensional normal cone")


def _solid_angle(G):
    """Solid angle of a pointed polyhedral cone in R^3 (rows = extreme rays)."""
    axis = G.mean(axis=0)
    axis /= np.linalg.norm(axis)
    e1 = G[0] - (G[0] @ axis) * axis
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(axis, e1)
    ang = np.arctan2(G @ e2, G @ e1)
    R = G[np.argsort(ang)]
    total = 0.0
    a = R[0]
    for b, c in zip(R[1:-1], R[2:]):
        num = abs(a @ np.cross(b, c))
        den = 1 + a @ b + b @ c + c @ a
        total += 2 * math.atan2(num, den)
    return total


def _simplicial_fraction_4d(G):
    """Sphere fraction of the simplicial cone in R^4 spanned by the rows of G.

    Schlaefli's formula dV = 1/2 sum_edges len(e) d(dihedral angle) on S^3,
    integrated along the straight path of facet Gram matrices from the
    orthant (fraction 1/16) to the target cone.
    """
    G = G / np.linalg.norm(G, axis=1, keepdims=True)
    H = np.linalg.inv(G @ G.T)
    d = np.sqrt(np.diag(H))
    # Gram matrix of the unit inner facet normals of the cone
    target = H / np.outer(d, d)
    pairs = [((i, j), tuple(k for k in range(4) if k not in (i, j)))
             for i, j in combinations(range(4), 2)]

    def rate(t):
        Gt = (1 - t) * np.eye(4) + t * target
        R = np.linalg.inv(Gt)
        total = 0.0
        for (i, j), (k, l) in pairs:
            g = target[i, j]
            if g == 0.0:
                continue
            # the edge on facets i, j joins the rays opposite k and l
            cos_len = R[k, l] / math.sqrt(R[k, k] * R[l, l])
            length = math.acos(min(1.0, max(-1.0, cos_len)))
            total += length * g / math.sqrt(1 - (t * g) ** 2)
        return total

    integral, _ = quad(rate, 0.0, 1.0, epsabs=1e-13, epsrel=1e-12, limit=200)
    return float(1 / 16 + integral / (4 * math.pi ** 2))


def _exact_angle(P, face):
    G, _ = _facet_normals_intrinsic(P, face)
    return cone_fraction(G)


def _mc_angle(P, face, rng, samples):
    _, Nb = _facet_normals_intrinsic(P, face)
    c = Nb.shape[0]
    if c == 0:
        return 1.0, 0.0
    u = rng.standard_normal((samples, c)) @ Nb
    h = u @ P.vertices.T
    v0 = P.vertices[face.vertices[0]]
    scale = max(1.0, np.abs(P.vertices).max())
    hit = (u @ v0 >= h.max(axis=1) - 1e-12 * scale)
    mean = float(hit.mean())
    return mean, float(math.sqrt(max(mean * (1 - mean), 1e-300) / samples))


def exterior_angle(P, F, method="auto", rng=None, samples=MC_SAMPLES, return_stderr=False):
    """Normalized exterior angle of face F of P.

    ``method`` is "exact", "monte_carlo" or "auto" (exact when available).
    """
    if method not in ("auto", "exact", "monte_carlo"):
        raise ValueError(f"unknown method {method!r}")
    if method != "monte_carlo":
        try:
            val, err = _exact_angle(P, F), 0.0
        except ExactUnavailable:
            if method == "exact":
                raise
            method = "monte_carlo"
    if method == "monte_carlo":
        rng = rng if rng is not None else np.random.default_rng([MC_SEED, *F.vertices])
        val, err = _mc_angle(P, F, rng, samples)
    return (val, err) if return_stderr else val


# ---- zonotopes -----------------------------------------------------------------

def zonotope_volume(generators):
    """Volume of the zonotope spanned by the generators (sum of |det| over d-subsets).

    ``generators`` is (m, d) or a batch (B, m, d).
    """
    G = np.asarray(generators, dtype=float)
    batched = G.ndim == 3
    if not batched:
        G = G[None]
    B, m, d = G.shape
    if m < d:
        out = np.zeros(B)
    else:
        idx = np.array(list(combinations(range(m), d)))
        out = np.abs(np.linalg.det(G[:, idx])).sum(axis=1)
    return out if batched else float(out[0])


@dataclass(frozen=True, eq=False)
class Zonotope:
    """``base + sum_i t_i g_i``, t in [0,1]^m."""

    base: np.ndarray
    generators: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.base, dtype=float)
        G = np.asarray(self.generators, dtype=float).reshape(-1, b.shape[0])
        object.__setattr__(self, "base", b)
        object.__setattr__(self, "generators", G)

    @property
    def ambient_dim(self):
        return self.base.shape[0]

    @property
    def volume(self):
        return zonotope_volume(self.generators)

    def to_polytope(self):
        G = self.generators
        if len(G) == self.ambient_dim and _rank(G) == len(G):
            return Polytope.from_parallelotope(self.base, G)
        bits = np.array(list(product((0, 1), repeat=len(G))), dtype=float).reshape(-1, len(G))
        return Polytope(self.base + bits @ G)

    def to_dict(self):
        return {"parallelotope": {"base": self.base.tolist(), "generators": self.generators.tolist()}}


class Parallelotope(Zonotope):
    """Zonotope with linearly independent generators, one per dimension."""

    def __post_init__(self):
        super().__post_init__()
        if len(self.generators) != self.ambient_dim:
            raise DimensionMismatch("a parallelotope needs as many generators as dimensions")
        orthonormalize(self.generators)


def minkowski_sum_zonotope(Z1, Z2):
    if Z1.ambient_dim != Z2.ambient_dim:
        raise DimensionMismatch("zonotopes live in different dimensions")
    return Zonotope(Z1.base + Z2.base, np.vstack([Z1.generators, Z2.generators]))


# ---- intersections and motions -------------------------------------------------

def intersect_hrep(P, Q):
    """P ∩ Q by brute-force vertex enumeration; None when empty.

    Raises LowerDimensional when the intersection has empty interior.
    """
    if P.ambient_dim != Q.ambient_dim:
        raise DimensionMismatch("polytopes live in different dimensions")
    if P.ambient_dim > MAX_GENERAL_DIM:
        raise UnsupportedDimension(f"intersections are supported up to R^{MAX_GENERAL_DIM}")
    A1, b1 = P.halfspaces
    A2, b2 = Q.halfspaces
    R = _from_hrep(np.vstack([A1, A2]), np.concatenate([b1, b2]))
    if R is None:
        return None
    if R.dim < R.ambient_dim:
        raise LowerDimensional(R)
    return R


def transform(P, g, t=None, tol=1e-9):
    """Image ``g P + t`` under an orthogonal (real 2n x 2n) or unitary (n x n) g."""
    g = np.asarray(g)
    d = P.ambient_dim
    if np.iscomplexobj(g) or g.shape == (d // 2, d // 2):
        g = realify(g)
    g = np.asarray(g, dtype=float)
    if g.shape != (d, d):
        raise DimensionMismatch(f"map of shape {g.shape} on R^{d}")
    if np.abs(g @ g.T - np.eye(d)).max() > tol:
        raise NotOrthogonal("map is not orthogonal")
    t = np.zeros(d) if t is None else np.asarray(t, dtype=float)
    V = P.vertices @ g.T + t
    N = P.normals @ g.T
    off = P.offsets + N @ t
    return Polytope(V, N, off, P.incidence)


def translate(P, t):
    return transform(P, np.eye(P.ambient_dim), t)


def scale(P, s):
    """Homothetic image s P (s > 0)."""
    if s <= 0:
        raise ValueError("scale factor must be positive")
    return Polytope(P.vertices * s, P.normals, P.offsets * s, P.incidence)


def reflect(P):
    """The polytope -P."""
    return Polytope(-P.vertices, -P.normals, P.offsets, P.incidence)


def polytope_from_dict(data):
    """Polytope from one of the JSON forms (vertices, halfspaces, parallelotope)."""
    if "vertices" in data:
        return Polytope(data["vertices"])
    if "halfspaces" in data:
        hs = data["halfspaces"]
        return Polytope.from_halfspaces([h["normal"] for h in hs], [h["offset"] for h in hs])
    if "parallelotope" in data:
        p = data["parallelotope"]
        return Polytope.from_parallelotope(p["base"], p["generators"])
    raise ValueError("polytope JSON needs 'vertices', 'halfspaces' or 'parallelotope'")


def zonotope_from_dict(data):
    if "parallelotope" in data:
        p = data["parallelotope"]
        return Zonotope(p["base"], p["generators"])
    if "zonotope" in data:
        p = data["zonotope"]
        return Zonotope(p["base"], p["generators"])
    raise ValueError("zonotope JSON needs 'parallelotope' or 'zonotope'")
