"""Orbit invariants of real subspaces of C^n under U(n) and SU(n).

A subspace is stored as an orthonormal real basis in R^{2n} (rows), using the
interleaved coordinates of :mod:`suval.numkernel`.
"""

import math
from dataclasses import dataclass

import numpy as np

from .numkernel import (
    RankDeficient,
    complex_det,
    complex_structure,
    orthonormalize,
    pfaffian,
    skew_spectrum,
    to_complex,
    to_real,
)

ORTHO_TOL = 1e-10
ANGLE_TOL = 1e-8
# below this the restricted symplectic form is treated as degenerate
DEGENERATE_COS = 1e-10


class WrongDimension(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


class NotUnitary(ValueError):
    pass


class InconsistentTheta(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Subspace:
    """Real k-dimensional subspace of C^n with an orthonormal basis (k x 2n)."""

    n: int
    basis: np.ndarray

    def __post_init__(self):
        B = np.atleast_2d(np.asarray(self.basis, dtype=float))
        if B.shape[1] != 2 * self.n or not 0 < B.shape[0] <= 2 * self.n:
            raise WrongDimension(f"basis shape {B.shape} does not fit n={self.n}")
        if np.abs(B @ B.T - np.eye(B.shape[0])).max() > ORTHO_TOL:
            raise ValueError("basis is not orthonormal")
        B.setflags(write=False)
        object.__setattr__(self, "basis", B)

    @classmethod
    def from_vectors(cls, n, vectors):
        """Subspace spanned by arbitrary independent real 2n-vectors."""
        return cls(n, orthonormalize(vectors))

    @classmethod
    def from_complex(cls, vectors):
        """Subspace spanned by the given complex n-vectors, read as real vectors."""
        Z = np.atleast_2d(np.asarray(vectors, dtype=complex))
        return cls.from_vectors(Z.shape[1], to_real(Z))

    @property
    def dim(self):
        return self.basis.shape[0]

    @property
    def complex_basis(self):
        return to_complex(self.basis)

    def projector(self):
        return self.basis.T @ self.basis

    def same_span(self, other, tol=1e-9):
        return self.n == other.n and self.dim == other.dim and \
            np.abs(self.projector() - other.projector()).max() <= tol

    def to_dict(self):
        Z = self.complex_basis
        return {"n": self.n, "basis": [[[z.real, z.imag] for z in row] for row in Z]}

    @classmethod
    def from_dict(cls, data):
        n = int(data["n"])
        rows = [[complex(re, im) for re, im in row] for row in data["basis"]]
        if any(len(r) != n for r in rows):
            raise WrongDimension("every basis vector needs n complex entries")
        return cls.from_complex(rows)


@dataclass(frozen=True)
class ThetaValue:
    """Theta-invariant; ``mod_sign`` means the value is only defined up to sign.

    Sign-ambiguous values are stored with argument in [0, pi).
    """

    value: complex
    mod_sign: bool

    def __post_init__(self):
        v = complex(self.value)
        if self.mod_sign:
            v = _canonical_mod_sign(v)
        object.__setattr__(self, "value", v)

    def agrees(self, other, tol=1e-9):
        a, b = self.value, other.value
        if self.mod_sign or other.mod_sign:
            return min(abs(a - b), abs(a + b)) <= tol
        return abs(a - b) <= tol

    def to_dict(self):
        return {"value": [self.value.real, self.value.imag], "mod_sign": self.mod_sign}


def _canonical_mod_sign(v):
    r = abs(v)
    if r == 0.0:
        return 0j
    re, im = v.real, v.imag
    if abs(im) <= 1e-12 * r:
        im = 0.0
    if abs(re) <= 1e-12 * r:
        re = 0.0
    if im < 0 or (im == 0 and re < 0):
        re, im = -re, -im
    return complex(re + 0.0, im + 0.0)


def compressed_j(W):
    """Matrix of pi_W o J restricted to W in the basis of ``W`` (skew)."""
    J = complex_structure(W.n)
    A = W.basis @ J @ W.basis.T
    return 0.5 * (A - A.T)


def j_spectrum(W):
    """Values ``cos(theta_j)`` for the compressed complex structure, any dim."""
    return skew_spectrum(compressed_j(W))


def kaehler_angles(W):
    """Multiple Kaehler angle ``(theta_1 <= ... <= theta_m)`` of an n-plane."""
    if W.dim != W.n:
        raise WrongDimension(f"Kaehler angles need dim W = n = {W.n}, got {W.dim}")
    cs = j_spectrum(W)
    return tuple(math.acos(min(1.0, max(0.0, c))) for c in cs)


def is_symplectic(W):
    """True when the symplectic form restricted to the n-plane W is non-degenerate."""
    if W.n % 2:
        return False
    cs = j_spectrum(W)
    return min(cs) > DEGENERATE_COS


def theta_invariant(W):
    """Theta-invariant: complex determinant of an (oriented) orthonormal basis.

    When n is even and every Kaehler angle is below pi/2, the basis is oriented
    so that the Pfaffian of the Gram matrix <J w_i, w_j> is positive and the
    value is exact. Otherwise it is only defined up to sign.
    """
    if W.dim != W.n:
        raise WrongDimension(f"Theta needs dim W = n = {W.n}, got {W.dim}")
    det = complex_det(W.complex_basis)
    if not is_symplectic(W):
        return ThetaValue(det, True)
    # <J w_i, w_j> is the transpose of the compressed J matrix
    gram = -compressed_j(W)
    if pfaffian(gram) < 0:
        det = -det
    return ThetaValue(det, False)


def apply_unitary(g, W, tol=1e-9):
    g = np.asarray(g, dtype=complex)
    if g.shape != (W.n, W.n):
        raise DimensionMismatch(f"unitary of shape {g.shape} for n={W.n}")
    if np.abs(g @ g.conj().T - np.eye(W.n)).max() > tol:
        raise NotUnitary("matrix is not unitary")
    Z = W.complex_basis @ g.T
    B = to_real(Z)
    # re-orthonormalize to remove rounding drift of g
    return Subspace(W.n, orthonormalize(B))


def same_su_orbit(W1, W2, tol=ANGLE_TOL):
    """Whether some g in SU(n) maps W1 onto W2.

    For n-planes this compares Kaehler angles and Theta-invariants; for other
    dimensions the U(n)- and SU(n)-orbits coincide and only the spectrum of
    the compressed complex structure is compared.
    """
    if W1.n != W2.n or W1.dim != W2.dim:
        raise DimensionMismatch("subspaces of different shapes")
    s1, s2 = np.array(j_spectrum(W1)), np.array(j_spectrum(W2))
    if W1.dim != W1.n:
        return bool(np.abs(s1 - s2).max(initial=0.0) <= tol)
    a1, a2 = np.array(kaehler_angles(W1)), np.array(kaehler_angles(W2))
    if np.abs(a1 - a2).max(initial=0.0) > tol:
        return False
    return theta_invariant(W1).agrees(theta_invariant(W2), tol)


def standard_orbit_space(angles, n):
    """The n-plane ``sum_j [R e_{2j-1} + R(cos t_j i e_{2j-1} + sin t_j e_{2j})] (+ R e_n)``."""
    m = n // 2
    angles = tuple(float(t) for t in angles)
    if len(angles) != m:
        raise WrongDimension(f"need {m} angles for n={n}")
    if any(not -ANGLE_TOL <= t <= math.pi / 2 + ANGLE_TOL for t in angles):
        raise ValueError("Kaehler angles must lie in [0, pi/2]")
    if any(b < a - ANGLE_TOL for a, b in zip(angles, angles[1:])):
        raise ValueError("Kaehler angles must be sorted")
    rows = []
    for j, t in enumerate(angles):
        a, b = 2 * j, 2 * j + 1
        u = np.zeros(n, dtype=complex)
        u[a] = 1.0
        v = np.zeros(n, dtype=complex)
        v[a] = 1j * math.cos(t)
        v[b] = math.sin(t)
        rows += [u, v]
    if n % 2:
        u = np.zeros(n, dtype=complex)
        u[n - 1] = 1.0
        rows.append(u)
    return Subspace(n, to_real(np.array(rows)))


def orbit_representative(angles, theta, n, tol=1e-9):
    """An n-plane with the given Kaehler angles and Theta-invariant."""
    W = standard_orbit_space(angles, n)
    size = math.prod(math.sin(t) for t in angles)
    theta = complex(theta)
    if abs(abs(theta) - size) > tol:
        raise InconsistentTheta(f"|Theta| = {abs(theta):.12g} but prod sin = {size:.12g}")
    phase = theta / abs(theta) if size > tol else 1.0
    g = np.eye(n, dtype=complex)
    g[0, 0] = phase
    return apply_unitary(g, W)


def orthogonal_complement(W):
    """Real orthogonal complement in R^{2n} (None for the whole space)."""
    k = W.dim
    if k == 2 * W.n:
        return None
    _, _, Vt = np.linalg.svd(W.basis)
    return Subspace(W.n, Vt[k:].copy())


def random_subspace(n, k, rng):
    """Span of k standard Gaussian vectors in R^{2n} (O(2n)-invariant law)."""
    if not 1 <= k <= 2 * n:
        raise ValueError(f"need 1 <= k <= 2n, got k={k}")
    while True:
        try:
            return Subspace(n, orthonormalize(rng.standard_normal((k, 2 * n))))
        except RankDeficient:
            continue


def random_rotation_within(W, rng):
    """Same subspace with a basis rotated by a random element of SO(k)."""
    k = W.dim
    Q, R = np.linalg.qr(rng.standard_normal((k, k)))
    Q = Q * np.sign(np.diag(R))
    if np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    return Subspace(W.n, Q.T @ W.basis)
