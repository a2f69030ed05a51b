"""Differential forms with polynomial coefficients on C^n x C^n.

The 4n real coordinates are ordered ``x_1, y_1, ..., x_n, y_n`` followed by
``xi_1, eta_1, ..., xi_n, eta_n`` (``z_j = x_j + i y_j``, ``zeta_j = xi_j + i eta_j``),
and the one-forms ``dx_1, dy_1, ...`` use the same indices.

Coefficients are exact Gaussian rationals, stored as Gaussian-integer
numerators over one integer denominator per form. Irrational constants such
as powers of pi are kept in a separate floating ``scale`` that is only applied
at evaluation time.
"""

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations

import numpy as np

from .numkernel import unit_ball_volume, unit_sphere_area

EXP_BITS = 8
EXP_MASK = (1 << EXP_BITS) - 1


class DimensionMismatch(ValueError):
    pass


class DegreeMismatch(ValueError):
    pass


class ArityMismatch(ValueError):
    pass


class UnknownName(KeyError):
    pass


class BadIndex(ValueError):
    pass


class NotProportional(ValueError):
    pass


def _popcount(x):
    return bin(x).count("1")


def _wedge_sign(a, b):
    """Sign of sorting the generators of mask ``a`` followed by those of ``b``."""
    s = 0
    while b:
        low = b & -b
        s += _popcount(a & ~((low << 1) - 1))
        b ^= low
    return -1 if s & 1 else 1


def _as_gaussian(c):
    """Exact (re, im) Fractions of a scalar."""
    if isinstance(c, complex):
        return Fraction(c.real), Fraction(c.imag)
    return Fraction(c), Fraction(0)


class PolyForm:
    """Homogeneous differential form with polynomial coefficients.

    ``terms`` maps a generator bitmask to a dict from packed exponent vectors
    to Gaussian-integer numerators ``(re, im)``; the form is
    ``scale / den * sum num * x^exp * d(mask)``.
    """

    __slots__ = ("n", "degree", "terms", "den", "scale")

    def __init__(self, n, degree, terms=None, den=1, scale=1.0):
        self.n = n
        self.degree = degree
        self.terms = terms if terms is not None else {}
        self.den = den
        self.scale = complex(scale)
        self._normalize()

    # ---- construction -------------------------------------------------------
    @classmethod
    def zero(cls, n, degree):
        return cls(n, degree)

    @classmethod
    def constant(cls, n, c=1):
        return cls(n, 0, {0: {0: (1, 0)}}) * c

    @classmethod
    def variable(cls, n, v):
        return cls(n, 0, {0: {1 << (EXP_BITS * v): (1, 0)}})

    @classmethod
    def differential(cls, n, v):
        return cls(n, 1, {1 << v: {0: (1, 0)}})

    @property
    def nvars(self):
        return 4 * self.n

    def _normalize(self):
        clean = {}
        g = 0
        for mask, poly in self.terms.items():
            p = {e: c for e, c in poly.items() if c[0] or c[1]}
            if p:
                clean[mask] = p
                for a, b in p.values():
                    g = math.gcd(g, a, b)
        self.terms = clean
        if not clean:
            self.den = 1
            return
        g = math.gcd(g, self.den)
        if self.den < 0:
            g = -g
        if g != 1:
            self.den //= g
            self.terms = {m: {e: (a // g, b // g) for e, (a, b) in p.items()}
                          for m, p in clean.items()}

    def _like(self, terms, den, degree=None, scale=None):
        return PolyForm(self.n, self.degree if degree is None else degree, terms, den,
                        self.scale if scale is None else scale)

    def is_zero(self):
        return not self.terms

    def __len__(self):
        return sum(len(p) for p in self.terms.values())

    # ---- linear structure ---------------------------------------------------
    def _check(self, other):
        if self.n != other.n:
            raise DimensionMismatch(f"forms on C^{self.n} and C^{other.n}")

    def __add__(self, other):
        if not isinstance(other, PolyForm):
            if other == 0:
                return self
            return NotImplemented
        self._check(other)
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        if self.degree != other.degree:
            raise DegreeMismatch(f"cannot add degrees {self.degree} and {other.degree}")
        if abs(self.scale - other.scale) > 1e-15 * abs(self.scale):
            raise ValueError("cannot add forms with different floating scales")
        den = self.den * other.den // math.gcd(self.den, other.den)
        fa, fb = den // self.den, den // other.den
        out = {m: {e: (a * fa, b * fa) for e, (a, b) in p.items()} for m, p in self.terms.items()}
        for m, p in other.terms.items():
            q = out.setdefault(m, {})
            for e, (a, b) in p.items():
                c = q.get(e)
                if c is None:
                    q[e] = (a * fb, b * fb)
                else:
                    q[e] = (c[0] + a * fb, c[1] + b * fb)
        return self._like(out, den)

    __radd__ = __add__

    def __neg__(self):
        return self._like({m: {e: (-a, -b) for e, (a, b) in p.items()}
                           for m, p in self.terms.items()}, self.den)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, c):
        if isinstance(c, PolyForm):
            return self.wedge(c)
        re_, im_ = _as_gaussian(c)
        lcm = re_.denominator * im_.denominator // math.gcd(re_.denominator, im_.denominator)
        cr, ci = int(re_ * lcm), int(im_ * lcm)
        terms = {m: {e: (a * cr - b * ci, a * ci + b * cr) for e, (a, b) in p.items()}
                 for m, p in self.terms.items()}
        return self._like(terms, self.den * lcm)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self * (1 / Fraction(c))

    def scaled(self, factor):
        """Multiply by a floating (possibly irrational) constant."""
        return self._like(self.terms, self.den, scale=self.scale * complex(factor))

    def conj(self):
        return self._like({m: {e: (a, -b) for e, (a, b) in p.items()}
                           for m, p in self.terms.items()}, self.den,
                          scale=self.scale.conjugate())

    def real(self):
        if self.scale.imag:
            raise ValueError("real part of a form with complex scale")
        return self._like({m: {e: (a, 0) for e, (a, b) in p.items()}
                           for m, p in self.terms.items()}, self.den)

    def imag(self):
        if self.scale.imag:
            raise ValueError("imaginary part of a form with complex scale")
        return self._like({m: {e: (b, 0) for e, (a, b) in p.items()}
                           for m, p in self.terms.items()}, self.den)

    # ---- algebra ------------------------------------------------------------
    def wedge(self, other):
        self._check(other)
        out = {}
        for m1, p1 in self.terms.items():
            for m2, p2 in other.terms.items():
                if m1 & m2:
                    continue
                s = _wedge_sign(m1, m2)
                q = out.setdefault(m1 | m2, {})
                for e1, (a1, b1) in p1.items():
                    for e2, (a2, b2) in p2.items():
                        re_ = a1 * a2 - b1 * b2
                        im_ = a1 * b2 + b1 * a2
                        if s < 0:
                            re_, im_ = -re_, -im_
                        e = e1 + e2
                        c = q.get(e)
                        q[e] = (re_, im_) if c is None else (c[0] + re_, c[1] + im_)
        return PolyForm(self.n, self.degree + other.degree, out, self.den * other.den,
                        self.scale * other.scale)

    __xor__ = wedge

    def __pow__(self, k):
        if k < 0:
            raise ValueError("negative wedge power")
        result = PolyForm.constant(self.n)
        for _ in range(k):
            result = result.wedge(self)
        return result

    def d(self):
        """Exterior derivative."""
        out = {}
        for mask, poly in self.terms.items():
            for e, (a, b) in poly.items():
                for v in range(self.nvars):
                    k = (e >> (EXP_BITS * v)) & EXP_MASK
                    if not k or mask >> v & 1:
                        continue
                    sign = -1 if _popcount(mask & ((1 << v) - 1)) & 1 else 1
                    q = out.setdefault(mask | (1 << v), {})
                    e2 = e - (1 << (EXP_BITS * v))
                    f = sign * k
                    c = q.get(e2)
                    q[e2] = (a * f, b * f) if c is None else (c[0] + a * f, c[1] + b * f)
        return self._like(out, self.den, degree=self.degree + 1)

    # ---- numerics -----------------------------------------------------------
    def compiled(self):
        """Arrays for fast evaluation: (masks, gen_index, exponents, coefficient matrix)."""
        masks = sorted(self.terms)
        exps = sorted({e for p in self.terms.values() for e in p})
        col = {e: i for i, e in enumerate(exps)}
        C = np.zeros((len(masks), len(exps)), dtype=complex)
        for i, m in enumerate(masks):
            for e, (a, b) in self.terms[m].items():
                C[i, col[e]] = complex(a, b)
        C *= self.scale / self.den
        E = np.array([[(e >> (EXP_BITS * v)) & EXP_MASK for v in range(self.nvars)]
                      for e in exps], dtype=float).reshape(len(exps), self.nvars)
        gens = np.array([[v for v in range(self.nvars) if m >> v & 1] for m in masks],
                        dtype=int).reshape(len(masks), self.degree)
        return gens, E, C

    def evaluate(self, points, frames):
        """Evaluate at ``points`` (S x 4n) on ``frames`` (S x degree x 4n)."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        frames = np.asarray(frames, dtype=float).reshape(points.shape[0], self.degree, self.nvars)
        if self.is_zero():
            return np.zeros(points.shape[0], dtype=complex)
        gens, E, C = self.compiled()
        mono = np.prod(points[:, None, :] ** E[None, :, :], axis=2)        # S x U
        coef = mono @ C.T                                                  # S x M
        if self.degree == 0:
            return coef[:, 0]
        # minors: rows = frame vectors, columns = generators of each monomial
        sub = np.moveaxis(frames[:, :, gens], 2, 1)                         # S x M x k x k
        return np.einsum("sm,sm->s", coef, np.linalg.det(sub))

    def __repr__(self):
        return f"PolyForm(n={self.n}, degree={self.degree}, terms={len(self)})"


# ---- coordinates -------------------------------------------------------------

def _x(j):
    return 2 * j


def _y(j):
    return 2 * j + 1


def _xi(n, j):
    return 2 * n + 2 * j


def _eta(n, j):
    return 2 * n + 2 * j + 1


def zeta(n, j):
    return PolyForm.variable(n, _xi(n, j)) + PolyForm.variable(n, _eta(n, j)) * 1j


def zetabar(n, j):
    return zeta(n, j).conj()


def dz(n, j):
    return PolyForm.differential(n, _x(j)) + PolyForm.differential(n, _y(j)) * 1j


def dzbar(n, j):
    return dz(n, j).conj()


def dzeta(n, j):
    return PolyForm.differential(n, _xi(n, j)) + PolyForm.differential(n, _eta(n, j)) * 1j


def dzetabar(n, j):
    return dzeta(n, j).conj()


def _sum(forms):
    total = 0
    for f in forms:
        total = f + total
    return total


def _perm_sign(p):
    sign = 1
    p = list(p)
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            sign = -sign
    return sign


def _chi(n, k):
    if not 0 <= k <= n - 1:
        raise BadIndex(f"chi index {k} outside 0..{n - 1}")
    total = PolyForm.zero(n, n - 1)
    for p in permutations(range(n)):
        f = zeta(n, p[0])
        for j in p[1:k + 1]:
            f = f ^ dz(n, j)
        for j in p[k + 1:]:
            f = f ^ dzeta(n, j)
        total = total + f * _perm_sign(p)
    return total / (math.factorial(k) * math.factorial(n - k - 1))


def _dvol_space(n):
    f = PolyForm.constant(n)
    for v in range(2 * n):
        f = f ^ PolyForm.differential(n, v)
    return f


def _dvol_sphere(n):
    # interior product of the outward normal with d xi_1 ^ d eta_1 ^ ...
    total = PolyForm.zero(n, 2 * n - 1)
    base = [2 * n + a for a in range(2 * n)]
    for a, v in enumerate(base):
        f = PolyForm.variable(n, v) * (-1) ** a
        for w in base:
            if w != v:
                f = f ^ PolyForm.differential(n, w)
        total = total + f
    return total


_NAME = re.compile(r"^\s*([a-z_0-9]+?)\s*(?:\(\s*(-?\d+)\s*\))?\s*$")


def invariant_form(name, n, k=None):
    """The invariant forms on the sphere bundle, by name.

    Names: alpha, beta, gamma, theta0, theta1, theta2, thetas, chi(k),
    chibar(k), dvol_space, dvol_sphere.
    """
    match = _NAME.match(name)
    if not match:
        raise UnknownName(name)
    base, idx = match.group(1), match.group(2)
    if idx is not None:
        k = int(idx)
    if base in ("chi", "chibar"):
        if k is None:
            raise BadIndex(f"{base} needs an index")
        f = _chi(n, k)
        return f.conj() if base == "chibar" else f
    builder = _BUILDERS.get(base)
    if builder is None:
        raise UnknownName(name)
    return builder(n)


def _alpha(n):
    return _sum((zeta(n, j) ^ dzbar(n, j)) + (zetabar(n, j) ^ dz(n, j)) for j in range(n)) / 2


def _beta(n):
    return _sum((zeta(n, j) ^ dzbar(n, j)) - (zetabar(n, j) ^ dz(n, j)) for j in range(n)) * (0.5j)


def _gamma(n):
    return _sum((zeta(n, j) ^ dzetabar(n, j)) - (zetabar(n, j) ^ dzeta(n, j))
                for j in range(n)) * (0.5j)


def _theta0(n):
    return _sum(dzeta(n, j) ^ dzetabar(n, j) for j in range(n)) * (0.5j)


def _theta_s_minus_i_theta1(n):
    a, b, g = _alpha(n), _beta(n), _gamma(n)
    return _sum(dz(n, j) ^ dzetabar(n, j) for j in range(n)) - (b ^ g) + (a ^ g) * 1j


def _thetas(n):
    return _theta_s_minus_i_theta1(n).real()


def _theta1(n):
    return -_theta_s_minus_i_theta1(n).imag()


def _theta2(n):
    return _sum(dz(n, j) ^ dzbar(n, j) for j in range(n)) * (0.5j) - (_alpha(n) ^ _beta(n))


_BUILDERS = {
    "alpha": _alpha,
    "beta": _beta,
    "gamma": _gamma,
    "theta0": _theta0,
    "theta1": _theta1,
    "theta2": _theta2,
    "thetas": _thetas,
    "dvol_space": _dvol_space,
    "dvol_sphere": _dvol_sphere,
}


def wedge(a, b):
    return a.wedge(b)


def ext_d(a):
    return a.d()


# ---- the sphere bundle --------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SpherePoint:
    z: np.ndarray
    zeta: np.ndarray

    def __post_init__(self):
        if abs(np.linalg.norm(self.zeta) - 1.0) > 1e-12:
            raise ValueError("zeta must be a unit vector")

    @property
    def real(self):
        from .numkernel import to_real
        return np.concatenate([to_real(self.z), to_real(self.zeta)])


def eval_at(a, p, vectors):
    """Evaluate form ``a`` at a point on ``len(vectors) == degree`` real 4n-vectors."""
    vectors = np.asarray(vectors, dtype=float).reshape(-1, a.nvars) if len(vectors) else \
        np.zeros((0, a.nvars))
    if vectors.shape[0] != a.degree:
        raise ArityMismatch(f"{a.degree}-form evaluated on {vectors.shape[0]} vectors")
    pt = p.real if isinstance(p, SpherePoint) else np.asarray(p, dtype=float)
    return complex(a.evaluate(pt[None, :], vectors[None, :, :])[0])


def random_sphere_points(n, samples, rng):
    """Points of C^n x S^{2n-1} as real 4n-vectors."""
    z = rng.standard_normal((samples, 2 * n))
    u = rng.standard_normal((samples, 2 * n))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    return np.concatenate([z, u], axis=1)


def tangent_frames(points, k, rng, contact=False):
    """Random frames of k unit tangent vectors to the sphere bundle.

    The zeta-block of each vector is projected orthogonally to zeta. With
    ``contact=True`` the vectors also lie in the kernel of alpha.
    """
    S, d = points.shape
    n = d // 4
    V = rng.standard_normal((S, k, d))
    u = points[:, 2 * n:]
    V[:, :, 2 * n:] -= np.einsum("skd,sd->sk", V[:, :, 2 * n:], u)[:, :, None] * u[:, None, :]
    if contact:
        # alpha = sum xi_j dx_j + eta_j dy_j
        V[:, :, :2 * n] -= np.einsum("skd,sd->sk", V[:, :, :2 * n], u)[:, :, None] * u[:, None, :]
    V /= np.linalg.norm(V, axis=2, keepdims=True)
    return V


@dataclass
class IdentityReport:
    name: str
    max_residual: float
    passed: bool
    samples: int

    def to_dict(self):
        return {"name": self.name, "max_residual": self.max_residual, "pass": self.passed,
                "samples": self.samples}


def check_identity_on_sphere_bundle(lhs, rhs, n, samples, tol, rng, name="identity"):
    """Compare the restrictions of two forms to the sphere bundle at random points."""
    if lhs.degree != rhs.degree and not (lhs.is_zero() or rhs.is_zero()):
        raise DegreeMismatch(f"degrees {lhs.degree} and {rhs.degree}")
    degree = lhs.degree if not lhs.is_zero() else rhs.degree
    points = random_sphere_points(n, samples, rng)
    frames = tangent_frames(points, degree, rng)
    res = _residual(lhs, rhs, points, frames)
    return IdentityReport(name, res, bool(res <= tol), samples)


def _residual(lhs, rhs, points, frames):
    vals = np.zeros(points.shape[0], dtype=complex)
    if not lhs.is_zero():
        vals += lhs.evaluate(points, frames)
    if not rhs.is_zero():
        vals -= rhs.evaluate(points, frames)
    return float(np.abs(vals).max(initial=0.0))


@dataclass
class RuminReport:
    name: str
    identity_residual: float
    vertical_residual: float
    passed: bool
    samples: int

    def to_dict(self):
        return {"name": self.name, "identity_residual": self.identity_residual,
                "vertical_residual": self.vertical_residual, "pass": self.passed,
                "samples": self.samples}


def rumin_verify(omega, xi, D_expected, n, samples, tol, rng, name="rumin"):
    """Check ``d(omega + alpha ^ xi) == D_expected`` and that it is vertical.

    Verticality is tested by evaluating on frames inside the contact
    distribution, where a multiple of alpha must vanish.
    """
    alpha = invariant_form("alpha", n)
    if omega.degree != 2 * n - 1:
        raise DegreeMismatch(f"omega must have degree {2 * n - 1}")
    if not xi.is_zero() and xi.degree != omega.degree - 1:
        raise DegreeMismatch("xi must have degree deg(omega) - 1")
    if not D_expected.is_zero() and D_expected.degree != omega.degree + 1:
        raise DegreeMismatch("D omega must have degree deg(omega) + 1")
    lifted = omega if xi.is_zero() else omega + (alpha ^ xi)
    D = lifted.d()
    points = random_sphere_points(n, samples, rng)
    frames = tangent_frames(points, 2 * n, rng)
    r_id = _residual(D, D_expected, points, frames)
    cframes = tangent_frames(points, 2 * n, rng, contact=True)
    r_vert = _residual(D, PolyForm.zero(n, 2 * n), points, cframes)
    return RuminReport(name, r_id, r_vert, bool(r_id <= tol and r_vert <= tol), samples)


def dvol_bundle(n):
    """Volume form of C^n x S^{2n-1}: dvol(C^n) ^ dvol(S^{2n-1})."""
    return invariant_form("dvol_space", n) ^ invariant_form("dvol_sphere", n)


@dataclass
class ProductConstant:
    c: complex
    product: complex
    spread: float


def product_constant(omega1, D_omega2, n, samples=8, rng=None, tol=1e-9):
    """Constant c with ``omega1 ^ D omega2 = c dvol`` and the resulting product.

    The product of the represented degree-n valuations is
    ``(-1)^n * vol(S^{2n-1}) * c`` times the volume.
    """
    top = omega1 ^ D_omega2
    if top.degree != 4 * n - 1 and not top.is_zero():
        raise DegreeMismatch(f"omega1 ^ D omega2 has degree {top.degree}, need {4 * n - 1}")
    rng = rng if rng is not None else np.random.default_rng(0)
    points = random_sphere_points(n, samples, rng)
    frames = tangent_frames(points, 4 * n - 1, rng)
    ref = dvol_bundle(n).evaluate(points, frames)
    val = top.evaluate(points, frames) if not top.is_zero() else np.zeros(samples, complex)
    ratios = val / ref
    c = complex(np.mean(ratios))
    spread = float(np.abs(ratios - c).max())
    if spread > tol * max(1.0, abs(c)):
        raise NotProportional(f"ratio varies by {spread:.3g} across points")
    product = (-1) ** n * unit_sphere_area(2 * n) * c
    return ProductConstant(c, product, spread)


# ---- the forms representing phi_1 and phi_2 ----------------------------------

@dataclass
class RuminData:
    """Representing form ``omega``, its correction ``xi`` and ``D omega``."""

    omega: PolyForm
    xi: PolyForm
    D: PolyForm


def phi2_data(n):
    """omega = (-1)^{n+1} i/(n omega_n) beta ^ chi_0 ^ chi_{n-1}, with its Rumin data."""
    alpha, beta, gamma = (invariant_form(s, n) for s in ("alpha", "beta", "gamma"))
    chis = _chi(n, 0) ^ _chi(n, n - 1)
    coeff = (0, Fraction((-1) ** (n + 1), n))
    omega = _gauss_mul(beta ^ chis, coeff)
    xi = _gauss_mul(chis, coeff) * (-(n + 1) * 1j)
    D = _gauss_mul(alpha ^ gamma ^ chis, coeff) * (-n * (n + 2))
    s = 1 / unit_ball_volume(n)
    return RuminData(omega.scaled(s), xi.scaled(s), D.scaled(s))


def _gauss_mul(form, coeff):
    re_, im_ = coeff
    out = PolyForm.zero(form.n, form.degree)
    if re_:
        out = out + form * re_
    if im_:
        out = out + (form * im_) * 1j
    return out


def phi1_data(n):
    """omega = chi_0 ^ theta_2^m / (n pi^m) for n = 2m, with the Rumin correction."""
    if n % 2:
        raise ValueError("phi_1 exists only for even n")
    m = n // 2
    alpha, beta, gamma = (invariant_form(s, n) for s in ("alpha", "beta", "gamma"))
    th1, th2, ths = (invariant_form(s, n) for s in ("theta1", "theta2", "thetas"))
    chi0, chim = _chi(n, 0), _chi(n, m)
    omega = (chi0 ^ th2 ** m) / n
    inner = PolyForm.zero(n, 2 * m - 2)
    for j in range(1, m + 1, 2):
        inner = inner + ((ths ** (j - 1)) ^ (th1 ** (m - j))) * (math.comb(m, j) * _ipow(m - j))
    xi = (gamma ^ chim ^ inner) * _ipow(m + 1) * Fraction(2, 2 ** m) \
        + (beta ^ chi0 ^ th2 ** (m - 1)) / 2
    D = alpha ^ ((chi0 ^ th1 ^ th2 ** (m - 1)) / 2 - xi.d())
    s = math.pi ** -m
    return RuminData(omega.scaled(s), xi.scaled(s), D.scaled(s))


def _ipow(k):
    return (1, 1j, -1, -1j)[k % 4]


# ---- catalogues of identities -----------------------------------------------

def _basic(n):
    names = ("alpha", "beta", "gamma", "theta0", "theta1", "theta2", "thetas")
    return [invariant_form(s, n) for s in names]


def structure_identities(n):
    """The differentials of the seven basic forms, as (name, lhs, rhs)."""
    a, b, g, t0, t1, t2, ts = _basic(n)
    return [
        ("d alpha = -beta^gamma - theta_s", a.d(), -(b ^ g) - ts),
        ("d beta = alpha^gamma + theta_1", b.d(), (a ^ g) + t1),
        ("d gamma = 2 theta_0", g.d(), t0 * 2),
        ("d theta_0 = 0", t0.d(), PolyForm.zero(n, 3)),
        ("d theta_1 = 2 alpha^theta_0 + gamma^theta_s", t1.d(), (a ^ t0) * 2 + (g ^ ts)),
        ("d theta_2 = alpha^theta_1 + beta^theta_s", t2.d(), (a ^ t1) + (b ^ ts)),
        ("d theta_s = 2 beta^theta_0 - gamma^theta_1", ts.d(), (b ^ t0) * 2 - (g ^ t1)),
    ]


def chi_differentials(n):
    """d chi_k = (n-k)((alpha + i beta)^chi_{k-1} + i gamma^chi_k) for k = 0..n-1."""
    a, b, g = _basic(n)[:3]
    out = []
    for k in range(n):
        chik = _chi(n, k)
        rhs = (g ^ chik) * 1j
        if k > 0:
            rhs = rhs + ((a + b * 1j) ^ _chi(n, k - 1))
        out.append((f"d chi_{k}", chik.d(), rhs * (n - k)))
    return out


def chi_relations(n):
    """Algebraic relations between chi_k, theta_0 and theta_s -/+ i theta_1."""
    t0, t1, ts = (invariant_form(s, n) for s in ("theta0", "theta1", "thetas"))
    minus, plus = ts - t1 * 1j, ts + t1 * 1j
    out = []
    for k in range(1, n):
        ck, ckm = _chi(n, k), _chi(n, k - 1)
        out.append((f"chi_{k}^theta_0 = -(i/2) chi_{k-1}^(theta_s - i theta_1)",
                    ck ^ t0, (ckm ^ minus) * (-0.5j)))
        out.append((f"chi_{k-1}^theta_2 = (i/2) chi_{k}^(theta_s + i theta_1)",
                    ckm ^ invariant_form("theta2", n), (ck ^ plus) * 0.5j))
    for k in range(n):
        ck = _chi(n, k)
        for l in range(1, (3 * n) // 2 + 1):
            if k + l >= n:
                out.append((f"chi_{k}^(theta_s - i theta_1)^{l} = 0",
                            ck ^ minus ** l, PolyForm.zero(n, n - 1 + 2 * l)))
            if l > k:
                out.append((f"chi_{k}^(theta_s + i theta_1)^{l} = 0",
                            ck ^ plus ** l, PolyForm.zero(n, n - 1 + 2 * l)))
    return out


def normalization_identities(n):
    """Volume form normalizations used by the product computations.

    The factor 2^{n-1} for i gamma^chi_0^chibar_0 holds for even n only (for
    odd n the form is i 2^{n-1} times the sphere volume), so it is listed for
    even n.
    """
    a, b, g = _basic(n)[:3]
    t2 = invariant_form("theta2", n)
    c0, c0b = _chi(n, 0), invariant_form("chibar(0)", n)
    cl, clb = _chi(n, n - 1), invariant_form(f"chibar({n - 1})", n)
    vs, vsp = invariant_form("dvol_space", n), invariant_form("dvol_sphere", n)
    k = 2 ** (n - 1) * _ipow(n * n - 1)
    out = [
        ("alpha^beta^theta_2^(n-1) = (n-1)! dvol_space", a ^ b ^ t2 ** (n - 1), vs * math.factorial(n - 1)),
        ("alpha^beta^chi_(n-1)^chibar_(n-1) = 2^(n-1) i^(n^2-1) dvol_space", a ^ b ^ cl ^ clb, vs * k),
        ("gamma^chi_0^chibar_0 = 2^(n-1) i^(n^2-1) dvol_sphere", g ^ c0 ^ c0b, vsp * k),
    ]
    if n % 2 == 0:
        out.append(("i gamma^chi_0^chibar_0 = 2^(n-1) dvol_sphere", (g ^ c0 ^ c0b) * 1j, vsp * 2 ** (n - 1)))
    return out


def verify_forms(n, samples=100, tol=1e-9, rng=None):
    """Run every identity above; returns a list of IdentityReport."""
    rng = rng if rng is not None else np.random.default_rng(0)
    cases = structure_identities(n) + chi_differentials(n) + chi_relations(n) + normalization_identities(n)
    return [check_identity_on_sphere_bundle(lhs, rhs, n, samples, tol, rng, name) for name, lhs, rhs in cases]
