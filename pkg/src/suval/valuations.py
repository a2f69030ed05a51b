"""Constant coefficient valuations on polytopes in C^n and their products.

A valuation of degree k is evaluated on a polytope as the face sum
``sum_F gamma(F) vol(F) kl(W_F)`` over the k-faces F, where kl is its Klain
function. The SU(n)-specific Klain functions are built from the orbit
invariants of :mod:`suval.grassmann`.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import forms
from .grassmann import Subspace, WrongDimension, kaehler_angles, theta_invariant
from .numkernel import unit_ball_volume
from .polytope import transform

NAMES = ("one_k", "phi1", "phi2", "phi1_bar", "phi2_bar", "vol", "euler")
WEIGHTS = {"phi1": 1, "phi2": 2, "phi1_bar": -1, "phi2_bar": -2}


class OddN(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


@dataclass(frozen=True)
class Valuation:
    name: str
    n: int
    degree: int
    weight: int = 0
    scale: complex = 1.0

    def __mul__(self, c):
        return Valuation(self.name, self.n, self.degree, self.weight, self.scale * c)

    __rmul__ = __mul__

    def conj(self):
        name = {"phi1": "phi1_bar", "phi2": "phi2_bar",
                "phi1_bar": "phi1", "phi2_bar": "phi2"}.get(self.name, self.name)
        return Valuation(name, self.n, self.degree, -self.weight, complex(self.scale).conjugate())

    def klain(self, W):
        return self.scale * klain(self.name, W)


def valuation(name, n, k=None):
    """Named valuation on C^n; ``k`` is the degree of ``one_k``."""
    if name not in NAMES:
        raise KeyError(f"unknown valuation {name!r}; choose from {', '.join(NAMES)}")
    if name.startswith("phi1") and n % 2:
        raise OddN("phi1 exists only for even n")
    if name == "one_k":
        if k is None or not 0 <= k <= 2 * n:
            raise ValueError(f"one_k needs a degree 0 <= k <= {2 * n}")
        return Valuation(name, n, k)
    degree = {"vol": 2 * n, "euler": 0}.get(name, n)
    return Valuation(name, n, degree, WEIGHTS.get(name, 0))


def klain_phi2(W):
    """Theta(W)^2."""
    if W.dim != W.n:
        raise WrongDimension(f"phi2 Klain function needs dim W = n = {W.n}")
    return complex(theta_invariant(W).value ** 2)


def klain_phi1(W):
    """Theta(W) times the product of the cosines of the Kaehler angles."""
    if W.n % 2:
        raise OddN("phi1 exists only for even n")
    if W.dim != W.n:
        raise WrongDimension(f"phi1 Klain function needs dim W = n = {W.n}")
    c = math.prod(math.cos(t) for t in kaehler_angles(W))
    if c <= 1e-12:
        return 0j
    # non-degenerate symplectic form, so Theta carries its sign
    return complex(theta_invariant(W).value * c)


def klain(name, W):
    if name in ("one_k", "vol", "euler"):
        return 1.0 + 0j
    base = klain_phi1(W) if name.startswith("phi1") else klain_phi2(W)
    return base.conjugate() if name.endswith("_bar") else base


def evaluate(val, P):
    """Value of ``val`` on the polytope P (complex)."""
    if P.ambient_dim != 2 * val.n:
        raise DimensionMismatch(f"valuation on C^{val.n} applied to a polytope in R^{P.ambient_dim}")
    if val.name == "euler":
        return complex(val.scale)
    if val.name == "vol":
        return complex(val.scale * P.volume)
    total = 0j
    for F in P.faces(val.degree):
        if F.volume == 0.0:
            continue
        kl = val.klain(Subspace(val.n, F.basis)) if val.degree else val.scale
        total += F.exterior_angle * F.volume * kl
    return complex(total)


def check_weight(val, P, g, tol=1e-8):
    """``val(gP) == det(g)^l val(P)`` for a unitary g."""
    g = np.asarray(g, dtype=complex)
    before = evaluate(val, P)
    after = evaluate(val, transform(P, g))
    expected = complex(np.linalg.det(g)) ** val.weight * before
    return bool(abs(after - expected) <= tol * (1 + abs(before)))


# ---- products of middle degree valuations ------------------------------------

@lru_cache(maxsize=None)
def _rumin_data(family, n):
    return forms.phi1_data(n) if family == "phi1" else forms.phi2_data(n)


def _data(name, n):
    d = _rumin_data(name[:4], n)
    if name.endswith("_bar"):
        return d.omega.conj(), d.D.conj()
    return d.omega, d.D


def product_middle(a, b, n, samples=8, rng=None):
    """Coefficient c with ``a * b = c vol`` for a, b among phi1, phi2 and conjugates.

    Computed from the representing forms; products whose weights do not
    cancel vanish.
    """
    for name in (a, b):
        if name not in WEIGHTS:
            raise KeyError(f"product_middle takes phi1, phi2 or their conjugates, got {name!r}")
        if name.startswith("phi1") and n % 2:
            raise OddN("phi1 exists only for even n")
    if WEIGHTS[a] + WEIGHTS[b] != 0:
        return 0j
    omega1, _ = _data(a, n)
    _, D2 = _data(b, n)
    return forms.product_constant(omega1, D2, n, samples=samples, rng=rng).product


def product_middle_closed_form(a, b, n):
    """Closed-form values 2^n and (-1)^n (n+2) 2^{2n-1} omega_{2n} / omega_n^2."""
    if WEIGHTS[a] + WEIGHTS[b] != 0:
        return 0j
    if a.startswith("phi1"):
        if n % 2:
            raise OddN("phi1 exists only for even n")
        return complex(2 ** n)
    w = unit_ball_volume
    return complex((-1) ** n * (n + 2) * 2 ** (2 * n - 1) * w(2 * n) / w(n) ** 2)


def dimension_u(n):
    """Dimension of the space of U(n)-invariant valuations on C^n."""
    if n < 2:
        raise ValueError("n must be at least 2")
    return math.comb(n + 2, 2)


def dimension_su(n):
    """Dimension of the space of SU(n)-invariant valuations on C^n."""
    if n < 2:
        raise ValueError("n must be at least 2")
    extra = 10 if n % 2 == 0 else 6
    return (n * n + 3 * n + extra) // 2
