"""Small dense real/complex linear algebra shared by the other modules.

Real vectors of length 2n are identified with complex n-vectors through the
interleaved ordering ``(x_1, y_1, ..., x_n, y_n)`` with ``z_j = x_j + i y_j``.
Under this identification the complex structure ``J`` rotates every
``(x_j, y_j)`` plane by 90 degrees.
"""

import math

import numpy as np

RANK_TOL = 1e-10
SKEW_TOL = 1e-10


class RankDeficient(ValueError):
    pass


class ShapeMismatch(ValueError):
    pass


class NotSkew(ValueError):
    pass


class OddDimension(ValueError):
    pass


def orthonormalize(vectors):
    """Return an orthonormal basis (as rows) of the span of ``vectors``.

    Raises RankDeficient when the numerical rank is smaller than the number
    of vectors; the tolerance is relative to the largest input norm.
    """
    A = np.atleast_2d(np.asarray(vectors, dtype=float))
    if A.size == 0:
        raise RankDeficient("no vectors given")
    scale = max(np.linalg.norm(A, axis=1).max(), 1e-300)
    Q, R = np.linalg.qr(A.T)
    diag = np.abs(np.diag(R))
    if diag.min() <= RANK_TOL * scale:
        raise RankDeficient(f"numerical rank below {A.shape[0]}")
    # fix signs so that an orthonormal input is returned unchanged
    Q = Q * np.sign(np.diag(R))
    return Q.T.copy()


def complex_det(columns):
    """Determinant of the complex square matrix with the given columns."""
    M = np.asarray(columns, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ShapeMismatch(f"need n columns of length n, got shape {M.shape}")
    # the input is a list of columns, so transpose before taking det
    return complex(np.linalg.det(M.T))


def _check_skew(A):
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ShapeMismatch(f"need a square matrix, got shape {A.shape}")
    if np.abs(A + A.T).max(initial=0.0) > SKEW_TOL:
        raise NotSkew("matrix is not skew-symmetric")
    return A


def skew_spectrum(A):
    """Values ``c_1 >= ... >= c_m >= 0`` with eigenvalues ``{±i c_j}`` of skew ``A``.

    The singular values of a real skew matrix come in equal pairs; they are
    paired off (and averaged) instead of diagonalizing ``A``.
    """
    A = _check_skew(A)
    d = A.shape[0]
    s = np.linalg.svd(A, compute_uv=False)
    m = d // 2
    return [float(0.5 * (s[2 * j] + s[2 * j + 1])) for j in range(m)]


def pfaffian(A):
    """Pfaffian of a real skew-symmetric matrix of even size.

    Uses skew-symmetric Gaussian elimination with pivoting.
    """
    A = _check_skew(A).copy()
    d = A.shape[0]
    if d % 2:
        raise OddDimension("pfaffian needs an even dimension")
    # re-symmetrize exactly
    A = 0.5 * (A - A.T)
    result = 1.0
    for k in range(0, d - 1, 2):
        p = k + 1 + int(np.argmax(np.abs(A[k, k + 1:])))
        if p != k + 1:
            A[[k + 1, p], :] = A[[p, k + 1], :]
            A[:, [k + 1, p]] = A[:, [p, k + 1]]
            result = -result
        pivot = A[k, k + 1]
        if pivot == 0.0:
            return 0.0
        result *= pivot
        if k + 2 < d:
            tau = A[k, k + 2:] / pivot
            # eliminate row/column k with the pivot row k+1
            A[k + 2:, k + 2:] += np.outer(A[k + 1, k + 2:], tau) - np.outer(tau, A[k + 1, k + 2:])
    return float(result)


def unit_ball_volume(d):
    """Volume of the d-dimensional unit ball."""
    if d < 0:
        raise ValueError("dimension must be non-negative")
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def unit_sphere_area(d):
    """Area of the unit sphere S^{d-1} in R^d."""
    return d * unit_ball_volume(d)


# ---- identification R^{2n} <-> C^n ------------------------------------------

def to_complex(v):
    """Real ``(..., 2n)`` array to complex ``(..., n)``."""
    v = np.asarray(v, dtype=float)
    return v[..., 0::2] + 1j * v[..., 1::2]


def to_real(z):
    """Complex ``(..., n)`` array to real ``(..., 2n)``."""
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape[:-1] + (2 * z.shape[-1],))
    out[..., 0::2] = z.real
    out[..., 1::2] = z.imag
    return out


def complex_structure(n):
    """Real 2n x 2n matrix of multiplication by i."""
    J = np.zeros((2 * n, 2 * n))
    for j in range(n):
        J[2 * j + 1, 2 * j] = 1.0
        J[2 * j, 2 * j + 1] = -1.0
    return J


def realify(g):
    """Real 2n x 2n matrix of the complex-linear map ``g``."""
    g = np.asarray(g, dtype=complex)
    n = g.shape[0]
    R = np.empty((2 * n, 2 * n))
    R[0::2, 0::2] = g.real
    R[0::2, 1::2] = -g.imag
    R[1::2, 0::2] = g.imag
    R[1::2, 1::2] = g.real
    return R
