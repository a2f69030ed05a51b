"""Independent reference computations.

Nothing here imports the polytope or valuation code: box faces are listed
by hand and Klain values come straight from complex determinants.
"""

from itertools import combinations, product

import numpy as np

# real basis of C^2 in the order e1, i e1, e2, i e2
_BASIS = (np.array([1, 0]), np.array([1j, 0]), np.array([0, 1]), np.array([0, 1j]))


def elementary_symmetric(values, k):
    """e_k of the given numbers."""
    return float(sum(np.prod(c) for c in combinations(values, k))) if k else 1.0


def box_phi2_bruteforce(sides):
    """phi_2 of the box with edges a1 e1, a2 i e1, b1 e2, b2 i e2.

    Every 2-face keeps two coordinates free and fixes the other two at one of
    their two end values. The normal cone of such a face is a quadrant of its
    2-dimensional normal space (exterior angle 1/4), and its Klain value is
    the square of the complex determinant of the two edge directions.
    """
    sides = [float(s) for s in sides]
    total = 0j
    for free in combinations(range(4), 2):
        fixed = [j for j in range(4) if j not in free]
        theta = np.linalg.det(np.column_stack([_BASIS[free[0]], _BASIS[free[1]]]))
        area = sides[free[0]] * sides[free[1]]
        for _ in product((0, 1), repeat=len(fixed)):
            total += 0.25 * area * theta ** 2
    return complex(total)


def box_phi2_closed_form(sides):
    a1, a2, b1, b2 = sides
    return (a1 - a2) * (b1 - b2)
