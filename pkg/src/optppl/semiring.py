"""Branch-and-bound semirings: the reals and the expectation semiring.

A branch-and-bound semiring is a commutative semiring carrying two orders:
a lattice partial order ``cmp_le`` that respects addition (joins/meets are
its least upper / greatest lower bounds) and a total order ``total_le``
compatible with it.  The solver is parameterized over one of the two
instances below; values themselves are immutable plain data.
"""

from __future__ import annotations

import math
from typing import NamedTuple

NEG_INF = float("-inf")
POS_INF = float("inf")


class EV(NamedTuple):
    """Element of the expectation semiring: (probability mass, utility mass).

    ``prob`` is always >= 0.  ``util`` may be any real, or -inf as the
    sentinel produced by dividing by a zero probability.
    """

    prob: float
    util: float

    def __repr__(self):
        return f"EV({self.prob:g}, {self.util:g})"


def _term(a: float, b: float) -> float:
    # 0 * inf would be NaN under IEEE; a zero probability annihilates.
    if a == 0.0 or b == 0.0:
        return 0.0
    return a * b


class ExpectationSemiring:
    """Pairs (p, u) with componentwise +, product (pq, pv+qu)."""

    name = "expectation"
    zero = EV(0.0, 0.0)
    one = EV(1.0, 0.0)
    #: <=-least element, used to seed branch-and-bound incumbents.
    bottom = EV(0.0, NEG_INF)
    #: Conservative "prune nothing" bound (see ub_f on zero denominators).
    top = EV(POS_INF, POS_INF)

    @staticmethod
    def add(a: EV, b: EV) -> EV:
        return EV(a.prob + b.prob, a.util + b.util)

    @staticmethod
    def mul(a: EV, b: EV) -> EV:
        return EV(_term(a.prob, b.prob), _term(a.prob, b.util) + _term(b.prob, a.util))

    @staticmethod
    def join(a: EV, b: EV) -> EV:
        return EV(max(a.prob, b.prob), max(a.util, b.util))

    @staticmethod
    def meet(a: EV, b: EV) -> EV:
        return EV(min(a.prob, b.prob), min(a.util, b.util))

    @staticmethod
    def cmp_le(a: EV, b: EV) -> bool:
        """Coordinatewise lattice order."""
        return a.prob <= b.prob and a.util <= b.util

    @staticmethod
    def total_le(a: EV, b: EV) -> bool:
        """Total order: utility first, probability breaks ties."""
        return a.util < b.util or (a.util == b.util and a.prob <= b.prob)

    @staticmethod
    def scalar_div(a: EV, r: float) -> EV:
        """Divide both components by r >= 0; division by 0 yields (0, -inf)."""
        if r == 0.0:
            return EV(0.0, NEG_INF)
        return EV(a.prob / r, a.util / r)

    @staticmethod
    def prob_of(a: EV) -> float:
        return a.prob

    @staticmethod
    def scalar_of(a: EV) -> float:
        return a.util

    @staticmethod
    def isclose(a: EV, b: EV, tol: float = 1e-9) -> bool:
        return _close(a.prob, b.prob, tol) and _close(a.util, b.util, tol)


class RealSemiring:
    """The nonnegative reals with +, *; both orders are numeric <=."""

    name = "real"
    zero = 0.0
    one = 1.0
    bottom = NEG_INF
    top = POS_INF

    @staticmethod
    def add(a, b):
        return a + b

    @staticmethod
    def mul(a, b):
        return _term(a, b)

    @staticmethod
    def join(a, b):
        return max(a, b)

    @staticmethod
    def meet(a, b):
        return min(a, b)

    @staticmethod
    def cmp_le(a, b):
        return a <= b

    @staticmethod
    def total_le(a, b):
        return a <= b

    @staticmethod
    def scalar_div(a, r):
        if r == 0.0:
            return NEG_INF
        return a / r

    @staticmethod
    def prob_of(a):
        return a

    @staticmethod
    def scalar_of(a):
        return a

    @staticmethod
    def isclose(a, b, tol: float = 1e-9) -> bool:
        return _close(a, b, tol)


def _close(a: float, b: float, tol: float) -> bool:
    if a == b:  # covers equal infinities
        return True
    if math.isinf(a) or math.isinf(b):
        return False
    return abs(a - b) <= tol


EXPECTATION = ExpectationSemiring()
REAL = RealSemiring()
