"""Branch-and-bound IR: weighted multi-rooted BDDs and the pruned search.

A :class:`Bbir` packages formulas (as BDD handles), an ordered set of branch
variables ``X``, and a literal weight map over a branch-and-bound semiring.
:func:`ub` and :func:`lb` compute single-pass bounds that replace the sum at
a branch variable by a join (resp. meet); :func:`bb` searches the space of
total branch assignments, pruning a branch whenever its bound is dominated
by the incumbent under the lattice order.

An optional validity formula restricts which branch assignments count as
policies (the surface compiler uses it for its one-hot choice encoding);
bounds then range over valid completions only and the search skips invalid
branches outright.  The default validity is the constant true formula, in
which case everything reduces to the plain algorithm.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass

from .bdd import FALSE, TRUE, BddManager, WeightMap
from .semiring import EXPECTATION, REAL


class BbirError(Exception):
    pass


@dataclass
class Bbir:
    mgr: BddManager
    formulas: list
    branch_vars: list
    weights: WeightMap
    semiring: object = EXPECTATION
    validity: int = TRUE

    def __post_init__(self):
        support = set()
        for f in self.formulas:
            support |= self.mgr.support(f)
        extra = set(self.branch_vars) - support
        # branch variables must come from the formulas (validity aside)
        if extra and self.validity == TRUE:
            names = ", ".join(self.mgr.var_label(v) for v in sorted(extra))
            raise BbirError(f"branch variables not in any formula: {names}")
        unweighted = (support | set(self.branch_vars)) - set(self.weights.vars)
        if unweighted:
            names = ", ".join(self.mgr.var_label(v) for v in sorted(unweighted))
            raise BbirError(f"unweighted variable(s): {names}")
        self.branch_set = frozenset(self.branch_vars)

    def universe_for(self, handle: int):
        """Sorted bound/count universe of a formula: its support plus X."""
        return sorted(self.mgr.support(handle) | self.branch_set)


# ---------------------------------------------------------------------------
# Single-pass bounds (join or meet at branch variables)
# ---------------------------------------------------------------------------

def _bound_pass(bbir: Bbir, root: int, validity: int, universe, conditioned, use_join: bool):
    """Walk ``root`` over ``universe`` with sums outside X and joins/meets at X.

    ``validity`` is walked in lockstep; branch literals whose validity child
    is unsatisfiable contribute nothing.  ``conditioned`` variables (already
    fixed by the caller's partial policy) are skipped entirely.
    """
    mgr = bbir.mgr
    sr = bbir.semiring
    wm = bbir.weights
    xset = bbir.branch_set
    combine = sr.join if use_join else sr.meet
    add, mul = sr.add, sr.mul
    one, zero = sr.one, sr.zero
    positions = [v for v in universe if v not in conditioned]
    n = len(positions)
    pos_of = {v: i for i, v in enumerate(positions)}
    # per-variable gap factor for levels skipped by both diagrams
    gaps = []
    for var in positions:
        wpos, wneg = wm.get(var)
        gaps.append(combine(wpos, wneg) if var in xset else add(wpos, wneg))
    suffix = [one] * (n + 1)
    for i in range(n - 1, -1, -1):
        suffix[i] = mul(gaps[i], suffix[i + 1])

    def top(f: int, v: int) -> int:
        p = n
        if f > TRUE:
            p = pos_of[mgr.var_of(f)]
        if v > TRUE:
            p = min(p, pos_of[mgr.var_of(v)])
        return p

    def span(i: int, j: int):
        if j >= n:
            return suffix[i]
        acc = one
        for k in range(i, j):
            acc = mul(acc, gaps[k])
        return acc

    memo = {}

    def rec(f: int, v: int):
        # value over the universe suffix from the topmost tested position
        if f == FALSE:
            return zero
        i = top(f, v)
        if i == n:
            return one
        key = (f, v)
        hit = memo.get(key)
        if hit is not None:
            return hit
        var = positions[i]
        if f > TRUE and mgr.var_of(f) == var:
            flo, fhi = mgr.children(f)
        else:
            flo = fhi = f
        if v > TRUE and mgr.var_of(v) == var:
            vlo, vhi = mgr.children(v)
        else:
            vlo = vhi = v
        wpos, wneg = wm.get(var)

        def branch_value(w, fc, vc):
            if fc == FALSE:
                return zero
            return mul(w, mul(span(i + 1, top(fc, vc)), rec(fc, vc)))

        if var in xset:
            # a literal whose validity child is unsatisfiable selects no
            # completion and is excluded from the join/meet outright
            parts = []
            if vhi != FALSE:
                parts.append(branch_value(wpos, fhi, vhi))
            if vlo != FALSE:
                parts.append(branch_value(wneg, flo, vlo))
            out = parts[0] if parts else zero
            for p in parts[1:]:
                out = combine(out, p)
        else:
            out = add(branch_value(wpos, fhi, vhi), branch_value(wneg, flo, vlo))
        memo[key] = out
        return out

    if validity == FALSE:
        return zero
    return mul(span(0, top(root, validity)), rec(root, validity))


def _check_partial(bbir: Bbir, partial: dict):
    outside = set(partial) - bbir.branch_set
    if outside:
        names = ", ".join(bbir.mgr.var_label(v) for v in sorted(outside))
        raise BbirError(f"assignment outside the branch variables: {names}")


def _policy_weight(bbir: Bbir, partial: dict):
    acc = bbir.semiring.one
    for var in sorted(partial):
        pos, neg = bbir.weights.get(var)
        acc = bbir.semiring.mul(acc, pos if partial[var] else neg)
    return acc


def ub(bbir: Bbir, formula: int, partial: dict):
    """Upper bound on AMC(formula|T) (x) prod w(T) over all completions T."""
    return _bound(bbir, formula, partial, use_join=True)


def lb(bbir: Bbir, formula: int, partial: dict):
    """Dual lower bound: meet instead of join at branch variables."""
    return _bound(bbir, formula, partial, use_join=False)


def _bound(bbir: Bbir, formula: int, partial: dict, use_join: bool):
    _check_partial(bbir, partial)
    mgr = bbir.mgr
    universe = bbir.universe_for(formula)
    cond_formula = mgr.condition_all(formula, partial)
    cond_valid = mgr.condition_all(bbir.validity, partial)
    pm = _policy_weight(bbir, partial)
    acc = _bound_pass(bbir, cond_formula, cond_valid, universe, set(partial), use_join)
    return bbir.semiring.mul(pm, acc)


# ---------------------------------------------------------------------------
# Objectives
# ---------------------------------------------------------------------------

class MeuObjective:
    """Maximum expected utility: maximize AMC(phi ^ gamma | pi)_EU / AMC(gamma | pi)_Pr."""

    kind = "meu"
    semiring = EXPECTATION

    def __init__(self, bbir: Bbir):
        if bbir.semiring is not EXPECTATION:
            raise BbirError("MEU requires the expectation semiring")
        if len(bbir.formulas) != 2:
            raise BbirError("MEU expects [unnormalized formula, accepting formula]")
        self.bbir = bbir
        mgr = bbir.mgr
        self.phi, self.gamma = bbir.formulas
        self.num_root = mgr.apply("and", self.phi, self.gamma)
        self.num_universe = sorted(mgr.support(self.num_root) | bbir.branch_set)
        self.den_universe = sorted(mgr.support(self.gamma) | bbir.branch_set)
        self.num_weights = bbir.weights.restrict(
            set(self.num_universe) - bbir.branch_set
        )
        self.den_weights = bbir.weights.restrict(
            set(self.den_universe) - bbir.branch_set
        )

    def initial_handles(self):
        return (self.num_root, self.gamma, self.bbir.validity)

    def evaluate_conditioned(self, handles, partial):
        num_h, den_h, _ = handles
        mgr = self.bbir.mgr
        num = mgr.amc(num_h, self.num_weights, EXPECTATION)
        den = mgr.amc(den_h, self.den_weights, EXPECTATION).prob
        return EXPECTATION.scalar_div(num, den)

    def bound_conditioned(self, handles, partial):
        num_h, den_h, valid_h = handles
        bbir = self.bbir
        conditioned = set(partial)
        t = EXPECTATION.mul(
            _policy_weight(bbir, partial),
            _bound_pass(bbir, num_h, valid_h, self.num_universe, conditioned, True),
        )
        low = _bound_pass(bbir, den_h, valid_h, self.den_universe, conditioned, False).prob
        high = _bound_pass(bbir, den_h, valid_h, self.den_universe, conditioned, True).prob
        return EXPECTATION.join(_div_bound(t, low), _div_bound(t, high))

    def scalar(self, value):
        return value.util


def _div_bound(t, r):
    # Upper-bound division: a zero denominator bound gives no information,
    # so the quotient must not prune anything (contrast scalar_div's -inf,
    # which is the *objective's* value when the evidence is impossible).
    if r == 0.0:
        return EXPECTATION.top
    return EXPECTATION.scalar_div(t, r)


class MmapObjective:
    """Marginal MAP: maximize the conditioned model mass of phi ^ gamma.

    ``prior`` fixes the prior variables E before the search; the reported
    value is the posterior probability of the maximizing assignment.
    """

    kind = "mmap"
    semiring = REAL

    def __init__(self, bbir: Bbir, prior: dict | None = None):
        if bbir.semiring is not REAL:
            raise BbirError("MMAP requires the real semiring")
        if len(bbir.formulas) != 2:
            raise BbirError("MMAP expects [model formula, evidence formula]")
        self.bbir = bbir
        self.prior = dict(prior or {})
        mgr = bbir.mgr
        self.phi, self.gamma = bbir.formulas
        overlap = set(self.prior) & bbir.branch_set
        if overlap:
            raise BbirError("prior variables must be disjoint from the branch variables")
        joint = mgr.apply("and", self.phi, self.gamma)
        self.num_root = mgr.condition_all(joint, self.prior)
        self.num_universe = sorted(
            (mgr.support(joint) | bbir.branch_set) - set(self.prior)
        )
        self.num_weights = bbir.weights.restrict(
            set(self.num_universe) - bbir.branch_set
        )
        # the normalizer marginalizes the MAP variables, so it is constant
        # during the search and can be computed exactly once up front
        self.den_weights = bbir.weights.restrict(self.num_universe)
        self.evidence_mass = mgr.amc(self.num_root, self.den_weights, REAL)
        if self.evidence_mass == 0.0:
            raise BbirError("evidence has zero mass")

    def initial_handles(self):
        return (self.num_root, None, self.bbir.validity)

    def evaluate_conditioned(self, handles, partial):
        num_h, _, _ = handles
        num = self.bbir.mgr.amc(num_h, self.num_weights, REAL)
        pm = _policy_weight(self.bbir, partial)
        return pm * num / self.evidence_mass

    def bound_conditioned(self, handles, partial):
        num_h, _, valid_h = handles
        t = _policy_weight(self.bbir, partial) * _bound_pass(
            self.bbir, num_h, valid_h, self.num_universe, set(partial), True
        )
        return t / self.evidence_mass

    def scalar(self, value):
        return value


def evaluate_objective(objective, bbir: Bbir, total: dict):
    """Exact objective value at a total branch assignment."""
    _check_partial(bbir, total)
    missing = bbir.branch_set - set(total)
    if missing:
        raise BbirError("policy is not total over the branch variables")
    handles = _condition_handles(bbir.mgr, objective.initial_handles(), total)
    return objective.evaluate_conditioned(handles, total)


def ub_f(objective, bbir: Bbir, partial: dict):
    """Upper bound of the objective over every completion of ``partial``."""
    _check_partial(bbir, partial)
    handles = _condition_handles(bbir.mgr, objective.initial_handles(), partial)
    return objective.bound_conditioned(handles, partial)


def _condition_handles(mgr, handles, assignment):
    return tuple(
        None if h is None else mgr.condition_all(h, assignment) for h in handles
    )


# ---------------------------------------------------------------------------
# The branch-and-bound search
# ---------------------------------------------------------------------------

@dataclass
class SearchStats:
    nodes_created: int = 0
    bound_calls: int = 0
    prunes: int = 0
    invalid: int = 0  # branches skipped because no completion is a policy
    base_cases: int = 0
    interior: int = 0
    elapsed_ms: float = 0.0

    def to_dict(self):
        return {
            "nodes_created": self.nodes_created,
            "bound_calls": self.bound_calls,
            "prunes": self.prunes,
            "invalid": self.invalid,
            "base_cases": self.base_cases,
            "interior": self.interior,
            "elapsed_ms": round(self.elapsed_ms, 3),
        }


@dataclass
class SolveResult:
    value: object
    scalar: float
    witness: dict
    stats: SearchStats
    semiring_name: str = "expectation"

    def policy_by_label(self, mgr: BddManager):
        return {mgr.var_label(v): val for v, val in sorted(self.witness.items())}

    def to_json_dict(self, mgr: BddManager):
        if self.semiring_name == "expectation":
            value = {"prob": self.value.prob, "util": self.value.util}
        else:
            value = self.value
        return {
            "value": value,
            "scalar": self.scalar,
            "policy": self.policy_by_label(mgr),
            "stats": self.stats.to_dict(),
        }

    def to_json(self, mgr: BddManager) -> str:
        return json.dumps(self.to_json_dict(mgr))


def bb(
    objective,
    bbir: Bbir,
    *,
    prune: bool = True,
    literal_order=(True, False),
    heuristic: str = "static",
) -> SolveResult:
    """Maximize the objective over total branch assignments (Fig.-8 style).

    Pruning skips a branch literal exactly when its bound is dominated by
    the incumbent under the lattice order; incomparable bounds always
    recurse.  ``literal_order`` fixes which literal is tried first, which
    determines the witness among ties (the first maximum found is kept).
    """
    sr = objective.semiring
    mgr = bbir.mgr
    t0 = time.perf_counter()
    nodes_before = mgr.num_nodes
    stats = SearchStats()
    order = list(bbir.branch_vars)
    state = {"best": None, "witness": None}

    def consider(value, partial):
        if state["best"] is None or (
            sr.total_le(state["best"], value) and state["best"] != value
        ):
            state["best"] = value
            state["witness"] = dict(partial)

    def recurse(handles, remaining, partial):
        if not remaining:
            stats.base_cases += 1
            consider(objective.evaluate_conditioned(handles, partial), partial)
            return
        stats.interior += 1
        if heuristic == "gap" and len(remaining) > 1:
            var = _widest_gap_var(objective, bbir, handles, remaining, partial, stats)
            rest = [r for r in remaining if r != var]
        else:
            var, rest = remaining[0], remaining[1:]
        for value in literal_order:
            child = _condition_handles(mgr, handles, {var: value})
            valid = child[-1]
            if valid == FALSE:
                stats.invalid += 1
                continue
            partial[var] = value
            stats.bound_calls += 1
            bound = objective.bound_conditioned(child, partial)
            if prune and state["best"] is not None and sr.cmp_le(bound, state["best"]):
                stats.prunes += 1
            else:
                recurse(child, rest, partial)
            del partial[var]

    recurse(objective.initial_handles(), order, {})
    if state["best"] is None:
        # every branch was invalid; report the bottom element
        state["best"] = sr.bottom
        state["witness"] = {}
    stats.nodes_created = mgr.num_nodes - nodes_before
    stats.elapsed_ms = (time.perf_counter() - t0) * 1000.0
    return SolveResult(
        value=state["best"],
        scalar=objective.scalar(state["best"]),
        witness=state["witness"],
        stats=stats,
        semiring_name=sr.name,
    )


def _widest_gap_var(objective, bbir, handles, remaining, partial, stats):
    """Pick the branch variable whose two literal bounds differ the most."""
    sr = objective.semiring
    best_var, best_gap = remaining[0], -1.0
    for var in remaining:
        scores = []
        for value in (True, False):
            child = _condition_handles(bbir.mgr, handles, {var: value})
            if child[-1] == FALSE:
                continue
            partial[var] = value
            stats.bound_calls += 1
            scores.append(sr.scalar_of(objective.bound_conditioned(child, partial)))
            del partial[var]
        if len(scores) == 2:
            gap = abs(scores[0] - scores[1])
            if gap > best_gap:
                best_var, best_gap = var, gap
    return best_var
