"""Shared builders: random tuple formulas mirrored into BDDs, random search problems."""

from __future__ import annotations

import random

from optppl import EV, EXPECTATION, REAL, Bbir, BddManager, WeightMap


def random_formula(rng: random.Random, names, depth=3):
    """Random nested-tuple formula over the given variable names."""
    if depth == 0 or rng.random() < 0.3:
        roll = rng.random()
        if roll < 0.85:
            return ("var", rng.choice(names))
        return ("lit", rng.random() < 0.5)
    op = rng.choice(["and", "or", "not", "xor", "iff"])
    if op == "not":
        return ("not", random_formula(rng, names, depth - 1))
    return (
        op,
        random_formula(rng, names, depth - 1),
        random_formula(rng, names, depth - 1),
    )


def build_bdd(mgr: BddManager, formula, var_of: dict) -> int:
    tag = formula[0]
    if tag == "lit":
        return mgr.mk_true() if formula[1] else mgr.mk_false()
    if tag == "var":
        return mgr.mk_var(var_of[formula[1]])
    if tag == "not":
        return mgr.negate(build_bdd(mgr, formula[1], var_of))
    return mgr.apply(
        tag, build_bdd(mgr, formula[1], var_of), build_bdd(mgr, formula[2], var_of)
    )


def fresh_vars(mgr: BddManager, count, stem="v"):
    return [mgr.new_var(f"{stem}{i}") for i in range(count)]


def random_ev_weights(rng: random.Random, variables, util_lo=0.0, util_hi=10.0):
    """Expectation-semiring weights; utilities default to nonnegative."""
    wm = WeightMap()
    for v in variables:
        wm.set(
            v,
            EV(rng.uniform(0.0, 1.5), rng.uniform(util_lo, util_hi)),
            EV(rng.uniform(0.0, 1.5), rng.uniform(util_lo, util_hi)),
        )
    return wm


def random_real_weights(rng: random.Random, variables, unit_vars=()):
    wm = WeightMap()
    for v in variables:
        if v in unit_vars:
            wm.set(v, 1.0, 1.0)
        else:
            wm.set(v, rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0))
    return wm


def random_bbir(rng: random.Random, n_vars=None, n_branch=None, semiring=EXPECTATION):
    """Random single-formula search problem with nonnegative utilities."""
    if n_vars is None:
        n_vars = rng.randint(3, 8)
    if n_branch is None:
        n_branch = rng.randint(1, min(6, n_vars))
    mgr = BddManager()
    names = [f"v{i}" for i in range(n_vars)]
    variables = fresh_vars(mgr, n_vars)
    var_of = dict(zip(names, variables))
    formula = random_formula(rng, names, depth=4)
    root = build_bdd(mgr, formula, var_of)
    support = sorted(mgr.support(root))
    k = min(n_branch, len(support))
    branch = sorted(rng.sample(support, k=k)) if k else []
    if semiring is EXPECTATION:
        wm = random_ev_weights(rng, variables)
    else:
        wm = random_real_weights(rng, variables)
    bbir = Bbir(
        mgr=mgr,
        formulas=[root],
        branch_vars=branch,
        weights=wm,
        semiring=semiring,
        validity=mgr.mk_true(),
    )
    return bbir, formula, var_of


def random_meu_instance(rng: random.Random, util_lo=0.0, util_hi=10.0):
    """Two-formula expectation problem with unit weights on decisions."""
    mgr = BddManager()
    n = rng.randint(4, 8)
    names = [f"v{i}" for i in range(n)]
    ids = fresh_vars(mgr, n)
    var_of = dict(zip(names, ids))
    phi = build_bdd(mgr, random_formula(rng, names, 4), var_of)
    gamma = (
        build_bdd(mgr, random_formula(rng, names, 2), var_of)
        if rng.random() < 0.6
        else mgr.mk_true()
    )
    support = sorted(mgr.support(phi) | mgr.support(gamma))
    if not support:
        return None
    branch = sorted(rng.sample(support, k=rng.randint(1, min(4, len(support)))))
    wm = WeightMap()
    for v in ids:
        if v in branch:
            wm.set(v, EV(1.0, 0.0), EV(1.0, 0.0))
        else:
            wm.set(
                v,
                EV(rng.uniform(0, 1.2), rng.uniform(util_lo, util_hi)),
                EV(rng.uniform(0, 1.2), rng.uniform(util_lo, util_hi)),
            )
    return Bbir(
        mgr=mgr, formulas=[phi, gamma], branch_vars=branch, weights=wm,
        semiring=EXPECTATION,
    )


def random_mmap_instance(rng: random.Random):
    """Real-semiring model/evidence pair; returns (bbir, joint formula, names)."""
    mgr = BddManager()
    n = rng.randint(4, 8)
    names = [f"v{i}" for i in range(n)]
    ids = fresh_vars(mgr, n)
    var_of = dict(zip(names, ids))
    f_phi = random_formula(rng, names, 4)
    f_gam = random_formula(rng, names, 2) if rng.random() < 0.5 else ("lit", True)
    phi = build_bdd(mgr, f_phi, var_of)
    gamma = build_bdd(mgr, f_gam, var_of)
    support = sorted(mgr.support(phi) | mgr.support(gamma))
    if not support:
        return None
    map_vars = sorted(rng.sample(support, k=rng.randint(1, min(4, len(support)))))
    wm = random_real_weights(rng, ids, unit_vars=set(map_vars))
    bbir = Bbir(
        mgr=mgr, formulas=[phi, gamma], branch_vars=map_vars, weights=wm,
        semiring=REAL,
    )
    return bbir, ("and", f_phi, f_gam), var_of


def all_assignments(variables):
    import itertools

    variables = sorted(variables)
    for bits in itertools.product((False, True), repeat=len(variables)):
        yield dict(zip(variables, bits))


def substitute(formula, name_values: dict):
    """Pin named variables in a tuple formula."""
    tag = formula[0]
    if tag == "lit":
        return formula
    if tag == "var":
        if formula[1] in name_values:
            return ("lit", name_values[formula[1]])
        return formula
    if tag == "not":
        return ("not", substitute(formula[1], name_values))
    return (tag, substitute(formula[1], name_values), substitute(formula[2], name_values))


def rename_formula(formula, mapping: dict):
    """Relabel the variables of a tuple formula (e.g. names -> ids)."""
    tag = formula[0]
    if tag == "lit":
        return formula
    if tag == "var":
        return ("var", mapping[formula[1]])
    if tag == "not":
        return ("not", rename_formula(formula[1], mapping))
    return (tag, rename_formula(formula[1], mapping), rename_formula(formula[2], mapping))
