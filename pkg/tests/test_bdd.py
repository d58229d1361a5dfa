"""Decision-diagram engine: canonicity, combinators, and model counting."""

import random

import pytest

from optppl import EV, EXPECTATION, FALSE, REAL, TRUE, BddError, BddManager, WeightMap
from optppl.oracle import brute_amc

from helpers import all_assignments, build_bdd, fresh_vars, random_formula, rename_formula


@pytest.fixture
def mgr():
    return BddManager()


def truth_table(mgr, node, universe):
    return tuple(
        any(sigma == m for m in mgr.enumerate_models(node, universe))
        for sigma in all_assignments(universe)
    )


class TestConstruction:
    def test_mk_var_hash_consing(self, mgr):
        r = mgr.new_var("r")
        assert mgr.mk_var(r) == mgr.mk_var(r)

    def test_negate_terminals(self, mgr):
        assert mgr.negate(mgr.mk_true()) == mgr.mk_false()
        assert mgr.negate(mgr.mk_false()) == mgr.mk_true()

    def test_contradiction_collapses(self, mgr):
        r = mgr.new_var("r")
        node = mgr.apply("and", mgr.mk_var(r), mgr.negate(mgr.mk_var(r)))
        assert node == FALSE

    def test_iff_with_true_is_identity(self, mgr):
        x = mgr.new_var("x")
        assert mgr.apply("iff", mgr.mk_var(x), mgr.mk_true()) == mgr.mk_var(x)

    def test_unknown_variable_rejected(self, mgr):
        with pytest.raises(BddError):
            mgr.mk_var(3)

    def test_no_redundant_nodes(self, mgr):
        x, y = mgr.new_var("x"), mgr.new_var("y")
        node = mgr.ite(mgr.mk_var(x), mgr.mk_var(y), mgr.mk_var(y))
        assert node == mgr.mk_var(y)


class TestApplyAgainstTruthTables:
    @pytest.mark.parametrize("seed", range(8))
    def test_random_formulas_match_brute_force(self, seed):
        rng = random.Random(seed)
        mgr = BddManager()
        names = ["a", "b", "c", "d"]
        ids = dict(zip(names, fresh_vars(mgr, 4)))
        formula = random_formula(rng, names, depth=4)
        node = build_bdd(mgr, formula, ids)
        from optppl.oracle import feval

        for sigma in all_assignments(names):
            expected = feval(formula, sigma)
            got = any(
                all(m[ids[n]] == sigma[n] for n in names)
                for m in mgr.enumerate_models(node, ids.values())
            )
            assert got == expected

    def test_canonicity_of_equivalent_formulas(self):
        rng = random.Random(99)
        mgr = BddManager()
        names = ["a", "b", "c"]
        ids = dict(zip(names, fresh_vars(mgr, 3)))
        seen = {}
        for _ in range(60):
            formula = random_formula(rng, names, depth=3)
            node = build_bdd(mgr, formula, ids)
            table = truth_table(mgr, node, list(ids.values()))
            if table in seen:
                assert seen[table] == node  # same function, same handle
            seen[table] = node


class TestCondition:
    def test_worked_umbrella_conditioning(self, mgr):
        r, r10, r5, r100 = (mgr.new_var(n) for n in ["r", "R10", "R-5", "R-100"])
        lit = mgr.mk_lit
        phi_u = mgr.apply(
            "or",
            mgr.conjoin([lit(r, True), lit(r10, True), lit(r5, False), lit(r100, False)]),
            mgr.conjoin([lit(r, False), lit(r10, False), lit(r5, True), lit(r100, False)]),
        )
        conditioned = mgr.condition(phi_u, r, True)
        expected = mgr.conjoin([lit(r10, True), lit(r5, False), lit(r100, False)])
        assert conditioned == expected

    def test_idempotent(self, mgr):
        x, y = mgr.new_var("x"), mgr.new_var("y")
        node = mgr.apply("or", mgr.mk_var(x), mgr.mk_var(y))
        once = mgr.condition(node, x, True)
        assert mgr.condition(once, x, True) == once

    def test_absent_variable_is_identity(self, mgr):
        x, y = mgr.new_var("x"), mgr.new_var("y")
        node = mgr.mk_var(y)
        assert mgr.condition(node, x, False) == node

    def test_conditioned_variable_leaves_support(self):
        rng = random.Random(5)
        for seed in range(20):
            mgr = BddManager()
            names = ["a", "b", "c", "d"]
            ids = dict(zip(names, fresh_vars(mgr, 4)))
            node = build_bdd(mgr, random_formula(rng, names, 3), ids)
            for n in names:
                for value in (False, True):
                    assert ids[n] not in mgr.support(mgr.condition(node, ids[n], value))

    def test_condition_matches_restricted_truth_table(self):
        rng = random.Random(17)
        from optppl.oracle import feval

        for seed in range(10):
            mgr = BddManager()
            names = ["a", "b", "c", "d"]
            ids = dict(zip(names, fresh_vars(mgr, 4)))
            formula = random_formula(rng, names, depth=4)
            node = build_bdd(mgr, formula, ids)
            pick = rng.choice(names)
            value = rng.random() < 0.5
            conditioned = mgr.condition(node, ids[pick], value)
            rest = [n for n in names if n != pick]
            for sigma in all_assignments(rest):
                sigma_full = dict(sigma)
                sigma_full[pick] = value
                want = feval(formula, sigma_full)
                got = any(
                    all(m.get(ids[n], sigma[n]) == sigma[n] for n in rest)
                    for m in mgr.enumerate_models(conditioned, [ids[n] for n in rest])
                )
                assert got == want


class TestExactlyOne:
    def test_singleton(self, mgr):
        v = mgr.new_var("v")
        assert mgr.exactly_one([v]) == mgr.mk_var(v)

    def test_two_models(self, mgr):
        u, n = mgr.new_var("u"), mgr.new_var("n")
        node = mgr.exactly_one([u, n])
        models = [frozenset(m.items()) for m in mgr.enumerate_models(node, [u, n])]
        assert sorted(models, key=sorted) == sorted(
            [frozenset({(u, True), (n, False)}), frozenset({(u, False), (n, True)})],
            key=sorted,
        )

    def test_five_variables_five_models(self, mgr):
        ids = fresh_vars(mgr, 5)
        node = mgr.exactly_one(ids)
        assert mgr.model_count(node, ids) == 5

    def test_empty_rejected(self, mgr):
        with pytest.raises(BddError):
            mgr.exactly_one([])

    def test_duplicates_rejected(self, mgr):
        v = mgr.new_var("v")
        with pytest.raises(BddError):
            mgr.exactly_one([v, v])


def section2_weights(mgr, ids):
    r, r10, r5, r100 = ids
    return WeightMap(
        {
            r: (EV(0.1, 0), EV(0.9, 0)),
            r10: (EV(1, 10), EV(1, 0)),
            r5: (EV(1, -5), EV(1, 0)),
            r100: (EV(1, -100), EV(1, 0)),
        }
    )


class TestAmc:
    def test_umbrella_worked_example(self, mgr):
        ids = [mgr.new_var(n) for n in ["r", "R10", "R-5", "R-100"]]
        r, r10, r5, r100 = ids
        lit = mgr.mk_lit
        phi_u = mgr.apply(
            "or",
            mgr.conjoin([lit(r, True), lit(r10, True), lit(r5, False), lit(r100, False)]),
            mgr.conjoin([lit(r, False), lit(r10, False), lit(r5, True), lit(r100, False)]),
        )
        value = mgr.amc(phi_u, section2_weights(mgr, ids), EXPECTATION)
        assert EXPECTATION.isclose(value, EV(1.0, -3.5))

    def test_false_counts_to_zero(self, mgr):
        ids = [mgr.new_var(n) for n in ["r", "R10", "R-5", "R-100"]]
        assert mgr.amc(FALSE, section2_weights(mgr, ids), EXPECTATION) == EXPECTATION.zero

    def test_true_gap_factors(self, mgr):
        x, r = mgr.new_var("x"), mgr.new_var("r")
        wm = WeightMap({x: (EV(0.3, 0), EV(0.7, 0)), r: (EV(1, 5), EV(1, 0))})
        value = mgr.amc(TRUE, wm, EXPECTATION)
        assert EXPECTATION.isclose(value, EV(2.0, 5.0))

    def test_unweighted_variable_rejected(self, mgr):
        x, y = mgr.new_var("x"), mgr.new_var("y")
        node = mgr.apply("and", mgr.mk_var(x), mgr.mk_var(y))
        with pytest.raises(BddError):
            mgr.amc(node, WeightMap({x: (EV(1, 0), EV(1, 0))}), EXPECTATION)

    @pytest.mark.parametrize("seed", range(20))
    def test_random_formulas_match_brute_force(self, seed):
        # includes weight maps whose literal pairs do not sum to the unit
        rng = random.Random(seed)
        mgr = BddManager()
        n = rng.randint(2, 8)
        names = [f"v{i}" for i in range(n)]
        ids = dict(zip(names, fresh_vars(mgr, n)))
        formula = random_formula(rng, names, depth=4)
        node = build_bdd(mgr, formula, ids)
        universe = sorted(ids.values())
        wm = WeightMap()
        wdict = {}
        for v in universe:
            pair = (
                EV(rng.uniform(0, 2), rng.uniform(-10, 10)),
                EV(rng.uniform(0, 2), rng.uniform(-10, 10)),
            )
            wm.set(v, *pair)
            wdict[v] = pair
        got = mgr.amc(node, wm, EXPECTATION)
        want = brute_amc(rename_formula(formula, ids), wdict, universe, EXPECTATION)
        assert EXPECTATION.isclose(got, want, 1e-9)

    def test_real_semiring_matches_brute_force(self):
        rng = random.Random(123)
        mgr = BddManager()
        names = ["a", "b", "c"]
        ids = dict(zip(names, fresh_vars(mgr, 3)))
        formula = random_formula(rng, names, depth=3)
        node = build_bdd(mgr, formula, ids)
        universe = sorted(ids.values())
        wdict = {v: (rng.uniform(0, 1), rng.uniform(0, 1)) for v in universe}
        wm = WeightMap(wdict)
        got = mgr.amc(node, wm, REAL)
        want = brute_amc(rename_formula(formula, ids), wdict, universe, REAL)
        assert abs(got - want) < 1e-9

    def test_visits_linear_in_node_count(self):
        rng = random.Random(3)
        mgr = BddManager()
        names = [f"v{i}" for i in range(8)]
        ids = dict(zip(names, fresh_vars(mgr, 8)))
        node = build_bdd(mgr, random_formula(rng, names, depth=6), ids)
        wm = WeightMap({v: (EV(0.5, 1), EV(0.5, 0)) for v in ids.values()})
        mgr.amc(node, wm, EXPECTATION)
        reachable = len(mgr.reachable_nodes([node]))
        assert mgr.amc_visits <= reachable
        # a second count over the same weights is fully cached
        mgr.amc(node, wm, EXPECTATION)
        assert mgr.amc_visits == 0


class TestEnumerationAndDot:
    def test_enumerate_true_over_one_var(self, mgr):
        x = mgr.new_var("x")
        models = list(mgr.enumerate_models(TRUE, [x]))
        assert models == [{x: False}, {x: True}]

    def test_enumerate_umbrella_models(self, mgr):
        ids = [mgr.new_var(n) for n in ["r", "R10", "R-5", "R-100"]]
        r, r10, r5, r100 = ids
        lit = mgr.mk_lit
        phi_u = mgr.apply(
            "or",
            mgr.conjoin([lit(r, True), lit(r10, True), lit(r5, False), lit(r100, False)]),
            mgr.conjoin([lit(r, False), lit(r10, False), lit(r5, True), lit(r100, False)]),
        )
        assert mgr.model_count(phi_u, ids) == 2

    def test_dot_output_shape(self, mgr):
        x, y = mgr.new_var("x"), mgr.new_var("y")
        node = mgr.apply("or", mgr.mk_var(x), mgr.mk_var(y))
        text = mgr.to_dot([node])
        assert text.startswith("digraph bdd {") and text.endswith("}")
        assert "style=solid" in text and "style=dashed" in text
        assert 'shape=box' in text
        assert text.count("->") >= 3
