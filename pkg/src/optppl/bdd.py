"""Hash-consed reduced ordered BDDs with a semiring-generic model-count pass.

One :class:`BddManager` owns a variable order (fixed at registration time),
the unique table, and the operation caches.  Handles are plain ints; the
terminals are ``FALSE = 0`` and ``TRUE = 1``.  Handles from different
managers must never be mixed; a manager and everything derived from it is
confined to a single thread.

The algebraic model count (:meth:`BddManager.amc`) sums literal-weight
products over all models of a formula, where the model universe is the
domain of the supplied weight map.  Universe variables skipped along a BDD
edge (or missing from the diagram entirely) contribute a gap factor
``w(v) + w(~v)`` each; this keeps the count exact even when a variable's
two literal weights do not sum to the multiplicative unit.
"""

from __future__ import annotations

import sys
from typing import Iterable, Iterator

FALSE = 0
TRUE = 1

_OPS = ("and", "or", "xor", "iff")


class BddError(Exception):
    pass


class WeightMap:
    """Map from variables to a (positive literal, negative literal) weight pair.

    Weighting one literal of a variable always weights the other, so entries
    are stored per variable.  Unions are non-aliased: merging two maps that
    disagree on a shared variable is an error.
    """

    def __init__(self, entries=None):
        self._w = {}
        self.version = 0
        if entries:
            for var, (pos, neg) in entries.items():
                self.set(var, pos, neg)

    def set(self, var: int, pos, neg):
        self._w[var] = (pos, neg)
        self.version += 1

    def get(self, var: int):
        return self._w[var]

    def __contains__(self, var: int) -> bool:
        return var in self._w

    def __len__(self) -> int:
        return len(self._w)

    @property
    def vars(self):
        return self._w.keys()

    def items(self):
        return self._w.items()

    def union(self, other: "WeightMap") -> "WeightMap":
        """Non-aliased union; a conflicting shared entry is an error."""
        merged = WeightMap()
        merged._w = dict(self._w)
        for var, wt in other._w.items():
            if var in merged._w and merged._w[var] != wt:
                raise BddError(f"aliased weight-map union on variable {var}")
            merged._w[var] = wt
        return merged

    def restrict(self, keep: Iterable[int]) -> "WeightMap":
        sub = WeightMap()
        sub._w = {v: self._w[v] for v in keep}
        return sub

    def key(self):
        return (id(self), self.version)


class BddManager:
    """Unique-table BDD manager; the variable order is registration order."""

    def __init__(self):
        # node arrays; slots 0/1 are the terminals
        self._var = [-1, -1]
        self._lo = [-1, -1]
        self._hi = [-1, -1]
        self._unique = {}
        self._apply_cache = {}
        self._neg_cache = {}
        self._cond_cache = {}
        self._amc_caches = {}
        self._labels = []
        self._by_label = {}
        self.amc_visits = 0  # recursion entries of the most recent amc call

    # -- variables ---------------------------------------------------------

    def new_var(self, label: str) -> int:
        """Register a fresh variable at the end of the order."""
        if label in self._by_label:
            raise BddError(f"duplicate variable label {label!r}")
        idx = len(self._labels)
        self._labels.append(label)
        self._by_label[label] = idx
        return idx

    def ensure_var(self, label: str) -> int:
        """Like :meth:`new_var`, but reuse a pre-registered label.

        Compilers register through this so an explicit order list (which
        pre-registers labels up front) pins those variables' positions.
        """
        existing = self._by_label.get(label)
        if existing is not None:
            return existing
        return self.new_var(label)

    def var_label(self, var: int) -> str:
        return self._labels[var]

    def var_by_label(self, label: str) -> int:
        return self._by_label[label]

    @property
    def num_vars(self) -> int:
        return len(self._labels)

    @property
    def num_nodes(self) -> int:
        return len(self._var)

    # -- node construction --------------------------------------------------

    def _mk(self, var: int, lo: int, hi: int) -> int:
        if lo == hi:
            return lo
        key = (var, lo, hi)
        node = self._unique.get(key)
        if node is None:
            node = len(self._var)
            self._var.append(var)
            self._lo.append(lo)
            self._hi.append(hi)
            self._unique[key] = node
        return node

    def mk_true(self) -> int:
        return TRUE

    def mk_false(self) -> int:
        return FALSE

    def mk_var(self, var: int) -> int:
        if not 0 <= var < len(self._labels):
            raise BddError(f"unknown variable {var}")
        return self._mk(var, FALSE, TRUE)

    def mk_lit(self, var: int, positive: bool) -> int:
        node = self.mk_var(var)
        return node if positive else self.negate(node)

    def var_of(self, node: int) -> int:
        return self._var[node]

    def children(self, node: int):
        return self._lo[node], self._hi[node]

    def is_terminal(self, node: int) -> bool:
        return node <= TRUE

    # -- boolean combinators -------------------------------------------------

    def apply(self, op: str, a: int, b: int) -> int:
        if op not in _OPS:
            raise BddError(f"unknown operator {op!r}")
        return self._apply(op, a, b)

    def drop_op_caches(self):
        """Release the apply/negate/condition caches (nodes are kept)."""
        self._apply_cache.clear()
        self._neg_cache.clear()
        self._cond_cache.clear()

    def _apply(self, op: str, a: int, b: int) -> int:
        term = self._apply_terminal(op, a, b)
        if term is not None:
            return term
        cache = self._apply_cache
        key = (op, a, b)
        hit = cache.get(key)
        if hit is not None:
            return hit
        var, lo, hi = self._var, self._lo, self._hi
        va, vb = var[a], var[b]
        if va == vb:
            top = va
            alo, ahi = lo[a], hi[a]
            blo, bhi = lo[b], hi[b]
        elif vb == -1 or (va != -1 and va < vb):
            top, alo, ahi, blo, bhi = va, lo[a], hi[a], b, b
        else:
            top, alo, ahi, blo, bhi = vb, a, a, lo[b], hi[b]
        out = self._mk(top, self._apply(op, alo, blo), self._apply(op, ahi, bhi))
        cache[key] = out
        return out

    @staticmethod
    def _apply_terminal(op, a, b):
        if op == "and":
            if a == FALSE or b == FALSE:
                return FALSE
            if a == TRUE:
                return b
            if b == TRUE:
                return a
            if a == b:
                return a
        elif op == "or":
            if a == TRUE or b == TRUE:
                return TRUE
            if a == FALSE:
                return b
            if b == FALSE:
                return a
            if a == b:
                return a
        elif op == "xor":
            if a == b:
                return FALSE
            if a == FALSE:
                return b
            if b == FALSE:
                return a
        elif op == "iff":
            if a == b:
                return TRUE
            if a == TRUE:
                return b
            if b == TRUE:
                return a
        return None

    def negate(self, a: int) -> int:
        if a <= TRUE:
            return TRUE - a
        hit = self._neg_cache.get(a)
        if hit is None:
            hit = self._mk(self._var[a], self.negate(self._lo[a]), self.negate(self._hi[a]))
            self._neg_cache[a] = hit
            self._neg_cache[hit] = a
        return hit

    def ite(self, g: int, t: int, e: int) -> int:
        return self._apply(
            "or", self._apply("and", g, t), self._apply("and", self.negate(g), e)
        )

    def conjoin(self, nodes: Iterable[int]) -> int:
        acc = TRUE
        for n in nodes:
            acc = self._apply("and", acc, n)
        return acc

    def disjoin(self, nodes: Iterable[int]) -> int:
        acc = FALSE
        for n in nodes:
            acc = self._apply("or", acc, n)
        return acc

    # -- conditioning and structure -----------------------------------------

    def condition(self, a: int, var: int, value: bool) -> int:
        """Fix ``var`` to ``value``; conditioning on an absent variable is identity."""
        if a <= TRUE:
            return a
        v = self._var[a]
        if v > var:
            return a
        if v == var:
            return self._hi[a] if value else self._lo[a]
        key = (a, var, value)
        hit = self._cond_cache.get(key)
        if hit is None:
            hit = self._mk(
                v,
                self.condition(self._lo[a], var, value),
                self.condition(self._hi[a], var, value),
            )
            self._cond_cache[key] = hit
        return hit

    def condition_all(self, a: int, assignment) -> int:
        for var in sorted(assignment):
            a = self.condition(a, var, assignment[var])
        return a

    def support(self, a: int) -> set:
        """Variables the function actually depends on (one linear sweep)."""
        out = set()
        for n in self.reachable_nodes([a]):
            out.add(self._var[n])
        return out

    def reachable_nodes(self, roots) -> set:
        seen = set()
        stack = list(roots)
        while stack:
            n = stack.pop()
            if n in seen or n <= TRUE:
                continue
            seen.add(n)
            stack.append(self._lo[n])
            stack.append(self._hi[n])
        return seen

    # -- exactly-one constraint ----------------------------------------------

    def exactly_one(self, variables) -> int:
        """BDD satisfied exactly when one of ``variables`` is true."""
        variables = list(variables)
        if not variables:
            raise BddError("exactly_one of an empty variable list")
        if len(set(variables)) != len(variables):
            raise BddError("exactly_one variables must be distinct")
        for v in variables:
            if not 0 <= v < len(self._labels):
                raise BddError(f"unknown variable {v}")
        order = sorted(variables)
        none_yet = TRUE  # all remaining false
        one_yet = FALSE  # exactly one of remaining true
        for v in reversed(order):
            one_yet = self._mk(v, one_yet, none_yet)
            none_yet = self._mk(v, none_yet, FALSE)
        return one_yet

    # -- algebraic model counting ---------------------------------------------

    def amc(self, root: int, weights: WeightMap, semiring):
        """Semiring sum over all models of ``root`` in the weight-map universe.

        Every variable in the support of ``root`` must be weighted; weighted
        variables not tested on a path contribute their gap factor.
        """
        uni = sorted(weights.vars)
        cache_key = (weights.key(), semiring.name)
        cache = self._amc_caches.setdefault(cache_key, {})
        # keep at most a few live weight-map generations around
        if len(self._amc_caches) > 64:
            self._amc_caches.clear()
            cache = self._amc_caches.setdefault(cache_key, {})
        self.amc_visits = 0
        mul, add = semiring.mul, semiring.add
        one, zero = semiring.one, semiring.zero
        n_uni = len(uni)
        pos_of = {v: i for i, v in enumerate(uni)}
        gaps = [add(*weights.get(v)) for v in uni]
        suffix = [one] * (n_uni + 1)
        for i in range(n_uni - 1, -1, -1):
            suffix[i] = mul(gaps[i], suffix[i + 1])

        def span(i: int, child: int):
            # gap factors between a node at position i-1 and its child
            if child == FALSE:
                return one  # annihilated anyway
            if child == TRUE:
                return suffix[i]
            acc = one
            for k in range(i, self._position(child, pos_of)):
                acc = mul(acc, gaps[k])
            return acc

        def rec(node: int):
            # value over the universe suffix starting at this node's variable
            if node == FALSE:
                return zero
            if node == TRUE:
                return one  # the caller's edge gap covers the rest
            val = cache.get(node)
            if val is not None:
                return val
            self.amc_visits += 1
            i = self._position(node, pos_of)
            wpos, wneg = weights.get(self._var[node])
            lo, hi = self._lo[node], self._hi[node]
            lo_val = mul(span(i + 1, lo), rec(lo))
            hi_val = mul(span(i + 1, hi), rec(hi))
            val = add(mul(wpos, hi_val), mul(wneg, lo_val))
            cache[node] = val
            return val

        if root == FALSE:
            return zero
        if root == TRUE:
            return suffix[0]
        acc = one
        for k in range(0, self._position(root, pos_of)):
            acc = mul(acc, gaps[k])
        return mul(acc, rec(root))

    def _position(self, node, pos_of):
        try:
            return pos_of[self._var[node]]
        except KeyError:
            raise BddError(
                f"unweighted variable in formula: {self._labels[self._var[node]]}"
            ) from None

    # -- model enumeration and export ------------------------------------------

    def enumerate_models(self, root: int, universe) -> Iterator[dict]:
        """Yield every satisfying total assignment over ``universe``."""
        universe = sorted(universe)
        missing = self.support(root) - set(universe)
        if missing:
            raise BddError("universe does not cover the formula's variables")

        def rec(node, i, partial):
            if node == FALSE:
                return
            if i == len(universe):
                yield dict(partial)
                return
            v = universe[i]
            nv = self._var[node] if node > TRUE else -1
            for value in (False, True):
                if nv == v:
                    child = self._hi[node] if value else self._lo[node]
                else:
                    child = node
                partial[v] = value
                yield from rec(child, i + 1, partial)
            del partial[v]

        yield from rec(root, 0, {})

    def model_count(self, root: int, universe) -> int:
        return sum(1 for _ in self.enumerate_models(root, universe))

    def to_dot(self, roots, names=None) -> str:
        """GraphViz text: solid high edges, dashed low edges, boxed terminals."""
        if isinstance(roots, int):
            roots = [roots]
        lines = ["digraph bdd {"]
        lines.append('  node [shape=circle];')
        lines.append('  n0 [label="0", shape=box];')
        lines.append('  n1 [label="1", shape=box];')
        for i, r in enumerate(roots):
            name = names[i] if names else f"root{i}"
            lines.append(f'  {name} [label="{name}", shape=plaintext];')
            lines.append(f"  {name} -> n{r};")
        for n in sorted(self.reachable_nodes(roots)):
            label = self._labels[self._var[n]].replace('"', "'")
            lines.append(f'  n{n} [label="{label}"];')
            lines.append(f"  n{n} -> n{self._hi[n]} [style=solid];")
            lines.append(f"  n{n} -> n{self._lo[n]} [style=dashed];")
        lines.append("}")
        return "\n".join(lines)


def _bump_recursion_limit():
    if sys.getrecursionlimit() < 100000:
        sys.setrecursionlimit(100000)


_bump_recursion_limit()
