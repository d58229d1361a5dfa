"""Boolean compilation of core programs to the branch-and-bound IR.

An expression compiles to ``(phi, gamma, pending, rewards)``: the trace
formula for true-returning executions, the accepting formula collecting
observations, the rewards awaiting discharge, and the set of every reward
variable introduced in the subexpression.  Conditionals discharge their
branches' pending rewards inside the guarded disjunct and pin the opposite
branch's reward variables false, so each model awards exactly the rewards
of the trace it describes.  Finalization conjoins the remaining pending
rewards onto ``phi``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..bdd import TRUE, BddManager, WeightMap
from ..bbir import Bbir
from ..semiring import EV, EXPECTATION
from . import ast as A


class DapplCompileError(Exception):
    pass


@dataclass
class ChoiceSite:
    site: int
    names: tuple
    vars: tuple
    eo: int  # exactly-one constraint handle


@dataclass
class CompiledDappl:
    mgr: BddManager
    phi: int
    gamma: int
    trace: int
    weights: WeightMap
    pending: tuple
    sites: list = field(default_factory=list)

    def finalize(self) -> Bbir:
        """Conjoin pending rewards and package the search problem.

        The accepting formula is conjoined with the trace formula: an
        observation may test a bound value whose formula mentions reward
        variables, and only trace-consistent models weigh the acceptance
        mass correctly.  The unnormalized side already entails the trace
        structure, so its count is unchanged.
        """
        phi = self.mgr.conjoin([self.phi] + [self.mgr.mk_var(r) for r in self.pending])
        gamma = self.mgr.apply("and", self.gamma, self.trace)
        used = self.mgr.support(phi) | self.mgr.support(gamma)
        branch_vars = []
        validity = TRUE
        for site in self.sites:
            if any(v in used for v in site.vars):
                branch_vars.extend(site.vars)
                validity = self.mgr.apply("and", validity, site.eo)
        return Bbir(
            mgr=self.mgr,
            formulas=[phi, gamma],
            branch_vars=sorted(branch_vars),
            weights=self.weights,
            semiring=EXPECTATION,
            validity=validity,
        )


class _BoolVal:
    __slots__ = ("handle",)

    def __init__(self, handle):
        self.handle = handle


class _ChoiceVal:
    __slots__ = ("site",)

    def __init__(self, site):
        self.site = site


class Compiler:
    def __init__(self, mgr: BddManager | None = None):
        self.mgr = mgr if mgr is not None else BddManager()
        self.weights = WeightMap()
        self.sites = []
        self._flips = 0
        self._rewards = 0

    # -- variable creation ----------------------------------------------------

    def _fresh_flip(self, theta: float) -> int:
        self._flips += 1
        v = self.mgr.ensure_var(f"f_{theta:g}#{self._flips}")
        self.weights.set(v, EV(theta, 0.0), EV(1.0 - theta, 0.0))
        return v

    def _fresh_reward(self, amount: float) -> int:
        self._rewards += 1
        v = self.mgr.ensure_var(f"r_{amount:g}#{self._rewards}")
        self.weights.set(v, EV(1.0, amount), EV(1.0, 0.0))
        return v

    def _fresh_site(self, names) -> ChoiceSite:
        sid = len(self.sites)
        vars_ = tuple(self.mgr.ensure_var(f"c{sid}.{name}") for name in names)
        for v in vars_:
            self.weights.set(v, EV(1.0, 0.0), EV(1.0, 0.0))
        site = ChoiceSite(site=sid, names=tuple(names), vars=vars_, eo=self.mgr.exactly_one(vars_))
        self.sites.append(site)
        return site

    # -- pure terms -------------------------------------------------------------

    def compile_pure(self, p: A.Pure, env: dict) -> int:
        if isinstance(p, A.PLit):
            return self.mgr.mk_true() if p.value else self.mgr.mk_false()
        if isinstance(p, A.PVar):
            val = env.get(p.name)
            if not isinstance(val, _BoolVal):
                raise DapplCompileError(f"{p.name!r} is not a Boolean binding")
            return val.handle
        if isinstance(p, A.PAnd):
            return self.mgr.apply(
                "and", self.compile_pure(p.left, env), self.compile_pure(p.right, env)
            )
        if isinstance(p, A.POr):
            return self.mgr.apply(
                "or", self.compile_pure(p.left, env), self.compile_pure(p.right, env)
            )
        if isinstance(p, A.PNot):
            return self.mgr.negate(self.compile_pure(p.operand, env))
        raise DapplCompileError(f"bad pure term {p!r}")

    # -- expressions ---------------------------------------------------------------

    def compile(self, e: A.Expr, env: dict):
        """Return (phi, gamma, trace, pending reward vars, all reward vars).

        ``trace`` mirrors the reward-discharge structure of ``phi`` but sums
        over both return values; a bind conjoins its value's trace so rewards
        discharged inside an unused binding still constrain every model.
        """
        mgr = self.mgr
        if isinstance(e, A.Return):
            return self.compile_pure(e.pure, env), TRUE, TRUE, (), frozenset()
        if isinstance(e, A.Flip):
            return mgr.mk_var(self._fresh_flip(e.theta)), TRUE, TRUE, (), frozenset()
        if isinstance(e, A.Reward):
            phi, gamma, trace, pending, rset = self.compile(e.body, env)
            r = self._fresh_reward(e.amount)
            return phi, gamma, trace, pending + (r,), rset | {r}
        if isinstance(e, A.Observe):
            guard = self.compile_pure(e.guard, env)
            phi, gamma, trace, pending, rset = self.compile(e.body, env)
            return phi, mgr.apply("and", gamma, guard), trace, pending, rset
        if isinstance(e, A.Ite):
            guard = self.compile_pure(e.guard, env)
            t_phi, t_gam, t_tr, t_pend, t_rs = self.compile(e.then, env)
            e_phi, e_gam, e_tr, e_pend, e_rs = self.compile(e.els, env)

            def mux(then_core, else_core):
                then_part = mgr.conjoin(
                    [guard, then_core]
                    + [mgr.mk_var(r) for r in t_pend]
                    + [mgr.negate(mgr.mk_var(r)) for r in sorted(e_rs)]
                )
                else_part = mgr.conjoin(
                    [mgr.negate(guard), else_core]
                    + [mgr.mk_var(r) for r in e_pend]
                    + [mgr.negate(mgr.mk_var(r)) for r in sorted(t_rs)]
                )
                return mgr.apply("or", then_part, else_part)

            phi = mux(t_phi, e_phi)
            trace = mux(t_tr, e_tr) if (t_rs | e_rs) else TRUE
            gamma = mgr.apply(
                "or",
                mgr.apply("and", guard, t_gam),
                mgr.apply("and", mgr.negate(guard), e_gam),
            )
            return phi, gamma, trace, (), t_rs | e_rs
        if isinstance(e, A.Bind):
            if isinstance(e.value, A.ChoiceIntro):
                site = self._fresh_site(e.value.names)
                if e.value.site >= 0:
                    site.site = e.value.site
                inner = dict(env)
                inner[e.name] = _ChoiceVal(site)
                return self.compile(e.body, inner)
            v_phi, v_gam, v_tr, v_pend, v_rs = self.compile(e.value, env)
            inner = dict(env)
            inner[e.name] = _BoolVal(v_phi)
            b_phi, b_gam, b_tr, b_pend, b_rs = self.compile(e.body, inner)
            return (
                mgr.apply("and", v_tr, b_phi),
                mgr.apply("and", v_gam, b_gam),
                mgr.apply("and", v_tr, b_tr),
                v_pend + b_pend,
                v_rs | b_rs,
            )
        if isinstance(e, A.ChoiceIntro):
            site = self._fresh_site(e.names)
            if e.site >= 0:
                site.site = e.site
            return site.eo, TRUE, TRUE, (), frozenset()
        if isinstance(e, A.Choose):
            if not isinstance(e.scrutinee, A.ScrutVar):
                raise DapplCompileError("choose scrutinee not a variable; desugar first")
            val = env.get(e.scrutinee.name)
            if not isinstance(val, _ChoiceVal):
                raise DapplCompileError(f"{e.scrutinee.name!r} is not a bound choice")
            site = val.site
            by_name = dict(zip(site.names, site.vars))
            for name, _ in e.arms:
                if name not in by_name:
                    raise DapplCompileError(f"{name!r} is not an alternative of the choice")
            compiled = [(by_name[name], self.compile(body, env)) for name, body in e.arms]
            all_rs = frozenset().union(*(rs for _, (_, _, _, _, rs) in compiled))
            phi_arms, trace_arms, gam_arms = [], [], []
            for avar, (a_phi, a_gam, a_tr, a_pend, a_rs) in compiled:
                shared = (
                    [mgr.mk_var(avar)]
                    + [mgr.mk_var(r) for r in a_pend]
                    + [mgr.negate(mgr.mk_var(r)) for r in sorted(all_rs - a_rs)]
                )
                phi_arms.append(mgr.conjoin(shared + [a_phi]))
                trace_arms.append(mgr.conjoin(shared + [a_tr]))
                gam_arms.append(mgr.apply("and", mgr.mk_var(avar), a_gam))
            phi = mgr.apply("and", site.eo, mgr.disjoin(phi_arms))
            trace = (
                mgr.apply("and", site.eo, mgr.disjoin(trace_arms)) if all_rs else TRUE
            )
            gamma = mgr.apply("and", site.eo, mgr.disjoin(gam_arms))
            return phi, gamma, trace, (), all_rs
        raise DapplCompileError(f"cannot compile {e!r}")


def compile_program(core: A.Expr, mgr: BddManager | None = None) -> CompiledDappl:
    """Compile a site-numbered core program."""
    compiler = Compiler(mgr)
    phi, gamma, trace, pending, _ = compiler.compile(core, {})
    return CompiledDappl(
        mgr=compiler.mgr,
        phi=phi,
        gamma=gamma,
        trace=trace,
        weights=compiler.weights,
        pending=pending,
        sites=compiler.sites,
    )
