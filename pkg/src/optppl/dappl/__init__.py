"""Decision language pipeline: parse, type, desugar, compile, solve."""

from __future__ import annotations

from .. import bbir as B
from ..bdd import BddManager
from . import ast
from .ast import number_sites
from .compile import CompiledDappl, DapplCompileError, compile_program
from .desugar import DapplDesugarError, desugar
from .parser import DapplSyntaxError, parse
from .reduce import DapplReduceError, reduce
from .types import DapplTypeError, check, check_program

__all__ = [
    "parse", "check", "check_program", "desugar", "reduce",
    "compile_program", "prepare", "solve_meu",
    "DapplSyntaxError", "DapplTypeError", "DapplDesugarError",
    "DapplReduceError", "DapplCompileError",
]


def prepare(source: str, mgr: BddManager | None = None):
    """parse -> typecheck -> desugar -> number sites -> compile.

    Returns ``(core AST, sites, CompiledDappl)``.
    """
    tree = parse(source)
    check_program(tree)
    core = desugar(tree)
    sites = number_sites(core)
    compiled = compile_program(core, mgr)
    return core, sites, compiled


def solve_meu(
    source: str,
    *,
    prune: bool = True,
    heuristic: str = "static",
    mgr: BddManager | None = None,
) -> dict:
    """Solve a program for its maximum expected utility.

    Returns a JSON-ready dict with the scalar optimum, the chosen
    alternative per choice site, the semiring value, and search statistics.
    """
    core, sites, compiled = prepare(source, mgr)
    problem = compiled.finalize()
    objective = B.MeuObjective(problem)
    result = B.bb(objective, problem, prune=prune, heuristic=heuristic)
    policy = _policy_names(compiled, result.witness)
    out = {
        "meu": result.scalar,
        "policy": policy,
        "value": {"prob": result.value.prob, "util": result.value.util},
        "stats": result.stats.to_dict(),
    }
    if result.scalar == float("-inf"):
        out["warning"] = "every policy contradicts the observations"
    out["_internal"] = {
        "result": result,
        "bbir": problem,
        "compiled": compiled,
        "core": core,
        "sites": sites,
    }
    return out


def _policy_names(compiled: CompiledDappl, witness: dict) -> dict:
    policy = {}
    for site in compiled.sites:
        chosen = [name for name, var in zip(site.names, site.vars) if witness.get(var)]
        # an unused site never enters the search; default to its first name
        policy[f"c{site.site}"] = chosen[0] if chosen else site.names[0]
    return policy
