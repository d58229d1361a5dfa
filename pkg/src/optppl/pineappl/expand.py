"""Program normalization: loop unrolling, categorical sugar, hygienic renaming.

Loops are macro-expanded; rebindings (which loops rely on) are then made
unique by a versioning pass that renames every repeated binding and rewrites
later references to the newest version.  Branches of an ``if`` version
independently and are reconciled by join-point assignments after the
statement: a name bound in either branch gets a fresh joined definition
``(guard && then-version) || (!guard && else-version)``, falling back to the
pre-branch version for the side that did not bind it.  A name bound on only
one side with no prior definition is poisoned: referencing it later is an
error.

After expansion all names are unique, every reference is to the newest
version, and statements are flips, assignments, flat ifs, and mmaps only.
"""

from __future__ import annotations

from . import ast as A


class PineapplExpandError(Exception):
    def __init__(self, message, span=None):
        if span is not None and getattr(span, "line", 0):
            message = f"{message} ({span})"
        super().__init__(message)


_POISON = object()


class _Renamer:
    def __init__(self):
        self.versions = {}  # base name -> bind count
        self.counter = 0
        self.mmap_bound = set()

    def fresh(self, stem: str) -> str:
        self.counter += 1
        return f"{stem}@{self.counter}"

    def bind(self, env: dict, name: str) -> str:
        seen = self.versions.get(name, 0)
        self.versions[name] = seen + 1
        new = name if seen == 0 else f"{name}@{seen + 1}"
        env[name] = new
        return new

    def lookup(self, env: dict, name: str, span) -> str:
        if name not in env:
            raise PineapplExpandError(f"unbound variable {name!r}", span)
        if env[name] is _POISON:
            raise PineapplExpandError(
                f"{name!r} is not defined on every path to this use", span
            )
        return env[name]

    def rename_expr(self, e: A.Expr, env: dict) -> A.Expr:
        if isinstance(e, A.EVar):
            return A.EVar(span=e.span, name=self.lookup(env, e.name, e.span))
        if isinstance(e, A.ELit):
            return e
        if isinstance(e, A.EAnd):
            return A.EAnd(
                span=e.span,
                left=self.rename_expr(e.left, env),
                right=self.rename_expr(e.right, env),
            )
        if isinstance(e, A.EOr):
            return A.EOr(
                span=e.span,
                left=self.rename_expr(e.left, env),
                right=self.rename_expr(e.right, env),
            )
        if isinstance(e, A.ENot):
            return A.ENot(span=e.span, operand=self.rename_expr(e.operand, env))
        if isinstance(e, A.EIs):
            mangled = f"{e.name}${e.outcome}"
            if mangled not in env:
                raise PineapplExpandError(
                    f"{e.name!r} is not a categorical with outcome {e.outcome!r}", e.span
                )
            return A.EVar(span=e.span, name=self.lookup(env, mangled, e.span))
        raise PineapplExpandError(f"bad expression {e!r}")

    def rename_stmts(self, stmts: list, env: dict) -> list:
        out = []
        for stmt in stmts:
            if isinstance(stmt, A.SFlip):
                out.append(
                    A.SFlip(span=stmt.span, name=self.bind(env, stmt.name), theta=stmt.theta)
                )
            elif isinstance(stmt, A.SAssign):
                value = self.rename_expr(stmt.value, env)
                out.append(A.SAssign(span=stmt.span, name=self.bind(env, stmt.name), value=value))
            elif isinstance(stmt, A.SMmap):
                queried = tuple(self.lookup(env, q, stmt.span) for q in stmt.queried)
                evidence = None
                if stmt.evidence is not None:
                    evidence = self.rename_expr(stmt.evidence, env)
                outputs = tuple(self.bind(env, o) for o in stmt.outputs)
                self.mmap_bound.update(outputs)
                out.append(
                    A.SMmap(span=stmt.span, outputs=outputs, queried=queried, evidence=evidence)
                )
            elif isinstance(stmt, A.SIf):
                out.extend(self.rename_if(stmt, env))
            else:
                raise PineapplExpandError(f"unexpected statement {stmt!r}", stmt.span)
        return out

    def rename_if(self, stmt: A.SIf, env: dict) -> list:
        out = []
        guard = self.rename_expr(stmt.guard, env)
        if not isinstance(guard, A.EVar):
            gname = self.bind(env, self.fresh("_g"))
            out.append(A.SAssign(span=stmt.span, name=gname, value=guard))
            guard = A.EVar(span=stmt.span, name=gname)
        then_env = dict(env)
        else_env = dict(env)
        then_stmts = self.rename_stmts(stmt.then, then_env)
        else_stmts = self.rename_stmts(stmt.els, else_env)
        out.append(A.SIf(span=stmt.span, guard=guard, then=then_stmts, els=else_stmts))
        rebound = [
            name
            for name in dict.fromkeys(list(then_env) + list(else_env))
            if then_env.get(name) != else_env.get(name)
        ]
        for name in rebound:
            tv = then_env.get(name, env.get(name))
            ev = else_env.get(name, env.get(name))
            if tv is None or ev is None or tv is _POISON or ev is _POISON:
                env[name] = _POISON
                continue
            joined = self.bind(env, name)
            out.append(
                A.SAssign(
                    span=stmt.span,
                    name=joined,
                    value=A.EOr(
                        left=A.EAnd(left=guard, right=A.EVar(name=tv)),
                        right=A.EAnd(
                            left=A.ENot(operand=guard), right=A.EVar(name=ev)
                        ),
                    ),
                )
            )
        return out


def _unroll(stmts: list) -> list:
    out = []
    for stmt in stmts:
        if isinstance(stmt, A.SLoop):
            if stmt.count < 1:
                raise PineapplExpandError(
                    f"loop bound must be at least 1, got {stmt.count}", stmt.span
                )
            body = _unroll(stmt.body)
            for _ in range(stmt.count):
                out.extend(_copy_stmts(body))
        elif isinstance(stmt, A.SIf):
            out.append(
                A.SIf(
                    span=stmt.span,
                    guard=stmt.guard,
                    then=_unroll(stmt.then),
                    els=_unroll(stmt.els),
                )
            )
        else:
            out.append(stmt)
    return out


def _copy_stmts(stmts):
    import copy

    return [copy.deepcopy(s) for s in stmts]


def _desugar_disc(stmts: list) -> list:
    """One-hot encode categorical assignments with a chain of flips."""
    out = []
    for stmt in stmts:
        if isinstance(stmt, A.SDisc):
            total = sum(p for _, p in stmt.pairs)
            if abs(total - 1.0) > 1e-9 or any(p < 0 for _, p in stmt.pairs):
                raise PineapplExpandError(
                    f"categorical probabilities of {stmt.name!r} must be nonnegative and sum to 1",
                    stmt.span,
                )
            remaining = 1.0
            chain = []
            for outcome, p in stmt.pairs[:-1]:
                theta = 0.0 if remaining <= 0 else min(1.0, p / remaining)
                remaining -= p
                flip_name = f"{stmt.name}${outcome}$flip"
                out.append(A.SFlip(span=stmt.span, name=flip_name, theta=theta))
                chain.append((outcome, flip_name))
            prefix: A.Expr | None = None
            for outcome, flip_name in chain:
                hit = A.EVar(name=flip_name)
                indicator = hit if prefix is None else A.EAnd(left=prefix, right=hit)
                out.append(A.SAssign(span=stmt.span, name=f"{stmt.name}${outcome}", value=indicator))
                miss = A.ENot(operand=A.EVar(name=flip_name))
                prefix = miss if prefix is None else A.EAnd(left=prefix, right=miss)
            last_outcome = stmt.pairs[-1][0]
            out.append(
                A.SAssign(
                    span=stmt.span,
                    name=f"{stmt.name}${last_outcome}",
                    value=prefix if prefix is not None else A.ELit(value=True),
                )
            )
        elif isinstance(stmt, A.SIf):
            out.append(
                A.SIf(
                    span=stmt.span,
                    guard=stmt.guard,
                    then=_desugar_disc(stmt.then),
                    els=_desugar_disc(stmt.els),
                )
            )
        else:
            out.append(stmt)
    return out


def expand(program: A.Program) -> A.Program:
    """Unroll loops, desugar categoricals, rename, insert join points.

    Also enforces that no observed expression references an mmap-bound
    variable, and rewrites queries to the final version of each name.
    """
    stmts = _desugar_disc(_unroll(program.statements))
    renamer = _Renamer()
    env: dict = {}
    stmts = renamer.rename_stmts(stmts, env)
    queries = []
    for q in program.queries:
        if isinstance(q, A.QPr):
            expr = renamer.rename_expr(q.expr, env)
            evidence = (
                None if q.evidence is None else renamer.rename_expr(q.evidence, env)
            )
            queries.append(A.QPr(expr=expr, evidence=evidence, text=q.text))
        else:
            queried = tuple(renamer.lookup(env, name, A.NO_SPAN) for name in q.queried)
            evidence = (
                None if q.evidence is None else renamer.rename_expr(q.evidence, env)
            )
            queries.append(A.QMmap(queried=queried, evidence=evidence, text=q.text))
    expanded = A.Program(statements=stmts, queries=queries)
    _check_evidence_restriction(expanded, renamer.mmap_bound)
    return expanded


def _check_evidence_restriction(program: A.Program, mmap_bound: set):
    def check_expr(e, where):
        bad = A.expr_vars(e) & mmap_bound
        if bad:
            raise PineapplExpandError(
                f"observed expression in {where} references mmap-bound "
                f"variable(s): {', '.join(sorted(bad))}"
            )

    def walk(stmts):
        for stmt in stmts:
            if isinstance(stmt, A.SMmap) and stmt.evidence is not None:
                check_expr(stmt.evidence, "mmap")
            elif isinstance(stmt, A.SIf):
                walk(stmt.then)
                walk(stmt.els)

    walk(program.statements)
    for q in program.queries:
        if q.evidence is not None:
            check_expr(q.evidence, "query")
