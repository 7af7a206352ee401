"""Goal-directed proof search for hereditary Harrop programs.

Search follows the uniform-proof discipline: ``true`` succeeds, an
implication goal moves its antecedent into the clause list (at the
end, so program order stays meaningful), a universal goal introduces a
fresh eigenvariable, and an atomic goal backchains.  Backchaining
walks a clause's quantifier/implication prefix, instantiating each
universal variable with a fresh logic variable, unifies the exposed
head with the goal, then proves the collected premises left to right
under the extended substitution.

The only source of nondeterminism is clause choice, so iterative
deepening counts backchain steps.  Each round accepts only proofs
using exactly the round's bound, which keeps rounds disjoint; a round
that never hits the bound proves the search space finite and stops the
iteration early.  Equations outside the pattern fragment ride along as
residuals and are retried whenever the substitution grows; a branch
that otherwise succeeds but still carries residuals is remembered as
suspended, never reported as a solution.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

from .hterms import (
    Atom, EVar, Formula, ForAll, Imp, LVar, Program, Term, Top,
    fresh_evar, fresh_lvar, subst_formula,
)
from .hterms import App, BVar, Const, Lam
from .unify import Eq, Subst, unify


@dataclass(frozen=True)
class Limits:
    depth: int = 32          # max backchain steps per proof
    max_solutions: int = 1   # 0 means enumerate all within depth


@dataclass(frozen=True)
class Solution:
    bindings: tuple[tuple[LVar, Term], ...]
    free: tuple[LVar, ...]
    backchains: int

    def value(self, v: LVar) -> Optional[Term]:
        for k, t in self.bindings:
            if k == v:
                return t
        return None


@dataclass(frozen=True)
class SolveRun:
    status: str  # "ok" | "no" | "suspended" | "exhausted"
    solutions: tuple[Solution, ...]


class _State:
    __slots__ = ("cut", "susp")

    def __init__(self):
        self.cut = False
        self.susp = False


def goal_lvars_ordered(g: Formula) -> tuple[LVar, ...]:
    out: list[LVar] = []

    def walk_term(t: Term):
        match t:
            case LVar():
                if t not in out:
                    out.append(t)
            case App(fn, arg):
                walk_term(fn)
                walk_term(arg)
            case Lam(_, _, body):
                walk_term(body)
            case _:
                pass

    def walk(f: Formula):
        match f:
            case Atom(_, args):
                for a in args:
                    walk_term(a)
            case Imp(left, right):
                walk(left)
                walk(right)
            case ForAll(_, _, body):
                walk(body)
            case _:
                pass

    walk(g)
    return tuple(out)


def solve(program: Program, goal: Formula, limits: Limits = Limits(),
          query_vars: Optional[tuple[LVar, ...]] = None) -> SolveRun:
    if query_vars is None:
        query_vars = goal_lvars_ordered(goal)
    clauses = list(program.clauses)
    solutions: list[Solution] = []
    seen: set[str] = set()
    susp_ever = False
    last_round_cut = False
    for bound in range(limits.depth + 1):
        state = _State()
        for sigma, residuals, left in _prove(goal, clauses, Subst(), (),
                                             bound, state):
            if left != 0:
                continue
            if residuals:
                state.susp = True
                continue
            sol = _extract(sigma, query_vars, bound)
            key = _canon_key(sol)
            if key in seen:
                continue
            seen.add(key)
            solutions.append(sol)
            if limits.max_solutions and len(solutions) >= limits.max_solutions:
                return SolveRun("ok", tuple(solutions))
        susp_ever = susp_ever or state.susp
        last_round_cut = state.cut
        if not state.cut:
            break
    if solutions:
        return SolveRun("ok", tuple(solutions))
    if last_round_cut:
        return SolveRun("exhausted", ())
    if susp_ever:
        return SolveRun("suspended", ())
    return SolveRun("no", ())


def _prove(goal: Formula, clauses: list[Formula], sigma: Subst,
           residuals: tuple[Eq, ...], budget: int,
           state: _State) -> Iterator[tuple[Subst, tuple[Eq, ...], int]]:
    match goal:
        case Top():
            yield sigma, residuals, budget
        case Imp(d, g):
            yield from _prove(g, clauses + [d], sigma, residuals, budget, state)
        case ForAll(var, ty, body):
            e = fresh_evar(var, ty)
            yield from _prove(subst_formula(body, {var: e}), clauses, sigma,
                              residuals, budget, state)
        case Atom() as atom:
            yield from _backchain(atom, clauses, sigma, residuals, budget,
                                  state)
        case _:
            raise TypeError(f"not a goal formula: {goal!r}")


def _clause_parts(clause: Formula) -> Optional[tuple[Atom, list[Formula]]]:
    premises: list[Formula] = []
    f = clause
    while True:
        match f:
            case ForAll(var, ty, body):
                k = fresh_lvar(var.upper() if var else "X", ty)
                f = subst_formula(body, {var: k})
            case Imp(g, d):
                premises.append(g)
                f = d
            case Atom() as head:
                return head, premises
            case _:
                return None


def _backchain(atom: Atom, clauses: list[Formula], sigma: Subst,
               residuals: tuple[Eq, ...], budget: int,
               state: _State) -> Iterator[tuple[Subst, tuple[Eq, ...], int]]:
    if budget <= 0:
        # Out of budget: find out whether any clause could still engage,
        # so exhaustion is distinguishable from finite failure.
        for clause in clauses:
            parts = _clause_parts(clause)
            if parts is None:
                continue
            head, _ = parts
            if head.pred != atom.pred or len(head.args) != len(atom.args):
                continue
            res = unify([Eq(a, b) for a, b in zip(atom.args, head.args)]
                        + list(residuals), sigma)
            if res.status != "fail":
                state.cut = True
                return
        return
    for clause in clauses:
        parts = _clause_parts(clause)
        if parts is None:
            continue
        head, premises = parts
        if head.pred != atom.pred or len(head.args) != len(atom.args):
            continue
        res = unify([Eq(a, b) for a, b in zip(atom.args, head.args)]
                    + list(residuals), sigma)
        if res.status == "fail":
            continue
        yield from _conj(premises, clauses, res.subst, res.residuals,
                         budget - 1, state)


def _conj(goals: list[Formula], clauses: list[Formula], sigma: Subst,
          residuals: tuple[Eq, ...], budget: int,
          state: _State) -> Iterator[tuple[Subst, tuple[Eq, ...], int]]:
    if not goals:
        yield sigma, residuals, budget
        return
    for sigma2, residuals2, left in _prove(goals[0], clauses, sigma,
                                           residuals, budget, state):
        yield from _conj(goals[1:], clauses, sigma2, residuals2, left, state)


def _extract(sigma: Subst, query_vars: tuple[LVar, ...],
             backchains: int) -> Solution:
    bindings = tuple((v, sigma.apply(v)) for v in query_vars)
    free: list[LVar] = []
    for _, t in bindings:
        for v in _lvars_in_order(t):
            if v not in free:
                free.append(v)
    return Solution(bindings, tuple(free), backchains)


def _lvars_in_order(t: Term) -> list[LVar]:
    out: list[LVar] = []

    def walk(t: Term):
        match t:
            case LVar():
                if t not in out:
                    out.append(t)
            case App(fn, arg):
                walk(fn)
                walk(arg)
            case Lam(_, _, body):
                walk(body)
            case _:
                pass

    walk(t)
    return out


def _canon_key(sol: Solution) -> str:
    lnames: dict[str, int] = {}
    parts = []

    def render(t: Term, env: tuple[str, ...]) -> str:
        match t:
            case Const(name, _):
                return name
            case EVar(name, _, _):
                return f"!{name}"
            case LVar(name, _, _):
                if name not in lnames:
                    lnames[name] = len(lnames)
                return f"?{lnames[name]}"
            case BVar(name, _):
                for i in range(len(env) - 1, -1, -1):
                    if env[i] == name:
                        return f"#{len(env) - 1 - i}"
                return f"#?{name}"
            case Lam(var, _, body):
                return f"(\\ {render(body, env + (var,))})"
            case App():
                head, args = _spine(t)
                inner = " ".join(render(x, env) for x in [head] + args)
                return f"({inner})"
        raise TypeError

    for v, t in sol.bindings:
        parts.append(f"{v.name}={render(t, ())}")
    return ";".join(parts)


def _spine(t: Term) -> tuple[Term, list[Term]]:
    args: list[Term] = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fn
    args.reverse()
    return t, args


def validate_solution(program: Program, goal: Formula, sol: Solution,
                      extra_depth: int = 0) -> bool:
    """Replay a reported solution: instantiate the goal with its
    bindings, freeze leftover logic variables, and re-derive within the
    reported backchain count."""
    binding = Subst({v: t for v, t in sol.bindings})
    frozen = {v: fresh_evar(v.name, v.ty) for v in sol.free}

    def inst(t: Term) -> Term:
        t = binding.apply(t)
        return Subst(dict(frozen)).apply(t) if frozen else t

    from .hterms import map_formula_terms
    g = map_formula_terms(goal, inst)
    bound = sol.backchains + extra_depth
    state = _State()
    for _, residuals, _ in _prove(g, list(program.clauses), Subst(), (),
                                  bound, state):
        if not residuals:
            return True
    return False
