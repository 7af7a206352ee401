"""Reference implementations the tests check the package against.

Each oracle recomputes a result by a different route than the code under
test: normalization by single leftmost-outermost steps, substitution by
rename-everything-then-replace, typed term enumeration instead of proof
search, forward chaining instead of backchaining, and brute-force
substitution search instead of unification.  Shared plumbing (AST types,
alpha comparison) comes from the package; the decision procedures do not.
"""

from __future__ import annotations

import itertools
from pathlib import Path
from typing import Iterator, Optional

from lflp import lf_syntax as lf
from lflp.lf_kernel import (
    beta_normalize, check_signature, substitute,
)
from lflp.hterms import (
    App, Atom, BVar, Const, Formula, ForAll, Imp, LVar, Lam, Term,
    Top, alpha_eq_term, beta_norm, split_arrow, term_spine,
)
from lflp.unify import Subst

DATA = Path(__file__).parent / "data"

_counter = itertools.count(1)


def load_signature(name: str) -> lf.Signature:
    sig = lf.parse_signature((DATA / name).read_text())
    check_signature(sig)
    return sig


# ---------------------------------------------------------------------------
# Substitution by brute force: rename every binder on the way down, then
# replace free occurrences.  Capture is impossible by construction.

def naive_substitute(e: lf.Expr, bindings: dict[str, lf.Obj]) -> lf.Expr:
    def go(e, env):
        match e:
            case lf.KType():
                return e
            case lf.KPi(var, dom, body):
                nv = f"{var}~{next(_counter)}"
                return lf.KPi(nv, go(dom, env), go(body, {**env, var: lf.OVar(nv)}))
            case lf.FConst():
                return e
            case lf.FPi(var, dom, body):
                nv = f"{var}~{next(_counter)}"
                return lf.FPi(nv, go(dom, env), go(body, {**env, var: lf.OVar(nv)}))
            case lf.FApp(fn, arg):
                return lf.FApp(go(fn, env), go(arg, env))
            case lf.OConst():
                return e
            case lf.OVar(name):
                return env.get(name, e)
            case lf.OLam(var, dom, body):
                nv = f"{var}~{next(_counter)}"
                return lf.OLam(nv, go(dom, env), go(body, {**env, var: lf.OVar(nv)}))
            case lf.OApp(fn, arg):
                return lf.OApp(go(fn, env), go(arg, env))
        raise AssertionError(e)

    return go(e, dict(bindings))


# ---------------------------------------------------------------------------
# Small-step beta reduction: contract exactly one leftmost-outermost redex.

def step_beta(e: lf.Expr) -> Optional[lf.Expr]:
    match e:
        case lf.OApp(lf.OLam(var, _, body), arg):
            return naive_substitute(body, {var: arg})
        case lf.KPi(var, dom, body):
            d = step_beta(dom)
            if d is not None:
                return lf.KPi(var, d, body)
            b = step_beta(body)
            return None if b is None else lf.KPi(var, dom, b)
        case lf.FPi(var, dom, body):
            d = step_beta(dom)
            if d is not None:
                return lf.FPi(var, d, body)
            b = step_beta(body)
            return None if b is None else lf.FPi(var, dom, b)
        case lf.FApp(fn, arg):
            f = step_beta(fn)
            if f is not None:
                return lf.FApp(f, arg)
            a = step_beta(arg)
            return None if a is None else lf.FApp(fn, a)
        case lf.OLam(var, dom, body):
            d = step_beta(dom)
            if d is not None:
                return lf.OLam(var, d, body)
            b = step_beta(body)
            return None if b is None else lf.OLam(var, dom, b)
        case lf.OApp(fn, arg):
            f = step_beta(fn)
            if f is not None:
                return lf.OApp(f, arg)
            a = step_beta(arg)
            return None if a is None else lf.OApp(fn, a)
    return None


def normalize_by_steps(e: lf.Expr, fuel: int = 5000) -> lf.Expr:
    for _ in range(fuel):
        nxt = step_beta(e)
        if nxt is None:
            return e
        e = nxt
    raise RuntimeError("small-step oracle ran out of fuel")


# ---------------------------------------------------------------------------
# Bounded enumeration of well-typed canonical objects.  Size counts
# constant, variable and lambda nodes; applications are free.

def obj_size(m: lf.Obj) -> int:
    match m:
        case lf.OConst() | lf.OVar():
            return 1
        case lf.OLam(_, _, body):
            return 1 + obj_size(body)
        case lf.OApp(fn, arg):
            return obj_size(fn) + obj_size(arg)
    raise AssertionError(m)


def enumerate_objects(sig: lf.Signature, ctx: lf.Context, ty: lf.Fam,
                      budget: int) -> Iterator[lf.Obj]:
    if budget <= 0:
        return
    ty = beta_normalize(ty)
    if isinstance(ty, lf.FPi):
        var = ty.var
        taken = ctx.names() | sig.names()
        if var in taken:
            var = lf.fresh_name(var, taken)
        body_ty = beta_normalize(substitute(ty.body, {ty.var: lf.OVar(var)}))
        for body in enumerate_objects(sig, ctx.extend(var, ty.dom),
                                      body_ty, budget - 1):
            yield lf.OLam(var, ty.dom, body)
        return
    heads: list[tuple[lf.Obj, lf.Fam]] = []
    for name, fam in ctx:
        heads.append((lf.OVar(name), fam))
    for decl in sig:
        if isinstance(decl, lf.ObjDecl):
            heads.append((lf.OConst(decl.name), decl.fam))
    for head, fam in heads:
        binders, target = lf.split_fam_pis(beta_normalize(fam))
        yield from _apps(sig, ctx, head, binders, target, {}, budget - 1, ty)


def _apps(sig, ctx, acc, binders, target, sub, remaining, want):
    if not binders:
        inst = beta_normalize(substitute(target, sub))
        if lf.alpha_eq(inst, want):
            yield acc
        return
    if remaining < len(binders):
        return
    (var, dom), rest = binders[0], binders[1:]
    dom_inst = beta_normalize(substitute(dom, sub))
    for arg in enumerate_objects(sig, ctx, dom_inst, remaining - len(rest)):
        yield from _apps(sig, ctx, lf.OApp(acc, arg), rest, target,
                         {**sub, var: arg}, remaining - obj_size(arg), want)


# Closed types over the nat/list signature used by the round-trip and
# injectivity suites; at budget 6 these yield 248 objects in total.
ROUND_TRIP_TYPES = [
    "nat", "list", "{x:nat} nat", "{x:nat} list", "{l:list} list",
    "{x:nat} {y:nat} nat", "{f:nat -> nat} nat", "{f:nat -> nat} list",
    "{f:nat -> nat} {x:nat} nat", "{x:nat} {f:nat -> nat} nat",
    "{f:nat -> nat} {g:nat -> nat} nat", "{x:nat} {l:list} list",
    "{l:list} {k:list} list", "{f:nat -> list} list",
    "{f:list -> nat} nat", "{x:nat} {y:nat} list",
]


def parse_type(sig: lf.Signature, text: str) -> lf.Fam:
    """Parse a closed type expression, Pi types included."""
    if text.lstrip().startswith("{"):
        ext = lf.parse_signature(str(sig) + "\n_q : " + text + ".")
        return ext.lookup("_q")
    _, fam = lf.parse_query(text, sig)
    return fam


def corpus_cases(sig: lf.Signature, type_texts: list[str],
                 budget: int = 6) -> list[tuple[lf.Obj, lf.Fam]]:
    """All (object, type) pairs for the given type expressions."""
    cases = []
    for text in type_texts:
        fam = beta_normalize(parse_type(sig, text))
        for m in enumerate_objects(sig, lf.Context(), fam, budget):
            cases.append((m, fam))
    return cases


# ---------------------------------------------------------------------------
# Forward-chaining derivation enumeration for translated programs.  Facts
# are ground atoms; the cost of a fact is the number of clause selections
# in its cheapest derivation, the same metric the engine's iterative
# deepening uses.  First-order instantiation only, which covers the
# append/plus corpus.

def _clause_triple(clause: Formula):
    lvars: list[LVar] = []
    premises: list[Formula] = []
    f = clause
    ren: dict[str, Term] = {}
    while True:
        match f:
            case ForAll(var, ty, body):
                v = LVar(f"{var}#{next(_counter)}", 0, ty)
                lvars.append(v)
                ren[var] = v
                f = _replace_bvars(body, dict(ren))
                ren = {}
                continue
            case Imp(g, d):
                premises.append(g)
                f = d
                continue
            case Atom():
                return lvars, premises, f
            case _:
                return None


def _replace_bvars(f: Formula, ren: dict[str, Term]) -> Formula:
    def term(t: Term, ren) -> Term:
        match t:
            case BVar(name, _) if name in ren:
                return ren[name]
            case App(fn, arg):
                return App(term(fn, ren), term(arg, ren))
            case Lam(var, ty, body):
                inner = {k: v for k, v in ren.items() if k != var}
                return Lam(var, ty, term(body, inner))
            case _:
                return t

    match f:
        case Atom(pred, args):
            return Atom(pred, tuple(term(a, ren) for a in args))
        case Imp(l, r):
            return Imp(_replace_bvars(l, ren), _replace_bvars(r, ren))
        case ForAll(var, ty, body):
            inner = {k: v for k, v in ren.items() if k != var}
            return ForAll(var, ty, _replace_bvars(body, inner))
        case _:
            return f


def match_term(pat: Term, ground: Term, binding: dict[LVar, Term]) -> bool:
    match pat:
        case LVar():
            if pat in binding:
                return binding[pat] == ground
            binding[pat] = ground
            return True
        case Const(name, _):
            return isinstance(ground, Const) and ground.name == name
        case App(fn, arg):
            return (isinstance(ground, App)
                    and match_term(fn, ground.fn, binding)
                    and match_term(arg, ground.arg, binding))
        case Lam():
            return pat == ground
        case _:
            return pat == ground


def _ground(t: Term) -> bool:
    match t:
        case LVar():
            return False
        case App(fn, arg):
            return _ground(fn) and _ground(arg)
        case Lam(_, _, body):
            return _ground(body)
        case _:
            return True


def _apply_binding(t: Term, binding: dict[LVar, Term]) -> Term:
    match t:
        case LVar() if t in binding:
            return binding[t]
        case App(fn, arg):
            return App(_apply_binding(fn, binding), _apply_binding(arg, binding))
        case Lam(var, ty, body):
            return Lam(var, ty, _apply_binding(body, binding))
        case _:
            return t


def _subterms(t: Term) -> Iterator[Term]:
    yield t
    match t:
        case App():
            head, args = term_spine(t)
            for a in args:
                yield from _subterms(a)
        case _:
            return


def derive_all(clauses: list[Formula], seeds: list[Term],
               max_cost: int) -> dict[Atom, int]:
    """Minimal backchain cost of every ground atom derivable within
    `max_cost`.  Clause variables not fixed by premise matching are
    instantiated from the subterm closure of `seeds`; for the append and
    plus corpus every derivation relevant to a query only ever needs
    subterms of that query, so this is exhaustive there."""
    triples = [t for t in (_clause_triple(c) for c in clauses) if t]
    universe: dict[object, set[Term]] = {}

    def add_term(t: Term):
        for s in _subterms(t):
            if _ground(s):
                universe.setdefault(_key_ty(s), set()).add(s)

    def _key_ty(t: Term):
        from lflp.hterms import type_of
        return str(type_of(t))

    for s in seeds:
        add_term(s)
    sorted_pools = {k: sorted(v, key=str) for k, v in universe.items()}
    facts: dict[Atom, int] = {}
    fresh: Optional[set[Atom]] = None  # None = first round, everything fires
    while True:
        snapshot: dict[object, list[tuple[Atom, int]]] = {}
        for fact, cost in facts.items():
            snapshot.setdefault(_atom_key(fact), []).append((fact, cost))
        gained: dict[Atom, int] = {}
        for lvars, premises, head in triples:
            if not premises and fresh is not None:
                continue  # zero-premise conclusions all fire in round one
            for binding, cost in _match_premises(premises, snapshot, fresh,
                                                 {}, 0, max_cost - 1, False):
                free = [v for v in lvars if v not in binding]
                pools = [sorted_pools.get(str(v.ty), []) for v in free]
                for combo in itertools.product(*pools):
                    b2 = dict(binding)
                    b2.update(dict(zip(free, combo)))
                    atom = Atom(head.pred,
                                tuple(_apply_binding(a, b2) for a in head.args))
                    if not all(_ground(a) for a in atom.args):
                        continue
                    total = cost + 1
                    if total > max_cost:
                        continue
                    old = facts.get(atom)
                    if old is None or total < old:
                        facts[atom] = total
                        gained[atom] = total
        if not gained:
            return facts
        fresh = set(gained)


def _atom_key(atom: Atom):
    # Bucket atoms by predicate and the head constant of their final
    # argument (the encoded type), which is always rigid on this corpus.
    last = atom.args[-1] if atom.args else None
    head, _ = term_spine(last) if last is not None else (None, None)
    name = head.name if isinstance(head, Const) else None
    return atom.pred, len(atom.args), name


def _match_premises(premises, by_key, fresh, binding, cost, budget,
                    used_fresh):
    if cost > budget:
        return
    if not premises:
        # Semi-naive restriction: after round one, at least one premise
        # must rest on a fact derived or improved in the previous round.
        if fresh is None or used_fresh:
            yield binding, cost
        return
    first = premises[0]
    if isinstance(first, Top):
        yield from _match_premises(premises[1:], by_key, fresh, binding, cost,
                                   budget, used_fresh)
        return
    if not isinstance(first, Atom):
        return
    key = _atom_key(Atom(first.pred, tuple(_apply_binding(a, binding)
                                           for a in first.args)))
    if key[2] is None:
        candidates = [fc for k2, b in by_key.items()
                      if k2[0] == key[0] and k2[1] == key[1] for fc in b]
    else:
        candidates = by_key.get(key, [])
    for fact, fcost in candidates:
        b2 = dict(binding)
        ok = True
        for p, g in zip(first.args, fact.args):
            if not match_term(_apply_binding(p, b2), g, b2):
                ok = False
                break
        if ok:
            yield from _match_premises(premises[1:], by_key, fresh, b2,
                                       cost + fcost, budget,
                                       used_fresh or (fresh is not None
                                                      and fact in fresh))


def reference_solutions(facts: dict[Atom, int], goal: Atom,
                        qvars: tuple[LVar, ...],
                        depth: int) -> set[tuple[str, ...]]:
    """All instantiations of `qvars` whose goal instance has a derivation
    within `depth` backchains, rendered to strings for set comparison."""
    out = set()
    for fact, cost in facts.items():
        if cost > depth:
            continue
        if fact.pred != goal.pred or len(fact.args) != len(goal.args):
            continue
        binding: dict[LVar, Term] = {}
        if all(match_term(a, g, binding) for a, g in zip(goal.args, fact.args)):
            out.add(tuple(str(beta_norm(binding.get(v, v))) for v in qvars))
    return out


def reference_min_cost(facts: dict[Atom, int], goal: Atom,
                       qvars: tuple[LVar, ...]) -> dict[tuple[str, ...], int]:
    best: dict[tuple[str, ...], int] = {}
    for fact, cost in facts.items():
        if fact.pred != goal.pred or len(fact.args) != len(goal.args):
            continue
        binding: dict[LVar, Term] = {}
        if all(match_term(a, g, binding) for a, g in zip(goal.args, fact.args)):
            key = tuple(str(beta_norm(binding.get(v, v))) for v in qvars)
            if key not in best or cost < best[key]:
                best[key] = cost
    return best


# ---------------------------------------------------------------------------
# Brute-force unifier search over a small typed term universe.

def gen_terms(ty, heads: list[Term], depth: int) -> list[Term]:
    """All terms of simple type `ty` using only `heads`, with application
    nesting at most `depth`."""
    doms, _ = split_arrow(ty)
    if doms:
        out = []
        v = BVar(f"u{next(_counter)}", doms[0])
        from lflp.hterms import TArrow
        inner = ty.cod if isinstance(ty, TArrow) else ty
        for body in gen_terms(inner, heads + [v], depth):
            out.append(Lam(v.name, v.ty, body))
        return out
    results = []
    for h in heads:
        hdoms, hcod = split_arrow(_ty_of_head(h))
        if str(hcod) != str(ty):
            continue
        if not hdoms:
            results.append(h)
        elif depth > 0:
            arg_choices = [gen_terms(d, heads, depth - 1) for d in hdoms]
            for combo in itertools.product(*arg_choices):
                t = h
                for a in combo:
                    t = App(t, a)
                results.append(t)
    return results


def _ty_of_head(h: Term):
    return h.ty


def has_unifier_bruteforce(lhs: Term, rhs: Term, heads: list[Term],
                           depth: int = 2) -> bool:
    from lflp.hterms import lvars_of
    lvars = sorted(lvars_of(lhs) | lvars_of(rhs), key=lambda v: v.name)
    pools = [gen_terms(v.ty, heads, depth) for v in lvars]
    for combo in itertools.product(*pools):
        sub = Subst(dict(zip(lvars, combo)))
        if alpha_eq_term(sub.apply(lhs), sub.apply(rhs)):
            return True
    return False
