"""Unification for simply typed terms, complete on the pattern fragment.

A flexible term is a logic variable applied to distinct universal
variables (eigenvariables or locally bound ones).  On such problems
unification is decidable and most general unifiers exist; the solver
commits only there.  Anything outside the fragment is set aside as a
residual equation and retried whenever the substitution grows; a
residual that survives to the end of a proof leaves the branch
undecided rather than successful.

Scope discipline rides on creation levels.  A logic variable may only
be instantiated with eigenvariables created before it.  When a
right-hand side mentions later eigenvariables under another logic
variable, that variable is pruned (the offending argument dropped) or
lowered (rebuilt at the older level); under a rigid head the equation
simply fails.

Substitutions are immutable and idempotent: extending one applies it
to the new binding and folds the binding back through every range, so
``apply`` never needs to iterate.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional

from .hterms import (
    App, BVar, Const, EVar, LVar, Lam, Term, beta_norm, fresh_evar,
    fresh_level, fresh_lvar_at, mk_app, subst_term, term_spine, type_of,
)


@dataclass(frozen=True)
class Eq:
    lhs: Term
    rhs: Term

    def __str__(self):
        return f"{self.lhs} = {self.rhs}"


class Subst:
    """Idempotent map from logic variables to closed terms."""

    __slots__ = ("_m",)

    def __init__(self, m: Optional[dict[LVar, Term]] = None):
        self._m = m or {}

    def lookup(self, v: LVar) -> Optional[Term]:
        return self._m.get(v)

    def __len__(self):
        return len(self._m)

    def items(self):
        return self._m.items()

    def apply(self, t: Term) -> Term:
        if not self._m:
            return t
        return beta_norm(self._walk(t))

    def _walk(self, t: Term) -> Term:
        match t:
            case LVar():
                return self._m.get(t, t)
            case App(fn, arg):
                return App(self._walk(fn), self._walk(arg))
            case Lam(var, ty, body):
                return Lam(var, ty, self._walk(body))
            case _:
                return t

    def extend(self, v: LVar, t: Term) -> "Subst":
        t = self.apply(t)
        one = Subst({v: t})
        m = {k: beta_norm(one._walk(r)) for k, r in self._m.items()}
        m[v] = t
        return Subst(m)

    def extend_all(self, pairs: Iterable[tuple[LVar, Term]]) -> "Subst":
        s = self
        for v, t in pairs:
            s = s.extend(v, t)
        return s


@dataclass(frozen=True)
class UnifyResult:
    status: str  # "ok" | "residual" | "fail"
    subst: Subst
    residuals: tuple[Eq, ...] = ()
    reason: str = ""

    @property
    def ok(self) -> bool:
        return self.status == "ok"


class _Fail(Exception):
    def __init__(self, reason: str):
        self.reason = reason


class _Residual(Exception):
    pass


def unify(eqs: Iterable[Eq], subst: Optional[Subst] = None) -> UnifyResult:
    """Solve a list of equations, threading and extending `subst`."""
    sigma = subst or Subst()
    work = deque(eqs)
    residuals: list[Eq] = []
    try:
        while True:
            progressed_len = len(sigma)
            while work:
                eq = work.popleft()
                sigma = _step(sigma, sigma.apply(eq.lhs), sigma.apply(eq.rhs),
                              work, residuals)
            if residuals and len(sigma) > progressed_len:
                work.extend(residuals)
                residuals.clear()
                continue
            break
    except _Fail as f:
        return UnifyResult("fail", sigma, (), f.reason)
    if residuals:
        return UnifyResult("residual", sigma, tuple(residuals))
    return UnifyResult("ok", sigma)


def unify_one(lhs: Term, rhs: Term, subst: Optional[Subst] = None) -> UnifyResult:
    return unify([Eq(lhs, rhs)], subst)


def _step(sigma: Subst, t: Term, u: Term, work: deque, residuals: list) -> Subst:
    # Strip binders in lock step, eta-expanding the shorter side; the
    # bound variable becomes a shared fresh eigenvariable.
    while True:
        if isinstance(t, Lam) and isinstance(u, Lam):
            e = fresh_evar("u", t.ty)
            t = beta_norm(subst_term(t.body, {t.var: e}))
            u = beta_norm(subst_term(u.body, {u.var: e}))
        elif isinstance(t, Lam):
            e = fresh_evar("u", t.ty)
            t = beta_norm(subst_term(t.body, {t.var: e}))
            u = beta_norm(App(u, e))
        elif isinstance(u, Lam):
            e = fresh_evar("u", u.ty)
            u = beta_norm(subst_term(u.body, {u.var: e}))
            t = beta_norm(App(t, e))
        else:
            break

    if t == u:
        return sigma

    th, targs = term_spine(t)
    uh, uargs = term_spine(u)
    tflex = isinstance(th, LVar)
    uflex = isinstance(uh, LVar)

    if tflex and uflex:
        return _flex_flex(sigma, th, targs, uh, uargs, t, u, residuals)
    if tflex:
        return _flex_rigid(sigma, th, targs, u, t, residuals)
    if uflex:
        return _flex_rigid(sigma, uh, uargs, t, u, residuals)

    # rigid-rigid
    if isinstance(th, Const) and isinstance(uh, Const):
        if th.name != uh.name:
            raise _Fail(f"constant clash: {th.name} vs {uh.name}")
    elif isinstance(th, EVar) and isinstance(uh, EVar):
        if th.name != uh.name:
            raise _Fail(f"distinct eigenvariables: {th.name} vs {uh.name}")
    elif isinstance(th, BVar) and isinstance(uh, BVar):
        if th.name != uh.name:
            raise _Fail(f"distinct bound variables: {th.name} vs {uh.name}")
    else:
        raise _Fail(f"head clash: {th} vs {uh}")
    if len(targs) != len(uargs):
        raise _Fail(f"arity mismatch at head {th}")
    for a, b in zip(targs, uargs):
        work.append(Eq(a, b))
    return sigma


def _is_pattern(args: list[Term]) -> bool:
    seen = set()
    for a in args:
        if not isinstance(a, (EVar, BVar)):
            return False
        key = (type(a).__name__, a.name)
        if key in seen:
            return False
        seen.add(key)
    return True


def _flex_rigid(sigma: Subst, k: LVar, kargs: list[Term], rhs: Term,
                flex_side: Term, residuals: list) -> Subst:
    if not _is_pattern(kargs):
        residuals.append(Eq(flex_side, rhs))
        return sigma
    binders = []
    pi: dict = {}
    for a in kargs:
        z = f"z{fresh_level()}"
        binders.append((z, a.ty))
        pi[a] = BVar(z, a.ty)
    extra: list[tuple[LVar, Term]] = []
    try:
        body = _copy(rhs, k, pi, k.level, True, extra)
    except _Residual:
        residuals.append(Eq(flex_side, rhs))
        return sigma
    binding: Term = body
    for z, ty in reversed(binders):
        binding = Lam(z, ty, binding)
    sigma = sigma.extend_all(extra)
    return sigma.extend(k, binding)


def _copy(t: Term, k: LVar, pi: dict, level: int, rigid: bool,
          extra: list[tuple[LVar, Term]]) -> Term:
    match t:
        case Lam(var, ty, body):
            taken = {b.name for b in pi.values() if isinstance(b, BVar)}
            if var in taken:
                nv = f"{var}{fresh_level()}"
                body = subst_term(body, {var: BVar(nv, ty)})
                var = nv
            return Lam(var, ty, _copy(body, k, pi, level, rigid, extra))
    head, args = term_spine(t)
    match head:
        case Const() | BVar():
            return mk_app(head, [_copy(a, k, pi, level, rigid, extra)
                                 for a in args])
        case EVar():
            if head in pi:
                h: Term = pi[head]
            elif head.level < level:
                h = head
            elif rigid:
                raise _Fail(f"eigenvariable {head.name} escapes scope of {k.name}")
            else:
                raise _Residual
            return mk_app(h, [_copy(a, k, pi, level, rigid, extra)
                              for a in args])
        case LVar():
            if head == k:
                if rigid:
                    raise _Fail(f"occurs check: {k.name}")
                raise _Residual
            return _copy_flex(head, args, k, pi, level, extra)
    raise AssertionError(f"unexpected term {t!r}")


def _raise_over(m: LVar, pi: dict, skip: set) -> list[EVar]:
    # Eigenvariables bound in pi that m's eventual instantiation may
    # legitimately mention; they must become explicit arguments when m
    # is rebuilt at an older level.
    return [e for e in pi if isinstance(e, EVar) and e.level < m.level
            and e not in skip]

def _copy_flex(m: LVar, args: list[Term], k: LVar, pi: dict, level: int,
               extra: list[tuple[LVar, Term]]) -> Term:
    from .hterms import arrow, split_arrow

    def expressible(a: Term) -> bool:
        return isinstance(a, BVar) or a in pi or (isinstance(a, EVar)
                                                  and a.level < level)

    if _is_pattern(args):
        keep = [i for i, a in enumerate(args) if expressible(a)]
        if len(keep) == len(args) and m.level <= level:
            return mk_app(m, [pi.get(a, a) for a in args])
        # Rebuild m at the older scope: prune inexpressible argument
        # positions, and raise over the pi-bound eigenvariables it may
        # still depend on.
        extras = _raise_over(m, pi, set(args))
        alldoms, cod = split_arrow(m.ty)
        doms = alldoms[:len(args)]
        cod = arrow(alldoms[len(args):], cod)
        m2 = fresh_lvar_at(m.name.split("_")[0],
                           arrow([doms[i] for i in keep]
                                 + [e.ty for e in extras], cod),
                           min(level, m.level))
        zs = [(f"z{fresh_level()}", d) for d in doms]
        lam_body = mk_app(m2, [BVar(zs[i][0], zs[i][1]) for i in keep]
                          + list(extras))
        binding: Term = lam_body
        for z, ty in reversed(zs):
            binding = Lam(z, ty, binding)
        extra.append((m, binding))
        return mk_app(m2, [pi.get(args[i], args[i]) for i in keep]
                      + [pi[e] for e in extras])
    # Non-pattern arguments: keep the subterm when everything in it is
    # already expressible, raising and lowering the head if needed;
    # otherwise give up on this equation for now (a _Residual escapes
    # from the argument copy).
    copied = [_copy(a, k, pi, level, False, extra) for a in args]
    if m.level > level:
        extras = _raise_over(m, pi, set())
        m2 = fresh_lvar_at(m.name.split("_")[0],
                           arrow([e.ty for e in extras], m.ty),
                           min(level, m.level))
        extra.append((m, mk_app(m2, list(extras))))
        return mk_app(mk_app(m2, [pi[e] for e in extras]), copied)
    return mk_app(m, copied)


def _flex_flex(sigma: Subst, k: LVar, kargs: list[Term], m: LVar,
               margs: list[Term], t: Term, u: Term, residuals: list) -> Subst:
    if not (_is_pattern(kargs) and _is_pattern(margs)):
        residuals.append(Eq(t, u))
        return sigma
    from .hterms import arrow, split_arrow
    if k == m:
        same = [i for i in range(len(kargs)) if kargs[i] == margs[i]]
        if len(same) == len(kargs):
            return sigma
        alldoms, cod = split_arrow(k.ty)
        doms = alldoms[:len(kargs)]
        cod = arrow(alldoms[len(kargs):], cod)
        k2 = fresh_lvar_at(k.name.split("_")[0],
                           arrow([doms[i] for i in same], cod), k.level)
        zs = [(f"z{fresh_level()}", d) for d in doms]
        body = mk_app(k2, [BVar(zs[i][0], zs[i][1]) for i in same])
        binding: Term = body
        for z, ty in reversed(zs):
            binding = Lam(z, ty, binding)
        return sigma.extend(k, binding)
    common = [a for a in kargs if a in set(margs)]
    level = min(k.level, m.level)
    w = fresh_lvar_at("W", arrow([a.ty for a in common], type_of(t)), level)
    kzs = [(f"z{fresh_level()}", a.ty) for a in kargs]
    kpos = {a: BVar(z, ty) for a, (z, ty) in zip(kargs, kzs)}
    kbody = mk_app(w, [kpos[a] for a in common])
    kbind: Term = kbody
    for z, ty in reversed(kzs):
        kbind = Lam(z, ty, kbind)
    mzs = [(f"z{fresh_level()}", a.ty) for a in margs]
    mpos = {a: BVar(z, ty) for a, (z, ty) in zip(margs, mzs)}
    mbody = mk_app(w, [mpos[a] for a in common])
    mbind: Term = mbody
    for z, ty in reversed(mzs):
        mbind = Lam(z, ty, mbind)
    sigma = sigma.extend(k, kbind)
    return sigma.extend(m, mbind)
