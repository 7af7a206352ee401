"""Simply typed lambda terms and hereditary Harrop formulas.

This is the target language of the translation and the working language
of the proof-search engine.  Terms are intrinsically typed: every leaf
carries its simple type, so ``type_of`` is total and never consults an
environment.  Two flavors of free variable exist, both stamped with a
creation level from a single global clock:

* ``EVar``: an eigenvariable, introduced by universal goals.  Rigid.
* ``LVar``: a logic variable, introduced by universal program clauses
  or by a query.  Flexible; unification may bind it.

The clock makes names unique program-wide and orders creation: a logic
variable may only be instantiated with eigenvariables created earlier
(lower level), which is all the scope checking proof search needs.

Formulas cover goals ``true | A | D => G | pi x\\ G`` and clauses
``A | G => D | pi x\\ D``; conjunction never arises here.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Optional, Union

# ---------------------------------------------------------------------------
# Simple types


@dataclass(frozen=True)
class TBase:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class TArrow:
    dom: "SimpleType"
    cod: "SimpleType"

    def __str__(self):
        d = f"({self.dom})" if isinstance(self.dom, TArrow) else str(self.dom)
        return f"{d} -> {self.cod}"


SimpleType = Union[TBase, TArrow]

LF_OBJ = TBase("lf_obj")
LF_TYPE = TBase("lf_type")
PROP = TBase("o")


def arrow(doms: Iterable[SimpleType], cod: SimpleType) -> SimpleType:
    ty = cod
    for d in reversed(list(doms)):
        ty = TArrow(d, ty)
    return ty


def split_arrow(ty: SimpleType) -> tuple[list[SimpleType], SimpleType]:
    doms = []
    while isinstance(ty, TArrow):
        doms.append(ty.dom)
        ty = ty.cod
    return doms, ty


# ---------------------------------------------------------------------------
# Terms


@dataclass(frozen=True)
class Const:
    name: str
    ty: SimpleType

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class EVar:
    """Eigenvariable: rigid, scoped by its creation level."""

    name: str
    level: int
    ty: SimpleType

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class LVar:
    """Logic variable: a hole unification may fill."""

    name: str
    level: int
    ty: SimpleType

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class BVar:
    """Occurrence of a lambda- or quantifier-bound name."""

    name: str
    ty: SimpleType

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Lam:
    var: str
    ty: SimpleType  # type of the bound variable
    body: "Term"

    def __str__(self):
        return f"({self.var}\\ {self.body})"


@dataclass(frozen=True)
class App:
    fn: "Term"
    arg: "Term"

    def __str__(self):
        head, args = term_spine(self)
        inner = " ".join(_app_arg_str(t) for t in (head, *args))
        return f"({inner})"


Term = Union[Const, EVar, LVar, BVar, Lam, App]


def _app_arg_str(t: Term) -> str:
    s = str(t)
    return s


def type_of(t: Term) -> SimpleType:
    match t:
        case Const(_, ty) | EVar(_, _, ty) | LVar(_, _, ty) | BVar(_, ty):
            return ty
        case Lam(_, ty, body):
            return TArrow(ty, type_of(body))
        case App(fn, _):
            fty = type_of(fn)
            if not isinstance(fty, TArrow):
                raise TypeError(f"application of non-function {fn}")
            return fty.cod
    raise TypeError(f"not a term: {t!r}")


def mk_app(head: Term, args: Iterable[Term]) -> Term:
    t = head
    for a in args:
        t = App(t, a)
    return t


def term_spine(t: Term) -> tuple[Term, list[Term]]:
    args: list[Term] = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fn
    args.reverse()
    return t, args


# ---------------------------------------------------------------------------
# The creation clock

_clock = itertools.count(1)


def fresh_level() -> int:
    return next(_clock)


def fresh_evar(prefix: str, ty: SimpleType) -> EVar:
    n = fresh_level()
    return EVar(f"{prefix}#{n}", n, ty)


def fresh_lvar(prefix: str, ty: SimpleType) -> LVar:
    n = fresh_level()
    return LVar(f"{prefix}_{n}", n, ty)


def fresh_lvar_at(prefix: str, ty: SimpleType, level: int) -> LVar:
    """A fresh logic variable at a caller-chosen level.

    Unification lowers variables with this: the clock still supplies a
    unique name, but the scope level is inherited, not current.
    """
    n = fresh_level()
    return LVar(f"{prefix}_{n}", level, ty)


# ---------------------------------------------------------------------------
# Substitution and normalization

def free_bvars(t: Term) -> frozenset[str]:
    match t:
        case BVar(name, _):
            return frozenset([name])
        case Lam(var, _, body):
            return free_bvars(body) - {var}
        case App(fn, arg):
            return free_bvars(fn) | free_bvars(arg)
        case _:
            return frozenset()


def _fresh_bname(base: str, avoid: frozenset[str]) -> str:
    if base not in avoid:
        return base
    i = 1
    while f"{base}{i}" in avoid:
        i += 1
    return f"{base}{i}"


def subst_term(t: Term, m: dict[str, Term]) -> Term:
    """Replace free BVar occurrences; capture-avoiding."""
    if not m:
        return t
    match t:
        case BVar(name, _):
            return m.get(name, t)
        case App(fn, arg):
            return App(subst_term(fn, m), subst_term(arg, m))
        case Lam(var, ty, body):
            inner = {k: v for k, v in m.items() if k != var and k in free_bvars(body)}
            if not inner:
                return Lam(var, ty, body)
            clash = frozenset().union(*[free_bvars(v) for v in inner.values()])
            if var in clash:
                nv = _fresh_bname(var, clash | free_bvars(body))
                body = subst_term(body, {var: BVar(nv, ty)})
                var = nv
            return Lam(var, ty, subst_term(body, inner))
        case _:
            return t


def beta_norm(t: Term) -> Term:
    match t:
        case App(fn, arg):
            fn = beta_norm(fn)
            if isinstance(fn, Lam):
                return beta_norm(subst_term(fn.body, {fn.var: arg}))
            return App(fn, beta_norm(arg))
        case Lam(var, ty, body):
            return Lam(var, ty, beta_norm(body))
        case _:
            return t


def eta_long(t: Term) -> Term:
    """Fully eta-expand a beta-normal term."""
    ty = type_of(t)
    if isinstance(ty, TArrow):
        if isinstance(t, Lam):
            return Lam(t.var, t.ty, eta_long(t.body))
        v = _fresh_bname("w", free_bvars(t))
        return Lam(v, ty.dom, eta_long(App(t, BVar(v, ty.dom))))
    head, args = term_spine(t)
    return mk_app(head, [eta_long(a) for a in args])


def alpha_eq_term(a: Term, b: Term) -> bool:
    return _aeq(a, b, (), ())


def _aeq(a: Term, b: Term, ea: tuple[str, ...], eb: tuple[str, ...]) -> bool:
    match (a, b):
        case (BVar(na, _), BVar(nb, _)):
            for i in range(len(ea) - 1, -1, -1):
                if ea[i] == na or eb[i] == nb:
                    return ea[i] == na and eb[i] == nb
            return na == nb
        case (Const(na, ta), Const(nb, tb)):
            return na == nb and ta == tb
        case (EVar(na, _, _), EVar(nb, _, _)):
            return na == nb
        case (LVar(na, _, _), LVar(nb, _, _)):
            return na == nb
        case (Lam(va, ta, ba), Lam(vb, tb, bb)):
            return ta == tb and _aeq(ba, bb, ea + (va,), eb + (vb,))
        case (App(fa, xa), App(fb, xb)):
            return _aeq(fa, fb, ea, eb) and _aeq(xa, xb, ea, eb)
        case _:
            return False


def lvars_of(t: Term) -> frozenset[LVar]:
    match t:
        case LVar():
            return frozenset([t])
        case Lam(_, _, body):
            return lvars_of(body)
        case App(fn, arg):
            return lvars_of(fn) | lvars_of(arg)
        case _:
            return frozenset()


def evars_of(t: Term) -> frozenset[EVar]:
    match t:
        case EVar():
            return frozenset([t])
        case Lam(_, _, body):
            return evars_of(body)
        case App(fn, arg):
            return evars_of(fn) | evars_of(arg)
        case _:
            return frozenset()


# ---------------------------------------------------------------------------
# Formulas


@dataclass(frozen=True)
class Top:
    def __str__(self):
        return "true"


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple[Term, ...]

    def __str__(self):
        if not self.args:
            return self.pred
        return " ".join([self.pred] + [_atom_arg_str(a) for a in self.args])


def _atom_arg_str(t: Term) -> str:
    s = str(t)
    if isinstance(t, (App, Lam)) and not (s.startswith("(") and s.endswith(")")):
        return f"({s})"
    return s


@dataclass(frozen=True)
class Imp:
    left: "Formula"
    right: "Formula"

    def __str__(self):
        return f"({self.left} => {self.right})"


@dataclass(frozen=True)
class ForAll:
    var: str
    ty: SimpleType
    body: "Formula"

    def __str__(self):
        return f"(pi {self.var}\\ {self.body})"


Formula = Union[Top, Atom, Imp, ForAll]


def subst_formula(f: Formula, m: dict[str, Term]) -> Formula:
    if not m:
        return f
    match f:
        case Top():
            return f
        case Atom(pred, args):
            return Atom(pred, tuple(beta_norm(subst_term(a, m)) for a in args))
        case Imp(left, right):
            return Imp(subst_formula(left, m), subst_formula(right, m))
        case ForAll(var, ty, body):
            inner = {k: v for k, v in m.items() if k != var}
            if not inner:
                return f
            clash = frozenset().union(*[free_bvars(v) for v in inner.values()])
            if var in clash:
                nv = _fresh_bname(var, clash)
                body = subst_formula(body, {var: BVar(nv, ty)})
                var = nv
            return ForAll(var, ty, subst_formula(body, inner))
    raise TypeError(f"not a formula: {f!r}")


def alpha_eq_formula(a: Formula, b: Formula) -> bool:
    return _faeq(a, b, (), ())


def _faeq(a, b, ea, eb) -> bool:
    match (a, b):
        case (Top(), Top()):
            return True
        case (Atom(pa, xa), Atom(pb, xb)):
            return (pa == pb and len(xa) == len(xb)
                    and all(_aeq(s, t, ea, eb) for s, t in zip(xa, xb)))
        case (Imp(la, ra), Imp(lb, rb)):
            return _faeq(la, lb, ea, eb) and _faeq(ra, rb, ea, eb)
        case (ForAll(va, ta, ba), ForAll(vb, tb, bb)):
            return ta == tb and _faeq(ba, bb, ea + (va,), eb + (vb,))
        case _:
            return False


def map_formula_terms(f: Formula, fn) -> Formula:
    match f:
        case Top():
            return f
        case Atom(pred, args):
            return Atom(pred, tuple(fn(a) for a in args))
        case Imp(left, right):
            return Imp(map_formula_terms(left, fn), map_formula_terms(right, fn))
        case ForAll(var, ty, body):
            return ForAll(var, ty, map_formula_terms(body, fn))
    raise TypeError(f"not a formula: {f!r}")


def formula_lvars(f: Formula) -> frozenset[LVar]:
    match f:
        case Top():
            return frozenset()
        case Atom(_, args):
            out = frozenset()
            for a in args:
                out |= lvars_of(a)
            return out
        case Imp(left, right):
            return formula_lvars(left) | formula_lvars(right)
        case ForAll(_, _, body):
            return formula_lvars(body)
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# Programs


@dataclass(frozen=True)
class Program:
    """A signature of typed constants plus an ordered clause list."""

    xi: tuple[tuple[str, SimpleType], ...]
    clauses: tuple[Formula, ...]

    def const_type(self, name: str) -> Optional[SimpleType]:
        for n, ty in self.xi:
            if n == name:
                return ty
        return None
