"""Substitution, normalization, canonical forms, and the LF judgments.

Checking is algorithmic: the judgment rules are syntax-directed, so each
check synthesizes a beta-normal classifier and compares against expected
types using beta-eta-equality (normalize, eta-expand to long form, compare
up to alpha).  A fuel bound guards normalization so that ill-formed input
fed directly to the normalizer cannot loop; well-typed terms never hit it.
"""

from __future__ import annotations

from typing import Mapping, Optional, Union

from .lf_syntax import (
    Context, Decl, Expr, Fam, FApp, FConst, FPi, Kind, KindDecl, KPi, KType,
    LFError, Obj, OApp, OConst, ObjDecl, OLam, OVar, Signature, alpha_eq,
    fam_app, fam_spine, free_vars, fresh_name, obj_app, obj_spine,
)

DEFAULT_FUEL = 100000


class LFTypeError(LFError):
    """A judgment failed; carries the rule name and a location string."""

    def __init__(self, message: str, rule: str = "", loc: str = ""):
        self.message = message
        self.rule = rule
        self.loc = loc
        text = f"[{rule}] {message}" if rule else message
        if loc:
            text += f" (in {loc})"
        super().__init__(text)


class LFFuelError(LFError):
    """Normalization exceeded its step budget."""


# ---------------------------------------------------------------------------
# Substitution

def substitute(e: Expr, bindings: Mapping[str, Obj]) -> Expr:
    """Capture-avoiding simultaneous substitution of objects for variables.

    The result may contain beta-redexes; callers normalize when needed.
    """
    return _subst(e, dict(bindings))


def _subst(e: Expr, b: dict[str, Obj]) -> Expr:
    if not b:
        return e
    match e:
        case KType() | FConst() | OConst():
            return e
        case OVar(name):
            return b.get(name, e)
        case KPi(var, dom, body) | FPi(var, dom, body) | OLam(var, dom, body):
            dom2 = _subst(dom, b)
            fvb = free_vars(body)
            inner = {k: v for k, v in b.items() if k != var and k in fvb}
            if not inner:
                return type(e)(var, dom2, body)
            ranges_fv: set[str] = set()
            for v in inner.values():
                ranges_fv |= free_vars(v)
            if var in ranges_fv:
                var2 = fresh_name(var, ranges_fv | fvb | set(inner))
                body = _subst(body, {var: OVar(var2)})
                var = var2
            return type(e)(var, dom2, _subst(body, inner))
        case FApp(fn, arg):
            return FApp(_subst(fn, b), _subst(arg, b))
        case OApp(fn, arg):
            return OApp(_subst(fn, b), _subst(arg, b))
    raise TypeError(f"not an LF expression: {e!r}")


# ---------------------------------------------------------------------------
# Beta-normalization

def beta_normalize(e: Expr, fuel: int = DEFAULT_FUEL) -> Expr:
    """Contract all beta-redexes; unique result up to alpha for typed input."""
    cell = [fuel]
    return _norm(e, cell)


def _spend(cell: list[int]) -> None:
    cell[0] -= 1
    if cell[0] < 0:
        raise LFFuelError("normalization fuel exhausted")


def _norm(e: Expr, cell: list[int]) -> Expr:
    match e:
        case KType() | FConst() | OConst() | OVar():
            return e
        case KPi(var, dom, body):
            return KPi(var, _norm(dom, cell), _norm(body, cell))
        case FPi(var, dom, body):
            return FPi(var, _norm(dom, cell), _norm(body, cell))
        case OLam(var, dom, body):
            return OLam(var, _norm(dom, cell), _norm(body, cell))
        case FApp(fn, arg):
            return FApp(_norm(fn, cell), _norm(arg, cell))
        case OApp(fn, arg):
            fn2 = _norm(fn, cell)
            if isinstance(fn2, OLam):
                _spend(cell)
                return _norm(substitute(fn2.body, {fn2.var: arg}), cell)
            return OApp(fn2, _norm(arg, cell))
    raise TypeError(f"not an LF expression: {e!r}")


# ---------------------------------------------------------------------------
# Canonical (eta-long) forms

def canonicalize(sig: Signature, ctx: Context, e: Expr,
                 classifier: Optional[Expr] = None) -> Expr:
    """Eta-long form of a beta-normal, well-typed expression.

    Objects need their classifying type family; families and kinds carry
    enough structure on their own.  Idempotent.
    """
    if isinstance(e, (OConst, OVar, OLam, OApp)):
        if not isinstance(classifier, (FConst, FPi, FApp)):
            raise LFTypeError("canonicalize needs the classifying type of an object")
        return _canon_obj(sig, ctx, e, classifier)
    if isinstance(e, (FConst, FPi, FApp)):
        return _canon_fam(sig, ctx, e)
    if isinstance(e, (KType, KPi)):
        return _canon_kind(sig, ctx, e)
    raise TypeError(f"not an LF expression: {e!r}")


def _canon_obj(sig: Signature, ctx: Context, m: Obj, t: Fam) -> Obj:
    if isinstance(t, FPi):
        dom_c = _canon_fam(sig, ctx, t.dom)
        if isinstance(m, OLam):
            var = m.var
            body = m.body
            if var in ctx.names():
                var = fresh_name(var, ctx.names() | free_vars(body) | free_vars(t.body))
                body = substitute(body, {m.var: OVar(var)})
        else:
            var = fresh_name("x", ctx.names() | free_vars(m) | free_vars(t.body))
            body = OApp(m, OVar(var))
        rest = beta_normalize(substitute(t.body, {t.var: OVar(var)}))
        inner = _canon_obj(sig, ctx.extend(var, t.dom), body, rest)
        return OLam(var, dom_c, inner)
    head, args = obj_spine(m)
    if isinstance(head, OLam):
        raise LFTypeError("abstraction at base type", rule="abs-obj")
    if isinstance(head, OConst):
        classifier = sig.lookup(head.name)
        if not isinstance(classifier, (FConst, FPi, FApp)):
            raise LFTypeError(f"unknown object constant {head.name!r}", rule="var-obj")
    else:
        classifier = ctx.lookup(head.name)
        if classifier is None:
            raise LFTypeError(f"unbound variable {head.name!r}", rule="var-obj")
    rest = beta_normalize(classifier)
    out: list[Obj] = []
    sub: dict[str, Obj] = {}
    for a in args:
        if not isinstance(rest, FPi):
            raise LFTypeError(f"too many arguments to {head.name!r}", rule="app-obj")
        expected = beta_normalize(substitute(rest.dom, sub))
        out.append(_canon_obj(sig, ctx, a, expected))
        sub[rest.var] = a
        rest = rest.body
    return obj_app(head, out)


def _canon_fam(sig: Signature, ctx: Context, a: Fam) -> Fam:
    if isinstance(a, FPi):
        dom_c = _canon_fam(sig, ctx, a.dom)
        return FPi(a.var, dom_c, _canon_fam(sig, ctx.extend(a.var, a.dom), a.body))
    head, args = fam_spine(a)
    if not isinstance(head, FConst):
        raise LFTypeError("application head must be a type constant", rule="app-fam")
    kind = sig.lookup(head.name)
    if not isinstance(kind, (KType, KPi)):
        raise LFTypeError(f"unknown type constant {head.name!r}", rule="var-fam")
    rest: Kind = beta_normalize(kind)
    out: list[Obj] = []
    sub: dict[str, Obj] = {}
    for m in args:
        if not isinstance(rest, KPi):
            raise LFTypeError(f"too many arguments to {head.name!r}", rule="app-fam")
        expected = beta_normalize(substitute(rest.dom, sub))
        out.append(_canon_obj(sig, ctx, m, expected))
        sub[rest.var] = m
        rest = rest.body
    return fam_app(head, out)


def _canon_kind(sig: Signature, ctx: Context, k: Kind) -> Kind:
    if isinstance(k, KPi):
        dom_c = _canon_fam(sig, ctx, k.dom)
        return KPi(k.var, dom_c, _canon_kind(sig, ctx.extend(k.var, k.dom), k.body))
    return k


def beta_eta_equal(sig: Signature, ctx: Context, a: Expr, b: Expr,
                   classifier: Optional[Expr] = None) -> bool:
    """Beta-eta-equality: compare canonical representatives up to alpha."""
    a_n = beta_normalize(a)
    b_n = beta_normalize(b)
    if alpha_eq(a_n, b_n):
        return True
    cls = beta_normalize(classifier) if classifier is not None else None
    return alpha_eq(canonicalize(sig, ctx, a_n, cls), canonicalize(sig, ctx, b_n, cls))


# ---------------------------------------------------------------------------
# The judgment checker

def check_signature(sig: Signature) -> None:
    """Accept iff `sig` is derivable as a valid signature; raise otherwise."""
    seen: set[str] = set()
    for i, d in enumerate(sig.decls):
        rule = "kind-sig" if isinstance(d, KindDecl) else "type-sig"
        if d.name in seen:
            raise LFTypeError(f"duplicate declaration of {d.name!r}",
                              rule=rule, loc=d.name)
        seen.add(d.name)
        prefix = Signature(sig.decls[:i])
        try:
            if isinstance(d, KindDecl):
                check_kind(prefix, Context(), d.kind)
            else:
                k = check_type(prefix, Context(), d.fam)
                if not isinstance(k, KType):
                    raise LFTypeError(
                        f"classifier of {d.name!r} has kind {k}, not type",
                        rule="type-sig")
        except LFTypeError as err:
            if err.loc:
                raise
            raise LFTypeError(err.message, rule=err.rule,
                              loc=f"declaration {d.name!r}") from None


def check_context(sig: Signature, ctx: Context) -> None:
    """Accept iff every binding's type has kind Type in its prefix."""
    names: set[str] = set()
    for i, (x, a) in enumerate(ctx.bindings):
        if x in names:
            raise LFTypeError(f"duplicate context variable {x!r}", rule="type-ctx")
        names.add(x)
        k = check_type(sig, Context(ctx.bindings[:i]), a)
        if not isinstance(k, KType):
            raise LFTypeError(f"context type for {x!r} has kind {k}, not type",
                              rule="type-ctx")


def check_kind(sig: Signature, ctx: Context, k: Kind) -> None:
    """Accept iff `ctx |- k kind` is derivable."""
    match k:
        case KType():
            return
        case KPi(var, dom, body):
            dk = check_type(sig, ctx, dom)
            if not isinstance(dk, KType):
                raise LFTypeError(f"Pi domain {dom} has kind {dk}, not type",
                                  rule="pi-kind")
            var, body = _freshen_binder(var, body, ctx)
            check_kind(sig, ctx.extend(var, beta_normalize(dom)), body)
            return
    raise TypeError(f"not a kind: {k!r}")


def check_type(sig: Signature, ctx: Context, a: Fam) -> Kind:
    """Synthesize the beta-normal kind of `a` (error if not well-formed)."""
    match a:
        case FConst(name):
            k = sig.lookup(name)
            if k is None:
                raise LFTypeError(f"unknown type constant {name!r}", rule="var-fam")
            if not isinstance(k, (KType, KPi)):
                raise LFTypeError(f"object constant {name!r} used as a type",
                                  rule="var-fam")
            return beta_normalize(k)
        case FPi(var, dom, body):
            dk = check_type(sig, ctx, dom)
            if not isinstance(dk, KType):
                raise LFTypeError(f"Pi domain {dom} has kind {dk}, not type",
                                  rule="pi-fam")
            var, body = _freshen_binder(var, body, ctx)
            bk = check_type(sig, ctx.extend(var, beta_normalize(dom)), body)
            if not isinstance(bk, KType):
                raise LFTypeError(f"Pi body {body} has kind {bk}, not type",
                                  rule="pi-fam")
            return KType()
        case FApp(fn, arg):
            k = check_type(sig, ctx, fn)
            if not isinstance(k, KPi):
                head, _ = fam_spine(fn)
                name = head.name if isinstance(head, FConst) else str(head)
                raise LFTypeError(f"too many arguments to {name!r}", rule="app-fam")
            check_object(sig, ctx, arg, expected=k.dom, _rule="app-fam")
            return beta_normalize(substitute(k.body, {k.var: arg}))
    raise TypeError(f"not a type family: {a!r}")


def check_object(sig: Signature, ctx: Context, m: Obj,
                 expected: Optional[Fam] = None, _rule: str = "app-obj") -> Fam:
    """Synthesize the beta-normal type of `m`; compare to `expected` if given."""
    t = _synth_obj(sig, ctx, m)
    if expected is not None:
        want = beta_normalize(expected)
        if not beta_eta_equal(sig, ctx, t, want):
            raise LFTypeError(f"{print_brief(m)} has type {t}, expected {want}",
                              rule=_rule)
    return t


def _synth_obj(sig: Signature, ctx: Context, m: Obj) -> Fam:
    match m:
        case OConst(name):
            a = sig.lookup(name)
            if a is None:
                raise LFTypeError(f"unknown constant {name!r}", rule="var-obj")
            if not isinstance(a, (FConst, FPi, FApp)):
                raise LFTypeError(f"type constant {name!r} used as an object",
                                  rule="var-obj")
            return beta_normalize(a)
        case OVar(name):
            a = ctx.lookup(name)
            if a is None:
                raise LFTypeError(f"unbound variable {name!r}", rule="var-obj")
            return beta_normalize(a)
        case OLam(var, dom, body):
            dk = check_type(sig, ctx, dom)
            if not isinstance(dk, KType):
                raise LFTypeError(f"binder type {dom} has kind {dk}, not type",
                                  rule="abs-obj")
            dom_n = beta_normalize(dom)
            var, body = _freshen_binder(var, body, ctx)
            bt = _synth_obj(sig, ctx.extend(var, dom_n), body)
            return FPi(var, dom_n, bt)
        case OApp(fn, arg):
            ft = _synth_obj(sig, ctx, fn)
            if not isinstance(ft, FPi):
                raise LFTypeError(f"{print_brief(fn)} of type {ft} applied to an argument",
                                  rule="app-obj")
            check_object(sig, ctx, arg, expected=ft.dom, _rule="app-obj")
            return beta_normalize(substitute(ft.body, {ft.var: arg}))
    raise TypeError(f"not an object: {m!r}")


def _freshen_binder(var: str, body: Expr, ctx: Context) -> tuple[str, Expr]:
    # contexts bind distinct names; rename when input shadows one
    if var in ctx.names():
        var2 = fresh_name(var, ctx.names() | free_vars(body))
        return var2, substitute(body, {var: OVar(var2)})
    return var, body


def print_brief(e: Expr, limit: int = 40) -> str:
    from .lf_syntax import print_lf
    s = print_lf(e)
    return s if len(s) <= limit else s[:limit] + "..."
