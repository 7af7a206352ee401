"""Reconstruction of LF objects from answer terms.

Type erasure is not injective on its own, but relative to a known LF
type every simply typed answer determines at most one LF object: a Pi
dictates a lambda whose annotation it supplies, and an application
head names a signature constant or context variable whose classifier
types the arguments one by one, each under the substitution built from
those before it.  The reconstruction checks its own work: after the
spine is rebuilt, the instantiated target of the head's classifier
must be beta-eta equal to the expected type.

Answers still containing logic variables are refused outright; there
is no LF counterpart to report for them.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import lf_syntax as lf
from .hterms import (
    BVar, Const, EVar, LVar, Lam, SimpleType, Term, beta_norm, eta_long,
    lvars_of, term_spine,
)
from .lf_kernel import beta_eta_equal, beta_normalize, substitute


class InversionError(Exception):
    pass


@dataclass(frozen=True)
class InversionGoal:
    sig: lf.Signature
    ctx: lf.Context
    term: Term
    ty: lf.Fam


def eta_expand_answer(t: Term, ty: SimpleType) -> Term:
    """Bring a solver answer to the eta-long beta-normal form the
    reconstruction expects."""
    from .hterms import type_of
    t = beta_norm(t)
    if type_of(t) != ty:
        raise InversionError(f"answer has simple type {type_of(t)}, "
                             f"expected {ty}")
    return eta_long(t)


def invert(g: InversionGoal) -> lf.Obj:
    if lvars_of(g.term):
        names = sorted(v.name for v in lvars_of(g.term))
        raise InversionError(f"answer not closed: free {', '.join(names)}")
    return _invert(g.sig, g.ctx, g.term, beta_normalize(g.ty))


def _invert(sig: lf.Signature, ctx: lf.Context, t: Term, ty: lf.Fam) -> lf.Obj:
    if isinstance(ty, lf.FPi):
        if not isinstance(t, Lam):
            raise InversionError("subject not eta-long at a Pi type")
        var = t.var
        if ctx.lookup(var) is not None or sig.lookup(var) is not None:
            var = lf.fresh_name(var, set(ctx.names()) | set(sig.names()))
        body_ty = beta_normalize(substitute(ty.body, {ty.var: lf.OVar(var)}))
        tbody = t.body
        if var != t.var:
            from .hterms import subst_term
            tbody = subst_term(tbody, {t.var: BVar(var, t.ty)})
        body = _invert(sig, ctx.extend(var, ty.dom), tbody, body_ty)
        return lf.OLam(var, ty.dom, body)
    head, args = term_spine(t)
    match head:
        case Const(name, _):
            looked = sig.lookup(name)
            if looked is None or isinstance(looked, (lf.KType, lf.KPi)):
                raise InversionError(f"unknown object constant {name}")
            classifier = beta_normalize(looked)
            lf_head: lf.Obj = lf.OConst(name)
        case BVar(name, _):
            found = ctx.lookup(name)
            if found is None:
                raise InversionError(f"unknown variable {name}")
            classifier = beta_normalize(found)
            lf_head = lf.OVar(name)
        case EVar(name, _, _):
            raise InversionError(f"eigenvariable {name} in answer")
        case LVar(name, _, _):
            raise InversionError(f"answer not closed: free {name}")
        case _:
            raise InversionError(f"cannot invert head {head!r}")
    binders, target = lf.split_fam_pis(classifier)
    if len(args) > len(binders):
        raise InversionError(
            f"{_head_name(lf_head)} takes {len(binders)} arguments, "
            f"got {len(args)}")
    if len(args) < len(binders):
        raise InversionError("subject not eta-long: "
                             f"{_head_name(lf_head)} partially applied")
    sub: dict[str, lf.Obj] = {}
    inv_args: list[lf.Obj] = []
    for (bname, bty), arg in zip(binders, args):
        expected = beta_normalize(substitute(bty, sub))
        inv = _invert(sig, ctx, arg, expected)
        inv_args.append(inv)
        sub = dict(sub)
        sub[bname] = inv
    final = beta_normalize(substitute(target, sub))
    if not beta_eta_equal(sig, ctx, final, ty):
        raise InversionError(
            f"head {_head_name(lf_head)} yields {lf.print_lf(final)}, "
            f"expected {lf.print_lf(ty)}")
    return lf.obj_app(lf_head, inv_args)


def _head_name(h: lf.Obj) -> str:
    return h.name if isinstance(h, (lf.OConst, lf.OVar)) else str(h)
