"""Strict occurrence analysis for Pi-bound variables of LF classifiers.

A binder occurs strictly when every instance of the target type pins down
a well-typed instantiation for it: the occurrence sits on a rigid path and
is applied only to distinct locally bound variables.  Such binders need no
inhabitation premise in the translated clause.

Three judgments, mirrored by the functions below:

* object level (``strict_in_object``): the tracked variable applied to
  distinct local variables (INIT_o); a rigid head with some strict
  argument (APP_o); descent under abstraction extends the local set
  (ABS_o).  A head drawn from the candidate binders, including the
  tracked variable itself, blocks APP_o: substitution could erase or
  rearrange anything beneath it.
* type level (``strict_in_type``): some argument of the constant-headed
  target strict (APP_t, with an empty local set); descent under Pi
  accumulates candidates (PI_t); and the transitive case (CTX_t): x is
  strict when some candidate y is strict in the target and x is strict
  in y's type, judged in the prefix preceding y.
* whole classifiers (``strict_binders``): binder i is strict in
  ``{x1:A1}...{xn:An} B`` iff it is strict in the type with its own
  binder removed, starting from no candidates.

CTX_t is a relation, not an algorithm; the least fixpoint is computed by
depth-first search that refuses to revisit a judgment already open on the
current path (a minimal derivation never repeats one).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .lf_kernel import substitute
from .lf_syntax import (
    Fam, FConst, FPi, Obj, OLam, OVar, fam_spine, free_vars, fresh_name,
    obj_spine, split_fam_pis,
)

_Gamma = tuple[tuple[str, Fam], ...]


@dataclass(frozen=True)
class StrictContext:
    """Candidate binders with their types, plus the local-variable set."""

    binders: _Gamma = ()
    delta: frozenset[str] = frozenset()

    def __post_init__(self):
        names = {n for n, _ in self.binders}
        overlap = names & self.delta
        if overlap:
            raise ValueError(f"local variables shadow candidates: {sorted(overlap)}")

    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.binders)


def strict_in_object(candidates: Iterable[str], delta: Iterable[str],
                     x: str, m: Obj) -> bool:
    """True iff x occurs strictly in the beta-normal object `m`."""
    return _why_obj(frozenset(candidates), frozenset(delta), x, m) is not None


def strict_in_type(sctx: StrictContext | Iterable[tuple[str, Fam]],
                   x: str, a: Fam) -> bool:
    """True iff x occurs strictly in the beta-normal type `a`."""
    binders = sctx.binders if isinstance(sctx, StrictContext) else tuple(sctx)
    return _why_type(binders, x, a, frozenset()) is not None


def strict_binders(a: Fam) -> frozenset[int]:
    """Indices of the Pi binders of `a` that occur strictly."""
    binders, base = split_fam_pis(a)
    out = set()
    for i in range(len(binders)):
        if _why_type((), binders[i][0], _remove_binder(binders, base, i),
                     frozenset()) is not None:
            out.add(i)
    return frozenset(out)


def explain_strictness(a: Fam) -> list[tuple[str, bool, str]]:
    """Per binder: (name, strict?, justifying rule chain or reason)."""
    binders, base = split_fam_pis(a)
    report = []
    for i, (name, _) in enumerate(binders):
        why = _why_type((), name, _remove_binder(binders, base, i), frozenset())
        if why is None:
            report.append((name, False, "no strict occurrence"))
        else:
            report.append((name, True, why))
    return report


def _remove_binder(binders: list[tuple[str, Fam]], base: Fam, i: int) -> Fam:
    rest: Fam = base
    for j in range(len(binders) - 1, -1, -1):
        if j != i:
            rest = FPi(binders[j][0], binders[j][1], rest)
    return rest


# ---------------------------------------------------------------------------
# Derivation search; each function returns a rule chain or None

def _why_obj(candidates: frozenset[str], delta: frozenset[str],
             x: str, m: Obj) -> Optional[str]:
    if isinstance(m, OLam):
        var, body = m.var, m.body
        if var in candidates or var == x:
            var = fresh_name(var, candidates | delta | {x} | free_vars(body))
            body = substitute(body, {m.var: OVar(var)})
        inner = _why_obj(candidates, delta | {var}, x, body)
        return None if inner is None else f"ABS_o; {inner}"
    head, args = obj_spine(m)
    if isinstance(head, OVar) and head.name == x:
        names = [a.name for a in args if isinstance(a, OVar)]
        if (len(names) == len(args) and len(set(names)) == len(names)
                and all(n in delta for n in names)):
            return "INIT_o"
        return None
    if isinstance(head, OVar) and head.name in candidates:
        return None
    for i, arg in enumerate(args):
        inner = _why_obj(candidates, delta, x, arg)
        if inner is not None:
            return f"APP_o(arg {i + 1}); {inner}"
    return None


def _why_type(gamma: _Gamma, x: str, a: Fam,
              blocked: frozenset) -> Optional[str]:
    steps = 0
    taken = {n for n, _ in gamma} | {x}
    while isinstance(a, FPi):
        var, body = a.var, a.body
        if var in taken:
            var = fresh_name(var, taken | free_vars(body))
            body = substitute(body, {a.var: OVar(var)})
        gamma = gamma + ((var, a.dom),)
        taken.add(var)
        a = body
        steps += 1
    why = _why_base(gamma, x, a, blocked)
    if why is None:
        return None
    return f"PI_t^{steps}; {why}" if steps else why


def _why_base(gamma: _Gamma, x: str, base: Fam,
              blocked: frozenset) -> Optional[str]:
    key = (gamma, x, base)
    if key in blocked:
        return None
    blocked = blocked | {key}
    head, args = fam_spine(base)
    if isinstance(head, FConst):
        candidates = frozenset(n for n, _ in gamma) | {x}
        for i, arg in enumerate(args):
            inner = _why_obj(candidates, frozenset(), x, arg)
            if inner is not None:
                return f"APP_t(arg {i + 1}); {inner}"
    for j, (y, b) in enumerate(gamma):
        if y == x:
            continue
        pivot = _why_base(gamma, y, base, blocked)
        if pivot is None:
            continue
        through = _why_type(gamma[:j], x, b, blocked)
        if through is None:
            continue
        return f"CTX_t(pivot {y}) {{{y} in target: {pivot}}} {{{x} in type of {y}: {through}}}"
    return None
