"""Command-line driver.

Four subcommands cover the pipeline: `check` runs the signature
checker, `translate` emits the lambdaProlog program, `solve` runs an
inhabitation query end to end (translate, search, invert answers back
to LF), and `strictness` reports the per-binder analysis that powers
the optimized translation.

Exit codes: 0 on success (for solve: at least one solution), 1 when a
check fails or no solution is found, 2 for usage or I/O problems.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from . import lf_syntax as lf
from .engine import Limits, Solution, solve
from .hterms import App, Const, LVar, Lam, Term
from .inverter import InversionError, InversionGoal, invert
from .lf_kernel import LFTypeError, beta_normalize, check_signature, substitute
from .strictness import explain_strictness
from .translator import (
    TranslationError, emit_lambdaprolog, emit_split, phi, translate_query,
    translate_signature,
)


@dataclass(frozen=True)
class RunConfig:
    path: str
    command: str
    mode: str = "optimized"
    simplify: bool = True
    depth: int = 32
    max_solutions: int = 1
    out: Optional[str] = None
    explain: bool = False
    split: bool = False
    query: str = ""


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="lflp",
        description="Check LF signatures, translate them to hereditary "
                    "Harrop programs, and run inhabitation queries.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="type-check a signature file")
    p_check.add_argument("file")

    p_tr = sub.add_parser("translate", help="emit a lambdaProlog program")
    p_tr.add_argument("file")
    mode = p_tr.add_mutually_exclusive_group()
    mode.add_argument("--naive", action="store_true",
                      help="one typing premise per binder")
    mode.add_argument("--optimized", action="store_true",
                      help="drop premises for strict binders (default)")
    p_tr.add_argument("--no-simplify", action="store_true",
                      help="keep the literal true => wrappers")
    p_tr.add_argument("--split-sig-mod", action="store_true",
                      help="write separate .sig and .mod files")
    p_tr.add_argument("-o", "--out", default=None)

    p_solve = sub.add_parser("solve", help="run an inhabitation query")
    p_solve.add_argument("file")
    p_solve.add_argument("query")
    p_solve.add_argument("--depth", type=int, default=32,
                         help="backchain bound (default 32)")
    p_solve.add_argument("-n", type=int, default=1, dest="count",
                         help="solutions to report; 0 means all (default 1)")
    p_solve.add_argument("--naive", action="store_true",
                         help="search over the naive translation")

    p_str = sub.add_parser("strictness",
                           help="report strict binders per constant")
    p_str.add_argument("file")
    p_str.add_argument("--explain-strictness", action="store_true",
                       dest="explain", help="show the justifying rule chain")

    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0

    try:
        text = Path(args.file).read_text(encoding="utf-8")
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2

    if args.command == "check":
        return cmd_check(text)
    if args.command == "translate":
        cfg = RunConfig(args.file, "translate",
                        mode="naive" if args.naive else "optimized",
                        simplify=not args.no_simplify,
                        split=args.split_sig_mod, out=args.out)
        return cmd_translate(text, cfg)
    if args.command == "solve":
        if args.depth < 1:
            print("error: --depth must be at least 1", file=sys.stderr)
            return 2
        cfg = RunConfig(args.file, "solve",
                        mode="naive" if args.naive else "optimized",
                        depth=args.depth, max_solutions=args.count,
                        query=args.query)
        return cmd_solve(text, cfg)
    if args.command == "strictness":
        return cmd_strictness(text, args.explain)
    return 2


def _load_signature(text: str) -> lf.Signature:
    sig = lf.parse_signature(text)
    check_signature(sig)
    return sig


def cmd_check(text: str) -> int:
    try:
        sig = _load_signature(text)
    except (lf.LFSyntaxError, LFTypeError) as err:
        print(f"error: {err}")
        return 1
    print(f"ok: {len(sig.decls)} declarations")
    return 0


def cmd_translate(text: str, cfg: RunConfig) -> int:
    try:
        sig = _load_signature(text)
    except (lf.LFSyntaxError, LFTypeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    program = translate_signature(sig, cfg.mode, simplify=cfg.simplify)
    if cfg.split:
        stem = Path(cfg.out).with_suffix("") if cfg.out else Path(cfg.path).with_suffix("")
        sig_text, mod_text = emit_split(program, module=stem.name)
        try:
            Path(f"{stem}.sig").write_text(sig_text, encoding="utf-8")
            Path(f"{stem}.mod").write_text(mod_text, encoding="utf-8")
        except OSError as e:
            print(f"error: {e}", file=sys.stderr)
            return 2
        print(f"wrote {stem}.sig and {stem}.mod")
        return 0
    out = emit_lambdaprolog(program)
    if cfg.out:
        try:
            Path(cfg.out).write_text(out, encoding="utf-8")
        except OSError as e:
            print(f"error: {e}", file=sys.stderr)
            return 2
    else:
        sys.stdout.write(out)
    return 0


def _canonical_frees(terms: list[Term]) -> dict[LVar, str]:
    """Stable display names for unbound logic variables, in order of
    first appearance."""
    names: dict[LVar, str] = {}

    def walk(t: Term):
        match t:
            case LVar():
                if t not in names:
                    n = len(names)
                    label = "_" + chr(ord("A") + n % 26) + (
                        str(n // 26) if n >= 26 else "")
                    names[t] = label
            case App(fn, arg):
                walk(fn)
                walk(arg)
            case Lam(_, _, body):
                walk(body)
            case _:
                pass

    for t in terms:
        walk(t)
    return names


def _freeze_frees(t: Term, names: dict[LVar, str]) -> Term:
    match t:
        case LVar() if t in names:
            return Const(names[t], t.ty)
        case App(fn, arg):
            return App(_freeze_frees(fn, names), _freeze_frees(arg, names))
        case Lam(var, ty, body):
            return Lam(var, ty, _freeze_frees(body, names))
        case _:
            return t


def _show_hohh(t: Term, names: dict[LVar, str]) -> str:
    from .translator import _render_term
    return _render_term(_freeze_frees(t, names))


def cmd_solve(text: str, cfg: RunConfig) -> int:
    try:
        sig = _load_signature(text)
    except (lf.LFSyntaxError, LFTypeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    try:
        free, fam = lf.parse_query(cfg.query, sig)
        qt = translate_query(sig, free, fam)
    except (lf.LFSyntaxError, TranslationError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    program = translate_signature(sig, cfg.mode)
    qvars = tuple(v for _, v in qt.var_lvars) + (qt.subject,)
    run = solve(program, qt.goal,
                Limits(depth=cfg.depth, max_solutions=cfg.max_solutions),
                query_vars=qvars)
    if not run.solutions:
        print({"no": "no",
               "suspended": "suspended",
               "exhausted": "depth exhausted"}.get(run.status, run.status))
        return 1
    for i, sol in enumerate(run.solutions):
        if i:
            print()
        if len(run.solutions) > 1 or cfg.max_solutions != 1:
            print(f"% solution {i + 1}")
        _print_solution(sig, qt, sol)
    return 0


def _print_solution(sig: lf.Signature, qt, sol: Solution) -> None:
    values = [sol.value(v) for _, v in qt.var_lvars]
    subject_val = sol.value(qt.subject)
    frees = _canonical_frees(values + [subject_val])
    lf_values: dict[str, Optional[lf.Obj]] = {}
    sub: dict[str, lf.Obj] = {}
    for (name, _), val in zip(qt.var_lvars, values):
        ty = beta_normalize(substitute(qt.var_types[name], sub))
        obj = None
        if lf.free_vars(ty) <= set(sub):
            try:
                goal = InversionGoal(sig, lf.Context(()), val, ty)
                obj = invert(goal)
            except InversionError:
                obj = None
        lf_values[name] = obj
        if obj is not None:
            sub[name] = obj
        if obj is not None:
            print(f"{name} = {lf.print_lf(obj)}")
        else:
            print(f"{name} = {_show_hohh(val, frees)}  (not inverted)")
    inhabitant = None
    if all(v is not None for v in lf_values.values()):
        ty = beta_normalize(substitute(qt.fam, sub))
        try:
            inhabitant = invert(InversionGoal(sig, lf.Context(()),
                                              subject_val, ty))
        except InversionError:
            inhabitant = None
    if inhabitant is not None:
        print(f"inhabitant: {lf.print_lf(inhabitant)}")
    else:
        print(f"inhabitant: {_show_hohh(subject_val, frees)}  (not inverted)")


def cmd_strictness(text: str, explain: bool) -> int:
    try:
        sig = _load_signature(text)
    except (lf.LFSyntaxError, LFTypeError) as err:
        print(f"error: {err}")
        return 1
    for d in sig.decls:
        if isinstance(d, lf.KindDecl):
            continue
        fam = beta_normalize(d.fam)
        report = explain_strictness(fam)
        if not report:
            print(f"{d.name}: no binders")
            continue
        print(f"{d.name}:")
        for name, verdict, why in report:
            line = f"  {name}: {'strict' if verdict else 'not strict'}"
            if explain:
                line += f"  [{why}]"
            print(line)
    return 0


if __name__ == "__main__":
    sys.exit(main())
