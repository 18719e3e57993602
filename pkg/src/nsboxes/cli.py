"""Command-line entry point: ``nsboxes <command> [options]``.

Exit codes: 0 when every check passes, 2 for usage or domain errors, 3 when
the run completed and found violations or bound failures.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__, bits
from .attack import HashFn, best_attack, bound_holds, c_eps_bracket, default_jobs, scan_all_f
from .boxes import (
    BoxSystem,
    chsh_value,
    example_almost_backward,
    example_not_full_ns,
    load_system,
    local_deterministic_box,
    noisy_pr_box,
    pr_box,
    product_system,
)
from .constraints import check, constraints_for, family_list, implies
from .errors import DomainError

OK, USAGE, FOUND = 0, 2, 3
BUILTIN_SYSTEMS = ("product", "almost-backward-example", "not-full-ns-example", "pr", "noisy-pr")


def frac(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def parse_rational(text: str) -> Fraction:
    """``"1/10"``, ``"0.1"`` and ``"1e-1"`` all give exactly 1/10 (no binary float in between)."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not an exact rational: {text!r}") from None


def make_system(name: str, eps: Fraction, n: int) -> BoxSystem:
    if name == "product":
        return product_system(eps, n)
    if name == "almost-backward-example":
        return example_almost_backward()
    if name == "not-full-ns-example":
        return example_not_full_ns()
    if name == "pr":
        return pr_box()
    if name == "noisy-pr":
        return noisy_pr_box(eps)
    path = Path(name)
    if not path.exists():
        raise DomainError(f"unknown system {name!r}: not one of {', '.join(BUILTIN_SYSTEMS)} and no such file")
    return load_system(path)


def _bits_arg(text: str | None, n: int) -> int:
    if text is None:
        return 0
    try:
        return bits.to_int(text, n)
    except (ValueError, DomainError) as exc:
        raise DomainError(f"bad input string {text!r} for n={n}: {exc}") from None


def _header(args, command: str) -> dict:
    config = {k: (frac(v) if isinstance(v, Fraction) else v) for k, v in sorted(vars(args).items())
              if k not in ("func", "out", "jobs", "command")}
    return {"tool": "nsboxes", "version": __version__, "command": command, "config": config}


def _families(text: str) -> list:
    return family_list(text)


# commands ------------------------------------------------------------------

def cmd_check(args) -> tuple[dict, int]:
    system = make_system(args.system, args.eps, args.n)
    kinds = _families(args.family)
    report = check(system, constraints_for(kinds, system.n))
    out = _header(args, "check")
    out["n"] = system.n
    out["result"] = report.to_json()
    out["summary"] = {"ok": report.ok}
    return out, OK if report.ok else FOUND


def _attack_report(args, f: HashFn) -> tuple[dict, bool]:
    P = product_system(args.eps, args.n)
    u, v = _bits_arg(args.u, args.n), _bits_arg(args.v, args.n)
    outcome = best_attack(P, f, u, v, _families(args.family))
    holds = bound_holds(outcome.d, args.eps)
    lo, hi = c_eps_bracket(args.eps)
    body = {
        "f_hex": f.hex,
        "input_pair": [bits.to_str(u, args.n), bits.to_str(v, args.n)],
        "strategy": outcome.strategy,
        "d": frac(outcome.d),
        "trivial_d": frac(outcome.trivial_d),
        "construction_d": None if outcome.construction_d is None else frac(outcome.construction_d),
        "valid": outcome.valid,
        "reason": outcome.reason,
        "bound_holds": holds,
        "c_eps_bracket": [frac(lo), frac(hi)],
    }
    if outcome.c_table is not None and args.n <= 2:
        n = args.n
        body["c_table"] = {
            ",".join(bits.to_str(t, n) for t in key): frac(c) for key, c in sorted(outcome.c_table.items())
        }
        body["pz0"] = outcome.pz0.to_json()
    return body, holds


def cmd_attack(args) -> tuple[dict, int]:
    f = HashFn.parse(args.f, args.n)
    body, holds = _attack_report(args, f)
    out = _header(args, "attack")
    out["result"] = body
    if args.lp:
        from .lp import optimal_attack

        P = product_system(args.eps, args.n)
        best = optimal_attack(P, f, _bits_arg(args.u, args.n), _bits_arg(args.v, args.n), _families(args.family),
                              force=args.force)
        out["lp"] = {"d_opt": frac(best.d), "b0": frac(best.b0), "verified": best.solution.verify(best.program)}
    out["summary"] = {"bound_holds": holds}
    return out, OK if holds else FOUND


def cmd_scan(args) -> tuple[dict | str, int]:
    result = scan_all_f(args.eps, args.n, _bits_arg(args.u, args.n), _bits_arg(args.v, args.n),
                        _families(args.family), all_inputs=args.all_inputs, force=args.force, jobs=args.jobs)
    code = OK if result.all_hold else FOUND
    n = args.n
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        head = ["f_hex", "strategy", "d_num", "d_den", "bound_holds"]
        writer.writerow(head + (["u", "v"] if args.all_inputs else []))
        for r in result.rows:
            row = [r.f.hex, r.strategy, r.d.numerator, r.d.denominator, str(r.bound_holds).lower()]
            if args.all_inputs:
                row += [bits.to_str(r.input_pair[0], n), bits.to_str(r.input_pair[1], n)]
            writer.writerow(row)
        return buf.getvalue(), code
    out = _header(args, "scan")
    out["rows"] = [
        {
            "f_hex": r.f.hex,
            "input_pair": [bits.to_str(r.input_pair[0], n), bits.to_str(r.input_pair[1], n)],
            "strategy": r.strategy,
            "d": frac(r.d),
            "bound_holds": r.bound_holds,
            "reason": r.reason,
        }
        for r in result.rows
    ]
    low = result.min_row
    out["summary"] = {
        "rows": len(result.rows),
        "min_d": frac(low.d),
        "min_f_hex": low.f.hex,
        "max_d": frac(max(r.d for r in result.rows)),
        "all_bounds_hold": result.all_hold,
    }
    if args.all_inputs:
        per_pair: dict[str, Fraction] = {}
        for r in result.rows:
            key = ",".join(bits.to_str(t, n) for t in r.input_pair)
            per_pair[key] = min(per_pair.get(key, r.d), r.d)
        out["summary"]["min_d_per_input_pair"] = {k: frac(v) for k, v in per_pair.items()}
    return out, code


def cmd_implication(args) -> tuple[dict, int]:
    a = constraints_for(_families(args.source), args.n)
    b = constraints_for(_families(args.target), args.n)
    res = implies(a, b, args.n)
    out = _header(args, "implication")
    body = {"holds": res.holds, "premises": len(a), "targets": len(res.targets)}
    if res.holds:
        body["certificates_verified"] = all(res.verify(k, expand=args.expand) for k in range(len(res.targets)))
        body["verification"] = "expanded" if args.expand else "structural"
        shown = []
        for k in range(min(args.show, len(res.targets))):
            lam = res.certificate(k)
            shown.append({
                "target": res.targets[k].label,
                "combination": [{"row": res.rows[j].label, "coefficient": frac(Fraction(c))}
                                for j, c in sorted(lam.items())],
            })
        body["certificates"] = shown
    else:
        body["witness"] = res.witness.label
    out["result"] = body
    ok = res.holds and body.get("certificates_verified", True)
    return out, OK if ok else FOUND


def cmd_verify_lemmas(args) -> tuple[dict, int]:
    from .lemmas import run_suite

    results = run_suite(args.eps, args.n)
    out = _header(args, "verify-lemmas")
    out["lemmas"] = [
        {"name": r.name, "checked": r.checked, "failures": r.failures, "example": r.example} for r in results
    ]
    ok = all(r.ok for r in results)
    out["summary"] = {"all_pass": ok}
    return out, OK if ok else FOUND


def cmd_lp(args) -> tuple[dict, int]:
    from .lp import attack_program, export_lp, optimal_attack, sweep_p

    f = HashFn.parse(args.f, args.n)
    P = product_system(args.eps, args.n)
    u, v = _bits_arg(args.u, args.n), _bits_arg(args.v, args.n)
    fam = _families(args.family)
    best = optimal_attack(P, f, u, v, fam, args.p, force=args.force)
    construction = best_attack(P, f, u, v, fam)
    out = _header(args, "lp")
    verified = best.solution.verify(best.program)
    out["result"] = {
        "f_hex": f.hex,
        "d_opt": frac(best.d),
        "b0": frac(best.b0),
        "sense": best.program.sense,
        "pivots": best.solution.pivots,
        "verified": verified,
        "attack_d": frac(construction.d),
        "attack_strategy": construction.strategy,
        "bound_holds": bound_holds(best.d, args.eps),
    }
    if args.p_grid:
        grid = [parse_rational(t) for t in args.p_grid.split(",") if t]
        out["p_sweep"] = [{"p": frac(p), "d_opt": frac(d)} for p, d in sweep_p(P, f, grid, u, v, fam, force=args.force)]
    if args.export:
        Path(args.export).write_text(export_lp(attack_program(P, f, u, v, fam, args.p, "max")))
        out["exported"] = args.export
    return out, OK if verified else FOUND


def cmd_chsh(args) -> tuple[dict, int]:
    out = _header(args, "chsh")
    if args.local_max:
        values = [chsh_value(local_deterministic_box((a0, a1), (b0, b1)))
                  for a0 in (0, 1) for a1 in (0, 1) for b0 in (0, 1) for b1 in (0, 1)]
        out["result"] = {"strategies": len(values), "max": frac(max(values))}
    else:
        out["result"] = {"chsh": frac(chsh_value(make_system(args.system, args.eps, 1)))}
    return out, OK


# parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nsboxes", description="Exact experiments on non-signalling box systems.")
    parser.add_argument("--version", action="version", version=f"nsboxes {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, eps="1/10", n=True, out=True):
        p.add_argument("--eps", type=parse_rational, default=parse_rational(eps), help="noise, e.g. 1/10 or 0.1")
        if n:
            p.add_argument("--n", type=int, default=1, help="number of box pairs")
        if out:
            p.add_argument("--out", help="write the report here instead of stdout")

    def hashed(p):
        p.add_argument("--f", default="identity", help="hex truth table or identity/xor/and/const0/const1")
        p.add_argument("--u", help="Alice's input bits (default all zeros)")
        p.add_argument("--v", help="Bob's input bits (default all zeros)")
        p.add_argument("--family", default="pairwise-box,ab", help="comma-separated constraint families")

    p = sub.add_parser("check", help="check a system against a constraint family")
    p.add_argument("--system", default="product", help=f"{', '.join(BUILTIN_SYSTEMS)} or a JSON file")
    p.add_argument("--family", default="full")
    common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("attack", help="run the partition attack for one hash")
    common(p)
    hashed(p)
    p.add_argument("--lp", action="store_true", help="also solve the optimal single-element LP")
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("scan", help="run the attack for every one-bit hash")
    common(p)
    hashed(p)
    p.add_argument("--all-inputs", action="store_true", help="evaluate every input pair, not just (u, v)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--jobs", type=int, default=None, help="worker processes (default: $NSBOXES_JOBS or 1)")
    p.add_argument("--force", action="store_true", help="allow n above the cap")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("implication", help="decide whether one family implies another")
    p.add_argument("--from", dest="source", required=True)
    p.add_argument("--to", dest="target", required=True)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--expand", action="store_true", help="verify every certificate in fully expanded form")
    p.add_argument("--show", type=int, default=0, help="print this many certificates")
    p.add_argument("--out")
    p.set_defaults(func=cmd_implication)

    p = sub.add_parser("verify-lemmas", help="exhaustively check the row-symmetry identities")
    common(p)
    p.set_defaults(func=cmd_verify_lemmas)

    p = sub.add_parser("lp", help="optimal single-element attack by exact simplex")
    common(p)
    hashed(p)
    p.add_argument("--p", type=parse_rational, default=Fraction(1, 2), help="weight of the optimized element")
    p.add_argument("--p-grid", help="comma-separated weights to sweep (reported only)")
    p.add_argument("--export", help="write the LP in CPLEX LP format")
    p.add_argument("--force", action="store_true", help="allow n above the cap")
    p.set_defaults(func=cmd_lp)

    p = sub.add_parser("chsh", help="CHSH value of an n=1 system")
    p.add_argument("--system", default="noisy-pr")
    p.add_argument("--local-max", action="store_true", help="maximum over deterministic local strategies")
    common(p, n=False)
    p.set_defaults(func=cmd_chsh)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "jobs", 0) is None:
        args.jobs = default_jobs()
    try:
        report, code = args.func(args)
    except DomainError as exc:
        print(f"nsboxes {args.command}: error: {exc}", file=sys.stderr)
        return USAGE
    text = report if isinstance(report, str) else json.dumps(report, indent=2) + "\n"
    if getattr(args, "out", None):
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
