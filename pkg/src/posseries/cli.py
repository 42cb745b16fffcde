"""Batch command-line front end.

Every subcommand writes one report (JSON by default, CSV of the row table
with ``--format csv``). Exit status: 0 on success, 2 for invalid input or a
violated precondition, 3 when a resource guard trips.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from . import classical_tests as ct
from . import density_limits as dl
from .acceptance import crossing_note, run_battery
from .density import (
    counting_profile,
    default_checkpoints,
    estimate_density_limit,
    harmonic_profile,
    tail_extreme_profile,
    weighted_counting_profile,
)
from .errors import LimitExceeded, ParseError, PreconditionViolated, SeriesError
from .parsing import canonical, parse_checkpoints, parse_floats, parse_int, parse_series, parse_set, _Parser
from .primes import build_table, chebyshev_scan, dusart_scan, prime_reciprocal_comparison
from .progressions import block_structure_check, count_3aps, find_eps_progression, longest_ap
from .reports import Report
from .series_core import MB, RunningSum, make_stream
from .tail_engine import crossing_threshold, euler_constant, sum_with_tail_bracket, terms_needed_for_tail

DEFAULT_LIMIT = 10**7


def _expr_rule(text: str):
    """Vectorised rule n -> value from an expression in n."""
    p = _Parser(text)
    node = p.finish(p.expr())
    return lambda n: np.broadcast_to(np.asarray(node.evaluate(np.asarray(n)), dtype=float), np.shape(n)).copy()


def _guard(args, N: int, what: str):
    if N > args.limit:
        raise LimitExceeded(f"{what} = {N} exceeds --limit {args.limit}")


def _checkpoints(args, to: int | None = None) -> list[int]:
    if args.checkpoints:
        cps = parse_checkpoints(args.checkpoints)
    else:
        cps = default_checkpoints(100, to or 10**6)
    _guard(args, cps[-1], "largest checkpoint")
    return cps


def _epsilons(args) -> list[float]:
    eps = parse_floats(args.eps) if args.eps else list(dl.DEFAULT_EPSILONS)
    if any(e <= 0 for e in eps):
        raise ParseError("epsilons must be positive", args.eps, 0)
    return eps


# -- subcommands -----------------------------------------------------------------


def cmd_sum(args, rep: Report):
    spec = parse_series(args.series)
    rep.inputs["series"] = canonical(spec)
    if isinstance(spec, MB):
        if spec.convergent:
            N = parse_int(args.direct)
            _guard(args, N, "--direct")
            b = sum_with_tail_bracket(spec, N)
            rep.results["bracket"] = {"lower": b.lower, "upper": b.upper, "width": b.width, "direct_terms": b.direct_terms, "method": b.method}
            rep.add_critical("bracket.lower", b.lower)
            rep.add_critical("bracket.upper", b.upper)
            rep.rows += [{"quantity": "lower", "value": b.lower}, {"quantity": "upper", "value": b.upper}]
            if args.tail is not None:
                est = terms_needed_for_tail(spec, args.tail)
                rep.results["terms_needed"] = {
                    "tau": args.tail,
                    "value": str(est.value),
                    "low": str(est.low),
                    "high": str(est.high),
                    "log10": est.value.log10,
                    "notes": est.notes,
                }
                rep.add_critical("terms_needed.log10", est.value.log10)
                rep.rows.append({"quantity": "terms_needed_log10", "value": est.value.log10})
        else:
            T = args.crossing if args.crossing is not None else 10.0
            est = crossing_threshold(spec, T)
            rep.results["crossing"] = {
                "threshold": T,
                "value": str(est.value),
                "low": str(est.low),
                "high": str(est.high),
                "top_width": est.top_width,
                "exact": est.exact,
                "notes": est.notes,
            }
            rep.add_critical("crossing.low.top", est.low.top)
            rep.add_critical("crossing.high.top", est.high.top)
            rep.rows.append({"quantity": "crossing", "value": str(est.value)})
            if (spec.k, spec.s, T) == (2, 1.0, 10.0):
                rep.notes.append(crossing_note(est))
        if args.euler is not None:
            N = parse_int(args.euler)
            _guard(args, N, "--euler")
            e = euler_constant(spec.k, spec.s, N)
            rep.results["euler_constant"] = {"gamma_f": e.gamma_f, "residual_bound": e.residual_bound, "method": e.method, "in_range": e.in_range}
            rep.add_critical("gamma_f", e.gamma_f)
        return
    cps = _checkpoints(args)
    stream = make_stream(spec)
    acc = RunningSum()
    for N in cps:
        _, vals = stream.upto(N)
        rep.rows.append({"checkpoint": N, "partial_sum": acc.add(vals)})
    rep.notes.append("no closed-form tail for this series; partial sums only")


TESTS = ("auto", "condensation", "mb", "olivier", "remark1")


def cmd_classify(args, rep: Report):
    spec = parse_series(args.series)
    rep.inputs.update(series=canonical(spec), test=args.test)
    cps = _checkpoints(args) if args.test in ("olivier", "remark1") else None
    if args.test == "auto":
        v = ct.classify_series(spec)
    elif args.test == "condensation":
        v = ct.condensation_classify(spec)
    elif args.test == "mb":
        if not isinstance(spec, MB):
            raise PreconditionViolated("the mb test needs an mb:k=..,s=.. series")
        v = ct.mb_classify(spec.k, spec.s)
    elif args.test == "olivier":
        v = ct.olivier_check(spec, cps)
    else:
        v = ct.remark1_check(spec, cps)
    rep.results["verdict"] = v.to_json()
    rep.rows = list(v.evidence)
    if "crossing" in v.support and isinstance(spec, MB) and (spec.k, spec.s) == (2, 1.0):
        rep.notes.append(crossing_note(crossing_threshold(spec, 10.0)))


def cmd_density(args, rep: Report):
    S = parse_set(args.set)
    to = parse_int(args.to)
    _guard(args, to, "--to")
    cps = _checkpoints(args, to)
    rep.inputs.update(set=S.name, notion=args.notion)
    if args.notion == "natural":
        prof = counting_profile(S, cps)
    elif args.notion == "harmonic":
        prof = harmonic_profile(S, cps)
    elif args.notion in ("lower-proxy", "upper-proxy"):
        prof = tail_extreme_profile(counting_profile(S, cps), args.notion.split("-")[0])
    else:
        if not args.phi:
            raise PreconditionViolated("--notion weight-phi needs --phi EXPR")
        prof = weighted_counting_profile(S, _expr_rule(args.phi), cps)
        rep.inputs["phi"] = args.phi
    rep.rows = [{"checkpoint": N, "value": v} for N, v in zip(prof.checkpoints, prof.values)]
    try:
        limit, _ = estimate_density_limit(prof)
    except PreconditionViolated as exc:
        limit = None
        rep.notes.append(f"no limit estimate: {exc}")
    rep.results.update(trend=prof.trend, limit_estimate=limit, template=prof.template)


DIAGNOSE_TESTS = ("density", "salat-toma", "stgen", "harmonic-density", "kvn-forward", "kvn-converse", "complex-abel", "floor-compare")


def cmd_diagnose(args, rep: Report):
    test = args.test
    rep.inputs["test"] = test
    spec = parse_series(args.series) if args.series else None
    if spec is not None:
        rep.inputs["series"] = canonical(spec)
    if test != "floor-compare" and spec is None:
        raise PreconditionViolated(f"{test} needs a series")
    eps = _epsilons(args)
    if test == "floor-compare":
        if not args.values:
            raise PreconditionViolated("floor-compare needs --values EXPR")
        H = parse_int(args.to)
        _guard(args, H, "--to")
        fc = ct.floor_compare(_expr_rule(args.values), H)
        out = fc.to_json()
        rep.rows = out.pop("rows")
        rep.results.update(out)
        return
    if test == "complex-abel":
        if not args.z:
            raise PreconditionViolated("complex-abel needs --z EXPR")
        H = parse_int(args.to)
        _guard(args, H, "--to")
        re_rule = _expr_rule(args.z)
        im_rule = _expr_rule(args.z_imag) if args.z_imag else (lambda n: np.zeros(np.shape(n)))
        m = ct.complex_abel_monitor(spec, lambda n: re_rule(n) + 1j * im_rule(n), H)
        out = m.to_json()
        rep.rows = out.pop("rows")
        rep.results.update(out)
        return
    cps = _checkpoints(args)
    if test in ("kvn-forward", "kvn-converse"):
        values = _expr_rule(args.values) if args.values else dl.series_values(spec, cps[-1], lambda n, a: a)
        if test == "kvn-forward":
            r = dl.kvn_forward_check(values, cps, eps)
        else:
            if args.bound is None:
                raise PreconditionViolated("kvn-converse needs --bound")
            r = dl.kvn_converse_check(values, args.bound, cps, eps)
            rep.results["diagnostic"] = r.diagnostic.verdict
            rep.notes += r.notes
        rep.rows = [vars(row) for row in r.rows]
        rep.results.update(all_hold=r.all_hold, cesaro_trend=r.cesaro_trend)
        return
    if test == "density":
        x = dl.series_values(spec, cps[-1])
        d = dl.d_lim_diagnostic(x, 0.0, eps, cps, args.mode)
        rep.rows = d.rows()
        rep.results.update(verdict=d.verdict, mode=d.mode, witness=d.witness, statuses=d.statuses)
        return
    if test == "salat-toma":
        v = ct.salat_toma_check(spec, cps, eps)
    elif test == "harmonic-density":
        v = ct.harmonic_density_check(spec, cps, eps)
    else:
        if not args.b:
            raise PreconditionViolated("stgen needs --b EXPR")
        v = ct.stgen_check(spec, _expr_rule(args.b), cps, eps)
    out = v.to_json()
    rep.rows = out.pop("evidence")
    rep.results["verdict"] = out


def cmd_primes(args, rep: Report):
    to = parse_int(args.to)
    k_max = parse_int(args.k_max)
    limit = max(to, 1_300_000 if k_max <= 10**5 else int(k_max * (np.log(k_max) + np.log(np.log(k_max))) + 10))
    _guard(args, limit, "sieve limit")
    table = build_table(limit)
    cps = _checkpoints(args, to)
    lo = min(20_000, to)
    window = chebyshev_scan(table, lo, to, cps)
    below = chebyshev_scan(table, 2, lo)
    dus = dusart_scan(table, k_max)
    rec = prime_reciprocal_comparison(table, cps)
    rep.inputs.update(to=to, k_max=k_max)
    rep.results["chebyshev"] = {
        "window": [lo, to],
        "violations_in_window": int(len(window.violations)),
        "violations_below_window": int(len(below.violations)),
        "largest_violation_below": below.largest_violation,
    }
    rep.results["dusart"] = {"k_range": [dus.k_min, dus.k_max], "violations": len(dus.violations)}
    rep.rows = [
        {"checkpoint": N, "pi": int(table.pi(N)), "chebyshev_ratio": r, "prime_recip_sum": p, "loglog_comparison": c}
        for N, r, p, c in zip(cps, window.ratios, rec.prime_sums, rec.comparison_sums)
    ]
    if cps:
        rep.add_critical("chebyshev_ratio.last", window.ratios[-1])


def _read_sequence(path: str) -> list[float]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            for cell in row:
                cell = cell.strip()
                if not cell:
                    continue
                try:
                    out.append(float(cell))
                except ValueError:
                    if out:
                        raise ParseError("expected a number", cell, 0) from None
    return out


def cmd_progressions(args, rep: Report):
    did = False
    if args.set:
        S = parse_set(args.set)
        to = parse_int(args.to)
        _guard(args, to, "--to")
        members = [int(v) for v in S.members(to)]
        rep.inputs.update(set=S.name, to=to)
        if args.longest_ap:
            w = longest_ap(members)
            rep.results["longest_ap"] = w.to_json() | {"elements": [members[i] for i in w.indices]}
            did = True
        if args.count_3ap:
            rep.results["count_3aps"] = count_3aps(members)
            did = True
    if args.eps_prog:
        seq = _read_sequence(args.eps_prog)
        eps = _epsilons(args)[0] if args.eps else 0.1
        w = find_eps_progression(seq, args.L, eps, args.mode)
        rep.inputs.update(file=Path(args.eps_prog).name, L=args.L, epsilon=eps, mode=args.mode)
        rep.results["eps_progression"] = None if w is None else w.to_json()
        did = True
    if args.blocks is not None:
        b = block_structure_check(args.blocks)
        rep.results["block_structure"] = b.to_json()
        did = True
    if not did:
        raise PreconditionViolated("nothing to do: give --set with --longest-ap/--count-3ap, --eps-prog FILE or --blocks N")


def cmd_report(args, rep: Report):
    crit = run_battery()
    rep.results["criteria"] = [c.to_json(timings=args.timings) for c in crit]
    rep.results["passed"] = sum(c.passed for c in crit)
    rep.results["total"] = len(crit)
    rep.rows = [{"number": c.number, "title": c.title, "passed": c.passed} for c in crit]
    for c in crit:
        rep.notes += c.notes
    for c in crit:
        print(c.line(), file=sys.stderr)


COMMANDS = {
    "sum": cmd_sum,
    "classify": cmd_classify,
    "density": cmd_density,
    "diagnose": cmd_diagnose,
    "primes": cmd_primes,
    "progressions": cmd_progressions,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--checkpoints", help="lo:hi[:per_decade] or a comma list, e.g. 1e2:1e6:3")
    common.add_argument("--eps", help="comma list of epsilons, e.g. 1,0.1,0.01")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--limit", type=parse_int, default=DEFAULT_LIMIT, help="largest index any computation may touch")

    p = argparse.ArgumentParser(prog="posseries", description="Positive series experiments")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sum", parents=[common], help="certified sums, tails and crossings")
    s.add_argument("series")
    s.add_argument("--direct", default="1e6", help="terms summed directly before the tail bracket")
    s.add_argument("--tail", type=float, help="also report the terms needed for a tail below TAU")
    s.add_argument("--crossing", type=float, help="threshold for divergent series (default 10)")
    s.add_argument("--euler", help="also estimate the generalized Euler constant from N terms")

    c = sub.add_parser("classify", parents=[common], help="convergence tests")
    c.add_argument("series")
    c.add_argument("--test", choices=TESTS, default="auto")

    d = sub.add_parser("density", parents=[common], help="density profiles of index sets")
    d.add_argument("--set", required=True)
    d.add_argument("--notion", choices=("natural", "harmonic", "lower-proxy", "upper-proxy", "weight-phi"), default="natural")
    d.add_argument("--phi", help="weight expression in n for --notion weight-phi")
    d.add_argument("--to", default="1e6")

    g = sub.add_parser("diagnose", parents=[common], help="density-limit diagnostics")
    g.add_argument("series", nargs="?")
    g.add_argument("--test", choices=DIAGNOSE_TESTS, default="density")
    g.add_argument("--mode", choices=dl.MODES, default="natural")
    g.add_argument("--b", help="b_n expression for stgen")
    g.add_argument("--values", help="value expression for kvn-* and floor-compare")
    g.add_argument("--bound", type=float, help="declared bound for kvn-converse")
    g.add_argument("--z", help="real part of z_n for complex-abel")
    g.add_argument("--z-imag", help="imaginary part of z_n for complex-abel")
    g.add_argument("--to", default="1e5", help="horizon for complex-abel and floor-compare")

    r = sub.add_parser("primes", parents=[common], help="Chebyshev, Dusart and reciprocal-sum checks")
    r.add_argument("--to", default="1e6")
    r.add_argument("--k-max", default="1e5")

    q = sub.add_parser("progressions", parents=[common], help="arithmetic and epsilon-progressions")
    q.add_argument("--set")
    q.add_argument("--to", default="100")
    q.add_argument("--longest-ap", action="store_true")
    q.add_argument("--count-3ap", action="store_true")
    q.add_argument("--eps-prog", metavar="FILE")
    q.add_argument("--L", type=int, default=10)
    q.add_argument("--mode", choices=("window", "subsequence"), default="window")
    q.add_argument("--blocks", type=int, metavar="N_MAX")

    b = sub.add_parser("report", parents=[common], help="run the full acceptance battery")
    b.add_argument("--timings", action="store_true", help="include wall-clock seconds (breaks byte-identical output)")
    return p


def run(argv: list[str] | None = None) -> tuple[int, str, Report, str | None]:
    args = build_parser().parse_args(argv)
    rep = Report(args.command)
    try:
        COMMANDS[args.command](args, rep)
    except SeriesError as exc:
        rep.fail(exc, exc.exit_code)
    except ValueError as exc:
        rep.fail(exc, 2)
    fmt_name = args.format if rep.exit_code == 0 else "json"
    text = rep.render(fmt_name)
    if args.out:
        Path(args.out).write_text(text)
    return rep.exit_code, text, rep, args.out


def main(argv: list[str] | None = None) -> int:
    code, text, rep, out = run(argv)
    for e in rep.errors:
        print(f"error: {e['type']}: {e['message']}", file=sys.stderr)
    if not out:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
