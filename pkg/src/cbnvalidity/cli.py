"""Command-line front end.

Every command reads one scenario file (or the id of a built-in scenario)
and calls one engine operation.  Reports go to standard output, either as a
text table or as JSON (``--format json``); diagnostics go to standard error.

Exit status: 0 for a VALID verdict or plain success, 1 for a FALSIFIED
verdict (or a negative answer, see each command), 2 for any error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .abstraction import is_tau_abstraction, verify_exogenous_map
from .cbn import classify_intervention
from .dgp import emulate
from .distributions import Tolerances
from .errors import CausalValidityError
from .kernels import describe_kernel
from .scenario_format import load_scenario
from .scenarios import builtin_scenarios, find_builtin, run_scenario
from .validity import VALID, check_validity, find_falsifier
from .interpretations import interpret

EXIT_OK = 0
EXIT_FALSIFIED = 1
EXIT_ERROR = 2

PROFILE_ENV = "CBNVALIDITY_TOL_PROFILE"
PROFILES = {
    "default": Tolerances(),
    "strict": Tolerances(eq_tol=1e-12, rank_tol=1e-14, ci_tol=1e-12),
    "loose": Tolerances(eq_tol=1e-6, rank_tol=1e-10, ci_tol=1e-6),
}


class CliError(Exception):
    """Usage error reported with exit status 2."""


# ---------------------------------------------------------------------------
# shared helpers
# ---------------------------------------------------------------------------


def tolerances_from_args(args) -> Tolerances:
    """Profile from ``--profile`` or the environment, then per-field overrides."""
    name = args.profile or os.environ.get(PROFILE_ENV) or "default"
    if name not in PROFILES:
        raise CliError(f"unknown tolerance profile {name!r}; choose from {', '.join(PROFILES)}")
    base = PROFILES[name]
    try:
        return Tolerances(
            eq_tol=args.eq_tol if args.eq_tol is not None else base.eq_tol,
            rank_tol=args.rank_tol if args.rank_tol is not None else base.rank_tol,
            ci_tol=args.ci_tol if args.ci_tol is not None else base.ci_tol,
        )
    except ValueError as exc:
        raise CliError(str(exc)) from None


def open_scenario(ref: str):
    """Load a scenario from a path, or a built-in scenario by id."""
    if Path(ref).exists():
        return load_scenario(ref)
    try:
        return find_builtin(ref)
    except CausalValidityError:
        raise CliError(f"{ref!r} is neither a readable file nor a built-in scenario id") from None


def _lookup(table, ident, what):
    if ident not in table:
        known = ", ".join(map(str, table)) or "none"
        raise CliError(f"unknown {what} id {ident!r} (known: {known})")
    return table[ident]


def _entry(s, ident):
    if ident is None and len(s.dgps) != 1:
        raise CliError(f"scenario {s.id} has several processes; pass --dgp ({', '.join(s.dgps)})")
    return s.dgps[ident] if ident is not None else next(iter(s.dgps.values()))


def _emit(args, payload: dict, text: str):
    if args.format == "json":
        print(json.dumps(payload, indent=2, sort_keys=False))
    else:
        print(text)


def _fmt(x):
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_validate(args, tol):
    s = open_scenario(args.file)
    entry = _entry(s, args.dgp)
    c = _lookup(s.cbns, args.cbn, "cbn")
    spec = _lookup(s.interpretations, args.interpretation, "interpretation")
    I = _lookup(s.intervention_sets, args.interventions, "intervention set")
    rep = check_validity(entry.dgp, entry.representation, c, I, spec, tol)
    lines = [
        f"scenario {s.id}: cbn {args.cbn}, interpretation {args.interpretation}, interventions {args.interventions}",
        f"verdict: {rep.verdict}",
        f"pairs checked: {rep.pairs_checked}",
        f"scope: {rep.scope_note}",
    ]
    if rep.witnesses:
        lines.append("witnesses:")
        lines.append(f"  {'action':<16} {'intervention':<28} {'max mean gap':>12}  means (action vs model)")
        for w in rep.witnesses:
            d = w.intervention.name() if w.intervention is not None else "(observational)"
            means = ", ".join(
                f"{v}: {_fmt(w.action_means[v])} vs {_fmt(w.model_means[v])}"
                for v in w.action_means
                if w.action_means[v] != w.model_means[v]
            )
            lines.append(f"  {w.action:<16} {d:<28} {_fmt(w.max_mean_gap):>12}  {means}")
    _emit(args, rep.to_dict(), "\n".join(lines))
    return EXIT_OK if rep.verdict == VALID else EXIT_FALSIFIED


def cmd_interpret(args, tol):
    s = open_scenario(args.file)
    entry = _entry(s, args.dgp)
    c = _lookup(s.cbns, args.cbn, "cbn")
    spec = _lookup(s.interpretations, args.interpretation, "interpretation")
    I = _lookup(s.intervention_sets, args.interventions, "intervention set")
    if args.action not in entry.dgp.laws:
        raise CliError(f"unknown action id {args.action!r}")
    res = interpret(spec, entry.dgp, entry.representation, c, I, tol)
    rows = []
    lines = [f"action {args.action} under interpretation {args.interpretation}:"]
    members = res.row(args.action)
    lines.append("  assigned: " + (", ".join(d.name() for d in members) if members else "(none)"))
    for d in I:
        trace = res.trace(args.action, d)
        inc = res.includes(args.action, d)
        rows.append({
            "intervention": d.name(),
            "included": inc,
            "conditions": [{"name": t.name, "passed": t.passed, "detail": t.detail} for t in trace],
        })
        lines.append(f"  {d.name()}: {'included' if inc else 'excluded'}")
        for t in trace:
            mark = "ok  " if t.passed else "FAIL"
            lines.append(f"    [{mark}] {t.name}" + (f": {t.detail}" if t.detail else ""))
    for w in res.warnings:
        lines.append(f"  warning: {w}")
    payload = {"action": args.action, "assigned": [d.name() for d in members], "interventions": rows,
               "warnings": list(res.warnings)}
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK


def cmd_falsify(args, tol):
    s = open_scenario(args.file)
    entry = _entry(s, args.dgp)
    c = _lookup(s.cbns, args.cbn, "cbn")
    spec = _lookup(s.interpretations, args.interpretation, "interpretation")
    res = find_falsifier(entry.dgp, entry.representation, c, spec, tol)
    interventions = [
        {"name": d.name(), "kernels": [describe_kernel(k, v, c.parents_of(v)) for v, k in d.targets.items()]}
        for d in res.interventions
    ]
    payload = {"found": res.found, "method": res.method, "message": res.message, "action": res.action,
               "interventions": interventions,
               "report": res.report.to_dict() if res.report is not None else None}
    lines = [res.message]
    if res.found:
        lines.append(f"method: {res.method}; falsifying action: {res.action}")
        for item in interventions:
            lines.append(f"  I contains {item['name']}:")
            lines.extend(f"    {k}" for k in item["kernels"])
        if res.report is not None:
            lines.append(f"verdict on this set: {res.report.verdict}")
    _emit(args, payload, "\n".join(lines))
    return EXIT_FALSIFIED if res.found else EXIT_OK


def cmd_classify(args, tol):
    s = open_scenario(args.file)
    c = _lookup(s.cbns, args.cbn, "cbn")
    d = _lookup(s.interventions, args.intervention, "intervention")
    cls = classify_intervention(c, d, tol)
    payload = {"intervention": args.intervention, "class": cls.describe(), "perfect": cls.perfect,
               "single_node": cls.single_node, "minimal": cls.minimal, "decomposable": cls.decomposable}
    _emit(args, payload, cls.describe())
    return EXIT_OK


def cmd_emulate(args, tol):
    s = open_scenario(args.file)
    entry = _entry(s, args.dgp)
    order = [v.strip() for v in args.order.split(",")] if args.order else None
    em = emulate(entry.dgp, entry.representation, order, prune=args.prune, tol=tol)
    kernels = [describe_kernel(em.cbn.kernel(v), v, em.cbn.parents_of(v)) for v in (order or em.cbn.vars)]
    links = {
        a: [describe_kernel(k, v, em.cbn.parents_of(v)) for v, k in d.targets.items()]
        for a, d in em.link.items()
    }
    lines = ["emulating CBN kernels:"] + [f"  {k}" for k in kernels]
    lines.append("links:")
    for a, ks in links.items():
        lines.append(f"  {a}: do(" + "; ".join(ks) + ")")
    for a in em.unlinkable:
        lines.append(f"  {a}: observational law, no intervention")
    payload = {"kernels": kernels, "edges": [list(e) for e in em.cbn.edges()], "links": links,
               "unlinkable": list(em.unlinkable)}
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK


def cmd_abstraction_check(args, tol):
    s = open_scenario(args.file)
    low = _lookup(s.scms, args.low, "scm")
    high = _lookup(s.scms, args.high, "scm")
    tau = _lookup(s.tau_maps, args.tau, "tau map")
    I_star = _lookup(s.intervention_sets, args.interventions, "intervention set")
    res = is_tau_abstraction(low, I_star, high, tau)
    payload = {
        "holds": res.holds,
        "reason": res.reason,
        "omega": [dict(w) for w in res.omega],
        "tau_u": {",".join(map(str, u)): list(v) for u, v in (res.tau_u or {}).items()},
    }
    lines = [f"tau-abstraction: {'yes' if res.holds else 'no'}" + (f" ({res.reason})" if res.reason else "")]
    for d, w in zip(I_star, res.omega):
        lines.append(f"  omega({d.name()}) = {w.name() if w else 'empty intervention'}")
    if args.exogenous_map:
        m = _lookup(s.tau_maps, args.exogenous_map, "tau map")
        ok = verify_exogenous_map(low, I_star, high, tau, {u: tuple(m.apply(u)) for u in low.exogenous_settings()})
        payload["exogenous_map_verified"] = ok
        lines.append(f"  {args.exogenous_map} as exogenous map: {'verified' if ok else 'rejected'}")
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK if res.holds else EXIT_FALSIFIED


def cmd_scenarios(args, tol):
    if args.action == "list":
        items = [{"id": s.id, "title": s.title, "expectations": len(s.expectations), "file": s.source}
                 for s in builtin_scenarios()]
        _emit(args, {"scenarios": items},
              "\n".join(f"{i['id']:<26} {i['expectations']:>3} expectations  {i['title']}" for i in items))
        return EXIT_OK
    if args.files:
        scenarios = [open_scenario(f) for f in args.files]
    else:
        scenarios = builtin_scenarios()
    reports = [run_scenario(s, tol) for s in scenarios]
    passed = sum(r.passed for r in reports)
    lines = []
    for r in reports:
        lines.append(f"{'PASS' if r.passed else 'FAIL'} {r.scenario}: {r.n_passed}/{len(r.outcomes)} expectations")
        if args.verbose or not r.passed:
            lines.extend(f"  {o.line()}" for o in (r.outcomes if args.verbose else r.failures()))
    lines.append(f"{passed}/{len(reports)} passed")
    payload = {
        "passed": passed,
        "total": len(reports),
        "scenarios": [
            {"id": r.scenario, "passed": r.passed,
             "outcomes": [{"index": o.index, "kind": o.kind, "provenance": o.provenance, "passed": o.passed,
                           "expected": o.expected, "actual": _jsonable(o.actual), "detail": o.detail}
                          for o in r.outcomes]}
            for r in reports
        ],
    }
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK if passed == len(reports) else EXIT_FALSIFIED


def _jsonable(x):
    try:
        json.dumps(x)
        return x
    except TypeError:
        return str(x)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text", help="report format")
    common.add_argument("--profile", help=f"tolerance profile ({', '.join(PROFILES)}); default from ${PROFILE_ENV}")
    common.add_argument("--eq-tol", type=float, help="relative equality tolerance")
    common.add_argument("--rank-tol", type=float, help="pseudo-inverse rank tolerance")
    common.add_argument("--ci-tol", type=float, help="conditional independence tolerance")

    p = argparse.ArgumentParser(prog="cbnvalidity", description="Interventional validity of causal Bayesian networks.")
    sub = p.add_subparsers(dest="command", required=True)

    def with_file(name, help_text):
        sp = sub.add_parser(name, parents=[common], help=help_text)
        sp.add_argument("file", help="scenario file path or built-in scenario id")
        return sp

    sp = with_file("validate", "check interventional validity")
    sp.add_argument("--cbn", required=True)
    sp.add_argument("--interpretation", required=True)
    sp.add_argument("--interventions", required=True, help="intervention set id")
    sp.add_argument("--dgp")
    sp.set_defaults(func=cmd_validate)

    sp = with_file("interpret", "list the interventions an action is interpreted as")
    sp.add_argument("--action", required=True)
    sp.add_argument("--cbn", required=True)
    sp.add_argument("--interpretation", required=True)
    sp.add_argument("--interventions", required=True)
    sp.add_argument("--dgp")
    sp.set_defaults(func=cmd_interpret)

    sp = with_file("falsify", "search for a falsifying intervention set")
    sp.add_argument("--cbn", required=True)
    sp.add_argument("--interpretation", required=True)
    sp.add_argument("--dgp")
    sp.set_defaults(func=cmd_falsify)

    sp = with_file("classify", "classify an intervention")
    sp.add_argument("--cbn", required=True)
    sp.add_argument("--intervention", required=True)
    sp.set_defaults(func=cmd_classify)

    sp = with_file("emulate", "emulate the process with a complete CBN")
    sp.add_argument("--order", help="comma separated variable order")
    sp.add_argument("--prune", action="store_true", help="drop targets compatible with the observational kernel")
    sp.add_argument("--dgp")
    sp.set_defaults(func=cmd_emulate)

    sp = with_file("abstraction-check", "decide whether one SCM is a tau-abstraction of another")
    sp.add_argument("--low", required=True)
    sp.add_argument("--high", required=True)
    sp.add_argument("--tau", required=True)
    sp.add_argument("--interventions", required=True, help="set of hard interventions on the low SCM")
    sp.add_argument("--exogenous-map", help="tau map id to verify as the exogenous map")
    sp.set_defaults(func=cmd_abstraction_check)

    sp = sub.add_parser("scenarios", parents=[common], help="list or run scenarios")
    sp.add_argument("action", choices=("list", "run"))
    sp.add_argument("files", nargs="*", help="scenario files or ids (default: all built-in)")
    sp.add_argument("-v", "--verbose", action="store_true")
    sp.set_defaults(func=cmd_scenarios)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    try:
        tol = tolerances_from_args(args)
        return args.func(args, tol)
    except (CliError, CausalValidityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (ValueError, KeyError, TypeError, OSError) as exc:
        # Anything else is still an error, never a verdict: keep exit status 2.
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
