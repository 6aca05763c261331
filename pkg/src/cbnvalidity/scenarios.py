"""Built-in worked examples and the scenario runner.

Each built-in scenario is a data file in ``scenario_data/`` written in the
format of :mod:`cbnvalidity.scenario_format`.  :func:`run_scenario`
evaluates every expectation of a scenario with one engine call and reports
actual against expected values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources

import numpy as np

from .abstraction import is_tau_abstraction, omega_tau, verify_exogenous_map
from .cbn import classify_intervention, interventional_dist, is_compatible, is_markov, observational_dist
from .dgp import action_laws, emulate
from .distributions import (
    DEFAULT_TOL,
    FiniteDist,
    Tolerances,
    conditional_cross_covariance,
    equal,
    expectation,
    marginal,
)
from .errors import AmbiguousInterventionError, CausalValidityError, ScenarioError
from .interpretations import check_desideratum, interpret
from .scenario_format import Scenario, _compile_kernel, _compile_law, _real, parse_scenario
from .validity import (
    check_pheno_validity,
    check_validity,
    construct_intP_falsifier,
    construct_intS_falsifier,
    find_falsifier,
)


def builtin_scenario_files() -> list:
    """Paths of the shipped scenario files, in file-name order."""
    root = resources.files("cbnvalidity") / "scenario_data"
    return sorted((p for p in root.iterdir() if p.name.endswith(".yaml")), key=lambda p: p.name)


def builtin_scenarios() -> list:
    """The shipped worked examples, compiled."""
    return [parse_scenario(p.read_text(encoding="utf-8"), p.name) for p in builtin_scenario_files()]


def find_builtin(ident: str) -> Scenario:
    """Built-in scenario with id ``ident``."""
    files = builtin_scenario_files()
    # files are named after their ids, so try the matching one before the rest
    files.sort(key=lambda p: not p.name.endswith(f"-{ident}.yaml"))
    for p in files:
        s = parse_scenario(p.read_text(encoding="utf-8"), p.name)
        if s.id == ident:
            return s
    raise ScenarioError(f"no built-in scenario named {ident!r}")


# ---------------------------------------------------------------------------
# outcomes
# ---------------------------------------------------------------------------


@dataclass
class ExpectationOutcome:
    """Result of evaluating one expectation."""

    index: int
    kind: str
    provenance: str
    passed: bool
    expected: object
    actual: object
    detail: str = ""

    def line(self) -> str:
        mark = "pass" if self.passed else "FAIL"
        text = f"[{mark}] #{self.index} {self.kind} ({self.provenance}): expected {self.expected!r}, got {self.actual!r}"
        return text + (f"; {self.detail}" if self.detail else "")


@dataclass
class ScenarioReport:
    """Per-expectation results of :func:`run_scenario`."""

    scenario: str
    outcomes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(o.passed for o in self.outcomes)

    @property
    def n_passed(self) -> int:
        return sum(o.passed for o in self.outcomes)

    def failures(self) -> list:
        return [o for o in self.outcomes if not o.passed]


# ---------------------------------------------------------------------------
# comparison helpers
# ---------------------------------------------------------------------------


def _same_number(actual, expected, tol: Tolerances) -> bool:
    if isinstance(actual, Fraction) and not isinstance(expected, float):
        try:
            return actual == Fraction(str(expected).strip())
        except (ValueError, ZeroDivisionError):
            return False
    a = float(actual)
    e = _real(expected, "expected value")
    if math.isinf(a) or math.isinf(e):
        return a == e
    return abs(a - e) <= tol.eq_tol * max(1.0, abs(e))


def _show(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    return x


# ---------------------------------------------------------------------------
# resolution
# ---------------------------------------------------------------------------


def _law(s: Scenario, ref):
    if "action" in ref:
        entry = s.dgp_entry(ref.get("dgp"))
        if ref["action"] not in entry.dgp.laws:
            raise ScenarioError(f"unknown action {ref['action']!r}")
        if ref.get("represented", True):
            return action_laws(entry.dgp, entry.representation)[ref["action"]]
        return entry.dgp.law(ref["action"])
    if "cbn" not in ref:
        raise ScenarioError("a law reference names an action or a cbn")
    c = s.cbns[ref["cbn"]]
    if "intervention" in ref:
        return interventional_dist(c, s.interventions[ref["intervention"]])
    return observational_dist(c)


def _context(s, e):
    entry = s.dgp_entry(e.get("dgp"))
    return entry.dgp, entry.representation


def _verdict(s, e, tol):
    dgp, h = _context(s, e)
    rep = check_validity(dgp, h, s.cbns[e["cbn"]], s.intervention_sets[e["interventions"]],
                         s.interpretations[e["interpretation"]], tol)
    ok = rep.verdict == e["expected"]
    detail = f"{len(rep.witnesses)} witnesses"
    if ok and "witness" in e:
        w_spec = e["witness"]
        d = s.interventions[w_spec["intervention"]]
        match = [w for w in rep.witnesses if w.action == w_spec["action"] and w.intervention == d]
        if not match:
            return False, rep.verdict, f"witness ({w_spec['action']}, {w_spec['intervention']}) not reported"
        w = match[0]
        for side, means in (("action", w_spec.get("action_means", {})), ("model", w_spec.get("model_means", {}))):
            got = w.action_means if side == "action" else w.model_means
            for var, val in means.items():
                if not _same_number(got[var], val, tol):
                    return False, rep.verdict, f"witness {side} mean of {var} is {_show(got[var])}, expected {val}"
        for side, probs in (("action", w_spec.get("action_probs", {})), ("model", w_spec.get("model_probs", {}))):
            law = w.action_law if side == "action" else w.model_law
            for event, val in probs.items():
                ev = dict(zip(*_event(event)))
                got = law.prob(ev)
                if not _same_number(got, val, tol):
                    return False, rep.verdict, f"witness {side} P({event}) is {got}, expected {val}"
        detail = f"witness {w.action} / {w.intervention.name()} found"
    return ok, rep.verdict, detail


def _event(text):
    names, values = [], []
    for part in str(text).split(","):
        k, v = part.split("=")
        names.append(k.strip())
        values.append(int(v))
    return names, values


def _membership(s, e, tol):
    dgp, h = _context(s, e)
    I = s.intervention_sets[e["interventions"]]
    res = interpret(s.interpretations[e["interpretation"]], dgp, h, s.cbns[e["cbn"]], I, tol)
    d = s.interventions[e["intervention"]]
    got = res.includes(e["action"], d)
    reason = res.first_failure(e["action"], d) or ""
    ok = got == e["expected"]
    if ok and "reason" in e and e["reason"] not in reason:
        return False, got, f"reason {reason!r} lacks {e['reason']!r}"
    return ok, got, reason


def _expectation(s, e, tol):
    law = _law(s, e["law"])
    val = expectation(law, dict(e["functional"]), e.get("constant", 0))
    return _same_number(val, e["expected"], tol), _show(val), ""


def _probability(s, e, tol):
    law = _law(s, e["law"])
    if not isinstance(law, FiniteDist):
        raise ScenarioError("probability expectations need a finite law")
    val = law.prob(dict(e["event"]))
    return _same_number(val, e["expected"], tol), _show(val), ""


def _law_equal(s, e, tol):
    law = _law(s, e["law"])
    expected = _compile_law(s, e["expected"], list(law.vars), "expected law")
    ok = equal(law, expected, tol)
    return ok, repr(law), ""


def _desideratum(s, e, tol):
    dgp, h = _context(s, e)
    family = [s.intervention_sets[f] for f in e["family"]]
    rep = check_desideratum(e["which"], s.interpretations[e["interpretation"]], dgp, h, s.cbns[e["cbn"]],
                            family, tol)
    return rep.verdict == e["expected"], rep.verdict, str(rep.witness or "")


def _classification(s, e, tol):
    got = classify_intervention(s.cbns[e["cbn"]], s.interventions[e["intervention"]], tol).describe()
    return got == e["expected"], got, ""


def _compatible(s, e, tol):
    dgp, h = _context(s, e)
    got = is_compatible(s.cbns[e["cbn"]], action_laws(dgp, h)[dgp.observational], tol)
    return got == e["expected"], got, ""


def _markov(s, e, tol):
    c = s.cbns[e["cbn"]]
    law = marginal(_law(s, e["law"]), c.vars)
    got = is_markov(law, c.dag, c.vars, tol)
    return got == e["expected"], got, ""


def _cross_covariance(s, e, tol):
    law = _law(s, e["law"])
    m = conditional_cross_covariance(law, list(e["x"]), list(e["y"]), list(e.get("given", [])), tol)
    got = float(np.max(np.abs(np.asarray(m, dtype=float))))
    return _same_number(got, e["expected"], tol), got, ""


def _link(s, e, tol):
    dgp, h = _context(s, e)
    em = emulate(dgp, h, e["order"], prune=True, tol=tol)
    if e["action"] in em.unlinkable:
        got = "unlinkable"
    else:
        d = em.link[e["action"]]
        got = sorted(d.targets, key=em.cbn.index)
    return got == e["expected"], got, ""


def _falsifier(s, e, tol):
    dgp, h = _context(s, e)
    c = s.cbns[e["cbn"]]
    spec = s.interpretations[e["interpretation"]]
    construction = e.get("construction")
    if construction == "S":
        I = construct_intS_falsifier(c, s.interventions[e["from"]], e.get("node"), tol)
    elif construction == "P":
        I, _ = construct_intP_falsifier(c, s.interventions[e["from"]], tol)
    elif construction is None:
        res = find_falsifier(dgp, h, c, spec, tol)
        I = res.interventions if res.found else None
    else:
        raise ScenarioError(f"unknown falsifier construction {construction!r}")
    exp = e["expected"]
    found = I is not None
    actual = {"found": found}
    if found:
        rep = check_validity(dgp, h, c, I, spec, tol)
        actual["verdict"] = rep.verdict
        actual["targets"] = [sorted(d.targets, key=c.index) for d in I]
    ok = found == exp.get("found", True)
    if ok and found:
        if "verdict" in exp:
            ok = actual["verdict"] == exp["verdict"]
        if ok and "targets" in exp:
            ok = actual["targets"][0] == list(exp["targets"])
        if ok and "kernels" in exp:
            for v, kspec in exp["kernels"].items():
                k = _compile_kernel(s, v, c.parents_of(v), kspec, f"expected kernel of {v}")
                if I[0].targets.get(v) != k:
                    return False, actual, f"kernel of {v} differs: {I[0].targets.get(v)!r}"
    return ok, actual, ""


def _pheno(s, e, tol):
    dgp, h = _context(s, e)
    c = s.cbns[e["cbn"]]
    rep = check_pheno_validity(dgp, h, c.dag, c.vars, tol)
    return rep.valid == e["expected"], rep.valid, rep.reason


def _tau_abstraction(s, e, tol):
    low, high, tau = s.scms[e["low"]], s.scms[e["high"]], s.tau_maps[e["tau"]]
    I_star = s.intervention_sets[e["interventions"]]
    res = is_tau_abstraction(low, I_star, high, tau)
    ok = res.holds == e["expected"]
    detail = res.reason
    if ok and "exogenous_map" in e:
        m = s.tau_maps[e["exogenous_map"]]
        tau_u = {u: tuple(m.apply(u)) for u in low.exogenous_settings()}
        if not verify_exogenous_map(low, I_star, high, tau, tau_u):
            return False, res.holds, f"{e['exogenous_map']} is not a valid exogenous map"
        detail = f"{e['exogenous_map']} verified as exogenous map"
    return ok, res.holds, detail


def _omega(s, e, tol):
    low, tau = s.scms[e["low"]], s.tau_maps[e["tau"]]
    high_domains = s.scms[e["high"]].endo_domains if "high" in e else None
    try:
        got = dict(omega_tau(tau, low, s.interventions[e["intervention"]], high_domains))
        shown = got if got else "empty"
    except AmbiguousInterventionError:
        shown = "undefined"
    exp = e["expected"]
    return (shown == exp if isinstance(exp, str) else shown == dict(exp)), shown, ""


RESOLVERS = {
    "verdict": _verdict,
    "membership": _membership,
    "expectation": _expectation,
    "probability": _probability,
    "law": _law_equal,
    "desideratum": _desideratum,
    "classification": _classification,
    "compatible": _compatible,
    "markov": _markov,
    "cross_covariance": _cross_covariance,
    "link": _link,
    "falsifier": _falsifier,
    "pheno": _pheno,
    "tau_abstraction": _tau_abstraction,
    "omega": _omega,
}


def run_scenario(s: Scenario, tol: Tolerances = DEFAULT_TOL) -> ScenarioReport:
    """Evaluate every expectation of ``s``.

    Engine errors while evaluating an expectation are reported as failures
    of that expectation rather than raised.
    """
    report = ScenarioReport(s.id)
    for i, e in enumerate(s.expectations, start=1):
        try:
            ok, actual, detail = RESOLVERS[e["kind"]](s, e, tol)
        except (CausalValidityError, KeyError, ValueError) as exc:
            ok, actual, detail = False, None, f"error: {exc}"
        report.outcomes.append(
            ExpectationOutcome(i, e["kind"], e["provenance"], bool(ok), _plain(e["expected"]), actual, detail)
        )
    return report


def _plain(x):
    if isinstance(x, dict):
        return {k: _plain(v) for k, v in x.items()}
    if isinstance(x, list):
        return [_plain(v) for v in x]
    return x
