"""Interventional validity verdicts, falsifiers and phenomenological validity.

A CBN is a valid model of a representation under an interpretation when
every intervention assigned to an action induces exactly the action's law.
:func:`check_validity` decides this over the finitely many listed actions
and returns every violating pair as a witness.

Two constructive falsifiers build an intervention set that falsifies a CBN
whenever some action behaves like a minimal, decomposable, multi-node or
imperfect intervention (:func:`construct_intS_falsifier`,
:func:`construct_intP_falsifier`).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .cbn import (
    Cbn,
    Dag,
    Intervention,
    classify_intervention,
    interventional_dist,
    is_compatible,
    is_markov,
    observational_dist,
    perfect_marginal_kernel,
)
from .dgp import Dgp, action_laws, link_intervention, prune_link_intervention
from .distributions import (
    DEFAULT_TOL,
    GaussianDist,
    Tolerances,
    ci_test,
    equal,
    mean_vector,
)
from .errors import NotAnInterventionError, PreconditionError
from .interpretations import interpret
from .kernels import conditional, kernel_compatible

VALID = "VALID"
FALSIFIED = "FALSIFIED"


def _num(x):
    """JSON friendly number: exact rationals become ``"p/q"`` strings."""
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else int(x)
    if isinstance(x, (np.floating, float)):
        return float(x)
    return x


@dataclass
class Witness:
    """An (action, intervention) pair whose laws differ.

    Attributes
    ----------
    action : str
    intervention : Intervention or None
        None for the incompatibility witness.
    action_law, model_law : Distribution
    action_means, model_means : dict
        Per-variable means under both laws.
    max_mean_gap : float
        Largest absolute difference of means.
    max_cov_gap : float or None
        Gaussian only: largest absolute covariance difference.
    max_table_gap : Fraction or None
        Finite only: largest absolute probability difference.
    first_difference : tuple or None
        Finite only: ``(assignment, p_action, p_model)`` for the first entry
        that differs.
    flag : str
        ``"incompatible"`` for the observational mismatch witness.
    """

    action: str
    intervention: Intervention | None
    action_law: object
    model_law: object
    action_means: dict
    model_means: dict
    max_mean_gap: float
    max_cov_gap: float | None = None
    max_table_gap: Fraction | None = None
    first_difference: tuple | None = None
    flag: str = ""

    @classmethod
    def between(cls, action, intervention, action_law, model_law, flag=""):
        am, mm = mean_vector(action_law), mean_vector(model_law)
        gap = max(abs(am[v] - mm[v]) for v in am)
        w = cls(action, intervention, action_law, model_law, am, mm, gap, flag=flag)
        if isinstance(action_law, GaussianDist):
            w.max_cov_gap = float(np.max(np.abs(action_law.cov - model_law.cov)))
        else:
            keys = sorted(set(action_law.table) | set(model_law.table))
            diffs = [(k, action_law.table.get(k, 0), model_law.table.get(k, 0)) for k in keys]
            w.max_table_gap = max(abs(p - q) for _, p, q in diffs)
            for k, p, q in diffs:
                if p != q:
                    w.first_difference = (k, Fraction(p), Fraction(q))
                    break
        return w

    def to_dict(self):
        out = {
            "action": self.action,
            "intervention": self.intervention.name() if self.intervention is not None else None,
            "action_means": {k: _num(v) for k, v in self.action_means.items()},
            "model_means": {k: _num(v) for k, v in self.model_means.items()},
            "max_mean_gap": _num(self.max_mean_gap),
        }
        if self.max_cov_gap is not None:
            out["max_cov_gap"] = self.max_cov_gap
        if self.max_table_gap is not None:
            out["max_table_gap"] = _num(self.max_table_gap)
            k, p, q = self.first_difference
            out["first_difference"] = {"assignment": list(k), "action": _num(p), "model": _num(q)}
        if self.flag:
            out["flag"] = self.flag
        return out


@dataclass
class ValidityReport:
    """Verdict of :func:`check_validity`.

    ``pairs_checked`` counts the (action, intervention) pairs the
    interpretation evaluated.  The verdict covers the listed actions only.
    """

    verdict: str
    witnesses: list
    pairs_checked: int
    scope_note: str
    incompatible: bool = False
    interpretation: object = None

    @property
    def valid(self):
        return self.verdict == VALID

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "witnesses": [w.to_dict() for w in self.witnesses],
            "pairs_checked": self.pairs_checked,
            "scope_note": self.scope_note,
        }


def _scope(dgp, compared):
    return (
        f"verdict relative to the {len(dgp.actions)} listed actions "
        f"({compared} assigned pairs compared); unlisted actions are not covered"
    )


def check_validity(dgp: Dgp, h, c: Cbn, I, spec, tol: Tolerances = DEFAULT_TOL) -> ValidityReport:
    """Decide interventional validity of ``c`` for ``I`` under ``spec``."""
    I = list(I)
    laws = action_laws(dgp, h)
    obs = laws[dgp.observational]
    if not is_compatible(c, obs, tol):
        w = Witness.between(dgp.observational, None, obs, observational_dist(c), flag="incompatible")
        return ValidityReport(
            FALSIFIED, [w], 0, "CBN is not compatible with the observational law", incompatible=True
        )
    res = interpret(spec, dgp, h, c, I, tol, laws)
    model = {}
    witnesses = []
    compared = 0
    for a, d in res.pairs():
        j = res._d(d)
        if j not in model:
            model[j] = interventional_dist(c, d)
        compared += 1
        if not equal(laws[a], model[j], tol):
            witnesses.append(Witness.between(a, d, laws[a], model[j]))
    verdict = FALSIFIED if witnesses else VALID
    return ValidityReport(
        verdict, witnesses, len(res.actions) * len(I), _scope(dgp, compared), interpretation=res
    )


# ---------------------------------------------------------------------------
# constructive falsifiers
# ---------------------------------------------------------------------------


def construct_intP_falsifier(c: Cbn, d_star: Intervention, tol: Tolerances = DEFAULT_TOL):
    """Perfect intervention that falsifies ``c`` under Int_P.

    Consider an action whose law is that of the minimal, decomposable
    intervention ``d_star``, and suppose some targeted node is independent of
    its parents under that law while another targeted node is not.  The
    returned perfect intervention sets every targeted node independent of
    its parents, and every non-targeted non-source node independent of its
    parents, to its marginal under that law.  Int_P then assigns it to the
    action although the laws differ.

    Returns
    -------
    (list of Intervention, Distribution)
        The singleton intervention set and the action law ``L^{c; d_star}``.

    Raises
    ------
    PreconditionError
        If ``d_star`` is not minimal and decomposable, or no targeted node is
        independent of its parents, or every targeted node is.
    """
    cls = classify_intervention(c, d_star, tol)
    if not (cls.minimal and cls.decomposable):
        raise PreconditionError("d_star must be minimal and decomposable")
    law = interventional_dist(c, d_star)
    indep = {}
    for v in c.vars:
        pa = c.parents_of(v)
        indep[v] = (not pa) or ci_test(law, [v], list(pa), [], tol)
    targeted = [v for v in c.vars if v in d_star.targets]
    j_bar = [v for v in targeted if indep[v]]
    if not j_bar or len(j_bar) == len(targeted):
        raise PreconditionError(
            "need one targeted node independent of its parents and one that depends on them"
        )
    extra = [v for v in c.vars if v not in d_star.targets and c.parents_of(v) and indep[v]]
    chosen = set(j_bar) | set(extra)
    targets = {v: perfect_marginal_kernel(c, law, v) for v in c.vars if v in chosen}
    label = "do(" + ", ".join(f"{v}<-marginal" for v in targets) + ")"
    d = c.intervention(targets, label, tol)
    return [d], law


def construct_intS_falsifier(c: Cbn, d_star: Intervention, node: str | None = None,
                             tol: Tolerances = DEFAULT_TOL):
    """Single-node restriction of ``d_star`` that falsifies ``c`` under Int_S.

    Parameters
    ----------
    node : str, optional
        Targeted node to keep; defaults to the one with the lowest index.

    Raises
    ------
    PreconditionError
        If ``d_star`` is single-node, not minimal or not decomposable.
    """
    cls = classify_intervention(c, d_star, tol)
    if cls.single_node:
        raise PreconditionError("d_star must target at least two nodes")
    if not (cls.minimal and cls.decomposable):
        raise PreconditionError("d_star must be minimal and decomposable")
    if node is None:
        node = min(d_star.targets, key=c.index)
    if node not in d_star.targets:
        raise PreconditionError(f"{node} is not targeted by d_star")
    d = c.intervention({node: d_star.targets[node]}, f"do({node}<-q_{node})", tol)
    return [d]


def construct_intM_falsifier(c: Cbn, law, label=None, tol: Tolerances = DEFAULT_TOL):
    """All-node intervention assigned by Int_M to a non-Markov action law.

    Every kernel is the conditional of ``law`` given the node's parents, so
    Int_M includes it, while its law is Markov and therefore differs.
    """
    if is_markov(law, c.dag, c.vars, tol):
        raise PreconditionError("the action law is Markov with respect to the graph")
    d = link_intervention(c, law, label or "do(all <- action conditionals)", tol)
    c.validate(d, tol)
    return [d]


@dataclass
class FalsifierResult:
    """Outcome of :func:`find_falsifier`."""

    found: bool
    method: str
    message: str
    action: str | None = None
    interventions: list = field(default_factory=list)
    report: ValidityReport | None = None


def find_falsifier(dgp: Dgp, h, c: Cbn, spec, tol: Tolerances = DEFAULT_TOL) -> FalsifierResult:
    """Search for an intervention set falsifying ``c`` under ``spec``.

    The constructive falsifiers are tried first, action by action, on the
    pruned intervention that reproduces each action's law.  Otherwise each
    such intervention and each of its valid restrictions is tried as a
    singleton set.
    """
    laws = action_laws(dgp, h)
    if not is_compatible(c, laws[dgp.observational], tol):
        rep = check_validity(dgp, h, c, [], spec, tol)
        return FalsifierResult(True, "incompatible", "CBN is incompatible with the observational law",
                               dgp.observational, [], rep)
    links = {}
    for a in dgp.interventional_actions:
        law = laws[a]
        if equal(law, laws[dgp.observational], tol):
            continue
        if not is_markov(law, c.dag, c.vars, tol):
            if spec.kind == "M":
                I = construct_intM_falsifier(c, law, tol=tol)
                rep = check_validity(dgp, h, c, I, spec, tol)
                return FalsifierResult(True, "constructive", f"non-Markov law of action {a}", a, I, rep)
            continue
        links[a] = prune_link_intervention(c, link_intervention(c, law, a, tol), tol)

    for a, d in links.items():
        try:
            if spec.kind == "S":
                I = construct_intS_falsifier(c, d, tol=tol)
            elif spec.kind == "P":
                I, _ = construct_intP_falsifier(c, d, tol)
            else:
                break
        except (PreconditionError, NotAnInterventionError):
            continue
        rep = check_validity(dgp, h, c, I, spec, tol)
        if not rep.valid:
            return FalsifierResult(True, "constructive", f"constructed from action {a}", a, I, rep)

    candidates = []
    for d in links.values():
        nodes = list(d.targets)
        for r in range(1, len(nodes) + 1):
            for subset in itertools.combinations(nodes, r):
                sub = d.restrict(subset)
                try:
                    c.validate(sub, tol)
                except NotAnInterventionError:
                    continue
                if not any(sub == b for b in candidates):
                    candidates.append(sub)
    for d in candidates:
        rep = check_validity(dgp, h, c, [d], spec, tol)
        if not rep.valid:
            return FalsifierResult(True, "search", "found by exhaustive search", rep.witnesses[0].action,
                                   [d], rep)
    if spec.kind == "P" and all(d.is_perfect for d in links.values()):
        msg = "no falsifier: every action acts as a perfect intervention, so the model is Int_P valid for every intervention set"
    elif spec.kind == "S" and all(len(d.targets) == 1 for d in links.values()):
        msg = "no falsifier: every action acts as a single-node intervention, so the model is Int_S valid for every intervention set"
    else:
        msg = f"no falsifier found among {len(candidates)} candidate interventions"
    return FalsifierResult(False, "none", msg)


# ---------------------------------------------------------------------------
# phenomenological validity
# ---------------------------------------------------------------------------


@dataclass
class PhenoReport:
    """Outcome of :func:`check_pheno_validity`.

    ``partition`` maps each node to the actions that change only that
    node's conditional; ``reason`` explains a negative verdict.
    """

    valid: bool
    markov: bool
    partition: dict
    reason: str = ""
    counterexample: tuple | None = None


def check_pheno_validity(dgp: Dgp, h, g: Dag, vars=None, tol: Tolerances = DEFAULT_TOL) -> PhenoReport:
    """Is ``g`` a phenomenologically valid causal graph for the representation?

    The observational law must be Markov with respect to ``g`` and the
    non-observational actions must split into nonempty groups, one per node,
    where each action changes exactly that node's conditional.  "Changes"
    means the action law's conditional is not compatible with the
    conditional extracted from the observational law (rows on
    zero-probability parent values of the latter are uniform).
    """
    laws = action_laws(dgp, h)
    obs = laws[dgp.observational]
    vars = tuple(vars) if vars is not None else tuple(obs.vars)
    parents = {v: [vars[p] for p in g.parents[j]] for j, v in enumerate(vars)}
    markov = is_markov(obs, g, vars, tol)
    partition = {v: [] for v in vars}
    if not markov:
        return PhenoReport(False, False, partition, "observational law is not Markov w.r.t. the graph")
    base = {v: conditional(obs, v, parents[v], tol=tol) for v in vars}
    for a in dgp.interventional_actions:
        changed = [v for v in vars if not kernel_compatible(laws[a], v, parents[v], base[v], tol)]
        if len(changed) != 1:
            return PhenoReport(
                False,
                True,
                partition,
                f"action {a} changes {len(changed)} conditionals ({', '.join(changed) or 'none'})",
                (a, tuple(changed)),
            )
        partition[changed[0]].append(a)
    empty = [v for v in vars if not partition[v]]
    if empty:
        return PhenoReport(False, True, partition, f"no action changes only {', '.join(empty)}")
    return PhenoReport(True, True, partition)
