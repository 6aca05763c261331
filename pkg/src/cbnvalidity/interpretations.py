"""Interpretations of actions as interventions, and checks of desiderata D0-D4.

An interpretation receives an action and a set ``I`` of interventions in a
CBN and returns the subset of ``I`` the action counts as implementing.  The
available interpretations are

* :class:`IntC`: intervened and non-intervened kernels all match and the
  action law is Markov (membership then coincides with equality of laws);
* :class:`IntP`: perfect interventions whose non-intervened nodes are either
  unchanged sources or still depend on their parents;
* :class:`IntS`: intervened kernels match and differ from the observational
  ones, and the action law is Markov;
* :class:`IntM`: :class:`IntC` without the Markov condition;
* :class:`IntTildeIF`: :class:`IntC` membership, or the rank-least member of
  a reference set among the :class:`IntS` row;
* :class:`IntK`: the :class:`IntS` row restricted to actions of least
  complexity.

:class:`IntSTilde` (``IntS`` without its second condition) is a debugging
variant kept to reproduce a known counterexample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .cbn import Cbn, Intervention, interventional_dist, is_markov, observational_dist
from .dgp import Dgp, action_laws
from .distributions import DEFAULT_TOL, Tolerances, ci_test, equal, marginal
from .errors import PreconditionError
from .kernels import kernel_compatible


# ---------------------------------------------------------------------------
# specs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IntC:
    kind = "C"


@dataclass(frozen=True)
class IntP:
    kind = "P"


@dataclass(frozen=True)
class IntS:
    kind = "S"


@dataclass(frozen=True)
class IntM:
    kind = "M"


@dataclass(frozen=True)
class IntSTilde:
    """Debug variant of :class:`IntS` without the incompatibility condition."""

    kind = "S~"


@dataclass(frozen=True, eq=False)
class IntTildeIF:
    """Interpretation relative to a finite reference set with injective ranks.

    Parameters
    ----------
    tilde_set : sequence of Intervention
    ranks : sequence of int
        ``ranks[i]`` is the rank of ``tilde_set[i]``; lower ranks win.
    """

    tilde_set: tuple
    ranks: tuple

    kind = "TildeIF"

    def __post_init__(self):
        object.__setattr__(self, "tilde_set", tuple(self.tilde_set))
        object.__setattr__(self, "ranks", tuple(int(r) for r in self.ranks))
        if len(self.tilde_set) != len(self.ranks):
            raise ValueError("one rank per reference intervention is required")
        if len(set(self.ranks)) != len(self.ranks):
            raise ValueError("ranks must be injective on the reference set")
        for i, a in enumerate(self.tilde_set):
            if any(a == b for b in self.tilde_set[i + 1 :]):
                raise ValueError("reference set lists the same intervention twice")

    def rank(self, d):
        for t, r in zip(self.tilde_set, self.ranks):
            if t == d:
                return r
        return None


@dataclass(frozen=True, eq=False)
class IntK:
    """Complexity-minimizing interpretation.

    Parameters
    ----------
    complexity : mapping or callable, optional
        Measure to use; defaults to the DGP's own complexity.
    """

    complexity: object = None

    kind = "K"


INTERPRETATIONS = {"C": IntC, "P": IntP, "S": IntS, "M": IntM}


# ---------------------------------------------------------------------------
# results
# ---------------------------------------------------------------------------


@dataclass
class Condition:
    """One evaluated defining condition of an interpretation."""

    name: str
    passed: bool
    detail: str = ""


@dataclass
class InterpretationResult:
    """Membership matrix with per-entry reason traces.

    ``members[i][j]`` tells whether intervention ``interventions[j]`` is
    assigned to action ``actions[i]``; ``reasons[i][j]`` lists the
    evaluated conditions.
    """

    spec: object
    actions: list
    interventions: list
    members: list
    reasons: list
    warnings: list = field(default_factory=list)

    def _a(self, action):
        return self.actions.index(action)

    def _d(self, d):
        if isinstance(d, int):
            return d
        for j, b in enumerate(self.interventions):
            if b is d:
                return j
        for j, b in enumerate(self.interventions):
            if b == d:
                return j
        raise KeyError(f"{d!r} is not in the intervention set")

    def includes(self, action, d) -> bool:
        return self.members[self._a(action)][self._d(d)]

    def row(self, action) -> list:
        i = self._a(action)
        return [d for d, m in zip(self.interventions, self.members[i]) if m]

    def trace(self, action, d) -> list:
        return self.reasons[self._a(action)][self._d(d)]

    def first_failure(self, action, d) -> str | None:
        for cond in self.trace(action, d):
            if not cond.passed:
                return cond.detail or cond.name
        return None

    def pairs(self):
        """Iterate over included ``(action, intervention)`` pairs."""
        for i, a in enumerate(self.actions):
            for j, d in enumerate(self.interventions):
                if self.members[i][j]:
                    yield a, d


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


class _Facts:
    """Per-action quantities shared by all interventions."""

    def __init__(self, c: Cbn, law, obs_c, tol):
        self.law = law
        self.markov = is_markov(law, c.dag, c.vars, tol)
        self.obs_compat = {}
        self.source_same = {}
        self.dependent = {}
        for v in c.vars:
            pa = c.parents_of(v)
            self.obs_compat[v] = kernel_compatible(law, v, pa, c.kernel(v), tol)
            if pa:
                self.dependent[v] = not ci_test(law, [v], list(pa), [], tol)
            else:
                self.source_same[v] = equal(marginal(law, [v]), marginal(obs_c, [v]), tol)


def _intervened(c, facts, d, tol):
    bad = [
        v for v, k in d.targets.items() if not kernel_compatible(facts.law, v, c.parents_of(v), k, tol)
    ]
    return Condition(
        "intervened kernels compatible",
        not bad,
        f"intervened kernel mismatch at {', '.join(bad)}" if bad else "",
    )


def _non_intervened(c, facts, d):
    bad = [v for v in c.vars if v not in d.targets and not facts.obs_compat[v]]
    return Condition(
        "non-intervened kernels compatible",
        not bad,
        f"non-intervened kernel mismatch at {', '.join(bad)}" if bad else "",
    )


def _markov(facts):
    return Condition("Markov", facts.markov, "" if facts.markov else "action law not Markov w.r.t. the graph")


def _changed(facts, d):
    same = [v for v in d.targets if facts.obs_compat[v]]
    return Condition(
        "intervened kernels differ from observational",
        not same,
        f"intervened kernel compatible with the observational kernel at {', '.join(same)}" if same else "",
    )


def _p_condition3(c, facts, d):
    problems = []
    for v in c.vars:
        if v in d.targets:
            continue
        if v in facts.source_same:
            if not facts.source_same[v]:
                problems.append(f"source node marginal changed at {v}")
        elif not facts.dependent[v]:
            problems.append(f"{v} independent of its parents")
    return Condition(
        "non-intervened nodes unchanged sources or dependent on parents",
        not problems,
        "; ".join(problems),
    )


def _base_conditions(kind, c, facts, d, tol):
    if kind == "C":
        return [_intervened(c, facts, d, tol), _non_intervened(c, facts, d), _markov(facts)]
    if kind == "M":
        return [_intervened(c, facts, d, tol), _non_intervened(c, facts, d)]
    if kind == "P":
        perfect = d.is_perfect
        return [
            Condition("perfect", perfect, "" if perfect else "intervention not perfect"),
            _intervened(c, facts, d, tol),
            _p_condition3(c, facts, d),
            _markov(facts),
        ]
    if kind == "S":
        return [_intervened(c, facts, d, tol), _changed(facts, d), _markov(facts)]
    if kind == "S~":
        return [_intervened(c, facts, d, tol), _markov(facts)]
    raise ValueError(f"unknown interpretation kind {kind!r}")


def _matrix(kind, c, facts, actions, I, tol):
    reasons = [[_base_conditions(kind, c, facts[a], d, tol) for d in I] for a in actions]
    members = [[all(cd.passed for cd in r) for r in row] for row in reasons]
    return members, reasons


def interpret(spec, dgp: Dgp, h, c: Cbn, I: Sequence[Intervention], tol: Tolerances = DEFAULT_TOL,
              laws=None) -> InterpretationResult:
    """Evaluate ``spec`` on every (action, intervention) pair.

    Parameters
    ----------
    spec : IntC, IntP, IntS, IntM, IntTildeIF, IntK or IntSTilde
    dgp : Dgp
    h : representation map or None for the identity
    c : Cbn
        Should be compatible with the observational pushforward.
    I : sequence of Intervention
        Interventions valid in ``c``.
    laws : dict, optional
        Precomputed pushforward laws (as returned by :func:`action_laws`).
    """
    I = list(I)
    laws = action_laws(dgp, h) if laws is None else laws
    actions = dgp.actions
    obs_c = observational_dist(c)
    facts = {a: _Facts(c, laws[a], obs_c, tol) for a in actions}
    kind = spec.kind
    if kind in ("C", "P", "S", "M", "S~"):
        members, reasons = _matrix(kind, c, facts, actions, I, tol)
        return InterpretationResult(spec, actions, I, members, reasons)

    s_members, s_reasons = _matrix("S", c, facts, actions, I, tol)
    if kind == "TildeIF":
        c_members, c_reasons = _matrix("C", c, facts, actions, I, tol)
        members, reasons = [], []
        for i, a in enumerate(actions):
            mrow, rrow = [], []
            row_ranks = [
                spec.rank(b) if s_members[i][j] else None for j, b in enumerate(I)
            ]
            for j, d in enumerate(I):
                rank = spec.rank(d)
                least = (
                    rank is not None
                    and s_members[i][j]
                    and all(r is None or r >= rank for r in row_ranks)
                )
                if rank is None:
                    detail = "not in the reference set"
                elif not s_members[i][j]:
                    detail = "not in the Int_S row"
                elif not least:
                    detail = "a lower-ranked reference intervention is in the Int_S row"
                else:
                    detail = ""
                cm = c_members[i][j]
                trace = [
                    Condition("Int_C membership", cm, "" if cm else "not in the Int_C row"),
                    Condition("least reference intervention in the Int_S row", least, detail),
                ]
                mrow.append(cm or least)
                rrow.append(trace)
            members.append(mrow)
            reasons.append(rrow)
        return InterpretationResult(spec, actions, I, members, reasons)

    if kind == "K":
        measure = spec.complexity
        comp = {}
        for a in actions:
            try:
                comp[a] = dgp.complexity_of(a, measure)
            except PreconditionError as exc:
                raise PreconditionError(f"Int_K needs a complexity for every action: {exc}") from None
        warnings = []
        members, reasons = [], []
        best = []
        for j, d in enumerate(I):
            cands = [a for i, a in enumerate(actions) if s_members[i][j]]
            if not cands:
                best.append(None)
                continue
            low = min(comp[a] for a in cands)
            if low == math.inf:
                warnings.append(f"all candidate actions for {d.name()} have infinite complexity")
            best.append(low)
        for i, a in enumerate(actions):
            mrow, rrow = [], []
            for j, d in enumerate(I):
                in_s = s_members[i][j]
                minimal = in_s and comp[a] == best[j]
                trace = [
                    Condition("Int_S membership", in_s, "" if in_s else "not in the Int_S row"),
                    Condition(
                        "least complexity",
                        minimal,
                        "" if minimal or not in_s else f"complexity {comp[a]} exceeds the minimum {best[j]}",
                    ),
                ]
                mrow.append(in_s and minimal)
                rrow.append(trace)
            members.append(mrow)
            reasons.append(rrow)
        return InterpretationResult(spec, actions, I, members, reasons, warnings)
    raise ValueError(f"unknown interpretation kind {kind!r}")


# ---------------------------------------------------------------------------
# desiderata
# ---------------------------------------------------------------------------


@dataclass
class DesideratumReport:
    """Outcome of a desideratum check on concrete instances.

    ``holds`` is True when no violation was found among the checked
    instances; otherwise ``witness`` describes the first violation.
    """

    which: str
    holds: bool
    witness: dict | None
    checked: int

    @property
    def verdict(self):
        return "HOLDS" if self.holds else "VIOLATED"


def check_desideratum(which: str, spec, dgp: Dgp, h, c: Cbn, I_family, tol: Tolerances = DEFAULT_TOL):
    """Check one of ``"D0"`` ... ``"D4"`` over every set in ``I_family``."""
    I_family = [list(I) for I in I_family]
    if not I_family:
        raise PreconditionError("the intervention-set family is empty")
    laws = action_laws(dgp, h)
    results = [interpret(spec, dgp, h, c, I, tol, laws) for I in I_family]
    checked = 0
    cache = {}

    def law_of(d):
        for b, law in cache.values():
            if b == d:
                return law
        law = interventional_dist(c, d)
        cache[len(cache)] = (d, law)
        return law

    def fail(**w):
        return DesideratumReport(which, False, w, checked)

    if which == "D0":
        for k, res in enumerate(results):
            for a, d in res.pairs():
                checked += 1
                for v, q in d.targets.items():
                    if not kernel_compatible(laws[a], v, c.parents_of(v), q, tol):
                        return fail(action=a, intervention=d, set_index=k, node=v)
    elif which == "D1":
        for k, res in enumerate(results):
            for a in res.actions:
                for d in res.interventions:
                    checked += 1
                    if equal(laws[a], law_of(d), tol) and not res.includes(a, d):
                        return fail(action=a, intervention=d, set_index=k)
    elif which == "D2":
        for k, res in enumerate(results):
            for a in res.actions:
                row = res.row(a)
                for x in range(len(row)):
                    for y in range(x + 1, len(row)):
                        checked += 1
                        if not equal(law_of(row[x]), law_of(row[y]), tol):
                            return fail(action=a, intervention=row[x], other=row[y], set_index=k)
    elif which == "D3":
        for k1 in range(len(results)):
            for k2 in range(k1 + 1, len(results)):
                r1, r2 = results[k1], results[k2]
                for d in r1.interventions:
                    if not any(d == b for b in r2.interventions):
                        continue
                    for a in r1.actions:
                        checked += 1
                        if r1.includes(a, d) != r2.includes(a, d):
                            return fail(action=a, intervention=d, set_index=k1, other_set_index=k2)
    elif which == "D4":
        for k, res in enumerate(results):
            for a in res.actions:
                checked += 1
                if not is_markov(laws[a], c.dag, c.vars, tol) and res.row(a):
                    return fail(action=a, intervention=res.row(a)[0], set_index=k)
    else:
        raise ValueError(f"unknown desideratum {which!r}")
    return DesideratumReport(which, True, None, checked)
