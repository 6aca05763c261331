"""Data-generating processes, representations and emulation by CBNs.

A :class:`Dgp` lists finitely many actions, one of which is the
observational regime, each with a distribution over low-level variables.
Pushing those laws through a representation map gives the laws of the
modeled variables (:func:`action_laws`).  A CBN emulates the process when a
link assigns each non-observational action an intervention reproducing its
law; :func:`emulate` builds one such CBN along a chosen variable order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .cbn import (
    Cbn,
    Intervention,
    complete_cbn_from_dist,
    interventional_dist,
    node_conditionals,
    observational_dist,
)
from .distributions import (
    DEFAULT_TOL,
    FiniteDist,
    Tolerances,
    entropy,
    equal,
    expectation,
    pushforward,
)
from .errors import NotAnInterventionError, PreconditionError, VariableMismatchError
from .kernels import kernel_compatible
from .maps import IdentityMap

OBSERVATIONAL = "O"


# ---------------------------------------------------------------------------
# complexity measures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReverseEntropy:
    """``K(a) = 1 / H(L^a(var))``; a point mass has complexity ``+inf``."""

    var: str

    def __call__(self, law) -> float:
        h = entropy(law, self.var)
        return math.inf if h == 0 else 1.0 / h

    def describe(self):
        return f"reverse-entropy({self.var})"


@dataclass(frozen=True)
class ExpectedCost:
    """``K(a) = E^a[cost(var)]`` for a per-value cost table."""

    var: str
    costs: Mapping

    def __call__(self, law):
        if not isinstance(law, FiniteDist):
            raise PreconditionError("expected-cost complexity needs a finite law")
        i = law.index(self.var)
        total = 0
        for key, p in law.table.items():
            if key[i] not in self.costs:
                raise PreconditionError(f"no cost given for {self.var}={key[i]}")
            total += p * self.costs[key[i]]
        return total

    def describe(self):
        return f"expected-cost({self.var})"


@dataclass(frozen=True)
class AffineExpectation:
    """``K(a) = constant + sum_v coeffs[v] * E^a[v]``."""

    coeffs: Mapping
    constant: float = 0

    def __call__(self, law):
        return expectation(law, dict(self.coeffs), self.constant)

    def describe(self):
        return "affine-expectation"


# ---------------------------------------------------------------------------
# the process
# ---------------------------------------------------------------------------


class Dgp:
    """Finite data-generating process.

    Parameters
    ----------
    laws : mapping
        Action label to its distribution over the low-level variables.  The
        insertion order fixes the action order used in reports.
    observational : str
        Label of the observational regime.
    complexity : mapping or callable, optional
        Either a table ``label -> value`` or a function of the action's law
        (see :class:`ReverseEntropy`, :class:`ExpectedCost`).
    """

    def __init__(self, laws: Mapping, observational: str = OBSERVATIONAL, complexity=None):
        if observational not in laws:
            raise PreconditionError(f"observational action {observational!r} has no law")
        laws = dict(laws)
        first = next(iter(laws.values()))
        for label, law in laws.items():
            if type(law) is not type(first) or tuple(law.vars) != tuple(first.vars):
                raise VariableMismatchError(
                    f"law of action {label!r} differs in family or variables from the others"
                )
        self.laws = laws
        self.observational = observational
        self.complexity = complexity

    @property
    def actions(self):
        return list(self.laws)

    @property
    def interventional_actions(self):
        return [a for a in self.laws if a != self.observational]

    @property
    def vars(self):
        return tuple(self.laws[self.observational].vars)

    @property
    def family(self):
        return self.laws[self.observational].family

    def law(self, action):
        return self.laws[action]

    def complexity_of(self, action, measure=None):
        """Complexity of ``action`` under ``measure`` (default: the DGP's own)."""
        measure = self.complexity if measure is None else measure
        if measure is None:
            raise PreconditionError("no complexity measure is available")
        if callable(measure):
            return measure(self.laws[action])
        if action not in measure:
            raise PreconditionError(f"action {action!r} has no complexity value")
        return measure[action]

    def __repr__(self):
        return f"Dgp(actions={self.actions}, vars={self.vars})"


def action_laws(dgp: Dgp, h=None) -> dict:
    """Pushforward of every action law through the representation ``h``."""
    if h is None or isinstance(h, IdentityMap) and tuple(h.vars) == dgp.vars:
        return dict(dgp.laws)
    return {a: pushforward(law, h) for a, law in dgp.laws.items()}


class Link(dict):
    """Mapping from non-observational action labels to interventions."""

    def interventions(self):
        out = []
        for d in self.values():
            if d not in out:
                out.append(d)
        return out


def build_dgp_from_cbn(
    c: Cbn,
    interventions: Sequence[Intervention],
    labels: Sequence[str] | None = None,
    observational: str = OBSERVATIONAL,
    complexity=None,
    tol: Tolerances = DEFAULT_TOL,
):
    """The process emulated by ``c`` with one action per intervention.

    Returns
    -------
    (Dgp, Link)
    """
    interventions = list(interventions)
    labels = list(labels) if labels is not None else [d.name() for d in interventions]
    if len(labels) != len(interventions):
        raise ValueError("one label per intervention is required")
    if len(set(labels) | {observational}) != len(labels) + 1:
        raise ValueError("action labels must be distinct and differ from the observational label")
    laws = {observational: observational_dist(c)}
    link = Link()
    for label, d in zip(labels, interventions):
        laws[label] = c.validate(d, tol)
        link[label] = d
    return Dgp(laws, observational, complexity), link


@dataclass
class Emulation:
    """Result of :func:`emulate`.

    Attributes
    ----------
    cbn : Cbn
        Complete-DAG CBN compatible with the observational pushforward.
    link : Link
        Linked intervention per linkable action (all-node, or pruned).
    unlinkable : list of str
        Actions whose pushforward equals the observational one.
    """

    cbn: Cbn
    link: Link
    unlinkable: list = field(default_factory=list)


def link_intervention(c: Cbn, law, label=None, tol: Tolerances = DEFAULT_TOL) -> Intervention:
    """All-node intervention of ``c`` whose kernels are the conditionals of ``law``.

    When ``law`` is Markov with respect to ``c``'s DAG the induced law equals
    ``law``.  Finite rows at parent values of probability zero are copied
    from ``c``'s kernels.
    """
    return Intervention(node_conditionals(c, law, tol=tol), label)


def emulate(dgp: Dgp, h=None, order: Sequence[str] | None = None, prune: bool = False,
            tol: Tolerances = DEFAULT_TOL) -> Emulation:
    """Emulate the representation of ``dgp`` with a complete CBN along ``order``."""
    laws = action_laws(dgp, h)
    obs = laws[dgp.observational]
    order = tuple(order) if order is not None else tuple(obs.vars)
    c = complete_cbn_from_dist(obs, order, tol)
    link = Link()
    unlinkable = []
    for a in dgp.interventional_actions:
        if equal(laws[a], obs, tol):
            unlinkable.append(a)
            continue
        d = link_intervention(c, laws[a], a, tol)
        if not equal(interventional_dist(c, d), laws[a], tol):
            raise PreconditionError(f"emulation failed to reproduce the law of action {a!r}")
        link[a] = prune_link_intervention(c, d, tol) if prune else d
    return Emulation(c, link, unlinkable)


def prune_link_intervention(c: Cbn, d: Intervention, tol: Tolerances = DEFAULT_TOL) -> Intervention:
    """Drop targets whose replacement is a version of the observational kernel.

    The dropped kernels are versions of the conditionals of the induced law,
    so keeping the observational kernel there leaves the law unchanged.

    Raises
    ------
    NotAnInterventionError
        If every target can be dropped (``d`` does not change the law).
    """
    law = interventional_dist(c, d)
    keep = [
        v for v in d.targets if not kernel_compatible(law, v, c.parents_of(v), c.kernel(v), tol)
    ]
    if not keep:
        raise NotAnInterventionError(f"{d.name()} induces the observational distribution")
    if len(keep) == len(d.targets):
        return d
    pruned = Intervention({v: d.targets[v] for v in keep}, d.label)
    if not equal(interventional_dist(c, pruned), law, tol):
        raise PreconditionError("pruning changed the induced law")
    return pruned
