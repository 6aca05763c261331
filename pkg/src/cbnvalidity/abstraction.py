"""Finite structural causal models, τ-abstraction and validity experiments.

A :class:`FiniteScm` has finitely many exogenous settings and deterministic
mechanisms given as total tables.  :func:`omega_tau` maps a low-level hard
intervention to its high-level counterpart: the low-level settings
consistent with the intervention are pushed through τ, and the image must be
exactly the set of high-level settings consistent with one hard
intervention.  :func:`is_tau_abstraction` decides whether a high-level model
is a τ-abstraction of a low-level one for a family of interventions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .cbn import Cbn, Intervention
from .dgp import build_dgp_from_cbn
from .distributions import DEFAULT_TOL, FiniteDist, Tolerances, marginal
from .errors import AmbiguousInterventionError, PreconditionError, SearchBoundError, ShapeMismatchError
from .kernels import FiniteKernel, LinearGaussianKernel
from .validity import check_validity

DEFAULT_MAX_EXOGENOUS = 100_000


@dataclass(frozen=True)
class Mechanism:
    """Structural function ``v := f(exogenous parents, endogenous parents)``.

    ``table`` maps the tuple of exogenous values followed by endogenous
    parent values to the value of the node.
    """

    exo_parents: tuple
    endo_parents: tuple
    table: Mapping

    def __call__(self, exo_values, endo_values):
        return self.table[tuple(exo_values) + tuple(endo_values)]


class HardIntervention(dict):
    """Hard intervention ``do(V = v)`` as a mapping from variable to value."""

    def name(self):
        if not self:
            return "do()"
        return "do(" + ", ".join(f"{k}={v}" for k, v in self.items()) + ")"


class FiniteScm:
    """Deterministic SCM with finite exogenous and endogenous domains.

    Parameters
    ----------
    exogenous : mapping
        Exogenous variable name to its domain.
    endogenous : mapping
        Endogenous variable name to its domain (this order is the order of
        solution tuples).
    mechanisms : mapping
        Endogenous variable name to a :class:`Mechanism`.
    exo_law : FiniteDist, optional
        Law of the exogenous variables; uniform on the product by default.
    """

    def __init__(self, exogenous: Mapping, endogenous: Mapping, mechanisms: Mapping, exo_law=None):
        self.exogenous = tuple(exogenous)
        self.exo_domains = tuple(tuple(exogenous[u]) for u in self.exogenous)
        self.endogenous = tuple(endogenous)
        self.endo_domains = tuple(tuple(endogenous[v]) for v in self.endogenous)
        if set(mechanisms) != set(self.endogenous):
            raise ShapeMismatchError("one mechanism per endogenous variable is required")
        self.mechanisms = {v: mechanisms[v] for v in self.endogenous}
        for v, mech in self.mechanisms.items():
            doms = [self.exo_domains[self.exogenous.index(u)] for u in mech.exo_parents]
            doms += [self.endo_domains[self.endogenous.index(p)] for p in mech.endo_parents]
            for key in itertools.product(*doms):
                if key not in mech.table:
                    raise ShapeMismatchError(f"mechanism of {v} has no entry for {key}")
                if mech.table[key] not in self.endo_domains[self.endogenous.index(v)]:
                    raise ShapeMismatchError(f"mechanism of {v} leaves its domain at {key}")
        self.order = self._toposort()
        if exo_law is None:
            exo_law = FiniteDist.uniform(self.exogenous, self.exo_domains)
        if tuple(exo_law.vars) != self.exogenous:
            raise ShapeMismatchError("exogenous law must list the exogenous variables in order")
        self.exo_law = exo_law

    @classmethod
    def from_functions(cls, exogenous: Mapping, endogenous: Mapping, functions: Mapping, exo_law=None):
        """Tabulate mechanisms given as ``name -> (exo_parents, endo_parents, fn)``."""
        mechanisms = {}
        for v, (ex, en, fn) in functions.items():
            doms = [exogenous[u] for u in ex] + [endogenous[p] for p in en]
            table = {key: fn(*key) for key in itertools.product(*doms)}
            mechanisms[v] = Mechanism(tuple(ex), tuple(en), table)
        return cls(exogenous, endogenous, mechanisms, exo_law)

    def _toposort(self):
        done, order = set(), []
        pending = list(self.endogenous)
        while pending:
            progress = False
            for v in list(pending):
                if all(p in done for p in self.mechanisms[v].endo_parents):
                    order.append(v)
                    done.add(v)
                    pending.remove(v)
                    progress = True
            if not progress:
                raise ShapeMismatchError("structural dependencies contain a cycle")
        return tuple(order)

    def exogenous_settings(self):
        return list(itertools.product(*self.exo_domains))

    def endogenous_settings(self):
        return list(itertools.product(*self.endo_domains))


def scm_solve(m: FiniteScm, d: Mapping | None, u) -> tuple:
    """Unique solution of the (intervened) system for exogenous setting ``u``."""
    d = d or {}
    if isinstance(u, Mapping):
        u = tuple(u[name] for name in m.exogenous)
    u = tuple(u) if isinstance(u, (tuple, list)) else (u,)
    if len(u) != len(m.exogenous):
        raise ShapeMismatchError("exogenous setting has the wrong length")
    for v, x in d.items():
        if v not in m.endogenous:
            raise ShapeMismatchError(f"unknown endogenous variable {v}")
        if x not in m.endo_domains[m.endogenous.index(v)]:
            raise ShapeMismatchError(f"value {x} outside the domain of {v}")
    exo = dict(zip(m.exogenous, u))
    val = {}
    for v in m.order:
        if v in d:
            val[v] = d[v]
            continue
        mech = m.mechanisms[v]
        val[v] = mech([exo[e] for e in mech.exo_parents], [val[p] for p in mech.endo_parents])
    return tuple(val[v] for v in m.endogenous)


def _tau_apply(tau, values):
    return tuple(tau.apply(tuple(values)))


def omega_tau(tau, low: FiniteScm, d: Mapping, high_domains: Sequence | None = None) -> HardIntervention:
    """High-level hard intervention corresponding to ``d``.

    The low-level settings that agree with ``d`` are mapped through ``tau``.
    The image must equal the set of high-level settings that agree with
    some ``do(Y = y)``: the coordinates that are constant form ``Y`` and
    every other coordinate must range freely over its domain.

    Parameters
    ----------
    high_domains : sequence, optional
        Domains of the high-level variables; by default the image of
        ``tau`` on every low-level setting.

    Raises
    ------
    AmbiguousInterventionError
        If the image is not of that form.
    """
    outs = tuple(tau.outputs)
    if high_domains is None:
        images = {_tau_apply(tau, x) for x in low.endogenous_settings()}
        high_domains = [sorted({img[k] for img in images}) for k in range(len(outs))]
    high_domains = [tuple(dom) for dom in high_domains]
    fixed = {low.endogenous.index(v): x for v, x in d.items()}
    settings = [x for x in low.endogenous_settings() if all(x[i] == val for i, val in fixed.items())]
    image = {_tau_apply(tau, x) for x in settings}
    if not d:
        return HardIntervention()
    coords = [sorted({img[k] for img in image}) for k in range(len(outs))]
    result = HardIntervention()
    rectangle = 1
    for k, vals in enumerate(coords):
        if len(vals) == 1 and len(high_domains[k]) > 1:
            result[outs[k]] = vals[0]
            continue
        if set(vals) != set(high_domains[k]):
            raise AmbiguousInterventionError(
                f"{HardIntervention(d).name()} constrains {outs[k]} to {vals} without fixing it"
            )
        rectangle *= len(vals)
    if len(image) != rectangle:
        raise AmbiguousInterventionError(
            f"the image of {HardIntervention(d).name()} is not the set of settings of one hard intervention"
        )
    return result


@dataclass
class TauAbstractionResult:
    """Verdict of :func:`is_tau_abstraction`.

    ``tau_u`` maps each low-level exogenous setting to its high-level image
    when the verdict is positive; ``omega`` lists the mapped interventions.
    """

    holds: bool
    reason: str = ""
    tau_u: dict | None = None
    omega: list = field(default_factory=list)


def _max_matching(left, candidates):
    """Kuhn's augmenting-path bipartite matching; returns right -> left."""
    match = {}

    def augment(u, seen):
        for r in candidates[u]:
            if r in seen:
                continue
            seen.add(r)
            if r not in match or augment(match[r], seen):
                match[r] = u
                return True
        return False

    for u in left:
        augment(u, set())
    return match


def commuting_images(low, I_star, high, tau, omegas):
    """For each low exogenous setting, the high settings that commute with τ."""
    out = {}
    high_settings = high.exogenous_settings()
    for u in low.exogenous_settings():
        targets = [_tau_apply(tau, scm_solve(low, d, u)) for d in I_star]
        out[u] = [
            uh for uh in high_settings
            if all(scm_solve(high, w, uh) == t for w, t in zip(omegas, targets))
        ]
    return out


def verify_exogenous_map(low, I_star, high, tau, tau_u: Mapping) -> bool:
    """Check that a given ``tau_u`` is surjective and commutes with τ."""
    omegas = [omega_tau(tau, low, d, high.endo_domains) for d in I_star]
    if set(tau_u.values()) != set(high.exogenous_settings()):
        return False
    for u in low.exogenous_settings():
        for d, w in zip(I_star, omegas):
            if _tau_apply(tau, scm_solve(low, d, u)) != scm_solve(high, w, tau_u[u]):
                return False
    return True


def is_tau_abstraction(low: FiniteScm, I_star, high: FiniteScm, tau,
                       max_exogenous: int = DEFAULT_MAX_EXOGENOUS) -> TauAbstractionResult:
    """Decide whether ``(high, ω_τ(I_star))`` is a τ-abstraction of ``(low, I_star)``.

    Requires τ surjective onto the high-level domain product and a
    surjective exogenous map ``tau_u`` with
    ``τ(low^d(u)) = high^{ω_τ(d)}(tau_u(u))`` for all ``d`` and ``u``.
    For each ``u`` the admissible images are computed directly; a
    surjective choice among them is found by bipartite matching.

    Raises
    ------
    SearchBoundError
        If either exogenous domain product exceeds ``max_exogenous``.
    """
    n_low = 1
    for dom in low.exo_domains:
        n_low *= len(dom)
    n_high = 1
    for dom in high.exo_domains:
        n_high *= len(dom)
    if n_low > max_exogenous or n_high > max_exogenous:
        raise SearchBoundError(
            f"exogenous domains have {n_low} and {n_high} settings; the bound is {max_exogenous}"
        )
    if tuple(tau.outputs) != high.endogenous:
        raise ShapeMismatchError("τ outputs must be the high-level endogenous variables")
    image = {_tau_apply(tau, x) for x in low.endogenous_settings()}
    if image != set(high.endogenous_settings()):
        return TauAbstractionResult(False, "τ not surjective")
    I_star = [HardIntervention(d) for d in I_star]
    omegas = []
    for d in I_star:
        try:
            omegas.append(omega_tau(tau, low, d, high.endo_domains))
        except AmbiguousInterventionError as exc:
            return TauAbstractionResult(False, f"ω_τ undefined for {d.name()}: {exc}")
    cands = commuting_images(low, I_star, high, tau, omegas)
    for u, cs in cands.items():
        if not cs:
            return TauAbstractionResult(False, f"no high-level exogenous setting commutes for u={u}", omega=omegas)
    forced = all(len(cs) == 1 for cs in cands.values())
    if forced:
        tau_u = {u: cs[0] for u, cs in cands.items()}
    else:
        match = _max_matching(list(cands), cands)
        if len(match) < n_high:
            return TauAbstractionResult(False, "no surjective exogenous map exists", omega=omegas)
        tau_u = {u: cs[0] for u, cs in cands.items()}
        for uh, u in match.items():
            tau_u[u] = uh
    if set(tau_u.values()) != set(high.exogenous_settings()):
        return TauAbstractionResult(False, "no surjective exogenous map exists", omega=omegas)
    return TauAbstractionResult(True, "", tau_u, omegas)


# ---------------------------------------------------------------------------
# SCM -> CBN and validity experiments
# ---------------------------------------------------------------------------


def scm_to_cbn(m: FiniteScm) -> Cbn:
    """CBN over the endogenous variables obtained by marginalizing the noise.

    Requires independent exogenous variables, each feeding at most one
    mechanism.
    """
    users = {}
    for v, mech in m.mechanisms.items():
        for u in mech.exo_parents:
            if u in users:
                raise PreconditionError(f"exogenous {u} feeds both {users[u]} and {v}")
            users[u] = v
    margins = [marginal(m.exo_law, [u]) for u in m.exogenous]
    if FiniteDist.product(*margins) != m.exo_law:
        raise PreconditionError("exogenous variables must be independent")
    kernels, edges = {}, []
    for v, mech in m.mechanisms.items():
        dom = m.endo_domains[m.endogenous.index(v)]
        pdoms = [m.endo_domains[m.endogenous.index(p)] for p in mech.endo_parents]
        exo_law = marginal(m.exo_law, list(mech.exo_parents)) if mech.exo_parents else None
        rows = {}
        for pa in itertools.product(*pdoms):
            row = {x: Fraction(0) for x in dom}
            if exo_law is None:
                row[mech((), pa)] = Fraction(1)
            else:
                for e, p in exo_law.table.items():
                    row[mech(e, pa)] += p
            rows[pa] = row
        edges += [(p, v) for p in mech.endo_parents]
        kernels[v] = (mech.endo_parents, dom, pdoms, rows)
    # kernel rows must follow the CBN's parent order (increasing node index)
    idx = {v: i for i, v in enumerate(m.endogenous)}
    final = {}
    for v, (parents, dom, pdoms, rows) in kernels.items():
        perm = sorted(range(len(parents)), key=lambda i: idx[parents[i]])
        final[v] = FiniteKernel(
            dom,
            [pdoms[i] for i in perm],
            {tuple(pa[i] for i in perm): row for pa, row in rows.items()},
        )
    return Cbn.from_edges(m.endogenous, edges, final)


def hard_to_intervention(c: Cbn, d: Mapping, label=None) -> Intervention:
    """Point-mass kernels for a hard intervention on ``c``."""
    targets = {}
    for v, x in d.items():
        k = c.kernel(v)
        if isinstance(k, FiniteKernel):
            targets[v] = FiniteKernel.point(k.domain, x, k.parent_domains)
        else:
            targets[v] = LinearGaussianKernel.point(x, k.n_parents)
    return Intervention(targets, label or HardIntervention(d).name())


@dataclass
class AbstractionExperiment:
    """Paired validity reports for a low-level model and its abstraction."""

    low: object
    high: object
    dgp: object
    link: object


def abstraction_validity_experiment(low, I_star, tau, high: Cbn, spec, I, tol: Tolerances = DEFAULT_TOL,
                                    I_low=None) -> AbstractionExperiment:
    """Validity of a low-level model and of a high-level model over ``tau``.

    The process is the one emulated by ``low`` (a :class:`FiniteScm` or a
    :class:`Cbn`) with the interventions ``I_star``.  The low-level model is
    checked on ``I_low`` (default ``I_star``) with the identity
    representation; ``high`` is checked on ``I`` over the representation
    ``tau``.
    """
    if isinstance(low, FiniteScm):
        low_cbn = scm_to_cbn(low)
    else:
        low_cbn = low
    I_star = [d if isinstance(d, Intervention) else hard_to_intervention(low_cbn, d) for d in I_star]
    dgp, link = build_dgp_from_cbn(low_cbn, I_star, [d.name() for d in I_star], tol=tol)
    low_I = I_star if I_low is None else [
        d if isinstance(d, Intervention) else hard_to_intervention(low_cbn, d) for d in I_low
    ]
    low_report = check_validity(dgp, None, low_cbn, low_I, spec, tol)
    high_report = check_validity(dgp, tau, high, I, spec, tol)
    return AbstractionExperiment(low_report, high_report, dgp, link)
