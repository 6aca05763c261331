"""Causal Bayesian networks: DAGs, kernels and interventional distributions.

A :class:`Cbn` is a DAG over named variables with one kernel per node.
Replacing the kernels of a nonempty set of nodes gives an
:class:`Intervention`; an intervention must change the observational
distribution, which :meth:`Cbn.intervention` verifies on registration.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .distributions import (
    DEFAULT_TOL,
    FiniteDist,
    GaussianDist,
    Tolerances,
    equal,
    marginal,
)
from .errors import (
    FamilyMismatchError,
    NotAnInterventionError,
    ShapeMismatchError,
    VariableMismatchError,
)
from .kernels import (
    FiniteKernel,
    LinearGaussianKernel,
    check_shape,
    conditional,
    describe_kernel,
    kernel_compatible,
)


class CycleError(ValueError):
    """Raised when an edge list contains a directed cycle."""


@dataclass(frozen=True)
class Dag:
    """Directed acyclic graph on nodes ``0..n-1``.

    Attributes
    ----------
    parents : tuple of tuples
        ``parents[j]`` lists the parents of node ``j`` in increasing order.
    """

    parents: tuple

    def __post_init__(self):
        parents = tuple(tuple(int(p) for p in ps) for ps in self.parents)
        n = len(parents)
        for j, ps in enumerate(parents):
            if len(set(ps)) != len(ps):
                raise ValueError(f"duplicate parents for node {j}")
            if any(p < 0 or p >= n or p == j for p in ps):
                raise ValueError(f"invalid parent index for node {j}: {ps}")
        object.__setattr__(self, "parents", parents)
        object.__setattr__(self, "_order", self._toposort())

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple]):
        parents = [set() for _ in range(n)]
        for a, b in edges:
            parents[b].add(a)
        return cls(tuple(tuple(sorted(ps)) for ps in parents))

    @classmethod
    def complete(cls, order: Sequence[int]):
        """Complete DAG in which every node points to all later nodes of ``order``."""
        n = len(order)
        parents = [()] * n
        for pos, j in enumerate(order):
            parents[j] = tuple(sorted(order[:pos]))
        return cls(tuple(parents))

    @classmethod
    def empty(cls, n: int):
        return cls(tuple(() for _ in range(n)))

    @property
    def n(self):
        return len(self.parents)

    @property
    def edges(self):
        return [(p, j) for j, ps in enumerate(self.parents) for p in ps]

    def _toposort(self):
        indeg = [len(ps) for ps in self.parents]
        children = [[] for _ in self.parents]
        for j, ps in enumerate(self.parents):
            for p in ps:
                children[p].append(j)
        ready = [j for j in range(self.n) if indeg[j] == 0]
        order = []
        while ready:
            j = ready.pop(0)
            order.append(j)
            for c in children[j]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    ready.append(c)
        if len(order) != self.n:
            raise CycleError("graph contains a directed cycle")
        return tuple(order)

    def topological_order(self):
        return self._order

    def is_complete(self):
        adjacent = {frozenset(e) for e in self.edges}
        return all(frozenset((i, j)) in adjacent for i, j in itertools.combinations(range(self.n), 2))


@dataclass(frozen=True, eq=False)
class Intervention:
    """Kernel replacement ``do(j <- q_j, j in J)``.

    Parameters
    ----------
    targets : mapping
        Variable name to replacement kernel.  Must be nonempty.
    label : str, optional
        Display name; ignored by equality.
    """

    targets: Mapping
    label: str | None = None

    def __post_init__(self):
        if not self.targets:
            raise ValueError("an intervention needs at least one target")
        object.__setattr__(self, "targets", dict(self.targets))

    @property
    def nodes(self):
        return tuple(self.targets)

    @property
    def is_perfect(self):
        return all(k.is_perfect for k in self.targets.values())

    def restrict(self, nodes: Iterable[str]) -> "Intervention":
        nodes = set(nodes)
        return Intervention({v: k for v, k in self.targets.items() if v in nodes})

    def __eq__(self, other):
        if not isinstance(other, Intervention):
            return NotImplemented
        return set(self.targets) == set(other.targets) and all(
            self.targets[v] == other.targets[v] for v in self.targets
        )

    __hash__ = None

    def name(self):
        if self.label:
            return self.label
        return "do(" + ", ".join(sorted(self.targets)) + ")"

    def __repr__(self):
        return f"Intervention({self.name()})"


@dataclass(frozen=True)
class InterventionClass:
    """Taxonomy of an intervention relative to its CBN."""

    perfect: bool
    single_node: bool
    minimal: bool
    decomposable: bool

    def describe(self) -> str:
        return ", ".join(
            [
                "single-node" if self.single_node else "multi-node",
                "minimal" if self.minimal else "non-minimal",
                "decomposable" if self.decomposable else "non-decomposable",
                "perfect" if self.perfect else "imperfect",
            ]
        )


class Cbn:
    """Causal Bayesian network over named variables.

    Parameters
    ----------
    vars : sequence of str
        Node names; node ``j`` of ``dag`` is ``vars[j]``.
    dag : Dag
    kernels : sequence or mapping
        One kernel per node, either positionally or keyed by name.  Kernel
        weights and rows follow the parent order of ``dag`` (increasing
        node index).
    """

    def __init__(self, vars: Sequence[str], dag: Dag, kernels):
        self.vars = tuple(vars)
        if len(set(self.vars)) != len(self.vars):
            raise VariableMismatchError("duplicate node names")
        if dag.n != len(self.vars):
            raise ShapeMismatchError("DAG size differs from the number of variables")
        if isinstance(kernels, Mapping):
            missing = set(self.vars) - set(kernels)
            if missing:
                raise ShapeMismatchError(f"missing kernels for {sorted(missing)}")
            kernels = [kernels[v] for v in self.vars]
        kernels = tuple(kernels)
        if len(kernels) != len(self.vars):
            raise ShapeMismatchError("one kernel per node is required")
        families = {k.family for k in kernels}
        if len(families) != 1:
            raise FamilyMismatchError("all kernels of a CBN must belong to one family")
        self.family = families.pop()
        self.dag = dag
        self.kernels = kernels
        for j, k in enumerate(kernels):
            check_shape(k, len(dag.parents[j]), self.family)
        if self.family == "finite":
            for j, k in enumerate(kernels):
                expected = tuple(kernels[p].domain for p in dag.parents[j])
                if k.parent_domains != expected:
                    raise ShapeMismatchError(
                        f"parent domains of {self.vars[j]}'s kernel do not match its parents"
                    )
        self._obs = None

    @classmethod
    def from_edges(cls, vars: Sequence[str], edges: Iterable[tuple], kernels):
        """Build from named edges ``(parent, child)``."""
        vars = tuple(vars)
        idx = {v: i for i, v in enumerate(vars)}
        try:
            dag = Dag.from_edges(len(vars), [(idx[a], idx[b]) for a, b in edges])
        except KeyError as exc:
            raise VariableMismatchError(f"edge mentions unknown node {exc.args[0]!r}") from None
        return cls(vars, dag, kernels)

    # -- structure -----------------------------------------------------------
    def index(self, var: str) -> int:
        try:
            return self.vars.index(var)
        except ValueError:
            raise VariableMismatchError(f"unknown node {var!r}; have {self.vars}") from None

    def parents_of(self, var: str) -> tuple:
        return tuple(self.vars[p] for p in self.dag.parents[self.index(var)])

    def kernel(self, var: str):
        return self.kernels[self.index(var)]

    def domain(self, var: str):
        return self.kernel(var).domain

    @property
    def domains(self):
        return tuple(k.domain for k in self.kernels)

    def edges(self):
        return [(self.vars[a], self.vars[b]) for a, b in self.dag.edges]

    def describe(self) -> str:
        return "\n".join(
            describe_kernel(k, v, self.parents_of(v)) for v, k in zip(self.vars, self.kernels)
        )

    # -- interventions -------------------------------------------------------
    def replace(self, targets: Mapping) -> "Cbn":
        """Return the CBN with the kernels of ``targets`` replaced."""
        kernels = list(self.kernels)
        for v, k in targets.items():
            j = self.index(v)
            check_shape(k, len(self.dag.parents[j]), self.family)
            if self.family == "finite":
                expected = tuple(self.kernels[p].domain for p in self.dag.parents[j])
                if k.parent_domains != expected:
                    raise ShapeMismatchError(f"replacement kernel for {v} has wrong parent domains")
            kernels[j] = k
        return Cbn(self.vars, self.dag, kernels)

    def intervention(self, targets: Mapping, label: str | None = None, tol: Tolerances = DEFAULT_TOL):
        """Create and register an intervention, checking it changes the law.

        Raises
        ------
        NotAnInterventionError
            If the replacement leaves the observational distribution unchanged.
        """
        d = Intervention(targets, label)
        self.validate(d, tol)
        return d

    def validate(self, d: Intervention, tol: Tolerances = DEFAULT_TOL):
        law = interventional_dist(self, d)
        if equal(law, observational_dist(self), tol):
            raise NotAnInterventionError(
                f"{d.name()} induces the observational distribution and is not an intervention"
            )
        return law


# ---------------------------------------------------------------------------
# distributions of a CBN
# ---------------------------------------------------------------------------


def _finite_joint(vars, dag, kernels) -> FiniteDist:
    order = dag.topological_order()
    partial = [({}, Fraction(1))]
    for j in order:
        k = kernels[j]
        ps = dag.parents[j]
        nxt = []
        for assign, p in partial:
            pa = tuple(assign[q] for q in ps)
            for v, q in zip(k.domain, k.rows[pa]):
                if q:
                    a = dict(assign)
                    a[j] = v
                    nxt.append((a, p * q))
        partial = nxt
    table = {}
    for assign, p in partial:
        key = tuple(assign[j] for j in range(len(vars)))
        table[key] = table.get(key, Fraction(0)) + p
    return FiniteDist(vars, [k.domain for k in kernels], table)


def _gaussian_joint(vars, dag, kernels) -> GaussianDist:
    n = len(vars)
    b = np.zeros((n, n))
    c = np.zeros(n)
    var = np.zeros(n)
    for j, k in enumerate(kernels):
        c[j] = k.intercept
        var[j] = k.variance
        for p, w in zip(dag.parents[j], k.weights):
            b[j, p] = w
    a = np.linalg.solve(np.eye(n) - b, np.eye(n))
    mean = a @ c
    cov = (a * var) @ a.T
    return GaussianDist(vars, mean, (cov + cov.T) / 2)


def _joint(vars, dag, kernels):
    if kernels[0].family == "finite":
        return _finite_joint(vars, dag, kernels)
    return _gaussian_joint(vars, dag, kernels)


def observational_dist(c: Cbn):
    """Joint distribution induced by the CBN's kernels."""
    if c._obs is None:
        c._obs = _joint(c.vars, c.dag, c.kernels)
    return c._obs


def interventional_dist(c: Cbn, d: Intervention):
    """Joint distribution after replacing the kernels named by ``d``."""
    return observational_dist(c.replace(d.targets))


def is_compatible(c: Cbn, d, tol: Tolerances = DEFAULT_TOL) -> bool:
    """Does the CBN's observational distribution equal ``d``?"""
    if tuple(d.vars) != c.vars:
        if set(d.vars) != set(c.vars):
            raise VariableMismatchError(f"variables differ: {d.vars} vs {c.vars}")
        d = marginal(d, c.vars)
    return equal(observational_dist(c), d, tol)


def is_markov(d, g: Dag, vars: Sequence[str] | None = None, tol: Tolerances = DEFAULT_TOL) -> bool:
    """Does ``d`` factorize according to ``g``?

    The conditional of every node given its parents is extracted from ``d``,
    the joint is rebuilt from these kernels and compared with ``d``.  Node
    ``j`` of ``g`` is ``vars[j]`` (``d.vars`` by default).
    """
    vars = tuple(vars) if vars is not None else tuple(d.vars)
    if g.n != len(vars) or set(vars) != set(d.vars):
        raise VariableMismatchError("graph nodes do not match the distribution's variables")
    if vars != tuple(d.vars):
        d = marginal(d, vars)
    kernels = [conditional(d, v, [vars[p] for p in g.parents[j]], tol=tol) for j, v in enumerate(vars)]
    return equal(_joint(vars, g, kernels), d, tol)


def complete_cbn_from_dist(d, order: Sequence[str], tol: Tolerances = DEFAULT_TOL) -> Cbn:
    """Complete-DAG CBN along ``order`` whose observational law is ``d``."""
    order = tuple(order)
    if sorted(order) != sorted(d.vars) or len(set(order)) != len(order):
        raise VariableMismatchError("order must be a permutation of the variables")
    vars = tuple(d.vars)
    idx = {v: i for i, v in enumerate(vars)}
    dag = Dag.complete([idx[v] for v in order])
    kernels = [
        conditional(d, v, [vars[p] for p in dag.parents[j]], tol=tol) for j, v in enumerate(vars)
    ]
    return Cbn(vars, dag, kernels)


def node_conditionals(c: Cbn, law, fallback_to_cbn: bool = True, tol: Tolerances = DEFAULT_TOL):
    """Conditionals of every node given its parents in ``c`` under ``law``.

    Finite rows at parent assignments of probability zero are copied from
    the CBN's own kernels when ``fallback_to_cbn`` is set.
    """
    out = {}
    for v, k in zip(c.vars, c.kernels):
        fb = k if (fallback_to_cbn and isinstance(k, FiniteKernel)) else None
        out[v] = conditional(law, v, c.parents_of(v), fallback=fb, tol=tol)
    return out


def classify_intervention(c: Cbn, d: Intervention, tol: Tolerances = DEFAULT_TOL) -> InterventionClass:
    """Perfect / single-node / minimal / decomposable status of ``d`` in ``c``.

    Minimality uses the per-node test: ``d`` is minimal iff, under its own
    interventional law, the conditional at every targeted node is not a
    version of that node's observational kernel.  Decomposability checks
    every nonempty restriction of ``d`` against the observational law.
    """
    law = interventional_dist(c, d)
    minimal = all(
        not kernel_compatible(law, v, c.parents_of(v), c.kernel(v), tol) for v in d.targets
    )
    obs = observational_dist(c)
    nodes = list(d.targets)
    decomposable = True
    for r in range(1, len(nodes) + 1):
        for subset in itertools.combinations(nodes, r):
            if equal(interventional_dist(c, d.restrict(subset)), obs, tol):
                decomposable = False
                break
        if not decomposable:
            break
    return InterventionClass(
        perfect=d.is_perfect,
        single_node=len(nodes) == 1,
        minimal=minimal,
        decomposable=decomposable,
    )


def perfect_marginal_kernel(c: Cbn, law, var: str):
    """Perfect kernel for ``var`` whose law is the marginal of ``var`` under ``law``."""
    n_par = len(c.dag.parents[c.index(var)])
    if isinstance(law, GaussianDist):
        i = law.index(var)
        return LinearGaussianKernel.constant(law.mean[i], max(0.0, float(law.cov[i, i])), n_par)
    k = c.kernel(var)
    m = law.prob
    probs = {v: m({var: v}) for v in k.domain}
    return FiniteKernel.constant(k.domain, probs, k.parent_domains)
