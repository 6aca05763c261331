"""Markov kernels, conditional extraction and kernel compatibility.

A kernel gives the law of one node given its parents.  Two families exist:
:class:`FiniteKernel` stores one exact row per parent assignment and
:class:`LinearGaussianKernel` stores ``Z | pa ~ N(c + w·pa, σ²)``.

Compatibility (:func:`kernel_compatible`) asks whether a kernel is *a version*
of a conditional under a given joint.  It constrains the kernel only where
the parents have support, so two kernels that differ on a null set are both
compatible.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from types import MappingProxyType
from typing import Callable, Mapping, Sequence

import numpy as np

from .distributions import (
    DEFAULT_TOL,
    FiniteDist,
    GaussianDist,
    Tolerances,
    _close,
    as_fraction,
    marginal,
    pinv,
)
from .errors import FamilyMismatchError, ShapeMismatchError


class FiniteKernel:
    """Conditional probability table with exact rows.

    Parameters
    ----------
    domain : sequence of int
        Values of the node.
    parent_domains : sequence of sequences of int
        Domains of the parents, in the parent order of the owning DAG.
    rows : mapping
        Parent assignment tuple to either a mapping ``value -> probability``
        or a sequence of probabilities aligned with ``domain``.  Every parent
        assignment in the product of ``parent_domains`` needs a row.
    """

    family = "finite"

    def __init__(self, domain: Sequence[int], parent_domains: Sequence[Sequence[int]], rows: Mapping):
        self.domain = tuple(int(v) for v in domain)
        self.parent_domains = tuple(tuple(int(v) for v in dom) for dom in parent_domains)
        clean = {}
        for pa, row in rows.items():
            pa = tuple(pa) if isinstance(pa, (tuple, list)) else (pa,)
            clean[tuple(int(v) for v in pa)] = self._normalize_row(row)
        for pa in itertools.product(*self.parent_domains):
            if pa not in clean:
                raise ShapeMismatchError(f"kernel has no row for parent assignment {pa}")
        extra = set(clean) - set(itertools.product(*self.parent_domains))
        if extra:
            raise ShapeMismatchError(f"rows for parent assignments outside the domains: {sorted(extra)}")
        self.rows = MappingProxyType(dict(sorted(clean.items())))

    def _normalize_row(self, row):
        if isinstance(row, Mapping):
            unknown = set(int(k) for k in row) - set(self.domain)
            if unknown:
                raise ShapeMismatchError(f"row mentions values {sorted(unknown)} outside the domain")
            probs = tuple(as_fraction(row.get(v, 0)) for v in self.domain)
        else:
            probs = tuple(as_fraction(p) for p in row)
            if len(probs) != len(self.domain):
                raise ShapeMismatchError("row length must equal the domain size")
        if any(p < 0 for p in probs) or sum(probs) != 1:
            raise ValueError(f"kernel row {probs} is not a probability vector")
        return probs

    # -- constructors ---------------------------------------------------------
    @classmethod
    def constant(cls, domain, probs, parent_domains=()):
        """Kernel that ignores its parents (a perfect kernel)."""
        return cls(domain, parent_domains, {pa: probs for pa in itertools.product(*parent_domains)})

    @classmethod
    def point(cls, domain, value, parent_domains=()):
        """Constant point mass at ``value``."""
        return cls.constant(domain, {value: 1}, parent_domains)

    @classmethod
    def from_function(cls, domain, parent_domains, fn: Callable):
        """Build rows by calling ``fn(*parent_values)``."""
        return cls(domain, parent_domains, {pa: fn(*pa) for pa in itertools.product(*parent_domains)})

    # -- queries --------------------------------------------------------------
    @property
    def n_parents(self):
        return len(self.parent_domains)

    @property
    def is_perfect(self):
        return len(set(self.rows.values())) <= 1

    def row(self, pa) -> dict:
        return dict(zip(self.domain, self.rows[tuple(pa)]))

    def prob(self, value, pa) -> Fraction:
        try:
            return self.rows[tuple(pa)][self.domain.index(value)]
        except ValueError:
            return Fraction(0)

    def __eq__(self, other):
        if not isinstance(other, FiniteKernel):
            return NotImplemented
        return (self.domain, self.parent_domains, dict(self.rows)) == (
            other.domain,
            other.parent_domains,
            dict(other.rows),
        )

    __hash__ = None

    def __repr__(self):
        if self.is_perfect:
            row = next(iter(self.rows.values()))
            return f"FiniteKernel(constant {dict(zip(self.domain, map(str, row)))})"
        return f"FiniteKernel(domain={self.domain}, rows={len(self.rows)})"


@dataclass(frozen=True)
class LinearGaussianKernel:
    """``Z | pa ~ N(intercept + weights·pa, variance)``; zero variance is a point mass."""

    intercept: float
    weights: tuple = ()
    variance: float = 1.0

    family = "gaussian"

    def __post_init__(self):
        object.__setattr__(self, "intercept", float(self.intercept))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        object.__setattr__(self, "variance", float(self.variance))
        if not self.variance >= 0:
            raise ValueError("kernel variance must be nonnegative")

    @classmethod
    def point(cls, value, n_parents=0):
        return cls(value, (0.0,) * n_parents, 0.0)

    @classmethod
    def constant(cls, mean, variance, n_parents=0):
        return cls(mean, (0.0,) * n_parents, variance)

    @property
    def n_parents(self):
        return len(self.weights)

    @property
    def is_perfect(self):
        return all(w == 0 for w in self.weights)


Kernel = FiniteKernel | LinearGaussianKernel


def check_shape(k, n_parents: int, family: str):
    """Raise if ``k`` does not fit a node with ``n_parents`` parents of ``family``."""
    if k.family != family:
        raise FamilyMismatchError(f"{k.family} kernel used in a {family} model")
    if k.n_parents != n_parents:
        raise ShapeMismatchError(f"kernel expects {k.n_parents} parents, node has {n_parents}")


def conditional(d, node: str, parents: Sequence[str], fallback=None, tol: Tolerances = DEFAULT_TOL):
    """Extract a version of the conditional law of ``node`` given ``parents``.

    Parameters
    ----------
    d : FiniteDist or GaussianDist
    node : str
    parents : sequence of str
    fallback : FiniteKernel, optional
        For finite laws, rows at parent assignments of probability zero are
        copied from ``fallback`` when given and set to uniform otherwise.
        Gaussian regressions extend linearly off the support.

    Returns
    -------
    FiniteKernel or LinearGaussianKernel
    """
    parents = tuple(parents)
    if isinstance(d, GaussianDist):
        j = d.index(node)
        p = [d.index(v) for v in parents]
        if not p:
            return LinearGaussianKernel(d.mean[j], (), max(0.0, float(d.cov[j, j])))
        s_pp = d.cov[np.ix_(p, p)]
        s_jp = d.cov[j, p]
        w = s_jp @ pinv(s_pp, tol)
        c = d.mean[j] - w @ d.mean[p]
        var = float(d.cov[j, j] - w @ s_jp)
        return LinearGaussianKernel(c, tuple(w), max(0.0, var))
    dom = d.domain(node)
    pdoms = [d.domain(v) for v in parents]
    joint = marginal(d, parents + (node,)).table
    mass = {}
    for key, p in joint.items():
        mass[key[:-1]] = mass.get(key[:-1], 0) + p
    rows = {}
    for pa in itertools.product(*pdoms):
        m = mass.get(pa, 0)
        if m:
            rows[pa] = {v: joint.get(pa + (v,), 0) / m for v in dom}
        elif fallback is not None and pa in fallback.rows and set(fallback.domain) <= set(dom):
            rows[pa] = fallback.row(pa)
        else:
            rows[pa] = [Fraction(1, len(dom))] * len(dom)
    return FiniteKernel(dom, pdoms, rows)


def kernel_compatible(d, node: str, parents: Sequence[str], k, tol: Tolerances = DEFAULT_TOL) -> bool:
    """Is ``k`` a version of the conditional of ``node`` given ``parents`` under ``d``?

    Finite: the conditional equals the kernel row at every parent assignment
    of positive probability.  Gaussian: the residual ``R = Z − c − w·PA``
    has zero mean, zero covariance with the parents and variance ``σ²``.
    """
    parents = tuple(parents)
    if k.n_parents != len(parents):
        raise ShapeMismatchError(f"kernel expects {k.n_parents} parents, got {len(parents)}")
    if isinstance(d, GaussianDist):
        if not isinstance(k, LinearGaussianKernel):
            raise FamilyMismatchError("Gaussian law needs a linear Gaussian kernel")
        j = d.index(node)
        p = [d.index(v) for v in parents]
        w = np.array(k.weights)
        mu, s = d.mean, d.cov
        s_pp = s[np.ix_(p, p)]
        s_jp = s[j, p]
        mean_r = mu[j] - k.intercept - (w @ mu[p] if p else 0.0)
        cov_rp = s_jp - w @ s_pp if p else np.zeros(0)
        var_r = s[j, j] - 2 * (w @ s_jp if p else 0.0) + (w @ s_pp @ w if p else 0.0)
        scale = max(
            1.0,
            abs(float(mu[j])),
            float(np.max(np.abs(s[np.ix_([j] + p, [j] + p)]))),
            abs(k.intercept),
            float(np.max(np.abs(w), initial=0.0)) ** 2 * float(np.max(np.abs(s_pp), initial=0.0)),
        )
        return (
            _close(mean_r, 0.0, tol.eq_tol, scale)
            and _close(cov_rp, np.zeros_like(cov_rp), tol.eq_tol, scale)
            and _close(var_r, k.variance, tol.eq_tol, scale)
        )
    if not isinstance(d, FiniteDist) or not isinstance(k, FiniteKernel):
        raise FamilyMismatchError("finite law needs a finite kernel")
    joint = marginal(d, parents + (node,)).table
    mass = {}
    for key, p in joint.items():
        mass[key[:-1]] = mass.get(key[:-1], 0) + p
    for key, p in joint.items():
        if key[-1] not in k.domain:
            return False
    for pa, m in mass.items():
        if pa not in k.rows:
            return False
        for v, q in zip(k.domain, k.rows[pa]):
            if joint.get(pa + (v,), 0) != q * m:
                return False
    return True


def describe_kernel(k, node: str = "Z", parents: Sequence[str] = ()) -> str:
    """Short human readable rendering such as ``A | B ~ N(0.5*B, 0.5)``."""
    lhs = f"{node} | {', '.join(parents)}" if parents else node
    if isinstance(k, LinearGaussianKernel):
        terms = [f"{_fmt(k.intercept)}"] if k.intercept or not any(k.weights) else []
        for w, p in zip(k.weights, parents):
            if w:
                terms.append(f"{_fmt(w)}*{p}")
        mean = " + ".join(terms) if terms else "0"
        if k.variance == 0:
            return f"{lhs} = {mean}"
        return f"{lhs} ~ N({mean}, {_fmt(k.variance)})"
    if k.is_perfect:
        row = next(iter(k.rows.values()))
        return f"{lhs} ~ {_fmt_row(k.domain, row)}"
    body = "; ".join(
        f"{pa if len(pa) > 1 else pa[0]}: {_fmt_row(k.domain, row)}" for pa, row in k.rows.items()
    )
    return f"{lhs} ~ [{body}]"


def _fmt(x: float) -> str:
    frac = Fraction(x).limit_denominator(1000)
    if abs(float(frac) - x) < 1e-12 and frac.denominator != 1:
        return str(frac)
    return f"{x:.6g}"


def _fmt_row(domain, row) -> str:
    nz = [(v, p) for v, p in zip(domain, row) if p]
    if len(nz) == 1:
        return f"δ{nz[0][0]}"
    return "{" + ", ".join(f"{v}: {p}" for v, p in nz) + "}"
