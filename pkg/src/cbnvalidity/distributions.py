"""Exact probability algebra for two closed families of joint distributions.

:class:`FiniteDist` holds a categorical joint with exact rational entries and
:class:`GaussianDist` a multivariate normal whose covariance may be singular,
so point masses and Gaussian coordinates can live in one joint.  Variables are
identified by their names; a variable's index is its position in ``vars``.

All values are immutable and every function here is pure.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    FamilyMismatchError,
    ShapeMismatchError,
    UnsupportedOperationError,
    VariableMismatchError,
)
from .maps import AffineMap, IdentityMap, TableMap


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances for the Gaussian family.

    Attributes
    ----------
    eq_tol : float
        Relative tolerance for equality of means, covariances and kernel
        moment conditions.  Differences are compared against
        ``eq_tol * max(1, scale)`` where ``scale`` is the largest magnitude
        involved.
    rank_tol : float
        Singular values below ``rank_tol * sigma_max`` are treated as zero in
        pseudo-inverses.
    ci_tol : float
        Absolute threshold on conditional cross-covariances.
    """

    eq_tol: float = 1e-9
    rank_tol: float = 1e-12
    ci_tol: float = 1e-9

    def __post_init__(self):
        for name in ("eq_tol", "rank_tol", "ci_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")


DEFAULT_TOL = Tolerances()


def as_fraction(x) -> Fraction:
    """Convert an exact number or a ``"p/q"`` string to a Fraction.

    Floats are rejected because they are not exact; pass ``"3/5"`` or
    ``Fraction(3, 5)`` instead of ``0.6``.
    """
    if isinstance(x, bool):
        raise TypeError("booleans are not probabilities")
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"expected an exact rational, got {type(x).__name__} {x!r}")


# ---------------------------------------------------------------------------
# finite family
# ---------------------------------------------------------------------------


class FiniteDist:
    """Categorical joint over named integer-valued variables.

    Parameters
    ----------
    vars : sequence of str
        Variable names, in the order used for assignment tuples.
    domains : sequence of sequences of int
        Finite domain of each variable.
    table : mapping
        Full assignment tuple to probability.  Entries must be exact
        (int, Fraction or ``"p/q"`` string) and sum to one.  Zero entries may
        be omitted and are dropped on construction.

    Examples
    --------
    >>> d = FiniteDist(["Z"], [[0, 1]], {(1,): "1/2", (0,): "1/2"})
    >>> d.prob({"Z": 1})
    Fraction(1, 2)
    """

    family = "finite"

    def __init__(self, vars: Sequence[str], domains: Sequence[Sequence[int]], table: Mapping):
        vars = tuple(vars)
        if len(set(vars)) != len(vars) or any(not v for v in vars):
            raise VariableMismatchError(f"variable names must be unique and nonempty: {vars}")
        domains = tuple(tuple(int(x) for x in dom) for dom in domains)
        if len(domains) != len(vars):
            raise ShapeMismatchError("one domain per variable is required")
        for v, dom in zip(vars, domains):
            if len(set(dom)) != len(dom) or not dom:
                raise ShapeMismatchError(f"domain of {v} must be nonempty with distinct values")
        clean = {}
        for key, p in table.items():
            key = tuple(key) if isinstance(key, (tuple, list)) else (key,)
            if len(key) != len(vars):
                raise ShapeMismatchError(f"assignment {key} does not match variables {vars}")
            key = tuple(int(k) for k in key)
            for v, x, dom in zip(vars, key, domains):
                if x not in dom:
                    raise ShapeMismatchError(f"value {x} of {v} is outside its domain {dom}")
            p = as_fraction(p)
            if p < 0:
                raise ValueError(f"negative probability at {key}")
            if p:
                clean[key] = clean.get(key, Fraction(0)) + p
        total = sum(clean.values(), Fraction(0))
        if total != 1:
            raise ValueError(f"probabilities sum to {total}, not 1")
        self.vars = vars
        self.domains = domains
        self.table = MappingProxyType(dict(sorted(clean.items())))

    # -- constructors -----------------------------------------------------
    @classmethod
    def point(cls, vars, domains, values):
        """Point mass at ``values``."""
        return cls(vars, domains, {tuple(values): 1})

    @classmethod
    def uniform(cls, vars, domains, support=None):
        """Uniform law over ``support`` (default: the full domain product)."""
        support = list(support) if support is not None else list(itertools.product(*domains))
        p = Fraction(1, len(support))
        return cls(vars, domains, {tuple(s) if isinstance(s, tuple) else (s,): p for s in support})

    @classmethod
    def product(cls, *factors: "FiniteDist") -> "FiniteDist":
        """Independent product of distributions over disjoint variables."""
        vars, domains, table = (), (), {(): Fraction(1)}
        for f in factors:
            vars += f.vars
            domains += f.domains
            table = {a + b: p * q for a, p in table.items() for b, q in f.table.items()}
        return cls(vars, domains, table)

    # -- accessors ----------------------------------------------------------
    def domain(self, var):
        return self.domains[self.index(var)]

    def index(self, var):
        try:
            return self.vars.index(var)
        except ValueError:
            raise VariableMismatchError(f"unknown variable {var!r}; have {self.vars}") from None

    def prob(self, event: Mapping[str, int]) -> Fraction:
        """Probability that the named variables take the given values."""
        idx = [(self.index(v), int(x)) for v, x in event.items()]
        return sum(
            (p for key, p in self.table.items() if all(key[i] == x for i, x in idx)),
            Fraction(0),
        )

    def support(self):
        return list(self.table.keys())

    def __eq__(self, other):
        if not isinstance(other, FiniteDist):
            return NotImplemented
        return self.vars == other.vars and dict(self.table) == dict(other.table)

    __hash__ = None

    def __repr__(self):
        entries = ", ".join(f"{k}: {p}" for k, p in list(self.table.items())[:8])
        more = ", ..." if len(self.table) > 8 else ""
        return f"FiniteDist(vars={self.vars}, {{{entries}{more}}})"


# ---------------------------------------------------------------------------
# Gaussian family
# ---------------------------------------------------------------------------


class GaussianDist:
    """Multivariate normal law with a possibly singular covariance.

    Zero-variance coordinates encode point masses, so ``N(0,1) ⊗ δ_5`` is
    ``GaussianDist(["A", "B"], [0, 5], [[1, 0], [0, 0]])``.

    Parameters
    ----------
    vars : sequence of str
    mean : array_like, shape (n,)
    cov : array_like, shape (n, n)
        Symmetric positive semidefinite up to round-off.  Tiny negative
        eigenvalues are clamped to zero.
    """

    family = "gaussian"
    psd_tol = 1e-9

    def __init__(self, vars: Sequence[str], mean, cov):
        vars = tuple(vars)
        if len(set(vars)) != len(vars) or any(not v for v in vars):
            raise VariableMismatchError(f"variable names must be unique and nonempty: {vars}")
        n = len(vars)
        mean = np.array(mean, dtype=float).reshape(n)
        cov = np.array(cov, dtype=float).reshape(n, n)
        scale = max(1.0, float(np.max(np.abs(cov)))) if n else 1.0
        if np.max(np.abs(cov - cov.T), initial=0.0) > self.psd_tol * scale:
            raise ValueError("covariance matrix is not symmetric")
        cov = (cov + cov.T) / 2
        if n:
            eig, vec = np.linalg.eigh(cov)
            if eig.min() < -self.psd_tol * scale:
                raise ValueError(f"covariance has negative eigenvalue {eig.min():.3g}")
            if eig.min() < 0:
                cov = (vec * np.clip(eig, 0, None)) @ vec.T
                cov = (cov + cov.T) / 2
        mean.setflags(write=False)
        cov.setflags(write=False)
        self.vars = vars
        self.mean = mean
        self.cov = cov

    def index(self, var):
        try:
            return self.vars.index(var)
        except ValueError:
            raise VariableMismatchError(f"unknown variable {var!r}; have {self.vars}") from None

    def variance(self, var):
        i = self.index(var)
        return float(self.cov[i, i])

    def __repr__(self):
        return f"GaussianDist(vars={self.vars}, mean={self.mean.tolist()}, cov={self.cov.tolist()})"


Distribution = FiniteDist | GaussianDist


def _same_family(d1, d2):
    if type(d1) is not type(d2):
        raise FamilyMismatchError(
            f"operands belong to different families: {type(d1).__name__} vs {type(d2).__name__}"
        )


def _names(vars) -> tuple:
    if isinstance(vars, str):
        return (vars,)
    return tuple(vars)


def _indices(d, vars):
    return [d.index(v) for v in _names(vars)]


def _close(a, b, tol, scale=1.0):
    """``|a - b| <= tol * max(1, scale, |a|, |b|)`` elementwise, all entries."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size == 0:
        return True
    ref = max(1.0, float(scale), float(np.max(np.abs(a))), float(np.max(np.abs(b))))
    return bool(np.max(np.abs(a - b)) <= tol * ref)


def pinv(matrix, tol: Tolerances = DEFAULT_TOL):
    """Rank-truncated pseudo-inverse of a symmetric PSD matrix."""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.size == 0:
        return matrix.copy()
    return np.linalg.pinv(matrix, rcond=tol.rank_tol, hermitian=True)


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def marginal(d: Distribution, keep: Iterable[str]) -> Distribution:
    """Marginal law of the kept variables.

    The result lists the variables in the order given by ``keep`` when it is
    a sequence and in ``d.vars`` order when it is a set.
    """
    if isinstance(keep, (set, frozenset)):
        unknown = set(keep) - set(d.vars)
        if unknown:
            raise VariableMismatchError(f"unknown variables {sorted(unknown)}")
        keep = [v for v in d.vars if v in keep]
    keep = _names(keep)
    if not keep:
        raise VariableMismatchError("marginal needs at least one variable")
    if len(set(keep)) != len(keep):
        raise VariableMismatchError(f"duplicate variables in {keep}")
    idx = _indices(d, keep)
    if isinstance(d, FiniteDist):
        table = {}
        for key, p in d.table.items():
            k = tuple(key[i] for i in idx)
            table[k] = table.get(k, Fraction(0)) + p
        return FiniteDist(keep, [d.domains[i] for i in idx], table)
    return GaussianDist(keep, d.mean[idx], d.cov[np.ix_(idx, idx)])


def pushforward(d: Distribution, h) -> Distribution:
    """Law of ``h(X)`` when ``X ~ d``.

    Gaussian inputs need an affine (or identity) map.  Finite inputs accept
    any of the three map kinds; affine maps must have exact coefficients
    and integral images.
    """
    if isinstance(h, IdentityMap):
        if tuple(h.vars) != tuple(d.vars):
            return marginal(d, h.vars)
        return d
    idx = _indices(d, h.inputs)
    if isinstance(d, GaussianDist):
        if not isinstance(h, AffineMap):
            raise UnsupportedOperationError("Gaussian laws can only be pushed through affine maps")
        a = h.float_matrix()
        mean = a @ d.mean[idx] + h.float_offset()
        cov = a @ d.cov[np.ix_(idx, idx)] @ a.T
        return GaussianDist(h.outputs, mean, cov)
    if not isinstance(h, (AffineMap, TableMap)):
        raise UnsupportedOperationError(f"unsupported map {type(h).__name__}")
    table = {}
    for key, p in d.table.items():
        out = tuple(h.apply(tuple(key[i] for i in idx)))
        table[out] = table.get(out, Fraction(0)) + p
    in_domains = [d.domains[i] for i in idx]
    if isinstance(h, TableMap) and h.is_total_on(in_domains):
        images = list(h.table.values())
    else:
        images = [tuple(h.apply(v)) for v in itertools.product(*in_domains)]
    out_domains = [sorted({img[j] for img in images} | {k[j] for k in table}) for j in range(len(h.outputs))]
    return FiniteDist(h.outputs, out_domains, table)


def equal(d1: Distribution, d2: Distribution, tol: Tolerances = DEFAULT_TOL) -> bool:
    """Equality of laws: exact for finite joints, within ``eq_tol`` for Gaussians."""
    _same_family(d1, d2)
    if tuple(d1.vars) != tuple(d2.vars):
        raise VariableMismatchError(f"variable lists differ: {d1.vars} vs {d2.vars}")
    if isinstance(d1, FiniteDist):
        return dict(d1.table) == dict(d2.table)
    scale = max(
        1.0,
        float(np.max(np.abs(d1.cov), initial=0.0)),
        float(np.max(np.abs(d2.cov), initial=0.0)),
        float(np.max(np.abs(d1.mean), initial=0.0)),
        float(np.max(np.abs(d2.mean), initial=0.0)),
    )
    return _close(d1.mean, d2.mean, tol.eq_tol, scale) and _close(d1.cov, d2.cov, tol.eq_tol, scale)


def conditional_cross_covariance(d: GaussianDist, x, y, z=(), tol: Tolerances = DEFAULT_TOL):
    """``Σ_xy − Σ_xz Σ_z⁺ Σ_zy`` with a rank-truncated pseudo-inverse."""
    if not isinstance(d, GaussianDist):
        raise UnsupportedOperationError("conditional cross-covariance needs a Gaussian law")
    ix, iy, iz = _indices(d, x), _indices(d, y), _indices(d, z)
    s = d.cov
    out = s[np.ix_(ix, iy)]
    if iz:
        out = out - s[np.ix_(ix, iz)] @ pinv(s[np.ix_(iz, iz)], tol) @ s[np.ix_(iz, iy)]
    return out


def ci_test(d: Distribution, x, y, z=(), tol: Tolerances = DEFAULT_TOL) -> bool:
    """Return True iff ``X ⊥ Y | Z`` under ``d``.

    Finite laws are checked exactly on every slice ``Z = z`` of positive
    probability.  Gaussian laws are declared independent when the largest
    entry of the conditional cross-covariance is below ``ci_tol``.
    """
    x, y, z = _names(x), _names(y), _names(z)
    if set(x) & set(y) or set(x) & set(z) or set(y) & set(z):
        raise VariableMismatchError("x, y and z must be disjoint")
    if not x or not y:
        return True
    if isinstance(d, GaussianDist):
        cc = conditional_cross_covariance(d, x, y, z, tol)
        return bool(np.max(np.abs(cc)) < tol.ci_tol)
    nx, ny = len(x), len(y)
    joint = marginal(d, x + y + z).table
    pxz, pyz, pz = {}, {}, {}
    for key, p in joint.items():
        kx, ky, kz = key[:nx], key[nx : nx + ny], key[nx + ny :]
        pxz[kx + kz] = pxz.get(kx + kz, 0) + p
        pyz[ky + kz] = pyz.get(ky + kz, 0) + p
        pz[kz] = pz.get(kz, 0) + p
    xs_by_z, ys_by_z = {}, {}
    for k in pxz:
        xs_by_z.setdefault(k[nx:], []).append(k[:nx])
    for k in pyz:
        ys_by_z.setdefault(k[ny:], []).append(k[:ny])
    for kz, mass in pz.items():
        for kx in xs_by_z[kz]:
            for ky in ys_by_z[kz]:
                if joint.get(kx + ky + kz, 0) * mass != pxz[kx + kz] * pyz[ky + kz]:
                    return False
    return True


def entropy(d: Distribution, var: str) -> float:
    """Shannon entropy (natural log) of a finite marginal; exactly 0 for point masses."""
    if not isinstance(d, FiniteDist):
        raise UnsupportedOperationError("entropy is only defined for the finite family")
    m = marginal(d, [var])
    probs = [p for p in m.table.values() if p]
    if len(probs) == 1:
        return 0.0
    return float(-sum(float(p) * math.log(p) for p in probs))


def expectation(d: Distribution, functional: Mapping[str, object], constant=0):
    """Expectation of ``constant + sum_v functional[v] * v``.

    Finite laws return an exact Fraction when the coefficients are exact;
    Gaussian laws return a float.
    """
    if isinstance(d, GaussianDist):
        total = float(constant)
        for v, coef in functional.items():
            total += float(coef) * float(d.mean[d.index(v)])
        return total
    exact = all(isinstance(c, (int, Fraction)) for c in list(functional.values()) + [constant])
    total = Fraction(constant) if exact else float(constant)
    for v, coef in functional.items():
        i = d.index(v)
        ev = sum((p * key[i] for key, p in d.table.items()), Fraction(0))
        total += (Fraction(coef) if exact else float(coef)) * (ev if exact else float(ev))
    return total


def mean_vector(d: Distribution) -> dict:
    """Per-variable means (Fractions for finite laws, floats for Gaussian)."""
    return {v: expectation(d, {v: 1}) for v in d.vars}
