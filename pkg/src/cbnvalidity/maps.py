"""Representation maps: measurable functions from low-level to modeled variables.

Three concrete maps are provided.  :class:`IdentityMap` keeps the variables,
:class:`AffineMap` applies ``x -> A x + b`` and works for both families (for
finite distributions the coefficients must be exact and the images integral),
and :class:`TableMap` is an explicit value table for finite inputs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from types import MappingProxyType
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import ShapeMismatchError, UnsupportedOperationError


def _exact(x):
    """Return ``x`` as a Fraction when it is an exact number, else None."""
    if isinstance(x, bool):
        return Fraction(int(x))
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, float) and x.is_integer():
        return Fraction(int(x))
    return None


@dataclass(frozen=True)
class IdentityMap:
    """The identity representation ``h(x) = x`` on the listed variables."""

    vars: tuple

    def __post_init__(self):
        object.__setattr__(self, "vars", tuple(self.vars))

    @property
    def inputs(self):
        return self.vars

    @property
    def outputs(self):
        return self.vars

    def apply(self, values):
        return tuple(values)


@dataclass(frozen=True)
class AffineMap:
    """Affine representation ``h(x) = A x + b``.

    Parameters
    ----------
    inputs : sequence of str
        Names of the input variables, in the column order of ``matrix``.
    outputs : sequence of str
        Names of the produced variables, in the row order of ``matrix``.
    matrix : sequence of sequences
        ``len(outputs) x len(inputs)`` coefficients.  Entries may be ints,
        Fractions or floats; finite distributions need exact entries.
    offset : sequence, optional
        Length ``len(outputs)`` vector, zero by default.
    """

    inputs: tuple
    outputs: tuple
    matrix: tuple
    offset: tuple = ()

    def __post_init__(self):
        inputs = tuple(self.inputs)
        outputs = tuple(self.outputs)
        matrix = tuple(tuple(row) for row in self.matrix)
        offset = tuple(self.offset) if len(self.offset) else tuple(0 for _ in outputs)
        if len(matrix) != len(outputs) or any(len(r) != len(inputs) for r in matrix):
            raise ShapeMismatchError(
                f"affine matrix must be {len(outputs)}x{len(inputs)}"
            )
        if len(offset) != len(outputs):
            raise ShapeMismatchError("affine offset length must equal the output count")
        if len(set(outputs)) != len(outputs):
            raise ShapeMismatchError("duplicate output names")
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "outputs", outputs)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "offset", offset)

    def float_matrix(self):
        return np.array(self.matrix, dtype=float).reshape(len(self.outputs), len(self.inputs))

    def float_offset(self):
        return np.array(self.offset, dtype=float)

    def apply(self, values):
        """Evaluate exactly on an integer assignment of the inputs."""
        coeffs = [[_exact(a) for a in row] for row in self.matrix]
        offs = [_exact(b) for b in self.offset]
        if any(a is None for row in coeffs for a in row) or any(b is None for b in offs):
            raise UnsupportedOperationError(
                "affine map with inexact coefficients cannot act on finite values"
            )
        out = []
        for row, b in zip(coeffs, offs):
            v = sum((a * x for a, x in zip(row, values)), b)
            if v.denominator != 1:
                raise UnsupportedOperationError(
                    f"affine map sends {tuple(values)} to the non-integer value {v}"
                )
            out.append(int(v))
        return tuple(out)

    @classmethod
    def identity(cls, vars):
        n = len(vars)
        return cls(vars, vars, [[int(i == j) for j in range(n)] for i in range(n)])


class TableMap:
    """Explicit value table from input assignments to output tuples.

    Parameters
    ----------
    inputs, outputs : sequence of str
    table : mapping
        Input assignment tuple to output tuple.
    """

    def __init__(self, inputs: Sequence[str], outputs: Sequence[str], table: Mapping):
        self.inputs = tuple(inputs)
        self.outputs = tuple(outputs)
        clean = {}
        for key, value in table.items():
            key = tuple(key) if isinstance(key, tuple) else (key,)
            value = tuple(value) if isinstance(value, (tuple, list)) else (value,)
            if len(key) != len(self.inputs) or len(value) != len(self.outputs):
                raise ShapeMismatchError(f"table entry {key} -> {value} has the wrong arity")
            clean[tuple(int(k) for k in key)] = tuple(int(v) for v in value)
        self.table = MappingProxyType(clean)

    @classmethod
    def from_function(cls, inputs, input_domains, outputs, fn: Callable):
        """Tabulate ``fn`` on the full product of ``input_domains``.

        ``fn`` receives the input values as positional arguments and returns
        a scalar or a tuple of output values.
        """
        table = {}
        for values in itertools.product(*input_domains):
            table[values] = fn(*values)
        return cls(inputs, outputs, table)

    def apply(self, values):
        try:
            return self.table[tuple(values)]
        except KeyError:
            raise UnsupportedOperationError(
                f"table map has no entry for input {tuple(values)}"
            ) from None

    def is_total_on(self, domains):
        return all(v in self.table for v in itertools.product(*domains))

    def __eq__(self, other):
        if not isinstance(other, TableMap):
            return NotImplemented
        return (self.inputs, self.outputs, dict(self.table)) == (
            other.inputs,
            other.outputs,
            dict(other.table),
        )

    def __repr__(self):
        return f"TableMap(inputs={self.inputs}, outputs={self.outputs}, entries={len(self.table)})"


RepresentationMap = IdentityMap | AffineMap | TableMap


def compose(outer, inner):
    """Return the map ``outer ∘ inner``.

    Affine maps compose in closed form; a table inner map is composed by
    evaluating ``outer`` on each table entry.
    """
    if tuple(outer.inputs) != tuple(inner.outputs):
        raise ShapeMismatchError("outer map inputs must equal inner map outputs")
    if isinstance(inner, IdentityMap):
        return outer
    if isinstance(outer, IdentityMap):
        return inner
    if isinstance(outer, AffineMap) and isinstance(inner, AffineMap):
        a2 = [[_exact(x) if _exact(x) is not None else x for x in r] for r in outer.matrix]
        a1 = [[_exact(x) if _exact(x) is not None else x for x in r] for r in inner.matrix]
        b1 = [_exact(x) if _exact(x) is not None else x for x in inner.offset]
        b2 = [_exact(x) if _exact(x) is not None else x for x in outer.offset]
        m = [
            [sum(a2[i][k] * a1[k][j] for k in range(len(a1))) for j in range(len(inner.inputs))]
            for i in range(len(a2))
        ]
        off = [sum(a2[i][k] * b1[k] for k in range(len(b1))) + b2[i] for i in range(len(a2))]
        return AffineMap(inner.inputs, outer.outputs, m, off)
    if isinstance(inner, TableMap):
        return TableMap(
            inner.inputs,
            outer.outputs,
            {k: outer.apply(v) for k, v in inner.table.items()},
        )
    raise UnsupportedOperationError(
        f"cannot compose {type(outer).__name__} after {type(inner).__name__}"
    )
