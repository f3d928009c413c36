"""Plain declarative graph descriptions.

A :class:`GraphSpec` is what a graph document parses into and what
:func:`qgraph.graph_model.build_graph` consumes.  It holds names and numbers
only; validation of the geometry happens in ``build_graph``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

VERTEX_KINDS = ("delta", "delta_prime", "general")


@dataclass(frozen=True)
class PotentialSpec:
    """Potential on one bond, in the orientation of the bond's forward arc.

    ``piecewise_constant`` takes interior breakpoints ``0 < b1 < ... < l``
    and one value per piece; ``polynomial`` takes coefficients of
    ``c0 + c1 x + c2 x**2 + ...``.
    """

    kind: str = "zero"
    breakpoints: tuple = ()
    values: tuple = ()
    coefficients: tuple = ()

    def __post_init__(self):
        if self.kind not in ("zero", "piecewise_constant", "polynomial"):
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if self.kind == "piecewise_constant":
            if len(self.values) != len(self.breakpoints) + 1:
                raise ValueError("piecewise_constant needs len(values) == len(breakpoints) + 1")
            if any(b2 <= b1 for b1, b2 in zip(self.breakpoints, self.breakpoints[1:])):
                raise ValueError("breakpoints must be strictly increasing")
        if self.kind == "polynomial" and not self.coefficients:
            raise ValueError("polynomial needs at least one coefficient")

    @classmethod
    def zero(cls):
        return cls()

    @classmethod
    def constant(cls, value):
        return cls("piecewise_constant", (), (float(value),))

    @classmethod
    def piecewise_constant(cls, breakpoints, values):
        return cls("piecewise_constant", tuple(float(b) for b in breakpoints),
                   tuple(float(v) for v in values))

    @classmethod
    def polynomial(cls, coefficients):
        return cls("polynomial", coefficients=tuple(float(c) for c in coefficients))

    @property
    def is_zero(self):
        if self.kind == "zero":
            return True
        if self.kind == "piecewise_constant":
            return all(v == 0.0 for v in self.values)
        return all(c == 0.0 for c in self.coefficients)

    @property
    def is_constant(self):
        if self.kind == "piecewise_constant":
            return len(set(self.values)) == 1
        if self.kind == "polynomial":
            return all(c == 0.0 for c in self.coefficients[1:])
        return True

    def constant_value(self):
        if self.kind == "piecewise_constant":
            return self.values[0]
        if self.kind == "polynomial":
            return self.coefficients[0] if self.coefficients else 0.0
        return 0.0

    def __call__(self, x, length):
        x = np.asarray(x, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(x)
        if self.kind == "piecewise_constant":
            idx = np.searchsorted(np.asarray(self.breakpoints, dtype=float), x, side="right")
            return np.asarray(self.values, dtype=float)[idx]
        return np.polynomial.polynomial.polyval(x, self.coefficients)

    def segments(self, length):
        """Constant pieces as ``(x0, x1, value)``; only for piecewise-constant or zero."""
        if self.kind == "zero":
            return [(0.0, length, 0.0)]
        if self.kind != "piecewise_constant":
            raise ValueError("segments() needs a piecewise-constant potential")
        edges = [0.0, *self.breakpoints, length]
        return [(edges[i], edges[i + 1], self.values[i]) for i in range(len(self.values))]

    def reversed(self, length):
        """The same physical potential seen from the other end: x -> l - x."""
        if self.kind == "zero":
            return self
        if self.kind == "piecewise_constant":
            return PotentialSpec("piecewise_constant",
                                 tuple(length - b for b in reversed(self.breakpoints)),
                                 tuple(reversed(self.values)))
        p = np.polynomial.Polynomial(self.coefficients)
        q = p(np.polynomial.Polynomial([length, -1.0]))
        return PotentialSpec("polynomial", coefficients=tuple(float(c) for c in q.coef))

    def minimum(self, length):
        if self.kind == "zero":
            return 0.0
        if self.kind == "piecewise_constant":
            return min(self.values)
        # endpoints and real critical points inside the bond
        crit = np.polynomial.Polynomial(self.coefficients).deriv().roots()
        xs = [0.0, length, *(r.real for r in np.atleast_1d(crit) if abs(r.imag) < 1e-12 and 0 < r.real < length)]
        return float(np.min(self(np.array(xs), length)))


@dataclass(frozen=True)
class VertexCondition:
    """Boundary condition at one vertex.

    ``delta`` with ``value=inf`` is the Dirichlet marker, ``delta_prime`` with
    ``value=inf`` the Neumann marker.  ``general`` carries explicit m x m
    blocks ``C`` and ``D`` (rows are equations, columns the vertex's arcs in
    canonical order).
    """

    kind: str = "delta"
    value: float = 0.0
    C: Optional[tuple] = None
    D: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in VERTEX_KINDS:
            raise ValueError(f"unknown vertex condition {self.kind!r}")

    @classmethod
    def delta(cls, lam=0.0):
        return cls("delta", float(lam))

    @classmethod
    def delta_prime(cls, mu=0.0):
        return cls("delta_prime", float(mu))

    @classmethod
    def dirichlet(cls):
        return cls("delta", math.inf)

    @classmethod
    def neumann(cls):
        return cls("delta_prime", math.inf)

    @classmethod
    def general(cls, C, D):
        C = tuple(tuple(complex(x) for x in row) for row in C)
        D = tuple(tuple(complex(x) for x in row) for row in D)
        return cls("general", 0.0, C, D)

    @property
    def is_infinite(self):
        return self.kind != "general" and math.isinf(self.value)


@dataclass(frozen=True)
class BondSpec:
    id: str
    tail: str
    head: str
    length: float
    flux: float = 0.0
    potential: PotentialSpec = field(default_factory=PotentialSpec)


@dataclass(frozen=True)
class GraphSpec:
    vertices: tuple
    bonds: tuple
    boundary: tuple = ()  # (vertex name, VertexCondition) pairs; missing vertices default to delta(0)
    name: str = ""

    def condition(self, vertex):
        for v, cond in self.boundary:
            if v == vertex:
                return cond
        return VertexCondition.delta(0.0)

    @classmethod
    def make(cls, vertices: Sequence[str], bonds: Sequence, boundary=None, name=""):
        bonds = tuple(b if isinstance(b, BondSpec) else BondSpec(*b) for b in bonds)
        boundary = tuple((boundary or {}).items()) if isinstance(boundary, dict) else tuple(boundary or ())
        return cls(tuple(vertices), bonds, boundary, name)
