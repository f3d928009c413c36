"""Metric graphs, arc indexing and self-adjoint vertex boundary conditions.

Arc ordering convention
-----------------------
Arcs are grouped by tail vertex (vertices in declaration order) and, inside
a group, sorted by bond index; the two arcs of a loop sit next to each other
with the forward arc first.  Every 2B x 2B matrix in the package uses this
ordering, so the boundary matrices ``C`` and ``D`` are block diagonal with one
``m x m`` block per vertex.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import GraphError, InputError
from .graphspec import BondSpec, GraphSpec, PotentialSpec, VertexCondition


@dataclass(frozen=True)
class Arc:
    tail: int
    head: int
    bond: int
    forward: bool

    @property
    def is_loop(self):
        return self.tail == self.head


def _frozen(a):
    a = np.array(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class MetricGraph:
    vertex_names: tuple
    bond_ids: tuple
    bond_ends: tuple
    lengths: np.ndarray
    bond_flux: np.ndarray
    potentials: tuple
    arcs: tuple = field(init=False)
    reversal: np.ndarray = field(init=False)
    arc_index: dict = field(init=False, repr=False)

    def __post_init__(self):
        V = len(self.vertex_names)
        order = []
        for v in range(V):
            for b, (t, h) in enumerate(self.bond_ends):
                if t == v:
                    order.append(Arc(t, h, b, True))
                if h == v:
                    order.append(Arc(h, t, b, False))
        index = {(a.bond, a.forward): i for i, a in enumerate(order)}
        rev = [index[(a.bond, not a.forward)] for a in order]
        object.__setattr__(self, "arcs", tuple(order))
        object.__setattr__(self, "reversal", _frozen(np.array(rev, dtype=int)))
        object.__setattr__(self, "arc_index", index)
        object.__setattr__(self, "lengths", _frozen(np.asarray(self.lengths, dtype=float)))
        object.__setattr__(self, "bond_flux", _frozen(np.asarray(self.bond_flux, dtype=float)))

    # sizes ---------------------------------------------------------------
    @property
    def V(self):
        return len(self.vertex_names)

    @property
    def B(self):
        return len(self.bond_ids)

    @property
    def n_arcs(self):
        return 2 * self.B

    @property
    def total_length(self):
        return float(np.sum(self.lengths))

    # per-arc data --------------------------------------------------------
    @property
    def arc_flux(self):
        return np.array([self.bond_flux[a.bond] if a.forward else -self.bond_flux[a.bond]
                         for a in self.arcs])

    @property
    def arc_lengths(self):
        return np.array([self.lengths[a.bond] for a in self.arcs])

    @property
    def tails(self):
        return np.array([a.tail for a in self.arcs], dtype=int)

    @property
    def heads(self):
        return np.array([a.head for a in self.arcs], dtype=int)

    def arc(self, bond, forward=True):
        return self.arc_index[(bond, forward)]

    def arc_label(self, i):
        a = self.arcs[i]
        return f"{self.bond_ids[a.bond]}{'+' if a.forward else '-'}"

    def arc_potential(self, i):
        a = self.arcs[i]
        pot = self.potentials[a.bond]
        return pot if a.forward else pot.reversed(self.lengths[a.bond])

    @property
    def has_potential(self):
        return any(not p.is_zero for p in self.potentials)

    # vertex data ---------------------------------------------------------
    @property
    def valency(self):
        m = np.zeros(self.V, dtype=int)
        for a in self.arcs:
            m[a.tail] += 1
        return m

    @property
    def block_slices(self):
        out, start = [], 0
        for m in self.valency:
            out.append(slice(start, start + int(m)))
            start += int(m)
        return out

    @property
    def adjacency(self):
        """Adjacency counts; a loop adds 2 to its diagonal entry so rows sum to valencies."""
        A = np.zeros((self.V, self.V), dtype=int)
        for a in self.arcs:
            A[a.tail, a.head] += 1
        return A

    def vertex(self, name):
        try:
            return self.vertex_names.index(name)
        except ValueError:
            raise GraphError(f"unknown vertex {name!r}") from None

    # derived graphs ------------------------------------------------------
    def replace(self, lengths=None, bond_flux=None, potentials=None):
        return MetricGraph(self.vertex_names, self.bond_ids, self.bond_ends,
                           self.lengths if lengths is None else lengths,
                           self.bond_flux if bond_flux is None else bond_flux,
                           self.potentials if potentials is None else tuple(potentials))

    def __repr__(self):
        return f"MetricGraph(V={self.V}, B={self.B}, L={self.total_length:g})"


def build_graph(spec: GraphSpec) -> MetricGraph:
    """Validate a :class:`GraphSpec` and build the canonical :class:`MetricGraph`."""
    names = list(spec.vertices)
    if not names:
        raise GraphError("graph has no vertices")
    if len(set(names)) != len(names):
        raise GraphError("duplicate vertex name")
    if not spec.bonds:
        raise GraphError("graph has no bonds")
    seen = set()
    ends, lengths, fluxes, pots = [], [], [], []
    for b in spec.bonds:
        if b.id in seen:
            raise GraphError(f"duplicate bond id {b.id!r}")
        seen.add(b.id)
        for end in (b.tail, b.head):
            if end not in names:
                raise GraphError(f"bond {b.id!r}: unknown vertex {end!r}")
        if not (b.length > 0 and math.isfinite(b.length)):
            raise GraphError(f"bond {b.id!r}: length must be positive, got {b.length!r}")
        pot = b.potential
        if pot.kind == "piecewise_constant" and pot.breakpoints:
            if pot.breakpoints[0] <= 0 or pot.breakpoints[-1] >= b.length:
                raise GraphError(f"bond {b.id!r}: potential breakpoints must lie inside (0, length)")
        ends.append((names.index(b.tail), names.index(b.head)))
        lengths.append(float(b.length))
        fluxes.append(float(b.flux))
        pots.append(pot)
    g = MetricGraph(tuple(names), tuple(b.id for b in spec.bonds), tuple(ends),
                    np.array(lengths), np.array(fluxes), tuple(pots))
    isolated = [names[v] for v, m in enumerate(g.valency) if m == 0]
    if isolated:
        raise GraphError(f"isolated vertices are not allowed: {isolated}")
    return g


def graph_from_edges(edges, lengths=1.0, fluxes=0.0, potentials=None, vertices=None) -> MetricGraph:
    """Shortcut: ``edges`` is a list of ``(tail, head)`` vertex labels."""
    edges = list(edges)
    if vertices is None:
        vertices = []
        for e in edges:
            for v in e:
                if v not in vertices:
                    vertices.append(v)
    n = len(edges)
    lengths = np.broadcast_to(np.asarray(lengths, dtype=float), (n,))
    fluxes = np.broadcast_to(np.asarray(fluxes, dtype=float), (n,))
    potentials = potentials or [PotentialSpec()] * n
    bonds = [BondSpec(f"b{i}", str(t), str(h), float(lengths[i]), float(fluxes[i]), potentials[i])
             for i, (t, h) in enumerate(edges)]
    return build_graph(GraphSpec.make([str(v) for v in vertices], bonds))


def wire_graph(L=1.0, potential=None):
    return graph_from_edges([("A", "B")], L, potentials=[potential] if potential else None)


def ring_graph(L=1.0, theta=0.0, potential=None):
    return graph_from_edges([("O", "O")], L, theta, potentials=[potential] if potential else None)


def star_graph(lengths):
    lengths = list(lengths)
    return graph_from_edges([("O", f"E{i}") for i in range(len(lengths))], lengths)


def complete_graph(n, length=1.0, fluxes=0.0):
    edges = [(f"v{i}", f"v{j}") for i in range(n) for j in range(i + 1, n)]
    return graph_from_edges(edges, length, fluxes)


# ---------------------------------------------------------------------------
# boundary conditions
# ---------------------------------------------------------------------------

def delta_block(m, lam):
    """C, D blocks of a delta-coupling; ``lam=inf`` gives the Dirichlet rows."""
    C = np.zeros((m, m), dtype=complex)
    D = np.zeros((m, m), dtype=complex)
    if math.isinf(lam):
        C[0, 0] = -1.0
    else:
        C[0, 0] = -lam
        D[0, :] = 1.0
    for i in range(1, m):
        C[i, 0] = -1.0
        C[i, i] = 1.0
    return C, D


def delta_prime_block(m, mu):
    """C, D blocks of a delta'_s coupling; ``mu=inf`` gives the Neumann rows."""
    C = np.zeros((m, m), dtype=complex)
    D = np.zeros((m, m), dtype=complex)
    if math.isinf(mu):
        D[0, 0] = -1.0
    else:
        C[0, :] = 1.0
        D[0, 0] = -mu
    for i in range(1, m):
        D[i, 0] = -1.0
        D[i, i] = 1.0
    return C, D


def vertex_blocks(cond: VertexCondition, m):
    if cond.kind == "delta":
        return delta_block(m, cond.value)
    if cond.kind == "delta_prime":
        return delta_prime_block(m, cond.value)
    C = np.array(cond.C, dtype=complex)
    D = np.array(cond.D, dtype=complex)
    if C.shape != (m, m) or D.shape != (m, m):
        raise InputError(f"general boundary blocks must be {m}x{m}, got {C.shape} and {D.shape}")
    return C, D


@dataclass(frozen=True, eq=False)
class BoundaryConditions:
    C: np.ndarray
    D: np.ndarray
    graph: MetricGraph
    conditions: tuple

    @property
    def family(self):
        """'delta', 'delta_prime' or 'general' (mixed or explicit blocks)."""
        kinds = {c.kind for c in self.conditions}
        return kinds.pop() if len(kinds) == 1 else "general"

    @property
    def parameters(self):
        return np.array([c.value for c in self.conditions], dtype=float)

    def block(self, v):
        s = self.graph.block_slices[v]
        return self.C[s, s], self.D[s, s]

    def conjugated(self, perm):
        """Relabel arcs: row/column permutation ``perm`` applied to C and D."""
        P = np.asarray(perm)
        return BoundaryConditions(self.C[np.ix_(P, P)], self.D[np.ix_(P, P)], self.graph, self.conditions)


def boundary_conditions(graph: MetricGraph, conditions: Sequence[VertexCondition]) -> BoundaryConditions:
    conditions = tuple(conditions)
    if len(conditions) != graph.V:
        raise InputError(f"need one vertex condition per vertex ({graph.V}), got {len(conditions)}")
    n = graph.n_arcs
    C = np.zeros((n, n), dtype=complex)
    D = np.zeros((n, n), dtype=complex)
    for v, (cond, s) in enumerate(zip(conditions, graph.block_slices)):
        Cb, Db = vertex_blocks(cond, int(graph.valency[v]))
        C[s, s] = Cb
        D[s, s] = Db
    C.setflags(write=False)
    D.setflags(write=False)
    return BoundaryConditions(C, D, graph, conditions)


def _per_vertex(graph, values, name):
    values = np.broadcast_to(np.asarray(values, dtype=float), (graph.V,))
    if np.any(np.isnan(values)):
        raise InputError(f"{name} must be real numbers or inf")
    return values


def delta_coupling_bc(graph: MetricGraph, lambdas=0.0) -> BoundaryConditions:
    lam = _per_vertex(graph, lambdas, "lambda")
    return boundary_conditions(graph, [VertexCondition.delta(x) for x in lam])


def delta_prime_bc(graph: MetricGraph, mus=0.0) -> BoundaryConditions:
    mu = _per_vertex(graph, mus, "mu")
    return boundary_conditions(graph, [VertexCondition.delta_prime(x) for x in mu])


def spec_boundary_conditions(graph: MetricGraph, spec: GraphSpec) -> BoundaryConditions:
    return boundary_conditions(graph, [spec.condition(v) for v in graph.vertex_names])


@dataclass(frozen=True)
class BCReport:
    hermitian_residual: float
    rank: int
    expected_rank: int
    singular_values: np.ndarray
    block_diagonal: bool
    hermitian_ok: bool
    rank_ok: bool

    @property
    def ok(self):
        return self.hermitian_ok and self.rank_ok and self.block_diagonal

    def lines(self):
        return [
            ("hermiticity", self.hermitian_ok, self.hermitian_residual),
            ("rank", self.rank_ok, float(self.expected_rank - self.rank)),
            ("block_diagonal", self.block_diagonal, 0.0),
        ]


def validate_bc(bc, D=None, graph=None, tol=1e-10) -> BCReport:
    """Check CD^+ = DC^+ and rank(C, D) = 2B; also block structure when a graph is known."""
    if isinstance(bc, BoundaryConditions):
        C, D, graph = bc.C, bc.D, bc.graph
    else:
        C = np.asarray(bc, dtype=complex)
        D = np.asarray(D, dtype=complex)
    if C.ndim != 2 or C.shape[0] != C.shape[1] or C.shape != D.shape:
        raise InputError(f"C and D must be equal square matrices, got {C.shape} and {D.shape}")
    n = C.shape[0]
    if graph is not None and n != graph.n_arcs:
        raise InputError(f"matrices are {n}x{n} but the graph has {graph.n_arcs} arcs")
    scale = max(1.0, np.linalg.norm(C), np.linalg.norm(D))
    herm = float(np.linalg.norm(C @ D.conj().T - D @ C.conj().T)) / scale**2
    sv = np.linalg.svd(np.hstack([C, D]), compute_uv=False)
    rank = int(np.sum(sv > tol * scale))
    block = True
    if graph is not None:
        mask = np.zeros((n, n), dtype=bool)
        for s in graph.block_slices:
            mask[s, s] = True
        block = not (np.any(np.abs(C[~mask]) > 0) or np.any(np.abs(D[~mask]) > 0))
    return BCReport(herm, rank, n, sv, block, herm < tol, rank == n)
