"""The 2B x 2B arc matrices M, N, R and Q at a given spectral parameter."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .bond_basis import SpectralParameter, graph_basis
from .errors import SingularMatrixError
from .graph_model import BoundaryConditions, MetricGraph

COND_LIMIT = 1e13


def _arc_pairs(graph: MetricGraph):
    """(arc, reversed arc, bond, side) with side 0 for forward arcs."""
    rev = graph.reversal
    return [(i, int(rev[i]), a.bond, 0 if a.forward else 1) for i, a in enumerate(graph.arcs)]


def _phases(graph):
    # e^{i theta_abar} for row a
    return np.exp(1j * graph.arc_flux[graph.reversal])


def assemble_M(graph: MetricGraph, basis, gamma=None) -> np.ndarray:
    """M_ab = delta_ab f'_a(0) - delta_{a,bbar} f'(l) e^{i theta_abar}."""
    n = graph.n_arcs
    M = np.zeros((n, n), dtype=complex)
    ph = _phases(graph)
    for i, j, b, side in _arc_pairs(graph):
        M[i, i] = basis[b].fp0[side]
        M[i, j] = -basis[b].fpl * ph[i]
    return M


def assemble_dM(graph: MetricGraph, basis) -> np.ndarray:
    """Derivative of M with respect to gamma."""
    n = graph.n_arcs
    dM = np.zeros((n, n), dtype=complex)
    ph = _phases(graph)
    for i, j, b, side in _arc_pairs(graph):
        dM[i, i] = basis[b].dfp0[side]
        dM[i, j] = -basis[b].dfpl * ph[i]
    return dM


def assemble_N(graph: MetricGraph, basis, gamma=None) -> np.ndarray:
    """N_ab = delta_ab g_a(0) + delta_{a,bbar} g(l) e^{i theta_abar}."""
    n = graph.n_arcs
    N = np.zeros((n, n), dtype=complex)
    ph = _phases(graph)
    for i, j, b, side in _arc_pairs(graph):
        N[i, i] = basis[b].g0[side]
        N[i, j] = basis[b].gl * ph[i]
    return N


def assemble_dN(graph: MetricGraph, basis) -> np.ndarray:
    n = graph.n_arcs
    dN = np.zeros((n, n), dtype=complex)
    ph = _phases(graph)
    for i, j, b, side in _arc_pairs(graph):
        dN[i, i] = basis[b].dg0[side]
        dN[i, j] = basis[b].dgl * ph[i]
    return dN


def assemble_R(graph: MetricGraph, basis, gamma=None) -> np.ndarray:
    """R_ab = delta_ab r_a + delta_{a,bbar} t e^{i theta_abar}."""
    n = graph.n_arcs
    R = np.zeros((n, n), dtype=complex)
    ph = _phases(graph)
    for i, j, b, side in _arc_pairs(graph):
        R[i, i] = basis[b].r[side]
        R[i, j] = basis[b].t * ph[i]
    return R


def assemble_Q(bc: BoundaryConditions, gamma) -> np.ndarray:
    """Q = (-C + sqrt(gamma) D)^{-1} (C + sqrt(gamma) D), solved vertex by vertex."""
    k = SpectralParameter.of(gamma).sqrt_gamma
    graph = bc.graph
    n = graph.n_arcs
    Q = np.zeros((n, n), dtype=complex)
    for v, s in enumerate(graph.block_slices):
        C, D = bc.C[s, s], bc.D[s, s]
        lhs = -C + k * D
        if np.linalg.cond(lhs) > COND_LIMIT:
            raise SingularMatrixError(
                f"vertex {graph.vertex_names[v]!r}: -C + sqrt(gamma) D is singular at gamma={complex(gamma)}",
                graph.vertex_names[v])
        Q[s, s] = np.linalg.solve(lhs, C + k * D)
    return Q


class ArcMatrices:
    """M, N, R, Q of a graph at one gamma; each built on first access."""

    def __init__(self, graph: MetricGraph, bc: BoundaryConditions | None, gamma, basis=None):
        self.graph = graph
        self.bc = bc
        self.gamma = SpectralParameter.of(gamma)
        self.basis = basis if basis is not None else graph_basis(graph, self.gamma)

    @cached_property
    def M(self):
        return assemble_M(self.graph, self.basis)

    @cached_property
    def N(self):
        return assemble_N(self.graph, self.basis)

    @cached_property
    def R(self):
        return assemble_R(self.graph, self.basis)

    @cached_property
    def Q(self):
        if self.bc is None:
            raise ValueError("Q needs boundary conditions")
        return assemble_Q(self.bc, self.gamma)

    @cached_property
    def dM(self):
        return assemble_dM(self.graph, self.basis)

    @cached_property
    def dN(self):
        return assemble_dN(self.graph, self.basis)

    @property
    def log_neg_inv_fpl(self):
        """Sum over bonds of log(-1/f'(l))."""
        return sum(d.log_neg_inv_fpl for d in self.basis)

    @property
    def log_neg_inv_gl(self):
        return sum(d.log_neg_inv_gl for d in self.basis)


def arc_matrices(graph, bc, gamma, basis=None) -> ArcMatrices:
    return ArcMatrices(graph, bc, gamma, basis)


@dataclass(frozen=True)
class IdentityReport:
    residuals: dict

    @property
    def max_residual(self):
        return max(self.residuals.values()) if self.residuals else 0.0


def _relmat(X, Y):
    s = max(np.max(np.abs(X)), np.max(np.abs(Y)), 1e-300)
    return float(np.max(np.abs(X - Y)) / s)


def _rel(x, y):
    s = max(abs(x), abs(y))
    return abs(x - y) / s if s > 0 else abs(x - y)


def matrix_identities(am: ArcMatrices) -> IdentityReport:
    """Residuals of N = M^-1, det M = prod f'(l)/g(l), the Cayley form of R,
    prod(-f'(l)) det(1+R) = 2^B gamma^(B/2) prod t and, on the spectrum axis, Q unitarity."""
    g = am.graph
    k = am.gamma.sqrt_gamma
    res = {}
    M, N, R = am.M, am.N, am.R
    one = np.eye(g.n_arcs)
    res["N_inverse"] = _relmat(N @ M, one)
    detM = np.linalg.det(M)
    prod = np.prod([d.fpl / d.gl for d in am.basis])
    res["detM"] = _rel(detM, prod)
    res["detM_detN"] = abs(detM * np.linalg.det(N) - 1.0)
    res["cayley"] = _relmat(R @ (k * one - M), k * one + M)
    lhs = np.prod([-d.fpl for d in am.basis]) * np.linalg.det(one + R)
    rhs = (2 * k) ** g.B * np.prod([d.t for d in am.basis])
    res["useful"] = _rel(lhs, rhs)
    if am.bc is not None and abs(k.real) < 1e-14 * max(abs(k), 1.0):
        Q = am.Q
        res["Q_unitary"] = _relmat(Q.conj().T @ Q, one)
    return IdentityReport(res)
