"""Bartholdi zeta function of a combinatorial graph and its specialisations.

Z(u, w)^{-1} = prod over primitive cycles (1 - (1 - w)^{n_R} u^{length})
is evaluated three ways: the arc determinant det(1 - u(B - wJ)), the vertex
determinant, and an explicit cycle count.  The count is a compiled
Lyndon-word walk when numba is importable and a Python walk otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import series as ser
from .arc_matrices import assemble_Q, assemble_R
from .bond_basis import SpectralParameter, graph_basis
from .determinants import vertex_matrix_continuous
from .errors import InputError, OrbitExplosionError
from .graph_model import MetricGraph, delta_coupling_bc, graph_from_edges
from .orbits import enumerate_primitive_orbits

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None


@dataclass(frozen=True, eq=False)
class CombGraph:
    graph: MetricGraph

    @classmethod
    def from_edges(cls, edges, vertices=None):
        return cls(graph_from_edges(edges, 1.0, vertices=vertices))

    @classmethod
    def from_metric(cls, graph):
        return cls(graph)

    @property
    def V(self):
        return self.graph.V

    @property
    def B(self):
        return self.graph.B

    @property
    def A(self):
        return self.graph.adjacency

    @property
    def Y(self):
        return np.diag(self.graph.valency)

    @property
    def Bmat(self):
        """B[i, j] = 1 when arc j ends where arc i begins."""
        g = self.graph
        return (g.tails[:, None] == g.heads[None, :]).astype(int)

    @property
    def J(self):
        n = self.graph.n_arcs
        J = np.zeros((n, n), dtype=int)
        J[np.arange(n), self.graph.reversal] = 1
        return J

    @property
    def has_loops(self):
        return any(t == h for t, h in self.graph.bond_ends)

    @property
    def is_simple(self):
        ends = [tuple(sorted(e)) for e in self.graph.bond_ends]
        return not self.has_loops and len(set(ends)) == len(ends)


def bartholdi_arc(cg: CombGraph, u, w):
    """Z(u, w)^{-1} = det(1 - u(B - wJ))."""
    K = cg.Bmat - w * cg.J
    return complex(np.linalg.det(np.eye(K.shape[0]) - u * K))


def bartholdi_vertex(cg: CombGraph, u, w):
    """(1 - (uw)^2)^{B-V} det((1 - (uw)^2) 1 - uA + w u^2 Y)."""
    x = 1 - (u * w) ** 2
    M = x * np.eye(cg.V) - u * cg.A + w * u * u * cg.Y
    return complex(x ** (cg.B - cg.V) * np.linalg.det(M))


def bass(cg: CombGraph, u):
    """w = 1: (1 - u^2)^{B-V} det(1 - uA + u^2 (Y - 1))."""
    M = np.eye(cg.V) - u * cg.A + u * u * (cg.Y - np.eye(cg.V))
    return complex((1 - u * u) ** (cg.B - cg.V) * np.linalg.det(M))


def ihara_regular(cg: CombGraph, u):
    """(q+1)-regular graphs: (1 - u^2)^{B-V} det(1 - uA + q u^2)."""
    m = cg.graph.valency
    if len(set(m.tolist())) != 1:
        raise InputError("graph is not regular")
    q = int(m[0]) - 1
    M = np.eye(cg.V) - u * cg.A + q * u * u * np.eye(cg.V)
    return complex((1 - u * u) ** (cg.B - cg.V) * np.linalg.det(M))


# ---------------------------------------------------------------------------
# power series in u
# ---------------------------------------------------------------------------

def _coerce_w(w, exact):
    return ser.to_exact(w) if exact else complex(w)


def bartholdi_arc_series(cg: CombGraph, w, order, exact=False):
    w = _coerce_w(w, exact)
    if exact:
        K = np.array([[Fraction(int(b)) - w * int(j) for b, j in zip(rb, rj)]
                      for rb, rj in zip(cg.Bmat, cg.J)], dtype=object)
    else:
        K = cg.Bmat - w * cg.J
    return ser.charpoly_series(K, order, exact)


def bartholdi_vertex_series(cg: CombGraph, w, order, exact=False):
    w = _coerce_w(w, exact)
    V = cg.V
    A, Y = cg.A, cg.graph.valency
    one = Fraction(1) if exact else 1.0
    mat = []
    for i in range(V):
        row = []
        for j in range(V):
            s = ser._zeros(order + 1, exact)
            if i == j:
                s[0] = one
                if order >= 2:
                    s[2] = -w * w + w * int(Y[i])
            if order >= 1:
                s[1] = -int(A[i, j]) * one
            row.append(s)
        mat.append(row)
    d = ser.det(mat)
    pref = ser.binomial_power(w * w, 2, cg.B - V, order, exact)
    return ser.mul(pref, d)


# ---------------------------------------------------------------------------
# explicit cycle counts
# ---------------------------------------------------------------------------

def _count_python(cg, order):
    counts = np.zeros((order + 1, order + 1), dtype=np.int64)
    for o in enumerate_primitive_orbits(cg.graph, max_arcs=order, cap=10 ** 8):
        counts[len(o.arcs), o.n_reflections] += 1
    return counts


if numba is not None:
    @numba.njit(cache=True)
    def _count_kernel(succ, nsucc, heads, tails, rev, N):  # pragma: no cover - compiled
        counts = np.zeros((N + 1, N + 1), dtype=np.int64)
        n = succ.shape[0]
        word = np.empty(N + 1, dtype=np.int64)
        per = np.empty(N + 2, dtype=np.int64)
        refl = np.empty(N + 2, dtype=np.int64)
        idx = np.empty(N + 1, dtype=np.int64)
        for s in range(n):
            word[0] = s
            per[1] = 1
            refl[1] = 0
            idx[0] = 0
            if heads[s] == tails[s]:
                r = 1 if rev[s] == s else 0
                counts[1, r] += 1
            k = 1
            while k > 0:
                last = word[k - 1]
                if k < N and idx[k - 1] < nsucc[last]:
                    c = succ[last, idx[k - 1]]
                    idx[k - 1] += 1
                    p = per[k]
                    ref = word[k - p]
                    if c < ref:
                        continue
                    word[k] = c
                    per[k + 1] = p if c == ref else k + 1
                    refl[k + 1] = refl[k] + (1 if c == rev[last] else 0)
                    idx[k] = 0
                    k += 1
                    if per[k] == k and heads[c] == tails[word[0]]:
                        r = refl[k] + (1 if word[0] == rev[c] else 0)
                        counts[k, r] += 1
                else:
                    k -= 1
        return counts


def _count_numba(cg, order):
    g = cg.graph
    n = g.n_arcs
    tails, heads = g.tails.astype(np.int64), g.heads.astype(np.int64)
    lists = [[b for b in range(n) if tails[b] == heads[a]] for a in range(n)]
    width = max(1, max(len(x) for x in lists))
    succ = np.full((n, width), -1, dtype=np.int64)
    nsucc = np.zeros(n, dtype=np.int64)
    for a, x in enumerate(lists):
        succ[a, : len(x)] = x
        nsucc[a] = len(x)
    return _count_kernel(succ, nsucc, heads, tails, g.reversal.astype(np.int64), order)


def primitive_cycle_counts(cg: CombGraph, order, use_numba=True):
    """counts[n, r]: primitive cycles with n arcs and r reflections (backtracking steps)."""
    if use_numba and numba is not None:
        return _count_numba(cg, order)
    return _count_python(cg, order)


def bartholdi_bruteforce(cg: CombGraph, w, order, exact=False, use_numba=True, cap=10 ** 9):
    """Series of prod_C (1 - (1 - w)^{n_R} u^l) up to u^order from explicit cycle counts."""
    counts = primitive_cycle_counts(cg, order, use_numba)
    if counts.sum() > cap:
        raise OrbitExplosionError(f"{counts.sum()} primitive cycles exceed the cap {cap}")
    w = _coerce_w(w, exact)
    one = Fraction(1) if exact else 1.0
    out = ser.constant(1, order, exact)
    for n in range(1, order + 1):
        for r in range(order + 1):
            N = int(counts[n, r])
            if N:
                c = (one - w) ** r
                out = ser.mul(out, ser.binomial_power(c, n, N, order, exact))
    return out


# ---------------------------------------------------------------------------
# bridge to the metric graph
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BridgeReport:
    gamma: float
    lambdas: np.ndarray
    det_metric: complex
    det_comb: complex
    det_residual: float
    vertex_residual: float
    transition_residual: float

    @property
    def max_residual(self):
        return max(self.det_residual, self.vertex_residual, self.transition_residual)


def metric_to_comb_bridge(graph: MetricGraph, u, w) -> BridgeReport:
    """Compare the metric machinery with the combinatorial matrices.

    With e^{-sqrt(gamma) l} = wu and lambda = (2w - m) sqrt(gamma):
    QR = u(B - wJ), and the vertex matrix equals
    2 sqrt(gamma)/(1 - (uw)^2) [diag(w + (m - w)(uw)^2) - uw A].
    """
    l = graph.lengths
    if not np.allclose(l, l[0], rtol=0, atol=1e-14):
        raise InputError("the bridge needs equal bond lengths")
    if graph.has_potential or np.any(graph.bond_flux != 0):
        raise InputError("the bridge needs V = 0 and no fluxes")
    x = u * w
    if not (0 < x < 1):
        raise InputError("need 0 < uw < 1 so that sqrt(gamma) is real and positive")
    k = -math.log(x) / l[0]
    gam = SpectralParameter.of(k * k)
    m = graph.valency
    lam = (2 * w - m) * k
    bc = delta_coupling_bc(graph, lam)
    basis = graph_basis(graph, gam)
    QR = assemble_Q(bc, gam) @ assemble_R(graph, basis)
    cg = CombGraph(graph)
    K = u * (cg.Bmat - w * cg.J)
    n = graph.n_arcs
    dm = complex(np.linalg.det(np.eye(n) - QR))
    dc = complex(np.linalg.det(np.eye(n) - K))
    W = vertex_matrix_continuous(graph, lam, gam, basis)
    Wc = 2 * k / (1 - x * x) * (np.diag(w + (m - w) * x * x) - x * cg.A)
    sc = max(np.max(np.abs(W)), 1e-300)
    return BridgeReport(
        k * k, lam, dm, dc,
        abs(dm - dc) / max(abs(dc), 1e-300),
        float(np.max(np.abs(W - Wc)) / sc),
        float(np.max(np.abs(QR - K)) / max(np.max(np.abs(K)), 1e-300)),
    )
