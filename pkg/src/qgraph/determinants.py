"""Spectral determinant S(gamma) in its several representations, and the
zeta-regularised determinants.

All representations are evaluated as complex logarithms first and only then
exponentiated, so huge prefactors (``e^{sqrt(gamma) L}``) never overflow on
their own.  Every public function takes ``log=True`` to return that logarithm.

Representations
---------------
arc-f       (-1)^V prod(-1/f'(l)) det(C + D M)
arc-g       (-1)^V prod(-1/g(l)) det(C N + D)
scattering  (-1)^V prod(-1/f'(l)) det(C - kD) det(1 - QR) / det(1 + R)
vertex      prod(-1/f'(l)) det(vertex matrix)      (delta family)
            prod(-1/g(l))  det(vertex matrix)      (delta' family)
transfer    (-1)^V det of the 4B x 4B system [[C, D], [T1, T2]] built from
            the bond fundamental matrices; entire in gamma, used for spectra
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .arc_matrices import ArcMatrices
from .bond_basis import SpectralParameter, graph_basis
from .errors import InputError, SingularMatrixError
from .graph_model import BoundaryConditions, MetricGraph

FORMULAS = ("arc-f", "arc-g", "scattering", "vertex", "transfer")


def _logdet(X):
    if X.shape[0] == 0:
        return 0j
    sign, logabs = np.linalg.slogdet(X)
    if sign == 0:
        return complex(-np.inf)
    return complex(logabs + 1j * cmath.phase(sign))


def _out(logval, log):
    return logval if log else cmath.exp(logval)


def _sign_V(V):
    return 1j * math.pi * (V % 2)


def _ctx(graph, bc, gamma, basis):
    gamma = SpectralParameter.of(gamma)
    if basis is None:
        basis = graph_basis(graph, gamma)
    return gamma, basis


# ---------------------------------------------------------------------------
# arc representations
# ---------------------------------------------------------------------------

def spectral_det_arc_f(graph: MetricGraph, bc: BoundaryConditions, gamma, log=False, basis=None):
    gamma, basis = _ctx(graph, bc, gamma, basis)
    am = ArcMatrices(graph, bc, gamma, basis)
    val = _sign_V(graph.V) + am.log_neg_inv_fpl + _logdet(bc.C + bc.D @ am.M)
    return _out(val, log)


def spectral_det_arc_g(graph: MetricGraph, bc: BoundaryConditions, gamma, log=False, basis=None):
    gamma, basis = _ctx(graph, bc, gamma, basis)
    am = ArcMatrices(graph, bc, gamma, basis)
    val = _sign_V(graph.V) + am.log_neg_inv_gl + _logdet(bc.C @ am.N + bc.D)
    return _out(val, log)


def _bond_one_plus_R(graph, basis):
    out = []
    for b, d in enumerate(basis):
        r, t = d.r, d.t
        out.append((1 + r[0]) * (1 + r[1]) - t * t)
    return out


def spectral_det_scattering(graph: MetricGraph, bc: BoundaryConditions, gamma, log=False, basis=None):
    gamma, basis = _ctx(graph, bc, gamma, basis)
    am = ArcMatrices(graph, bc, gamma, basis)
    k = gamma.sqrt_gamma
    dets = _bond_one_plus_R(graph, basis)
    for b, d in enumerate(dets):
        if abs(d) < 1e-13:
            raise SingularMatrixError(f"det(1 + R) vanishes on bond {graph.bond_ids[b]!r}")
    one = np.eye(graph.n_arcs)
    val = (_sign_V(graph.V) + am.log_neg_inv_fpl + _logdet(bc.C - k * bc.D)
           + _logdet(one - am.Q @ am.R) - sum(cmath.log(d) for d in dets))
    return _out(val, log)


# ---------------------------------------------------------------------------
# vertex representations
# ---------------------------------------------------------------------------

def _per_vertex(graph, values):
    return np.broadcast_to(np.asarray(values, dtype=float), (graph.V,))


def vertex_matrix_continuous(graph: MetricGraph, lambdas, gamma, basis=None, reduce=True):
    """V x V matrix of the delta family.

    Diagonal: lambda - sum of f'_a(0) over arcs leaving the vertex; each arc
    a contributes f'(l) e^{-i theta_a} at (tail, head), loops included.
    With ``reduce`` the rows and columns of Dirichlet (lambda = inf) vertices
    are dropped.
    """
    gamma, basis = _ctx(graph, None, gamma, basis)
    lam = _per_vertex(graph, lambdas)
    W = np.zeros((graph.V, graph.V), dtype=complex)
    flux = graph.arc_flux
    for i, a in enumerate(graph.arcs):
        d = basis[a.bond]
        W[a.tail, a.tail] -= d.fp0[0 if a.forward else 1]
        W[a.tail, a.head] += d.fpl * np.exp(-1j * flux[i])
    finite = ~np.isinf(lam)
    W[finite, finite] += lam[finite]
    if reduce:
        return W[np.ix_(finite, finite)]
    return W


def vertex_matrix_derivative(graph: MetricGraph, mus, gamma, basis=None, reduce=True):
    """V x V matrix of the delta' family: mu - sum g_a(0) on the diagonal,
    -g(l) e^{-i theta_a} per arc at (tail, head).  Neumann (mu = inf) vertices are dropped."""
    gamma, basis = _ctx(graph, None, gamma, basis)
    mu = _per_vertex(graph, mus)
    W = np.zeros((graph.V, graph.V), dtype=complex)
    flux = graph.arc_flux
    for i, a in enumerate(graph.arcs):
        d = basis[a.bond]
        W[a.tail, a.tail] -= d.g0[0 if a.forward else 1]
        W[a.tail, a.head] -= d.gl * np.exp(-1j * flux[i])
    finite = ~np.isinf(mu)
    W[finite, finite] += mu[finite]
    if reduce:
        return W[np.ix_(finite, finite)]
    return W


def spectral_det_vertex_continuous(graph, lambdas, gamma, log=False, basis=None):
    gamma, basis = _ctx(graph, None, gamma, basis)
    W = vertex_matrix_continuous(graph, lambdas, gamma, basis)
    val = sum(d.log_neg_inv_fpl for d in basis) + _logdet(W)
    return _out(val, log)


def spectral_det_vertex_derivative(graph, mus, gamma, log=False, basis=None):
    gamma, basis = _ctx(graph, None, gamma, basis)
    W = vertex_matrix_derivative(graph, mus, gamma, basis)
    val = sum(d.log_neg_inv_gl for d in basis) + _logdet(W)
    return _out(val, log)


def spectral_det_vertex(graph, bc: BoundaryConditions, gamma, log=False, basis=None):
    fam = bc.family
    if fam == "delta":
        return spectral_det_vertex_continuous(graph, bc.parameters, gamma, log, basis)
    if fam == "delta_prime":
        return spectral_det_vertex_derivative(graph, bc.parameters, gamma, log, basis)
    raise InputError("the vertex representation needs a pure delta or delta' boundary condition")


# ---------------------------------------------------------------------------
# pole-free transfer representation
# ---------------------------------------------------------------------------

def transfer_matrix(graph: MetricGraph, bc: BoundaryConditions, gamma, basis=None):
    """Scaled 4B x 4B system in the unknowns (psi(0), psi'(0)) of every arc.

    Returns (matrix, log of the removed scale).  Its determinant is an entire
    function of gamma and its null space gives the eigenfunctions.
    """
    gamma, basis = _ctx(graph, bc, gamma, basis)
    n = graph.n_arcs
    X = np.zeros((2 * n, 2 * n), dtype=complex)
    X[:n, :n] = bc.C
    X[:n, n:] = bc.D
    flux = graph.arc_flux
    scale = 0.0
    for b, d in enumerate(basis):
        i, j = graph.arc(b, True), graph.arc(b, False)
        e = math.exp(-d.log_scale)
        ph = cmath.exp(1j * flux[j])
        A, Bv, Ap, Bp = d.A, d.Bv, d.Ap, d.Bp
        # value and derivative at the end of arc i match the reversed arc j at its start
        X[n + i, i] = A
        X[n + i, j] = -e * ph
        X[n + i, n + i] = Bv
        X[n + j, i] = Ap / ph
        X[n + j, n + i] = Bp / ph
        X[n + j, n + j] = e
        scale += 2 * d.log_scale
    return X, scale


def spectral_det_transfer(graph, bc, gamma, log=False, basis=None):
    X, scale = transfer_matrix(graph, bc, gamma, basis)
    return _out(_sign_V(graph.V) + scale + _logdet(X), log)


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

def spectral_det(graph, bc, gamma, formula="arc-f", log=False, basis=None):
    gamma = SpectralParameter.of(gamma)
    if basis is None:
        basis = graph_basis(graph, gamma)
    fn = {
        "arc-f": spectral_det_arc_f,
        "arc-g": spectral_det_arc_g,
        "scattering": spectral_det_scattering,
        "vertex": spectral_det_vertex,
        "transfer": spectral_det_transfer,
    }.get(formula)
    if fn is None:
        raise InputError(f"unknown formula {formula!r}; choose from {', '.join(FORMULAS)}")
    return fn(graph, bc, gamma, log=log, basis=basis)


def all_representations(graph, bc, gamma):
    """Values of every applicable representation and their largest pairwise relative difference."""
    gamma = SpectralParameter.of(gamma)
    basis = graph_basis(graph, gamma)
    names = ["arc-f", "arc-g", "scattering", "transfer"]
    if bc.family in ("delta", "delta_prime"):
        names.insert(3, "vertex")
    vals = {nm: spectral_det(graph, bc, gamma, nm, log=True, basis=basis) for nm in names}
    return vals, max_log_residual(list(vals.values()))


def max_log_residual(logs):
    """Maximum pairwise relative difference of values given by their logarithms."""
    worst = 0.0
    for i in range(len(logs)):
        for j in range(i + 1, len(logs)):
            worst = max(worst, relative_from_logs(logs[i], logs[j]))
    return worst


def relative_from_logs(la, lb):
    """|a - b| / max(|a|, |b|) for a = e^la, b = e^lb, computed without overflow."""
    if la.real < lb.real:
        la, lb = lb, la
    if not np.isfinite(la.real):
        return 0.0 if la == lb else math.inf
    return abs(1 - cmath.exp(lb - la))


# ---------------------------------------------------------------------------
# zeta-regularised determinants
# ---------------------------------------------------------------------------

def _log_prod_m(graph):
    return float(np.sum(np.log(graph.valency)))


def zeta_det_continuous(graph, lambdas, gamma, log=False, basis=None):
    """prod(-2/f'(l)) det(vertex matrix) / prod m."""
    gamma, basis = _ctx(graph, None, gamma, basis)
    W = vertex_matrix_continuous(graph, lambdas, gamma, basis)
    val = graph.B * math.log(2) + sum(d.log_neg_inv_fpl for d in basis) + _logdet(W) - _log_prod_m(graph)
    return _out(val, log)


def zeta_det_derivative(graph, mus, gamma, log=False, basis=None):
    """prod(-2/g(l)) det(vertex matrix) / prod m."""
    gamma, basis = _ctx(graph, None, gamma, basis)
    W = vertex_matrix_derivative(graph, mus, gamma, basis)
    val = graph.B * math.log(2) + sum(d.log_neg_inv_gl for d in basis) + _logdet(W) - _log_prod_m(graph)
    return _out(val, log)


@dataclass(frozen=True)
class ZetaGeneral:
    value: complex
    scattering_form: complex
    residual: float
    flagged_vertices: tuple  # Dirichlet/Neumann-marked vertices normalised by their combinatorial valency


def zeta_det_general(graph, bc: BoundaryConditions, gamma, basis=None) -> ZetaGeneral:
    """Conjectured zeta determinant for general vertex conditions, in two forms.

    f form:          (-1)^V / prod m * prod(-2/f'(l)) det(C + D M)
    scattering form: det(g^{-1/4} C - g^{1/4} D) / (prod(-m) sqrt(prod R_{a,abar})) det(1 - QR)
    with sqrt(prod R_{a,abar}) taken as prod over bonds of t, the branch that
    is positive at large real gamma.
    """
    gamma, basis = _ctx(graph, bc, gamma, basis)
    am = ArcMatrices(graph, bc, gamma, basis)
    k = gamma.sqrt_gamma
    lv = (_sign_V(graph.V) - _log_prod_m(graph) + graph.B * math.log(2)
          + am.log_neg_inv_fpl + _logdet(bc.C + bc.D @ am.M))
    n = graph.n_arcs
    q = cmath.sqrt(k)
    log_t = sum(cmath.log(d.t) for d in basis)
    ls = (_logdet(bc.C / q - q * bc.D) - _sign_V(graph.V) - _log_prod_m(graph) - log_t
          + _logdet(np.eye(n) - am.Q @ am.R))
    flagged = tuple(graph.vertex_names[v] for v, c in enumerate(bc.conditions) if c.is_infinite)
    return ZetaGeneral(cmath.exp(lv), cmath.exp(ls), relative_from_logs(lv, ls), flagged)


def zeta_det(graph, bc: BoundaryConditions, gamma, log=False, basis=None):
    fam = bc.family
    if fam == "delta":
        return zeta_det_continuous(graph, bc.parameters, gamma, log, basis)
    if fam == "delta_prime":
        return zeta_det_derivative(graph, bc.parameters, gamma, log, basis)
    z = zeta_det_general(graph, bc, gamma, basis)
    return cmath.log(z.value) if log else z.value


# ---------------------------------------------------------------------------
# ratios and asymptotics
# ---------------------------------------------------------------------------

def gf_ratio(graph, bc, gamma, gamma0, formula="arc-f"):
    """S(gamma)/S(gamma0), which does not depend on the representation."""
    return cmath.exp(spectral_det(graph, bc, gamma, formula, log=True)
                     - spectral_det(graph, bc, gamma0, formula, log=True))


def large_gamma_asymptote(graph, bc, gamma, log=False):
    """(-1)^V 2^-B gamma^(-B/2) e^{sqrt(gamma) L} det(C - sqrt(gamma) D)."""
    gamma = SpectralParameter.of(gamma)
    k = gamma.sqrt_gamma
    val = (_sign_V(graph.V) - graph.B * math.log(2) - graph.B * cmath.log(k)
           + k * graph.total_length + _logdet(bc.C - k * bc.D))
    return _out(val, log)


def assert_real(z, tol=1e-10):
    """Return z.real, insisting the imaginary part is negligible."""
    z = complex(z)
    if abs(z.imag) > tol * max(abs(z), 1e-300):
        raise ArithmeticError(f"expected a real value, got {z}")
    return z.real
