"""Green functions, secular function and eigenvalues on the energy axis.

Eigenvalues are the zeros of the pole-free transfer determinant
``S(-k^2)`` (real for real k).  Simple zeros are bracketed by sign changes;
zeros of even order are found as minima of the smallest singular value of the
row-normalised transfer system, whose null space also gives multiplicities.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.special import erfc

from .arc_matrices import ArcMatrices
from .bond_basis import BondSolver, SpectralParameter, graph_basis
from .determinants import (
    spectral_det,
    spectral_det_transfer,
    transfer_matrix,
    vertex_matrix_continuous,
    vertex_matrix_derivative,
)
from .errors import InputError
from .graph_model import BoundaryConditions, MetricGraph


# ---------------------------------------------------------------------------
# Green functions
# ---------------------------------------------------------------------------

def green_trace(graph: MetricGraph, bc: BoundaryConditions, gamma):
    """G(gamma) = tr[(C + DM)^-1 D dM/dgamma] - d/dgamma sum ln(-f'(l)) = sum_n 1/(gamma + E_n)."""
    gamma = SpectralParameter.of(gamma)
    am = ArcMatrices(graph, bc, gamma)
    X = np.linalg.solve(bc.C + bc.D @ am.M, bc.D)
    return complex(np.trace(X @ am.dM) + sum(d.dlog_neg_inv_fpl for d in am.basis))


class GreenDiagonal:
    """Coinciding-point Green function on every bond at one gamma."""

    def __init__(self, graph: MetricGraph, bc: BoundaryConditions, gamma):
        self.graph = graph
        self.gamma = SpectralParameter.of(gamma)
        self.solvers = [BondSolver(graph.lengths[b], graph.potentials[b], self.gamma)
                        for b in range(graph.B)]
        self.basis = [s.basis(graph.bond_ids[b]) for b, s in enumerate(self.solvers)]
        am = ArcMatrices(graph, bc, self.gamma, self.basis)
        self.X = np.linalg.solve(bc.C + bc.D @ am.M, bc.D)

    def __call__(self, arc, x):
        g = self.graph
        a = g.arcs[arc]
        b = a.bond
        l = g.lengths[b]
        # position measured along the forward arc of the bond
        xf = x if a.forward else l - x
        i, j = g.arc(b, True), g.arc(b, False)
        data = self.basis[b]
        fa, fb = self.solvers[b].f_values(xf, data)
        th = g.arc_flux
        X = self.X
        W = -data.fpl
        return complex(-X[i, i] * fa * fa - X[i, j] * fa * fb * np.exp(1j * th[i])
                       - X[j, i] * fa * fb * np.exp(1j * th[j]) - X[j, j] * fb * fb
                       + fa * fb / W)

    def integrate(self, order=48):
        """Integral of the diagonal Green function over the whole graph."""
        xg, wg = np.polynomial.legendre.leggauss(order)
        total = 0j
        for b in range(self.graph.B):
            i = self.graph.arc(b, True)
            edges = [0.0, *(self.graph.potentials[b].breakpoints
                            if self.graph.potentials[b].kind == "piecewise_constant" else ()),
                     self.graph.lengths[b]]
            for x0, x1 in zip(edges, edges[1:]):
                n = max(1, int(math.ceil(x1 - x0)))
                for s in range(n):
                    a0 = x0 + (x1 - x0) * s / n
                    a1 = x0 + (x1 - x0) * (s + 1) / n
                    xs = (a1 - a0) / 2 * xg + (a0 + a1) / 2
                    total += (a1 - a0) / 2 * sum(w * self(i, x) for w, x in zip(wg, xs))
        return total


def green_diagonal(graph, bc, gamma, arc, x):
    return GreenDiagonal(graph, bc, gamma)(arc, x)


def green_trace_fd(graph, bc, gamma, h=None, formula="arc-f"):
    """Central difference of ln S, the independent route to green_trace."""
    g = SpectralParameter.of(gamma).gamma
    h = h or max(1e-5, 1e-5 * abs(g))
    lp = spectral_det(graph, bc, g + h, formula, log=True)
    lm = spectral_det(graph, bc, g - h, formula, log=True)
    d = lp - lm
    d = complex(d.real, (d.imag + math.pi) % (2 * math.pi) - math.pi)
    return d / (2 * h)


# ---------------------------------------------------------------------------
# secular function
# ---------------------------------------------------------------------------

def secular_function(graph, bc, k, formula="transfer"):
    """Real function of the wavenumber vanishing exactly at the eigenvalues E = k^2.

    ``transfer`` (default) is S(-k^2) from the entire transfer determinant.
    ``vertex`` is the determinant of the Hermitian vertex matrix at -k^2,
    which has poles at bond Dirichlet (or Neumann) resonances.
    """
    gam = SpectralParameter.from_k(k)
    if formula == "transfer":
        return spectral_det_transfer(graph, bc, gam).real
    if formula == "vertex":
        if bc.family == "delta":
            W = vertex_matrix_continuous(graph, bc.parameters, gam)
        elif bc.family == "delta_prime":
            W = vertex_matrix_derivative(graph, bc.parameters, gam)
        else:
            raise InputError("vertex secular function needs delta or delta' conditions")
        return float(np.linalg.det(W).real) if W.size else 1.0
    raise InputError(f"unknown secular formula {formula!r}")


def _system(graph, bc, gam):
    X, _ = transfer_matrix(graph, bc, gam)
    n = np.linalg.norm(X, axis=1)
    n[n == 0] = 1.0
    return X / n[:, None]


def _sigma(graph, bc, gam):
    return np.linalg.svd(_system(graph, bc, gam), compute_uv=False)


# ---------------------------------------------------------------------------
# spectrum
# ---------------------------------------------------------------------------

@dataclass
class Spectrum:
    energies: np.ndarray          # distinct eigenvalues, ascending
    multiplicities: np.ndarray
    k_max: float
    diagnostics: list = field(default_factory=list)
    weyl_deviation: float = 0.0
    total_length: float = 0.0

    @property
    def k_values(self):
        """sqrt(E) for E >= 0, nan for bound states below zero."""
        E = self.energies
        return np.where(E >= 0, np.sqrt(np.abs(E)), np.nan)

    @property
    def expanded(self):
        """Eigenvalues repeated according to multiplicity."""
        return np.repeat(self.energies, self.multiplicities)

    def __len__(self):
        return int(np.sum(self.multiplicities))


@dataclass(frozen=True)
class SpectrumOptions:
    step: float | None = None       # grid step in k; default pi/(32 max l)
    refine: int = 16                # sub-grid points around suspicious cells
    xtol: float = 1e-14
    null_tol: float = 1e-8          # singular value threshold for the null space
    accept_tol: float = 1e-6        # minimum of sigma_min accepted as an eigenvalue
    zero_tol: float = 1e-7


def _nullity(graph, bc, gam, tol):
    s = _sigma(graph, bc, gam)
    return int(np.sum(s < tol * max(s[0], 1.0)))


def _scan(func, sig, a, b, step, opts):
    """Roots of func on [a, b]: sign changes plus minima of sig."""
    n = max(4, int(math.ceil((b - a) / step)) + 1)
    xs = np.linspace(a, b, n)
    fs = np.array([func(x) for x in xs])
    ss = np.array([sig(x) for x in xs])
    roots, minima = [], []
    cells = set()
    for i in range(n - 1):
        if fs[i] == 0.0:
            roots.append(xs[i])
        elif fs[i] * fs[i + 1] < 0:
            roots.append(brentq(func, xs[i], xs[i + 1], xtol=opts.xtol, rtol=4 * np.finfo(float).eps,
                                maxiter=200))
    if fs[-1] == 0.0:
        roots.append(xs[-1])
    af = np.abs(fs)
    for i in range(n):
        lo, hi = max(i - 1, 0), min(i + 1, n - 1)
        if ss[i] <= ss[lo] and ss[i] <= ss[hi]:
            cells.add(i)
        if af[i] <= af[lo] and af[i] <= af[hi]:
            cells.add(i)
    for i in sorted(cells):
        lo, hi = xs[max(i - 1, 0)], xs[min(i + 1, n - 1)]
        # fine sub-grid: catches close pairs of simple roots inside one cell
        sub = np.linspace(lo, hi, 2 * opts.refine + 1)
        fsub = np.array([func(x) for x in sub])
        for j in range(len(sub) - 1):
            if fsub[j] * fsub[j + 1] < 0:
                roots.append(brentq(func, sub[j], sub[j + 1], xtol=opts.xtol, maxiter=200))
        ssub = np.array([sig(x) for x in sub])
        for j in range(len(sub)):
            jl, jh = max(j - 1, 0), min(j + 1, len(sub) - 1)
            if ssub[j] <= ssub[jl] and ssub[j] <= ssub[jh] and ssub[j] < 1e-2:
                x, fx = _golden_min(sig, sub[jl], sub[jh], opts.xtol)
                if fx < opts.accept_tol:
                    minima.append(x)
    return roots + minima


def _golden_min(fn, a, b, tol):
    """Golden-section minimum of a unimodal function; sigma_min is V-shaped at a root,
    where parabolic steps stall."""
    r = (math.sqrt(5) - 1) / 2
    c, d = b - r * (b - a), a + r * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - r * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + r * (b - a)
            fd = fn(d)
    x = (a + b) / 2
    return x, fn(x)


def _dedup(roots, tol):
    """Keep the first of near-equal roots; sign-change roots come first in the input."""
    out = []
    for r in roots:
        if any(abs(r - o) < tol * max(1.0, abs(r)) for o in out):
            continue
        out.append(r)
    return sorted(out)


def negative_energy_bound(graph: MetricGraph, bc: BoundaryConditions):
    """Lower bound on the spectrum from the boundary quadratic form.

    The vertex form contributes <psi, L psi> with L = -P D^+ C P (P the
    projector on the range of D^*); with Lambda the largest negative part of L
    and s = min(l_min/2, 1/(2 Lambda)), E >= min V - 2 Lambda / s.
    """
    lam_neg = 0.0
    for v, s in enumerate(graph.block_slices):
        C, D = bc.C[s, s], bc.D[s, s]
        Dp = np.linalg.pinv(D, rcond=1e-12)
        P = Dp @ D
        L = -P @ Dp @ C @ P
        L = (L + L.conj().T) / 2
        ev = np.linalg.eigvalsh(L)
        lam_neg = max(lam_neg, float(-ev.min()))
    vmin = min(p.minimum(l) for p, l in zip(graph.potentials, graph.lengths))
    if lam_neg <= 0:
        return min(vmin, 0.0)
    s = min(float(np.min(graph.lengths)) / 2, 1 / (2 * lam_neg))
    return vmin - 2 * lam_neg / s


def find_spectrum(graph: MetricGraph, bc: BoundaryConditions, k_max, options: SpectrumOptions | None = None):
    """All eigenvalues E with E <= k_max^2 (including E <= 0), with multiplicities."""
    if not k_max > 0:
        raise InputError("k_max must be positive")
    opts = options or SpectrumOptions()
    lmax = float(np.max(graph.lengths))
    step = opts.step or math.pi / (32 * lmax)
    step = min(step, math.pi / (8 * lmax))
    diagnostics = []

    def f_pos(k):
        return spectral_det_transfer(graph, bc, SpectralParameter.from_k(k)).real

    def s_pos(k):
        return _sigma(graph, bc, SpectralParameter.from_k(k))[-1]

    def f_neg(kap):
        return spectral_det_transfer(graph, bc, SpectralParameter.of(kap * kap)).real

    def s_neg(kap):
        return _sigma(graph, bc, SpectralParameter.of(kap * kap))[-1]

    E, mult = [], []
    # zero mode
    n0 = _nullity(graph, bc, SpectralParameter.of(0.0), opts.null_tol)
    if n0:
        E.append(0.0)
        mult.append(n0)

    # positive energies
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        roots = _scan(f_pos, s_pos, 0.0, k_max, step, opts)
    for k in _dedup([r for r in roots if r > opts.zero_tol and r <= k_max], 1e-7):
        gam = SpectralParameter.from_k(k)
        m = _nullity(graph, bc, gam, opts.null_tol)
        if m == 0:
            m = 1
            diagnostics.append(f"root k={k:.12g}: null space not resolved, multiplicity set to 1")
        E.append(k * k)
        mult.append(m)
        if any(d.dirichlet_resonant for d in graph_basis(graph, gam)):
            diagnostics.append(f"k={k:.12g} coincides with a bond Dirichlet resonance; "
                               "the vertex-matrix secular function can miss this state")

    # negative energies
    emin = negative_energy_bound(graph, bc)
    if emin < 0:
        kap_max = math.sqrt(-emin) * 1.05 + 1e-3
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            roots = _scan(f_neg, s_neg, 0.0, kap_max, min(step, kap_max / 64), opts)
        for kap in _dedup([r for r in roots if r > opts.zero_tol], 1e-7):
            m = _nullity(graph, bc, SpectralParameter.of(kap * kap), opts.null_tol) or 1
            E.append(-kap * kap)
            mult.append(m)

    order = np.argsort(E)
    E = np.array(E, dtype=float)[order]
    mult = np.array(mult, dtype=int)[order]
    L = graph.total_length
    count = int(np.sum(mult))
    weyl = L * k_max / math.pi
    dev = count - weyl
    if abs(dev) > graph.n_arcs + graph.V + 2:
        diagnostics.append(f"eigenvalue count {count} deviates from the Weyl estimate {weyl:.2f}")
    return Spectrum(E, mult, float(k_max), diagnostics, float(dev), L)


def heat_trace_exact(spectrum: Spectrum, t):
    """(Z(t), truncation bound) from the eigenvalues, with a Weyl-density tail bound."""
    if not t > 0:
        raise InputError("t must be positive")
    Z = float(np.sum(spectrum.multiplicities * np.exp(-t * spectrum.energies)))
    emax = spectrum.k_max ** 2
    tail = spectrum.total_length / (2 * math.pi) * math.sqrt(math.pi / t) * erfc(math.sqrt(t * emax))
    return Z, float(tail)


def k_max_for_heat(t, eps=1e-13):
    """Wavenumber cutoff so that the heat-trace tail is below eps."""
    return math.sqrt(math.log(1 / eps) / t) + 2.0
