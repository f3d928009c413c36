"""Boundary data of the bond solution bases at a spectral parameter gamma.

Everything is built from the fundamental matrix of ``-psi'' + V psi = -gamma psi``
on one bond,

    Phi(x) = [[u1, u2], [u1', u2']],   u1(0)=1, u1'(0)=0, u2(0)=0, u2'(0)=1,

written ``Phi(l) = [[A, Bv], [Ap, Bp]]`` (det = 1).  The basis ``f_a`` (value 1
at the tail, 0 at the head), the basis ``g_a`` (slope 1 at the tail, 0 at the
head) and the scattering amplitudes r, t are explicit ratios of these four
numbers.  Piecewise constant potentials (including V=0) use exact products of
segment transfer matrices, which are entire functions of gamma; polynomial
potentials are integrated with an adaptive RK853 scheme.  Both routes carry the
gamma-derivative of Phi along (variational equation), so sum-rule checks have
an independent side.

Large |Re sqrt(gamma)| l makes cosh overflow, so Phi is stored scaled:
``Phi = exp(log_scale) * Phi_s``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DirichletResonance, IntegrationError, NeumannResonance
from .graphspec import PotentialSpec

RESONANCE_TOL = 1e-12


@dataclass(frozen=True)
class SpectralParameter:
    """gamma together with the one square root every module uses.

    Principal branch, except on the negative real axis where
    ``gamma = -k**2`` is read as ``-k**2 - i0`` and the root is ``-ik``.
    """

    gamma: complex
    sqrt_gamma: complex

    @classmethod
    def of(cls, gamma) -> "SpectralParameter":
        if isinstance(gamma, SpectralParameter):
            return gamma
        g = complex(gamma)
        if g.imag == 0.0 and g.real < 0.0:
            return cls(complex(g.real, 0.0), complex(0.0, -math.sqrt(-g.real)))
        return cls(g, cmath.sqrt(g))

    @classmethod
    def from_k(cls, k) -> "SpectralParameter":
        k = float(k)
        return cls(complex(-k * k, 0.0), complex(0.0, -k))

    @property
    def is_real(self):
        return self.gamma.imag == 0.0

    def __complex__(self):
        return self.gamma


# ---------------------------------------------------------------------------
# fundamental matrices
# ---------------------------------------------------------------------------

def _segment(zeta, h):
    """Scaled transfer matrix of a constant piece and its zeta-derivative.

    zeta = gamma + v.  Returns (T_s, dT_s, a) with T = exp(a) T_s.  Only
    z**2 = zeta h**2 enters, so the result is branch independent.
    """
    z = cmath.sqrt(zeta) * h
    a = abs(z.real)
    if abs(z) < 0.1:
        z2 = z * z
        c = 1 + z2 / 2 + z2 ** 2 / 24 + z2 ** 3 / 720 + z2 ** 4 / 40320
        sc = 1 + z2 / 6 + z2 ** 2 / 120 + z2 ** 3 / 5040 + z2 ** 4 / 362880
        F = 1 / 3 + z2 / 30 + z2 ** 2 / 840 + z2 ** 3 / 45360
        ea = math.exp(-a)
        c, sc, F = c * ea, sc * ea, F * ea
    else:
        ep, em = cmath.exp(z - a), cmath.exp(-z - a)
        c = (ep + em) / 2
        s = (ep - em) / 2
        sc = s / z
        F = (z * c - s) / z ** 3
    T = np.array([[c, h * sc], [zeta * h * sc, c]], dtype=complex)
    dT = np.array([[h * h * sc / 2, h ** 3 * F / 2],
                   [h * (sc + c) / 2, h * h * sc / 2]], dtype=complex)
    return T, dT, a


def _piecewise_fundamental(segments, gamma):
    Phi = np.eye(2, dtype=complex)
    dPhi = np.zeros((2, 2), dtype=complex)
    scale = 0.0
    for x0, x1, v in segments:
        T, dT, a = _segment(gamma + v, x1 - x0)
        Phi, dPhi = T @ Phi, dT @ Phi + T @ dPhi
        scale += a
        n = np.max(np.abs(Phi))
        if n > 0 and (n > 1e100 or n < 1e-100):
            Phi, dPhi = Phi / n, dPhi / n
            scale += math.log(n)
    return Phi, dPhi, scale


def _ode_solution(length, potential, gamma):
    """Integrate both fundamental solutions and their gamma-derivatives."""
    coef = np.asarray(potential.coefficients if potential.kind == "polynomial" else [0.0], dtype=float)
    pw = None if potential.kind != "piecewise_constant" else potential

    def V(x):
        if pw is not None:
            return float(pw(np.array([x]), length)[0])
        return np.polynomial.polynomial.polyval(x, coef)

    def rhs(x, y):
        q = V(x) + gamma
        return np.array([y[1], q * y[0], y[3], q * y[2],
                         y[5], q * y[4] + y[0], y[7], q * y[6] + y[2]])

    y0 = np.array([1, 0, 0, 1, 0, 0, 0, 0], dtype=complex)
    breaks = [0.0, *(potential.breakpoints if pw is not None else ()), length]
    pieces = []
    for x0, x1 in zip(breaks, breaks[1:]):
        sol = solve_ivp(rhs, (x0, x1), y0, method="DOP853", rtol=1e-12, atol=1e-14,
                        dense_output=True)
        if not sol.success:
            raise IntegrationError(f"bond integration failed: {sol.message}")
        pieces.append((x0, x1, sol.sol))
        y0 = sol.y[:, -1]
    return pieces, y0


def _state_to_matrices(y):
    Phi = np.array([[y[0], y[2]], [y[1], y[3]]], dtype=complex)
    dPhi = np.array([[y[4], y[6]], [y[5], y[7]]], dtype=complex)
    return Phi, dPhi


def _resolve_method(potential, method):
    if method == "auto":
        return "ode" if potential.kind == "polynomial" and not potential.is_constant else "exact"
    if method not in ("exact", "ode"):
        raise ValueError(f"unknown bond solver method {method!r}")
    if method == "exact" and potential.kind == "polynomial" and not potential.is_constant:
        raise ValueError("exact transfer matrices need a piecewise constant potential")
    return method


def _exact_segments(length, potential):
    if potential.kind == "polynomial":
        return [(0.0, length, potential.constant_value())]
    return potential.segments(length)


class BondSolver:
    """Fundamental solutions on one bond, at interior points as well."""

    def __init__(self, length, potential=None, gamma=0.0, method="auto"):
        self.length = float(length)
        self.potential = potential or PotentialSpec()
        self.gamma = SpectralParameter.of(gamma)
        self.method = _resolve_method(self.potential, method)
        g = self.gamma.gamma
        if self.method == "exact":
            self._segments = _exact_segments(self.length, self.potential)
            self.Phi, self.dPhi, self.log_scale = _piecewise_fundamental(self._segments, g)
        else:
            self._pieces, y = _ode_solution(self.length, self.potential, g)
            self.Phi, self.dPhi = _state_to_matrices(y)
            self.log_scale = 0.0

    def fundamental(self, x):
        """Unscaled Phi(x) and dPhi(x)/dgamma for 0 <= x <= l."""
        x = min(max(float(x), 0.0), self.length)
        g = self.gamma.gamma
        if self.method == "exact":
            segs = []
            for x0, x1, v in self._segments:
                if x <= x0:
                    break
                segs.append((x0, min(x, x1), v))
            Phi, dPhi, s = _piecewise_fundamental(segs, g)
            e = math.exp(s)
            return Phi * e, dPhi * e
        for x0, x1, sol in self._pieces:
            if x <= x1:
                return _state_to_matrices(sol(x))
        return _state_to_matrices(self._pieces[-1][2](self.length))

    def wronskian_profile(self, n=201):
        """u1 u2' - u1' u2 at n points; identically 1 for an exact solver."""
        xs = np.linspace(0.0, self.length, n)
        return xs, np.array([np.linalg.det(self.fundamental(x)[0]) for x in xs])

    def basis(self, bond=None) -> "BondBasisData":
        vmax = 0.0 if self.potential.is_zero else abs(self.potential.minimum(self.length))
        if self.potential.kind == "piecewise_constant":
            vmax = max(abs(v) for v in self.potential.values)
        elif self.potential.kind == "polynomial":
            xs = np.linspace(0, self.length, 65)
            vmax = float(np.max(np.abs(self.potential(xs, self.length))))
        q = math.sqrt(abs(self.gamma.gamma) + vmax) + 1.0 / self.length
        return BondBasisData(self.length, self.gamma, self.Phi, self.dPhi, self.log_scale, q, bond)

    # interior values of the bases, as functions of the position x on the forward arc
    def f_values(self, x, data=None):
        """(f_a(x), f_abar(l - x)), both unscaled."""
        data = data or self.basis()
        Phi, _ = self.fundamental(x)
        A, Bv = data.Phi[0, 0], data.Phi[0, 1]
        Bfull = Bv * math.exp(data.log_scale)
        return Phi[0, 0] - (A / Bv) * Phi[0, 1], Phi[0, 1] / Bfull

    def g_values(self, x, data=None):
        """(g_a(x), g_abar(l - x))."""
        data = data or self.basis()
        data.check_neumann()
        Phi, _ = self.fundamental(x)
        Ap, Bp = data.Phi[1, 0], data.Phi[1, 1]
        Apfull = Ap * math.exp(data.log_scale)
        return -(Bp / Ap) * Phi[0, 0] + Phi[0, 1], -Phi[0, 0] / Apfull


@dataclass(frozen=True, eq=False)
class BondBasisData:
    """Boundary data of f, g, r, t for the two arcs of one bond.

    Pairs are ordered (forward arc a, reversed arc abar).  Quantities that are
    shared by both arcs (f'(l), g(l), t, Wronskians) are scalars.
    """

    length: float
    gamma: SpectralParameter
    Phi: np.ndarray
    dPhi: np.ndarray
    log_scale: float
    q: float
    bond: object = None
    _norm: float = field(init=False, repr=False)

    def __post_init__(self):
        A, Bv, Ap, Bp = self.Phi.ravel()[[0, 1, 2, 3]]
        object.__setattr__(self, "_norm", max(abs(A), abs(Bp), abs(Bv) * self.q, abs(Ap) / self.q))

    # raw entries, scaled
    @property
    def A(self):
        return self.Phi[0, 0]

    @property
    def Bv(self):
        return self.Phi[0, 1]

    @property
    def Ap(self):
        return self.Phi[1, 0]

    @property
    def Bp(self):
        return self.Phi[1, 1]

    @property
    def dirichlet_resonant(self):
        return abs(self.Bv) * self.q < RESONANCE_TOL * self._norm

    @property
    def neumann_resonant(self):
        return abs(self.Ap) / self.q < RESONANCE_TOL * self._norm

    def check_dirichlet(self):
        if self.dirichlet_resonant:
            raise DirichletResonance(
                f"bond {self.bond!r}: Dirichlet resonance at gamma={self.gamma.gamma}", self.bond)

    def check_neumann(self):
        if self.neumann_resonant:
            raise NeumannResonance(
                f"bond {self.bond!r}: Neumann resonance at gamma={self.gamma.gamma}", self.bond)

    # f basis
    @property
    def fp0(self):
        self.check_dirichlet()
        return np.array([-self.A / self.Bv, -self.Bp / self.Bv])

    @property
    def fpl(self):
        self.check_dirichlet()
        return -math.exp(-self.log_scale) / self.Bv

    @property
    def log_neg_inv_fpl(self):
        """log(-1/f'(l)) = log of the unscaled Bv."""
        self.check_dirichlet()
        return cmath.log(self.Bv) + self.log_scale

    @property
    def W(self):
        return -self.fpl

    # g basis
    @property
    def g0(self):
        self.check_neumann()
        return np.array([-self.Bp / self.Ap, -self.A / self.Ap])

    @property
    def gl(self):
        self.check_neumann()
        return -math.exp(-self.log_scale) / self.Ap

    @property
    def log_neg_inv_gl(self):
        self.check_neumann()
        return cmath.log(self.Ap) + self.log_scale

    @property
    def Wg(self):
        return -self.gl

    # scattering amplitudes, with the free-space root sqrt(gamma)
    @property
    def _delta(self):
        k = self.gamma.sqrt_gamma
        return self.Ap + k * (self.A + self.Bp) + k * k * self.Bv

    @property
    def r(self):
        k = self.gamma.sqrt_gamma
        d = self._delta
        common = k * k * self.Bv - self.Ap
        return np.array([(k * (self.Bp - self.A) + common) / d, (k * (self.A - self.Bp) + common) / d])

    @property
    def t(self):
        return 2 * self.gamma.sqrt_gamma * math.exp(-self.log_scale) / self._delta

    # gamma-derivatives
    @property
    def dfp0(self):
        self.check_dirichlet()
        A, Bv, Bp = self.A, self.Bv, self.Bp
        dA, dBv, dBp = self.dPhi[0, 0], self.dPhi[0, 1], self.dPhi[1, 1]
        return np.array([-(dA * Bv - A * dBv) / Bv ** 2, -(dBp * Bv - Bp * dBv) / Bv ** 2])

    @property
    def dfpl(self):
        self.check_dirichlet()
        return math.exp(-self.log_scale) * self.dPhi[0, 1] / self.Bv ** 2

    @property
    def dg0(self):
        self.check_neumann()
        A, Ap, Bp = self.A, self.Ap, self.Bp
        dA, dAp, dBp = self.dPhi[0, 0], self.dPhi[1, 0], self.dPhi[1, 1]
        return np.array([-(dBp * Ap - Bp * dAp) / Ap ** 2, -(dA * Ap - A * dAp) / Ap ** 2])

    @property
    def dgl(self):
        self.check_neumann()
        return math.exp(-self.log_scale) * self.dPhi[1, 0] / self.Ap ** 2

    @property
    def dlog_neg_inv_fpl(self):
        return self.dPhi[0, 1] / self.Bv

    @property
    def dlog_neg_inv_gl(self):
        return self.dPhi[1, 0] / self.Ap

    @property
    def M_block(self):
        """2x2 bond block of M without fluxes."""
        f0, fl = self.fp0, self.fpl
        return np.array([[f0[0], -fl], [-fl, f0[1]]])

    @property
    def R_block(self):
        r, t = self.r, self.t
        return np.array([[r[0], t], [t, r[1]]])


def bond_basis_data(length, potential=None, gamma=0.0, method="auto", bond=None) -> BondBasisData:
    return BondSolver(length, potential, gamma, method).basis(bond)


def graph_basis(graph, gamma, method="auto"):
    """Basis data for every bond of a MetricGraph, in bond order."""
    gamma = SpectralParameter.of(gamma)
    return [bond_basis_data(graph.lengths[b], graph.potentials[b], gamma, method, graph.bond_ids[b])
            for b in range(graph.B)]


def fd_derivatives(length, potential, gamma, method="auto"):
    """Central differences in gamma of (fp0, fpl, g0, gl), step max(1e-6, 1e-6|gamma|)."""
    g = SpectralParameter.of(gamma).gamma
    h = max(1e-6, 1e-6 * abs(g))
    p = bond_basis_data(length, potential, g + h, method)
    m = bond_basis_data(length, potential, g - h, method)
    return ((p.fp0 - m.fp0) / (2 * h), (p.fpl - m.fpl) / (2 * h),
            (p.g0 - m.g0) / (2 * h), (p.gl - m.gl) / (2 * h))


# ---------------------------------------------------------------------------
# sum rules and identities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BasisIntegrals:
    ff: complex       # int f_a^2
    ff_rev: complex   # int f_a(x) f_abar(l - x)
    gg: complex       # int g_a^2
    gg_rev: complex   # int g_a(x) g_abar(l - x)


def _nodes(length, potential, order=40):
    xg, wg = np.polynomial.legendre.leggauss(order)
    edges = [0.0, *(potential.breakpoints if potential.kind == "piecewise_constant" else ()), length]
    xs, ws = [], []
    for x0, x1 in zip(edges, edges[1:]):
        n = max(1, int(math.ceil((x1 - x0) * 4)))
        for j in range(n):
            a = x0 + (x1 - x0) * j / n
            b = x0 + (x1 - x0) * (j + 1) / n
            xs.append((b - a) / 2 * xg + (a + b) / 2)
            ws.append((b - a) / 2 * wg)
    return np.concatenate(xs), np.concatenate(ws)


def basis_integrals(length, potential=None, gamma=0.0, method="auto", with_g=True) -> BasisIntegrals:
    """Gauss-Legendre quadrature of the products entering the sum rules."""
    solver = BondSolver(length, potential, gamma, method)
    data = solver.basis()
    xs, ws = _nodes(solver.length, solver.potential)
    f = np.array([solver.f_values(x, data) for x in xs])
    ff = complex(np.sum(ws * f[:, 0] ** 2))
    ffr = complex(np.sum(ws * f[:, 0] * f[:, 1]))
    gg = ggr = complex("nan")
    if with_g:
        g = np.array([solver.g_values(x, data) for x in xs])
        gg = complex(np.sum(ws * g[:, 0] ** 2))
        ggr = complex(np.sum(ws * g[:, 0] * g[:, 1]))
    return BasisIntegrals(ff, ffr, gg, ggr)


def sum_rule_residuals(length, potential=None, gamma=0.0, method="auto", derivative="analytic"):
    """Relative residuals of int f^2 = -d f'(0), int f f_rev = d f'(l) and the g analogues."""
    data = bond_basis_data(length, potential, gamma, method)
    I = basis_integrals(length, potential, gamma, method)
    if derivative == "fd":
        dfp0, dfpl, dg0, dgl = fd_derivatives(length, potential, gamma, method)
    else:
        dfp0, dfpl, dg0, dgl = data.dfp0, data.dfpl, data.dg0, data.dgl
    return {
        "ff": _rel(I.ff, -dfp0[0]),
        "ff_rev": _rel(I.ff_rev, dfpl),
        "gg": _rel(I.gg, dg0[0]),
        "gg_rev": _rel(I.gg_rev, dgl),
    }


def _rel(x, y):
    d = abs(x - y)
    s = max(abs(x), abs(y))
    return d / s if s > 0 else d


@dataclass(frozen=True)
class ConversionReport:
    residuals: dict

    @property
    def max_residual(self):
        return max(self.residuals.values())

    def ok(self, tol=1e-10):
        return self.max_residual < tol


def basis_conversions_check(data: BondBasisData) -> ConversionReport:
    """Residuals of the identities linking the f, g and scattering bases of one bond."""
    res = {}
    A, Bv, Ap, Bp = data.A, data.Bv, data.Ap, data.Bp
    scale = max(abs(A * Bp), abs(Bv * Ap))
    res["wronskian"] = abs(A * Bp - Bv * Ap - math.exp(-2 * data.log_scale)) / scale
    f0, fl = data.fp0, data.fpl
    k = data.gamma.sqrt_gamma
    Mb = data.M_block
    Rb = data.R_block
    if not data.neumann_resonant:
        g0, gl = data.g0, data.gl
        den = f0[0] * f0[1] - fl * fl
        res["g0_from_f"] = max(_rel(g0[0], f0[1] / den), _rel(g0[1], f0[0] / den))
        res["gl_from_f"] = _rel(gl, fl / den)
        res["detM_block"] = _rel(np.linalg.det(Mb) * gl, fl)
        Nb = np.array([[g0[0], gl], [gl, g0[1]]])
        res["N_inverse"] = float(np.max(np.abs(Nb @ Mb - np.eye(2))))
    # M = sqrt(gamma) (1 + R)^{-1} (R - 1)
    one = np.eye(2)
    M_from_R = np.linalg.solve(one + Rb, k * (Rb - one))
    res["M_from_rt"] = float(np.max(np.abs(M_from_R - Mb)) / max(np.max(np.abs(Mb)), 1e-300))
    res["useful"] = _rel(-fl * np.linalg.det(one + Rb), 2 * k * data.t)
    return ConversionReport(res)
