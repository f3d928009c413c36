"""Periodic orbits: enumeration, weights, trace formulas and orbit products.

An orbit is a cyclic sequence of arcs (a1, ..., an) with head(a_i) = tail(a_{i+1}).
Primitive orbits are enumerated directly as Lyndon words over the arc
alphabet (FKM pre-necklace recursion restricted to allowed transitions), so
each one appears once, in its lexicographically smallest rotation.
Repetitions are generated from primitives, never enumerated.
"""

from __future__ import annotations

import cmath
import math
import sys
import warnings
from dataclasses import dataclass

import numpy as np

from .arc_matrices import assemble_Q, assemble_R
from .bond_basis import SpectralParameter, graph_basis
from .errors import InputError, OrbitExplosionError
from .graph_model import MetricGraph, delta_coupling_bc, delta_prime_bc

DEFAULT_CAP = 500_000


@dataclass(frozen=True)
class Orbit:
    arcs: tuple
    length: float
    flux: float
    n_reflections: int
    repetition: int = 1

    @property
    def n_arcs(self):
        return len(self.arcs) * self.repetition

    @property
    def primitive(self):
        return self.repetition == 1

    def repeat(self, r):
        return Orbit(self.arcs, self.length * r, self.flux * r, self.n_reflections * r, self.repetition * r)

    @property
    def primitive_length(self):
        return self.length / self.repetition

    def label(self, graph):
        return " ".join(graph.arc_label(a) for a in self.arcs)

    def transitions(self):
        """Consecutive pairs (a_i, a_{i+1}) around the cycle, primitive part only."""
        w = self.arcs
        return [(w[i], w[(i + 1) % len(w)]) for i in range(len(w))]


def canonical_rotation(word):
    """Lexicographically smallest rotation."""
    word = tuple(word)
    return min(word[i:] + word[:i] for i in range(len(word))) if word else word


def is_primitive(word):
    n = len(word)
    return all(tuple(word[d:]) + tuple(word[:d]) != tuple(word) for d in range(1, n) if n % d == 0)


def make_orbit(graph: MetricGraph, word):
    """Orbit from any closed arc word (rotation and repetitions detected)."""
    word = tuple(int(a) for a in word)
    n = len(word)
    heads, tails = graph.heads, graph.tails
    for i in range(n):
        if heads[word[i]] != tails[word[(i + 1) % n]]:
            raise InputError(f"arcs {word[i]} -> {word[(i + 1) % n]} are not consecutive")
    for d in range(1, n + 1):
        if n % d == 0 and word[:d] * (n // d) == word:
            base = canonical_rotation(word[:d])
            return _orbit(graph, base).repeat(n // d)
    raise AssertionError


def _orbit(graph, word):
    lens = graph.arc_lengths
    flux = graph.arc_flux
    rev = graph.reversal
    n = len(word)
    nr = sum(1 for i in range(n) if word[(i + 1) % n] == rev[word[i]])
    return Orbit(tuple(word), float(sum(lens[a] for a in word)), float(sum(flux[a] for a in word)), nr)


def successors(graph: MetricGraph, transitions=None, tol=0.0):
    """Allowed next arcs of every arc; ``transitions[b, a]`` = 0 removes a -> b."""
    tails, heads = graph.tails, graph.heads
    out = []
    for a in range(graph.n_arcs):
        nxt = [b for b in range(graph.n_arcs) if tails[b] == heads[a]]
        if transitions is not None:
            nxt = [b for b in nxt if abs(transitions[b, a]) > tol]
        out.append(nxt)
    return out


def enumerate_primitive_orbits(graph: MetricGraph, max_arcs=None, max_length=None,
                               transitions=None, cap=DEFAULT_CAP):
    """All primitive orbits with at most ``max_arcs`` arcs and metric length <= ``max_length``.

    A transition matrix (for example Q R, or Q alone) prunes walks through
    zero-weight vertex passages.  Raises OrbitExplosionError past ``cap`` orbits.
    """
    if max_arcs is None and max_length is None:
        raise InputError("give max_arcs or max_length")
    if max_arcs is not None and max_arcs < 1:
        raise InputError("max_arcs must be >= 1")
    lens = graph.arc_lengths
    if max_arcs is None:
        max_arcs = int(math.floor(max_length / float(np.min(lens)) + 1e-9))
    lmax = math.inf if max_length is None else max_length * (1 + 1e-12)
    succ = successors(graph, transitions)
    closes = [set(s) for s in succ]
    out = []
    word = []
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 4 * max_arcs + 100))

    def dfs(p, length):
        k = len(word)
        if p == k and word[0] in closes[word[-1]]:
            out.append(_orbit(graph, word))
            if len(out) > cap:
                raise OrbitExplosionError(f"more than {cap} primitive orbits; lower the cutoff")
        if k == max_arcs:
            return
        ref = word[k - p]
        for c in succ[word[-1]]:
            if c < ref:
                continue
            nl = length + lens[c]
            if nl > lmax:
                continue
            word.append(c)
            dfs(p if c == ref else k + 1, nl)
            word.pop()

    for s in range(graph.n_arcs):
        if lens[s] > lmax:
            continue
        word.append(s)
        dfs(1, lens[s])
        word.pop()
    out.sort(key=lambda o: (len(o.arcs), o.length, o.arcs))
    return out


def with_repetitions(primitives, max_arcs=None, max_length=None):
    """Primitive orbits together with their repetitions inside the same limits."""
    out = []
    for o in primitives:
        r = 1
        while True:
            rep = o.repeat(r)
            if max_arcs is not None and rep.n_arcs > max_arcs:
                break
            if max_length is not None and rep.length > max_length * (1 + 1e-12):
                break
            out.append(rep)
            r += 1
            if max_arcs is None and max_length is None:
                break
    return out


# ---------------------------------------------------------------------------
# weights
# ---------------------------------------------------------------------------

def orbit_weight(orbit: Orbit, Q, reversal=None):
    """Vertex weight prod_i Q[a_{i+1}, abar_i] of the primitive part, raised to the repetition."""
    if reversal is None:
        raise InputError("orbit_weight needs the arc reversal map")
    w = 1.0 + 0j
    for a, b in orbit.transitions():
        w *= Q[b, reversal[a]]
    return w ** orbit.repetition


def orbit_amplitude(orbit: Orbit, T):
    """prod_i T[a_{i+1}, a_i] for a full transition matrix such as Q R."""
    w = 1.0 + 0j
    for a, b in orbit.transitions():
        w *= T[b, a]
    return w ** orbit.repetition


def family_Q(graph, family):
    """gamma-independent Q of the delta (lambda=0) or delta' (mu=0) family."""
    if family in ("delta", "continuous"):
        bc = delta_coupling_bc(graph, 0.0)
    elif family in ("delta_prime", "derivative"):
        bc = delta_prime_bc(graph, 0.0)
    else:
        raise InputError(f"unknown boundary family {family!r}")
    return assemble_Q(bc, 1.0)


def alpha_weight(graph, orbit):
    return orbit_weight(orbit, family_Q(graph, "delta"), graph.reversal)


def beta_weight(graph, orbit):
    return orbit_weight(orbit, family_Q(graph, "delta_prime"), graph.reversal)


def _vertex_transitions(graph, Q):
    """T[b, a] = Q[b, abar]: the weight of passing from arc a into arc b."""
    return Q[:, graph.reversal]


# ---------------------------------------------------------------------------
# trace formula
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TraceResult:
    value: float
    bound: float
    cutoff: float
    n_primitive: int
    weyl: float
    constant: float


def heat_cutoff(t, eps=1e-14):
    """Orbit length beyond which exp(-l^2/4t) drops below eps, with a margin for orbit proliferation."""
    return 2 * math.sqrt(t * (math.log(1 / eps) + 10.0))


def _require_free(graph):
    if graph.has_potential:
        raise InputError("the trace formula holds for V = 0 only")


def roth_heat_trace(graph: MetricGraph, t, family="delta", cutoff=None, eps=1e-14, cap=DEFAULT_CAP):
    """Heat trace from Weyl terms plus the orbit sum (lambda = 0 or mu = 0 conditions).

    Z = L/(2 sqrt(pi t)) +- (V - B)/2 + 1/(2 sqrt(pi t)) sum_C l(C~) w(C) e^{-l(C)^2/4t + i theta(C)}
    """
    if not t > 0:
        raise InputError("t must be positive")
    _require_free(graph)
    Q = family_Q(graph, family)
    sign = 1 if family in ("delta", "continuous") else -1
    cut = heat_cutoff(t, eps) if cutoff is None else float(cutoff)
    T = _vertex_transitions(graph, Q)
    prims = enumerate_primitive_orbits(graph, max_length=cut, transitions=T, cap=cap)
    pref = 1 / (2 * math.sqrt(math.pi * t))
    s = 0j
    for o in prims:
        w = orbit_weight(o, Q, graph.reversal)
        r = 1
        while o.length * r <= cut * (1 + 1e-12):
            s += o.length * w ** r * cmath.exp(-(r * o.length) ** 2 / (4 * t) + 1j * r * o.flux)
            r += 1
    weyl = graph.total_length * pref
    const = sign * (graph.V - graph.B) / 2
    bound = pref * cut * graph.n_arcs * math.exp(-cut ** 2 / (4 * t)) * 10
    if bound > eps:
        warnings.warn(f"orbit cutoff {cut:.4g} is short for t={t:.4g}: truncation bound {bound:.2e}",
                      stacklevel=2)
    return TraceResult(float((weyl + const + pref * s).real), bound, cut, len(prims), weyl, const)


# ---------------------------------------------------------------------------
# determinants from orbits
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OrbitProduct:
    value: complex
    bound: float
    n_primitive: int


def zeta_det_orbit_product(graph: MetricGraph, family, gamma, cutoff, cap=DEFAULT_CAP) -> OrbitProduct:
    """gamma^{+-(V-B)/2} e^{sqrt(gamma) L} prod over primitive orbits (1 - w e^{-sqrt(gamma) l + i theta})."""
    gam = SpectralParameter.of(gamma)
    if not (gam.is_real and gam.gamma.real > 0):
        raise InputError("the orbit product converges for real gamma > 0 only")
    _require_free(graph)
    k = gam.sqrt_gamma.real
    Q = family_Q(graph, family)
    sign = 1 if family in ("delta", "continuous") else -1
    T = _vertex_transitions(graph, Q)
    prims = enumerate_primitive_orbits(graph, max_length=cutoff, transitions=T, cap=cap)
    logp = sign * (graph.V - graph.B) / 2 * math.log(gam.gamma.real) + k * graph.total_length
    for o in prims:
        w = orbit_weight(o, Q, graph.reversal)
        logp += cmath.log(1 - w * cmath.exp(-k * o.length + 1j * o.flux))
    bound = graph.n_arcs * math.exp(-k * cutoff) * 10
    return OrbitProduct(cmath.exp(logp), bound, len(prims))


def log_det_orbit_series(graph, T, max_arcs, cap=DEFAULT_CAP):
    """ln det(1 - T) to order max_arcs from orbits: -sum_C T(C)^r / r over n_arcs(C) r <= max_arcs.

    Returns a list of per-order contributions (index = number of arcs)."""
    prims = enumerate_primitive_orbits(graph, max_arcs=max_arcs, transitions=T, cap=cap)
    out = np.zeros(max_arcs + 1, dtype=complex)
    for o in prims:
        A = orbit_amplitude(o, T)
        n = len(o.arcs)
        r = 1
        while n * r <= max_arcs:
            out[n * r] -= A ** r / r
            r += 1
    return out


def log_det_trace_series(T, max_arcs):
    """-tr(T^p)/p for p = 1..max_arcs."""
    out = np.zeros(max_arcs + 1, dtype=complex)
    P = np.eye(T.shape[0], dtype=complex)
    for p in range(1, max_arcs + 1):
        P = P @ T
        out[p] = -np.trace(P) / p
    return out


def QR_matrix(graph, bc, gamma):
    gam = SpectralParameter.of(gamma)
    return assemble_Q(bc, gam) @ assemble_R(graph, graph_basis(graph, gam))
