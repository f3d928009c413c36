"""Independent reference values.

Nothing here imports the package.  Closed forms are written out directly,
spectra come from scalar root finding on the textbook secular equations,
and cycle counts come from exhaustive walks.
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq


def csqrt(gamma):
    return cmath.sqrt(complex(gamma))


# ---------------------------------------------------------------------------
# closed-form zeta determinants, delta coupling
# ---------------------------------------------------------------------------

def wire_zeta(gamma, L, lam1, lam2):
    k = csqrt(gamma)
    return (2 * k * cmath.sinh(k * L) + (lam1 + lam2) * 2 * cmath.cosh(k * L)
            + lam1 * lam2 * 2 * cmath.sinh(k * L) / k)


def ring_zeta(gamma, L, lam, theta):
    k = csqrt(gamma)
    return 2 * (cmath.cosh(k * L) - math.cos(theta)) + lam * cmath.sinh(k * L) / k


def star_zeta(gamma, lengths, lam):
    k = csqrt(gamma)
    B = len(lengths)
    p = np.prod([cmath.cosh(k * l) for l in lengths])
    return 2 ** B / B * p * (lam + k * sum(cmath.tanh(k * l) for l in lengths))


def ring_det_derivative(gamma, L, mu, theta):
    """Ring with one delta' vertex: mu sqrt(g) sinh + 2 (cosh + cos theta)."""
    k = csqrt(gamma)
    return mu * k * cmath.sinh(k * L) + 2 * (cmath.cosh(k * L) + math.cos(theta))


def neumann_wire_det(gamma, L):
    k = csqrt(gamma)
    return k * cmath.sinh(k * L)


def neumann_wire_green(gamma, L, x):
    k = csqrt(gamma)
    return cmath.cosh(k * x) * cmath.cosh(k * (L - x)) / (k * cmath.sinh(k * L))


# ---------------------------------------------------------------------------
# spectra
# ---------------------------------------------------------------------------

def neumann_wire_k(L, kmax):
    n = int(math.floor(kmax * L / math.pi + 1e-12))
    return [(j * math.pi / L, 1) for j in range(n + 1)]


def ring_k(L, theta, kmax):
    """Distinct k = |2 n pi - theta|/L with multiplicities."""
    ks = {}
    n = int(kmax * L / (2 * math.pi)) + 2
    for j in range(-n, n + 1):
        k = abs(2 * j * math.pi - theta) / L
        if k <= kmax + 1e-12:
            key = round(k, 10)
            ks[key] = ks.get(key, 0) + 1
    return sorted(ks.items())


def robin_wire_energies(L, lam1, lam2, Emax):
    """Eigenvalues of -d^2/dx^2 on [0, L] with the delta conditions of weights lam1, lam2.

    Secular equation from the closed-form wire determinant at gamma = -E.
    Negative energies: 2 kap sinh + 2 (l1 + l2) cosh + 2 l1 l2 sinh / kap = 0.
    """
    out = []

    def pos(k):
        if k == 0:
            return 2 * (lam1 + lam2) + 2 * lam1 * lam2 * L
        return -2 * k * math.sin(k * L) + 2 * (lam1 + lam2) * math.cos(k * L) + 2 * lam1 * lam2 * math.sin(k * L) / k

    def neg(kap):
        return 2 * kap * math.tanh(kap * L) + 2 * (lam1 + lam2) + 2 * lam1 * lam2 * math.tanh(kap * L) / kap

    kap_hi = 2 * (abs(lam1) + abs(lam2)) + 10
    grid = np.linspace(1e-9, kap_hi, 20001)
    vals = [neg(x) for x in grid]
    for a, b, fa, fb in zip(grid, grid[1:], vals, vals[1:]):
        if fa * fb < 0:
            out.append(-brentq(neg, a, b, xtol=1e-15) ** 2)
    kmax = math.sqrt(Emax)
    grid = np.linspace(1e-9, kmax, 20001)
    vals = [pos(x) for x in grid]
    for a, b, fa, fb in zip(grid, grid[1:], vals, vals[1:]):
        if fa * fb < 0:
            out.append(brentq(pos, a, b, xtol=1e-15) ** 2)
    return sorted(out)


# ---------------------------------------------------------------------------
# heat traces
# ---------------------------------------------------------------------------

def ring_heat(t, L=1.0, theta=0.0, nmax=200):
    return sum(math.exp(-t * ((2 * n * math.pi - theta) / L) ** 2) for n in range(-nmax, nmax + 1))


def ring_heat_poisson(t, L=1.0, theta=0.0, nmax=50):
    """Same sum after Poisson resummation: L/sqrt(4 pi t) sum_r e^{-r^2 L^2/4t} cos(r theta)."""
    return L / math.sqrt(4 * math.pi * t) * sum(
        math.exp(-(r * L) ** 2 / (4 * t)) * math.cos(r * theta) for r in range(-nmax, nmax + 1))


def neumann_wire_heat(t, L=1.0, nmax=400):
    return sum(math.exp(-t * (n * math.pi / L) ** 2) for n in range(0, nmax + 1))


def dirichlet_wire_heat(t, L=1.0, nmax=400):
    return sum(math.exp(-t * (n * math.pi / L) ** 2) for n in range(1, nmax + 1))


def ring_antiperiodic_heat(t, L=1.0, nmax=200):
    """Ring with a mu = 0 derivative-type vertex: k = (2n + 1) pi / L, each twice."""
    return 2 * sum(math.exp(-t * ((2 * n + 1) * math.pi / L) ** 2) for n in range(0, nmax + 1))


# ---------------------------------------------------------------------------
# combinatorial cycles
# ---------------------------------------------------------------------------

def darts(edges):
    """Directed edges (tail, head, edge index, direction)."""
    out = []
    for e, (a, b) in enumerate(edges):
        out.append((a, b, e, 0))
        out.append((b, a, e, 1))
    return out


def closed_walks(edges, n):
    """Every closed dart sequence of length n, as tuples of dart indices."""
    D = darts(edges)
    nxt = [[j for j, d in enumerate(D) if d[0] == D[i][1]] for i in range(len(D))]

    def extend(w):
        if len(w) == n:
            if D[w[-1]][1] == D[w[0]][0]:
                yield tuple(w)
            return
        for j in nxt[w[-1]]:
            yield from extend(w + [j])

    for s in range(len(D)):
        yield from extend([s])


def _reverse_dart(D, i):
    a, b, e, s = D[i]
    return D.index((b, a, e, 1 - s)) if a != b else D.index((a, b, e, 1 - s))


def reflections(edges, w):
    """Number of back-tracking steps (cyclically) in the dart word w."""
    D = darts(edges)
    n = len(w)
    return sum(1 for i in range(n) if w[(i + 1) % n] == _reverse_dart(D, w[i]))


def primitive_classes(edges, n):
    """Counts by reflection number of primitive closed walks of length n up to rotation."""
    seen = set()
    counts = {}
    for w in closed_walks(edges, n):
        rots = [w[i:] + w[:i] for i in range(n)]
        if len(set(rots)) != n:
            continue
        key = min(rots)
        if key in seen:
            continue
        seen.add(key)
        r = reflections(edges, w)
        counts[r] = counts.get(r, 0) + 1
    return counts


def bartholdi_series_bruteforce(edges, w, order):
    """prod over primitive cycles (1 - (1 - w)^r u^n) to u^order, exact in Fractions."""
    w = Fraction(w)
    poly = [Fraction(0)] * (order + 1)
    poly[0] = Fraction(1)
    for n in range(1, order + 1):
        for r, N in primitive_classes(edges, n).items():
            c = (1 - w) ** r
            for _ in range(N):
                new = poly[:]
                for i in range(order + 1 - n):
                    new[i + n] -= c * poly[i]
                poly = new
    return poly


def bass_series_triangle(order):
    """(1 - u^3)^2 = 1 - 2u^3 + u^6."""
    out = [Fraction(0)] * (order + 1)
    for i, c in ((0, 1), (3, -2), (6, 1)):
        if i <= order:
            out[i] = Fraction(c)
    return out


def necklace_count(q, n):
    """Primitive necklaces of length n over q letters (Moebius inversion)."""
    def mobius(m):
        res, p = 1, 2
        while p * p <= m:
            if m % p == 0:
                m //= p
                if m % p == 0:
                    return 0
                res = -res
            p += 1
        return -res if m > 1 else res
    return sum(mobius(d) * q ** (n // d) for d in range(1, n + 1) if n % d == 0) // n


def flower_cycle_counts(petals, n):
    """A bouquet of loops: every dart word of length n closes, so counts are necklaces of 2*petals letters."""
    return necklace_count(2 * petals, n)
