import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qgraph import DirichletResonance, NeumannResonance
from qgraph.bond_basis import (
    BondSolver,
    SpectralParameter,
    basis_conversions_check,
    basis_integrals,
    bond_basis_data,
    sum_rule_residuals,
)
from qgraph.graphspec import PotentialSpec

STEP = PotentialSpec.piecewise_constant((0.4, 0.8), (1.0, -2.0, 0.5))
POLY = PotentialSpec.polynomial((0.5, 1.0, -1.0))


def test_sqrt_branch():
    assert SpectralParameter.of(4).sqrt_gamma == 2
    assert SpectralParameter.of(-4).sqrt_gamma == -2j
    assert SpectralParameter.from_k(3.0).gamma == -9
    assert SpectralParameter.from_k(3.0).sqrt_gamma == -3j
    s = SpectralParameter.of(-1 + 1e-3j).sqrt_gamma
    assert s.real > 0


def test_free_bond_closed_forms():
    d = bond_basis_data(1.0, None, 1.0)
    c, s = math.cosh(1), math.sinh(1)
    assert d.fp0 == pytest.approx([-c / s, -c / s], rel=1e-14)
    assert d.fpl == pytest.approx(-1 / s, rel=1e-14)
    assert d.g0 == pytest.approx([-c / s, -c / s], rel=1e-14)
    assert d.gl == pytest.approx(-1 / s, rel=1e-14)
    assert d.t == pytest.approx(math.exp(-1), rel=1e-14)
    assert np.abs(d.r).max() < 1e-15
    assert d.fp0[0] == pytest.approx(-1.313035, abs=1e-6)
    assert d.fpl == pytest.approx(-0.850918, abs=1e-6)


@pytest.mark.parametrize("gamma", [0.3, 5.0, -2.0, 2 + 3j, 1e-9, 400.0])
def test_free_bond_matches_hyperbolic_formulas(gamma):
    L = 1.3
    d = bond_basis_data(L, None, gamma)
    k = SpectralParameter.of(gamma).sqrt_gamma
    assert d.fp0[0] == pytest.approx(-k / cmath.tanh(k * L), rel=1e-12)
    assert d.fpl == pytest.approx(-k / cmath.sinh(k * L), rel=1e-12)
    assert d.t == pytest.approx(cmath.exp(-k * L), rel=1e-12)


def test_large_gamma_does_not_overflow():
    d = bond_basis_data(2.0, None, 1e6)
    assert d.fp0[0] == pytest.approx(-1e3, rel=1e-12)
    assert math.isfinite(d.log_neg_inv_fpl.real)
    assert d.log_neg_inv_fpl.real == pytest.approx(2000 - math.log(2 * 1e3), rel=1e-12)


def test_constant_potential_shift():
    a = bond_basis_data(1.1, PotentialSpec.constant(0.7), 2.0)
    b = bond_basis_data(1.1, None, 2.7)
    assert np.allclose(a.fp0, b.fp0, rtol=1e-14)
    assert a.fpl == pytest.approx(b.fpl, rel=1e-14)
    c = bond_basis_data(1.1, PotentialSpec.polynomial((0.7,)), 2.0, method="ode")
    assert np.allclose(c.fp0, b.fp0, rtol=1e-10)


@pytest.mark.parametrize("gamma", [2.5, -3.0, 1 + 1j])
def test_ode_and_exact_routes_agree(gamma):
    a = bond_basis_data(1.2, STEP, gamma, method="exact")
    b = bond_basis_data(1.2, STEP, gamma, method="ode")
    assert np.allclose(a.fp0, b.fp0, rtol=1e-9)
    assert np.allclose(a.g0, b.g0, rtol=1e-9)
    assert a.t == pytest.approx(b.t, rel=1e-9)
    assert np.allclose(a.dfp0, b.dfp0, rtol=1e-8)


def test_symmetric_potential_gives_equal_arcs():
    sym = PotentialSpec.piecewise_constant((0.3, 0.7), (2.0, -1.0, 2.0))
    d = bond_basis_data(1.0, sym, 1.5)
    assert d.fp0[0] == pytest.approx(d.fp0[1], rel=1e-13)
    assert d.r[0] == pytest.approx(d.r[1], rel=1e-12)


def test_reversed_potential_swaps_arcs():
    d = bond_basis_data(1.2, STEP, 1.5)
    e = bond_basis_data(1.2, STEP.reversed(1.2), 1.5)
    assert np.allclose(d.fp0, e.fp0[::-1], rtol=1e-13)
    assert np.allclose(d.g0, e.g0[::-1], rtol=1e-13)
    assert d.fpl == pytest.approx(e.fpl, rel=1e-13)


def test_real_data_for_real_gamma():
    d = bond_basis_data(1.2, STEP, 3.0)
    for x in (*d.fp0, d.fpl, *d.g0, d.gl, *d.r, d.t):
        assert abs(complex(x).imag) == 0


def test_dirichlet_resonance():
    d = bond_basis_data(1.0, None, SpectralParameter.from_k(math.pi))
    assert d.dirichlet_resonant
    with pytest.raises(DirichletResonance):
        d.fp0
    with pytest.raises(DirichletResonance):
        d.log_neg_inv_fpl
    assert math.isfinite(abs(d.t))


def test_neumann_resonance():
    d = bond_basis_data(1.0, None, 0.0)
    assert d.neumann_resonant and not d.dirichlet_resonant
    with pytest.raises(NeumannResonance):
        d.g0
    with pytest.raises(NeumannResonance):
        d.log_neg_inv_gl


@pytest.mark.parametrize("pot, gamma", [(None, 1.0), (STEP, 0.5), (STEP, -4.0), (POLY, 2.0), (POLY, 1 - 2j)])
def test_sum_rules(pot, gamma):
    res = sum_rule_residuals(1.2, pot, gamma)
    assert max(res.values()) < 1e-9
    res = sum_rule_residuals(1.2, pot, gamma, derivative="fd")
    assert max(res.values()) < 1e-6


def test_free_small_gamma_integral():
    I = basis_integrals(2.0, None, 1e-10)
    assert I.ff.real == pytest.approx(2.0 / 3, rel=1e-8)


@pytest.mark.parametrize("pot, gamma", [(None, 1.0), (None, -2.0), (STEP, 0.7), (POLY, 3.0), (STEP, 2 + 1j)])
def test_basis_conversions(pot, gamma):
    rep = basis_conversions_check(bond_basis_data(1.2, pot, gamma))
    assert rep.max_residual < 1e-10, rep.residuals


@settings(max_examples=30, deadline=None)
@given(st.floats(0.3, 3.0), st.floats(-5.0, 5.0), st.floats(-3.0, 3.0), st.floats(0.2, 0.8))
def test_conversions_random_piecewise(L, v1, v2, frac):
    pot = PotentialSpec.piecewise_constant((frac * L,), (v1, v2))
    rep = basis_conversions_check(bond_basis_data(L, pot, 1.7))
    assert rep.max_residual < 1e-8


def test_wronskian_profile_polynomial():
    _, w = BondSolver(0.9, POLY, 2.0).wronskian_profile()
    assert np.max(np.abs(w - 1)) < 1e-10


def test_interior_values_of_f():
    L, gamma = 1.3, 2.0
    s = BondSolver(L, None, gamma)
    k = math.sqrt(gamma)
    for x in (0.0, 0.4, L):
        fa, fb = s.f_values(x)
        assert fa == pytest.approx(math.sinh(k * (L - x)) / math.sinh(k * L), abs=1e-14)
        assert fb == pytest.approx(math.sinh(k * x) / math.sinh(k * L), abs=1e-14)
