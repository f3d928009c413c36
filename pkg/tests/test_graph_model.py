import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpus import random_graph
from qgraph import (
    GraphError,
    InputError,
    boundary_conditions,
    build_graph,
    delta_coupling_bc,
    delta_prime_bc,
    graph_from_edges,
    ring_graph,
    star_graph,
    validate_bc,
    wire_graph,
)
from qgraph.graph_model import delta_block, delta_prime_block
from qgraph.graphspec import BondSpec, GraphSpec, PotentialSpec, VertexCondition


def test_wire_structure():
    g = wire_graph(1.0)
    assert (g.V, g.B, g.n_arcs) == (2, 1, 2)
    assert g.valency.tolist() == [1, 1]


def test_ring_is_one_vertex_with_valency_two():
    g = ring_graph(2.0, 0.3)
    assert (g.V, g.B) == (1, 1)
    assert g.valency.tolist() == [2]
    assert g.arcs[0].forward and not g.arcs[1].forward
    assert g.arc_flux.tolist() == [0.3, -0.3]


def test_star_valencies():
    g = star_graph([1, 2, 3, 4])
    assert g.V == 5
    assert g.valency.tolist() == [4, 1, 1, 1, 1]


def test_arcs_grouped_by_tail():
    g = graph_from_edges([("a", "b"), ("b", "c"), ("c", "a"), ("b", "b")])
    tails = g.tails.tolist()
    assert tails == sorted(tails)
    for v, s in enumerate(g.block_slices):
        assert all(t == v for t in tails[s])


@pytest.mark.parametrize("bad, msg", [
    (dict(length=0.0), "length"),
    (dict(length=-1.0), "length"),
    (dict(head="Z"), "unknown vertex"),
])
def test_build_graph_errors(bad, msg):
    kw = dict(id="b1", tail="A", head="B", length=1.0)
    kw.update(bad)
    spec = GraphSpec.make(["A", "B"], [BondSpec(**kw)])
    with pytest.raises(GraphError, match=msg):
        build_graph(spec)


def test_duplicate_bond_id():
    spec = GraphSpec.make(["A", "B"], [BondSpec("b", "A", "B", 1.0), BondSpec("b", "B", "A", 1.0)])
    with pytest.raises(GraphError, match="duplicate"):
        build_graph(spec)


def test_breakpoints_must_be_inside_bond():
    pot = PotentialSpec.piecewise_constant((1.5,), (1.0, 2.0))
    with pytest.raises(GraphError, match="breakpoints"):
        build_graph(GraphSpec.make(["A", "B"], [BondSpec("b", "A", "B", 1.0, 0.0, pot)]))


def test_isolated_vertex_rejected():
    with pytest.raises(GraphError, match="isolated"):
        build_graph(GraphSpec.make(["A", "B", "C"], [BondSpec("b", "A", "B", 1.0)]))


def test_potential_reversal():
    p = PotentialSpec.piecewise_constant((0.3,), (1.0, 2.0))
    r = p.reversed(1.0)
    xs = np.array([0.1, 0.5, 0.9])
    assert np.allclose(r(xs, 1.0), p(1.0 - xs, 1.0))
    q = PotentialSpec.polynomial((1.0, 2.0, -3.0))
    assert np.allclose(q.reversed(2.0)(xs, 2.0), q(2.0 - xs, 2.0))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_graph_invariants(seed):
    g = random_graph(np.random.default_rng(seed))
    rev = g.reversal
    assert np.all(rev[rev] == np.arange(g.n_arcs))
    assert np.all(rev != np.arange(g.n_arcs))
    assert int(g.valency.sum()) == 2 * g.B
    assert np.all(g.arc_flux + g.arc_flux[rev] == 0)
    assert np.all(g.tails == g.heads[rev])
    for bc in (delta_coupling_bc(g, np.linspace(-0.2, 3, g.V)), delta_prime_bc(g, 1.3)):
        assert validate_bc(bc).ok


# ---------------------------------------------------------------------------
# vertex blocks
# ---------------------------------------------------------------------------

def test_neumann_and_dirichlet_endpoint_blocks():
    C, D = delta_block(1, 0.0)
    assert C.tolist() == [[0]] and D.tolist() == [[1]]
    C, D = delta_prime_block(1, 0.0)
    assert C.tolist() == [[1]] and D.tolist() == [[0]]


def test_infinite_markers_swap_rows():
    C, D = delta_block(3, math.inf)
    assert np.all(D == 0) and C[0, 0] == -1
    C, D = delta_prime_block(3, math.inf)
    assert np.all(C == 0) and D[0, 0] == -1
    assert np.linalg.matrix_rank(np.hstack([C, D])) == 3


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.floats(-5, 5), st.floats(0.01, 10))
def test_block_determinants(m, p, gamma):
    k = math.sqrt(gamma)
    C, D = delta_block(m, p)
    assert np.linalg.det(C - k * D) == pytest.approx(-(p + m * k), rel=1e-12, abs=1e-12)
    C, D = delta_prime_block(m, p)
    expected = (-1) ** (m + 1) * gamma ** (m / 2) * (p + m / k)
    assert np.linalg.det(C - k * D) == pytest.approx(expected, rel=1e-12, abs=1e-12)


def test_block_determinant_examples():
    C, D = delta_block(2, 0.0)
    assert np.linalg.det(C - 3.0 * D) == pytest.approx(-6.0)
    C, D = delta_prime_block(2, 1.0)
    assert np.linalg.det(C - D).real == pytest.approx(-3.0)


def test_validate_failures():
    rep = validate_bc(np.zeros((2, 2)), np.zeros((2, 2)))
    assert rep.hermitian_ok and not rep.rank_ok and not rep.ok
    rep = validate_bc(np.eye(2), 1j * np.eye(2))
    assert not rep.hermitian_ok
    with pytest.raises(InputError):
        validate_bc(np.eye(2), np.eye(3))


def test_general_blocks_must_match_valency():
    g = wire_graph()
    bad = VertexCondition.general(((1, 0), (0, 1)), ((0, 0), (0, 0)))
    with pytest.raises(InputError):
        boundary_conditions(g, [bad, VertexCondition.delta(0.0)])


def test_bc_family():
    g = star_graph([1, 1])
    assert delta_coupling_bc(g, 0.0).family == "delta"
    mixed = boundary_conditions(g, [VertexCondition.delta(1.0), VertexCondition.delta_prime(0.0),
                                    VertexCondition.dirichlet()])
    assert mixed.family == "general"
    assert validate_bc(mixed).ok
