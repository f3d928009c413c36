"""Spectral determinants, spectra, trace formulas and zeta functions of quantum graphs."""

import os as _os

if "QGRAPH_THREADS" in _os.environ:
    # cap BLAS threads before numpy loads
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _os.environ["QGRAPH_THREADS"])

from .bond_basis import BondBasisData, BondSolver, SpectralParameter, bond_basis_data, graph_basis
from .arc_matrices import ArcMatrices, assemble_M, assemble_N, assemble_Q, assemble_R, matrix_identities
from .comb_zeta import (
    CombGraph,
    bartholdi_arc,
    bartholdi_bruteforce,
    bartholdi_vertex,
    metric_to_comb_bridge,
)
from .determinants import (
    all_representations,
    gf_ratio,
    large_gamma_asymptote,
    spectral_det,
    spectral_det_arc_f,
    spectral_det_arc_g,
    spectral_det_scattering,
    spectral_det_transfer,
    spectral_det_vertex_continuous,
    spectral_det_vertex_derivative,
    vertex_matrix_continuous,
    vertex_matrix_derivative,
    zeta_det,
    zeta_det_continuous,
    zeta_det_derivative,
    zeta_det_general,
)
from .errors import (
    DirichletResonance,
    GraphError,
    InputError,
    NeumannResonance,
    NumericalError,
    OrbitExplosionError,
    ParseError,
    QGraphError,
)
from .graph_model import (
    BoundaryConditions,
    MetricGraph,
    boundary_conditions,
    build_graph,
    complete_graph,
    delta_coupling_bc,
    delta_prime_bc,
    graph_from_edges,
    ring_graph,
    star_graph,
    validate_bc,
    wire_graph,
)
from .graphspec import BondSpec, GraphSpec, PotentialSpec, VertexCondition
from .io import emit_graph, load_graph, parse_graph
from .orbits import Orbit, enumerate_primitive_orbits, orbit_weight, roth_heat_trace, zeta_det_orbit_product
from .spectrum import Spectrum, find_spectrum, green_diagonal, green_trace, heat_trace_exact, secular_function

__version__ = "0.1.0"
