"""Command line driver: ``qgraph <command> GRAPH [options]``, CSV on stdout.

Exit codes: 0 success, 2 input error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import comb_zeta as cz
from .determinants import (
    all_representations,
    spectral_det,
    zeta_det,
    zeta_det_general,
)
from .errors import InputError, NumericalError, QGraphError
from .graph_model import build_graph, spec_boundary_conditions, validate_bc
from .io import load_graph
from .orbits import alpha_weight, beta_weight, enumerate_primitive_orbits, roth_heat_trace
from .spectrum import find_spectrum, green_trace, green_trace_fd, heat_trace_exact, k_max_for_heat

DET_FORMULAS = ("arc-f", "arc-g", "scattering", "vertex", "transfer", "zeta", "zeta-conjecture", "all")


def n_threads():
    try:
        return max(1, int(os.environ.get("QGRAPH_THREADS", "1")))
    except ValueError:
        raise InputError("QGRAPH_THREADS must be an integer") from None


def _pmap(fn, items):
    n = n_threads()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


class _Writer:
    def __init__(self, out, precision):
        self.w = csv.writer(out, lineterminator="\n")
        self.p = precision

    def fmt(self, x):
        if isinstance(x, str):
            return x
        if isinstance(x, (bool, np.bool_)):
            return "true" if x else "false"
        if isinstance(x, (int, np.integer)):
            return str(int(x))
        x = float(x)
        if math.isinf(x) or math.isnan(x):
            return str(x)
        return f"{x + 0.0:.{self.p}g}"

    def row(self, values):
        self.w.writerow([self.fmt(v) for v in values])


def _complex_arg(s):
    try:
        return complex(s.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {s!r}") from None


def _grid(spec):
    """start:stop:n, linearly spaced, or a single value."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("grid must be start:stop:n")
    a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    if n < 1:
        raise argparse.ArgumentTypeError("grid needs n >= 1")
    return list(np.linspace(a, b, n))


def _gammas(args):
    vals = list(args.gamma or [])
    if getattr(args, "gamma_grid", None):
        vals += args.gamma_grid
    if not vals:
        raise InputError("give --gamma or --gamma-grid")
    return [complex(v) for v in vals]


def _load(args):
    spec = load_graph(args.graph)
    g = build_graph(spec)
    bc = spec_boundary_conditions(g, spec)
    rep = validate_bc(bc)
    if not rep.ok:
        raise InputError("boundary conditions are not self-adjoint; run 'validate' for details")
    return g, bc


def _split(name, z, real):
    if real:
        if abs(z.imag) > 1e-8 * max(abs(z), 1e-300):
            print(f"warning: {name} has imaginary part {z.imag:.3g}", file=sys.stderr)
        return [z.real]
    return [z.real, z.imag]


def _head(name, real):
    return [name] if real else [f"{name}_re", f"{name}_im"]


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_det(args, out):
    g, bc = _load(args)
    gammas = _gammas(args)
    real = all(z.imag == 0 for z in gammas)
    f = args.formula
    if f == "all":
        names = ["arc-f", "arc-g", "scattering", "vertex", "transfer"]
        if bc.family == "general":
            names.remove("vertex")

        def ev(gm):
            vals, res = all_representations(g, bc, gm)
            return [vals[n] for n in names], res

        head = ["gamma"] if real else ["gamma_re", "gamma_im"]
        for n in names:
            head += _head(n if not args.log else f"log_{n}", real)
        out.row(head + ["residual"])
        for gm, (vals, res) in zip(gammas, _pmap(ev, gammas)):
            row = [gm.real] if real else [gm.real, gm.imag]
            for n, v in zip(names, vals):
                row += _split(n, v if args.log else np.exp(v), real)
            out.row(row + [res])
        return 0
    if f == "zeta-conjecture":
        out.row((["gamma"] if real else ["gamma_re", "gamma_im"]) + _head("zeta", real)
                + _head("zeta_scattering", real) + ["residual"] + ["flagged"])
        for gm in gammas:
            z = zeta_det_general(g, bc, gm)
            row = [gm.real] if real else [gm.real, gm.imag]
            out.row(row + _split("zeta", z.value, real) + _split("zeta_scattering", z.scattering_form, real)
                    + [z.residual, ";".join(z.flagged_vertices)])
        return 0

    def ev1(gm):
        if f == "zeta":
            return zeta_det(g, bc, gm, log=True)
        return spectral_det(g, bc, gm, f, log=True)

    name = f if not args.log else f"log_{f}"
    out.row((["gamma"] if real else ["gamma_re", "gamma_im"]) + _head(name, real))
    for gm, lv in zip(gammas, _pmap(ev1, gammas)):
        v = lv if args.log else np.exp(lv)
        out.row(([gm.real] if real else [gm.real, gm.imag]) + _split(name, complex(v), real))
    return 0


def cmd_spectrum(args, out):
    g, bc = _load(args)
    sp = find_spectrum(g, bc, args.kmax)
    out.row(["index", "E", "k", "multiplicity"])
    for i, (E, k, m) in enumerate(zip(sp.energies, sp.k_values, sp.multiplicities)):
        out.row([i, E, k, m])
    for d in sp.diagnostics:
        print(f"note: {d}", file=sys.stderr)
    print(f"note: Weyl deviation {sp.weyl_deviation:.3g}", file=sys.stderr)
    return 0


def _family(bc):
    fam = bc.family
    if fam in ("delta", "delta_prime") and np.all(bc.parameters == 0):
        return fam
    raise InputError("the orbit trace formula needs lambda = 0 (delta) or mu = 0 (delta_prime) at every vertex")


def cmd_heat(args, out):
    g, bc = _load(args)
    ts = args.t
    if any(t <= 0 for t in ts):
        raise InputError("t must be positive")
    out.row(["t", "Z", "bound"])
    if args.method == "exact":
        sp = find_spectrum(g, bc, k_max_for_heat(min(ts)))
        for t in ts:
            Z, b = heat_trace_exact(sp, t)
            out.row([t, Z, b])
    else:
        fam = _family(bc)
        for t in ts:
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                r = roth_heat_trace(g, t, fam, cutoff=args.cutoff)
            for w in caught:
                print(f"warning: {w.message}", file=sys.stderr)
            out.row([t, r.value, r.bound])
    return 0


def cmd_orbits(args, out):
    g, bc = _load(args)
    orbits = enumerate_primitive_orbits(g, max_arcs=args.max_arcs, max_length=args.max_length)
    out.row(["arcs", "n_arcs", "length", "flux", "n_reflections", "alpha", "beta"])
    for o in orbits:
        out.row([o.label(g), len(o.arcs), o.length, o.flux, o.n_reflections,
                 alpha_weight(g, o).real, beta_weight(g, o).real])
    return 0


def cmd_czeta(args, out):
    spec = load_graph(args.graph)
    cg = cz.CombGraph(build_graph(spec))
    w = args.w
    if args.form in ("arc", "vertex"):
        if args.u is None:
            raise InputError("--u is required for the arc and vertex forms")
        fn = cz.bartholdi_arc if args.form == "arc" else cz.bartholdi_vertex
        out.row(["u", "w", "inverse_zeta"])
        for u in args.u:
            out.row([u, w, fn(cg, u, w).real])
        return 0
    n = args.max_order
    if args.form == "series":
        a = cz.bartholdi_arc_series(cg, w, n)
        v = cz.bartholdi_vertex_series(cg, w, n)
        out.row(["order", "arc", "vertex"])
        for i in range(n + 1):
            out.row([i, a[i].real, v[i].real])
    else:
        b = cz.bartholdi_bruteforce(cg, w, n)
        out.row(["order", "bruteforce"])
        for i in range(n + 1):
            out.row([i, b[i].real])
    return 0


def cmd_green_trace(args, out):
    g, bc = _load(args)
    gammas = _gammas(args)
    real = all(z.imag == 0 for z in gammas)
    out.row((["gamma"] if real else ["gamma_re", "gamma_im"]) + _head("G", real) + _head("dlogS", real)
            + ["residual"])
    for gm in gammas:
        G = green_trace(g, bc, gm)
        F = green_trace_fd(g, bc, gm)
        res = abs(G - F) / max(abs(G), 1e-300)
        out.row(([gm.real] if real else [gm.real, gm.imag]) + _split("G", G, real) + _split("dlogS", F, real)
                + [res])
    return 0


def cmd_validate(args, out):
    spec = load_graph(args.graph)
    g = build_graph(spec)
    bc = spec_boundary_conditions(g, spec)
    rep = validate_bc(bc)
    out.row(["check", "pass", "residual"])
    out.row(["vertices", True, g.V])
    out.row(["bonds", True, g.B])
    for name, ok, res in rep.lines():
        out.row([name, ok, res])
    return 0 if rep.ok else 2


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="qgraph", description="Spectral determinants and zeta functions of metric graphs.")
    p.add_argument("--precision", type=int, default=12, help="significant digits in the CSV output")
    sub = p.add_subparsers(dest="command", required=True)

    def graph_arg(sp):
        sp.add_argument("graph", help="graph document (YAML)")

    d = sub.add_parser("det", help="spectral determinant")
    graph_arg(d)
    d.add_argument("--gamma", type=_complex_arg, action="append")
    d.add_argument("--gamma-grid", type=_grid, help="start:stop:n")
    d.add_argument("--formula", choices=DET_FORMULAS, default="arc-f")
    d.add_argument("--log", action="store_true", help="print the complex logarithm instead")
    d.set_defaults(func=cmd_det)

    s = sub.add_parser("spectrum", help="eigenvalues up to a wavenumber")
    graph_arg(s)
    s.add_argument("--kmax", type=float, required=True)
    s.set_defaults(func=cmd_spectrum)

    h = sub.add_parser("heat", help="heat trace Z(t)")
    graph_arg(h)
    h.add_argument("--t", type=float, action="append", required=True)
    h.add_argument("--method", choices=("exact", "roth"), default="exact")
    h.add_argument("--cutoff", type=float, default=None, help="orbit length cutoff (roth)")
    h.set_defaults(func=cmd_heat)

    o = sub.add_parser("orbits", help="primitive periodic orbits")
    graph_arg(o)
    o.add_argument("--max-arcs", type=int, required=True)
    o.add_argument("--max-length", type=float, default=None)
    o.set_defaults(func=cmd_orbits)

    c = sub.add_parser("czeta", help="Bartholdi zeta function of the underlying combinatorial graph")
    graph_arg(c)
    c.add_argument("--u", type=float, action="append")
    c.add_argument("--w", type=float, default=1.0)
    c.add_argument("--max-order", type=int, default=12)
    c.add_argument("--form", choices=("arc", "vertex", "series", "bruteforce"), default="arc")
    c.set_defaults(func=cmd_czeta)

    gt = sub.add_parser("green-trace", help="trace of the Green function")
    graph_arg(gt)
    gt.add_argument("--gamma", type=_complex_arg, action="append")
    gt.add_argument("--gamma-grid", type=_grid)
    gt.set_defaults(func=cmd_green_trace)

    v = sub.add_parser("validate", help="check the graph and its boundary conditions")
    graph_arg(v)
    v.set_defaults(func=cmd_validate)
    return p


def run_command(argv=None, stdout=None):
    """Run one command; returns the exit code."""
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    out = _Writer(stdout, args.precision)
    try:
        return args.func(args, out)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (NumericalError, ArithmeticError, np.linalg.LinAlgError) as e:
        print(f"numerical error: {e}", file=sys.stderr)
        return 3
    except QGraphError as e:  # pragma: no cover
        print(f"error: {e}", file=sys.stderr)
        return 3


def main():
    sys.exit(run_command())
