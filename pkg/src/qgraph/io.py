"""Graph documents: YAML in, GraphSpec out, and back.

Example document::

    format: 1
    name: ring
    vertices: [O]
    bonds:
      - {id: b1, from: O, to: O, length: 1.0, flux: 0.5}
    boundary:
      O: {delta: {lambda: 0.0}}

Vertex conditions: ``{delta: {lambda: x}}``, ``{delta_prime: {mu: x}}``,
``dirichlet``, ``neumann`` or ``{general: {C: rows, D: rows}}``; matrix entries
may be numbers or strings such as ``"1+2j"``.  Vertices without an entry get
``delta`` with lambda 0.  Potentials: ``{kind: zero}``,
``{kind: piecewise_constant, breakpoints: [...], values: [...]}`` or
``{kind: polynomial, coefficients: [...]}``.
"""

from __future__ import annotations

import math
from pathlib import Path

import yaml

from .errors import ParseError
from .graphspec import BondSpec, GraphSpec, PotentialSpec, VertexCondition

FORMAT_VERSION = 1


def _line(node):
    return node.start_mark.line + 1 if node is not None and node.start_mark else None


def _scalar(node, field):
    if not isinstance(node, yaml.ScalarNode):
        raise ParseError("expected a scalar", _line(node), field)
    return node.value


def _number(node, field, allow_inf=True):
    s = _scalar(node, field).strip()
    low = s.lower()
    if low in (".inf", "+.inf", "inf", "+inf", "infinity"):
        if not allow_inf:
            raise ParseError("infinite value not allowed", _line(node), field)
        return math.inf
    if low in ("-.inf", "-inf"):
        if not allow_inf:
            raise ParseError("infinite value not allowed", _line(node), field)
        return -math.inf
    try:
        x = float(s)
    except ValueError:
        raise ParseError(f"expected a number, got {s!r}", _line(node), field) from None
    if math.isnan(x):
        raise ParseError("NaN is not allowed", _line(node), field)
    return x


def _complex(node, field):
    s = _scalar(node, field).strip().replace(" ", "").replace("i", "j")
    try:
        return complex(s)
    except ValueError:
        raise ParseError(f"expected a complex number, got {s!r}", _line(node), field) from None


def _mapping(node, field):
    if not isinstance(node, yaml.MappingNode):
        raise ParseError("expected a mapping", _line(node), field)
    out = {}
    for k, v in node.value:
        key = _scalar(k, field)
        if key in out:
            raise ParseError(f"duplicate key {key!r}", _line(k), field)
        out[key] = (k, v)
    return out


def _sequence(node, field):
    if not isinstance(node, yaml.SequenceNode):
        raise ParseError("expected a list", _line(node), field)
    return node.value


def _check_keys(m, allowed, field, node):
    extra = set(m) - set(allowed)
    if extra:
        k = sorted(extra)[0]
        raise ParseError(f"unknown key {k!r}", _line(m[k][0]), field)


def _numbers(node, field):
    return tuple(_number(x, f"{field}[{i}]", allow_inf=False) for i, x in enumerate(_sequence(node, field)))


def _potential(node, field):
    m = _mapping(node, field)
    _check_keys(m, ("kind", "breakpoints", "values", "coefficients"), field, node)
    if "kind" not in m:
        raise ParseError("missing 'kind'", _line(node), field)
    kind = _scalar(m["kind"][1], field + ".kind")
    try:
        if kind == "zero":
            return PotentialSpec.zero()
        if kind == "piecewise_constant":
            bp = _numbers(m["breakpoints"][1], field + ".breakpoints") if "breakpoints" in m else ()
            if "values" not in m:
                raise ParseError("missing 'values'", _line(node), field)
            return PotentialSpec.piecewise_constant(bp, _numbers(m["values"][1], field + ".values"))
        if kind == "polynomial":
            if "coefficients" not in m:
                raise ParseError("missing 'coefficients'", _line(node), field)
            return PotentialSpec.polynomial(_numbers(m["coefficients"][1], field + ".coefficients"))
    except ValueError as e:
        if isinstance(e, ParseError):
            raise
        raise ParseError(str(e), _line(node), field) from None
    raise ParseError(f"unknown potential kind {kind!r}", _line(m["kind"][1]), field + ".kind")


def _matrix(node, field):
    rows = _sequence(node, field)
    out = [tuple(_complex(x, f"{field}[{i}][{j}]") for j, x in enumerate(_sequence(r, f"{field}[{i}]")))
           for i, r in enumerate(rows)]
    if out and len({len(r) for r in out}) != 1:
        raise ParseError("rows have different lengths", _line(node), field)
    return tuple(out)


def _condition(node, field):
    if isinstance(node, yaml.ScalarNode):
        v = node.value
        if v == "dirichlet":
            return VertexCondition.dirichlet()
        if v == "neumann":
            return VertexCondition.neumann()
        raise ParseError(f"unknown vertex condition {v!r}", _line(node), field)
    m = _mapping(node, field)
    if len(m) != 1:
        raise ParseError("a vertex condition has exactly one kind", _line(node), field)
    kind, (knode, body) = next(iter(m.items()))
    f = f"{field}.{kind}"
    if kind == "delta":
        b = _mapping(body, f)
        _check_keys(b, ("lambda",), f, body)
        return VertexCondition.delta(_number(b["lambda"][1], f + ".lambda") if "lambda" in b else 0.0)
    if kind == "delta_prime":
        b = _mapping(body, f)
        _check_keys(b, ("mu",), f, body)
        return VertexCondition.delta_prime(_number(b["mu"][1], f + ".mu") if "mu" in b else 0.0)
    if kind in ("dirichlet", "neumann"):
        return VertexCondition.dirichlet() if kind == "dirichlet" else VertexCondition.neumann()
    if kind == "general":
        b = _mapping(body, f)
        _check_keys(b, ("C", "D"), f, body)
        if "C" not in b or "D" not in b:
            raise ParseError("general condition needs C and D", _line(body), f)
        return VertexCondition.general(_matrix(b["C"][1], f + ".C"), _matrix(b["D"][1], f + ".D"))
    raise ParseError(f"unknown vertex condition {kind!r}", _line(knode), field)


def parse_graph(text) -> GraphSpec:
    """Parse a graph document.  Errors carry the line number and the field path."""
    try:
        root = yaml.compose(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        raise ParseError(f"malformed document: {getattr(e, 'problem', e)}",
                         mark.line + 1 if mark else None) from None
    if root is None:
        raise ParseError("empty document")
    top = _mapping(root, "document")
    _check_keys(top, ("format", "name", "vertices", "bonds", "boundary"), "document", root)
    if "format" in top:
        fmt = _scalar(top["format"][1], "format")
        if fmt != str(FORMAT_VERSION):
            raise ParseError(f"unsupported format {fmt!r}", _line(top["format"][1]), "format")
    name = _scalar(top["name"][1], "name") if "name" in top else ""
    if "bonds" not in top:
        raise ParseError("missing 'bonds'", _line(root), "document")

    bonds = []
    seen_vertices = []
    for i, bn in enumerate(_sequence(top["bonds"][1], "bonds")):
        m = _mapping(bn, f"bonds[{i}]")
        bid = _scalar(m["id"][1], f"bonds[{i}].id") if "id" in m else f"b{i + 1}"
        field = f"bond {bid}"
        _check_keys(m, ("id", "from", "to", "length", "flux", "potential"), field, bn)
        for key in ("from", "to", "length"):
            if key not in m:
                raise ParseError(f"missing '{key}'", _line(bn), field)
        tail = _scalar(m["from"][1], field + ".from")
        head = _scalar(m["to"][1], field + ".to")
        length = _number(m["length"][1], field + ".length", allow_inf=False)
        flux = _number(m["flux"][1], field + ".flux", allow_inf=False) if "flux" in m else 0.0
        pot = _potential(m["potential"][1], field + ".potential") if "potential" in m else PotentialSpec()
        bonds.append(BondSpec(bid, tail, head, length, flux, pot))
        for v in (tail, head):
            if v not in seen_vertices:
                seen_vertices.append(v)

    if "vertices" in top:
        vertices = [_scalar(v, "vertices") for v in _sequence(top["vertices"][1], "vertices")]
    else:
        vertices = seen_vertices

    boundary = []
    if "boundary" in top:
        bm = _mapping(top["boundary"][1], "boundary")
        for v, (knode, vnode) in bm.items():
            if v not in vertices:
                raise ParseError(f"boundary for unknown vertex {v!r}", _line(knode), "boundary")
            boundary.append((v, _condition(vnode, f"boundary.{v}")))
    return GraphSpec(tuple(vertices), tuple(bonds), tuple(boundary), name)


def load_graph(path) -> GraphSpec:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ParseError(f"cannot read {path}: {e.strerror}") from None
    return parse_graph(text)


# ---------------------------------------------------------------------------
# emitting
# ---------------------------------------------------------------------------

def _num(x):
    if math.isinf(x):
        return ".inf" if x > 0 else "-.inf"
    return repr(float(x))


def _cnum(z):
    z = complex(z)
    if z.imag == 0:
        return _num(z.real)
    return f'"{z!r}"'.replace("(", "").replace(")", "")


def _flow(xs, fmt=_num):
    return "[" + ", ".join(fmt(x) for x in xs) + "]"


def _quote(s):
    return yaml.safe_dump(s, default_style=None).strip().removesuffix("...").strip()


def _emit_potential(p):
    if p.kind == "zero":
        return "{kind: zero}"
    if p.kind == "piecewise_constant":
        return f"{{kind: piecewise_constant, breakpoints: {_flow(p.breakpoints)}, values: {_flow(p.values)}}}"
    return f"{{kind: polynomial, coefficients: {_flow(p.coefficients)}}}"


def _emit_condition(c):
    if c.kind == "delta":
        return "dirichlet" if c.is_infinite else f"{{delta: {{lambda: {_num(c.value)}}}}}"
    if c.kind == "delta_prime":
        return "neumann" if c.is_infinite else f"{{delta_prime: {{mu: {_num(c.value)}}}}}"
    C = "[" + ", ".join(_flow(r, _cnum) for r in c.C) + "]"
    D = "[" + ", ".join(_flow(r, _cnum) for r in c.D) + "]"
    return f"{{general: {{C: {C}, D: {D}}}}}"


def emit_graph(spec: GraphSpec) -> str:
    """Canonical document: every field explicit, one boundary entry per vertex."""
    lines = [f"format: {FORMAT_VERSION}"]
    if spec.name:
        lines.append(f"name: {_quote(spec.name)}")
    lines.append("vertices: [" + ", ".join(_quote(v) for v in spec.vertices) + "]")
    lines.append("bonds:")
    for b in spec.bonds:
        item = (f"  - {{id: {_quote(b.id)}, from: {_quote(b.tail)}, to: {_quote(b.head)}, "
                f"length: {_num(b.length)}, flux: {_num(b.flux)}")
        if not (b.potential.kind == "zero"):
            item += f", potential: {_emit_potential(b.potential)}"
        lines.append(item + "}")
    lines.append("boundary:")
    for v in spec.vertices:
        lines.append(f"  {_quote(v)}: {_emit_condition(spec.condition(v))}")
    return "\n".join(lines) + "\n"


def canonical(spec: GraphSpec) -> GraphSpec:
    """The GraphSpec with explicit boundary entries in vertex order."""
    return GraphSpec(spec.vertices, spec.bonds, tuple((v, spec.condition(v)) for v in spec.vertices), spec.name)
