"""Reader and canonical printer for ``.crs`` documents.

A document is a list of sections, each a block of ``key = value`` lines::

    [hypersurface]
    name = heis
    vars = z1 z2
    rho = -Im(z2) + |z1|^2

    [point]
    name = p0
    on = heis
    coords = 0, 0

    [map]
    name = F
    source = heis
    target = model
    components = z1, 0, z2
    basepoint = p0

Expressions support ``+ - * /``, integer powers, ``conj(e)``, ``Im(e)``,
``Re(e)`` and ``|e|^k`` for even k. ``i`` is the imaginary unit and ``3i``
is shorthand for ``3*i``. Map components may be a single radical
``(base)^(p/q)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ParseError, UsageError
from .gaussian import I, GaussianRational, gr
from .hypersurface import Hypersurface, SurfacePoint
from .mapping import MapJet, Radical
from .poly import PolarizedPoly

SECTIONS = ("hypersurface", "point", "map")
KEYS = {
    "hypersurface": ("name", "vars", "distinguished", "rho"),
    "point": ("name", "on", "coords"),
    "map": ("name", "source", "target", "components", "basepoint"),
}
REQUIRED = {
    "hypersurface": ("name", "vars", "rho"),
    "point": ("name", "on", "coords"),
    "map": ("name", "source", "target", "components"),
}


# --------------------------------------------------------------------------
# tokens

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+|\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^(),|])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    col: int


def tokenize(text: str, line: int = 1, col0: int = 1, source: str | None = None) -> list[Token]:
    source = text if source is None else source
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col0 + pos, source)
        kind = m.lastgroup
        if kind != "ws":
            tok = m.group()
            # 3i means 3*i
            if kind == "num" and text.startswith("i", m.end()) and not re.match(
                    r"i[A-Za-z0-9_]", text[m.end():]):
                out.append(Token("num", tok, col0 + pos))
                out.append(Token("op", "*", col0 + m.end()))
                out.append(Token("ident", "i", col0 + m.end()))
                pos = m.end() + 1
                continue
            out.append(Token(kind, tok, col0 + pos))
        pos = m.end()
    out.append(Token("end", "", col0 + len(text)))
    return out


# --------------------------------------------------------------------------
# syntax tree

@dataclass(frozen=True)
class Num:
    value: object


@dataclass(frozen=True)
class Var:
    name: str
    col: int


@dataclass(frozen=True)
class Unary:
    op: str
    arg: object


@dataclass(frozen=True)
class Binary:
    op: str
    left: object
    right: object
    col: int = 0


@dataclass(frozen=True)
class Call:
    func: str
    arg: object


@dataclass(frozen=True)
class Pow:
    base: object
    exponent: Fraction
    col: int
    parenthesized: bool = False


@dataclass(frozen=True)
class Abs:
    arg: object
    power: int
    col: int


class _Parser:
    def __init__(self, text: str, line: int, col0: int, source: str, float_ok: bool):
        self.tokens = tokenize(text, line, col0, source)
        self.i = 0
        self.line = line
        self.source = source
        self.float_ok = float_ok

    def error(self, msg: str, tok: Token | None = None):
        tok = tok or self.peek()
        raise ParseError(msg, self.line, tok.col, self.source)

    def peek(self) -> Token:
        return self.tokens[self.i]

    def take(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def accept(self, text: str) -> bool:
        if self.peek().kind == "op" and self.peek().text == text:
            self.i += 1
            return True
        return False

    def expect(self, text: str):
        if not self.accept(text):
            tok = self.peek()
            self.error(f"expected {text!r}, found {tok.text or 'end of input'!r}", tok)

    def parse_all(self):
        node = self.expr()
        if self.peek().kind != "end":
            self.error(f"unexpected {self.peek().text!r}")
        return node

    def expr(self):
        node = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.take().text
            node = Binary(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek().kind == "op" and self.peek().text in "*/":
            tok = self.take()
            node = Binary(tok.text, node, self.unary(), tok.col)
        return node

    def unary(self):
        if self.accept("-"):
            return Unary("-", self.unary())
        if self.accept("+"):
            return self.unary()
        return self.power()

    def power(self):
        start = self.peek()
        node, paren = self.base()
        if self.peek().kind == "op" and self.peek().text == "^":
            caret = self.take()
            exp = self.exponent()
            return Pow(node, exp, caret.col, paren and start.text == "(")
        return node

    def exponent(self) -> Fraction:
        tok = self.peek()
        if tok.kind == "num":
            self.take()
            if not tok.text.isdigit():
                self.error("exponent must be a non-negative integer", tok)
            return Fraction(int(tok.text))
        if self.accept("("):
            p = self.take()
            if p.kind != "num" or not p.text.isdigit():
                self.error("expected integer numerator in exponent", p)
            q = 1
            if self.accept("/"):
                qt = self.take()
                if qt.kind != "num" or not qt.text.isdigit() or int(qt.text) == 0:
                    self.error("expected positive integer denominator in exponent", qt)
                q = int(qt.text)
            self.expect(")")
            return Fraction(int(p.text), q)
        self.error("expected exponent", tok)

    def base(self):
        tok = self.take()
        if tok.kind == "num":
            if re.fullmatch(r"\d+", tok.text):
                return Num(gr(int(tok.text))), False
            if not self.float_ok:
                raise ParseError("decimal literal requires --backend float", self.line, tok.col,
                                 self.source)
            return Num(complex(float(tok.text))), False
        if tok.kind == "ident":
            if tok.text in ("conj", "Im", "Re") and self.peek().text == "(":
                self.take()
                arg = self.expr()
                self.expect(")")
                return Call(tok.text, arg), False
            if tok.text == "i":
                return Num(I), False
            return Var(tok.text, tok.col), False
        if tok.kind == "op" and tok.text == "(":
            node = self.expr()
            self.expect(")")
            return node, True
        if tok.kind == "op" and tok.text == "|":
            arg = self.expr()
            self.expect("|")
            caret = self.peek()
            self.expect("^")
            k = self.exponent()
            if k.denominator != 1 or k.numerator % 2:
                self.error("odd power inside |.|^k: exponent must be an even integer", caret)
            return Abs(arg, int(k), tok.col), False
        self.error(f"unexpected {tok.text or 'end of input'!r}", tok)


def parse_expr(text: str, *, line: int = 1, col0: int = 1, source: str | None = None,
               float_ok: bool = False):
    return _Parser(text, line, col0, text if source is None else source, float_ok).parse_all()


# --------------------------------------------------------------------------
# lowering

class _Lowering:
    def __init__(self, names, line, source, allow_radical=False):
        self.names = list(names)
        self.index = {n: k for k, n in enumerate(self.names)}
        self.n = len(self.names)
        self.line = line
        self.source = source
        self.allow_radical = allow_radical

    def error(self, msg, col):
        raise ParseError(msg, self.line, col, self.source)

    def top(self, node):
        if isinstance(node, Pow) and node.exponent.denominator != 1 and self.allow_radical:
            if not node.parenthesized:
                self.error("radical base must be parenthesized", node.col)
            base = self.lower(node.base)
            if not base.is_holomorphic():
                self.error("radical base must be holomorphic", node.col)
            return Radical(base, node.exponent)
        return self.lower(node)

    def lower(self, node) -> PolarizedPoly:
        n = self.n
        if isinstance(node, Num):
            return PolarizedPoly.const(n, node.value)
        if isinstance(node, Var):
            if node.name not in self.index:
                self.error(f"unknown variable {node.name!r}", node.col)
            return PolarizedPoly.var(n, self.index[node.name])
        if isinstance(node, Unary):
            return -self.lower(node.arg)
        if isinstance(node, Binary):
            a = self.lower(node.left)
            b = self.lower(node.right)
            if node.op == "+":
                return a + b
            if node.op == "-":
                return a - b
            if node.op == "*":
                return a * b
            if b.degree() > 0 or b.is_zero():
                self.error("division only by a nonzero constant", node.col)
            return a / b.constant_term()
        if isinstance(node, Call):
            a = self.lower(node.arg)
            if node.func == "conj":
                return a.conjugate()
            if node.func == "Re":
                return (a + a.conjugate()) / 2
            return (a - a.conjugate()) / (2 * I)
        if isinstance(node, Pow):
            if node.exponent.denominator != 1:
                self.error("fractional exponent allowed only as a whole map component", node.col)
            return self.lower(node.base) ** int(node.exponent)
        if isinstance(node, Abs):
            a = self.lower(node.arg)
            return (a * a.conjugate()) ** (node.power // 2)
        raise TypeError(node)


def lower(text: str, names, *, float_ok: bool = False, allow_radical: bool = False,
          line: int = 1, col0: int = 1, source: str | None = None):
    """Parse ``text`` and lower it to a polynomial over ``names`` (or a Radical)."""
    source = text if source is None else source
    node = parse_expr(text, line=line, col0=col0, source=source, float_ok=float_ok)
    return _Lowering(names, line, source, allow_radical).top(node)


def parse_poly(text: str, names, float_ok: bool = False) -> PolarizedPoly:
    return lower(text, names, float_ok=float_ok)


def parse_constant(text: str, float_ok: bool = False, **kw):
    p = lower(text, [], float_ok=float_ok, **kw)
    return p.constant_term()


# --------------------------------------------------------------------------
# documents

@dataclass(frozen=True)
class PointDecl:
    name: str
    on: str
    coords: tuple


@dataclass(frozen=True)
class MapDecl:
    name: str
    source: str
    target: str
    components: tuple
    basepoint: str | None = None


@dataclass
class Document:
    hypersurfaces: dict = field(default_factory=dict)
    points: dict = field(default_factory=dict)
    maps: dict = field(default_factory=dict)

    def hypersurface(self, name: str | None = None) -> Hypersurface:
        return _lookup(self.hypersurfaces, name, "hypersurface")

    def point(self, name: str | None = None) -> PointDecl:
        return _lookup(self.points, name, "point")

    def map_decl(self, name: str | None = None) -> MapDecl:
        return _lookup(self.maps, name, "map")

    def map_jet(self, name: str | None = None) -> MapJet:
        decl = self.map_decl(name)
        src = self.hypersurfaces[decl.source]
        bp = None
        if decl.basepoint is not None:
            pt = self.points[decl.basepoint]
            bp = SurfacePoint(pt.coords, False, pt.on)
        return MapJet(decl.components, src.nvars, bp, decl.name)

    def __eq__(self, other):
        if not isinstance(other, Document):
            return NotImplemented
        return (self.hypersurfaces == other.hypersurfaces and self.points == other.points
                and self.maps == other.maps)


def _lookup(table: dict, name: str | None, kind: str):
    if name is None:
        if len(table) == 1:
            return next(iter(table.values()))
        if not table:
            raise UsageError(f"document declares no {kind}")
        raise UsageError(f"document declares several {kind}s; name one of "
                         f"{', '.join(table)}")
    if name not in table:
        raise UsageError(f"unknown {kind} {name!r}")
    return table[name]


@dataclass
class _Section:
    kind: str
    line: int
    entries: dict = field(default_factory=dict)  # key -> (value, line, col, raw line)


def _split_sections(text: str) -> list[_Section]:
    sections = []
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].rstrip()
        stripped = body.strip()
        if not stripped:
            continue
        m = re.fullmatch(r"\[\s*([A-Za-z_]+)\s*\]", stripped)
        if m:
            kind = m.group(1)
            if kind not in SECTIONS:
                raise ParseError(f"unknown section [{kind}]", lineno, raw.index("[") + 1, raw)
            current = _Section(kind, lineno)
            sections.append(current)
            continue
        if current is None:
            raise ParseError("content before the first section header", lineno,
                             len(raw) - len(raw.lstrip()) + 1, raw)
        if "=" not in body:
            raise ParseError("expected 'key = value'", lineno, len(raw) - len(raw.lstrip()) + 1, raw)
        key_part, value = body.split("=", 1)
        key = key_part.strip()
        if key not in KEYS[current.kind]:
            raise ParseError(f"unknown key {key!r} in [{current.kind}]", lineno,
                             raw.index(key) + 1, raw)
        if key in current.entries:
            raise ParseError(f"duplicate key {key!r}", lineno, raw.index(key) + 1, raw)
        col = len(key_part) + 2 + (len(value) - len(value.lstrip()))
        current.entries[key] = (value.strip(), lineno, col, raw)
    return sections


def _split_list(value: str, col: int):
    """Split a comma list at depth 0; returns (piece, column) pairs."""
    pieces, depth, start, bars = [], 0, 0, 0
    for k, ch in enumerate(value):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "|":
            bars ^= 1
        elif ch == "," and depth == 0 and not bars:
            pieces.append((value[start:k], start))
            start = k + 1
    pieces.append((value[start:], start))
    out = []
    for piece, off in pieces:
        lead = len(piece) - len(piece.lstrip())
        out.append((piece.strip(), col + off + lead))
    return out


def parse_document(text: str, *, float_ok: bool = False) -> Document:
    doc = Document()
    sections = _split_sections(text)

    def need(sec, key):
        if key not in sec.entries:
            raise ParseError(f"[{sec.kind}] section is missing {key!r}", sec.line, 1,
                             f"[{sec.kind}]")
        return sec.entries[key]

    def check_name(sec, table):
        value, line, col, raw = need(sec, "name")
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_.-]*", value):
            raise ParseError(f"invalid name {value!r}", line, col, raw)
        if value in doc.hypersurfaces or value in doc.points or value in doc.maps:
            raise ParseError(f"duplicate name {value!r}", line, col, raw)
        return value

    for sec in sections:
        for key in REQUIRED[sec.kind]:
            need(sec, key)
        if sec.kind != "hypersurface":
            continue
        name = check_name(sec, doc.hypersurfaces)
        value, line, col, raw = need(sec, "vars")
        names = tuple(v for v in re.split(r"[\s,]+", value) if v)
        for v in names:
            if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", v) or v in ("i", "conj", "Im", "Re"):
                raise ParseError(f"invalid variable name {v!r}", line, col + value.index(v), raw)
        if len(set(names)) != len(names):
            raise ParseError("repeated variable name", line, col, raw)
        distinguished = -1
        if "distinguished" in sec.entries:
            dv, dline, dcol, draw = sec.entries["distinguished"]
            if dv not in names:
                raise ParseError(f"distinguished variable {dv!r} not in vars", dline, dcol, draw)
            distinguished = names.index(dv)
        rv, rline, rcol, rraw = need(sec, "rho")
        rho = lower(rv, names, float_ok=float_ok, line=rline, col0=rcol, source=rraw)
        tol = 1e-12 if not rho.is_float() else 1e-9
        doc.hypersurfaces[name] = Hypersurface(rho, names, distinguished, name, tol)

    for sec in sections:
        if sec.kind != "point":
            continue
        name = check_name(sec, doc.points)
        on, line, col, raw = need(sec, "on")
        if on not in doc.hypersurfaces:
            raise ParseError(f"point refers to unknown hypersurface {on!r}", line, col, raw)
        value, line, col, raw = need(sec, "coords")
        coords = tuple(parse_constant(piece, float_ok=float_ok, line=line, col0=c, source=raw)
                       for piece, c in _split_list(value, col))
        if len(coords) != doc.hypersurfaces[on].nvars:
            raise ParseError(f"point has {len(coords)} coordinates, {on} has "
                             f"{doc.hypersurfaces[on].nvars} variables", line, col, raw)
        doc.points[name] = PointDecl(name, on, coords)

    for sec in sections:
        if sec.kind != "map":
            continue
        name = check_name(sec, doc.maps)
        ends = []
        for key in ("source", "target"):
            value, line, col, raw = need(sec, key)
            if value not in doc.hypersurfaces:
                raise ParseError(f"map {key} refers to unknown hypersurface {value!r}", line, col, raw)
            ends.append(value)
        src, tgt = (doc.hypersurfaces[e] for e in ends)
        value, line, col, raw = need(sec, "components")
        comps = tuple(lower(piece, src.names, float_ok=float_ok, allow_radical=True, line=line,
                            col0=c, source=raw)
                      for piece, c in _split_list(value, col))
        if len(comps) != tgt.nvars:
            raise ParseError(f"map has {len(comps)} components, target {tgt.name} has "
                             f"{tgt.nvars} variables", line, col, raw)
        for comp, (piece, c) in zip(comps, _split_list(value, col)):
            base = comp.base if isinstance(comp, Radical) else comp
            if not base.is_holomorphic():
                raise ParseError("map component is not holomorphic", line, c, raw)
        basepoint = None
        if "basepoint" in sec.entries:
            bv, bline, bcol, braw = sec.entries["basepoint"]
            if bv not in doc.points or doc.points[bv].on != ends[0]:
                raise ParseError(f"basepoint {bv!r} is not a declared point on {ends[0]}",
                                 bline, bcol, braw)
            basepoint = bv
        doc.maps[name] = MapDecl(name, ends[0], ends[1], comps, basepoint)
    return doc


def load_document(path, *, float_ok: bool = False) -> Document:
    with open(path, encoding="utf-8") as fh:
        return parse_document(fh.read(), float_ok=float_ok)


# --------------------------------------------------------------------------
# canonical printing

def format_constant(c) -> str:
    if isinstance(c, GaussianRational):
        return str(c)
    c = complex(c)
    if c.imag == 0:
        return repr(c.real)
    return f"{c.real!r}{'+' if c.imag >= 0 else '-'}{abs(c.imag)!r}*i"


def format_component(comp, names) -> str:
    if isinstance(comp, Radical):
        e = comp.exponent
        return f"({comp.base.format(names)})^({e.numerator}/{e.denominator})"
    return comp.format(names)


def format_document(doc: Document) -> str:
    blocks = []
    for H in doc.hypersurfaces.values():
        blocks.append("\n".join([
            "[hypersurface]",
            f"name = {H.name}",
            f"vars = {' '.join(H.names)}",
            f"distinguished = {H.names[H.distinguished]}",
            f"rho = {H.rho.format(H.names)}",
        ]))
    for p in doc.points.values():
        blocks.append("\n".join([
            "[point]",
            f"name = {p.name}",
            f"on = {p.on}",
            f"coords = {', '.join(format_constant(c) for c in p.coords)}",
        ]))
    for m in doc.maps.values():
        names = doc.hypersurfaces[m.source].names
        lines = [
            "[map]",
            f"name = {m.name}",
            f"source = {m.source}",
            f"target = {m.target}",
            f"components = {', '.join(format_component(c, names) for c in m.components)}",
        ]
        if m.basepoint is not None:
            lines.append(f"basepoint = {m.basepoint}")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


__all__ = [
    "Document", "MapDecl", "PointDecl", "format_document", "load_document", "lower",
    "parse_constant", "parse_document", "parse_expr", "parse_poly", "tokenize",
]
