"""Line-oriented text format (``.crn``) for reaction networks.

Example::

    # sodium chloride
    species Na, Cl2, NaCl
    2 Na + Cl2 <-> 2 NaCl : kf=1.0, kb=1.0
    NaCl -> 0 : kf=1e-3

``<->`` needs both ``kf`` and ``kb``; ``->`` takes ``kf`` only and creates a
phantom backward reaction. ``0`` denotes the empty side. Without a
``species`` header, species are declared in order of first appearance.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .errors import FluxnetError, ParseError
from .netcore import NetworkSpec, build_network

__all__ = ["NetworkDocument", "parse_document", "parse_network", "render_network"]

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\f\v]+)
  | (?P<arrow2><->)
  | (?P<arrow1>->)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z][A-Za-z0-9_]*)
  | (?P<punct>[+:,=-])
    """,
    re.VERBOSE,
)
_INT = re.compile(r"\d+\Z")
_RESERVED = {"species"}


@dataclass
class NetworkDocument:
    source: str
    parsed: Optional[NetworkSpec]
    diagnostics: list = field(default_factory=list)
    has_header: bool = False


class _LineError(Exception):
    def __init__(self, col, msg):
        self.col = col
        self.msg = msg


def _tokenize(line: str):
    toks = []
    pos = 0
    while pos < len(line):
        m = _TOKEN.match(line, pos)
        if m is None:
            raise _LineError(pos + 1, f"unexpected character {line[pos]!r}")
        kind = m.lastgroup
        if kind != "ws":
            if kind in ("arrow1", "arrow2", "punct"):
                kind = m.group()
            toks.append((kind, m.group(), pos + 1))
        pos = m.end()
    return toks


class _Cursor:
    def __init__(self, toks, eol_col):
        self.toks = toks
        self.i = 0
        self.eol_col = eol_col

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else ("eol", "", self.eol_col)

    def next(self):
        t = self.peek()
        self.i += 1
        return t

    def expect(self, kind, what=None):
        t = self.next()
        if t[0] != kind:
            found = "end of line" if t[0] == "eol" else repr(t[1])
            raise _LineError(t[2], f"expected {what or kind}, found {found}")
        return t


def _parse_side(cur: _Cursor):
    """Returns list of (coefficient, name, column)."""
    t = cur.peek()
    if t[0] == "num" and t[1] == "0":
        cur.next()
        nxt = cur.peek()
        if nxt[0] == "ident":
            raise _LineError(t[2], "coefficient must be a positive integer")
        return []
    terms = []
    while True:
        t = cur.peek()
        coef = 1
        if t[0] == "num":
            if not _INT.match(t[1]):
                raise _LineError(t[2], f"stoichiometric coefficient must be an integer, got {t[1]!r}")
            coef = int(t[1])
            if coef == 0:
                raise _LineError(t[2], "coefficient must be a positive integer")
            cur.next()
        name = cur.expect("ident", "species name")
        if name[1] in _RESERVED:
            raise _LineError(name[2], f"{name[1]!r} is a reserved word")
        terms.append((coef, name[1], name[2]))
        if cur.peek()[0] != "+":
            return terms
        plus = cur.next()
        nxt = cur.peek()
        if nxt[0] not in ("num", "ident"):
            raise _LineError(plus[2], "dangling '+'")


def _parse_number(cur: _Cursor, key: str) -> float:
    sign = 1.0
    if cur.peek()[0] == "-":
        cur.next()
        sign = -1.0
    t = cur.expect("num", f"number for {key}")
    val = sign * float(t[1])
    if val < 0:
        raise _LineError(t[2], f"negative rate constant {key}={val}")
    if val != val or val == float("inf"):
        raise _LineError(t[2], f"rate constant {key} must be finite")
    return val


def _parse_rates(cur: _Cursor, reversible: bool):
    key = cur.expect("ident", "'kf'")
    if key[1] != "kf":
        raise _LineError(key[2], f"expected 'kf', found {key[1]!r}")
    cur.expect("=", "'='")
    kf = _parse_number(cur, "kf")
    kb = 0.0
    t = cur.peek()
    if t[0] == ",":
        cur.next()
        key = cur.expect("ident", "'kb'")
        if key[1] == "kf":
            raise _LineError(key[2], "duplicate definition of kf")
        if key[1] != "kb":
            raise _LineError(key[2], f"expected 'kb', found {key[1]!r}")
        if not reversible:
            raise _LineError(key[2], "'kb' is not allowed with one-way arrow '->'")
        cur.expect("=", "'='")
        kb = _parse_number(cur, "kb")
    elif reversible:
        raise _LineError(t[2], "reversible reaction '<->' requires kb")
    end = cur.peek()
    if end[0] != "eol":
        raise _LineError(end[2], f"unexpected {end[1]!r} after rates")
    return kf, kb


def parse_document(text) -> NetworkDocument:
    """Parse without raising; errors are collected as diagnostics."""
    if isinstance(text, (bytes, bytearray)):
        try:
            text = bytes(text).decode("utf-8")
        except UnicodeDecodeError as e:
            return NetworkDocument(str(text), None, [(1, e.start + 1, "invalid UTF-8")])
    diags = []
    header = None
    header_line = None
    auto_species: list[str] = []
    reactions = []  # (lhs, rhs, kf, kb, lineno)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        try:
            toks = _tokenize(line)
            if not toks:
                continue
            cur = _Cursor(toks, len(line) + 1)
            first = toks[0]
            if first[0] == "ident" and first[1] == "species":
                if header is not None:
                    raise _LineError(first[2], f"duplicate species header (first on line {header_line})")
                if reactions:
                    raise _LineError(first[2], "species header must precede reactions")
                cur.next()
                names = []
                if cur.peek()[0] != "eol":
                    while True:
                        t = cur.expect("ident", "species name")
                        if t[1] in _RESERVED:
                            raise _LineError(t[2], f"{t[1]!r} is a reserved word")
                        if t[1] in names:
                            raise _LineError(t[2], f"duplicate definition of species {t[1]!r}")
                        names.append(t[1])
                        if cur.peek()[0] == "eol":
                            break
                        cur.expect(",", "','")
                header, header_line = names, lineno
                continue
            lhs = _parse_side(cur)
            arrow = cur.next()
            if arrow[0] not in ("<->", "->"):
                found = "end of line" if arrow[0] == "eol" else repr(arrow[1])
                raise _LineError(arrow[2], f"expected '->' or '<->', found {found}")
            rhs = _parse_side(cur)
            cur.expect(":", "':'")
            kf, kb = _parse_rates(cur, arrow[0] == "<->")
            for _, name, col in lhs + rhs:
                if header is not None:
                    if name not in header:
                        raise _LineError(col, f"unknown species {name!r}")
                elif name not in auto_species:
                    auto_species.append(name)
            reactions.append((lhs, rhs, kf, kb))
        except _LineError as e:
            diags.append((lineno, e.col, e.msg))
    if diags:
        return NetworkDocument(text, None, diags)
    species = header if header is not None else auto_species
    index = {s: i for i, s in enumerate(species)}
    pairs = []
    for lhs, rhs, kf, kb in reactions:
        a = [0] * len(species)
        b = [0] * len(species)
        for coef, name, _ in lhs:
            a[index[name]] += coef
        for coef, name, _ in rhs:
            b[index[name]] += coef
        pairs.append((a, b, kf, kb))
    try:
        net = build_network(species, pairs)
    except FluxnetError as e:  # pragma: no cover - grammar prevents this
        return NetworkDocument(text, None, [(0, 0, str(e))])
    return NetworkDocument(text, net, [], header is not None)


def parse_network(text) -> NetworkSpec:
    doc = parse_document(text)
    if doc.parsed is None:
        raise ParseError(doc.diagnostics)
    return doc.parsed


def _render_side(net: NetworkSpec, coeffs) -> str:
    terms = []
    for name, k in zip(net.species, coeffs):
        if k == 1:
            terms.append(name)
        elif k > 1:
            terms.append(f"{k} {name}")
    return " + ".join(terms) if terms else "0"


def render_network(net: NetworkSpec) -> str:
    """Canonical text form; ``parse_network(render_network(net)) == net``."""
    lines = ["species " + ", ".join(net.species) if net.species else "species"]
    for k in range(net.fw_count):
        f = net.reactions[k]
        b = net.reactions[net.bw(k)]
        lhs = _render_side(net, f.reactants)
        rhs = _render_side(net, f.products)
        if b.phantom:
            lines.append(f"{lhs} -> {rhs} : kf={f.omega!r}")
        else:
            lines.append(f"{lhs} <-> {rhs} : kf={f.omega!r}, kb={b.omega!r}")
    return "\n".join(lines) + "\n"
