"""Reader and writer for the textual BIF (0.15) network format.

Supported: ``network``, ``variable`` (discrete, enumerated states) and
``probability`` blocks with either a ``table`` (child state varying fastest)
or per-parent-instantiation rows ``(s1, s2) v1, ..., vk;`` plus an optional
``default`` row.  ``property`` lines are kept verbatim.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import StructuralError
from .network import BayesNet, Variable, make_cpt


@dataclass(frozen=True)
class ParseDiagnostic:
    severity: str  # "warning" | "error"
    line: int
    message: str

    def __str__(self):
        return f"{self.severity}: line {self.line}: {self.message}"


class _Fail(Exception):
    def __init__(self, line: int, message: str):
        super().__init__(message)
        self.line = line
        self.message = message


_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<punct>[{}()\[\],;|])
  | (?P<word>[^\s{}()\[\],;|"]+)
    """,
    re.VERBOSE,
)


def _strip_comments(text: str) -> str:
    # keep newlines so line numbers survive
    def blank(m):
        return re.sub(r"[^\n]", " ", m.group(0))

    text = re.sub(r"/\*.*?(\*/|\Z)", blank, text, flags=re.S)
    return re.sub(r"//[^\n]*", blank, text)


def _tokens(text: str) -> Iterator[tuple[str, int]]:
    line = 1
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:  # pragma: no cover - the word class matches anything else
            raise _Fail(line, f"unexpected character {text[pos]!r}")
        kind = m.lastgroup
        tok = m.group(0)
        if kind != "ws":
            yield tok, line
        line += tok.count("\n")
        pos = m.end()


class _Stream:
    def __init__(self, toks):
        self.toks = list(toks)
        self.i = 0

    @property
    def line(self) -> int:
        if self.i < len(self.toks):
            return self.toks[self.i][1]
        return self.toks[-1][1] if self.toks else 1

    def peek(self) -> str | None:
        return self.toks[self.i][0] if self.i < len(self.toks) else None

    def next(self) -> str:
        if self.i >= len(self.toks):
            raise _Fail(self.line, "unexpected end of input")
        tok = self.toks[self.i][0]
        self.i += 1
        return tok

    def expect(self, tok: str) -> None:
        line = self.line
        got = self.next()
        if got != tok:
            raise _Fail(line, f"expected {tok!r}, found {got!r}")

    def name(self) -> str:
        line = self.line
        tok = self.next()
        if tok in "{}()[],;|" or tok.startswith('"'):
            raise _Fail(line, f"expected a name, found {tok!r}")
        return tok

    def number(self) -> float:
        line = self.line
        tok = self.next()
        try:
            val = float(tok)
        except ValueError:
            raise _Fail(line, f"expected a number, found {tok!r}") from None
        if not np.isfinite(val):
            raise _Fail(line, f"non-finite probability {tok!r}")
        return val

    def until_semicolon(self) -> str:
        parts = []
        while self.peek() != ";":
            parts.append(self.next())
        self.next()
        return " ".join(parts)


def _name_list(st: _Stream, close: str) -> list[str]:
    names = [st.name()]
    while st.peek() == ",":
        st.next()
        names.append(st.name())
    st.expect(close)
    return names


def _number_list(st: _Stream) -> list[float]:
    vals = [st.number()]
    while st.peek() == ",":
        st.next()
        vals.append(st.number())
    return vals


def _parse(text: str, diags: list[ParseDiagnostic]) -> BayesNet:
    st = _Stream(_tokens(_strip_comments(text)))
    net_name = "unknown"
    props: dict[str, list[str]] = {}
    variables: list[tuple[str, list[str]]] = []
    var_line: dict[str, int] = {}
    cpt_blocks: dict[str, tuple[list[str], object, int]] = {}

    while st.peek() is not None:
        line = st.line
        kw = st.next()
        if kw == "network":
            if st.peek() != "{":
                net_name = st.next()
                if net_name in "{}()[],;|":
                    raise _Fail(line, f"bad network name {net_name!r}")
            st.expect("{")
            while st.peek() != "}":
                if st.next() != "property":
                    raise _Fail(st.line, "only properties are allowed in a network block")
                props.setdefault("network", []).append(st.until_semicolon())
            st.expect("}")
        elif kw == "variable":
            name = st.name()
            if name in var_line:
                raise _Fail(line, f"duplicate variable {name!r}")
            st.expect("{")
            states = None
            while st.peek() != "}":
                item_line = st.line
                item = st.next()
                if item == "property":
                    props.setdefault(name, []).append(st.until_semicolon())
                elif item == "type":
                    vtype = st.next()
                    if vtype != "discrete":
                        raise _Fail(item_line, f"variable {name!r} has non-discrete type {vtype!r}")
                    st.expect("[")
                    count_tok = st.next()
                    if not count_tok.isdigit():
                        raise _Fail(item_line, f"bad state count {count_tok!r}")
                    st.expect("]")
                    st.expect("{")
                    states = _name_list(st, "}")
                    st.expect(";")
                    if int(count_tok) != len(states):
                        raise _Fail(item_line, f"variable {name!r} declares {count_tok} states but lists {len(states)}")
                    if len(set(states)) != len(states):
                        raise _Fail(item_line, f"variable {name!r} has duplicate state names")
                else:
                    raise _Fail(item_line, f"unexpected {item!r} in variable block")
            st.expect("}")
            if states is None:
                raise _Fail(line, f"variable {name!r} has no type declaration")
            var_line[name] = line
            variables.append((name, states))
        elif kw == "probability":
            st.expect("(")
            child = st.name()
            parents: list[str] = []
            if st.peek() == "|":
                st.next()
                parents = _name_list(st, ")")
            else:
                st.expect(")")
            for v in [child] + parents:
                if v not in var_line:
                    raise _Fail(line, f"probability block names undeclared variable {v!r}")
            if child in cpt_blocks:
                raise _Fail(line, f"duplicate probability block for {child!r}")
            if len(set(parents)) != len(parents) or child in parents:
                raise _Fail(line, f"repeated variable in probability header of {child!r}")
            st.expect("{")
            body: dict = {"table": None, "rows": {}, "default": None}
            while st.peek() != "}":
                item_line = st.line
                item = st.peek()
                if item == "table":
                    st.next()
                    body["table"] = (_number_list(st), item_line)
                    st.expect(";")
                elif item == "default":
                    st.next()
                    body["default"] = (_number_list(st), item_line)
                    st.expect(";")
                elif item == "property":
                    st.next()
                    props.setdefault("probability " + child, []).append(st.until_semicolon())
                elif item == "(":
                    st.next()
                    key = tuple(_name_list(st, ")"))
                    if key in body["rows"]:
                        raise _Fail(item_line, f"duplicate row {key} for {child!r}")
                    body["rows"][key] = (_number_list(st), item_line)
                    st.expect(";")
                else:
                    raise _Fail(item_line, f"unexpected {item!r} in probability block")
            st.expect("}")
            cpt_blocks[child] = (parents, body, line)
        else:
            raise _Fail(line, f"unexpected {kw!r} at top level")

    if not variables:
        raise _Fail(st.line, "no variables declared")
    index = {name: i for i, (name, _) in enumerate(variables)}
    states_of = {name: states for name, states in variables}
    cards = {i: len(states) for i, (_, states) in enumerate(variables)}
    var_objs = tuple(Variable(i, n, tuple(s)) for i, (n, s) in enumerate(variables))
    parents_out: list[tuple[int, ...]] = []
    cpts = []
    for name, _ in variables:
        if name not in cpt_blocks:
            raise _Fail(var_line[name], f"variable {name!r} has no probability block")
        pnames, body, line = cpt_blocks[name]
        k = len(states_of[name])
        pcards = [len(states_of[p]) for p in pnames]
        n_rows = int(np.prod(pcards)) if pcards else 1
        table = np.full((n_rows, k), np.nan)
        if body["default"] is not None:
            vals, dline = body["default"]
            if len(vals) != k:
                raise _Fail(dline, f"default row of {name!r} has {len(vals)} values, expected {k}")
            table[:] = vals
        if body["table"] is not None:
            vals, tline = body["table"]
            if len(vals) != n_rows * k:
                raise _Fail(tline, f"table of {name!r} has {len(vals)} values, expected {n_rows * k}")
            table[:] = np.asarray(vals).reshape(n_rows, k)
        for key, (vals, rline) in body["rows"].items():
            if len(key) != len(pnames):
                raise _Fail(rline, f"row {key} of {name!r} needs {len(pnames)} parent states")
            idx = 0
            for p, s in zip(pnames, key):
                if s not in states_of[p]:
                    raise _Fail(rline, f"unknown state {s!r} of {p!r}")
                idx = idx * len(states_of[p]) + states_of[p].index(s)
            if len(vals) != k:
                raise _Fail(rline, f"row {key} of {name!r} has {len(vals)} values, expected {k}")
            table[idx] = vals
        if np.isnan(table).any():
            raise _Fail(line, f"probability block of {name!r} does not cover every parent state")
        pa = tuple(index[p] for p in pnames)
        try:
            cpt, fixed = make_cpt(index[name], pa, table, cards)
        except StructuralError as exc:
            raise _Fail(line, str(exc)) from None
        if fixed:
            diags.append(ParseDiagnostic("warning", line, f"renormalized {fixed} row(s) of {name!r}"))
        parents_out.append(pa)
        cpts.append(cpt)
    try:
        return BayesNet(var_objs, tuple(parents_out), tuple(cpts), name=net_name, properties=props)
    except StructuralError as exc:
        raise _Fail(st.line, str(exc)) from None


def parse_bif(text: str | bytes) -> tuple[BayesNet | None, list[ParseDiagnostic]]:
    """Parse BIF text.  Never raises: problems come back as diagnostics and
    any error diagnostic means no network is returned."""
    diags: list[ParseDiagnostic] = []
    if isinstance(text, (bytes, bytearray)):
        try:
            text = bytes(text).decode("utf-8")
        except UnicodeDecodeError as exc:
            return None, [ParseDiagnostic("error", 1, f"input is not UTF-8: {exc.reason}")]
    try:
        net = _parse(text, diags)
    except _Fail as exc:
        return None, diags + [ParseDiagnostic("error", exc.line, exc.message)]
    except (RecursionError, MemoryError, ValueError, OverflowError) as exc:
        return None, diags + [ParseDiagnostic("error", 0, f"unparseable input: {exc}")]
    return net, diags


def read_bif(path) -> BayesNet:
    """Parse a ``.bif`` file, raising :class:`StructuralError` on errors."""
    with open(path, "rb") as fh:
        net, diags = parse_bif(fh.read())
    if net is None:
        raise StructuralError("; ".join(str(d) for d in diags if d.severity == "error"))
    return net


def serialize_bif(net: BayesNet) -> str:
    """BIF text that :func:`parse_bif` maps back onto the identical network."""
    out = [f"network {net.name} {{"]
    for p in net.properties.get("network", []):
        out.append(f"  property {p} ;")
    out.append("}")
    for v in net.variables:
        out.append(f"variable {v.name} {{")
        out.append(f"  type discrete [ {v.card} ] {{ {', '.join(v.states)} }};")
        for p in net.properties.get(v.name, []):
            out.append(f"  property {p} ;")
        out.append("}")
    for v in net.variables:
        pa = net.parents[v.id]
        table = net.cpts[v.id].transposed(pa + (v.id,)).reshape(-1, v.card)
        if pa:
            out.append(f"probability ( {v.name} | {', '.join(net.variables[p].name for p in pa)} ) {{")
            for idx in range(table.shape[0]):
                states = np.unravel_index(idx, [net.variables[p].card for p in pa])
                key = ", ".join(net.variables[p].states[s] for p, s in zip(pa, states))
                out.append(f"  ({key}) {', '.join(repr(float(x)) for x in table[idx])};")
        else:
            out.append(f"probability ( {v.name} ) {{")
            out.append(f"  table {', '.join(repr(float(x)) for x in table[0])};")
        for p in net.properties.get("probability " + v.name, []):
            out.append(f"  property {p} ;")
        out.append("}")
    return "\n".join(out) + "\n"
