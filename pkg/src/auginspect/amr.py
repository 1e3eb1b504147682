"""PENMAN parsing and serialization for semantic graphs.

Graphs are ingested, never predicted: the sidecar file supplies pre-parsed
PENMAN blocks keyed by instance id. The parser accepts the usual surface
syntax: ``(var / concept :role target ...)`` where a target is a nested
definition, a bare variable reference (reentrancy, possibly forward), a
quoted string literal, or a constant such as ``-`` or ``12``.

Serialization is canonical: single line, nodes printed at their first
depth-first encounter from the root, later references emitted bare. One
parse/serialize round trip reaches a fixpoint.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

_VARIABLE = re.compile(r"^[a-z][0-9]*$")
_ATOM_CHARS = re.compile(r"[^\s()]+")


class PenmanError(ValueError):
    pass


@dataclass
class AmrGraph:
    root: str
    nodes: dict[str, str] = field(default_factory=dict)  # variable -> concept
    edges: list[tuple[str, str, str]] = field(default_factory=list)

    def validate(self) -> None:
        if self.root not in self.nodes:
            raise PenmanError(f"root {self.root!r} is not a defined variable")
        for src, role, _ in self.edges:
            if src not in self.nodes:
                raise PenmanError(f"edge source {src!r} is not a defined variable")
            if not role.startswith(":"):
                raise PenmanError(f"role {role!r} does not start with ':'")
        reachable = {self.root}
        frontier = [self.root]
        while frontier:
            var = frontier.pop()
            for src, _, target in self.edges:
                if src == var and target in self.nodes and target not in reachable:
                    reachable.add(target)
                    frontier.append(target)
        unreachable = set(self.nodes) - reachable
        if unreachable:
            raise PenmanError(f"nodes unreachable from root: {sorted(unreachable)}")

    def out_edges(self, var: str) -> list[tuple[str, str, str]]:
        return [e for e in self.edges if e[0] == var]


class _Tokenizer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def _skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str | None:
        self._skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else None

    def next_token(self) -> tuple[str, str]:
        """Returns (kind, value); kind in {open, close, slash, atom, string}."""
        self._skip_ws()
        if self.pos >= len(self.text):
            raise PenmanError("unbalanced parentheses: unexpected end of input")
        ch = self.text[self.pos]
        if ch == "(":
            self.pos += 1
            return "open", "("
        if ch == ")":
            self.pos += 1
            return "close", ")"
        if ch == "/":
            self.pos += 1
            return "slash", "/"
        if ch == '"':
            end = self.pos + 1
            while end < len(self.text):
                if self.text[end] == "\\":
                    end += 2
                    continue
                if self.text[end] == '"':
                    break
                end += 1
            if end >= len(self.text):
                raise PenmanError(f"unterminated string literal at offset {self.pos}")
            value = self.text[self.pos:end + 1]
            self.pos = end + 1
            return "string", value
        match = _ATOM_CHARS.match(self.text, self.pos)
        if not match:
            raise PenmanError(f"unexpected character {ch!r} at offset {self.pos}")
        value = match.group()
        # '/' binds tighter than atom characters so 'go-02)' does not eat ')'
        self.pos = match.end()
        return "atom", value


def parse_penman(text: str) -> AmrGraph:
    """Parse one parenthesized PENMAN expression into a graph."""
    if not text.strip():
        raise PenmanError("empty input")
    tok = _Tokenizer(text)
    nodes: dict[str, str] = {}
    raw_edges: list[tuple[str, str, str, str]] = []  # (src, role, target, ttype)

    def parse_node() -> str:
        kind, value = tok.next_token()
        if kind != "open":
            raise PenmanError(f"expected '(' but found {value!r}")
        kind, var = tok.next_token()
        if kind != "atom":
            raise PenmanError(f"expected a variable after '(' but found {var!r}")
        if var in nodes:
            raise PenmanError(f"duplicate variable definition: {var!r}")
        kind, value = tok.next_token()
        if kind != "slash":
            raise PenmanError(f"expected '/' after variable {var!r}")
        kind, concept = tok.next_token()
        if kind != "atom":
            raise PenmanError(f"expected a concept after '{var} /'")
        nodes[var] = concept
        while True:
            kind, value = tok.next_token()
            if kind == "close":
                return var
            if kind != "atom" or not value.startswith(":"):
                raise PenmanError(f"role token {value!r} does not start with ':'")
            role = value
            nxt = tok.peek()
            if nxt is None:
                raise PenmanError("unbalanced parentheses: unexpected end of input")
            if nxt == "(":
                child = parse_node()
                raw_edges.append((var, role, child, "var"))
            else:
                kind, target = tok.next_token()
                if kind == "string":
                    raw_edges.append((var, role, target, "const"))
                elif kind == "atom":
                    raw_edges.append((var, role, target, "ref"))
                else:
                    raise PenmanError(f"unexpected {target!r} after role {role}")

    root = parse_node()
    if tok.peek() is not None:
        raise PenmanError("unbalanced parentheses: trailing input after the graph")

    edges: list[tuple[str, str, str]] = []
    for src, role, target, ttype in raw_edges:
        if ttype == "ref" and target not in nodes and _VARIABLE.match(target):
            raise PenmanError(f"dangling reference to undefined variable {target!r}")
        edges.append((src, role, target))

    graph = AmrGraph(root=root, nodes=nodes, edges=edges)
    graph.validate()
    return graph


def serialize_penman(graph: AmrGraph) -> str:
    """Canonical single-line serialization; inverse of parse up to node order."""
    graph.validate()
    printed: set[str] = set()

    def emit(var: str) -> str:
        printed.add(var)
        parts = [f"({var} / {graph.nodes[var]}"]
        for _, role, target in graph.out_edges(var):
            if target in graph.nodes:
                rendered = emit(target) if target not in printed else target
            else:
                rendered = target
            parts.append(f" {role} {rendered}")
        return "".join(parts) + ")"

    return emit(graph.root)


_ID_HEADER = re.compile(r"^#\s*::id\s+(\S+)")


def load_amr_sidecar(path: str | Path) -> dict[str, AmrGraph]:
    """Read a sidecar of blank-line separated PENMAN blocks with # ::id headers."""
    content = Path(path).read_text("utf-8")
    graphs: dict[str, AmrGraph] = {}
    for index, block in enumerate(re.split(r"\n\s*\n", content)):
        if not block.strip():
            continue
        block_id = None
        graph_lines = []
        for line in block.splitlines():
            header = _ID_HEADER.match(line.strip())
            if header:
                block_id = header.group(1)
            elif line.strip().startswith("#"):
                continue  # other metadata headers
            else:
                graph_lines.append(line)
        if block_id is None:
            raise PenmanError(f"sidecar block {index + 1} has no '# ::id' header")
        if block_id in graphs:
            raise PenmanError(f"sidecar defines id {block_id!r} twice")
        try:
            graphs[block_id] = parse_penman("\n".join(graph_lines))
        except PenmanError as exc:
            raise PenmanError(f"id {block_id}: {exc}") from None
    return graphs
