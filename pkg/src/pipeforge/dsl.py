"""The pseudocode pipeline language: parser, printer and token counter.

One statement wires one node:

    pali_1_out = pali_1: pali(image=input_image_1, prompt=input_text_1)

Grammar (one statement per line):

    statement := [ident "="] ident ":" ident "(" arglist? ")"
    arglist   := arg ("," arg)*
    arg       := ident "=" (ident | string-literal)

Lines ending in a bare "label:" are section headers; "//" starts a comment.
String literals know exactly two escapes: \\" and \\\\.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

MAX_LINE_LENGTH = 10_000

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_SECTION_RE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*):$")
_NODE_ID_RE = re.compile(r"^(.*)_([1-9][0-9]*)$")


class DslError(ValueError):
    pass


@dataclass(frozen=True)
class VarRef:
    name: str


@dataclass(frozen=True)
class StringLiteral:
    value: str


@dataclass(frozen=True)
class Arg:
    name: str
    value: VarRef | StringLiteral


@dataclass(frozen=True)
class Statement:
    output_var: str | None
    node_id: str
    node_type: str
    args: tuple[Arg, ...]
    source_line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class SectionMarker:
    """A section header and the index of the statement it precedes."""

    label: str
    index: int


@dataclass(frozen=True)
class PseudoProgram:
    statements: tuple[Statement, ...] = ()
    sections: tuple[SectionMarker, ...] = ()


@dataclass(frozen=True)
class Diagnostic:
    line: int
    message: str


@dataclass(frozen=True)
class ParseResult:
    program: PseudoProgram
    diagnostics: tuple[Diagnostic, ...]


def node_type_of(node_id: str) -> str | None:
    """The node type implied by a node id, or None if the id has no _<int> suffix."""
    m = _NODE_ID_RE.match(node_id)
    return m.group(1) if m else None


class _LineScanner:
    """Tokenizer for a single statement line."""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def _skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos] in " \t":
            self.pos += 1

    def peek(self) -> str | None:
        self._skip_ws()
        if self.pos >= len(self.text):
            return None
        return self.text[self.pos]

    def take_symbol(self, sym: str) -> bool:
        if self.peek() == sym:
            self.pos += 1
            return True
        return False

    def take_ident(self) -> str | None:
        self._skip_ws()
        m = _IDENT_RE.match(self.text, self.pos)
        if not m:
            return None
        self.pos = m.end()
        return m.group(0)

    def take_string(self) -> str:
        """Consume a double-quoted literal; caller has seen the opening quote."""
        assert self.text[self.pos] == '"'
        self.pos += 1
        out: list[str] = []
        while self.pos < len(self.text):
            ch = self.text[self.pos]
            if ch == "\\":
                if self.pos + 1 >= len(self.text):
                    raise DslError("dangling backslash in string literal")
                nxt = self.text[self.pos + 1]
                if nxt not in ('"', "\\"):
                    raise DslError(f"unsupported escape \\{nxt} in string literal")
                out.append(nxt)
                self.pos += 2
            elif ch == '"':
                self.pos += 1
                return "".join(out)
            else:
                out.append(ch)
                self.pos += 1
        raise DslError("unterminated string literal")

    def at_end(self) -> bool:
        return self.peek() is None


def _parse_statement_line(text: str, lineno: int) -> Statement:
    sc = _LineScanner(text)

    first = sc.take_ident()
    if first is None:
        raise DslError("expected an identifier")

    output_var: str | None = None
    if sc.take_symbol("="):
        output_var = first
        node_id = sc.take_ident()
        if node_id is None:
            raise DslError("expected a node id after '='")
    else:
        node_id = first

    if not sc.take_symbol(":"):
        raise DslError("expected ':' after the node id")
    node_type = sc.take_ident()
    if node_type is None:
        raise DslError("expected a node type after ':'")
    if not sc.take_symbol("("):
        raise DslError("expected '(' after the node type")

    args: list[Arg] = []
    names: set[str] = set()
    if not sc.take_symbol(")"):
        while True:
            name = sc.take_ident()
            if name is None:
                raise DslError("expected an argument name")
            if name in names:
                raise DslError(f"duplicate argument name {name!r}")
            names.add(name)
            if not sc.take_symbol("="):
                raise DslError(f"expected '=' after argument {name!r}")
            nxt = sc.peek()
            value: VarRef | StringLiteral
            if nxt == '"':
                value = StringLiteral(sc.take_string())
            else:
                ref = sc.take_ident()
                if ref is None:
                    raise DslError(f"expected a value for argument {name!r}")
                value = VarRef(ref)
            args.append(Arg(name, value))
            if sc.take_symbol(")"):
                break
            if not sc.take_symbol(","):
                raise DslError("expected ',' or ')' in argument list")

    if not sc.at_end():
        raise DslError("unexpected trailing text after ')'")

    implied = node_type_of(node_id)
    if implied != node_type:
        raise DslError(
            f"node id {node_id!r} does not match node type {node_type!r} "
            "(expected <type>_<n>)"
        )

    return Statement(
        output_var=output_var,
        node_id=node_id,
        node_type=node_type,
        args=tuple(args),
        source_line=lineno,
    )


def parse(source: str) -> ParseResult:
    """Parse pseudocode into a program plus per-line diagnostics.

    Every line is accounted for: it becomes a statement, a section header,
    a comment/blank, or a diagnostic. Parseable lines survive even when
    neighbours fail, so callers can salvage partial programs.
    """
    if not source.strip():
        raise DslError("empty pseudocode")

    statements: list[Statement] = []
    sections: list[SectionMarker] = []
    diagnostics: list[Diagnostic] = []

    for lineno, raw in enumerate(source.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("//"):
            continue
        if len(raw) > MAX_LINE_LENGTH:
            diagnostics.append(Diagnostic(lineno, "line exceeds maximum length"))
            continue
        m = _SECTION_RE.match(line)
        if m:
            sections.append(SectionMarker(m.group(1), len(statements)))
            continue
        try:
            statements.append(_parse_statement_line(line, lineno))
        except DslError as exc:
            diagnostics.append(Diagnostic(lineno, str(exc)))

    program = PseudoProgram(statements=tuple(statements), sections=tuple(sections))
    return ParseResult(program=program, diagnostics=tuple(diagnostics))


def _escape(value: str) -> str:
    return value.replace("\\", "\\\\").replace('"', '\\"')


def _format_statement(stmt: Statement) -> str:
    parts = []
    if stmt.output_var is not None:
        parts.append(f"{stmt.output_var} = ")
    parts.append(f"{stmt.node_id}: {stmt.node_type}(")
    rendered = []
    for arg in stmt.args:
        if isinstance(arg.value, VarRef):
            rendered.append(f"{arg.name}={arg.value.name}")
        else:
            rendered.append(f'{arg.name}="{_escape(arg.value.value)}"')
    parts.append(", ".join(rendered))
    parts.append(")")
    return "".join(parts)


def print_program(program: PseudoProgram) -> str:
    """Render a program in canonical form; parse(print_program(P)) == P.

    Raises DslError naming the statement index when an invariant is broken.
    """
    for i, stmt in enumerate(program.statements):
        if node_type_of(stmt.node_id) != stmt.node_type:
            raise DslError(f"statement {i}: node id/type mismatch")
        names = [a.name for a in stmt.args]
        if len(names) != len(set(names)):
            raise DslError(f"statement {i}: duplicate argument names")

    by_index: dict[int, list[str]] = {}
    for marker in program.sections:
        by_index.setdefault(marker.index, []).append(marker.label)

    lines: list[str] = []
    for i, stmt in enumerate(program.statements):
        for label in by_index.get(i, []):
            lines.append(f"{label}:")
        lines.append(_format_statement(stmt))
    for label in by_index.get(len(program.statements), []):
        lines.append(f"{label}:")

    return "\n".join(lines) + ("\n" if lines else "")


_TOKEN_RE = re.compile(r"[A-Za-z0-9_]+|[^\sA-Za-z0-9_]")


def token_count(text: str) -> int:
    """Deterministic token count for relative size comparisons.

    Rule: each line is split into identifier/number runs and single
    punctuation characters; every non-empty line then contributes one
    extra end-of-line token (input is normalized to end with a newline).
    """
    count = 0
    for line in text.splitlines():
        tokens = _TOKEN_RE.findall(line)
        if tokens:
            count += len(tokens) + 1
    return count
