"""Mini-SPARQL SELECT: PREFIX, basic graph patterns, regex FILTER, LIMIT/OFFSET.

Evaluation is a nested-loop join over the union of the given graphs with bag
semantics; anything outside the subset raises an "unsupported SPARQL
feature" error so callers can answer with a clear 400.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from .graph import Graph
from .terms import (
    BUILTIN_PREFIXES,
    Iri,
    Literal,
    RDF_LANG_STRING,
    RDF_TYPE,
    RDFS_LABEL,
    Term,
    Triple,
    XSD_BOOLEAN,
    XSD_DECIMAL,
    XSD_INTEGER,
    XSD_STRING,
    triple_key,
)


class QueryError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        place = f" (line {line}, column {col})" if line else ""
        super().__init__(f"{message}{place}")
        self.message = message
        self.line = line
        self.col = col


class QuerySyntaxError(QueryError):
    pass


class UnsupportedQueryError(QueryError):
    pass


@dataclass(frozen=True)
class Var:
    name: str


PatternTerm = Union[Term, Var]
TriplePattern = tuple[PatternTerm, PatternTerm, PatternTerm]
Solution = dict[str, Term]


@dataclass
class RegexFilter:
    var: str
    pattern: str
    flags: str = ""


@dataclass
class Query:
    prefixes: dict[str, str] = field(default_factory=dict)
    projection: Union[list[str], str] = "*"  # list of names or "*"
    patterns: list[TriplePattern] = field(default_factory=list)
    filters: list[RegexFilter] = field(default_factory=list)
    limit: Optional[int] = None
    offset: Optional[int] = None

    def pattern_variables(self) -> list[str]:
        seen: dict[str, None] = {}
        for pattern in self.patterns:
            for position in pattern:
                if isinstance(position, Var):
                    seen.setdefault(position.name, None)
        return list(seen)

    def projected_variables(self) -> list[str]:
        if self.projection == "*":
            return self.pattern_variables()
        return list(self.projection)


_UNSUPPORTED_KEYWORDS = {
    "OPTIONAL", "UNION", "ORDER", "CONSTRUCT", "ASK", "DESCRIBE", "INSERT",
    "DELETE", "GRAPH", "BIND", "VALUES", "MINUS", "SERVICE", "DISTINCT",
    "REDUCED", "GROUP", "HAVING", "FROM", "BASE", "WITH", "LOAD", "CLEAR",
    "DROP", "CREATE", "EXISTS", "NOT",
}

_TOKEN_RE = re.compile(
    r"""(?P<ws>\s+|\#[^\n]*)
      | (?P<iriref><[^<>\s]*>)
      | (?P<var>\?[A-Za-z_][A-Za-z0-9_]*)
      | (?P<string>"(?:[^"\\\n]|\\.)*")
      | (?P<decimal>[+-]?[0-9]*\.[0-9]+)
      | (?P<integer>[+-]?[0-9]+)
      | (?P<dtype>\^\^)
      | (?P<langtag>@[A-Za-z]+(?:-[A-Za-z0-9]+)*)
      | (?P<punct>[{}().,;*])
      | (?P<pname>(?:[A-Za-z_][A-Za-z0-9_.\-]*)?:(?:[A-Za-z0-9_][A-Za-z0-9_.\-]*)?)
      | (?P<word>[A-Za-z_][A-Za-z0-9_\-]*)
    """,
    re.VERBOSE,
)

_STRING_ESCAPES = {"t": "\t", "b": "\b", "n": "\n", "r": "\r", "f": "\f", '"': '"', "'": "'", "\\": "\\"}


@dataclass
class _Tok:
    kind: str
    value: str
    line: int
    col: int


def _tokenize_query(text: str) -> list[_Tok]:
    tokens: list[_Tok] = []
    pos = 0
    line = 1
    line_start = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            col = pos - line_start + 1
            raise QuerySyntaxError(f"unexpected character {text[pos]!r}", line, col)
        col = pos - line_start + 1
        chunk = text[pos : m.end()]
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(_Tok(kind, chunk, line, col))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rfind("\n") + 1
        pos = m.end()
    tokens.append(_Tok("eof", "", line, len(text) - line_start + 1))
    return tokens


class _QueryParser:
    def __init__(self, tokens: list[_Tok]):
        self.tokens = tokens
        self.pos = 0
        self.query = Query(prefixes=dict(BUILTIN_PREFIXES))

    def peek(self) -> _Tok:
        return self.tokens[self.pos]

    def take(self) -> _Tok:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, message: str, tok: Optional[_Tok] = None, unsupported: bool = False):
        tok = tok or self.peek()
        cls = UnsupportedQueryError if unsupported else QuerySyntaxError
        raise cls(message, tok.line, tok.col)

    def keyword(self, tok: _Tok) -> Optional[str]:
        if tok.kind == "word":
            return tok.value.upper()
        return None

    def check_supported(self, tok: _Tok) -> None:
        if self.keyword(tok) in _UNSUPPORTED_KEYWORDS:
            self.fail("unsupported SPARQL feature", tok, unsupported=True)

    def parse(self) -> Query:
        while True:
            tok = self.peek()
            kw = self.keyword(tok)
            if kw == "PREFIX":
                self.take()
                name = self.take()
                if name.kind != "pname" or not name.value.endswith(":"):
                    self.fail("expected prefix name", name)
                iriref = self.take()
                if iriref.kind != "iriref":
                    self.fail("expected namespace IRI", iriref)
                self.query.prefixes[name.value[:-1]] = iriref.value[1:-1]
                continue
            break
        tok = self.take()
        if self.keyword(tok) != "SELECT":
            self.check_supported(tok)
            self.fail("expected SELECT", tok)
        self.projection()
        tok = self.take()
        if self.keyword(tok) == "WHERE":
            tok = self.take()
        if not (tok.kind == "punct" and tok.value == "{"):
            self.check_supported(tok)
            self.fail("expected {", tok)
        self.group()
        self.modifiers()
        tok = self.peek()
        if tok.kind != "eof":
            self.check_supported(tok)
            self.fail(f"unexpected trailing {tok.value!r}", tok)
        _validate(self.query)
        return self.query

    def projection(self) -> None:
        tok = self.peek()
        if tok.kind == "punct" and tok.value == "*":
            self.take()
            self.query.projection = "*"
            return
        names: list[str] = []
        while self.peek().kind == "var":
            names.append(self.take().value[1:])
        if not names:
            self.check_supported(self.peek())
            self.fail("expected * or variables after SELECT")
        self.query.projection = names

    def group(self) -> None:
        while True:
            tok = self.peek()
            if tok.kind == "punct" and tok.value == "}":
                self.take()
                return
            if tok.kind == "eof":
                self.fail("unterminated group: expected }", tok)
            if self.keyword(tok) == "FILTER":
                self.take()
                self.filter_clause()
            else:
                self.check_supported(tok)
                s = self.pattern_term(allow_literal=False)
                p = self.pattern_term(allow_literal=False, allow_a=True)
                o = self.pattern_term(allow_literal=True)
                self.query.patterns.append((s, p, o))
            tok = self.peek()
            if tok.kind == "punct" and tok.value == ".":
                self.take()

    def filter_clause(self) -> None:
        tok = self.take()
        if self.keyword(tok) != "REGEX":
            self.fail("only regex() filters are supported", tok, unsupported=True)
        self.expect_punct("(")
        var = self.take()
        if var.kind != "var":
            self.fail("regex() needs a variable first", var)
        self.expect_punct(",")
        pattern = self.take()
        if pattern.kind != "string":
            self.fail("regex() needs a string pattern", pattern)
        flags = ""
        if self.peek().kind == "punct" and self.peek().value == ",":
            self.take()
            ftok = self.take()
            if ftok.kind != "string":
                self.fail("regex() flags must be a string", ftok)
            flags = _decode_string(ftok.value, self, ftok)
        self.expect_punct(")")
        self.query.filters.append(
            RegexFilter(var.value[1:], _decode_string(pattern.value, self, pattern), flags)
        )

    def expect_punct(self, value: str) -> None:
        tok = self.take()
        if tok.kind != "punct" or tok.value != value:
            self.fail(f"expected {value!r}", tok)

    def modifiers(self) -> None:
        while True:
            tok = self.peek()
            kw = self.keyword(tok)
            if kw == "LIMIT" or kw == "OFFSET":
                self.take()
                num = self.take()
                if num.kind != "integer" or num.value.startswith("-"):
                    self.fail(f"{kw} needs a non-negative integer", num)
                if kw == "LIMIT":
                    self.query.limit = int(num.value)
                else:
                    self.query.offset = int(num.value)
                continue
            return

    def pattern_term(self, allow_literal: bool, allow_a: bool = False) -> PatternTerm:
        tok = self.take()
        if tok.kind == "var":
            return Var(tok.value[1:])
        if tok.kind == "iriref":
            try:
                return Iri(tok.value[1:-1])
            except ValueError:
                self.fail("IRI must be absolute", tok)
        if tok.kind == "pname":
            prefix, _, local = tok.value.partition(":")
            ns = self.query.prefixes.get(prefix)
            if ns is None:
                self.fail(f"undeclared prefix {prefix!r}", tok)
            return Iri(ns + local)
        if tok.kind == "word":
            if allow_a and tok.value == "a":
                return Iri(RDF_TYPE)
            if allow_literal and tok.value in ("true", "false"):
                return Literal(tok.value, XSD_BOOLEAN)
            self.check_supported(tok)
            self.fail(f"unexpected word {tok.value!r}", tok)
        if allow_literal:
            if tok.kind == "string":
                lexical = _decode_string(tok.value, self, tok)
                nxt = self.peek()
                if nxt.kind == "langtag":
                    self.take()
                    return Literal(lexical, RDF_LANG_STRING, nxt.value[1:])
                if nxt.kind == "dtype":
                    self.take()
                    dtype = self.pattern_term(allow_literal=False)
                    if not isinstance(dtype, Iri):
                        self.fail("expected datatype IRI")
                    return Literal(lexical, dtype.text)
                return Literal(lexical, XSD_STRING)
            if tok.kind == "integer":
                return Literal(tok.value, XSD_INTEGER)
            if tok.kind == "decimal":
                return Literal(tok.value, XSD_DECIMAL)
        self.fail(f"expected {'term' if allow_literal else 'IRI or variable'}, found {tok.value!r}", tok)


def _decode_string(raw: str, parser: _QueryParser, tok: _Tok) -> str:
    body = raw[1:-1]
    out = []
    i = 0
    while i < len(body):
        c = body[i]
        if c == "\\":
            i += 1
            if i >= len(body):
                parser.fail("bad escape", tok)
            esc = body[i]
            if esc in "uU":
                width = 4 if esc == "u" else 8
                out.append(chr(int(body[i + 1 : i + 1 + width], 16)))
                i += width
            elif esc in _STRING_ESCAPES:
                out.append(_STRING_ESCAPES[esc])
            else:
                parser.fail(f"bad escape \\{esc}", tok)
            i += 1
        else:
            out.append(c)
            i += 1
    return "".join(out)


def parse_query(text: str) -> Query:
    """Parse a SELECT query in the supported subset."""
    parser = _QueryParser(_tokenize_query(text))
    return parser.parse()


def _validate(query: Query) -> None:
    in_patterns = set(query.pattern_variables())
    if query.projection != "*":
        for name in query.projection:
            if name not in in_patterns:
                raise QuerySyntaxError(f"projected variable ?{name} occurs in no pattern")
    for f in query.filters:
        if f.var not in in_patterns:
            raise QuerySyntaxError(f"filtered variable ?{f.var} occurs in no pattern")


def _lexical(term: Term) -> str:
    return term.text if isinstance(term, Iri) else term.lexical


def _compile_filter(f: RegexFilter) -> "re.Pattern[str]":
    flags = re.IGNORECASE if "i" in f.flags else 0
    try:
        return re.compile(f.pattern, flags)
    except re.error as exc:
        raise QueryError(f"invalid regex: {exc}") from exc


def evaluate(query: Query, graphs: Iterable[Graph]) -> list[Solution]:
    """Nested-loop join in pattern order; bag semantics; offset/limit/projection last."""
    union = sorted({t for g in graphs for t in g.triples}, key=triple_key)
    solutions: list[Solution] = [{}]
    for pattern in query.patterns:
        extended: list[Solution] = []
        for solution in solutions:
            for triple in union:
                bound = _match_pattern(pattern, triple, solution)
                if bound is not None:
                    extended.append(bound)
        solutions = extended
        if not solutions:
            break
    for f in query.filters:
        regex = _compile_filter(f)
        solutions = [
            s for s in solutions if f.var in s and regex.search(_lexical(s[f.var])) is not None
        ]
    if query.offset:
        solutions = solutions[query.offset :]
    if query.limit is not None:
        solutions = solutions[: query.limit]
    projected = query.projected_variables()
    return [{v: s[v] for v in projected if v in s} for s in solutions]


def _match_pattern(pattern: TriplePattern, triple: Triple, solution: Solution) -> Optional[Solution]:
    bound = solution
    for position, value in zip(pattern, (triple.subject, triple.predicate, triple.object)):
        if isinstance(position, Var):
            existing = bound.get(position.name)
            if existing is None:
                if bound is solution:
                    bound = dict(solution)
                bound[position.name] = value
            elif existing != value:
                return None
        elif position != value:
            return None
    return bound if bound is not solution else dict(solution)


def search_labels(pattern: str, graphs: Iterable[Graph], limit: Optional[int] = None) -> list[tuple[Iri, str]]:
    """Resources whose rdfs:label matches the regex (case-insensitive), sorted by label then IRI."""
    query = Query(
        projection=["s", "l"],
        patterns=[(Var("s"), Iri(RDFS_LABEL), Var("l"))],
        filters=[RegexFilter("l", pattern, "i")],
        limit=limit,
    )
    pairs = []
    for solution in evaluate(query, graphs):
        subject = solution["s"]
        label = solution["l"]
        if isinstance(subject, Iri) and isinstance(label, Literal):
            pairs.append((subject, label.lexical))
    pairs.sort(key=lambda p: (p[1], p[0].text))
    return pairs


def solutions_to_json(query: Query, solutions: list[Solution]) -> dict:
    """SPARQL 1.1 JSON results (subset): head.vars plus results.bindings."""
    variables = query.projected_variables()
    bindings = []
    for solution in solutions:
        row = {}
        for name in variables:
            term = solution.get(name)
            if term is None:
                continue
            if isinstance(term, Iri):
                row[name] = {"type": "uri", "value": term.text}
            else:
                cell: dict = {"type": "literal", "value": term.lexical}
                if term.lang:
                    cell["xml:lang"] = term.lang
                elif term.datatype != XSD_STRING:
                    cell["datatype"] = term.datatype
                row[name] = cell
        bindings.append(row)
    return {"head": {"vars": variables}, "results": {"bindings": bindings}}
