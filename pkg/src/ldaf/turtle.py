"""Turtle subset: hand-written tokenizer/parser plus a deterministic serializer.

Supported syntax: ``@prefix`` / ``@base`` directives, ``<IRI>`` references,
prefixed names, the ``a`` keyword, predicate lists (``;``), object lists
(``,``), quoted string literals with ``^^datatype`` or ``@lang``, bare
integer/decimal/boolean shorthand, labeled blank nodes (skolemized), and
``#`` comments.  Collections, anonymous blank nodes, and triple-quoted
strings are rejected as unsupported features.
"""
from __future__ import annotations

import re
import secrets
from dataclasses import dataclass
from typing import Optional
from urllib.parse import urljoin

from .terms import (
    Iri,
    Literal,
    RDF_TYPE,
    Triple,
    XSD_BOOLEAN,
    XSD_DECIMAL,
    XSD_INTEGER,
    XSD_STRING,
    is_valid_decimal,
    is_valid_integer,
    term_key,
)


class TurtleError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, column {col})")
        self.message = message
        self.line = line
        self.col = col


class TurtleSyntaxError(TurtleError):
    pass


class TurtleUnsupportedError(TurtleError):
    """A construct outside the supported Turtle subset."""


@dataclass
class Token:
    kind: str
    value: str
    line: int
    col: int


_PNAME_CHARS = re.compile(r"[A-Za-z0-9_.\-À-￿]")
_PNAME_FIRST = re.compile(r"[A-Za-z_À-￿]")
_ECHAR = {"t": "\t", "b": "\b", "n": "\n", "r": "\r", "f": "\f", '"': '"', "'": "'", "\\": "\\"}


def _tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    n = len(text)
    line = 1
    col = 1

    def err(msg: str, kind=TurtleSyntaxError) -> TurtleError:
        return kind(msg, line, col)

    def advance(k: int = 1) -> None:
        nonlocal i, line, col
        for _ in range(k):
            if i < n and text[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    def read_uchar() -> str:
        # after the backslash; i points at 'u' or 'U'
        nonlocal i
        width = 4 if text[i] == "u" else 8
        hexpart = text[i + 1 : i + 1 + width]
        if len(hexpart) < width or not all(c in "0123456789abcdefABCDEF" for c in hexpart):
            raise err("bad unicode escape")
        advance(width + 1)
        return chr(int(hexpart, 16))

    while i < n:
        c = text[i]
        if c in " \t\r\n":
            advance()
            continue
        if c == "#":
            while i < n and text[i] != "\n":
                advance()
            continue
        tline, tcol = line, col
        if c in "([":
            raise TurtleUnsupportedError("unsupported Turtle feature", tline, tcol)
        if c in ")]":
            raise err("unexpected " + repr(c))
        if c == "'":
            raise TurtleUnsupportedError("unsupported Turtle feature", tline, tcol)
        if c == ".":
            # dot may also start a decimal like .5
            if i + 1 < n and text[i + 1].isdigit():
                pass  # handled by the number branch below
            else:
                tokens.append(Token("dot", ".", tline, tcol))
                advance()
                continue
        if c == ";":
            tokens.append(Token("semi", ";", tline, tcol))
            advance()
            continue
        if c == ",":
            tokens.append(Token("comma", ",", tline, tcol))
            advance()
            continue
        if c == "<":
            advance()
            out = []
            while i < n and text[i] != ">":
                ch = text[i]
                if ch in " \n\r\t":
                    raise err("whitespace inside IRI reference")
                if ch == "\\":
                    advance()
                    if i < n and text[i] in "uU":
                        out.append(read_uchar())
                        continue
                    raise err("bad escape in IRI reference")
                out.append(ch)
                advance()
            if i >= n:
                raise err("unterminated IRI reference")
            advance()
            tokens.append(Token("iriref", "".join(out), tline, tcol))
            continue
        if c == '"':
            if text[i : i + 3] == '"""':
                raise TurtleUnsupportedError("unsupported Turtle feature", tline, tcol)
            advance()
            out = []
            while True:
                if i >= n:
                    raise err("unterminated string literal")
                ch = text[i]
                if ch == '"':
                    advance()
                    break
                if ch in "\n\r":
                    raise err("newline in string literal")
                if ch == "\\":
                    advance()
                    if i >= n:
                        raise err("unterminated string literal")
                    esc = text[i]
                    if esc in "uU":
                        out.append(read_uchar())
                        continue
                    if esc not in _ECHAR:
                        raise err(f"bad string escape \\{esc}")
                    out.append(_ECHAR[esc])
                    advance()
                    continue
                out.append(ch)
                advance()
            tokens.append(Token("string", "".join(out), tline, tcol))
            continue
        if c == "^":
            if text[i : i + 2] != "^^":
                raise err("expected ^^")
            tokens.append(Token("dtype", "^^", tline, tcol))
            advance(2)
            continue
        if c == "@":
            advance()
            start = i
            while i < n and (text[i].isalnum() or text[i] == "-"):
                advance()
            word = text[start:i]
            if word == "prefix":
                tokens.append(Token("at_prefix", word, tline, tcol))
            elif word == "base":
                tokens.append(Token("at_base", word, tline, tcol))
            elif re.fullmatch(r"[A-Za-z]+(-[A-Za-z0-9]+)*", word):
                tokens.append(Token("langtag", word, tline, tcol))
            else:
                raise err(f"bad @ directive or language tag: @{word}")
            continue
        if c == "_" and text[i : i + 2] == "_:":
            advance(2)
            start = i
            while i < n and _PNAME_CHARS.match(text[i]):
                advance()
            label = text[start:i]
            stripped = label.rstrip(".")
            if len(stripped) < len(label):
                back = len(label) - len(stripped)
                i -= back
                col -= back
                label = stripped
            if not label:
                raise err("empty blank node label")
            tokens.append(Token("blank", label, tline, tcol))
            continue
        if c.isdigit() or (c in "+-." and i + 1 < n and (text[i + 1].isdigit() or text[i + 1] == ".")):
            start = i
            if c in "+-":
                advance()
            while i < n and text[i].isdigit():
                advance()
            is_decimal = False
            if i < n and text[i] == "." and i + 1 < n and text[i + 1].isdigit():
                is_decimal = True
                advance()
                while i < n and text[i].isdigit():
                    advance()
            if i < n and text[i] in "eE":
                raise TurtleUnsupportedError("unsupported Turtle feature", tline, tcol)
            value = text[start:i]
            if not re.fullmatch(r"[+-]?([0-9]+|[0-9]*\.[0-9]+)", value):
                raise err(f"bad numeric literal {value!r}")
            tokens.append(Token("decimal" if is_decimal else "integer", value, tline, tcol))
            continue
        if _PNAME_FIRST.match(c) or c == ":":
            start = i
            while i < n and (_PNAME_CHARS.match(text[i]) or text[i] == ":"):
                advance()
            word = text[start:i]
            # a trailing dot belongs to the statement, not the name
            stripped = word.rstrip(".")
            if len(stripped) < len(word):
                back = len(word) - len(stripped)
                i -= back
                col -= back
                word = stripped
            if word == "a":
                tokens.append(Token("a", word, tline, tcol))
            elif word in ("true", "false"):
                tokens.append(Token("boolean", word, tline, tcol))
            elif ":" in word:
                tokens.append(Token("pname", word, tline, tcol))
            else:
                raise err(f"unexpected bare word {word!r}")
            continue
        raise err(f"unexpected character {c!r}")
    tokens.append(Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token], base: str):
        self.tokens = tokens
        self.pos = 0
        self.base = base
        self.skolem_base = base.rstrip("/")
        self.prefixes: dict[str, str] = {}
        self.skolems: dict[str, Iri] = {}
        self.used_suffixes: set[str] = set()
        self.triples: set[Triple] = set()

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def take(self, kind: Optional[str] = None) -> Token:
        tok = self.tokens[self.pos]
        if kind is not None and tok.kind != kind:
            raise TurtleSyntaxError(
                f"expected {kind}, found {tok.kind} {tok.value!r}".rstrip(), tok.line, tok.col
            )
        self.pos += 1
        return tok

    def parse(self) -> set[Triple]:
        while True:
            tok = self.peek()
            if tok.kind == "eof":
                return self.triples
            if tok.kind == "at_prefix":
                self.take()
                name = self.take("pname")
                if not name.value.endswith(":") or name.value.count(":") != 1:
                    raise TurtleSyntaxError("bad prefix declaration", name.line, name.col)
                ns = self.take("iriref")
                self.take("dot")
                self.prefixes[name.value[:-1]] = self.resolve(ns.value)
                continue
            if tok.kind == "at_base":
                self.take()
                ref = self.take("iriref")
                self.base = self.resolve(ref.value)
                self.take("dot")
                continue
            self.statement()

    def resolve(self, ref: str) -> str:
        if re.match(r"^[A-Za-z][A-Za-z0-9+.-]*:", ref):
            return ref
        return urljoin(self.base + ("" if self.base.endswith(("/", "#")) else "/"), ref)

    def statement(self) -> None:
        subject = self.node(want_literal=False)
        self.predicate_list(subject)
        self.take("dot")

    def predicate_list(self, subject: Iri) -> None:
        while True:
            predicate = self.verb()
            self.object_list(subject, predicate)
            if self.peek().kind == "semi":
                while self.peek().kind == "semi":
                    self.take()
                if self.peek().kind in ("dot", "eof"):
                    return
                continue
            return

    def verb(self) -> Iri:
        tok = self.peek()
        if tok.kind == "a":
            self.take()
            return Iri(RDF_TYPE)
        node = self.node(want_literal=False)
        return node

    def object_list(self, subject: Iri, predicate: Iri) -> None:
        while True:
            obj = self.node(want_literal=True)
            self.triples.add(Triple(subject, predicate, obj))
            if self.peek().kind == "comma":
                self.take()
                continue
            return

    def node(self, want_literal: bool):
        tok = self.peek()
        if tok.kind == "iriref":
            self.take()
            return Iri(self.resolve(tok.value))
        if tok.kind == "pname":
            self.take()
            prefix, _, local = tok.value.partition(":")
            if prefix not in self.prefixes:
                raise TurtleSyntaxError(f"undeclared prefix {prefix!r}", tok.line, tok.col)
            return Iri(self.prefixes[prefix] + local)
        if tok.kind == "blank":
            self.take()
            return self.skolemize(tok.value)
        if want_literal:
            if tok.kind == "string":
                self.take()
                nxt = self.peek()
                if nxt.kind == "langtag":
                    self.take()
                    return Literal(tok.value, lang=nxt.value)
                if nxt.kind == "dtype":
                    self.take()
                    dtok = self.peek()
                    if dtok.kind not in ("iriref", "pname"):
                        raise TurtleSyntaxError("expected datatype IRI", dtok.line, dtok.col)
                    dtype = self.node(want_literal=False)
                    return Literal(tok.value, dtype.text)
                return Literal(tok.value, XSD_STRING)
            if tok.kind == "integer":
                self.take()
                return Literal(tok.value, XSD_INTEGER)
            if tok.kind == "decimal":
                self.take()
                return Literal(tok.value, XSD_DECIMAL)
            if tok.kind == "boolean":
                self.take()
                return Literal(tok.value, XSD_BOOLEAN)
        raise TurtleSyntaxError(
            f"expected {'term' if want_literal else 'IRI'}, found {tok.kind}", tok.line, tok.col
        )

    def skolemize(self, label: str) -> Iri:
        iri = self.skolems.get(label)
        if iri is None:
            suffix = secrets.token_hex(4)
            while suffix in self.used_suffixes:
                suffix = secrets.token_hex(4)
            self.used_suffixes.add(suffix)
            iri = Iri(f"{self.skolem_base}/.well-known/genid/{label}-{suffix}")
            self.skolems[label] = iri
        return iri


def parse_turtle(text: str, base: str) -> set[Triple]:
    """Parse the Turtle subset into a triple set; blank nodes are skolemized under ``base``."""
    return _Parser(_tokenize(text), base).parse()


_PN_LOCAL_SAFE = re.compile(r"^[A-Za-z0-9_][A-Za-z0-9_\-]*$")
_IRI_ESCAPE = re.compile(r'[\x00-\x20<>"{}|^`\\]')


def _escape_iri(text: str) -> str:
    return _IRI_ESCAPE.sub(lambda m: "\\u%04X" % ord(m.group()), text)


def _escape_string(text: str) -> str:
    return (
        text.replace("\\", "\\\\")
        .replace('"', '\\"')
        .replace("\n", "\\n")
        .replace("\r", "\\r")
        .replace("\t", "\\t")
    )


def _render_iri(iri: Iri, prefixes: dict[str, str]) -> str:
    best: Optional[tuple[str, str]] = None
    for prefix, ns in prefixes.items():
        if ns and iri.text.startswith(ns) and (best is None or len(ns) > len(best[1])):
            local = iri.text[len(ns) :]
            if local == "" or _PN_LOCAL_SAFE.match(local):
                best = (prefix, ns)
    if best is not None:
        return f"{best[0]}:{iri.text[len(best[1]):]}"
    return f"<{_escape_iri(iri.text)}>"


def _render_literal(lit: Literal, prefixes: dict[str, str]) -> str:
    if lit.lang:
        return f'"{_escape_string(lit.lexical)}"@{lit.lang}'
    if lit.datatype == XSD_INTEGER and is_valid_integer(lit.lexical):
        return lit.lexical
    if lit.datatype == XSD_DECIMAL and is_valid_decimal(lit.lexical) and "." in lit.lexical:
        return lit.lexical
    if lit.datatype == XSD_BOOLEAN and lit.lexical in ("true", "false"):
        return lit.lexical
    quoted = f'"{_escape_string(lit.lexical)}"'
    if lit.datatype == XSD_STRING:
        return quoted
    return f"{quoted}^^{_render_iri(Iri(lit.datatype), prefixes)}"


def _render_term(term, prefixes: dict[str, str]) -> str:
    if isinstance(term, Iri):
        if term.text == RDF_TYPE:
            return "a"
        return _render_iri(term, prefixes)
    return _render_literal(term, prefixes)


def serialize_turtle(triples, prefixes: dict[str, str]) -> str:
    """Deterministic Turtle text: sorted prefixes, subjects, predicates, and objects."""
    lines = [f"@prefix {p}: <{_escape_iri(ns)}> ." for p, ns in sorted(prefixes.items())]
    by_subject: dict[str, tuple[Iri, dict[str, tuple[Iri, list]]]] = {}
    for t in triples:
        skey = term_key(t.subject)
        _, preds = by_subject.setdefault(skey, (t.subject, {}))
        pkey = term_key(t.predicate)
        _, objs = preds.setdefault(pkey, (t.predicate, []))
        objs.append(t.object)
    if by_subject and lines:
        lines.append("")
    for skey in sorted(by_subject):
        subject, preds = by_subject[skey]
        subject_text = _render_iri(subject, prefixes)
        pred_parts = []
        for pkey in sorted(preds):
            predicate, objs = preds[pkey]
            objs_text = " , ".join(_render_term(o, prefixes) for o in sorted(objs, key=term_key))
            pred_parts.append(f"{_render_term(predicate, prefixes)} {objs_text}")
        joined = " ;\n    ".join(pred_parts)
        lines.append(f"{subject_text} {joined} .")
    return "\n".join(lines) + "\n"
