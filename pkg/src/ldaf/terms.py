"""RDF terms: IRIs, literals, triples, and their canonical ordering."""
from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from typing import Optional, Union

RDF_NS = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS_NS = "http://www.w3.org/2000/01/rdf-schema#"
XSD_NS = "http://www.w3.org/2001/XMLSchema#"
OWL_NS = "http://www.w3.org/2002/07/owl#"
FOAF_NS = "http://xmlns.com/foaf/0.1/"

RDF_TYPE = RDF_NS + "type"
RDF_PROPERTY = RDF_NS + "Property"
RDF_LANG_STRING = RDF_NS + "langString"
RDFS_LABEL = RDFS_NS + "label"
RDFS_COMMENT = RDFS_NS + "comment"
RDFS_CLASS = RDFS_NS + "Class"
XSD_STRING = XSD_NS + "string"
XSD_INTEGER = XSD_NS + "integer"
XSD_DECIMAL = XSD_NS + "decimal"
XSD_BOOLEAN = XSD_NS + "boolean"
OWL_OBJECT_PROPERTY = OWL_NS + "ObjectProperty"
OWL_DATATYPE_PROPERTY = OWL_NS + "DatatypeProperty"
FOAF_DEPICTION = FOAF_NS + "depiction"

BUILTIN_PREFIXES = {
    "rdf": RDF_NS,
    "rdfs": RDFS_NS,
    "xsd": XSD_NS,
}

_SCHEME_RE = re.compile(r"^[A-Za-z][A-Za-z0-9+.-]*:")


class TermValueError(ValueError):
    """Raised when a term would violate a model invariant."""


@dataclass(frozen=True, order=False)
class Iri:
    """An absolute IRI."""

    text: str

    def __post_init__(self) -> None:
        if not _SCHEME_RE.match(self.text):
            raise TermValueError(f"IRI is not absolute: {self.text!r}")

    def __repr__(self) -> str:
        return f"Iri({self.text!r})"


@dataclass(frozen=True, order=False)
class Literal:
    """A typed literal, optionally language-tagged (datatype then rdf:langString)."""

    lexical: str
    datatype: str = ""
    lang: Optional[str] = None

    def __post_init__(self) -> None:
        if self.lang is not None and not self.lang:
            raise TermValueError("language tag must be non-empty when given")
        if not self.datatype:
            dt = RDF_LANG_STRING if self.lang else XSD_STRING
            object.__setattr__(self, "datatype", dt)
        if self.lang and self.datatype != RDF_LANG_STRING:
            raise TermValueError("language-tagged literal must use rdf:langString")
        if not self.lang and self.datatype == RDF_LANG_STRING:
            raise TermValueError("rdf:langString literal requires a language tag")

    def __repr__(self) -> str:
        if self.lang:
            return f"Literal({self.lexical!r}, lang={self.lang!r})"
        return f"Literal({self.lexical!r}, {self.datatype!r})"


Term = Union[Iri, Literal]


@dataclass(frozen=True, order=False)
class Triple:
    subject: Iri
    predicate: Iri
    object: Term

    def __post_init__(self) -> None:
        if not isinstance(self.subject, Iri):
            raise TermValueError("triple subject must be an IRI")
        if not isinstance(self.predicate, Iri):
            raise TermValueError("triple predicate must be an IRI")
        if not isinstance(self.object, (Iri, Literal)):
            raise TermValueError("triple object must be an IRI or literal")


def term_key(term: Term) -> str:
    """Stable sort key: the term's N-Triples-style rendering."""
    if isinstance(term, Iri):
        return f"<{term.text}>"
    if term.lang:
        return f'"{term.lexical}"@{term.lang}'
    return f'"{term.lexical}"^^<{term.datatype}>'


def triple_key(triple: Triple) -> tuple[str, str, str]:
    return (term_key(triple.subject), term_key(triple.predicate), term_key(triple.object))


_INTEGER_RE = re.compile(r"^[+-]?[0-9]+$")
_DECIMAL_RE = re.compile(r"^[+-]?([0-9]+\.[0-9]*|\.?[0-9]+)$")


def is_valid_integer(lexical: str) -> bool:
    return bool(_INTEGER_RE.match(lexical))


def is_valid_decimal(lexical: str) -> bool:
    return bool(_DECIMAL_RE.match(lexical))


def is_valid_boolean(lexical: str) -> bool:
    return lexical in ("true", "false", "1", "0")


def canonical_decimal(value: Decimal) -> str:
    """Positional decimal form: no exponent, no trailing zeros, at least one fraction digit."""
    if value == 0:
        return "0.0"
    text = format(value.normalize(), "f")
    if "." not in text:
        text += ".0"
    return text


def canonical_literal(literal: Literal) -> Literal:
    """Normalize numeric and boolean lexical forms; other literals pass through."""
    if literal.datatype == XSD_INTEGER and is_valid_integer(literal.lexical):
        return Literal(str(int(literal.lexical)), XSD_INTEGER)
    if literal.datatype == XSD_DECIMAL and is_valid_decimal(literal.lexical):
        try:
            return Literal(canonical_decimal(Decimal(literal.lexical)), XSD_DECIMAL)
        except InvalidOperation:
            return literal
    if literal.datatype == XSD_BOOLEAN and is_valid_boolean(literal.lexical):
        return Literal("true" if literal.lexical in ("true", "1") else "false", XSD_BOOLEAN)
    return literal


def canonical_triple(triple: Triple) -> Triple:
    if isinstance(triple.object, Literal):
        canon = canonical_literal(triple.object)
        if canon is not triple.object:
            return Triple(triple.subject, triple.predicate, canon)
    return triple
