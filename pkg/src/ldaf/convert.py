"""Bidirectional conversion between rooted RDF subgraphs and nested JSON objects.

A resource object carries ``uri``, ``path``, ``localname``, one key per
predicate, and (on the root only) an ``_incoming`` map summarizing triples
that point at it.  Keys translate to predicate IRIs through a bijective
:class:`KeyMap`, so the conversion inverts exactly.
"""
from __future__ import annotations

import re
import threading
from decimal import Decimal, InvalidOperation
from typing import Iterable, Optional

from .graph import Graph
from .terms import (
    Iri,
    Literal,
    OWL_DATATYPE_PROPERTY,
    OWL_OBJECT_PROPERTY,
    RDF_LANG_STRING,
    RDF_PROPERTY,
    RDF_TYPE,
    RDFS_COMMENT,
    RDFS_LABEL,
    Term,
    Triple,
    XSD_BOOLEAN,
    XSD_DECIMAL,
    XSD_INTEGER,
    XSD_STRING,
    is_valid_decimal,
    is_valid_integer,
    term_key,
    triple_key,
)

RESERVED_KEYS = frozenset({"uri", "path", "localname", "_incoming"})

# minted predicate IRIs live under the fallback namespace and must stay
# resolvable as /ontology/<key> pages
_SAFE_KEY = re.compile(r"^[A-Za-z_][A-Za-z0-9_.\-]*$")

BUILTIN_KEYS = (
    ("label", RDFS_LABEL),
    ("type", RDF_TYPE),
    ("comment", RDFS_COMMENT),
)

_PROPERTY_CLASSES = {RDF_PROPERTY, OWL_OBJECT_PROPERTY, OWL_DATATYPE_PROPERTY}


class ConvertError(ValueError):
    """Malformed resource-object shape; ``pointer`` locates the offending value."""

    def __init__(self, message: str, pointer: str = ""):
        super().__init__(f"{message} (at {pointer or '/'})")
        self.message = message
        self.pointer = pointer or "/"


def localname(iri: str) -> str:
    """Fragment if present, else the segment after the last slash."""
    if "#" in iri:
        return iri.partition("#")[2]
    return iri.rsplit("/", 1)[-1]


def path_of(iri: str, base_url: str) -> str:
    """IRI with the base URL prefix removed; external IRIs pass through whole."""
    if iri == base_url:
        return ""
    if iri.startswith(base_url) and iri[len(base_url)] in "/#?":
        return iri[len(base_url) :]
    return iri


class KeyMap:
    """Bijection between JSON property keys and predicate IRIs.

    Unseen predicates and keys are registered on first use so every
    conversion stays invertible; registration is the only mutation and is
    internally locked.
    """

    def __init__(self, fallback_ns: str, prefixes: Optional[dict[str, str]] = None):
        self.fallback_ns = fallback_ns
        self.prefixes = dict(prefixes or {})
        self._key_to_pred: dict[str, str] = {}
        self._pred_to_key: dict[str, str] = {}
        self._lock = threading.Lock()
        for key, pred in BUILTIN_KEYS:
            self.register(key, pred)

    def register(self, key: str, predicate: str) -> None:
        with self._lock:
            existing = self._key_to_pred.get(key)
            if existing == predicate:
                return
            if existing is not None:
                raise ValueError(f"key {key!r} already mapped to {existing}")
            if predicate in self._pred_to_key:
                raise ValueError(f"predicate {predicate} already mapped")
            self._key_to_pred[key] = predicate
            self._pred_to_key[predicate] = key

    def _prefixed(self, iri: str, local: str) -> Optional[str]:
        best: Optional[tuple[str, str]] = None
        for prefix, ns in self.prefixes.items():
            if ns and iri.startswith(ns) and (best is None or len(ns) > len(best[1])):
                best = (prefix, ns)
        if best is not None:
            return f"{best[0]}_{local}"
        return None

    def key_for(self, predicate: str) -> str:
        """The key for a predicate IRI, minting and registering one if needed."""
        with self._lock:
            key = self._pred_to_key.get(predicate)
            if key is not None:
                return key
            key = self._mint_key(predicate)
            self._key_to_pred[key] = predicate
            self._pred_to_key[predicate] = key
            return key

    def _mint_key(self, predicate: str) -> str:
        local = localname(predicate)
        if local and local not in RESERVED_KEYS and local not in self._key_to_pred:
            return local
        prefixed = self._prefixed(predicate, local)
        if prefixed and prefixed not in RESERVED_KEYS and prefixed not in self._key_to_pred:
            return prefixed
        return predicate

    def predicate_for(self, key: str) -> str:
        """The predicate for a key, minting one in the fallback namespace if unknown."""
        with self._lock:
            pred = self._key_to_pred.get(key)
            if pred is not None:
                return pred
            if not _SAFE_KEY.match(key):
                raise ConvertError(f"key {key!r} cannot name a new predicate", "/" + key)
            pred = self.fallback_ns + key
            if pred in self._pred_to_key:
                # fallback namespace collision: the predicate already carries
                # another key, so alias resolution must not re-register
                return pred
            self._key_to_pred[key] = pred
            self._pred_to_key[pred] = key
            return pred

    def known_predicates(self) -> list[str]:
        with self._lock:
            return sorted(self._pred_to_key)

    def has_key(self, key: str) -> bool:
        with self._lock:
            return key in self._key_to_pred


def build_keymap(ontology: Graph, prefixes: dict[str, str], fallback_ns: str) -> KeyMap:
    """Keys for every predicate the ontology declares or uses, plus the built-ins."""
    keymap = KeyMap(fallback_ns, prefixes)
    ordered: dict[str, None] = {}
    for triple in ontology:
        if (
            triple.predicate.text == RDF_TYPE
            and isinstance(triple.object, Iri)
            and triple.object.text in _PROPERTY_CLASSES
        ):
            ordered.setdefault(triple.subject.text, None)
        ordered.setdefault(triple.predicate.text, None)
    for predicate in ordered:
        keymap.key_for(predicate)
    return keymap


def _union(graphs: Iterable[Graph]) -> set[Triple]:
    union: set[Triple] = set()
    for g in graphs:
        union |= g.triples
    return union


def _reference(iri: Iri, base_url: str) -> dict:
    return {
        "uri": iri.text,
        "path": path_of(iri.text, base_url),
        "localname": localname(iri.text),
    }


def _literal_value(lit: Literal):
    if lit.lang:
        return {"value": lit.lexical, "lang": lit.lang}
    if lit.datatype == XSD_STRING:
        return lit.lexical
    if lit.datatype == XSD_BOOLEAN and lit.lexical in ("true", "false"):
        return lit.lexical == "true"
    if lit.datatype == XSD_INTEGER and is_valid_integer(lit.lexical):
        return int(lit.lexical)
    if lit.datatype == XSD_DECIMAL and is_valid_decimal(lit.lexical):
        try:
            return Decimal(lit.lexical)
        except InvalidOperation:
            pass
    return {"value": lit.lexical, "datatype": lit.datatype}


def rdf_to_json(
    graphs: Iterable[Graph],
    start: Iri,
    depth: int,
    keymap: KeyMap,
    base_url: str,
) -> dict:
    """Nested resource object for ``start``, expanding IRI objects up to ``depth``.

    Cycles are cut by emitting a plain reference for any IRI already on the
    current traversal path.  ``_incoming`` appears only on the root.
    """
    if depth < 0:
        raise ValueError("depth must be non-negative")
    union = _union(graphs)
    outgoing: dict[Iri, dict[Iri, list[Term]]] = {}
    incoming: dict[Iri, dict[Iri, list[Iri]]] = {}
    for t in sorted(union, key=triple_key):
        outgoing.setdefault(t.subject, {}).setdefault(t.predicate, []).append(t.object)
        if isinstance(t.object, Iri):
            incoming.setdefault(t.object, {}).setdefault(t.predicate, []).append(t.subject)

    def build(node: Iri, remaining: int, path: frozenset[Iri]) -> dict:
        obj = _reference(node, base_url)
        for predicate, objects in sorted(outgoing.get(node, {}).items(), key=lambda kv: term_key(kv[0])):
            key = keymap.key_for(predicate.text)
            values = [value_of(o, remaining, path) for o in objects]
            obj[key] = values[0] if len(values) == 1 else values
        return obj

    def value_of(term: Term, remaining: int, path: frozenset[Iri]):
        if isinstance(term, Literal):
            return _literal_value(term)
        if remaining > 0 and term not in path:
            return build(term, remaining - 1, path | {term})
        return _reference(term, base_url)

    root = build(start, depth, frozenset({start}))
    inbound: dict[str, list[dict]] = {}
    for predicate, subjects in sorted(incoming.get(start, {}).items(), key=lambda kv: term_key(kv[0])):
        key = keymap.key_for(predicate.text)
        inbound[key] = [_reference(s, base_url) for s in subjects]
    root["_incoming"] = inbound
    return root


def reachable_subgraph(graphs: Iterable[Graph], start: Iri, depth: int) -> set[Triple]:
    """Triples whose subject lies within ``depth`` outgoing steps of ``start``.

    This is exactly the triple set :func:`rdf_to_json` exposes at the same
    depth, so Turtle and JSON representations of a resource agree.
    """
    union = _union(graphs)
    outgoing: dict[Iri, list[Triple]] = {}
    for t in union:
        outgoing.setdefault(t.subject, []).append(t)
    result: set[Triple] = set()
    frontier = {start}
    seen = {start}
    for _ in range(depth + 1):
        next_frontier: set[Iri] = set()
        for node in frontier:
            for t in outgoing.get(node, ()):
                result.add(t)
                if isinstance(t.object, Iri) and t.object not in seen:
                    seen.add(t.object)
                    next_frontier.add(t.object)
        frontier = next_frontier
        if not frontier:
            break
    return result


def _decimal_literal(value: Decimal) -> Literal:
    text = format(value, "f")
    if "." not in text:
        text += ".0"
    return Literal(text, XSD_DECIMAL)


def _resolve_subject(obj: dict, base_url: str, pointer: str) -> Iri:
    uri = obj.get("uri")
    if uri is not None:
        if not isinstance(uri, str):
            raise ConvertError("uri must be a string", pointer + "/uri")
        try:
            return Iri(uri)
        except ValueError:
            raise ConvertError(f"uri is not an absolute IRI: {uri!r}", pointer + "/uri") from None
    path = obj.get("path")
    if path is not None:
        if not isinstance(path, str):
            raise ConvertError("path must be a string", pointer + "/path")
        if not path.startswith(("/", "#")):
            path = "/" + path
        return Iri(base_url + path)
    raise ConvertError("object needs a uri or path", pointer)


def _is_resource_shape(value: dict) -> bool:
    return "uri" in value or "path" in value


def json_to_rdf(obj: dict, keymap: KeyMap, base_url: str) -> set[Triple]:
    """Triples for a resource object; inverse of :func:`rdf_to_json`.

    Reserved keys contribute no triples.  Unknown keys mint predicates in
    the keymap's fallback namespace.
    """
    if not isinstance(obj, dict):
        raise ConvertError("resource object must be a JSON object")
    triples: set[Triple] = set()
    _walk_object(obj, keymap, base_url, triples, "")
    return triples


def _walk_object(obj: dict, keymap: KeyMap, base_url: str, out: set[Triple], pointer: str) -> Iri:
    subject = _resolve_subject(obj, base_url, pointer)
    for key in sorted(obj, key=lambda k: (k == "_incoming", k)):
        if key in RESERVED_KEYS:
            continue
        value = obj[key]
        predicate = Iri(keymap.predicate_for(key))
        _emit_value(subject, predicate, value, keymap, base_url, out, f"{pointer}/{key}", in_list=False)
    return subject


def _emit_value(
    subject: Iri,
    predicate: Iri,
    value,
    keymap: KeyMap,
    base_url: str,
    out: set[Triple],
    pointer: str,
    in_list: bool,
) -> None:
    if value is None:
        return
    if isinstance(value, list):
        if in_list:
            raise ConvertError("lists may not contain lists", pointer)
        for index, item in enumerate(value):
            _emit_value(subject, predicate, item, keymap, base_url, out, f"{pointer}/{index}", in_list=True)
        return
    if isinstance(value, bool):
        out.add(Triple(subject, predicate, Literal("true" if value else "false", XSD_BOOLEAN)))
        return
    if isinstance(value, str):
        out.add(Triple(subject, predicate, Literal(value, XSD_STRING)))
        return
    if isinstance(value, int):
        out.add(Triple(subject, predicate, Literal(str(value), XSD_INTEGER)))
        return
    if isinstance(value, Decimal):
        out.add(Triple(subject, predicate, _decimal_literal(value)))
        return
    if isinstance(value, float):
        if value != value or value in (float("inf"), float("-inf")):
            raise ConvertError("non-finite number", pointer)
        if value.is_integer():
            out.add(Triple(subject, predicate, Literal(str(int(value)), XSD_INTEGER)))
        else:
            out.add(Triple(subject, predicate, _decimal_literal(Decimal(repr(value)))))
        return
    if isinstance(value, dict):
        if "value" in value:
            _emit_tagged_literal(subject, predicate, value, out, pointer)
            return
        if _is_resource_shape(value):
            target = _resolve_subject(value, base_url, pointer)
            out.add(Triple(subject, predicate, target))
            if any(k not in RESERVED_KEYS for k in value):
                _walk_object(value, keymap, base_url, out, pointer)
            return
        raise ConvertError("object value needs uri, path, or value", pointer)
    raise ConvertError(f"unsupported value type {type(value).__name__}", pointer)


def _emit_tagged_literal(subject: Iri, predicate: Iri, value: dict, out: set[Triple], pointer: str) -> None:
    extra = set(value) - {"value", "lang", "datatype"}
    if extra:
        raise ConvertError(f"unexpected keys in tagged literal: {sorted(extra)}", pointer)
    lexical = value["value"]
    if not isinstance(lexical, str):
        raise ConvertError("tagged literal value must be a string", pointer + "/value")
    lang = value.get("lang")
    datatype = value.get("datatype")
    if (lang is None) == (datatype is None):
        raise ConvertError("tagged literal needs exactly one of lang or datatype", pointer)
    if lang is not None:
        if not isinstance(lang, str) or not lang:
            raise ConvertError("lang must be a non-empty string", pointer + "/lang")
        out.add(Triple(subject, predicate, Literal(lexical, RDF_LANG_STRING, lang)))
    else:
        if not isinstance(datatype, str):
            raise ConvertError("datatype must be a string", pointer + "/datatype")
        try:
            literal = Literal(lexical, datatype)
        except ValueError as exc:
            raise ConvertError(str(exc), pointer) from None
        out.add(Triple(subject, predicate, literal))
