"""Linked data application framework.

An HTTP service over named RDF graphs with resolvable URIs, Turtle/JSON/HTML
content negotiation, bidirectional RDF-to-JSON conversion, CRUD with
pagination, a mini-SPARQL endpoint, label search, image upload, and a small
server-side template language.
"""

from .convert import (
    ConvertError,
    KeyMap,
    RESERVED_KEYS,
    build_keymap,
    json_to_rdf,
    localname,
    path_of,
    rdf_to_json,
)
from .graph import Dataset, Graph, GraphError, UnknownGraphError
from .query import (
    Query,
    QueryError,
    QuerySyntaxError,
    UnsupportedQueryError,
    Var,
    evaluate,
    parse_query,
    search_labels,
    solutions_to_json,
)
from .storage import DatasetLoadError, load_dataset, save_graph
from .template import Template, TemplateError, TemplateLoader, parse_template, render
from .terms import Iri, Literal, Term, TermValueError, Triple
from .turtle import (
    TurtleError,
    TurtleSyntaxError,
    TurtleUnsupportedError,
    parse_turtle,
    serialize_turtle,
)

__version__ = "0.1.0"

__all__ = [
    "ConvertError",
    "Dataset",
    "DatasetLoadError",
    "Graph",
    "GraphError",
    "Iri",
    "KeyMap",
    "Literal",
    "Query",
    "QueryError",
    "QuerySyntaxError",
    "RESERVED_KEYS",
    "Template",
    "TemplateError",
    "TemplateLoader",
    "Term",
    "TermValueError",
    "Triple",
    "TurtleError",
    "TurtleSyntaxError",
    "TurtleUnsupportedError",
    "UnknownGraphError",
    "UnsupportedQueryError",
    "Var",
    "build_keymap",
    "evaluate",
    "json_to_rdf",
    "load_dataset",
    "localname",
    "parse_query",
    "parse_template",
    "parse_turtle",
    "path_of",
    "rdf_to_json",
    "render",
    "save_graph",
    "search_labels",
    "serialize_turtle",
    "solutions_to_json",
]
