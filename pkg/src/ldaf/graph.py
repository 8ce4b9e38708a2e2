"""Named graphs and the dataset that stores them."""
from __future__ import annotations

from pathlib import Path
from typing import Iterable, Iterator, Optional

from .terms import BUILTIN_PREFIXES, Iri, Term, Triple, triple_key


class GraphError(Exception):
    pass


class UnknownGraphError(GraphError):
    def __init__(self, name: Iri):
        super().__init__(f"unknown graph: {name.text}")
        self.name = name


class Graph:
    """A named set of triples with deterministic (sorted) iteration order."""

    def __init__(self, name: Iri, triples: Iterable[Triple] = ()):
        self.name = name
        self._triples: set[Triple] = set(triples)
        self._sorted: Optional[list[Triple]] = None

    def __len__(self) -> int:
        return len(self._triples)

    def __contains__(self, triple: Triple) -> bool:
        return triple in self._triples

    def __iter__(self) -> Iterator[Triple]:
        if self._sorted is None:
            self._sorted = sorted(self._triples, key=triple_key)
        return iter(self._sorted)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.name == other.name and self._triples == other._triples

    def __repr__(self) -> str:
        return f"Graph({self.name.text!r}, {len(self)} triples)"

    @property
    def triples(self) -> set[Triple]:
        return set(self._triples)

    def insert(self, triple: Triple) -> bool:
        """Add a triple; returns False if it was already present."""
        if triple in self._triples:
            return False
        self._triples.add(triple)
        self._sorted = None
        return True

    def insert_all(self, triples: Iterable[Triple]) -> int:
        added = 0
        for t in triples:
            if self.insert(t):
                added += 1
        return added

    def match(
        self,
        subject: Optional[Iri] = None,
        predicate: Optional[Iri] = None,
        object: Optional[Term] = None,
    ) -> list[Triple]:
        """All triples agreeing with every bound position; unbound positions match anything."""
        return [
            t
            for t in self
            if (subject is None or t.subject == subject)
            and (predicate is None or t.predicate == predicate)
            and (object is None or t.object == object)
        ]

    def remove(
        self,
        subject: Optional[Iri] = None,
        predicate: Optional[Iri] = None,
        object: Optional[Term] = None,
    ) -> int:
        """Remove all triples matching the pattern; returns how many were removed."""
        hits = self.match(subject, predicate, object)
        for t in hits:
            self._triples.discard(t)
        if hits:
            self._sorted = None
        return len(hits)

    def subjects(self) -> list[Iri]:
        seen: dict[Iri, None] = {}
        for t in self:
            seen.setdefault(t.subject, None)
        return list(seen)


class Dataset:
    """Named graphs plus the shared prefix map; optionally bound to a data directory."""

    def __init__(self, data_dir: Optional[Path] = None):
        self.graphs: dict[Iri, Graph] = {}
        self.prefixes: dict[str, str] = dict(BUILTIN_PREFIXES)
        self.data_dir = Path(data_dir) if data_dir is not None else None

    def graph(self, name: Iri) -> Graph:
        try:
            return self.graphs[name]
        except KeyError:
            raise UnknownGraphError(name) from None

    def ensure_graph(self, name: Iri) -> Graph:
        graph = self.graphs.get(name)
        if graph is None:
            graph = Graph(name)
            self.graphs[name] = graph
        return graph

    def set_prefix(self, prefix: str, namespace: str) -> None:
        self.prefixes[prefix] = namespace

    def graph_names(self) -> list[Iri]:
        return sorted(self.graphs, key=lambda iri: iri.text)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return self.graphs == other.graphs and self.prefixes == other.prefixes
