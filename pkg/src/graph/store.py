"""
In-memory triple store: load TSV triple files, index outgoing edges,
compute relation neighborhoods, traverse relations and cut topic-centred subgraphs.
"""

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Dict, FrozenSet, Iterable, List, Mapping, Sequence, TextIO, Tuple, Union

from ..errors import ContractViolation, EmptyGraphError, GraphParseError, MissingEntitiesError

logger = logging.getLogger("kgtrail.graph")

Triple = Tuple[str, str, str]

DEFAULT_NEIGHBORHOOD_CAP = 200


@dataclass(frozen=True)
class EntityFrontier:
    """Deduplicated entities in order of first reachability."""

    entities: Tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "entities", tuple(dict.fromkeys(self.entities)))

    @classmethod
    def of(cls, entities: Iterable[str]) -> "EntityFrontier":
        return cls(tuple(entities))

    def __iter__(self):
        return iter(self.entities)

    def __len__(self) -> int:
        return len(self.entities)

    def __bool__(self) -> bool:
        return bool(self.entities)


@dataclass(frozen=True)
class KnowledgeGraph:
    """
    Immutable triple set with an outgoing-edge index.
    Equality is defined by the triple set; the indexes are derived.
    """

    triples: FrozenSet[Triple]
    entities: FrozenSet[str] = field(default=frozenset(), compare=False)
    relations: FrozenSet[str] = field(default=frozenset(), compare=False)
    adjacency: Mapping[str, FrozenSet[Tuple[str, str]]] = field(
        default_factory=lambda: MappingProxyType({}), compare=False, repr=False
    )
    _objects: Mapping[str, Mapping[str, Tuple[str, ...]]] = field(
        default_factory=lambda: MappingProxyType({}), compare=False, repr=False
    )

    @classmethod
    def from_triples(cls, triples: Iterable[Triple]) -> "KnowledgeGraph":
        triple_set = frozenset(triples)
        entities = set()
        relations = set()
        adjacency: Dict[str, set] = defaultdict(set)
        objects: Dict[str, Dict[str, set]] = defaultdict(lambda: defaultdict(set))
        for s, r, o in triple_set:
            entities.add(s)
            entities.add(o)
            relations.add(r)
            adjacency[s].add((r, o))
            objects[s][r].add(o)
        # Object tuples are sorted so traversal order never depends on set iteration order.
        frozen_objects = {
            s: MappingProxyType({r: tuple(sorted(os_)) for r, os_ in by_rel.items()})
            for s, by_rel in objects.items()
        }
        return cls(
            triples=triple_set,
            entities=frozenset(entities),
            relations=frozenset(relations),
            adjacency=MappingProxyType({s: frozenset(edges) for s, edges in adjacency.items()}),
            _objects=MappingProxyType(frozen_objects),
        )

    def __contains__(self, entity: str) -> bool:
        return entity in self.entities

    def out_relations(self, entity: str) -> Iterable[str]:
        return self._objects.get(entity, {}).keys()

    def objects(self, entity: str, relation: str) -> Tuple[str, ...]:
        return self._objects.get(entity, {}).get(relation, ())


def _parse_lines(lines: Iterable[str]) -> List[Triple]:
    triples: List[Triple] = []
    for line_number, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 3 or not all(fields):
            raise GraphParseError(line_number, line)
        triples.append((fields[0], fields[1], fields[2]))
    return triples


def load_graph(source: Union[str, Path, TextIO]) -> KnowledgeGraph:
    """
    Load a UTF-8 triple file (subject TAB relation TAB object per line).
    Duplicate lines collapse; blank lines are skipped.
    """
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            triples = _parse_lines(fh)
        name = str(source)
    else:
        triples = _parse_lines(source)
        name = getattr(source, "name", "<stream>")
    if not triples:
        raise EmptyGraphError(f"no triples in {name}")
    graph = KnowledgeGraph.from_triples(triples)
    logger.info(
        "Loaded graph %s: %d entities, %d relations, %d triples",
        name, len(graph.entities), len(graph.relations), len(graph.triples),
    )
    return graph


def save_graph(graph: KnowledgeGraph, path: Union[str, Path]) -> None:
    """Write triples sorted, LF line endings."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for s, r, o in sorted(graph.triples):
            fh.write(f"{s}\t{r}\t{o}\n")


def graph_stats(graph: KnowledgeGraph) -> Dict[str, int]:
    return {
        "entities": len(graph.entities),
        "relations": len(graph.relations),
        "triples": len(graph.triples),
    }


def outgoing_relations(
    graph: KnowledgeGraph,
    frontier: EntityFrontier,
    cap: int = 0,
) -> List[str]:
    """
    Union of outgoing relations over the frontier, sorted lexicographically.
    cap > 0 keeps only the first `cap` relations.
    """
    found = set()
    for entity in frontier:
        found.update(graph.out_relations(entity))
    relations = sorted(found)
    if cap and len(relations) > cap:
        logger.debug("Neighborhood of %d relations truncated to %d", len(relations), cap)
        relations = relations[:cap]
    return relations


def traverse(graph: KnowledgeGraph, frontier: EntityFrontier, relation: str) -> EntityFrontier:
    """Objects reachable from any frontier entity via `relation`. Empty means the path cannot extend."""
    reached: List[str] = []
    for entity in frontier:
        reached.extend(graph.objects(entity, relation))
    return EntityFrontier.of(reached)


def extract_subgraph(graph: KnowledgeGraph, topics: Sequence[str], hops: int) -> KnowledgeGraph:
    """
    Triples on directed paths of length <= hops starting at any topic entity.
    An edge (s, r, o) qualifies iff s is within hops - 1 of some topic.
    """
    if hops < 1:
        raise ContractViolation(f"hops must be >= 1, got {hops}")
    present = [t for t in dict.fromkeys(topics) if t in graph]
    missing = [t for t in dict.fromkeys(topics) if t not in graph]
    if not present:
        raise MissingEntitiesError(missing or list(topics))
    if missing:
        logger.warning("Topic entities not in graph, skipped: %s", ", ".join(missing))

    kept: List[Triple] = []
    visited = set(present)
    layer = list(present)
    for _ in range(hops):
        next_layer: List[str] = []
        for s in layer:
            for r, o in graph.adjacency.get(s, ()):
                kept.append((s, r, o))
                if o not in visited:
                    visited.add(o)
                    next_layer.append(o)
        if not next_layer:
            break
        layer = next_layer
    return KnowledgeGraph.from_triples(kept)
