from .store import (
    EntityFrontier,
    KnowledgeGraph,
    extract_subgraph,
    graph_stats,
    load_graph,
    outgoing_relations,
    save_graph,
    traverse,
)

__all__ = [
    "EntityFrontier", "KnowledgeGraph", "extract_subgraph", "graph_stats",
    "load_graph", "outgoing_relations", "save_graph", "traverse",
]
