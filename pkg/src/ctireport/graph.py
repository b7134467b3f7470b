"""Entity graph built from STIX bundles.

Graphs are immutable values: node expansion returns a new graph rather than
mutating, so graphs are safe to share between sessions and threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Optional

from .stix import Diagnostic, StixBundle, StixObject

if TYPE_CHECKING:
    from .kb import KnowledgeBase


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class Edge:
    source: str
    relationship_type: str
    target: str

    def as_tuple(self) -> tuple[str, str, str]:
        return (self.source, self.relationship_type, self.target)


@dataclass(frozen=True)
class EntityGraph:
    nodes: dict[str, StixObject] = field(default_factory=dict)
    edges: frozenset[Edge] = field(default_factory=frozenset)
    expanded: frozenset[str] = field(default_factory=frozenset)
    diagnostics: tuple[Diagnostic, ...] = ()

    def __post_init__(self) -> None:
        for edge in self.edges:
            if edge.source not in self.nodes or edge.target not in self.nodes:
                raise GraphError(f"edge endpoint missing from nodes: {edge}")

    def node(self, node_id: str) -> StixObject:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise GraphError(f"node not in graph: {node_id}") from None

    def incident_edges(self, node_id: str) -> list[Edge]:
        """Edges touching node_id, in deterministic order."""
        out = [e for e in self.edges if e.source == node_id or e.target == node_id]
        out.sort(key=lambda e: (e.relationship_type, e.source, e.target))
        return out

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges, key=lambda e: (e.source, e.relationship_type, e.target))

    def sorted_node_ids(self) -> list[str]:
        return sorted(self.nodes)


def build_graph(bundle: StixBundle) -> EntityGraph:
    """One node per non-relationship object, one edge per relationship.

    Sightings become edges labeled "sighted". Edges whose endpoints are not
    in the bundle are dropped and recorded as diagnostics.
    """
    nodes = {obj.id: obj for obj in bundle.objects if not obj.is_edge}
    edges: set[Edge] = set()
    diagnostics: list[Diagnostic] = []
    for obj in bundle.objects:
        if not obj.is_edge:
            continue
        src, tgt = obj.source_ref, obj.target_ref
        rel_type = obj.relationship_type or "related-to"
        if src in nodes and tgt in nodes:
            edges.add(Edge(source=src, relationship_type=rel_type, target=tgt))
        else:
            diagnostics.append(Diagnostic(
                level="warning", code="dropped-edge",
                message=f"dropped {rel_type} edge with unresolved endpoint "
                        f"({src!r} -> {tgt!r})",
                object_id=obj.id,
            ))
    return EntityGraph(nodes=nodes, edges=frozenset(edges),
                       diagnostics=tuple(diagnostics))


def expand_node(graph: EntityGraph, node_id: str, kb: "KnowledgeBase") -> EntityGraph:
    """Pull all KB neighbors of node_id into the graph.

    Idempotent: expanding an already-expanded node returns an equal graph.
    """
    if node_id not in graph.nodes:
        raise GraphError(f"cannot expand unknown node {node_id}")

    nodes = dict(graph.nodes)
    edges = set(graph.edges)
    for rel_type, direction, record in kb.neighbors(node_id):
        neighbor = record.object
        nodes.setdefault(neighbor.id, neighbor)
        if direction == "outgoing":
            edges.add(Edge(source=node_id, relationship_type=rel_type, target=neighbor.id))
        else:
            edges.add(Edge(source=neighbor.id, relationship_type=rel_type, target=node_id))
    return EntityGraph(
        nodes=nodes,
        edges=frozenset(edges),
        expanded=graph.expanded | {node_id},
        diagnostics=graph.diagnostics,
    )


def graph_from_scope(kb: "KnowledgeBase", root_ids: list[str],
                     expand_ids: Optional[list[str]] = None) -> EntityGraph:
    """Build a session graph from KB roots plus a set of expansions."""
    nodes: dict[str, StixObject] = {}
    for root in root_ids:
        record = kb.get_entity(root)
        if record is None:
            raise GraphError(f"root entity not in knowledge base: {root}")
        nodes[root] = record.object
    # Connect the selection: stored edges between roots come along.
    edges: set[Edge] = set()
    for root in nodes:
        for rel_type, direction, record in kb.neighbors(root):
            other = record.object.id
            if other not in nodes:
                continue
            if direction == "outgoing":
                edges.add(Edge(source=root, relationship_type=rel_type, target=other))
            else:
                edges.add(Edge(source=other, relationship_type=rel_type, target=root))
    graph = EntityGraph(nodes=nodes, edges=frozenset(edges))
    for node_id in expand_ids or []:
        graph = expand_node(graph, node_id, kb)
    return graph
