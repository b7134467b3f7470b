"""Entity graph construction, expansion, and scope building."""

import pytest

from ctireport.graph import (
    EntityGraph,
    GraphError,
    build_graph,
    expand_node,
    graph_from_scope,
)
from ctireport.stix import load_bundle_file

from .conftest import BUNDLES


@pytest.fixture(scope="module")
def botnet_graph(index):
    entry = next(e for e in index["reports"] if e["name"] == "overview-botnet")
    return build_graph(load_bundle_file(BUNDLES / entry["file"])), entry


def test_build_graph_nodes_and_edges(botnet_graph):
    graph, entry = botnet_graph
    assert set(graph.nodes) == set(entry["root_ids"])
    assert len(graph.edges) == 3


def test_edge_endpoints_validated():
    from ctireport.graph import Edge
    edge = Edge(source="a", relationship_type="uses", target="b")
    with pytest.raises(GraphError):
        EntityGraph(nodes={}, edges=frozenset({edge}))


def test_expand_adds_kb_neighbors(kb, index, botnet_graph):
    graph, _ = botnet_graph
    expanded = expand_node(graph, index["asprox_id"], kb)
    new_ids = set(expanded.nodes) - set(graph.nodes)
    assert len(new_ids) == 2
    assert all(expanded.nodes[i].type == "attack-pattern" for i in new_ids)
    assert index["asprox_id"] in expanded.expanded


def test_expand_is_idempotent(kb, index, botnet_graph):
    graph, _ = botnet_graph
    once = expand_node(graph, index["asprox_id"], kb)
    twice = expand_node(once, index["asprox_id"], kb)
    assert once == twice


def test_expand_is_monotone(kb, index, botnet_graph):
    graph, _ = botnet_graph
    expanded = expand_node(graph, index["asprox_id"], kb)
    assert set(graph.nodes) <= set(expanded.nodes)
    assert graph.edges <= expanded.edges


def test_expand_returns_new_graph(kb, index, botnet_graph):
    graph, _ = botnet_graph
    before = set(graph.nodes)
    expand_node(graph, index["asprox_id"], kb)
    assert set(graph.nodes) == before


def test_expand_unknown_node_raises(kb, botnet_graph):
    graph, _ = botnet_graph
    with pytest.raises(GraphError):
        expand_node(graph, "malware--nope", kb)


def test_scope_reproduces_bundle_graph(kb, index):
    """Roots pulled from the KB carry their stored interconnecting edges."""
    for entry in index["reports"]:
        bundle_graph = build_graph(load_bundle_file(BUNDLES / entry["file"]))
        scope_graph = graph_from_scope(kb, entry["root_ids"])
        assert set(scope_graph.nodes) == set(bundle_graph.nodes)
        assert scope_graph.edges == bundle_graph.edges


def test_scope_unknown_root_raises(kb):
    with pytest.raises(GraphError):
        graph_from_scope(kb, ["malware--nope"])


def test_deterministic_orderings(botnet_graph):
    graph, _ = botnet_graph
    assert graph.sorted_node_ids() == sorted(graph.nodes)
    edges = graph.sorted_edges()
    assert edges == sorted(edges, key=lambda e: (e.source, e.relationship_type,
                                                 e.target))
