"""Property-based invariants for ordering, idempotence, and round-trips."""

import json
from datetime import datetime, timedelta, timezone

from hypothesis import given, settings
from hypothesis import strategies as st

from ctireport.graph import build_graph, expand_node
from ctireport.kb import HistoryEvent, KnowledgeBase
from ctireport.selection import build_timeline
from ctireport.stix import parse_bundle, serialize_bundle

EPOCH = datetime(2019, 1, 1, tzinfo=timezone.utc)

events = st.builds(
    HistoryEvent,
    timestamp=st.integers(min_value=0, max_value=3650).map(
        lambda d: EPOCH + timedelta(days=d)),
    kind=st.sampled_from(["created", "modified", "sighted", "related"]),
    detail=st.text(alphabet="abcdef ", min_size=1, max_size=12),
    entity_id=st.sampled_from(["malware--a", "tool--b", "identity--c"]),
)


class StubKb:
    """history() provider for exercising the merge without disk I/O."""

    def __init__(self, by_entity):
        self.by_entity = by_entity

    def history(self, entity_id):
        return self.by_entity.get(entity_id, [])


@settings(max_examples=200, deadline=None)
@given(st.lists(events, max_size=30))
def test_timeline_is_sorted_with_documented_tiebreak(event_list):
    by_entity: dict[str, list[HistoryEvent]] = {}
    for event in event_list:
        by_entity.setdefault(event.entity_id, []).append(event)
    timeline = build_timeline(sorted(by_entity), StubKb(by_entity))

    timestamps = [e.timestamp for e in timeline]
    assert timestamps == sorted(timestamps)
    # tie-break: (timestamp, entity id, description), fully deterministic
    keys = [(e.timestamp, e.entity_id, e.description) for e in timeline]
    assert keys == sorted(keys)
    assert len(timeline) == len(event_list)


entity_ids = st.integers(min_value=0, max_value=6).map(lambda i: f"malware--{i}")


@st.composite
def bundles(draw):
    ids = draw(st.lists(entity_ids, min_size=1, max_size=5, unique=True))
    objects = [
        {"type": "malware", "id": i,
         "created": "2020-01-01T00:00:00.000Z",
         "modified": "2020-01-01T00:00:00.000Z",
         "name": f"Sample {i[-1]}"}
        for i in ids
    ]
    for n, (src, tgt) in enumerate(draw(st.lists(
            st.tuples(st.sampled_from(ids), st.sampled_from(ids)),
            max_size=4, unique=True))):
        objects.append({
            "type": "relationship", "id": f"relationship--{n}",
            "created": "2020-01-02T00:00:00.000Z",
            "modified": "2020-01-02T00:00:00.000Z",
            "relationship_type": "related-to",
            "source_ref": src, "target_ref": tgt,
        })
    return json.dumps({"type": "bundle", "id": "bundle--p", "objects": objects})


@settings(max_examples=50, deadline=None)
@given(bundles())
def test_bundle_round_trip(text):
    bundle = parse_bundle(text)
    again = parse_bundle(serialize_bundle(bundle))
    assert {o.id for o in again.objects} == {o.id for o in bundle.objects}
    assert build_graph(again).edges == build_graph(bundle).edges


@settings(max_examples=25, deadline=None)
@given(bundles())
def test_ingest_is_idempotent(tmp_path_factory, text):
    kb = KnowledgeBase(tmp_path_factory.mktemp("propkb"))
    bundle = parse_bundle(text, source_label="prop")
    kb.ingest(bundle)
    ids = kb.entity_ids()
    events_before = {i: kb.history(i) for i in ids}
    kb.ingest(bundle)
    assert kb.entity_ids() == ids
    assert {i: kb.history(i) for i in ids} == events_before


@settings(max_examples=25, deadline=None)
@given(bundles())
def test_expand_is_monotone_and_idempotent(tmp_path_factory, text):
    kb = KnowledgeBase(tmp_path_factory.mktemp("propkb"))
    bundle = parse_bundle(text, source_label="prop")
    kb.ingest(bundle)
    graph = build_graph(bundle)
    for node_id in graph.sorted_node_ids():
        expanded = expand_node(graph, node_id, kb)
        assert set(graph.nodes) <= set(expanded.nodes)
        assert graph.edges <= expanded.edges
        assert expand_node(expanded, node_id, kb) == expanded
        graph = expanded
