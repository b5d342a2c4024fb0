"""TimeML 그래프 모델 테스트 - 노드/링크 검증, 관계 어휘, 정규 JSON 직렬화."""

import json

import pytest

from src.timeml_model import (
    AlinkRel,
    DanglingEndpoint,
    DuplicateLink,
    GraphOptions,
    MalformedDump,
    NodeId,
    NodeKind,
    SlinkOnTimex,
    SlinkRel,
    TemporalEntity,
    TimeMLLink,
    TimexClass,
    TlexError,
    TlinkRel,
    build_graph,
    dumps_graph,
    graph_from_dict,
    graph_to_dict,
    link_kind,
    loads_graph,
    parse_relation,
)


def _event(eid: str, offset: int = 0) -> TemporalEntity:
    return TemporalEntity(NodeId(eid), surface_text=eid, char_offset=offset)


def _timex(tid: str, cls: TimexClass = TimexClass.DATE, offset: int = 0) -> TemporalEntity:
    node = NodeId(tid, NodeKind.TIMEX)
    return TemporalEntity(node, surface_text=tid, char_offset=offset, timex_class=cls)


@pytest.fixture()
def small_graph():
    entities = [_event("ei2", 10), _timex("t1", offset=0), _event("ei1", 5)]
    links = [
        TimeMLLink("l2", NodeId("ei1"), NodeId("ei2"), TlinkRel.BEFORE),
        TimeMLLink("l1", NodeId("ei1"), NodeId("t1"), TlinkRel.IS_INCLUDED),
        TimeMLLink("l3", NodeId("ei1"), NodeId("ei2"), SlinkRel.MODAL),
    ]
    return build_graph(entities, links, doc_id="small")


class TestNodeAndEntity:
    def test_empty_id_rejected(self):
        with pytest.raises(ValueError):
            NodeId("")

    def test_node_equality_ignores_kind(self):
        assert NodeId("x", NodeKind.TIMEX) == NodeId("x")

    def test_negative_offset_rejected(self):
        with pytest.raises(ValueError):
            TemporalEntity(NodeId("ei1"), char_offset=-1)

    def test_timex_class_only_on_timex(self):
        with pytest.raises(ValueError):
            TemporalEntity(NodeId("ei1"), timex_class=TimexClass.DATE)
        with pytest.raises(ValueError):
            TemporalEntity(NodeId("t1", NodeKind.TIMEX))


class TestRelations:
    def test_link_kind(self):
        assert link_kind(TlinkRel.BEFORE) == "TLINK"
        assert link_kind(SlinkRel.FACTIVE) == "SLINK"
        assert link_kind(AlinkRel.CONTINUES) == "ALINK"

    def test_parse_relation_case_insensitive(self):
        assert parse_relation("TLINK", "IS_INCLUDED") is TlinkRel.IS_INCLUDED
        assert parse_relation("alink", "Culminates") is AlinkRel.CULMINATES

    def test_parse_relation_underscore_variants(self):
        assert parse_relation("TLINK", "I_BEFORE") is TlinkRel.IBEFORE
        assert parse_relation("TLINK", "IAFTER") is TlinkRel.IAFTER

    def test_unknown_relation(self):
        with pytest.raises(ValueError):
            parse_relation("TLINK", "OVERLAPS")

    def test_vocabulary_sizes(self):
        assert len(TlinkRel) == 14
        assert len(SlinkRel) == 6
        assert len(AlinkRel) == 5


class TestBuildGraph:
    def test_normalized_order(self, small_graph):
        assert [e.node.id for e in small_graph.entities] == ["ei1", "ei2", "t1"]
        assert [lk.link_id for lk in small_graph.links] == ["l1", "l2", "l3"]

    def test_counts(self, small_graph):
        assert small_graph.n == 3
        # l2와 l3은 같은 순서쌍
        assert small_graph.m == 2

    def test_lookup(self, small_graph):
        assert small_graph.entity(NodeId("ei2")).char_offset == 10
        assert small_graph.link("l1").rel is TlinkRel.IS_INCLUDED

    def test_node_kind_taken_from_entity(self, small_graph):
        assert small_graph.link("l1").target.kind is NodeKind.TIMEX

    def test_dangling_endpoint(self):
        links = [TimeMLLink("l1", NodeId("ei1"), NodeId("ei9"), TlinkRel.BEFORE)]
        with pytest.raises(DanglingEndpoint) as exc_info:
            build_graph([_event("ei1")], links)
        assert exc_info.value.link_id == "l1"
        assert isinstance(exc_info.value, TlexError)

    def test_slink_on_timex(self):
        links = [TimeMLLink("l1", NodeId("ei1"), NodeId("t1"), SlinkRel.MODAL)]
        with pytest.raises(SlinkOnTimex):
            build_graph([_event("ei1"), _timex("t1")], links)

    def test_alink_on_timex(self):
        links = [TimeMLLink("l1", NodeId("ei1"), NodeId("t1"), AlinkRel.INITIATES)]
        with pytest.raises(SlinkOnTimex):
            build_graph([_event("ei1"), _timex("t1")], links)

    def test_conflicting_duplicate(self):
        links = [
            TimeMLLink("l1", NodeId("ei1"), NodeId("ei2"), TlinkRel.BEFORE),
            TimeMLLink("l2", NodeId("ei1"), NodeId("ei2"), TlinkRel.AFTER),
        ]
        with pytest.raises(DuplicateLink) as exc_info:
            build_graph([_event("ei1"), _event("ei2")], links)
        assert exc_info.value.pair == ("ei1", "ei2")

    def test_identical_duplicate_merged(self):
        links = [
            TimeMLLink("l1", NodeId("ei1"), NodeId("ei2"), TlinkRel.BEFORE),
            TimeMLLink("l2", NodeId("ei1"), NodeId("ei2"), TlinkRel.BEFORE),
        ]
        graph = build_graph([_event("ei1"), _event("ei2")], links)
        assert [lk.link_id for lk in graph.links] == ["l1"]

    def test_reverse_pair_is_not_duplicate(self):
        links = [
            TimeMLLink("l1", NodeId("ei1"), NodeId("ei2"), TlinkRel.BEFORE),
            TimeMLLink("l2", NodeId("ei2"), NodeId("ei1"), TlinkRel.BEFORE),
        ]
        graph = build_graph([_event("ei1"), _event("ei2")], links)
        assert len(graph.links) == 2

    def test_duplicate_node_id(self):
        with pytest.raises(ValueError):
            build_graph([_event("ei1"), _event("ei1")], [])

    def test_self_loop_dropped_with_warning(self):
        links = [TimeMLLink("l1", NodeId("ei1"), NodeId("ei1"), TlinkRel.INCLUDES)]
        graph = build_graph([_event("ei1")], links)
        assert graph.links == ()
        assert len(graph.warnings) == 1
        assert "l1" in graph.warnings[0]

    def test_self_loop_kept(self):
        links = [TimeMLLink("l1", NodeId("ei1"), NodeId("ei1"), TlinkRel.INCLUDES)]
        graph = build_graph([_event("ei1")], links, GraphOptions(drop_self_loops=False))
        assert len(graph.links) == 1
        assert graph.warnings == ()

    def test_alinks_excluded(self):
        links = [TimeMLLink("l1", NodeId("ei1"), NodeId("ei2"), AlinkRel.INITIATES)]
        options = GraphOptions(include_alinks=False)
        graph = build_graph([_event("ei1"), _event("ei2")], links, options)
        assert graph.links == ()


class TestCanonicalJson:
    def test_dict_shape(self, small_graph):
        data = graph_to_dict(small_graph)
        assert list(data) == ["doc_id", "entities", "links", "warnings"]
        assert data["entities"][2] == {
            "id": "t1",
            "kind": "timex",
            "text": "t1",
            "offset": 0,
            "timex_class": "DATE",
            "attributes": {},
        }
        assert data["links"][0] == {
            "lid": "l1", "kind": "TLINK", "source": "ei1", "target": "t1", "rel": "is_included",
        }

    def test_restore(self, small_graph):
        restored = loads_graph(dumps_graph(small_graph))
        assert restored == small_graph
        assert restored.link("l1").target.kind is NodeKind.TIMEX

    def test_stored_warnings_kept(self, small_graph):
        data = graph_to_dict(small_graph)
        data["warnings"] = ["self-loop 제거: l9"]
        assert graph_from_dict(data).warnings == ("self-loop 제거: l9",)

    def test_dump_is_stable(self, small_graph):
        text = dumps_graph(small_graph)
        assert text == dumps_graph(loads_graph(text))
        assert json.loads(text)["doc_id"] == "small"

    def test_restore_validates(self, small_graph):
        data = graph_to_dict(small_graph)
        data["links"].append(
            {"lid": "l9", "kind": "TLINK", "source": "ei1", "target": "ei7", "rel": "before"}
        )
        with pytest.raises(DanglingEndpoint):
            graph_from_dict(data)

    def test_missing_field_is_malformed_dump(self, small_graph):
        data = graph_to_dict(small_graph)
        del data["links"][0]["rel"]
        with pytest.raises(MalformedDump, match="KeyError"):
            graph_from_dict(data)

    def test_top_level_list_is_malformed_dump(self):
        with pytest.raises(MalformedDump):
            loads_graph("[]")
