"""TimeML 시간 그래프 도메인 모델 - 노드, 링크, 관계 어휘, 그래프 검증.

이벤트 인스턴스(eiid)와 시간 표현(tid)을 노드로, TLINK/SLINK/ALINK를 간선으로 갖는
방향성 다중 그래프를 표현한다. 모든 타입은 생성 후 변경되지 않는다.
"""

from __future__ import annotations

import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Union

logger = logging.getLogger(__name__)


# ── 예외 ────────────────────────────────────────────────────


class TlexError(Exception):
    """엔진 전체의 기본 예외. doc_id는 문서 단위 처리 중에 채워진다."""

    doc_id: str | None = None


class GraphError(TlexError):
    """TimeML 그래프 구성 오류."""


class DanglingEndpoint(GraphError):
    def __init__(self, link_id: str):
        super().__init__(f"링크 {link_id}: 존재하지 않는 노드를 참조합니다")
        self.link_id = link_id


class DuplicateLink(GraphError):
    def __init__(self, pair: tuple[str, str], kind: str = "TLINK"):
        super().__init__(f"{kind} 중복 (관계 충돌): {pair[0]} -> {pair[1]}")
        self.pair = pair
        self.kind = kind


class SlinkOnTimex(GraphError):
    def __init__(self, link_id: str):
        super().__init__(f"링크 {link_id}: SLINK/ALINK의 끝점이 TIMEX입니다")
        self.link_id = link_id


class MalformedDump(GraphError):
    """정규 JSON 그래프 덤프의 구조 오류."""


# ── 노드 ────────────────────────────────────────────────────


class NodeKind(str, Enum):
    EVENT_INSTANCE = "event"
    TIMEX = "timex"


class TimexClass(str, Enum):
    DATE = "DATE"
    TIME = "TIME"
    DURATION = "DURATION"
    SET = "SET"


@dataclass(frozen=True, order=True)
class NodeId:
    id: str
    kind: NodeKind = field(default=NodeKind.EVENT_INSTANCE, compare=False)

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("NodeId.id는 비어 있을 수 없습니다")

    def __str__(self) -> str:
        return self.id


@dataclass(frozen=True)
class TemporalEntity:
    node: NodeId
    surface_text: str = ""
    char_offset: int = 0
    timex_class: TimexClass | None = None
    # tense, aspect, value 등 모델링하지 않는 속성은 그대로 전달만 한다
    attributes: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        if self.char_offset < 0:
            raise ValueError(f"{self.node}: char_offset은 0 이상이어야 합니다")
        is_timex = self.node.kind == NodeKind.TIMEX
        if is_timex != (self.timex_class is not None):
            raise ValueError(f"{self.node}: timex_class는 TIMEX 노드에만 존재해야 합니다")


# ── 관계 어휘 ────────────────────────────────────────────────


class TlinkRel(str, Enum):
    BEFORE = "before"
    AFTER = "after"
    IBEFORE = "ibefore"
    IAFTER = "iafter"
    BEGINS = "begins"
    BEGUN_BY = "begun_by"
    ENDS = "ends"
    ENDED_BY = "ended_by"
    INCLUDES = "includes"
    IS_INCLUDED = "is_included"
    SIMULTANEOUS = "simultaneous"
    IDENTITY = "identity"
    DURING = "during"
    DURING_INV = "during_inv"


class SlinkRel(str, Enum):
    MODAL = "modal"
    FACTIVE = "factive"
    COUNTER_FACTIVE = "counter_factive"
    EVIDENTIAL = "evidential"
    NEGATIVE_EVIDENTIAL = "negative_evidential"
    CONDITIONAL = "conditional"


class AlinkRel(str, Enum):
    INITIATES = "initiates"
    REINITIATES = "reinitiates"
    TERMINATES = "terminates"
    CULMINATES = "culminates"
    CONTINUES = "continues"


Relation = Union[TlinkRel, SlinkRel, AlinkRel]

_LINK_KIND = {TlinkRel: "TLINK", SlinkRel: "SLINK", AlinkRel: "ALINK"}


def link_kind(rel: Relation) -> str:
    """관계 값으로 링크 종류("TLINK", "SLINK", "ALINK")를 반환한다."""
    return _LINK_KIND[type(rel)]


def parse_relation(kind: str, value: str) -> Relation:
    """링크 종류와 관계 문자열을 enum으로 변환한다. 대소문자를 구분하지 않는다."""
    enum_cls = {"TLINK": TlinkRel, "SLINK": SlinkRel, "ALINK": AlinkRel}[kind.upper()]
    normalized = value.strip().lower()
    # 코퍼스마다 IBEFORE / I_BEFORE 표기가 섞여 있다
    if normalized in ("i_before", "i_after"):
        normalized = normalized.replace("_", "")
    return enum_cls(normalized)


@dataclass(frozen=True)
class TimeMLLink:
    link_id: str
    source: NodeId
    target: NodeId
    rel: Relation

    @property
    def kind(self) -> str:
        return link_kind(self.rel)


# ── 그래프 ──────────────────────────────────────────────────


@dataclass(frozen=True)
class GraphOptions:
    drop_self_loops: bool = True
    include_alinks: bool = True


@dataclass(frozen=True)
class TimeMLGraph:
    entities: tuple[TemporalEntity, ...] = ()
    links: tuple[TimeMLLink, ...] = ()
    doc_id: str = ""
    warnings: tuple[str, ...] = ()

    @property
    def nodes(self) -> frozenset[NodeId]:
        return frozenset(e.node for e in self.entities)

    @property
    def n(self) -> int:
        return len(self.entities)

    @property
    def m(self) -> int:
        """링크가 하나 이상 존재하는 서로 다른 순서쌍의 개수."""
        return len({(link.source, link.target) for link in self.links})

    def entity(self, node: NodeId) -> TemporalEntity:
        return self._entity_index[node]

    def link(self, link_id: str) -> TimeMLLink:
        return self._link_index[link_id]

    @property
    def _entity_index(self) -> dict[NodeId, TemporalEntity]:
        # frozen dataclass라 캐시를 직접 둘 수 없어 object.__setattr__로 지연 생성한다
        cached = self.__dict__.get("_entities_by_node")
        if cached is None:
            cached = {e.node: e for e in self.entities}
            object.__setattr__(self, "_entities_by_node", cached)
        return cached

    @property
    def _link_index(self) -> dict[str, TimeMLLink]:
        cached = self.__dict__.get("_links_by_id")
        if cached is None:
            cached = {link.link_id: link for link in self.links}
            object.__setattr__(self, "_links_by_id", cached)
        return cached


def _node_key(node: NodeId) -> tuple[str, str]:
    return (node.id, node.kind.value)


def build_graph(
    entities: list[TemporalEntity],
    links: list[TimeMLLink],
    options: GraphOptions | None = None,
    doc_id: str = "",
) -> TimeMLGraph:
    """엔티티와 링크를 검증하여 TimeMLGraph를 만든다.

    - 존재하지 않는 노드를 참조하는 링크 → DanglingEndpoint
    - SLINK/ALINK의 끝점이 TIMEX → SlinkOnTimex
    - 같은 순서쌍에 관계가 다른 TLINK(또는 ALINK)가 둘 이상 → DuplicateLink
      (관계까지 같은 중복은 조용히 하나로 합친다)
    - drop_self_loops이면 source == target인 링크를 제거하고 경고로 남긴다

    입력 순서와 무관하게 id 순으로 정규화하므로 결과는 결정적이다.
    """
    options = options or GraphOptions()
    ordered_entities = tuple(sorted(entities, key=lambda e: _node_key(e.node)))
    known = {e.node.id: e.node for e in ordered_entities}
    if len(known) != len(ordered_entities):
        counts = Counter(e.node.id for e in ordered_entities)
        dup = sorted(node_id for node_id, count in counts.items() if count > 1)
        raise ValueError(f"노드 id가 중복됩니다: {', '.join(dup)}")

    warnings: list[str] = []
    kept: list[TimeMLLink] = []
    seen_rel: dict[tuple[str, NodeId, NodeId], Relation] = {}
    seen_ids: set[str] = set()

    for link in sorted(links, key=lambda lk: lk.link_id):
        kind = link.kind
        if kind == "ALINK" and not options.include_alinks:
            continue

        source = known.get(link.source.id)
        target = known.get(link.target.id)
        if source is None or target is None:
            raise DanglingEndpoint(link.link_id)
        # 노드 종류는 엔티티 쪽을 기준으로 맞춘다
        link = TimeMLLink(link.link_id, source, target, link.rel)

        if kind in ("SLINK", "ALINK") and NodeKind.TIMEX in (source.kind, target.kind):
            raise SlinkOnTimex(link.link_id)

        if source == target and options.drop_self_loops:
            msg = f"self-loop 제거: {link.link_id} ({source} {link.rel.value} {target})"
            logger.warning(msg)
            warnings.append(msg)
            continue

        if kind in ("TLINK", "ALINK"):
            key = (kind, source, target)
            previous = seen_rel.get(key)
            if previous is not None:
                if previous != link.rel:
                    raise DuplicateLink((source.id, target.id), kind)
                logger.debug("동일 링크 중복 제거: %s", link.link_id)
                continue
            seen_rel[key] = link.rel

        if link.link_id in seen_ids:
            raise ValueError(f"링크 id가 중복됩니다: {link.link_id}")
        seen_ids.add(link.link_id)
        kept.append(link)

    return TimeMLGraph(
        entities=ordered_entities,
        links=tuple(kept),
        doc_id=doc_id,
        warnings=tuple(warnings),
    )


# ── 정규 JSON 직렬화 ─────────────────────────────────────────


def graph_to_dict(graph: TimeMLGraph) -> dict[str, Any]:
    """필드 순서가 고정되고 id가 사전순 정렬된 dict로 변환한다."""
    entities = sorted(graph.entities, key=lambda e: e.node.id)
    links = sorted(graph.links, key=lambda lk: lk.link_id)
    return {
        "doc_id": graph.doc_id,
        "entities": [
            {
                "id": e.node.id,
                "kind": e.node.kind.value,
                "text": e.surface_text,
                "offset": e.char_offset,
                "timex_class": e.timex_class.value if e.timex_class else None,
                "attributes": dict(e.attributes),
            }
            for e in entities
        ],
        "links": [
            {
                "lid": lk.link_id,
                "kind": lk.kind,
                "source": lk.source.id,
                "target": lk.target.id,
                "rel": lk.rel.value,
            }
            for lk in links
        ],
        "warnings": list(graph.warnings),
    }


def _read_dump(data: dict[str, Any]) -> tuple[list[TemporalEntity], list[TimeMLLink]]:
    entities: list[TemporalEntity] = []
    nodes: dict[str, NodeId] = {}
    for item in data.get("entities", []):
        node = NodeId(item["id"], NodeKind(item["kind"]))
        nodes[node.id] = node
        timex_class = item.get("timex_class")
        entities.append(TemporalEntity(
            node=node,
            surface_text=item.get("text", ""),
            char_offset=int(item.get("offset", 0)),
            timex_class=TimexClass(timex_class) if timex_class else None,
            attributes=tuple(sorted(item.get("attributes", {}).items())),
        ))

    links: list[TimeMLLink] = []
    for item in data.get("links", []):
        source = nodes.get(item["source"], NodeId(item["source"]))
        target = nodes.get(item["target"], NodeId(item["target"]))
        links.append(TimeMLLink(
            link_id=item["lid"],
            source=source,
            target=target,
            rel=parse_relation(item["kind"], item["rel"]),
        ))
    return entities, links


def graph_from_dict(data: dict[str, Any], options: GraphOptions | None = None) -> TimeMLGraph:
    """graph_to_dict 결과를 다시 TimeMLGraph로 복원한다 (build_graph 검증 포함).

    필드가 빠졌거나 타입이 맞지 않는 덤프는 MalformedDump.
    """
    try:
        entities, links = _read_dump(data)
    except (KeyError, TypeError, AttributeError) as e:
        raise MalformedDump(f"{type(e).__name__}: {e}") from e
    graph = build_graph(entities, links, options, doc_id=data.get("doc_id", ""))
    stored = tuple(data.get("warnings", []))
    if stored:
        graph = TimeMLGraph(graph.entities, graph.links, graph.doc_id, stored + graph.warnings)
    return graph


def dumps_graph(graph: TimeMLGraph) -> str:
    return json.dumps(graph_to_dict(graph), ensure_ascii=False, indent=2)


def loads_graph(text: str, options: GraphOptions | None = None) -> TimeMLGraph:
    return graph_from_dict(json.loads(text), options)
