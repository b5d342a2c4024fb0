"""TimeML XML 파서 - TimeBank 1.2 방언(.tml) 문서를 TimeMLGraph로 변환한다.

EVENT / MAKEINSTANCE / TIMEX3 / TLINK / SLINK / ALINK 요소를 추출하고,
태그를 제거한 본문 기준의 문자 오프셋을 함께 기록한다.
"""

from __future__ import annotations

import logging
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

from src.timeml_model import (
    GraphOptions,
    NodeId,
    NodeKind,
    TemporalEntity,
    TimeMLGraph,
    TimeMLLink,
    TimexClass,
    TlexError,
    build_graph,
    parse_relation,
)

logger = logging.getLogger(__name__)

# 링크 요소별 (source 속성 후보, target 속성 후보)
_LINK_ENDPOINTS: dict[str, tuple[tuple[str, ...], tuple[str, ...]]] = {
    "TLINK": (
        ("eventInstanceID", "timeID", "eventID"),
        ("relatedToEventInstance", "relatedToTime", "relatedToEvent"),
    ),
    "SLINK": (("eventInstanceID", "eventID"), ("subordinatedEventInstance", "subordinatedEvent")),
    "ALINK": (("eventInstanceID", "eventID"), ("relatedToEventInstance", "relatedToEvent")),
}

_AUTO_INSTANCE_PREFIX = "ei-auto-"


# ── 예외 ────────────────────────────────────────────────────


class ParseError(TlexError):
    """TimeML 문서 파싱 오류."""


class XmlMalformed(ParseError):
    def __init__(self, position: tuple[int, int], detail: str = ""):
        super().__init__(f"XML 형식 오류 (line {position[0]}, col {position[1]}): {detail}")
        self.position = position


class UnresolvedReference(ParseError):
    def __init__(self, attr: str, value: str):
        super().__init__(f"참조를 해석할 수 없습니다: {attr}={value!r}")
        self.attr = attr
        self.value = value


class UnknownRelType(ParseError):
    def __init__(self, lid: str, value: str):
        super().__init__(f"링크 {lid}: 알 수 없는 relType {value!r}")
        self.lid = lid
        self.value = value


# ── 문서 구조 ────────────────────────────────────────────────


@dataclass(frozen=True)
class EventMention:
    eid: str
    text: str
    char_offset: int
    attributes: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class EventInstance:
    eiid: str
    eid: str
    attributes: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class TimexMention:
    tid: str
    timex_class: TimexClass
    text: str
    char_offset: int
    attributes: tuple[tuple[str, str], ...] = ()


@dataclass
class TimeMLDocument:
    doc_id: str
    raw_text: str = ""
    events: list[EventMention] = field(default_factory=list)
    instances: list[EventInstance] = field(default_factory=list)
    timexes: list[TimexMention] = field(default_factory=list)
    raw_links: list[TimeMLLink] = field(default_factory=list)

    @property
    def summary(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "events": len(self.events),
            "instances": len(self.instances),
            "timexes": len(self.timexes),
            "links": len(self.raw_links),
        }


def _local(tag: str) -> str:
    """네임스페이스를 제거한 태그 이름."""
    return tag.rsplit("}", 1)[-1] if "}" in tag else tag


def _pass_through(attrib: dict[str, str], *skip: str) -> tuple[tuple[str, str], ...]:
    return tuple(sorted((k, v) for k, v in attrib.items() if k not in skip))


def _timex_class(tid: str, value: str | None) -> TimexClass:
    try:
        return TimexClass((value or "").strip().upper())
    except ValueError:
        logger.warning("TIMEX3 %s: 알 수 없는 type %r → DATE로 처리", tid, value)
        return TimexClass.DATE


def parse_document(xml: bytes, doc_id: str | None = None) -> TimeMLDocument:
    """TimeML XML 바이트열을 TimeMLDocument로 파싱한다.

    오프셋은 모든 태그를 제거한 텍스트(raw_text) 기준이다. DOCID/DOCNO 요소가
    없으면 인자로 받은 doc_id를 쓴다.
    """
    try:
        root = ET.fromstring(xml)
    except ET.ParseError as exc:
        raise XmlMalformed(exc.position, str(exc)) from exc

    chunks: list[str] = []
    pos = 0
    found_doc_id: str | None = None
    spans: list[tuple[str, int, int, dict[str, str]]] = []
    instances: list[EventInstance] = []
    link_elems: list[tuple[str, dict[str, str]]] = []

    def visit(elem: ET.Element) -> None:
        nonlocal pos, found_doc_id
        start = pos
        if elem.text:
            chunks.append(elem.text)
            pos += len(elem.text)
        for child in elem:
            visit(child)
            if child.tail:
                chunks.append(child.tail)
                pos += len(child.tail)

        tag = _local(elem.tag)
        attrib = elem.attrib
        if tag in ("EVENT", "TIMEX3"):
            spans.append((tag, start, pos, dict(attrib)))
        elif tag == "MAKEINSTANCE":
            instances.append(EventInstance(
                eiid=attrib.get("eiid", ""),
                eid=attrib.get("eventID", ""),
                attributes=_pass_through(attrib, "eiid", "eventID"),
            ))
        elif tag in _LINK_ENDPOINTS:
            link_elems.append((tag, dict(attrib)))
        elif tag in ("DOCID", "DOCNO") and found_doc_id is None and elem.text:
            found_doc_id = elem.text.strip()

    visit(root)
    raw_text = "".join(chunks)

    events: list[EventMention] = []
    timexes: list[TimexMention] = []
    for tag, start, end, attrib in spans:
        text = raw_text[start:end].strip()
        if tag == "EVENT":
            events.append(EventMention(
                eid=attrib.get("eid", ""),
                text=text,
                char_offset=start,
                attributes=_pass_through(attrib, "eid"),
            ))
        else:
            tid = attrib.get("tid", "")
            timexes.append(TimexMention(
                tid=tid,
                timex_class=_timex_class(tid, attrib.get("type")),
                text=text,
                char_offset=start,
                attributes=_pass_through(attrib, "tid", "type"),
            ))

    doc = TimeMLDocument(
        doc_id=found_doc_id or doc_id or "",
        raw_text=raw_text,
        events=sorted(events, key=lambda e: e.char_offset),
        instances=instances,
        timexes=sorted(timexes, key=lambda t: t.char_offset),
    )

    eids = {e.eid for e in doc.events}
    for inst in doc.instances:
        if inst.eid not in eids:
            raise UnresolvedReference("eventID", inst.eid)

    eiids = {i.eiid for i in doc.instances}
    tids = {t.tid for t in doc.timexes}

    def endpoint(attrib: dict[str, str], candidates: tuple[str, ...]) -> NodeId:
        for attr in candidates:
            value = attrib.get(attr)
            if value is None:
                continue
            if value in tids:
                return NodeId(value, NodeKind.TIMEX)
            if value in eiids or value in eids:
                return NodeId(value, NodeKind.EVENT_INSTANCE)
            raise UnresolvedReference(attr, value)
        raise UnresolvedReference(candidates[0], "")

    for tag, attrib in link_elems:
        lid = attrib.get("lid", "")
        sources, targets = _LINK_ENDPOINTS[tag]
        rel_value = attrib.get("relType", "")
        try:
            rel = parse_relation(tag, rel_value)
        except ValueError:
            raise UnknownRelType(lid, rel_value) from None
        doc.raw_links.append(TimeMLLink(
            link_id=lid,
            source=endpoint(attrib, sources),
            target=endpoint(attrib, targets),
            rel=rel,
        ))

    logger.debug("문서 파싱 완료: %s", doc.summary)
    return doc


def resolve_graph(doc: TimeMLDocument, options: GraphOptions | None = None) -> TimeMLGraph:
    """TimeMLDocument를 노드/링크로 해석하고 build_graph로 검증한다.

    MAKEINSTANCE가 없는 이벤트에는 "ei-auto-<eid>" 인스턴스를 합성하고,
    eiid 대신 eid를 참조하는 링크는 해당 이벤트의 첫 인스턴스로 연결한다.
    """
    events = {e.eid: e for e in doc.events}
    entities: list[TemporalEntity] = []
    first_instance: dict[str, str] = {}

    for inst in doc.instances:
        event = events[inst.eid]
        first_instance.setdefault(inst.eid, inst.eiid)
        entities.append(TemporalEntity(
            node=NodeId(inst.eiid, NodeKind.EVENT_INSTANCE),
            surface_text=event.text,
            char_offset=event.char_offset,
            attributes=tuple(sorted(set(event.attributes) | set(inst.attributes))),
        ))

    for event in doc.events:
        if event.eid in first_instance:
            continue
        eiid = f"{_AUTO_INSTANCE_PREFIX}{event.eid}"
        logger.warning("%s: MAKEINSTANCE 없는 이벤트 %s → %s 합성", doc.doc_id, event.eid, eiid)
        first_instance[event.eid] = eiid
        entities.append(TemporalEntity(
            node=NodeId(eiid, NodeKind.EVENT_INSTANCE),
            surface_text=event.text,
            char_offset=event.char_offset,
            attributes=event.attributes,
        ))

    for timex in doc.timexes:
        entities.append(TemporalEntity(
            node=NodeId(timex.tid, NodeKind.TIMEX),
            surface_text=timex.text,
            char_offset=timex.char_offset,
            timex_class=timex.timex_class,
            attributes=timex.attributes,
        ))

    instance_ids = {e.node.id for e in entities}

    def resolve(node: NodeId, link_id: str) -> NodeId:
        if node.id in instance_ids:
            return node
        eiid = first_instance.get(node.id)
        if eiid is None:
            return node
        logger.warning(
            "%s: 링크 %s가 eventID %s를 참조 → 인스턴스 %s로 해석",
            doc.doc_id, link_id, node.id, eiid,
        )
        return NodeId(eiid, NodeKind.EVENT_INSTANCE)

    links = [
        TimeMLLink(
            link_id=link.link_id,
            source=resolve(link.source, link.link_id),
            target=resolve(link.target, link.link_id),
            rel=link.rel,
        )
        for link in doc.raw_links
    ]

    try:
        return build_graph(entities, links, options, doc_id=doc.doc_id)
    except TlexError as exc:
        exc.doc_id = doc.doc_id
        exc.add_note(f"doc_id={doc.doc_id}")
        raise


def parse_graph(
    xml: bytes, options: GraphOptions | None = None, doc_id: str | None = None
) -> TimeMLGraph:
    """parse_document + resolve_graph."""
    return resolve_graph(parse_document(xml, doc_id=doc_id), options)
