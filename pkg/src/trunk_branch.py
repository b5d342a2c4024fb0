"""부분 그래프별 타임라인을 줄기-가지(trunk-and-branch) 구조로 조립하고 코퍼스 통계를 낸다.

메인 타임라인은 텍스트 순서대로 이어 붙여 줄기(trunk)를 만들고, 종속(subordinated)
타임라인은 SLINK 연결점의 source 쪽 위치에 가지(branch)로 매단다. 가지 안의
위치는 가지 자체의 지역 위치다.
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass, field
from itertools import product

from src.partition import ConnectingPoint, Partition
from src.pa_transform import PointEnd, TimePoint
from src.timeline import IndeterminacyTable, NormalFormTimeline
from src.timeml_model import NodeId, SlinkRel, TimeMLLink, TlexError

logger = logging.getLogger(__name__)


class AnchorUnknown(TlexError):
    def __init__(self, node_id: str):
        super().__init__(f"앵커 노드가 그래프에 없습니다: {node_id}")
        self.node_id = node_id


class MissingTimeline(TlexError):
    def __init__(self, subgraph_id: int):
        super().__init__(f"부분 그래프 {subgraph_id}의 타임라인이 없습니다")
        self.subgraph_id = subgraph_id


@dataclass(frozen=True)
class SubgraphTimeline:
    subgraph_id: int
    timeline: NormalFormTimeline
    table: IndeterminacyTable
    is_main: bool
    # 줄기 위 전역 오프셋 (가지는 0)
    offset: int = 0


@dataclass(frozen=True)
class BranchLink:
    link_id: str
    rel: SlinkRel
    source: NodeId
    source_subgraph: int
    source_pos: int
    source_on_trunk: bool
    target: NodeId
    target_subgraph: int
    target_pos: int
    target_on_trunk: bool


@dataclass(frozen=True)
class TrunkBranchTimeline:
    timelines: tuple[SubgraphTimeline, ...] = ()
    global_offsets: dict[int, int] = field(default_factory=dict, compare=False)
    branch_links: tuple[BranchLink, ...] = ()
    intra_slinks: tuple[TimeMLLink, ...] = ()

    @property
    def trunk(self) -> list[SubgraphTimeline]:
        return [t for t in self.timelines if t.is_main]

    @property
    def branches(self) -> list[SubgraphTimeline]:
        return [t for t in self.timelines if not t.is_main]

    @property
    def trunk_length(self) -> int:
        return sum(t.timeline.length for t in self.trunk)

    def anchor_of(self, subgraph_id: int) -> BranchLink | None:
        """가지를 매다는 연결점: 해당 가지로 들어오는 첫 SLINK (없으면 닿아 있는 첫 SLINK)."""
        incoming = [b for b in self.branch_links if b.target_subgraph == subgraph_id]
        if incoming:
            return incoming[0]
        touching = [b for b in self.branch_links if b.source_subgraph == subgraph_id]
        return touching[0] if touching else None

    def global_position(self, point: TimePoint) -> int | None:
        """줄기 위 시점의 전역 위치. 가지에 있으면 None."""
        for t in self.trunk:
            local = t.timeline.point_positions.get(point)
            if local is not None:
                return t.offset + local
        return None


@dataclass(frozen=True)
class BreakingPair:
    subgraph_a: int
    subgraph_b: int
    node_a: NodeId
    node_b: NodeId
    char_distance: int
    word_distance: float


# ── 조립 ────────────────────────────────────────────────────


def identify_main(partition: Partition, anchors: Iterable[NodeId] | None = None) -> set[int]:
    """메인 타임라인이 될 부분 그래프 id 집합.

    앵커가 주어지면 앵커를 포함하는 부분 그래프가 메인이다. 앵커가 없으면 다른
    부분 그래프로부터 들어오는 SLINK가 없는 부분 그래프가 메인이다.
    """
    anchors = set(anchors or ())
    if anchors:
        mains: set[int] = set()
        for node in sorted(anchors):
            index = partition.subgraph_of.get(node)
            if index is None:
                raise AnchorUnknown(node.id)
            mains.add(index)
        return mains

    subordinated = {partition.subgraph_of[cp.target] for cp in partition.connecting_points}
    return set(range(len(partition))) - subordinated


def assemble(
    partition: Partition,
    results: Mapping[int, tuple[NormalFormTimeline, IndeterminacyTable]],
    mains: set[int],
) -> TrunkBranchTimeline:
    """메인 타임라인을 분할 순서대로 이어 붙이고 종속 타임라인을 가지로 연결한다.

    L1 다음에 오는 L2의 시점 v는 전역 위치 length(L1) + L2(v)를 갖는다.
    """
    timelines: list[SubgraphTimeline] = []
    offsets: dict[int, int] = {}
    offset = 0
    for index in range(len(partition)):
        if index not in results:
            raise MissingTimeline(index)
        timeline, table = results[index]
        is_main = index in mains
        if is_main:
            offsets[index] = offset
        timelines.append(
            SubgraphTimeline(index, timeline, table, is_main, offset if is_main else 0)
        )
        if is_main:
            offset += timeline.length

    def locate(node: NodeId) -> tuple[int, int, bool]:
        index = partition.subgraph_of[node]
        local = timelines[index].timeline.position(TimePoint(node, PointEnd.START))
        if index in offsets:
            return index, offsets[index] + local, True
        return index, local, False

    branch_links = tuple(_branch_link(cp, locate) for cp in partition.connecting_points)
    logger.debug(
        "줄기 %d개 (길이 %d), 가지 %d개", len(offsets), offset, len(timelines) - len(offsets),
    )
    return TrunkBranchTimeline(
        timelines=tuple(timelines),
        global_offsets=offsets,
        branch_links=branch_links,
        intra_slinks=partition.intra_slinks,
    )


def _branch_link(
    cp: ConnectingPoint, locate: Callable[[NodeId], tuple[int, int, bool]]
) -> BranchLink:
    source_subgraph, source_pos, source_on_trunk = locate(cp.source)
    target_subgraph, target_pos, target_on_trunk = locate(cp.target)
    return BranchLink(
        link_id=cp.link_id,
        rel=cp.rel,
        source=cp.source,
        source_subgraph=source_subgraph,
        source_pos=source_pos,
        source_on_trunk=source_on_trunk,
        target=cp.target,
        target_subgraph=target_subgraph,
        target_pos=target_pos,
        target_on_trunk=target_on_trunk,
    )


def breaking_pairs(
    partition: Partition,
    mains: set[int],
    average_word_length: float = 6.0,
) -> list[BreakingPair]:
    """텍스트 순서상 연속한 두 메인 타임라인마다, 본문에서 가장 가까운 노드 쌍."""
    ordered = sorted(mains)
    pairs: list[BreakingPair] = []
    for a, b in zip(ordered, ordered[1:]):
        left = partition.subgraphs[a].entities
        right = partition.subgraphs[b].entities
        ea, eb = min(
            product(left, right),
            key=lambda pair: (
                abs(pair[0].char_offset - pair[1].char_offset), pair[0].node, pair[1].node
            ),
        )
        distance = abs(ea.char_offset - eb.char_offset)
        pairs.append(BreakingPair(
            subgraph_a=a,
            subgraph_b=b,
            node_a=ea.node,
            node_b=eb.node,
            char_distance=distance,
            word_distance=round(distance / average_word_length, 2),
        ))
    return pairs


# ── 코퍼스 통계 ─────────────────────────────────────────────


@dataclass(frozen=True)
class DocumentRow:
    """문서 하나의 통계 행. 비일관 문서는 타임라인 관련 값이 0이다."""

    doc_id: str
    consistent: bool
    consistent_tlinks_only: bool | None = None
    main_length: int = 0
    main_timelines: int = 0
    branches: int = 0
    branch_points: int = 0
    indeterminate_sections: int = 0
    indeterminate_pairs: int = 0
    mlic_size: int = 0


@dataclass(frozen=True)
class Summary:
    min: float = 0
    avg: float = 0.0
    max: float = 0

    @classmethod
    def of(cls, values: list[int]) -> Summary:
        if not values:
            return cls()
        return cls(min(values), round(sum(values) / len(values), 2), max(values))


@dataclass(frozen=True)
class CorpusStats:
    rows: tuple[DocumentRow, ...] = ()
    main_length: Summary = Summary()
    branches: Summary = Summary()
    indeterminate_sections: Summary = Summary()
    documents: int = 0
    inconsistent: int = 0
    inconsistent_tlinks_only: int = 0
    multi_main: int = 0
    total_sections: int = 0
    total_branch_points: int = 0
    total_mlic: int = 0


def corpus_stats(rows: Iterable[DocumentRow]) -> CorpusStats:
    """문서별 행을 집계한다. min/avg/max는 일관된 문서만 대상으로 한다."""
    rows = tuple(rows)
    consistent = [r for r in rows if r.consistent]
    return CorpusStats(
        rows=rows,
        main_length=Summary.of([r.main_length for r in consistent]),
        branches=Summary.of([r.branches for r in consistent]),
        indeterminate_sections=Summary.of([r.indeterminate_sections for r in consistent]),
        documents=len(rows),
        inconsistent=sum(1 for r in rows if not r.consistent),
        inconsistent_tlinks_only=sum(1 for r in rows if r.consistent_tlinks_only is False),
        multi_main=sum(1 for r in consistent if r.main_timelines > 1),
        total_sections=sum(r.indeterminate_sections for r in consistent),
        total_branch_points=sum(r.branch_points for r in consistent),
        total_mlic=sum(r.mlic_size for r in rows),
    )
