"""문서 하나에 대한 전체 파이프라인 - 분할 → PA 변환 → 일관성 검사 → 타임라인 → 조립.

CLI와 HTTP 서버가 같은 경로를 쓴다. 코퍼스 실행에서는 문서 단위 오류를
DocumentFailure로 바꿔 돌려주고 나머지 문서를 계속 처리한다.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import repeat
from pathlib import Path

from src.config import Settings
from src.consistency import CheckResult, Consistent, Inconsistent, InconsistentCycle, check
from src.pa_transform import PAGraph, transform
from src.partition import Partition, partition
from src.timeline import (
    SECTION_RULE_VERSION,
    IndeterminacyMode,
    IndeterminacyTable,
    NormalFormTimeline,
    Reachability,
    ReachabilityMode,
    greedy_kahn,
    indeterminacy_table,
)
from src.timeml_model import GraphOptions, NodeId, TimeMLGraph, TlexError, loads_graph
from src.timeml_parser import parse_graph
from src.trunk_branch import (
    BreakingPair,
    DocumentRow,
    TrunkBranchTimeline,
    assemble,
    breaking_pairs,
    identify_main,
)

logger = logging.getLogger(__name__)

INPUT_SUFFIXES = (".tml", ".xml", ".json")


@dataclass(frozen=True)
class PipelineOptions:
    include_alinks: bool = True
    drop_self_loops: bool = True
    indeterminacy_mode: IndeterminacyMode = IndeterminacyMode.SECTIONS
    reachability_mode: ReachabilityMode = ReachabilityMode.DFS
    section_rule_version: str = SECTION_RULE_VERSION
    # 모든 문서에 적용되는 앵커. 문서에 없는 id는 조용히 무시한다.
    anchors: frozenset[str] = frozenset()
    # (doc_id, node_id) 앵커. 해당 문서에 노드가 없으면 AnchorUnknown.
    doc_anchors: frozenset[tuple[str, str]] = frozenset()
    compute_tlinks_only: bool = False
    average_word_length: float = 6.0

    @classmethod
    def from_settings(cls, s: Settings, **overrides) -> PipelineOptions:
        options = cls(
            include_alinks=s.include_alinks,
            drop_self_loops=s.drop_self_loops,
            indeterminacy_mode=IndeterminacyMode(s.indeterminacy_mode),
            reachability_mode=ReachabilityMode(s.reachability_mode),
            section_rule_version=s.section_rule_version,
            average_word_length=s.average_word_length,
        )
        return replace(options, **overrides)

    @property
    def graph_options(self) -> GraphOptions:
        return GraphOptions(
            drop_self_loops=self.drop_self_loops, include_alinks=self.include_alinks
        )


@dataclass(frozen=True)
class SubgraphReport:
    index: int
    pa: PAGraph
    result: CheckResult
    timeline: NormalFormTimeline | None = None
    table: IndeterminacyTable | None = None

    @property
    def consistent(self) -> bool:
        return isinstance(self.result, Consistent)


@dataclass(frozen=True)
class DocumentResult:
    doc_id: str
    graph: TimeMLGraph
    partition: Partition
    subgraphs: tuple[SubgraphReport, ...]
    consistent_tlinks_only: bool | None = None
    trunk_branch: TrunkBranchTimeline | None = None
    mains: frozenset[int] = frozenset()
    breaking: tuple[BreakingPair, ...] = ()
    source: str = ""

    @property
    def consistent(self) -> bool:
        return all(s.consistent for s in self.subgraphs)

    @property
    def mlic(self) -> list[tuple[int, InconsistentCycle]]:
        return [
            (s.index, cycle)
            for s in self.subgraphs
            if isinstance(s.result, Inconsistent)
            for cycle in s.result.report.cycles
        ]

    @property
    def warnings(self) -> tuple[str, ...]:
        return self.graph.warnings


@dataclass(frozen=True)
class DocumentFailure:
    source: str
    error_type: str
    message: str
    doc_id: str | None = None
    notes: tuple[str, ...] = field(default=())


# ── 입력 ────────────────────────────────────────────────────


def collect_inputs(inputs: Iterable[str | Path]) -> list[Path]:
    """파일과 디렉토리(재귀)에서 입력 문서를 모아 경로 순으로 정렬한다."""
    paths: set[Path] = set()
    for item in inputs:
        path = Path(item)
        if path.is_dir():
            paths.update(
                p for p in path.rglob("*") if p.is_file() and p.suffix.lower() in INPUT_SUFFIXES
            )
        else:
            paths.add(path)
    return sorted(paths)


def load_graph(path: str | Path, options: PipelineOptions | None = None) -> TimeMLGraph:
    """.json은 정규 그래프 덤프로, 그 외(.tml/.xml)는 TimeML로 읽는다."""
    options = options or PipelineOptions()
    path = Path(path)
    if path.suffix.lower() == ".json":
        return loads_graph(path.read_text(encoding="utf-8"), options.graph_options)
    return parse_graph(path.read_bytes(), options.graph_options, doc_id=path.stem)


# ── 처리 ────────────────────────────────────────────────────


def without_alinks(graph: TimeMLGraph) -> TimeMLGraph:
    return TimeMLGraph(
        entities=graph.entities,
        links=tuple(link for link in graph.links if link.kind != "ALINK"),
        doc_id=graph.doc_id,
        warnings=graph.warnings,
    )


def is_consistent(graph: TimeMLGraph) -> bool:
    return all(isinstance(check(transform(sub)), Consistent) for sub in partition(graph).subgraphs)


def _anchors_for(graph: TimeMLGraph, part: Partition, options: PipelineOptions) -> set[NodeId]:
    anchors = {NodeId(a) for a in options.anchors if NodeId(a) in part.subgraph_of}
    anchors.update(NodeId(node) for doc, node in options.doc_anchors if doc == graph.doc_id)
    return anchors


def process_graph(
    graph: TimeMLGraph,
    options: PipelineOptions | None = None,
    source: str = "",
) -> DocumentResult:
    options = options or PipelineOptions()
    part = partition(graph)

    reports: list[SubgraphReport] = []
    for index, sub in enumerate(part.subgraphs):
        pa = transform(sub)
        result = check(pa)
        if isinstance(result, Consistent):
            timeline = greedy_kahn(result.dag)
            table = indeterminacy_table(
                result.dag,
                timeline,
                options.indeterminacy_mode,
                Reachability(result.dag, options.reachability_mode),
                rule_version=options.section_rule_version,
            )
            reports.append(SubgraphReport(index, pa, result, timeline, table))
        else:
            reports.append(SubgraphReport(index, pa, result))

    consistent = all(r.consistent for r in reports)

    tlinks_only: bool | None = None
    if options.compute_tlinks_only:
        has_alinks = any(link.kind == "ALINK" for link in graph.links)
        tlinks_only = is_consistent(without_alinks(graph)) if has_alinks else consistent

    if not consistent:
        cycles = sum(
            len(r.result.report) for r in reports if isinstance(r.result, Inconsistent)
        )
        logger.info(
            "%s: 비일관 (사이클 %d개)", graph.doc_id, cycles, extra={"doc_id": graph.doc_id},
        )
        return DocumentResult(graph.doc_id, graph, part, tuple(reports), tlinks_only, source=source)

    mains = identify_main(part, _anchors_for(graph, part, options))
    trunk = assemble(part, {r.index: (r.timeline, r.table) for r in reports}, mains)
    pairs = breaking_pairs(part, mains, options.average_word_length)
    logger.info(
        "%s: 일관, 부분 그래프 %d개, 줄기 길이 %d",
        graph.doc_id, len(part), trunk.trunk_length,
        extra={"doc_id": graph.doc_id},
    )
    return DocumentResult(
        doc_id=graph.doc_id,
        graph=graph,
        partition=part,
        subgraphs=tuple(reports),
        consistent_tlinks_only=tlinks_only,
        trunk_branch=trunk,
        mains=frozenset(mains),
        breaking=tuple(pairs),
        source=source,
    )


def process_path(
    path: str | Path, options: PipelineOptions | None = None
) -> DocumentResult | DocumentFailure:
    """문서 하나를 처리한다. 문서 단위 오류는 예외 대신 DocumentFailure로 돌려준다."""
    try:
        graph = load_graph(path, options)
        return process_graph(graph, options, source=str(path))
    except (TlexError, OSError, ValueError) as e:
        logger.warning(
            "%s: 처리 실패 (%s: %s)", path, type(e).__name__, e,
            extra={"source": str(path), "doc_id": getattr(e, "doc_id", None)},
        )
        return DocumentFailure(
            source=str(path),
            error_type=type(e).__name__,
            message=str(e),
            doc_id=getattr(e, "doc_id", None),
            notes=tuple(getattr(e, "__notes__", ())),
        )


def process_many(
    paths: list[Path],
    options: PipelineOptions,
    jobs: int = 1,
) -> list[DocumentResult | DocumentFailure]:
    """여러 문서를 처리한다. 결과 순서는 완료 순서와 무관하게 입력 경로 순서다."""
    if jobs <= 1 or len(paths) <= 1:
        return [process_path(p, options) for p in paths]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(process_path, paths, repeat(options), chunksize=8))


def row(result: DocumentResult) -> DocumentRow:
    """코퍼스 통계용 문서별 행."""
    if result.trunk_branch is None:
        return DocumentRow(
            doc_id=result.doc_id,
            consistent=False,
            consistent_tlinks_only=result.consistent_tlinks_only,
            mlic_size=len(result.mlic),
        )
    trunk = result.trunk_branch
    tables = [t.table for t in trunk.timelines]
    return DocumentRow(
        doc_id=result.doc_id,
        consistent=True,
        consistent_tlinks_only=result.consistent_tlinks_only,
        main_length=trunk.trunk_length,
        main_timelines=len(trunk.trunk),
        branches=len(trunk.branches),
        branch_points=sum(len(t.timeline.point_positions) for t in trunk.branches),
        indeterminate_sections=sum(len(t.sections) for t in tables),
        indeterminate_pairs=sum(t.pair_count for t in tables),
    )
