"""결과 출력 - 문서별 JSON / 텍스트, MLIC 목록, 코퍼스 통계 표.

JSON 출력은 키 순서와 목록 정렬이 고정되어 같은 입력에 대해 바이트 단위로 같다.
"""

from __future__ import annotations

import json
from typing import Any

from src.consistency import CycleType, InconsistentCycle
from src.pa_transform import TimePoint
from src.pipeline import DocumentFailure, DocumentResult
from src.timeml_model import NodeId, TimeMLGraph
from src.trunk_branch import BranchLink, CorpusStats, Summary, TrunkBranchTimeline

MLIC_NOTE = "maximal with respect to back-edge removal during DFS, not the set of all simple cycles"


def _point(point: TimePoint) -> dict[str, str]:
    return {"node": point.node.id, "end": point.end.label}


def _link(graph: TimeMLGraph, link_id: str) -> dict[str, str]:
    link = graph.link(link_id)
    return {
        "lid": link.link_id,
        "kind": link.kind,
        "source": link.source.id,
        "rel": link.rel.value,
        "target": link.target.id,
    }


def _cycle(graph: TimeMLGraph, subgraph: int, cycle: InconsistentCycle) -> dict[str, Any]:
    return {
        "subgraph": subgraph,
        "type": cycle.cycle_type.value,
        "points": [str(p) for p in cycle.points],
        "links": [_link(graph, lid) for lid in sorted(cycle.link_ids)],
    }


def _endpoint(node: NodeId, subgraph: int, pos: int, on_trunk: bool) -> dict[str, Any]:
    return {"node": node.id, "subgraph": subgraph, "pos": pos, "on_trunk": on_trunk}


def _branch_link(b: BranchLink) -> dict[str, Any]:
    return {
        "slink": b.link_id,
        "rel": b.rel.value,
        "source": _endpoint(b.source, b.source_subgraph, b.source_pos, b.source_on_trunk),
        "target": _endpoint(b.target, b.target_subgraph, b.target_pos, b.target_on_trunk),
    }


def _trunk(tb: TrunkBranchTimeline) -> dict[str, Any]:
    points = []
    for t in tb.trunk:
        for point, local in t.timeline.point_positions.items():
            points.append({**_point(point), "global_pos": t.offset + local})
    points.sort(key=lambda p: (p["global_pos"], p["node"], p["end"] != "start"))
    return {
        "length": tb.trunk_length,
        "timelines": [
            {"subgraph": t.subgraph_id, "offset": t.offset, "length": t.timeline.length}
            for t in tb.trunk
        ],
        "points": points,
    }


def _branches(tb: TrunkBranchTimeline) -> list[dict[str, Any]]:
    branches = []
    for t in tb.branches:
        anchor = tb.anchor_of(t.subgraph_id)
        points = sorted(
            ({**_point(p), "pos": pos} for p, pos in t.timeline.point_positions.items()),
            key=lambda p: (p["pos"], p["node"], p["end"] != "start"),
        )
        branches.append({
            "subgraph": t.subgraph_id,
            "anchor": (
                {
                    "node": anchor.source.id,
                    "pos": anchor.source_pos,
                    "on_trunk": anchor.source_on_trunk,
                }
                if anchor else None
            ),
            "slink": anchor.link_id if anchor else None,
            "rel": anchor.rel.value if anchor else None,
            "timeline": {"length": t.timeline.length, "points": points},
        })
    return branches


def _sections(tb: TrunkBranchTimeline) -> list[dict[str, Any]]:
    sections = []
    for t in tb.timelines:
        for start, end in t.table.sections:
            covered = sorted(
                str(p) for p, pos in t.timeline.point_positions.items() if start <= pos <= end
            )
            sections.append({
                "subgraph": t.subgraph_id,
                "on_trunk": t.is_main,
                "start": start + t.offset,
                "end": end + t.offset,
                "points": covered,
            })
    return sections


def _rule_version(tb: TrunkBranchTimeline | None) -> str | None:
    versions = {t.table.rule_version for t in tb.timelines} if tb else set()
    return min(versions) if versions else None

def document_to_dict(result: DocumentResult) -> dict[str, Any]:
    tb = result.trunk_branch
    graph = result.graph
    data: dict[str, Any] = {
        "doc_id": result.doc_id,
        "consistent": result.consistent,
        "consistent_tlinks_only": result.consistent_tlinks_only,
        "mlic": [_cycle(graph, index, cycle) for index, cycle in result.mlic],
        "trunk": _trunk(tb) if tb else None,
        "branches": _branches(tb) if tb else [],
        "slinks": {
            "cross": [_branch_link(b) for b in tb.branch_links] if tb else [],
            "intra": [link.link_id for link in result.partition.intra_slinks],
        },
        "indeterminate_sections": _sections(tb) if tb else [],
        "section_rule_version": _rule_version(tb),
        "breaking_pairs": [
            {
                "subgraphs": [bp.subgraph_a, bp.subgraph_b],
                "nodes": [bp.node_a.id, bp.node_b.id],
                "char_distance": bp.char_distance,
                "word_distance": bp.word_distance,
            }
            for bp in result.breaking
        ],
        "stats": {
            "intervals": graph.n,
            "links": len(graph.links),
            "subgraphs": len(result.partition),
            "main_timelines": len(result.mains),
            "trunk_length": tb.trunk_length if tb else 0,
            "branches": len(tb.branches) if tb else 0,
            "indeterminate_pairs": sum(t.table.pair_count for t in tb.timelines) if tb else 0,
            "mlic_size": len(result.mlic),
        },
        "warnings": list(result.warnings),
    }
    if result.mlic:
        data["mlic_note"] = MLIC_NOTE
    return data


def check_to_dict(result: DocumentResult) -> dict[str, Any]:
    """check 결과용 요약: 판정, MLIC, 경고."""
    data = document_to_dict(result)
    keep = ("doc_id", "consistent", "mlic", "mlic_note", "warnings")
    return {k: data[k] for k in keep if k in data}


def failure_to_dict(failure: DocumentFailure) -> dict[str, Any]:
    return {
        "source": failure.source,
        "doc_id": failure.doc_id,
        "error": failure.error_type,
        "message": failure.message,
    }


def dumps(data: Any) -> str:
    return json.dumps(data, ensure_ascii=False, indent=2)


# ── 텍스트 ──────────────────────────────────────────────────


def render_mlic(result: DocumentResult) -> str:
    """수작업 교정을 위한 MLIC 목록."""
    lines = [f"MLIC ({MLIC_NOTE}):"]
    for k, (index, cycle) in enumerate(result.mlic, start=1):
        arrow = " -> " if cycle.cycle_type is CycleType.TYPE_III else ", "
        points = arrow.join(str(p) for p in cycle.points)
        lines.append(f"  #{k} {cycle.cycle_type.value} (subgraph {index}): {points}")
        for lid in sorted(cycle.link_ids):
            link = result.graph.link(lid)
            lines.append(
                f"       {lid} {link.kind} {link.source.id} {link.rel.value} {link.target.id}"
            )
    return "\n".join(lines)


def render_text(result: DocumentResult, timeline: bool = True) -> str:
    """줄기를 위치 순서대로, 가지는 매달린 위치와 함께 출력한다. `*`는 비결정 구간."""
    status = "CONSISTENT" if result.consistent else f"INCONSISTENT ({len(result.mlic)} cycles)"
    lines = [f"== {result.doc_id}: {status} =="]
    lines.extend(f"  warning: {w}" for w in result.warnings)
    if not result.consistent:
        lines.append(render_mlic(result))
        return "\n".join(lines)
    tb = result.trunk_branch
    if tb is None or not timeline:
        return "\n".join(lines)

    lines.append(f"trunk (length {tb.trunk_length}):")
    for t in tb.trunk:
        marked = {pos for start, end in t.table.sections for pos in range(start, end + 1)}
        for pos in range(1, t.timeline.length + 1):
            flag = "*" if pos in marked else " "
            points = " ".join(str(p) for p in t.timeline.points_at(pos))
            lines.append(f"  {flag}[{t.offset + pos}] {points}")
    for t in tb.branches:
        anchor = tb.anchor_of(t.subgraph_id)
        if anchor is not None:
            where = "trunk" if anchor.source_on_trunk else f"branch {anchor.source_subgraph}"
            lines.append(
                f"branch {t.subgraph_id} <- {anchor.source.id} @ {where}[{anchor.source_pos}]"
                f" ({anchor.rel.value}, {anchor.link_id}):"
            )
        else:
            lines.append(f"branch {t.subgraph_id} (unanchored):")
        marked = {pos for start, end in t.table.sections for pos in range(start, end + 1)}
        for pos in range(1, t.timeline.length + 1):
            flag = "*" if pos in marked else " "
            points = " ".join(str(p) for p in t.timeline.points_at(pos))
            lines.append(f"    {flag}[{pos}] {points}")
    for bp in result.breaking:
        lines.append(
            f"breaking pair: {bp.node_a.id} / {bp.node_b.id}"
            f" ({bp.char_distance} chars, ~{bp.word_distance} words)"
        )
    return "\n".join(lines)


def render_failure(failure: DocumentFailure) -> str:
    return f"== {failure.source}: ERROR {failure.error_type}: {failure.message} =="


# ── 코퍼스 통계 ─────────────────────────────────────────────


def _summary(s: Summary) -> dict[str, float]:
    return {"min": s.min, "avg": s.avg, "max": s.max}


def stats_to_dict(
    stats: CorpusStats, failures: int = 0, include_alinks: bool = True,
) -> dict[str, Any]:
    """`inconsistent`는 include_alinks에 따른 처리 결과다."""
    return {
        "documents": stats.documents,
        "failures": failures,
        "alinks_included": include_alinks,
        "inconsistent": stats.inconsistent,
        "inconsistent_tlinks_only": stats.inconsistent_tlinks_only,
        "main_length": _summary(stats.main_length),
        "branches": _summary(stats.branches),
        "indeterminate_sections": _summary(stats.indeterminate_sections),
        "multi_main_documents": stats.multi_main,
        "total_indeterminate_sections": stats.total_sections,
        "total_branch_points": stats.total_branch_points,
        "total_mlic": stats.total_mlic,
        "rows": [
            {
                "doc_id": r.doc_id,
                "consistent": r.consistent,
                "consistent_tlinks_only": r.consistent_tlinks_only,
                "main_length": r.main_length,
                "main_timelines": r.main_timelines,
                "branches": r.branches,
                "indeterminate_sections": r.indeterminate_sections,
                "mlic_size": r.mlic_size,
            }
            for r in stats.rows
        ],
    }


def render_stats(stats: CorpusStats, failures: int = 0, include_alinks: bool = True) -> str:
    def fmt(value: float) -> str:
        return f"{value:.2f}" if isinstance(value, float) else str(value)

    lines = [
        f"{'documents':<34}{stats.documents:>8}",
        f"{'failed':<34}{failures:>8}",
    ]
    if include_alinks:
        lines.append(f"{'inconsistent (TLINKs & ALINKs)':<34}{stats.inconsistent:>8}")
    # --tlinks-only이면 두 값이 같은 처리 결과
    lines += [
        f"{'inconsistent (TLINKs only)':<34}{stats.inconsistent_tlinks_only:>8}",
        "",
        f"{'':<34}{'min':>8}{'avg':>8}{'max':>8}",
    ]
    for label, s in (
        ("main timeline length", stats.main_length),
        ("subordinated branches", stats.branches),
        ("indeterminate sections", stats.indeterminate_sections),
    ):
        lines.append(f"{label:<34}{fmt(s.min):>8}{fmt(s.avg):>8}{fmt(s.max):>8}")
    lines += [
        "",
        f"{'documents with >1 main timeline':<34}{stats.multi_main:>8}",
        f"{'total indeterminate sections':<34}{stats.total_sections:>8}",
        f"{'time-points on branches':<34}{stats.total_branch_points:>8}",
        f"{'inconsistent cycles (MLIC)':<34}{stats.total_mlic:>8}",
    ]
    return "\n".join(lines)
