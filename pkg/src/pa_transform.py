"""2단계 변환 - TimeML 부분 그래프를 점 대수(PA) 제약 그래프로 바꾼다.

각 구간 I를 시작점 I⁻와 끝점 I⁺로 치환하고, TLINK/ALINK 하나를 `<`, `=`
기본 제약의 논리곱으로 번역한다. ALINK는 대응하는 TLINK와 같은 제약을 갖는다.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, IntEnum

from src.timeml_model import AlinkRel, NodeId, TimeMLGraph, TimexClass, TlinkRel


class PointEnd(IntEnum):
    START = 0
    END = 1

    @property
    def symbol(self) -> str:
        return "⁻" if self is PointEnd.START else "⁺"

    @property
    def label(self) -> str:
        return "start" if self is PointEnd.START else "end"


@dataclass(frozen=True, order=True)
class TimePoint:
    node: NodeId
    end: PointEnd

    def __str__(self) -> str:
        return f"{self.node.id}{self.end.symbol}"


class PARel(str, Enum):
    LESS = "<"
    EQUAL = "="


@dataclass(frozen=True)
class PAConstraint:
    lhs: TimePoint
    rhs: TimePoint
    rel: PARel
    # 암묵 제약(I⁻ < I⁺, TIME의 T⁻ = T⁺)은 출처 링크가 없다
    provenance: str | None = None

    def __str__(self) -> str:
        return f"{self.lhs} {self.rel.value} {self.rhs}"


@dataclass(frozen=True)
class PAGraph:
    points: frozenset[TimePoint]
    constraints: tuple[PAConstraint, ...]

    @property
    def less(self) -> list[PAConstraint]:
        return [c for c in self.constraints if c.rel is PARel.LESS]

    @property
    def equal(self) -> list[PAConstraint]:
        return [c for c in self.constraints if c.rel is PARel.EQUAL]


# A, B의 시작(-)/끝(+) 점 사이 제약. 암묵 제약 I⁻ < I⁺는 생략한다.
_TLINK_TABLE: dict[TlinkRel, tuple[tuple[str, str, str], ...]] = {
    TlinkRel.BEFORE: (("A+", "<", "B-"),),
    TlinkRel.AFTER: (("B+", "<", "A-"),),
    TlinkRel.IBEFORE: (("A+", "=", "B-"),),
    TlinkRel.IAFTER: (("B+", "=", "A-"),),
    TlinkRel.BEGINS: (("A-", "=", "B-"), ("A+", "<", "B+")),
    TlinkRel.BEGUN_BY: (("A-", "=", "B-"), ("B+", "<", "A+")),
    TlinkRel.ENDS: (("B-", "<", "A-"), ("A+", "=", "B+")),
    TlinkRel.ENDED_BY: (("A-", "<", "B-"), ("A+", "=", "B+")),
    TlinkRel.INCLUDES: (("A-", "<", "B-"), ("B+", "<", "A+")),
    TlinkRel.IS_INCLUDED: (("B-", "<", "A-"), ("A+", "<", "B+")),
    TlinkRel.SIMULTANEOUS: (("A-", "=", "B-"), ("A+", "=", "B+")),
    TlinkRel.IDENTITY: (("A-", "=", "B-"), ("A+", "=", "B+")),
    # during / during_inv는 표 그대로 양끝 등호 (simultaneous와 점 수준에서 동일)
    TlinkRel.DURING: (("B-", "=", "A-"), ("A+", "=", "B+")),
    TlinkRel.DURING_INV: (("A-", "=", "B-"), ("B+", "=", "A+")),
}

ALINK_AS_TLINK: dict[AlinkRel, TlinkRel] = {
    AlinkRel.INITIATES: TlinkRel.BEGINS,
    AlinkRel.CULMINATES: TlinkRel.ENDS,
    AlinkRel.TERMINATES: TlinkRel.ENDS,
    AlinkRel.CONTINUES: TlinkRel.IS_INCLUDED,
    AlinkRel.REINITIATES: TlinkRel.IS_INCLUDED,
}


def _point(token: str, a: NodeId, b: NodeId) -> TimePoint:
    node = a if token[0] == "A" else b
    return TimePoint(node, PointEnd.START if token[1] == "-" else PointEnd.END)


def rel_constraints(
    rel: TlinkRel | AlinkRel,
    a: NodeId,
    b: NodeId,
    provenance: str | None = None,
) -> list[PAConstraint]:
    """A rel B를 PA 기본 제약 목록으로 번역한다."""
    if isinstance(rel, AlinkRel):
        rel = ALINK_AS_TLINK[rel]
    return [
        PAConstraint(_point(lhs, a, b), _point(rhs, a, b), PARel(op), provenance)
        for lhs, op, rhs in _TLINK_TABLE[rel]
    ]


def transform(subgraph: TimeMLGraph) -> PAGraph:
    """TimeML 부분 그래프를 PA 제약 그래프로 변환한다.

    - 모든 구간에 I⁻ < I⁺ 추가 (TIME 타입 TIMEX는 한 시점이므로 T⁻ = T⁺)
    - 링크마다 rel_constraints 추가 (SLINK는 시간 제약이 없어 무시)
    - `=` 제약은 순서 없는 쌍마다 한 번만 저장한다
    """
    points: set[TimePoint] = set()
    constraints: list[PAConstraint] = []
    seen_equal: set[frozenset[TimePoint]] = set()

    def add(constraint: PAConstraint) -> None:
        if constraint.rel is PARel.EQUAL:
            key = frozenset((constraint.lhs, constraint.rhs))
            if len(key) == 1 or key in seen_equal:
                return
            seen_equal.add(key)
        constraints.append(constraint)

    for entity in sorted(subgraph.entities, key=lambda e: e.node):
        start = TimePoint(entity.node, PointEnd.START)
        end = TimePoint(entity.node, PointEnd.END)
        points.update((start, end))
        rel = PARel.EQUAL if entity.timex_class is TimexClass.TIME else PARel.LESS
        add(PAConstraint(start, end, rel))

    for link in sorted(subgraph.links, key=lambda lk: lk.link_id):
        if link.kind == "SLINK":
            continue
        for constraint in rel_constraints(link.rel, link.source, link.target, link.link_id):
            add(constraint)

    return PAGraph(points=frozenset(points), constraints=tuple(constraints))
