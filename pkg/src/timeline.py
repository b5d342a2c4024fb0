"""4-5단계 - Greedy Kahn 최소 정규형 타임라인 생성과 비결정성(indeterminacy) 탐지."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum

from src.consistency import CompoundDAG, CompoundPoint
from src.pa_transform import PointEnd, TimePoint
from src.timeml_model import NodeId, TlexError

logger = logging.getLogger(__name__)

# 기본 구간 표시 규칙. 문서 JSON의 section_rule_version으로 기록된다.
SECTION_RULE_VERSION = "1"


class CycleDetected(TlexError):
    """일관성 검사를 건너뛴 그래프가 들어왔을 때 (남은 정점 중 진입 차수 0이 없음)."""

    def __init__(self, remaining: list[int]):
        super().__init__(f"DAG가 아닙니다: 복합 시점 {remaining[:10]} 에서 진행 불가")
        self.remaining = remaining


class IndeterminacyMode(str, Enum):
    SECTIONS = "sections"
    FULL = "full"
    NONE = "none"


class ReachabilityMode(str, Enum):
    DFS = "dfs"
    CLOSURE = "closure"


@dataclass(frozen=True)
class NormalFormTimeline:
    assignment: dict[int, int]
    point_positions: dict[TimePoint, int] = field(default_factory=dict, compare=False)

    @classmethod
    def from_assignment(cls, dag: CompoundDAG, assignment: dict[int, int]) -> NormalFormTimeline:
        positions = {
            point: assignment[compound.index]
            for compound in dag.compounds
            for point in compound.members
        }
        return cls(assignment=dict(assignment), point_positions=positions)

    @property
    def length(self) -> int:
        return max(self.assignment.values(), default=0)

    def position(self, point: TimePoint) -> int:
        return self.point_positions[point]

    def interval(self, node: NodeId) -> tuple[int, int]:
        return (
            self.point_positions[TimePoint(node, PointEnd.START)],
            self.point_positions[TimePoint(node, PointEnd.END)],
        )

    def layers(self) -> list[list[int]]:
        """위치 1..length 별 복합 시점 인덱스 목록."""
        layers: list[list[int]] = [[] for _ in range(self.length)]
        for index, pos in sorted(self.assignment.items()):
            layers[pos - 1].append(index)
        return layers

    def points_at(self, pos: int) -> list[TimePoint]:
        return sorted(p for p, at in self.point_positions.items() if at == pos)


@dataclass(frozen=True)
class IndeterminacyTable:
    # (u, v), u < v 인 복합 시점 인덱스 쌍
    unordered_pairs: frozenset[tuple[int, int]] = frozenset()
    sections: tuple[tuple[int, int], ...] = ()
    pair_count: int = 0
    # FULL 모드에서만 모든 쌍을 담는다. 그 외에는 구간 판정에 쓴 인접 쌍만 담긴다.
    complete: bool = False
    rule_version: str = SECTION_RULE_VERSION

    def is_unordered(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self.unordered_pairs


def greedy_kahn(dag: CompoundDAG) -> NormalFormTimeline:
    """Kahn 위상 정렬의 탐욕 변형. 단계 t에서 진입 차수 0인 복합 시점을 전부 위치 t에 둔다.

    결과는 유일한 최소 정규형 타임라인이다 (모든 시점이 가능한 가장 이른 위치).
    """
    indegree = {c.index: 0 for c in dag.compounds}
    for _, v in dag.edges:
        indegree[v] += 1

    assignment: dict[int, int] = {}
    current = sorted(i for i, d in indegree.items() if d == 0)
    step = 1
    while current:
        following: list[int] = []
        for u in current:
            assignment[u] = step
            for v in dag.successors(u):
                indegree[v] -= 1
                if indegree[v] == 0:
                    following.append(v)
        current = sorted(following)
        step += 1

    if len(assignment) < len(dag):
        raise CycleDetected(sorted(set(indegree) - set(assignment)))
    return NormalFormTimeline.from_assignment(dag, assignment)


class Reachability:
    """복합 DAG 위의 도달 가능성 질의.

    - DFS: 질의마다 목표를 찾는 즉시 멈추는 DFS (O(n+m) / 질의)
    - CLOSURE: 파이썬 정수 비트셋으로 전이 폐포를 한 번 계산해 둔다
    """

    def __init__(self, dag: CompoundDAG, mode: ReachabilityMode | str = ReachabilityMode.DFS):
        self.dag = dag
        self.mode = ReachabilityMode(mode)
        self._closure: dict[int, int] | None = None

    def reaches(self, u: int, v: int) -> bool:
        if u == v:
            return True
        if self.mode is ReachabilityMode.CLOSURE:
            return bool(self.closure[u] >> v & 1)
        return self._dfs(u, v)

    def unordered(self, u: int, v: int) -> bool:
        return not self.reaches(u, v) and not self.reaches(v, u)

    def _dfs(self, source: int, target: int) -> bool:
        seen = {source}
        stack = [source]
        while stack:
            node = stack.pop()
            for nxt in self.dag.successors(node):
                if nxt == target:
                    return True
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return False

    @property
    def closure(self) -> dict[int, int]:
        """index -> 도달 가능한 인덱스의 비트셋 (자기 자신 제외)."""
        if self._closure is None:
            order = greedy_kahn(self.dag).assignment
            closure: dict[int, int] = {}
            for u in sorted(order, key=order.__getitem__, reverse=True):
                bits = 0
                for v in self.dag.successors(u):
                    bits |= (1 << v) | closure[v]
                closure[u] = bits
            self._closure = closure
        return self._closure

    def count_unordered(self) -> int:
        """서로 도달 불가능한 쌍의 개수 (폐포의 popcount로 계산)."""
        closure = self.closure
        reached_by: dict[int, int] = {c.index: 0 for c in self.dag.compounds}
        for u, bits in closure.items():
            for v in _bits(bits):
                reached_by[v] |= 1 << u
        n = len(self.dag)
        total = 0
        for u in closure:
            comparable = (closure[u] | reached_by[u]).bit_count()
            total += n - 1 - comparable
        return total // 2


def _bits(value: int):
    while value:
        low = value & -value
        yield low.bit_length() - 1
        value ^= low


def is_indeterminate(
    dag: CompoundDAG,
    u: CompoundPoint,
    v: CompoundPoint,
    reachability: Reachability | None = None,
) -> bool:
    """u, v 사이에 어느 방향으로도 경로가 없으면 True (다른 일관 타임라인이 존재)."""
    if u.index == v.index:
        raise ValueError("서로 다른 복합 시점이어야 합니다")
    reachability = reachability or Reachability(dag)
    return reachability.unordered(u.index, v.index)


def _mark_adjacent_unordered(
    layers: list[list[int]], reachability: Reachability
) -> tuple[list[bool], set[tuple[int, int]]]:
    """규칙 "1". 반환: 위치별 표시 (1-based, 양 끝 여유 칸 포함), 판정에 쓴 쌍."""
    marked = [False] * (len(layers) + 2)
    local_pairs: set[tuple[int, int]] = set()
    for pos, layer in enumerate(layers, start=1):
        if len(layer) >= 2:
            marked[pos] = True
            local_pairs.update((a, b) for k, a in enumerate(layer) for b in layer[k + 1:])
        if pos < len(layers):
            for a in layer:
                for b in layers[pos]:
                    if not reachability.reaches(a, b):
                        marked[pos] = marked[pos + 1] = True
                        local_pairs.add((min(a, b), max(a, b)))
    return marked, local_pairs


SECTION_RULES = {SECTION_RULE_VERSION: _mark_adjacent_unordered}


def indeterminacy_table(
    dag: CompoundDAG,
    timeline: NormalFormTimeline,
    mode: IndeterminacyMode | str = IndeterminacyMode.SECTIONS,
    reachability: Reachability | None = None,
    rule_version: str = SECTION_RULE_VERSION,
) -> IndeterminacyTable:
    """최소 타임라인의 비결정 구간을 계산한다.

    구간 규칙은 rule_version으로 SECTION_RULES에서 고른다. 규칙 "1": 위치 p에
    복합 시점이 둘 이상 있거나 (같은 위치의 서로 다른 복합 시점은 항상 서로
    도달 불가), p의 어떤 시점이 p+1의 어떤 시점과 순서가 없으면 p(와 p+1)를
    표시한다. 구간은 표시된 연속 위치의 최대 구간이다.
    """
    mode = IndeterminacyMode(mode)
    try:
        mark = SECTION_RULES[rule_version]
    except KeyError:
        raise ValueError(f"알 수 없는 구간 규칙 버전: {rule_version!r}") from None
    if mode is IndeterminacyMode.NONE:
        return IndeterminacyTable(rule_version=rule_version)

    reachability = reachability or Reachability(dag)
    layers = timeline.layers()
    marked, local_pairs = mark(layers, reachability)

    sections: list[tuple[int, int]] = []
    start: int | None = None
    for pos in range(1, len(layers) + 2):
        if pos <= len(layers) and marked[pos]:
            if start is None:
                start = pos
        elif start is not None:
            sections.append((start, pos - 1))
            start = None

    if mode is IndeterminacyMode.FULL:
        indices = [c.index for c in dag.compounds]
        pairs = frozenset(
            (a, b)
            for k, a in enumerate(indices)
            for b in indices[k + 1:]
            if reachability.unordered(a, b)
        )
        return IndeterminacyTable(
            pairs, tuple(sections), len(pairs), complete=True, rule_version=rule_version
        )

    counter = reachability
    if counter.mode is not ReachabilityMode.CLOSURE:
        counter = Reachability(dag, ReachabilityMode.CLOSURE)
    pair_count = counter.count_unordered()
    logger.debug("비결정 구간 %d개, 순서 없는 쌍 %d개", len(sections), pair_count)
    return IndeterminacyTable(
        frozenset(local_pairs), tuple(sections), pair_count, rule_version=rule_version
    )
