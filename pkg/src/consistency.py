"""3단계 일관성 검사 - 복합 시점 병합, 세 종류의 비일관 사이클 탐지, MLIC 생성.

등호로 연결된 시점을 복합 시점(compound point)으로 합친 뒤
  - Type I  : 같은 복합 시점 안의 `<` 제약
  - Type II : 두 복합 시점 사이에 양방향 `<` (순서쌍 테이블 T로 탐지)
  - Type III: 복합 시점 그래프의 방향 사이클 (DFS back edge). Type II의 역방향
              간선도 그래프에 포함되며, 길이 2 사이클만 Type II와 중복이라 뺀다
를 모두 찾는다. 찾은 사이클은 출처 TimeML 링크 id와 함께 보고되며, 사이클이
하나도 없으면 `<` 간선만 갖는 복합 DAG를 돌려준다.

MLIC는 "back edge를 제거하며 DFS를 이어가는" 절차에 대해 최대이며, 모든 단순
사이클의 집합은 아니다.
"""

from __future__ import annotations

import logging
from collections import defaultdict, deque
from collections.abc import Iterable
from dataclasses import dataclass, field
from enum import Enum
from typing import Union

from src.pa_transform import PAConstraint, PAGraph, PARel, PointEnd, TimePoint
from src.timeml_model import NodeId

logger = logging.getLogger(__name__)


class CycleType(str, Enum):
    TYPE_I = "type_i"
    TYPE_II = "type_ii"
    TYPE_III = "type_iii"


@dataclass(frozen=True, order=True)
class CompoundPoint:
    index: int
    members: tuple[TimePoint, ...]

    def __str__(self) -> str:
        return "{" + ",".join(str(p) for p in self.members) + "}"


@dataclass(frozen=True)
class CompoundDAG:
    compounds: tuple[CompoundPoint, ...]
    edges: frozenset[tuple[int, int]]
    point_to_compound: dict[TimePoint, int] = field(default_factory=dict, compare=False)
    # 간선별 출처 링크 id (평행 간선은 합집합)
    provenance: dict[tuple[int, int], frozenset[str]] = field(default_factory=dict, compare=False)

    def __len__(self) -> int:
        return len(self.compounds)

    def compound(self, index: int) -> CompoundPoint:
        return self.compounds[index - 1]

    def of(self, point: TimePoint) -> CompoundPoint:
        return self.compound(self.point_to_compound[point])

    def successors(self, index: int) -> list[int]:
        return self._adjacency[0].get(index, [])

    def predecessors(self, index: int) -> list[int]:
        return self._adjacency[1].get(index, [])

    @property
    def _adjacency(self) -> tuple[dict[int, list[int]], dict[int, list[int]]]:
        cached = self.__dict__.get("_adj")
        if cached is None:
            succ: dict[int, list[int]] = defaultdict(list)
            pred: dict[int, list[int]] = defaultdict(list)
            for u, v in sorted(self.edges):
                succ[u].append(v)
                pred[v].append(u)
            cached = (dict(succ), dict(pred))
            object.__setattr__(self, "_adj", cached)
        return cached

    @classmethod
    def from_edges(cls, size: int, edges: Iterable[tuple[int, int]]) -> CompoundDAG:
        """시점 정보 없이 인덱스 1..size와 간선만으로 DAG를 만든다 (오라클/테스트용).

        각 복합 시점은 "c<i>" 노드의 시작점 하나를 구성원으로 갖는다.
        """
        compounds = tuple(
            CompoundPoint(i, (TimePoint(NodeId(f"c{i:04d}"), PointEnd.START),))
            for i in range(1, size + 1)
        )
        mapping = {c.members[0]: c.index for c in compounds}
        return cls(compounds=compounds, edges=frozenset(edges), point_to_compound=mapping)


@dataclass(frozen=True)
class InconsistentCycle:
    cycle_type: CycleType
    points: tuple[TimePoint, ...]
    link_ids: frozenset[str]
    # 이 제약만 다시 풀어도 비일관이 되는 최소 근거 (등호 경로 포함)
    constraints: tuple[PAConstraint, ...] = ()


@dataclass(frozen=True)
class InconsistencyReport:
    cycles: tuple[InconsistentCycle, ...] = ()

    def __bool__(self) -> bool:
        return bool(self.cycles)

    def __len__(self) -> int:
        return len(self.cycles)

    @property
    def link_ids(self) -> frozenset[str]:
        return frozenset().union(*(c.link_ids for c in self.cycles))

    def count(self, cycle_type: CycleType) -> int:
        return sum(1 for c in self.cycles if c.cycle_type is cycle_type)


@dataclass(frozen=True)
class Consistent:
    dag: CompoundDAG

    consistent = True


@dataclass(frozen=True)
class Inconsistent:
    report: InconsistencyReport

    consistent = False


CheckResult = Union[Consistent, Inconsistent]


# ── 복합 시점 병합 ───────────────────────────────────────────


@dataclass
class _EqualityIndex:
    compounds: list[CompoundPoint]
    mapping: dict[TimePoint, int]
    adjacency: dict[TimePoint, list[tuple[TimePoint, PAConstraint]]]

    def path(self, a: TimePoint, b: TimePoint) -> tuple[list[TimePoint], list[PAConstraint]]:
        """같은 복합 시점 안의 a에서 b까지 등호 경로 (BFS, 최단)."""
        if a == b:
            return [a], []
        parent: dict[TimePoint, tuple[TimePoint, PAConstraint]] = {}
        queue = deque([a])
        seen = {a}
        while queue:
            node = queue.popleft()
            if node == b:
                break
            for neighbor, constraint in self.adjacency.get(node, []):
                if neighbor not in seen:
                    seen.add(neighbor)
                    parent[neighbor] = (node, constraint)
                    queue.append(neighbor)
        points = [b]
        constraints: list[PAConstraint] = []
        node = b
        while node != a:
            node, constraint = parent[node]
            points.append(node)
            constraints.append(constraint)
        points.reverse()
        constraints.reverse()
        return points, constraints


def _equality_index(pa: PAGraph) -> _EqualityIndex:
    adjacency: dict[TimePoint, list[tuple[TimePoint, PAConstraint]]] = defaultdict(list)
    for c in pa.equal:
        adjacency[c.lhs].append((c.rhs, c))
        adjacency[c.rhs].append((c.lhs, c))
    for neighbors in adjacency.values():
        neighbors.sort(key=lambda item: item[0])

    mapping: dict[TimePoint, int] = {}
    compounds: list[CompoundPoint] = []
    # 정렬된 순서로 시작하므로 인덱스는 최소 구성원 순서를 따른다
    for start in sorted(pa.points):
        if start in mapping:
            continue
        index = len(compounds) + 1
        members = []
        stack = [start]
        mapping[start] = index
        while stack:
            point = stack.pop()
            members.append(point)
            for neighbor, _ in adjacency.get(point, []):
                if neighbor not in mapping:
                    mapping[neighbor] = index
                    stack.append(neighbor)
        compounds.append(CompoundPoint(index, tuple(sorted(members))))
    return _EqualityIndex(compounds, mapping, dict(adjacency))


def merge_equalities(pa: PAGraph) -> tuple[list[CompoundPoint], dict[TimePoint, int]]:
    """등호 제약으로 연결된 시점들을 복합 시점으로 병합한다."""
    index = _equality_index(pa)
    return index.compounds, index.mapping


# ── 검사 ────────────────────────────────────────────────────


def _provenance(constraints: list[PAConstraint]) -> frozenset[str]:
    return frozenset(c.provenance for c in constraints if c.provenance is not None)


def _dedupe(constraints: list[PAConstraint]) -> tuple[PAConstraint, ...]:
    return tuple(dict.fromkeys(constraints))


def _type_i(eq: _EqualityIndex, constraint: PAConstraint) -> InconsistentCycle:
    compound = eq.compounds[eq.mapping[constraint.lhs] - 1]
    _, path = eq.path(constraint.rhs, constraint.lhs)
    constraints = [constraint, *path]
    return InconsistentCycle(
        cycle_type=CycleType.TYPE_I,
        points=compound.members,
        link_ids=_provenance(constraints),
        constraints=_dedupe(constraints),
    )


def _type_ii(
    eq: _EqualityIndex,
    forward: list[PAConstraint],
    backward: list[PAConstraint],
) -> InconsistentCycle:
    i = eq.mapping[forward[0].lhs]
    j = eq.mapping[forward[0].rhs]
    first, second = forward[0], backward[0]
    _, inside_j = eq.path(first.rhs, second.lhs)
    _, inside_i = eq.path(second.rhs, first.lhs)
    constraints = [*forward, *backward, *inside_j, *inside_i]
    points = eq.compounds[i - 1].members + eq.compounds[j - 1].members
    return InconsistentCycle(
        cycle_type=CycleType.TYPE_II,
        points=points,
        link_ids=_provenance(constraints),
        constraints=_dedupe(constraints),
    )


def _type_iii(
    eq: _EqualityIndex,
    cycle: list[int],
    edge_constraints: dict[tuple[int, int], list[PAConstraint]],
) -> InconsistentCycle:
    """cycle = [v, ..., u] (u -> v가 닫는 간선)."""
    hops = [edge_constraints[(a, b)] for a, b in zip(cycle, cycle[1:] + cycle[:1])]
    chosen = [parallel[0] for parallel in hops]

    points: list[TimePoint] = []
    constraints: list[PAConstraint] = []
    for k, outgoing in enumerate(chosen):
        incoming = chosen[k - 1]
        inside_points, inside = eq.path(incoming.rhs, outgoing.lhs)
        points.extend(inside_points)
        constraints.extend(inside)
    for parallel in hops:
        constraints.extend(parallel)

    return InconsistentCycle(
        cycle_type=CycleType.TYPE_III,
        points=tuple(points),
        link_ids=_provenance(constraints),
        constraints=_dedupe(constraints),
    )


def _dfs_cycles(size: int, successors: dict[int, list[int]]) -> list[list[int]]:
    """색칠 DFS. back edge를 만나면 부모를 거슬러 사이클을 복원하고 그 간선만 건너뛴다."""
    white, gray, black = 0, 1, 2
    color = [white] * (size + 1)
    parent: dict[int, int] = {}
    cycles: list[list[int]] = []

    for root in range(1, size + 1):
        if color[root] != white:
            continue
        color[root] = gray
        stack = [(root, iter(successors.get(root, [])))]
        while stack:
            node, children = stack[-1]
            advanced = False
            for child in children:
                if color[child] == white:
                    color[child] = gray
                    parent[child] = node
                    stack.append((child, iter(successors.get(child, []))))
                    advanced = True
                    break
                if color[child] == gray:
                    path = [node]
                    while path[-1] != child:
                        path.append(parent[path[-1]])
                    path.reverse()
                    cycles.append(path)
            if not advanced:
                color[node] = black
                stack.pop()
    return cycles


def check(pa: PAGraph) -> CheckResult:
    """PA 제약 그래프의 일관성을 검사한다.

    Returns:
        Consistent(dag) 또는 Inconsistent(report). 비일관은 예외가 아니라 결과다.
    """
    eq = _equality_index(pa)
    cycles: list[InconsistentCycle] = []

    edge_constraints: dict[tuple[int, int], list[PAConstraint]] = {}
    conflicts: dict[tuple[int, int], list[PAConstraint]] = {}
    first_direction: dict[frozenset[int], tuple[int, int]] = {}

    for c in pa.constraints:
        if c.rel is not PARel.LESS:
            continue
        i, j = eq.mapping[c.lhs], eq.mapping[c.rhs]
        if i == j:
            cycles.append(_type_i(eq, c))
            continue
        forward = first_direction.setdefault(frozenset((i, j)), (i, j))
        if forward != (i, j):
            # T[j][i]가 이미 참: Type II로 기록하되 간선은 DFS 그래프에도 남긴다
            conflicts.setdefault(forward, []).append(c)
        edge_constraints.setdefault((i, j), []).append(c)

    for forward_key, backward in sorted(conflicts.items()):
        cycles.append(_type_ii(eq, edge_constraints[forward_key], backward))

    successors: dict[int, list[int]] = defaultdict(list)
    for u, v in sorted(edge_constraints):
        successors[u].append(v)
    for cycle in _dfs_cycles(len(eq.compounds), successors):
        if len(cycle) == 2:
            # 두 복합 시점 사이의 왕복은 위에서 Type II로 보고됨
            continue
        cycles.append(_type_iii(eq, cycle, edge_constraints))

    if cycles:
        report = InconsistencyReport(tuple(cycles))
        logger.debug(
            "비일관: type_i=%d type_ii=%d type_iii=%d",
            report.count(CycleType.TYPE_I),
            report.count(CycleType.TYPE_II),
            report.count(CycleType.TYPE_III),
        )
        return Inconsistent(report)

    dag = CompoundDAG(
        compounds=tuple(eq.compounds),
        edges=frozenset(edge_constraints),
        point_to_compound=eq.mapping,
        provenance={edge: _provenance(cs) for edge, cs in edge_constraints.items()},
    )
    return Consistent(dag)
