"""전수 탐색 기반 참조 구현과 무작위 그래프 생성기.

파이프라인에서는 쓰지 않는다. 속성 기반 테스트와 `tlex gen` 픽스처 생성에서
일관성 검사, Greedy Kahn, 비결정성 탐지를 독립적으로 검증하는 데 사용한다.
"""

from __future__ import annotations

import logging
import random
from collections import defaultdict, deque
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations

from src.config import settings
from src.consistency import CompoundDAG
from src.pa_transform import PAConstraint, PAGraph, PARel, PointEnd, TimePoint, rel_constraints
from src.timeline import NormalFormTimeline
from src.timeml_model import (
    AlinkRel,
    NodeId,
    NodeKind,
    SlinkRel,
    TemporalEntity,
    TimeMLGraph,
    TimeMLLink,
    TimexClass,
    TlexError,
    TlinkRel,
    build_graph,
)

logger = logging.getLogger(__name__)


class TooLarge(TlexError):
    def __init__(self, size: int, limit: int, what: str = "points"):
        super().__init__(f"오라클 한도 초과: {what} {size} > {limit}")
        self.size = size
        self.limit = limit


@dataclass(frozen=True)
class OracleBudget:
    """전수 탐색 한도. 기본값은 TLEX_ORACLE_MAX_POINTS / TLEX_ORACLE_MAX_ENUMERATION."""

    max_points: int = field(default_factory=lambda: settings.oracle_max_points)
    max_enumeration: int = field(default_factory=lambda: settings.oracle_max_enumeration)

    def __post_init__(self) -> None:
        if self.max_points <= 0 or self.max_enumeration <= 0:
            raise ValueError("OracleBudget 값은 양수여야 합니다")


class Fault(str, Enum):
    NONE = "none"
    INJECT_CYCLE = "inject_cycle"


# ── 만족 여부 / 일관성 ──────────────────────────────────────


def satisfies(constraints: Iterable[PAConstraint], values: Mapping[TimePoint, int]) -> bool:
    for c in constraints:
        lhs, rhs = values[c.lhs], values[c.rhs]
        if c.rel is PARel.LESS and not lhs < rhs:
            return False
        if c.rel is PARel.EQUAL and lhs != rhs:
            return False
    return True


def brute_consistent(pa: PAGraph, budget: OracleBudget | None = None) -> bool:
    """시점 → {1..|points|} 정수 할당 중 모든 제약을 만족하는 것이 있는지 전수 탐색한다.

    연결 요소별로 나눠 탐색하고, 할당할 때마다 이웃의 상하한으로 가지치기한다.
    """
    budget = budget or OracleBudget()
    if len(pa.points) > budget.max_points:
        raise TooLarge(len(pa.points), budget.max_points)

    # x 기준 관계: "<" 는 x < y, ">" 는 x > y
    neighbours: dict[TimePoint, list[tuple[TimePoint, str]]] = defaultdict(list)
    for c in pa.constraints:
        if c.lhs == c.rhs:
            if c.rel is PARel.LESS:
                return False
            continue
        if c.rel is PARel.LESS:
            neighbours[c.lhs].append((c.rhs, "<"))
            neighbours[c.rhs].append((c.lhs, ">"))
        else:
            neighbours[c.lhs].append((c.rhs, "="))
            neighbours[c.rhs].append((c.lhs, "="))

    seen: set[TimePoint] = set()
    for start in sorted(pa.points):
        if start in seen:
            continue
        order = [start]
        seen.add(start)
        queue = deque([start])
        while queue:
            point = queue.popleft()
            for other, _ in sorted(neighbours[point]):
                if other not in seen:
                    seen.add(other)
                    order.append(other)
                    queue.append(other)
        if not _solve(order, neighbours):
            return False
    return True


def _solve(
    order: list[TimePoint],
    neighbours: Mapping[TimePoint, list[tuple[TimePoint, str]]],
) -> bool:
    n = len(order)
    value: dict[TimePoint, int] = {}

    def bounds(x: TimePoint) -> tuple[int, int]:
        lo, hi = 1, n
        for y, rel in neighbours.get(x, []):
            v = value.get(y)
            if v is None:
                continue
            if rel == "<":
                hi = min(hi, v - 1)
            elif rel == ">":
                lo = max(lo, v + 1)
            else:
                lo, hi = max(lo, v), min(hi, v)
        return lo, hi

    def feasible(x: TimePoint) -> bool:
        for y, _ in neighbours.get(x, []):
            if y not in value:
                lo, hi = bounds(y)
                if lo > hi:
                    return False
        return True

    def search(k: int) -> bool:
        if k == n:
            return True
        x = order[k]
        lo, hi = bounds(x)
        for v in range(lo, hi + 1):
            value[x] = v
            if feasible(x) and search(k + 1):
                return True
        value.pop(x, None)
        return False

    return search(0)


# ── 타임라인 열거 ────────────────────────────────────────────


def iter_timelines(dag: CompoundDAG) -> Iterator[dict[int, int]]:
    """DAG와 모순되지 않는 모든 약순서(weak ordering)를 위치 할당으로 생성한다.

    각 단계에서 현재 진입 차수 0인 복합 시점의 공집합이 아닌 부분집합을 하나 골라
    다음 위치에 둔다. 서로 다른 선택은 서로 다른 타임라인을 만든다.
    """
    indegree = {c.index: 0 for c in dag.compounds}
    for _, v in dag.edges:
        indegree[v] += 1
    assignment: dict[int, int] = {}

    def level(step: int) -> Iterator[dict[int, int]]:
        if len(assignment) == len(indegree):
            yield dict(assignment)
            return
        sources = sorted(i for i, d in indegree.items() if d == 0 and i not in assignment)
        for size in range(1, len(sources) + 1):
            for chosen in combinations(sources, size):
                for u in chosen:
                    assignment[u] = step
                    for v in dag.successors(u):
                        indegree[v] -= 1
                yield from level(step + 1)
                for u in chosen:
                    del assignment[u]
                    for v in dag.successors(u):
                        indegree[v] += 1

    yield from level(1)


def enumerate_timelines(
    dag: CompoundDAG,
    max_points: int | None = None,
    max_enumeration: int | None = None,
) -> list[NormalFormTimeline]:
    budget = OracleBudget()
    max_points = max_points if max_points is not None else budget.max_points
    if max_enumeration is None:
        max_enumeration = budget.max_enumeration
    if len(dag) > max_points:
        raise TooLarge(len(dag), max_points)
    timelines: list[NormalFormTimeline] = []
    for assignment in iter_timelines(dag):
        if len(timelines) >= max_enumeration:
            raise TooLarge(len(timelines) + 1, max_enumeration, what="timelines")
        timelines.append(NormalFormTimeline.from_assignment(dag, assignment))
    return timelines


def brute_min_timeline(dag: CompoundDAG, budget: OracleBudget | None = None) -> NormalFormTimeline:
    """열거한 모든 정규형 타임라인의 점별 최솟값."""
    budget = budget or OracleBudget()
    timelines = enumerate_timelines(dag, budget.max_points, budget.max_enumeration)
    minimum: dict[int, int] = {}
    for timeline in timelines:
        for index, pos in timeline.assignment.items():
            minimum[index] = min(pos, minimum.get(index, pos))
    return NormalFormTimeline.from_assignment(dag, minimum)


# ── 무작위 그래프 생성 ───────────────────────────────────────


def _holds(rel: TlinkRel | AlinkRel, values: Mapping[TimePoint, int], a: NodeId, b: NodeId) -> bool:
    return satisfies(rel_constraints(rel, a, b), values)


def generate_random_graph(
    seed: int,
    n_intervals: int,
    density: float,
    slink_prob: float,
    fault: Fault = Fault.NONE,
    *,
    timex_prob: float = 0.2,
    alink_prob: float = 0.1,
) -> tuple[TimeMLGraph, tuple[str, ...]]:
    """숨은 정수 구간을 먼저 정하고, 그 구간들이 실제로 만족하는 관계만 링크로 뽑는다.

    따라서 fault가 NONE이면 결과 그래프는 항상 일관적이다. INJECT_CYCLE이면
    두 노드 u, v 사이의 기존 시간 링크를 지우고 "u before v", "v before u"를
    추가하며, 추가한 링크 id를 함께 반환한다.
    """
    if n_intervals < 1:
        raise ValueError("n_intervals는 1 이상이어야 합니다")
    if not (0.0 <= density <= 1.0 and 0.0 <= slink_prob <= 1.0):
        raise ValueError("density, slink_prob는 0과 1 사이여야 합니다")
    fault = Fault(fault)
    if fault is Fault.INJECT_CYCLE and n_intervals < 2:
        raise ValueError("사이클 주입에는 구간이 2개 이상 필요합니다")

    rng = random.Random(seed)
    entities: list[TemporalEntity] = []
    values: dict[TimePoint, int] = {}
    span = 2 * n_intervals
    for i in range(1, n_intervals + 1):
        if rng.random() < timex_prob:
            timex_class = rng.choice([TimexClass.DATE, TimexClass.TIME, TimexClass.DURATION])
            node = NodeId(f"t{i}", NodeKind.TIMEX)
        else:
            timex_class = None
            node = NodeId(f"ei{i}", NodeKind.EVENT_INSTANCE)
        start = rng.randint(1, span)
        end = start if timex_class is TimexClass.TIME else start + rng.randint(1, 3)
        values[TimePoint(node, PointEnd.START)] = start
        values[TimePoint(node, PointEnd.END)] = end
        entities.append(
            TemporalEntity(node, f"w{i}", char_offset=10 * (i - 1), timex_class=timex_class)
        )

    nodes = [e.node for e in entities]
    events = [n for n in nodes if n.kind is NodeKind.EVENT_INSTANCE]
    links: list[TimeMLLink] = []

    def next_id(prefix: str = "l") -> str:
        return f"{prefix}{len(links) + 1:04d}"

    for a, b in combinations(nodes, 2):
        if rng.random() >= density:
            continue
        if rng.random() < 0.5:
            a, b = b, a
        both_events = a.kind is NodeKind.EVENT_INSTANCE and b.kind is NodeKind.EVENT_INSTANCE
        if both_events and rng.random() < alink_prob:
            candidates: list[TlinkRel | AlinkRel] = [r for r in AlinkRel if _holds(r, values, a, b)]
        else:
            candidates = [r for r in TlinkRel if _holds(r, values, a, b)]
        if not candidates:
            # 겹침(overlap)은 표현할 관계가 없다
            continue
        links.append(TimeMLLink(next_id(), a, b, rng.choice(candidates)))

    for a in events:
        if len(events) < 2 or rng.random() >= slink_prob:
            continue
        b = rng.choice([e for e in events if e != a])
        links.append(TimeMLLink(next_id(), a, b, rng.choice(list(SlinkRel))))

    injected: tuple[str, ...] = ()
    if fault is Fault.INJECT_CYCLE:
        u, v = sorted(rng.sample(nodes, 2))
        links = [
            lk for lk in links
            if lk.kind == "SLINK" or {lk.source, lk.target} != {u, v}
        ]
        injected = (f"x{seed}-1", f"x{seed}-2")
        links.append(TimeMLLink(injected[0], u, v, TlinkRel.BEFORE))
        links.append(TimeMLLink(injected[1], v, u, TlinkRel.BEFORE))

    graph = build_graph(entities, links, doc_id=f"gen-{seed:06d}")
    logger.debug(
        "무작위 그래프 %s: n=%d m=%d fault=%s", graph.doc_id, graph.n, graph.m, fault.value
    )
    return graph, injected


def generate_random_pa_graph(
    seed: int,
    n_points: int,
    less_prob: float = 0.15,
    equal_prob: float = 0.05,
) -> PAGraph:
    """구간 구조 없이 임의의 `<`, `=` 제약을 갖는 PA 그래프 (오라클 대조용)."""
    rng = random.Random(seed)
    points = [TimePoint(NodeId(f"p{i:02d}"), PointEnd.START) for i in range(n_points)]
    constraints: list[PAConstraint] = []
    for a, b in combinations(points, 2):
        if rng.random() < equal_prob:
            constraints.append(PAConstraint(a, b, PARel.EQUAL, f"c{len(constraints)}"))
    for a in points:
        for b in points:
            if a != b and rng.random() < less_prob:
                constraints.append(PAConstraint(a, b, PARel.LESS, f"c{len(constraints)}"))
    rng.shuffle(constraints)
    return PAGraph(points=frozenset(points), constraints=tuple(constraints))
