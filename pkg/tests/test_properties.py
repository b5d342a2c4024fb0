"""속성 기반 테스트 - 전수 탐색 오라클과 networkx를 독립 기준으로 삼아 대조한다.

- check 판정 == brute_consistent
- greedy_kahn == brute_min_timeline (점별 최소)
- is_indeterminate == 열거된 타임라인에서 두 점의 상대 순서가 바뀌는지 여부
"""

import random

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.consistency import CompoundDAG, Consistent, check
from src.oracle import (
    brute_consistent,
    brute_min_timeline,
    enumerate_timelines,
    generate_random_pa_graph,
)
from src.pa_transform import PAConstraint, PAGraph, PARel, PointEnd, TimePoint
from src.timeline import (
    Reachability,
    ReachabilityMode,
    greedy_kahn,
    indeterminacy_table,
    is_indeterminate,
)
from src.timeml_model import NodeId

POINTS = [TimePoint(NodeId(f"p{i:02d}"), PointEnd.START) for i in range(8)]


@st.composite
def pa_graphs(draw, max_points: int = 8):
    n = draw(st.integers(min_value=1, max_value=max_points))
    points = POINTS[:n]
    raw = draw(st.lists(
        st.tuples(
            st.integers(0, n - 1),
            st.integers(0, n - 1),
            st.sampled_from([PARel.LESS, PARel.LESS, PARel.EQUAL]),
        ),
        max_size=3 * n,
    ))
    constraints = tuple(
        PAConstraint(points[a], points[b], rel, f"c{k}")
        for k, (a, b, rel) in enumerate(raw)
        if a != b
    )
    return PAGraph(points=frozenset(points), constraints=constraints)


@st.composite
def dags(draw, max_nodes: int = 6):
    n = draw(st.integers(min_value=0, max_value=max_nodes))
    order = draw(st.permutations(range(1, n + 1)))
    pairs = [(order[i], order[j]) for i in range(n) for j in range(i + 1, n)]
    edges = draw(st.sets(st.sampled_from(pairs), max_size=len(pairs))) if pairs else set()
    return CompoundDAG.from_edges(n, edges)


def _seeded_dag(seed: int, max_nodes: int = 6) -> CompoundDAG:
    rng = random.Random(seed)
    n = rng.randint(1, max_nodes)
    labels = list(range(1, n + 1))
    rng.shuffle(labels)
    edges = {
        (labels[i], labels[j])
        for i in range(n)
        for j in range(i + 1, n)
        if rng.random() < 0.35
    }
    return CompoundDAG.from_edges(n, edges)


def _order_signs(dag: CompoundDAG, u: int, v: int) -> set[int]:
    signs = set()
    for timeline in enumerate_timelines(dag):
        diff = timeline.assignment[u] - timeline.assignment[v]
        signs.add((diff > 0) - (diff < 0))
    return signs


class TestConsistencyOracle:
    @given(pa_graphs())
    @settings(max_examples=300, deadline=None)
    def test_verdict_matches_brute_force(self, pa):
        assert isinstance(check(pa), Consistent) == brute_consistent(pa)

    def test_seeded_graphs(self):
        for seed in range(1000):
            pa = generate_random_pa_graph(seed, 6 + seed % 5)
            assert isinstance(check(pa), Consistent) == brute_consistent(pa), seed

    @given(pa_graphs())
    @settings(max_examples=200, deadline=None)
    def test_consistent_dag_is_acyclic(self, pa):
        result = check(pa)
        if isinstance(result, Consistent):
            nxg = nx.DiGraph()
            nxg.add_nodes_from(range(1, len(result.dag) + 1))
            nxg.add_edges_from(result.dag.edges)
            assert nx.is_directed_acyclic_graph(nxg)

    @given(pa_graphs())
    @settings(max_examples=200, deadline=None)
    def test_every_cycle_replays_inconsistent(self, pa):
        result = check(pa)
        if isinstance(result, Consistent):
            return
        for cycle in result.report.cycles:
            points = frozenset(p for c in cycle.constraints for p in (c.lhs, c.rhs))
            assert not brute_consistent(PAGraph(points, cycle.constraints))


class TestMinimumTimeline:
    @given(dags())
    @settings(max_examples=200, deadline=None)
    def test_greedy_kahn_is_pointwise_minimum(self, dag):
        assert greedy_kahn(dag).assignment == brute_min_timeline(dag).assignment

    def test_seeded_dags(self):
        for seed in range(500):
            dag = _seeded_dag(seed)
            assert greedy_kahn(dag).assignment == brute_min_timeline(dag).assignment, seed

    @given(pa_graphs(max_points=6))
    @settings(max_examples=200, deadline=None)
    def test_from_pa_graphs(self, pa):
        result = check(pa)
        if isinstance(result, Consistent):
            assert greedy_kahn(result.dag) == brute_min_timeline(result.dag)

    @given(dags())
    @settings(max_examples=100, deadline=None)
    def test_minimum_is_a_valid_timeline(self, dag):
        timelines = {tuple(sorted(t.assignment.items())) for t in enumerate_timelines(dag)}
        assert tuple(sorted(greedy_kahn(dag).assignment.items())) in timelines


class TestIndeterminacy:
    @given(dags(max_nodes=5))
    @settings(max_examples=150, deadline=None)
    def test_matches_order_variation(self, dag):
        for u in dag.compounds:
            for v in dag.compounds:
                if u.index < v.index:
                    varies = len(_order_signs(dag, u.index, v.index)) > 1
                    assert is_indeterminate(dag, u, v) == varies

    def test_seeded_dags(self):
        for seed in range(200):
            dag = _seeded_dag(seed, max_nodes=5)
            reach = Reachability(dag, ReachabilityMode.CLOSURE)
            for u in dag.compounds:
                for v in dag.compounds:
                    if u.index < v.index:
                        varies = len(_order_signs(dag, u.index, v.index)) > 1
                        assert is_indeterminate(dag, u, v, reach) == varies, seed

    @given(dags(max_nodes=7))
    @settings(max_examples=200, deadline=None)
    def test_reachability_matches_networkx(self, dag):
        nxg = nx.DiGraph()
        nxg.add_nodes_from(range(1, len(dag) + 1))
        nxg.add_edges_from(dag.edges)
        dfs = Reachability(dag, ReachabilityMode.DFS)
        closure = Reachability(dag, ReachabilityMode.CLOSURE)
        for u in nxg.nodes:
            descendants = nx.descendants(nxg, u)
            for v in nxg.nodes:
                if u != v:
                    assert dfs.reaches(u, v) == closure.reaches(u, v) == (v in descendants)

    @given(dags(max_nodes=7))
    @settings(max_examples=200, deadline=None)
    def test_section_and_full_modes_agree(self, dag):
        timeline = greedy_kahn(dag)
        sections = indeterminacy_table(dag, timeline, "sections")
        full = indeterminacy_table(dag, timeline, "full")
        assert sections.sections == full.sections
        assert sections.pair_count == full.pair_count

    @given(dags(max_nodes=7))
    @settings(max_examples=200, deadline=None)
    def test_sections_cover_every_shared_position(self, dag):
        timeline = greedy_kahn(dag)
        table = indeterminacy_table(dag, timeline)
        covered = {p for start, end in table.sections for p in range(start, end + 1)}
        for pos, layer in enumerate(timeline.layers(), start=1):
            if len(layer) > 1:
                assert pos in covered


class TestScale:
    @pytest.mark.parametrize("seed", range(3))
    def test_large_graph_check_and_layering(self, seed):
        pa = generate_random_pa_graph(seed, 400, less_prob=0.005, equal_prob=0.001)
        result = check(pa)
        if isinstance(result, Consistent):
            timeline = greedy_kahn(result.dag)
            assert all(timeline.assignment[u] < timeline.assignment[v] for u, v in result.dag.edges)
