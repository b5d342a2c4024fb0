"""2단계 PA 변환 테스트 - 관계 표의 건전성, 암묵 제약, 등호 중복 제거."""

import time
from itertools import product

import pytest

from src.oracle import generate_random_graph, satisfies
from src.pa_transform import (
    ALINK_AS_TLINK,
    PAConstraint,
    PARel,
    PointEnd,
    TimePoint,
    rel_constraints,
    transform,
)
from src.timeml_model import (
    AlinkRel,
    GraphOptions,
    NodeId,
    NodeKind,
    SlinkRel,
    TemporalEntity,
    TimeMLLink,
    TimexClass,
    TlinkRel,
    build_graph,
)

A = NodeId("a")
B = NodeId("b")


def _p(node: NodeId, end: PointEnd) -> TimePoint:
    return TimePoint(node, end)


# 구간 (s, e)에 대한 Allen 관계의 정의
ALLEN = {
    TlinkRel.BEFORE: lambda a, b: a[1] < b[0],
    TlinkRel.AFTER: lambda a, b: b[1] < a[0],
    TlinkRel.IBEFORE: lambda a, b: a[1] == b[0],
    TlinkRel.IAFTER: lambda a, b: b[1] == a[0],
    TlinkRel.BEGINS: lambda a, b: a[0] == b[0] and a[1] < b[1],
    TlinkRel.BEGUN_BY: lambda a, b: a[0] == b[0] and b[1] < a[1],
    TlinkRel.ENDS: lambda a, b: a[1] == b[1] and b[0] < a[0],
    TlinkRel.ENDED_BY: lambda a, b: a[1] == b[1] and a[0] < b[0],
    TlinkRel.INCLUDES: lambda a, b: a[0] < b[0] and b[1] < a[1],
    TlinkRel.IS_INCLUDED: lambda a, b: b[0] < a[0] and a[1] < b[1],
    TlinkRel.SIMULTANEOUS: lambda a, b: a == b,
    TlinkRel.IDENTITY: lambda a, b: a == b,
    TlinkRel.DURING: lambda a, b: a == b,
    TlinkRel.DURING_INV: lambda a, b: a == b,
}


def _intervals():
    """값 1..4 위의 모든 (A⁻, A⁺, B⁻, B⁺) 중 A⁻ < A⁺, B⁻ < B⁺ 인 것."""
    for a0, a1, b0, b1 in product(range(1, 5), repeat=4):
        if a0 < a1 and b0 < b1:
            yield (a0, a1), (b0, b1)


class TestRelationTable:
    @pytest.mark.parametrize("rel", list(TlinkRel))
    def test_sound_and_complete_over_small_domain(self, rel):
        constraints = rel_constraints(rel, A, B)
        for a, b in _intervals():
            values = {
                _p(A, PointEnd.START): a[0],
                _p(A, PointEnd.END): a[1],
                _p(B, PointEnd.START): b[0],
                _p(B, PointEnd.END): b[1],
            }
            assert satisfies(constraints, values) == ALLEN[rel](a, b), (rel, a, b)

    def test_before(self):
        assert rel_constraints(TlinkRel.BEFORE, A, B) == [
            PAConstraint(_p(A, PointEnd.END), _p(B, PointEnd.START), PARel.LESS),
        ]

    def test_includes(self):
        assert rel_constraints(TlinkRel.INCLUDES, A, B, "l7") == [
            PAConstraint(_p(A, PointEnd.START), _p(B, PointEnd.START), PARel.LESS, "l7"),
            PAConstraint(_p(B, PointEnd.END), _p(A, PointEnd.END), PARel.LESS, "l7"),
        ]

    @pytest.mark.parametrize("alink, tlink", [
        (AlinkRel.INITIATES, TlinkRel.BEGINS),
        (AlinkRel.CULMINATES, TlinkRel.ENDS),
        (AlinkRel.TERMINATES, TlinkRel.ENDS),
        (AlinkRel.CONTINUES, TlinkRel.IS_INCLUDED),
        (AlinkRel.REINITIATES, TlinkRel.IS_INCLUDED),
    ])
    def test_alink_mapping(self, alink, tlink):
        assert ALINK_AS_TLINK[alink] is tlink
        assert rel_constraints(alink, A, B) == rel_constraints(tlink, A, B)

    def test_point_labels(self):
        assert str(_p(A, PointEnd.START)) == "a⁻"
        assert str(_p(A, PointEnd.END)) == "a⁺"
        assert PointEnd.END.label == "end"


class TestTransform:
    def test_implicit_interval_constraints(self):
        graph = build_graph([TemporalEntity(A), TemporalEntity(B)], [])
        pa = transform(graph)
        assert len(pa.points) == 4
        assert [str(c) for c in pa.constraints] == ["a⁻ < a⁺", "b⁻ < b⁺"]
        assert all(c.provenance is None for c in pa.constraints)

    def test_time_timex_is_instant(self):
        noon = NodeId("t1", NodeKind.TIMEX)
        graph = build_graph([TemporalEntity(noon, timex_class=TimexClass.TIME)], [])
        pa = transform(graph)
        assert [c.rel for c in pa.constraints] == [PARel.EQUAL]

    def test_date_timex_is_interval(self):
        monday = NodeId("t1", NodeKind.TIMEX)
        graph = build_graph([TemporalEntity(monday, timex_class=TimexClass.DATE)], [])
        assert [c.rel for c in transform(graph).constraints] == [PARel.LESS]

    def test_equalities_deduplicated(self):
        links = [
            TimeMLLink("l1", A, B, TlinkRel.SIMULTANEOUS),
            TimeMLLink("l2", B, A, TlinkRel.IDENTITY),
        ]
        pa = transform(build_graph([TemporalEntity(A), TemporalEntity(B)], links))
        assert len(pa.equal) == 2
        assert {c.provenance for c in pa.equal} == {"l1"}

    def test_slinks_ignored(self):
        links = [TimeMLLink("l1", A, B, SlinkRel.MODAL)]
        pa = transform(build_graph([TemporalEntity(A), TemporalEntity(B)], links))
        assert all(c.provenance is None for c in pa.constraints)

    def test_alink_provenance(self):
        links = [TimeMLLink("l1", A, B, AlinkRel.CONTINUES)]
        pa = transform(build_graph([TemporalEntity(A), TemporalEntity(B)], links))
        assert [c.provenance for c in pa.less] == [None, None, "l1", "l1"]

    def test_self_loop_kept_as_constraints(self):
        links = [TimeMLLink("l1", A, A, TlinkRel.SIMULTANEOUS)]
        graph = build_graph([TemporalEntity(A)], links, GraphOptions(drop_self_loops=False))
        # A⁻ = A⁻ 같은 자기 등호는 제약이 아니다
        assert transform(graph).equal == []


@pytest.mark.slow
class TestScaling:
    @staticmethod
    def _best_time(graph, repeats: int = 5) -> float:
        best = float("inf")
        for _ in range(repeats):
            started = time.perf_counter()
            transform(graph)
            best = min(best, time.perf_counter() - started)
        return best

    def test_doubling_input_at_most_2_5x_time(self):
        small, _ = generate_random_graph(9, 2000, density=3.0 / 2000, slink_prob=0.02)
        large, _ = generate_random_graph(9, 4000, density=3.0 / 4000, slink_prob=0.02)
        pa_small, pa_large = transform(small), transform(large)
        assert len(pa_large.constraints) >= 1.5 * len(pa_small.constraints)
        assert self._best_time(large) / self._best_time(small) <= 2.5
