"""1단계 분할 - SLINK를 무시하고 TLINK/ALINK로 연결된 부분 그래프로 나눈다.

TLINK/ALINK를 무방향 간선으로 보고 DFS로 연결 요소를 구한 뒤, 서로 다른
부분 그래프를 잇는 SLINK의 양 끝점을 연결점(connecting point)으로 기록한다.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass, field

from src.timeml_model import NodeId, SlinkRel, TimeMLGraph, TimeMLLink

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ConnectingPoint:
    source: NodeId
    target: NodeId
    link_id: str
    rel: SlinkRel


@dataclass(frozen=True)
class Partition:
    subgraphs: tuple[TimeMLGraph, ...] = ()
    slinks: tuple[TimeMLLink, ...] = ()
    connecting_points: tuple[ConnectingPoint, ...] = ()
    # 같은 부분 그래프 안에서 끝나는 SLINK (시간 제약 없음, 연결점 아님)
    intra_slinks: tuple[TimeMLLink, ...] = ()
    subgraph_of: dict[NodeId, int] = field(default_factory=dict, compare=False)

    def __len__(self) -> int:
        return len(self.subgraphs)


def _components(graph: TimeMLGraph) -> list[list[NodeId]]:
    """TLINK/ALINK 무방향 그래프의 연결 요소. 방문 순서는 노드 id 사전순."""
    adjacency: dict[NodeId, set[NodeId]] = defaultdict(set)
    for link in graph.links:
        if link.kind == "SLINK":
            continue
        adjacency[link.source].add(link.target)
        adjacency[link.target].add(link.source)

    visited: set[NodeId] = set()
    components: list[list[NodeId]] = []
    for start in sorted(graph.nodes):
        if start in visited:
            continue
        component: list[NodeId] = []
        stack = [start]
        visited.add(start)
        while stack:
            node = stack.pop()
            component.append(node)
            # 역순으로 쌓아야 사전순으로 꺼낸다
            for neighbor in sorted(adjacency[node], reverse=True):
                if neighbor not in visited:
                    visited.add(neighbor)
                    stack.append(neighbor)
        components.append(component)
    return components


def partition(graph: TimeMLGraph) -> Partition:
    """TimeML 그래프를 시간/상(aspect) 링크로만 연결된 부분 그래프로 분할한다.

    부분 그래프는 구성원의 최소 char_offset 순으로 정렬된다.
    """
    if not graph.entities:
        return Partition()

    offset = {e.node: e.char_offset for e in graph.entities}
    components = _components(graph)
    components.sort(key=lambda comp: min((offset[n], n.id) for n in comp))

    subgraph_of = {node: index for index, comp in enumerate(components) for node in comp}
    links_by_component: list[list[TimeMLLink]] = [[] for _ in components]
    slinks: list[TimeMLLink] = []
    for link in graph.links:
        if link.kind == "SLINK":
            slinks.append(link)
        else:
            links_by_component[subgraph_of[link.source]].append(link)

    subgraphs = tuple(
        TimeMLGraph(
            entities=tuple(graph.entity(node) for node in sorted(comp)),
            links=tuple(links_by_component[index]),
            doc_id=graph.doc_id,
        )
        for index, comp in enumerate(components)
    )

    connecting: list[ConnectingPoint] = []
    intra: list[TimeMLLink] = []
    for link in sorted(slinks, key=lambda lk: (offset[lk.source], lk.link_id)):
        if subgraph_of[link.source] == subgraph_of[link.target]:
            intra.append(link)
            continue
        connecting.append(ConnectingPoint(link.source, link.target, link.link_id, link.rel))

    logger.debug(
        "%s: 부분 그래프 %d개, 연결점 %d개, 내부 SLINK %d개",
        graph.doc_id, len(subgraphs), len(connecting), len(intra),
    )
    return Partition(
        subgraphs=subgraphs,
        slinks=tuple(slinks),
        connecting_points=tuple(connecting),
        intra_slinks=tuple(intra),
        subgraph_of=subgraph_of,
    )
