"""Shared graph builders used across the test modules."""

from __future__ import annotations

import pytest

from mapgraph.core import (
    Edge,
    EdgeKind,
    IntersectionNode,
    LandmarkNode,
    SceneGraph,
    SceneMeta,
)

_KINDS = {kind.value: kind for kind in EdgeKind}


def quick_graph(
    landmarks: dict[str, tuple[float, float]],
    intersections: dict[str, tuple[float, float]],
    edges: list[tuple[str, str, str]],
    map_id: str = "test",
    meta: SceneMeta | None = None,
    labels: dict[str, str] | None = None,
) -> SceneGraph:
    """Compact builder: landmark labels default to the node id."""
    labels = labels or {}
    nodes = [
        LandmarkNode(id=nid, center=pos, radius=10.0, label=labels.get(nid, nid))
        for nid, pos in landmarks.items()
    ]
    nodes += [
        IntersectionNode(id=nid, center=pos) for nid, pos in intersections.items()
    ]
    return SceneGraph(
        map_id=map_id,
        nodes=nodes,
        edges=[Edge(a, b, _KINDS[kind]) for a, b, kind in edges],
        meta=meta,
    )


@pytest.fixture
def diamond() -> SceneGraph:
    """s and t joined through two parallel intersections a < b."""
    return quick_graph(
        landmarks={"s": (0.0, 100.0), "t": (400.0, 100.0)},
        intersections={"a": (200.0, 0.0), "b": (200.0, 200.0)},
        edges=[
            ("s", "a", "adjacent"),
            ("s", "b", "adjacent"),
            ("a", "t", "adjacent"),
            ("b", "t", "adjacent"),
        ],
    )


@pytest.fixture
def diamond_with_chord() -> SceneGraph:
    return quick_graph(
        landmarks={"s": (0.0, 100.0), "t": (400.0, 100.0)},
        intersections={"a": (200.0, 0.0), "b": (200.0, 200.0)},
        edges=[
            ("s", "a", "adjacent"),
            ("s", "b", "adjacent"),
            ("a", "t", "adjacent"),
            ("b", "t", "adjacent"),
            ("a", "b", "connect"),
        ],
    )


@pytest.fixture
def star() -> SceneGraph:
    """Minimal graph satisfying every connectivity rule."""
    return quick_graph(
        landmarks={"l1": (0.0, 0.0)},
        intersections={"i1": (100.0, 0.0), "i2": (200.0, 0.0)},
        edges=[("l1", "i1", "adjacent"), ("i1", "i2", "connect")],
    )
