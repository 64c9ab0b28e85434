"""Data model, validation, and path algorithm tests."""

from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import quick_graph
from mapgraph import synth
from mapgraph.core import (
    DUPLICATE_LABEL,
    EDGE_KIND_MISMATCH,
    GRAPH_DISCONNECTED,
    INTERSECTION_UNDERCONNECTED,
    LANDMARK_ISOLATED,
    EdgeKind,
    GraphPath,
    IntersectionNode,
    LandmarkNode,
    all_simple_paths,
    check_path,
    shortest_path,
    validate,
)
from mapgraph.errors import (
    InvalidPathError,
    NoPathError,
    PathExplosionError,
    ReferentialError,
)


# -- node and edge invariants -------------------------------------------------


def test_landmark_rejects_nonpositive_radius():
    with pytest.raises(ValueError):
        LandmarkNode(id="l", center=(1.0, 1.0), radius=0.0, label="spot")


def test_landmark_rejects_negative_coordinates():
    with pytest.raises(ValueError):
        LandmarkNode(id="l", center=(-1.0, 1.0), radius=5.0, label="spot")


def test_intersection_label_is_fixed():
    with pytest.raises(ValueError):
        IntersectionNode(id="i", center=(0.0, 0.0), label="junction")


def test_graph_rejects_dangling_edge():
    with pytest.raises(ReferentialError):
        quick_graph(
            landmarks={"l1": (0, 0)},
            intersections={"i1": (1, 1)},
            edges=[("l1", "ghost", "adjacent")],
        )


def test_graph_rejects_self_loop():
    with pytest.raises(ReferentialError):
        quick_graph(
            landmarks={"l1": (0, 0)},
            intersections={"i1": (1, 1)},
            edges=[("i1", "i1", "connect")],
        )


def test_graph_rejects_duplicate_edge_pair():
    with pytest.raises(ReferentialError):
        quick_graph(
            landmarks={"l1": (0, 0)},
            intersections={"i1": (1, 1)},
            edges=[("l1", "i1", "adjacent"), ("i1", "l1", "observable")],
        )


def test_graph_path_needs_two_nodes():
    with pytest.raises(ValueError):
        GraphPath(("a",))


# -- validation ----------------------------------------------------------------


def test_star_is_valid(star):
    report = validate(star)
    assert report.is_valid
    assert report.violations == ()
    # Both intersections are degree-1 road ends; flagged but tolerated.
    assert {w.code for w in report.warnings} == {INTERSECTION_UNDERCONNECTED}


def test_landmark_without_adjacent_edge():
    graph = quick_graph(
        landmarks={"l1": (0, 0), "l2": (5, 5)},
        intersections={"i1": (1, 1), "i2": (2, 2)},
        edges=[("l1", "i1", "adjacent"), ("i1", "i2", "connect"),
               ("l2", "i2", "observable")],
    )
    assert validate(graph).codes() == (LANDMARK_ISOLATED,)


def test_two_disjoint_components_flag_disconnection():
    graph = quick_graph(
        landmarks={"l1": (0, 0), "l2": (50, 50)},
        intersections={"i1": (1, 1), "i2": (2, 2), "i3": (51, 51), "i4": (52, 52)},
        edges=[
            ("l1", "i1", "adjacent"),
            ("i1", "i2", "connect"),
            ("l2", "i3", "adjacent"),
            ("i3", "i4", "connect"),
        ],
    )
    assert validate(graph).codes() == (GRAPH_DISCONNECTED,)


def test_disconnection_agrees_with_union_find_oracle():
    # Independent union-find over traversable edges.
    def union_find_components(graph):
        parent = {n.id: n.id for n in graph.nodes}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for edge in graph.edges:
            if edge.kind in (EdgeKind.CONNECT, EdgeKind.ADJACENT):
                parent[find(edge.a)] = find(edge.b)
        return len({find(n.id) for n in graph.nodes})

    for seed in range(30):
        graph = synth.generate(seed, n_intersections=4, n_landmarks=3)
        assert union_find_components(graph) == 1
        assert GRAPH_DISCONNECTED not in validate(graph).codes()


def test_underconnected_is_error_in_strict_mode():
    graph = quick_graph(
        landmarks={"l1": (0, 0)},
        intersections={"i1": (1, 1), "i2": (2, 2), "i3": (3, 3), "i4": (4, 4)},
        edges=[
            ("l1", "i1", "adjacent"),
            ("i1", "i2", "connect"),
            ("i2", "i3", "connect"),
            ("i3", "i1", "connect"),
            ("i3", "i4", "connect"),
        ],
    )
    assert validate(graph).codes() == ()
    assert validate(graph, strict_degree=True).codes() == (
        INTERSECTION_UNDERCONNECTED,
    )


def test_validate_is_idempotent(diamond):
    first = validate(diamond)
    second = validate(diamond)
    assert first == second


def test_kind_mismatch_and_duplicate_label_codes():
    mismatch = quick_graph(
        landmarks={"l1": (0, 0), "l2": (9, 9)},
        intersections={"i1": (1, 1), "i2": (2, 2)},
        edges=[
            ("l1", "i1", "adjacent"),
            ("l2", "i2", "adjacent"),
            ("i1", "i2", "connect"),
            ("l1", "i2", "connect"),  # connect must join two intersections
        ],
    )
    assert validate(mismatch).codes() == (EDGE_KIND_MISMATCH,)

    duplicates = quick_graph(
        landmarks={"l1": (0, 0), "l2": (9, 9)},
        intersections={"i1": (1, 1), "i2": (2, 2)},
        edges=[
            ("l1", "i1", "adjacent"),
            ("l2", "i2", "adjacent"),
            ("i1", "i2", "connect"),
        ],
        labels={"l1": "Fountain", "l2": "fountain  "},
    )
    assert validate(duplicates).codes() == (DUPLICATE_LABEL,)


# -- shortest path ---------------------------------------------------------------


def test_diamond_tie_breaks_lexicographically(diamond):
    path = shortest_path(diamond, "s", "t")
    assert path.nodes == ("s", "a", "t")
    assert path.hops == 2


def test_two_hop_landmark_to_landmark(star):
    graph = quick_graph(
        landmarks={"l1": (0, 0), "l2": (10, 0)},
        intersections={"i1": (5, 0), "i2": (5, 5)},
        edges=[
            ("l1", "i1", "adjacent"),
            ("l2", "i1", "adjacent"),
            ("i1", "i2", "connect"),
        ],
    )
    assert shortest_path(graph, "l1", "l2").hops == 2


def test_no_path_between_components():
    graph = quick_graph(
        landmarks={"l1": (0, 0), "l2": (50, 50)},
        intersections={"i1": (1, 1), "i2": (2, 2), "i3": (51, 51), "i4": (52, 52)},
        edges=[
            ("l1", "i1", "adjacent"),
            ("i1", "i2", "connect"),
            ("l2", "i3", "adjacent"),
            ("i3", "i4", "connect"),
        ],
    )
    with pytest.raises(NoPathError):
        shortest_path(graph, "l1", "l2")


def test_observable_edges_are_not_traversable():
    graph = quick_graph(
        landmarks={"l1": (0, 0), "l2": (10, 0)},
        intersections={"i1": (5, 0), "i2": (5, 5)},
        edges=[
            ("l1", "i1", "adjacent"),
            ("i1", "i2", "connect"),
            ("l2", "i2", "adjacent"),
            ("l1", "l2", "observable"),
        ],
    )
    assert shortest_path(graph, "l1", "l2").nodes == ("l1", "i1", "i2", "l2")


# -- simple path enumeration -------------------------------------------------------


def test_diamond_has_two_simple_paths(diamond):
    paths = all_simple_paths(diamond, "s", "t")
    assert [p.nodes for p in paths] == [("s", "a", "t"), ("s", "b", "t")]


def test_diamond_with_chord_has_four_paths(diamond_with_chord):
    paths = all_simple_paths(diamond_with_chord, "s", "t")
    lengths = sorted(p.hops for p in paths)
    assert lengths == [2, 2, 3, 3]
    assert len({p.nodes for p in paths}) == 4


def test_unique_path_on_a_chain(star):
    paths = all_simple_paths(star, "l1", "i2")
    assert [p.nodes for p in paths] == [("l1", "i1", "i2")]


def test_path_explosion_raises(diamond):
    with pytest.raises(PathExplosionError):
        all_simple_paths(diamond, "s", "t", cap=1)


def test_enumeration_is_deterministic(diamond_with_chord):
    first = [p.nodes for p in all_simple_paths(diamond_with_chord, "s", "t")]
    second = [p.nodes for p in all_simple_paths(diamond_with_chord, "s", "t")]
    assert first == second


def test_check_path_flags_unstored_hops(diamond):
    with pytest.raises(InvalidPathError):
        check_path(diamond, GraphPath(("s", "t")))


# -- invariants against the independent references ----------------------------------


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_shortest_matches_reference_and_simple_path_minimum(seed):
    rng = random.Random(seed)
    graph = synth.generate(
        seed,
        n_intersections=rng.randint(2, 6),
        n_landmarks=rng.randint(2, 5),
        extra_edges=rng.randint(0, 3),
    )
    landmark_ids = sorted(n.id for n in graph.landmarks)
    s, t = landmark_ids[0], landmark_ids[-1]
    path = shortest_path(graph, s, t)
    assert path.hops == synth.oracle_shortest(graph, s, t)

    simple = all_simple_paths(graph, s, t)
    assert path.hops == min(p.hops for p in simple)
    assert path.nodes in {p.nodes for p in simple}
    assert all(len(set(p.nodes)) == len(p.nodes) for p in simple)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_every_pair_reachable_in_valid_graphs(seed):
    graph = synth.generate(seed, n_intersections=4, n_landmarks=3, extra_edges=1)
    assert validate(graph).is_valid
    ids = sorted(n.id for n in graph.nodes)
    for i, s in enumerate(ids):
        for t in ids[i + 1 :]:
            assert shortest_path(graph, s, t).hops >= 1
