"""Index formulas, scoring, and difficulty classification tests."""

from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import quick_graph
from mapgraph import synth
from mapgraph.core import GraphPath, shortest_path
from mapgraph.errors import (
    DegenerateRangeWarning,
    DisconnectedGraphError,
    EndpointMismatchError,
)
from mapgraph.metrics import (
    DifficultyLabel,
    aspli,
    classify_graph_difficulty,
    classify_query_difficulty,
    elements_index,
    meshedness_index,
    pqs,
    qdi,
)

# Reference per-scene index averages with their published difficulty labels.
GRAPH_INDEX_ROWS = [
    ("Google Map", 71.5, 0.121, 4.678),
    ("Mall", 93.5, 0.023, 5.839),
    ("Museum", 59.5, 0.041, 4.124),
    ("National Park", 38.8, 0.071, 5.185),
    ("Theme Park", 59.8, 0.152, 4.870),
    ("Trail", 59.0, 0.055, 5.277),
    ("Campus", 45.5, 0.150, 4.180),
    ("Urban", 71.8, 0.095, 6.230),
    ("Zoo", 102.5, 0.143, 5.663),
]

GRAPH_DIFFICULTY_EXPECTED = {
    "Google Map": "Medium",
    "Mall": "Medium",
    "Museum": "Easy",
    "National Park": "Easy",
    "Theme Park": "Medium",
    "Trail": "Medium",
    "Campus": "Medium",
    "Urban": "Hard",
    "Zoo": "Hard",
}

QUERY_STAT_ROWS = [
    ("Google Map", 11.45, 29.82),
    ("Mall", 10.47, 47.00),
    ("Museum", 6.93, 8.65),
    ("National Park", 12.43, 96.15),
    ("Theme Park", 9.62, 50.29),
    ("Trail", 9.60, 55.69),
    ("Campus", 13.45, 46.86),
    ("Urban", 10.07, 52.91),
    ("Zoo", 18.71, 145.04),
]

QUERY_DIFFICULTY_EXPECTED = {
    "Google Map": "Easy",
    "Mall": "Easy",
    "Museum": "Easy",
    "National Park": "Medium",
    "Theme Park": "Easy",
    "Trail": "Easy",
    "Campus": "Medium",
    "Urban": "Easy",
    "Zoo": "Hard",
}


# -- elements index ---------------------------------------------------------------


def test_elements_index_counts_nodes_plus_edges(diamond):
    assert elements_index(diamond) == 4 + 4


def test_elements_index_on_edgeless_graph():
    graph = quick_graph(
        landmarks={"l1": (0, 0)}, intersections={"i1": (5, 5)}, edges=[]
    )
    assert elements_index(graph) == 2


def test_elements_index_k4():
    graph = quick_graph(
        landmarks={},
        intersections={"a": (0, 0), "b": (0, 9), "c": (9, 0), "d": (9, 9)},
        edges=[
            ("a", "b", "connect"),
            ("a", "c", "connect"),
            ("a", "d", "connect"),
            ("b", "c", "connect"),
            ("b", "d", "connect"),
            ("c", "d", "connect"),
        ],
    )
    assert elements_index(graph) == 10
    assert meshedness_index(graph) == pytest.approx(1.0)


# -- meshedness --------------------------------------------------------------------


def test_meshedness_of_tree_is_zero():
    graph = synth.generate(7, n_intersections=6, n_landmarks=4, extra_edges=0)
    assert meshedness_index(graph) == 0.0


def test_meshedness_of_diamond(diamond):
    assert meshedness_index(diamond) == pytest.approx(1 / 3)


def test_meshedness_small_graph_is_zero():
    graph = quick_graph(
        landmarks={"l1": (0, 0)}, intersections={"i1": (5, 5)},
        edges=[("l1", "i1", "adjacent")],
    )
    assert meshedness_index(graph) == 0.0


@settings(max_examples=30, deadline=None)
@given(
    st.integers(min_value=0, max_value=5000),
    st.integers(min_value=0, max_value=4),
)
def test_chords_raise_meshedness_exactly(seed, extra):
    graph = synth.generate(seed, n_intersections=5, n_landmarks=3, extra_edges=extra)
    n = len(graph.nodes)
    assert meshedness_index(graph) == pytest.approx(extra / (2 * n - 5), abs=0)


# -- average shortest path length ---------------------------------------------------


def test_aspli_two_nodes():
    graph = quick_graph(
        landmarks={"l1": (0, 0)}, intersections={"i1": (5, 5)},
        edges=[("l1", "i1", "adjacent")],
    )
    assert aspli(graph) == 1.0


def test_aspli_degenerate_sizes():
    lone = quick_graph(landmarks={"l1": (0, 0)}, intersections={}, edges=[])
    assert aspli(lone) == 0.0


def test_aspli_triangle():
    graph = quick_graph(
        landmarks={},
        intersections={"a": (0, 0), "b": (9, 0), "c": (0, 9)},
        edges=[("a", "b", "connect"), ("b", "c", "connect"), ("a", "c", "connect")],
    )
    assert aspli(graph) == 1.0


def test_aspli_three_node_chain():
    graph = quick_graph(
        landmarks={},
        intersections={"a": (0, 0), "b": (9, 0), "c": (18, 0)},
        edges=[("a", "b", "connect"), ("b", "c", "connect")],
    )
    assert aspli(graph) == pytest.approx(8 / 6)


def test_aspli_raises_on_disconnected_graph():
    graph = quick_graph(
        landmarks={},
        intersections={"a": (0, 0), "b": (9, 0), "c": (50, 50), "d": (60, 60)},
        edges=[("a", "b", "connect"), ("c", "d", "connect")],
    )
    with pytest.raises(DisconnectedGraphError):
        aspli(graph)


def test_aspli_matches_all_pairs_reference():
    for seed in range(20):
        graph = synth.generate(seed, n_intersections=5, n_landmarks=4, extra_edges=2)
        ids = sorted(n.id for n in graph.nodes)
        total = sum(
            synth.oracle_shortest(graph, s, t) for s in ids for t in ids if s != t
        )
        expected = total / (len(ids) * (len(ids) - 1))
        assert aspli(graph) == pytest.approx(expected, abs=1e-12)


# -- query difficulty index ----------------------------------------------------------


def test_qdi_unique_path():
    graph = quick_graph(
        landmarks={"l1": (0, 0), "l2": (30, 0)},
        intersections={"i1": (10, 0), "i2": (20, 0)},
        edges=[
            ("l1", "i1", "adjacent"),
            ("i1", "i2", "connect"),
            ("l2", "i2", "adjacent"),
        ],
    )
    assert qdi(graph, "l1", "l2") == 3.0


def test_qdi_diamond(diamond):
    assert qdi(diamond, "s", "t") == 2.0


def test_qdi_diamond_with_chord(diamond_with_chord):
    assert qdi(diamond_with_chord, "s", "t") == 2.5


def test_qdi_requires_landmark_endpoints(diamond):
    with pytest.raises(ValueError):
        qdi(diamond, "a", "b")


def test_qdi_never_below_shortest(diamond_with_chord):
    assert qdi(diamond_with_chord, "s", "t") >= shortest_path(
        diamond_with_chord, "s", "t"
    ).hops


def test_qdi_propagates_path_explosion(diamond):
    from mapgraph.errors import PathExplosionError

    with pytest.raises(PathExplosionError):
        qdi(diamond, "s", "t", cap=1)


# -- path quality score ----------------------------------------------------------------


def test_pqs_of_shortest_path_is_one(diamond):
    path = shortest_path(diamond, "s", "t")
    assert pqs(diamond, path, "s", "t") == 1.0


def test_pqs_detour_through_chord(diamond_with_chord):
    candidate = GraphPath(("s", "a", "b", "t"))
    assert pqs(diamond_with_chord, candidate, "s", "t") == 1.5


def test_pqs_ring_detour_is_two():
    # Six-node ring; the long way round doubles the two-hop direct route.
    ring = ["a", "b", "c", "d", "e", "f"]
    graph = quick_graph(
        landmarks={},
        intersections={name: (i * 10.0, 0.0) for i, name in enumerate(ring)},
        edges=[(ring[i], ring[(i + 1) % 6], "connect") for i in range(6)],
    )
    long_way = GraphPath(("a", "f", "e", "d", "c"))
    assert pqs(graph, long_way, "a", "c") == 2.0


def test_pqs_endpoint_mismatch(diamond):
    with pytest.raises(EndpointMismatchError):
        pqs(diamond, GraphPath(("s", "a", "t")), "s", "a")


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=5000))
def test_pqs_at_least_one_and_tight_iff_shortest(seed):
    rng = random.Random(seed)
    graph = synth.generate(
        seed, n_intersections=rng.randint(3, 6), n_landmarks=rng.randint(2, 5),
        extra_edges=rng.randint(0, 3),
    )
    path = synth.random_landmark_path(graph, rng)
    score = pqs(graph, path, path.start, path.end)
    shortest = shortest_path(graph, path.start, path.end).hops
    assert score >= 1.0
    assert (score == 1.0) == (path.hops == shortest)


# -- difficulty classification ------------------------------------------------------------


def test_graph_difficulty_matches_published_labels():
    labels = classify_graph_difficulty(GRAPH_INDEX_ROWS)
    assert {scene: label.value for scene, label in labels.items()} == (
        GRAPH_DIFFICULTY_EXPECTED
    )


def test_query_difficulty_matches_published_labels():
    labels = classify_query_difficulty(QUERY_STAT_ROWS)
    assert {scene: label.value for scene, label in labels.items()} == (
        QUERY_DIFFICULTY_EXPECTED
    )


def test_degenerate_index_contributes_zero():
    rows = [("a", 5.0, 1.0, 2.0), ("b", 5.0, 2.0, 4.0)]
    with pytest.warns(DegenerateRangeWarning):
        labels = classify_graph_difficulty(rows)
    # First index constant: a scores 0, b scores (1+1)/3.
    assert labels["a"] is DifficultyLabel.EASY
    assert labels["b"] is DifficultyLabel.HARD


def test_dominant_row_is_hard():
    rows = [("low", 1.0, 0.1, 2.0), ("high", 9.0, 0.9, 8.0)]
    labels = classify_graph_difficulty(rows)
    assert labels["high"] is DifficultyLabel.HARD
    assert labels["low"] is DifficultyLabel.EASY


def test_query_extremes():
    labels = classify_query_difficulty(QUERY_STAT_ROWS)
    assert labels["Zoo"] is DifficultyLabel.HARD  # max mean, max variance
    assert labels["Museum"] is DifficultyLabel.EASY  # min mean, min variance


def test_difficulty_boundaries_are_pinned():
    from mapgraph.metrics import difficulty_from_score

    # Easy strictly below 0.33, Medium on the closed interval, Hard above.
    assert difficulty_from_score(0.32999) is DifficultyLabel.EASY
    assert difficulty_from_score(0.33) is DifficultyLabel.MEDIUM
    assert difficulty_from_score(0.66) is DifficultyLabel.MEDIUM
    assert difficulty_from_score(0.66001) is DifficultyLabel.HARD


def test_classification_needs_two_rows():
    with pytest.raises(ValueError):
        classify_graph_difficulty([("only", 1.0, 2.0, 3.0)])


def test_classification_rejects_nan():
    with pytest.raises(ValueError):
        classify_query_difficulty([("a", float("nan"), 1.0), ("b", 2.0, 3.0)])


def test_classification_invariant_to_row_order_and_affine_rescale():
    shuffled = list(reversed(GRAPH_INDEX_ROWS))
    assert classify_graph_difficulty(shuffled) == classify_graph_difficulty(
        GRAPH_INDEX_ROWS
    )
    rescaled = [
        (scene, 3.0 * ei + 100.0, mi, aspli_value)
        for scene, ei, mi, aspli_value in GRAPH_INDEX_ROWS
    ]
    assert classify_graph_difficulty(rescaled) == classify_graph_difficulty(
        GRAPH_INDEX_ROWS
    )
