"""Generator validity/determinism and reference-algorithm sanity tests."""

from __future__ import annotations

import pytest

from conftest import quick_graph
from mapgraph import synth
from mapgraph.core import validate
from mapgraph.ingest import graph_to_json
from mapgraph.metrics import meshedness_index


def test_fixed_seed_reproduces_identical_bytes():
    first = graph_to_json(synth.generate(99, n_intersections=6, n_landmarks=5,
                                         extra_edges=2))
    second = graph_to_json(synth.generate(99, n_intersections=6, n_landmarks=5,
                                          extra_edges=2))
    assert first == second


def test_all_generated_graphs_validate():
    for seed in range(50):
        graph = synth.generate(
            seed,
            n_intersections=2 + seed % 5,
            n_landmarks=2 + seed % 4,
            extra_edges=seed % 3,
        )
        assert validate(graph).is_valid, seed


def test_tree_has_zero_meshedness():
    graph = synth.generate(5, n_intersections=6, n_landmarks=4, extra_edges=0)
    assert meshedness_index(graph) == 0.0


def test_chord_count_sets_meshedness():
    for extra in (1, 2, 3):
        graph = synth.generate(5, n_intersections=6, n_landmarks=4, extra_edges=extra)
        n = len(graph.nodes)
        assert meshedness_index(graph) == pytest.approx(extra / (2 * n - 5))


def test_generator_rejects_tiny_inputs():
    with pytest.raises(ValueError):
        synth.generate(0, n_intersections=1, n_landmarks=2)
    with pytest.raises(ValueError):
        synth.generate(0, n_intersections=2, n_landmarks=1)


def test_oracle_shortest_on_single_edge():
    graph = quick_graph(
        landmarks={"l1": (0, 0)},
        intersections={"i1": (5, 5)},
        edges=[("l1", "i1", "adjacent")],
    )
    assert synth.oracle_shortest(graph, "l1", "i1") == 1


def test_oracle_shortest_unreachable_is_none():
    graph = quick_graph(
        landmarks={"l1": (0, 0), "l2": (9, 9)},
        intersections={},
        edges=[("l1", "l2", "observable")],
    )
    assert synth.oracle_shortest(graph, "l1", "l2") is None


def test_oracle_enumerates_diamond(diamond):
    paths = synth.oracle_all_simple(diamond, "s", "t")
    assert paths == {("s", "a", "t"), ("s", "b", "t")}


def test_random_landmark_path_is_traversable_and_simple():
    import random

    from mapgraph.core import check_path

    for seed in range(20):
        rng = random.Random(seed)
        graph = synth.generate(seed, n_intersections=5, n_landmarks=4, extra_edges=1)
        path = synth.random_landmark_path(graph, rng)
        check_path(graph, path)
        assert len(set(path.nodes)) == len(path.nodes)
        assert graph.is_landmark(path.start) and graph.is_landmark(path.end)
