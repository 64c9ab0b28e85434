"""Annotation import and native format round-trip tests."""

from __future__ import annotations

import json

import pytest

from mapgraph import synth
from mapgraph.core import EdgeKind, SceneType, validate
from mapgraph.errors import (
    BadLabelError,
    SchemaError,
    UnanchoredEdgeError,
    ValidationFailedError,
)
from mapgraph.ingest import (
    export_native,
    graph_to_json,
    import_labelme,
    import_native,
    load_graph,
    load_graph_dir,
    save_graph,
)


def _labelme_doc(extra_shapes=(), flags=None):
    shapes = [
        {
            "label": "landmark:Castle",
            "shape_type": "circle",
            "points": [[100.0, 100.0], [120.0, 100.0]],
        },
        {"label": "intersection", "shape_type": "point", "points": [[200.0, 100.0]]},
        {"label": "intersection", "shape_type": "point", "points": [[300.0, 100.0]]},
        {
            "label": "adjacent",
            "shape_type": "line",
            "points": [[102.0, 101.0], [198.0, 99.0]],
        },
        {
            "label": "connect",
            "shape_type": "line",
            "points": [[201.0, 100.0], [299.0, 101.0]],
        },
        *extra_shapes,
    ]
    doc = {
        "imagePath": "castle_map.png",
        "imageWidth": 800,
        "imageHeight": 600,
        "shapes": shapes,
    }
    if flags:
        doc["flags"] = flags
    return doc


def test_minimal_annotation_imports_to_valid_graph():
    graph = import_labelme(_labelme_doc())
    assert validate(graph).is_valid
    assert graph.map_id == "castle_map"
    assert len(graph.landmarks) == 1
    assert len(graph.intersections) == 2
    assert graph.landmarks[0].label == "Castle"
    assert graph.landmarks[0].radius == pytest.approx(20.0)
    assert graph.meta.image_size == (800, 600)


def test_annotation_flags_set_scene_type():
    graph = import_labelme(_labelme_doc(flags={"scene_type": "Zoo"}))
    assert graph.meta.scene_type is SceneType.ZOO


def test_far_segment_end_is_unanchored():
    doc = _labelme_doc(
        extra_shapes=[
            {
                "label": "observable",
                "shape_type": "line",
                "points": [[100.0, 100.0], [500.0, 500.0]],
            }
        ]
    )
    with pytest.raises(UnanchoredEdgeError):
        import_labelme(doc)


def test_large_landmark_radius_extends_snap_allowance():
    # 40 px off-center but inside the landmark's own radius.
    doc = {
        "imagePath": "big.png",
        "shapes": [
            {
                "label": "landmark:Lake",
                "shape_type": "circle",
                "points": [[100.0, 100.0], [160.0, 100.0]],
            },
            {
                "label": "intersection",
                "shape_type": "point",
                "points": [[300.0, 100.0]],
            },
            {
                "label": "intersection",
                "shape_type": "point",
                "points": [[400.0, 100.0]],
            },
            {
                "label": "adjacent",
                "shape_type": "line",
                "points": [[140.0, 100.0], [301.0, 100.0]],
            },
            {
                "label": "connect",
                "shape_type": "line",
                "points": [[300.0, 100.0], [400.0, 100.0]],
            },
        ],
    }
    graph = import_labelme(doc)
    assert graph.edge_kind("l000", "i000") is EdgeKind.ADJACENT


def test_bad_labels_rejected():
    with pytest.raises(BadLabelError):
        import_labelme(
            _labelme_doc(
                extra_shapes=[
                    {
                        "label": "pathway",
                        "shape_type": "line",
                        "points": [[100.0, 100.0], [200.0, 100.0]],
                    }
                ]
            )
        )
    with pytest.raises(BadLabelError):
        import_labelme(
            {
                "shapes": [
                    {
                        "label": "landmark:",
                        "shape_type": "circle",
                        "points": [[1.0, 1.0], [2.0, 1.0]],
                    }
                ]
            }
        )


def test_duplicate_landmark_names_fail_validation():
    doc = _labelme_doc(
        extra_shapes=[
            {
                "label": "landmark:Castle",
                "shape_type": "circle",
                "points": [[300.0, 100.0], [310.0, 100.0]],
            },
        ]
    )
    with pytest.raises(ValidationFailedError) as excinfo:
        import_labelme(doc)
    assert "DUPLICATE_LABEL" in str(excinfo.value)


# -- native format ---------------------------------------------------------------


def test_native_round_trip_is_identity():
    for seed in range(10):
        graph = synth.generate(seed, n_intersections=5, n_landmarks=4, extra_edges=1)
        assert import_native(export_native(graph)) == graph


def test_export_is_byte_stable():
    graph = synth.generate(42, n_intersections=5, n_landmarks=4, extra_edges=2)
    again = synth.generate(42, n_intersections=5, n_landmarks=4, extra_edges=2)
    assert graph_to_json(graph) == graph_to_json(again)


def test_unknown_keys_strict_vs_lenient():
    doc = export_native(synth.generate(1, n_intersections=3, n_landmarks=2))
    doc["custom"] = True
    with pytest.raises(SchemaError):
        import_native(doc)
    graph = import_native(doc, strict=False)
    assert graph.map_id == doc["map_id"]


def test_empty_nodes_array_fails_validation():
    doc = {"map_id": "m", "meta": {}, "nodes": [], "edges": []}
    with pytest.raises(ValidationFailedError):
        import_native(doc)


def test_invalid_graph_import_raises_with_report():
    doc = {
        "map_id": "broken",
        "meta": {},
        "nodes": [
            {"id": "l1", "type": "landmark", "x": 0, "y": 0, "r": 5, "label": "Spot"},
            {"id": "i1", "type": "intersection", "x": 10, "y": 0, "label": "intersection"},
            {"id": "i2", "type": "intersection", "x": 20, "y": 0, "label": "intersection"},
        ],
        "edges": [{"a": "i1", "b": "i2", "kind": "connect"}],
    }
    with pytest.raises(ValidationFailedError) as excinfo:
        import_native(doc)
    assert "LANDMARK_ISOLATED" in str(excinfo.value)
    graph = import_native(doc, validate_graph=False)
    assert not validate(graph).is_valid


def test_bad_enum_value_is_schema_error():
    doc = export_native(synth.generate(2, n_intersections=3, n_landmarks=2))
    doc["meta"]["scene_type"] = "Swamp"
    with pytest.raises(SchemaError):
        import_native(doc)


def test_file_helpers_and_autodetect(tmp_path):
    graph = synth.generate(3, n_intersections=4, n_landmarks=3)
    native_path = tmp_path / "g.json"
    save_graph(graph, native_path)
    assert load_graph(native_path) == graph

    annotation_path = tmp_path / "a.json"
    annotation_path.write_text(json.dumps(_labelme_doc()), encoding="utf-8")
    assert load_graph(annotation_path).map_id == "castle_map"

    graphs = load_graph_dir(tmp_path)
    assert set(graphs) == {graph.map_id, "castle_map"}
