"""Import of annotation documents and the native graph format.

Annotation conventions (LabelMe-style documents):

* circle shapes labeled ``landmark:<name>`` become landmarks; the circle's
  two points give center and radius,
* point shapes labeled ``intersection`` become intersections,
* line/linestrip shapes labeled ``connect`` / ``adjacent`` / ``observable``
  become edges whose endpoints snap to the nearest node center, which must
  lie within ``max(node radius, 15 px)`` of the segment end.

The native format is a single JSON document with ``map_id``, ``meta``,
``nodes``, and ``edges``; strict mode rejects unknown keys, lenient mode
ignores them.  Exports are order-normalized so a round trip is lossless
and byte-stable.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Mapping

from .core import (
    Edge,
    EdgeKind,
    IntersectionNode,
    LandmarkNode,
    LandmarkStyle,
    Projection,
    SceneGraph,
    SceneMeta,
    SceneType,
    TraversableStyle,
    validate,
)
from .errors import (
    BadLabelError,
    ReferentialError,
    SchemaError,
    UnanchoredEdgeError,
    ValidationFailedError,
)

#: Minimum snap distance in pixels for anchoring annotated segment ends.
SNAP_RADIUS = 15.0

_META_ENUMS = {
    "scene_type": SceneType,
    "projection": Projection,
    "landmark_style": LandmarkStyle,
    "traversable_style": TraversableStyle,
}

_TOP_KEYS = {"map_id", "meta", "nodes", "edges"}
_NODE_KEYS = {"id", "type", "x", "y", "r", "label"}
_EDGE_KEYS = {"a", "b", "kind", "road"}
_META_KEYS = set(_META_ENUMS) | {"image_path", "image_size"}


def _reject_unknown(doc: Mapping, allowed: set[str], where: str, strict: bool):
    if not strict:
        return
    unknown = sorted(set(doc) - allowed)
    if unknown:
        raise SchemaError(f"unknown {where} keys: {unknown}", keys=unknown)


def _meta_from_dict(doc: Mapping, strict: bool) -> SceneMeta:
    _reject_unknown(doc, _META_KEYS, "meta", strict)
    kwargs = {}
    for key, enum_type in _META_ENUMS.items():
        if key in doc:
            try:
                kwargs[key] = enum_type(doc[key])
            except ValueError:
                raise SchemaError(
                    f"meta.{key} value {doc[key]!r} is not one of "
                    f"{[e.value for e in enum_type]}"
                ) from None
    if doc.get("image_path") is not None:
        kwargs["image_path"] = str(doc["image_path"])
    if doc.get("image_size") is not None:
        size = doc["image_size"]
        if len(size) != 2:
            raise SchemaError(f"meta.image_size must be [width, height], got {size!r}")
        kwargs["image_size"] = (int(size[0]), int(size[1]))
    return SceneMeta(**kwargs)


def import_native(
    doc: Mapping, strict: bool = True, validate_graph: bool = True
) -> SceneGraph:
    """Build a scene graph from a native-format document."""
    _reject_unknown(doc, _TOP_KEYS, "top-level", strict)
    for key in ("map_id", "nodes", "edges"):
        if key not in doc:
            raise SchemaError(f"document is missing {key!r}")
    if not doc["nodes"]:
        raise ValidationFailedError("document has an empty nodes array")

    nodes = []
    for entry in doc["nodes"]:
        _reject_unknown(entry, _NODE_KEYS, "node", strict)
        try:
            kind = entry["type"]
            if kind == "landmark":
                nodes.append(
                    LandmarkNode(
                        id=str(entry["id"]),
                        center=(float(entry["x"]), float(entry["y"])),
                        radius=float(entry["r"]),
                        label=str(entry["label"]),
                    )
                )
            elif kind == "intersection":
                nodes.append(
                    IntersectionNode(
                        id=str(entry["id"]),
                        center=(float(entry["x"]), float(entry["y"])),
                    )
                )
            else:
                raise SchemaError(f"unknown node type {kind!r}")
        except KeyError as exc:
            raise SchemaError(f"node entry is missing {exc.args[0]!r}") from None
        except ValueError as exc:
            raise SchemaError(f"bad node entry {entry.get('id')!r}: {exc}") from None

    edges = []
    for entry in doc["edges"]:
        _reject_unknown(entry, _EDGE_KEYS, "edge", strict)
        try:
            edges.append(
                Edge(
                    a=str(entry["a"]),
                    b=str(entry["b"]),
                    kind=EdgeKind(entry["kind"]),
                    road_label=entry.get("road"),
                )
            )
        except KeyError as exc:
            raise SchemaError(f"edge entry is missing {exc.args[0]!r}") from None
        except ValueError:
            raise SchemaError(f"unknown edge kind {entry.get('kind')!r}") from None

    graph = SceneGraph(
        map_id=str(doc["map_id"]),
        nodes=nodes,
        edges=edges,
        meta=_meta_from_dict(doc.get("meta", {}), strict),
    )
    if validate_graph:
        report = validate(graph)
        if not report.is_valid:
            raise ValidationFailedError(
                f"graph {graph.map_id!r} breaks connectivity rules: "
                f"{[v.code for v in report.violations]}",
                report=report,
            )
    return graph


def export_native(graph: SceneGraph) -> dict:
    """Order-normalized native-format document for a graph."""
    nodes = []
    for node in sorted(graph.nodes, key=lambda n: n.id):
        entry = {
            "id": node.id,
            "type": "landmark" if isinstance(node, LandmarkNode) else "intersection",
            "x": node.center[0],
            "y": node.center[1],
            "label": node.label,
        }
        if isinstance(node, LandmarkNode):
            entry["r"] = node.radius
        nodes.append(entry)

    edges = []
    for edge in sorted(graph.edges, key=lambda e: (*sorted(e.pair), e.kind.value)):
        a, b = sorted(e for e in edge.pair)
        entry = {"a": a, "b": b, "kind": edge.kind.value}
        if edge.road_label is not None:
            entry["road"] = edge.road_label
        edges.append(entry)

    meta = graph.meta
    return {
        "map_id": graph.map_id,
        "meta": {
            "scene_type": meta.scene_type.value,
            "projection": meta.projection.value,
            "landmark_style": meta.landmark_style.value,
            "traversable_style": meta.traversable_style.value,
            "image_path": meta.image_path,
            "image_size": list(meta.image_size) if meta.image_size else None,
        },
        "nodes": nodes,
        "edges": edges,
    }


# -- annotation import ----------------------------------------------------------

_EDGE_LABELS = {kind.value: kind for kind in EdgeKind}
_LANDMARK_PREFIX = "landmark:"


def _snap(point: tuple[float, float], nodes: list) -> str:
    """Nearest node center; the hit must lie within max(radius, SNAP_RADIUS)."""
    best = min(nodes, key=lambda n: (math.dist(point, n.center), n.id))
    distance = math.dist(point, best.center)
    allowance = max(
        best.radius if isinstance(best, LandmarkNode) else 0.0, SNAP_RADIUS
    )
    if distance > allowance:
        raise UnanchoredEdgeError(
            f"segment end {point!r} is {distance:.1f} px from the nearest node "
            f"{best.id!r} (allowed {allowance:.1f})",
            point=point,
            nearest=best.id,
        )
    return best.id


def import_labelme(
    doc: Mapping, map_id: str | None = None, meta: SceneMeta | None = None
) -> SceneGraph:
    """Convert an annotation document into a validated scene graph.

    Scene-style metadata may be passed explicitly or supplied through the
    document's ``flags`` mapping; the image path and size always come from
    the document.
    """
    if "shapes" not in doc:
        raise SchemaError("annotation document has no 'shapes' array")

    landmarks: list[LandmarkNode] = []
    intersections: list[IntersectionNode] = []
    segments: list[tuple[EdgeKind, tuple[float, float], tuple[float, float]]] = []

    for shape in doc["shapes"]:
        label = str(shape.get("label", ""))
        shape_type = shape.get("shape_type", "")
        points = [tuple(float(v) for v in p) for p in shape.get("points", [])]

        if shape_type == "circle":
            if not label.startswith(_LANDMARK_PREFIX):
                raise BadLabelError(
                    f"circle shapes must be labeled 'landmark:<name>', got {label!r}"
                )
            name = label[len(_LANDMARK_PREFIX) :].strip()
            if not name:
                raise BadLabelError("landmark name after 'landmark:' is empty")
            if len(points) != 2:
                raise BadLabelError(f"circle for {name!r} needs 2 points")
            center, rim = points
            landmarks.append(
                LandmarkNode(
                    id=f"l{len(landmarks):03d}",
                    center=center,
                    radius=max(math.dist(center, rim), 1.0),
                    label=name,
                )
            )
        elif shape_type == "point":
            if label != "intersection":
                raise BadLabelError(
                    f"point shapes must be labeled 'intersection', got {label!r}"
                )
            intersections.append(
                IntersectionNode(id=f"i{len(intersections):03d}", center=points[0])
            )
        elif shape_type in ("line", "linestrip"):
            kind = _EDGE_LABELS.get(label)
            if kind is None:
                raise BadLabelError(
                    f"segment shapes must be labeled one of "
                    f"{sorted(_EDGE_LABELS)}, got {label!r}"
                )
            if len(points) < 2:
                raise BadLabelError(f"{label!r} segment needs at least 2 points")
            segments.append((kind, points[0], points[-1]))
        else:
            raise BadLabelError(f"unsupported shape type {shape_type!r}")

    nodes = [*landmarks, *intersections]
    if not nodes:
        raise ValidationFailedError("annotation document defines no nodes")

    edges = []
    for kind, head, tail in segments:
        a = _snap(head, nodes)
        b = _snap(tail, nodes)
        edges.append(Edge(a=a, b=b, kind=kind))

    if meta is None:
        flags = doc.get("flags") or {}
        meta = _meta_from_dict(
            {k: v for k, v in flags.items() if k in _META_ENUMS}, strict=False
        )
    meta_kwargs = {
        "scene_type": meta.scene_type,
        "projection": meta.projection,
        "landmark_style": meta.landmark_style,
        "traversable_style": meta.traversable_style,
        "image_path": doc.get("imagePath", meta.image_path),
    }
    if doc.get("imageWidth") and doc.get("imageHeight"):
        meta_kwargs["image_size"] = (int(doc["imageWidth"]), int(doc["imageHeight"]))
    else:
        meta_kwargs["image_size"] = meta.image_size

    if map_id is None:
        image_path = doc.get("imagePath")
        map_id = Path(image_path).stem if image_path else "annotated-map"

    try:
        graph = SceneGraph(
            map_id=map_id, nodes=nodes, edges=edges, meta=SceneMeta(**meta_kwargs)
        )
    except ReferentialError as exc:
        raise ValidationFailedError(f"annotation yields a broken graph: {exc}") from exc

    report = validate(graph)
    if not report.is_valid:
        raise ValidationFailedError(
            f"annotation yields an invalid graph: {[v.code for v in report.violations]}",
            report=report,
        )
    return graph


# -- file helpers ----------------------------------------------------------------


def graph_to_json(graph: SceneGraph) -> str:
    return json.dumps(export_native(graph), indent=2, ensure_ascii=False) + "\n"


def load_graph(
    path: str | Path, strict: bool = True, validate_graph: bool = True
) -> SceneGraph:
    """Load a graph file, auto-detecting native vs annotation documents."""
    with open(path, encoding="utf-8") as handle:
        doc = json.load(handle)
    if "shapes" in doc:
        return import_labelme(doc)
    return import_native(doc, strict=strict, validate_graph=validate_graph)


def load_graph_dir(
    path: str | Path, strict: bool = True, validate_graph: bool = True
) -> dict[str, SceneGraph]:
    graphs: dict[str, SceneGraph] = {}
    for file in sorted(Path(path).glob("*.json")):
        graph = load_graph(file, strict=strict, validate_graph=validate_graph)
        graphs[graph.map_id] = graph
    return graphs


def save_graph(graph: SceneGraph, path: str | Path) -> None:
    Path(path).write_text(graph_to_json(graph), encoding="utf-8")
