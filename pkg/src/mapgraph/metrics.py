"""Complexity indices, path-quality scoring, and difficulty classification.

Index definitions:

* elements index: total node count plus total stored edge count.
* meshedness index: cycle count of the traversable subgraph relative to the
  planar maximum, ``(|E| - |V| + 1) / (2|V| - 5)``.  Observable edges carry
  no traversal semantics, so they do not create cycles and are excluded.
* average shortest path length index: mean hop distance over all ordered
  node pairs.
* query difficulty index: mean hop length over all simple paths between a
  query's two landmarks.
* path quality score: candidate hop length divided by the shortest-path hop
  length; 1.0 is optimal.

Scene-level difficulty labels come from min-max normalizing each index over
the supplied rows, averaging with equal weights, and cutting at 0.33/0.66.
"""

from __future__ import annotations

import csv
import io
import json
import statistics
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Sequence

from . import core
from .core import DEFAULT_PATH_CAP, GraphPath, SceneGraph
from .errors import (
    DegenerateRangeWarning,
    DisconnectedGraphError,
    EndpointMismatchError,
)


def elements_index(graph: SceneGraph) -> int:
    """Node count plus stored edge count (all kinds)."""
    return len(graph.nodes) + len(graph.edges)


def _traversable_edge_count(graph: SceneGraph) -> int:
    return sum(1 for e in graph.edges if e.kind in core.TRAVERSABLE_KINDS)


def meshedness_index(graph: SceneGraph) -> float:
    """Cycle richness of the traversable subgraph; 0 for fewer than 3 nodes."""
    n = len(graph.nodes)
    if n < 3:
        return 0.0
    return (_traversable_edge_count(graph) - n + 1) / (2 * n - 5)


def aspli(graph: SceneGraph) -> float:
    """Mean hop distance over all ordered node pairs.

    Distances are symmetric, so this equals the mean over unordered pairs.
    The integer distance sum is divided exactly once to keep results
    bit-reproducible.
    """
    ids = sorted(n.id for n in graph.nodes)
    n = len(ids)
    if n < 2:
        return 0.0
    total = 0
    for source in ids:
        dist = core._hop_distances(graph, source)
        if len(dist) != n:
            missing = sorted(set(ids) - set(dist))
            raise DisconnectedGraphError(
                f"nodes unreachable from {source!r}: {missing}", source=source
            )
        total += sum(dist.values())
    return total / (n * (n - 1))


def qdi(graph: SceneGraph, s: str, t: str, cap: int = DEFAULT_PATH_CAP) -> float:
    """Mean hop length over all simple paths between two landmarks."""
    for node_id in (s, t):
        if not graph.is_landmark(node_id):
            raise ValueError(f"query endpoints must be landmarks, got {node_id!r}")
    paths = core.all_simple_paths(graph, s, t, cap=cap)
    return sum(p.hops for p in paths) / len(paths)


def pqs(graph: SceneGraph, candidate: GraphPath, s: str, t: str) -> float:
    """Candidate hop length relative to the shortest path; always >= 1."""
    if candidate.start != s or candidate.end != t:
        raise EndpointMismatchError(
            f"candidate runs {candidate.start!r}->{candidate.end!r}, "
            f"query asks {s!r}->{t!r}",
            s=s,
            t=t,
        )
    core.check_path(graph, candidate)
    return candidate.hops / core.shortest_path(graph, s, t).hops


# -- difficulty classification ------------------------------------------------


class DifficultyLabel(str, Enum):
    EASY = "Easy"
    MEDIUM = "Medium"
    HARD = "Hard"


EASY_BELOW = 0.33
HARD_ABOVE = 0.66


def difficulty_from_score(score: float) -> DifficultyLabel:
    """Easy strictly below 0.33, Hard strictly above 0.66, Medium between."""
    if score < EASY_BELOW:
        return DifficultyLabel.EASY
    if score > HARD_ABOVE:
        return DifficultyLabel.HARD
    return DifficultyLabel.MEDIUM


def _minmax(values: Sequence[float], column: str) -> list[float]:
    lo, hi = min(values), max(values)
    if hi == lo:
        warnings.warn(
            f"index {column!r} is constant across rows; normalized to 0",
            DegenerateRangeWarning,
            stacklevel=3,
        )
        return [0.0 for _ in values]
    return [(v - lo) / (hi - lo) for v in values]


def _classify(
    rows: Sequence[tuple], n_indices: int
) -> dict[str, DifficultyLabel]:
    if len(rows) < 2:
        raise ValueError("need at least two rows for min-max normalization")
    for row in rows:
        for value in row[1:]:
            if value != value:  # NaN
                raise ValueError(f"NaN index value in row {row[0]!r}")
    columns = [
        _minmax([row[i + 1] for row in rows], f"index{i}") for i in range(n_indices)
    ]
    labels: dict[str, DifficultyLabel] = {}
    for r, row in enumerate(rows):
        score = sum(col[r] for col in columns) / n_indices
        labels[row[0]] = difficulty_from_score(score)
    return labels


def classify_graph_difficulty(
    scene_rows: Sequence[tuple[str, float, float, float]],
) -> dict[str, DifficultyLabel]:
    """Label scenes from (scene, mean EI, mean MI, mean ASPLI) rows."""
    return _classify(scene_rows, 3)


def classify_query_difficulty(
    scene_rows: Sequence[tuple[str, float, float]],
) -> dict[str, DifficultyLabel]:
    """Label scenes from (scene, mean QDI, variance QDI) rows."""
    return _classify(scene_rows, 2)


# -- aggregate report ----------------------------------------------------------


@dataclass(frozen=True)
class GraphComplexity:
    ei: int
    mi: float
    aspli: float


@dataclass(frozen=True)
class SceneRow:
    scene: str
    ei: float
    mi: float
    aspli: float
    graph_difficulty: str
    qdi_mean: float | None = None
    qdi_min: float | None = None
    qdi_max: float | None = None
    qdi_var: float | None = None
    query_difficulty: str = ""


_CSV_COLUMNS = (
    "scene",
    "ei",
    "mi",
    "aspli",
    "graph_difficulty",
    "qdi_mean",
    "qdi_min",
    "qdi_max",
    "qdi_var",
    "query_difficulty",
)


@dataclass(frozen=True)
class ComplexityReport:
    """Per-graph indices, per-query difficulty values, per-scene aggregates."""

    per_graph: Mapping[str, GraphComplexity]
    per_query_qdi: Mapping[str, float]
    scenes: tuple[SceneRow, ...]

    @staticmethod
    def _fmt(value) -> str:
        if value is None:
            return ""
        if isinstance(value, float):
            return f"{value:.4f}"
        return str(value)

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(_CSV_COLUMNS)
        for row in self.scenes:
            writer.writerow(
                [self._fmt(getattr(row, column)) for column in _CSV_COLUMNS]
            )
        return buffer.getvalue()

    def to_json(self) -> str:
        doc = {
            "per_graph": {
                map_id: {"ei": c.ei, "mi": c.mi, "aspli": c.aspli}
                for map_id, c in sorted(self.per_graph.items())
            },
            "per_query_qdi": dict(sorted(self.per_query_qdi.items())),
            "scenes": [
                {column: getattr(row, column) for column in _CSV_COLUMNS}
                for row in self.scenes
            ],
        }
        return json.dumps(doc, indent=2, ensure_ascii=False)

    def to_table(self) -> str:
        header = list(_CSV_COLUMNS)
        body = [
            [self._fmt(getattr(row, column)) for column in _CSV_COLUMNS]
            for row in self.scenes
        ]
        widths = [
            max(len(header[i]), *(len(r[i]) for r in body)) if body else len(header[i])
            for i in range(len(header))
        ]
        lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip()]
        for r in body:
            lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
        return "\n".join(lines) + "\n"


def graph_complexity(graph: SceneGraph) -> GraphComplexity:
    return GraphComplexity(
        ei=elements_index(graph), mi=meshedness_index(graph), aspli=aspli(graph)
    )


def build_report(
    graphs: Mapping[str, SceneGraph],
    queries: Iterable = (),
    cap: int = DEFAULT_PATH_CAP,
) -> ComplexityReport:
    """Compute indices for every graph and query, then aggregate per scene.

    Difficulty labels need at least two scenes to normalize over; with a
    single scene the label columns are left blank.
    """
    per_graph = {
        map_id: graph_complexity(graph) for map_id, graph in sorted(graphs.items())
    }

    per_query: dict[str, float] = {}
    scene_qdis: dict[str, list[float]] = {}
    for query in queries:
        if query.map_id not in graphs:
            raise ValueError(
                f"query {query.query_id!r} references unknown graph "
                f"{query.map_id!r}"
            )
        graph = graphs[query.map_id]
        value = qdi(graph, query.start, query.end, cap=cap)
        per_query[query.query_id] = value
        scene = graph.meta.scene_type.value
        scene_qdis.setdefault(scene, []).append(value)

    scene_indices: dict[str, list[GraphComplexity]] = {}
    for map_id, complexity in per_graph.items():
        scene = graphs[map_id].meta.scene_type.value
        scene_indices.setdefault(scene, []).append(complexity)

    scene_means = {
        scene: (
            statistics.fmean(c.ei for c in items),
            statistics.fmean(c.mi for c in items),
            statistics.fmean(c.aspli for c in items),
        )
        for scene, items in sorted(scene_indices.items())
    }

    graph_labels: dict[str, DifficultyLabel] = {}
    if len(scene_means) >= 2:
        graph_labels = classify_graph_difficulty(
            [(scene, *means) for scene, means in scene_means.items()]
        )

    query_stats = {
        scene: (statistics.fmean(values), statistics.pvariance(values))
        for scene, values in sorted(scene_qdis.items())
    }
    query_labels: dict[str, DifficultyLabel] = {}
    if len(query_stats) >= 2:
        query_labels = classify_query_difficulty(
            [(scene, mean, var) for scene, (mean, var) in query_stats.items()]
        )

    rows = []
    for scene, (mean_ei, mean_mi, mean_aspli) in scene_means.items():
        qdi_values = scene_qdis.get(scene)
        rows.append(
            SceneRow(
                scene=scene,
                ei=mean_ei,
                mi=mean_mi,
                aspli=mean_aspli,
                graph_difficulty=(
                    graph_labels[scene].value if scene in graph_labels else ""
                ),
                qdi_mean=statistics.fmean(qdi_values) if qdi_values else None,
                qdi_min=min(qdi_values) if qdi_values else None,
                qdi_max=max(qdi_values) if qdi_values else None,
                qdi_var=statistics.pvariance(qdi_values) if qdi_values else None,
                query_difficulty=(
                    query_labels[scene].value if scene in query_labels else ""
                ),
            )
        )
    return ComplexityReport(
        per_graph=per_graph, per_query_qdi=per_query, scenes=tuple(rows)
    )
