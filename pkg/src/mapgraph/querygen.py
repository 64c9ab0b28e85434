"""Benchmark query sampling and dataset statistics.

Queries are unordered landmark pairs sampled uniformly without replacement
from a seeded generator, each expanded into a fixed number of repeats.
Candidate filtering is purely deterministic (distinct landmarks, reachable
pair), so regenerating with the same seed reproduces the byte-identical
query set.
"""

from __future__ import annotations

import csv
import io
import json
import random
import statistics
import warnings
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping

from . import core, metrics
from .core import SceneGraph
from .errors import DegenerateRangeWarning, TooFewLandmarksError
from .metrics import DifficultyLabel


@dataclass(frozen=True)
class Query:
    query_id: str
    map_id: str
    start: str
    end: str
    repeat: int
    qdi: float | None = None
    difficulty: str | None = None

    def __post_init__(self):
        if self.start == self.end:
            raise ValueError("query endpoints must differ")

    def to_dict(self) -> dict:
        return {
            "query_id": self.query_id,
            "map_id": self.map_id,
            "start": self.start,
            "end": self.end,
            "repeat": self.repeat,
            "qdi": self.qdi,
            "difficulty": self.difficulty,
        }


def generate_queries(
    graph: SceneGraph,
    pairs: int = 20,
    repeats: int = 3,
    seed: int = 0,
    ordered: bool = False,
) -> list[Query]:
    """Sample start-destination landmark pairs and expand into repeats.

    With ``ordered`` both directions of a pair are eligible; by default a
    pair is sampled at most once regardless of direction.  If fewer
    candidate pairs exist than requested, all of them are used.
    """
    if pairs < 1 or repeats < 1:
        raise ValueError("pairs and repeats must be positive")
    landmark_ids = sorted(n.id for n in graph.landmarks)
    if len(landmark_ids) < 2:
        raise TooFewLandmarksError(
            f"graph {graph.map_id!r} has {len(landmark_ids)} landmarks; need 2"
        )

    candidates = list(combinations(landmark_ids, 2))
    if ordered:
        candidates = candidates + [(b, a) for a, b in candidates]
        candidates.sort()

    rng = random.Random(seed)
    count = min(pairs, len(candidates))
    sampled = rng.sample(candidates, count)

    queries: list[Query] = []
    for index, (start, end) in enumerate(sampled):
        # Validity is implied for valid graphs; assert it anyway so broken
        # inputs fail loudly instead of producing unanswerable queries.
        core.shortest_path(graph, start, end)
        for repeat in range(1, repeats + 1):
            queries.append(
                Query(
                    query_id=f"{graph.map_id}-q{index:03d}-r{repeat}",
                    map_id=graph.map_id,
                    start=start,
                    end=end,
                    repeat=repeat,
                )
            )
    return queries


def queries_to_jsonl(queries: Iterable[Query]) -> str:
    return "".join(
        json.dumps(q.to_dict(), ensure_ascii=False) + "\n" for q in queries
    )


def read_queries_jsonl(text: str) -> list[Query]:
    queries = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        doc = json.loads(line)
        queries.append(
            Query(
                query_id=doc["query_id"],
                map_id=doc["map_id"],
                start=doc["start"],
                end=doc["end"],
                repeat=int(doc.get("repeat", 1)),
                qdi=doc.get("qdi"),
                difficulty=doc.get("difficulty"),
            )
        )
    return queries


# -- dataset statistics --------------------------------------------------------


@dataclass(frozen=True)
class StatsRow:
    section: str
    name: str
    count: int
    percentage: float | None


@dataclass(frozen=True)
class DatasetStats:
    """Counts and percentages in the shape of a dataset summary table."""

    maps_total: int
    maps_by_projection: Mapping[str, int]
    queries_total: int
    queries_by_scene: Mapping[str, int]
    queries_by_difficulty: Mapping[str, int]
    graphs_by_difficulty: Mapping[str, int]

    def rows(self) -> list[StatsRow]:
        def pct(count: int, total: int) -> float | None:
            return 100.0 * count / total if total else None

        rows = [StatsRow("maps", "Total Map images", self.maps_total, None)]
        for name, count in sorted(self.maps_by_projection.items()):
            rows.append(StatsRow("maps", name, count, pct(count, self.maps_total)))
        rows.append(StatsRow("queries", "Total Queries", self.queries_total, None))
        for name, count in sorted(self.queries_by_scene.items()):
            rows.append(
                StatsRow("queries", name, count, pct(count, self.queries_total))
            )
        for name, count in sorted(self.queries_by_difficulty.items()):
            rows.append(
                StatsRow(
                    "query_difficulty", name, count, pct(count, self.queries_total)
                )
            )
        for name, count in sorted(self.graphs_by_difficulty.items()):
            rows.append(
                StatsRow("graph_difficulty", name, count, pct(count, self.maps_total))
            )
        return rows

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["section", "name", "count", "percentage"])
        for row in self.rows():
            writer.writerow(
                [
                    row.section,
                    row.name,
                    row.count,
                    "" if row.percentage is None else f"{row.percentage:.2f}",
                ]
            )
        return buffer.getvalue()

    def to_json(self) -> str:
        return json.dumps(
            {
                "maps_total": self.maps_total,
                "maps_by_projection": dict(sorted(self.maps_by_projection.items())),
                "queries_total": self.queries_total,
                "queries_by_scene": dict(sorted(self.queries_by_scene.items())),
                "queries_by_difficulty": dict(
                    sorted(self.queries_by_difficulty.items())
                ),
                "graphs_by_difficulty": dict(
                    sorted(self.graphs_by_difficulty.items())
                ),
            },
            indent=2,
            ensure_ascii=False,
        )

    def to_table(self) -> str:
        lines = [f"{'Statistics':40s} {'Number':>8s} {'Percentage':>11s}"]

        def emit(row: StatsRow) -> None:
            pct = "--" if row.percentage is None else f"{row.percentage:.2f} %"
            indent = "" if row.percentage is None else "  * "
            lines.append(f"{indent + row.name:40s} {row.count:>8d} {pct:>11s}")

        rows = self.rows()
        for section, heading in (
            ("maps", None),
            ("queries", None),
            ("query_difficulty", "Query Difficulty:"),
            ("graph_difficulty", "Graph Difficulty:"),
        ):
            section_rows = [r for r in rows if r.section == section]
            if heading and section_rows:
                lines.append(heading)
            for row in section_rows:
                emit(row)
        return "\n".join(lines) + "\n"


def _graph_difficulty_labels(
    graphs: Mapping[str, SceneGraph],
) -> dict[str, DifficultyLabel]:
    if not graphs:
        return {}
    if len(graphs) < 2:
        warnings.warn(
            "single graph: difficulty defaults to Easy (degenerate range)",
            DegenerateRangeWarning,
            stacklevel=2,
        )
        return {map_id: DifficultyLabel.EASY for map_id in graphs}
    rows = []
    for map_id, graph in sorted(graphs.items()):
        complexity = metrics.graph_complexity(graph)
        rows.append((map_id, float(complexity.ei), complexity.mi, complexity.aspli))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateRangeWarning)
        return metrics.classify_graph_difficulty(rows)


def _query_difficulty_labels(
    graphs: Mapping[str, SceneGraph], queries: list[Query]
) -> dict[str, DifficultyLabel]:
    """Scene-level labels; every query inherits its scene's label."""
    scene_values: dict[str, list[float]] = {}
    for query in queries:
        graph = graphs.get(query.map_id)
        if graph is None:
            continue
        value = (
            query.qdi
            if query.qdi is not None
            else metrics.qdi(graph, query.start, query.end)
        )
        scene_values.setdefault(graph.meta.scene_type.value, []).append(value)
    if not scene_values:
        return {}
    if len(scene_values) < 2:
        warnings.warn(
            "single scene: query difficulty defaults to Easy (degenerate range)",
            DegenerateRangeWarning,
            stacklevel=2,
        )
        return {scene: DifficultyLabel.EASY for scene in scene_values}
    rows = [
        (scene, statistics.fmean(values), statistics.pvariance(values))
        for scene, values in sorted(scene_values.items())
    ]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateRangeWarning)
        return metrics.classify_query_difficulty(rows)


def dataset_stats(
    graphs: Mapping[str, SceneGraph], queries: list[Query]
) -> DatasetStats:
    """Tabulate scene, projection, and difficulty distributions.

    Graph difficulty is classified per map across all supplied maps; query
    difficulty uses a query's own label when present, otherwise the label
    of its scene (classified from per-scene QDI mean and variance).
    """
    maps_by_projection: dict[str, int] = {}
    for graph in graphs.values():
        key = graph.meta.projection.value
        maps_by_projection[key] = maps_by_projection.get(key, 0) + 1

    queries_by_scene: dict[str, int] = {}
    for query in queries:
        graph = graphs.get(query.map_id)
        scene = graph.meta.scene_type.value if graph else "unknown"
        queries_by_scene[scene] = queries_by_scene.get(scene, 0) + 1

    graph_labels = _graph_difficulty_labels(graphs)
    graphs_by_difficulty: dict[str, int] = {}
    for label in graph_labels.values():
        graphs_by_difficulty[label.value] = graphs_by_difficulty.get(label.value, 0) + 1

    scene_labels = _query_difficulty_labels(graphs, queries) if queries else {}
    queries_by_difficulty: dict[str, int] = {}
    for query in queries:
        if query.difficulty:
            label = query.difficulty
        else:
            graph = graphs.get(query.map_id)
            scene = graph.meta.scene_type.value if graph else None
            label = scene_labels[scene].value if scene in scene_labels else "unlabeled"
        queries_by_difficulty[label] = queries_by_difficulty.get(label, 0) + 1

    return DatasetStats(
        maps_total=len(graphs),
        maps_by_projection=maps_by_projection,
        queries_total=len(queries),
        queries_by_scene=queries_by_scene,
        queries_by_difficulty=queries_by_difficulty,
        graphs_by_difficulty=graphs_by_difficulty,
    )
