"""Scene-graph data model for human-readable maps.

A scene graph indexes a map image: named landmarks and unnamed road
intersections carry pixel coordinates, and typed edges record how they
relate (``connect`` roads between intersections, ``adjacent`` reachability
between a landmark and the road network, ``observable`` pure visibility).
Absence of an edge means the pair is unrelated, so storage stays sparse.

Paths are walked over the traversable subgraph (connect plus adjacent
edges); observable edges only feed narration context.  All types are
immutable after construction and safe to share across workers.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator

from .errors import (
    InvalidPathError,
    NoPathError,
    PathExplosionError,
    ReferentialError,
)

INTERSECTION_LABEL = "intersection"

#: Upper bound on simple-path enumeration before PATH_EXPLOSION is raised.
DEFAULT_PATH_CAP = 1_000_000


def normalize_label(label: str) -> str:
    """Case-fold, trim, and collapse internal whitespace."""
    return " ".join(label.strip().casefold().split())


class EdgeKind(str, Enum):
    CONNECT = "connect"
    ADJACENT = "adjacent"
    OBSERVABLE = "observable"


TRAVERSABLE_KINDS = frozenset({EdgeKind.CONNECT, EdgeKind.ADJACENT})


class SceneType(str, Enum):
    ZOO = "Zoo"
    MUSEUM = "Museum"
    NATIONAL_PARK = "NationalPark"
    CAMPUS = "Campus"
    GOOGLE_MAP = "GoogleMap"
    THEME_PARK = "ThemePark"
    TRAIL = "Trail"
    URBAN = "Urban"
    MALL = "Mall"


class Projection(str, Enum):
    ORTHOGRAPHIC = "Orthographic"
    OBLIQUE = "Oblique"


class LandmarkStyle(str, Enum):
    POINT = "Point"
    CONTOUR = "Contour"
    IMAGE = "Image"


class TraversableStyle(str, Enum):
    ROAD = "Road"
    AREA = "Area"


def _check_center(center: tuple[float, float]) -> None:
    x, y = center
    if not (math.isfinite(x) and math.isfinite(y)):
        raise ValueError(f"center coordinates must be finite, got {center!r}")
    if x < 0 or y < 0:
        raise ValueError(f"center coordinates must be non-negative, got {center!r}")


@dataclass(frozen=True)
class LandmarkNode:
    """A named map location covered by a circle of ``radius`` pixels."""

    id: str
    center: tuple[float, float]
    radius: float
    label: str

    def __post_init__(self):
        _check_center(self.center)
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise ValueError(f"landmark radius must be > 0, got {self.radius!r}")
        if not self.label.strip():
            raise ValueError("landmark label must be non-empty")


@dataclass(frozen=True)
class IntersectionNode:
    """An unnamed road junction; the label is the fixed constant."""

    id: str
    center: tuple[float, float]
    label: str = INTERSECTION_LABEL

    def __post_init__(self):
        _check_center(self.center)
        if self.label != INTERSECTION_LABEL:
            raise ValueError(
                f"intersection label must be {INTERSECTION_LABEL!r}, got {self.label!r}"
            )


Node = LandmarkNode | IntersectionNode


@dataclass(frozen=True)
class Edge:
    """Unordered node pair with a connectivity kind.

    ``road_label`` is an optional annotation extension carrying the printed
    road name; narration falls back to generic wording without it.
    """

    a: str
    b: str
    kind: EdgeKind
    road_label: str | None = None

    @property
    def pair(self) -> frozenset[str]:
        return frozenset((self.a, self.b))


@dataclass(frozen=True)
class SceneMeta:
    """Visual-style metadata for the underlying map image."""

    scene_type: SceneType = SceneType.URBAN
    projection: Projection = Projection.ORTHOGRAPHIC
    landmark_style: LandmarkStyle = LandmarkStyle.POINT
    traversable_style: TraversableStyle = TraversableStyle.ROAD
    image_path: str | None = None
    image_size: tuple[int, int] | None = None


@dataclass(frozen=True)
class GraphPath:
    """An ordered node sequence; length is counted in hops (edges)."""

    nodes: tuple[str, ...]

    def __post_init__(self):
        if len(self.nodes) < 2:
            raise ValueError("a path needs at least two nodes")

    @property
    def hops(self) -> int:
        return len(self.nodes) - 1

    @property
    def start(self) -> str:
        return self.nodes[0]

    @property
    def end(self) -> str:
        return self.nodes[-1]

    def __iter__(self) -> Iterator[str]:
        return iter(self.nodes)


class SceneGraph:
    """Immutable scene graph over landmarks and intersections.

    The constructor enforces structural well-formedness only (ids resolve,
    no self loops, at most one edge per pair); the connectivity rules are
    checked separately by :func:`validate` so broken graphs can still be
    loaded and reported on.
    """

    def __init__(
        self,
        map_id: str,
        nodes: Iterable[Node],
        edges: Iterable[Edge],
        meta: SceneMeta | None = None,
    ):
        self.map_id = map_id
        self.meta = meta if meta is not None else SceneMeta()

        node_map: dict[str, Node] = {}
        for node in nodes:
            if node.id in node_map:
                raise ReferentialError(f"duplicate node id {node.id!r}", node=node.id)
            node_map[node.id] = node

        edge_list: list[Edge] = []
        kind_by_pair: dict[frozenset[str], Edge] = {}
        for edge in edges:
            if edge.a == edge.b:
                raise ReferentialError(f"self-loop on node {edge.a!r}", node=edge.a)
            for end in (edge.a, edge.b):
                if end not in node_map:
                    raise ReferentialError(
                        f"edge endpoint {end!r} is not a node", node=end
                    )
            if edge.pair in kind_by_pair:
                raise ReferentialError(
                    f"duplicate edge between {edge.a!r} and {edge.b!r}",
                    a=edge.a,
                    b=edge.b,
                )
            kind_by_pair[edge.pair] = edge
            edge_list.append(edge)

        self._nodes: dict[str, Node] = node_map
        self._edges: tuple[Edge, ...] = tuple(edge_list)
        self._edge_by_pair = kind_by_pair

        adj: dict[str, list[str]] = {node_id: [] for node_id in node_map}
        obs: dict[str, list[str]] = {node_id: [] for node_id in node_map}
        for edge in edge_list:
            target = adj if edge.kind in TRAVERSABLE_KINDS else obs
            target[edge.a].append(edge.b)
            target[edge.b].append(edge.a)
        self._adjacent = {k: tuple(sorted(v)) for k, v in adj.items()}
        self._observable = {k: tuple(sorted(v)) for k, v in obs.items()}

    # -- accessors ---------------------------------------------------------

    @property
    def nodes(self) -> tuple[Node, ...]:
        return tuple(self._nodes.values())

    @property
    def edges(self) -> tuple[Edge, ...]:
        return self._edges

    def node(self, node_id: str) -> Node:
        try:
            return self._nodes[node_id]
        except KeyError:
            raise ReferentialError(f"unknown node id {node_id!r}", node=node_id) from None

    def has_node(self, node_id: str) -> bool:
        return node_id in self._nodes

    def is_landmark(self, node_id: str) -> bool:
        return isinstance(self.node(node_id), LandmarkNode)

    @property
    def landmarks(self) -> tuple[LandmarkNode, ...]:
        return tuple(
            n for n in self._nodes.values() if isinstance(n, LandmarkNode)
        )

    @property
    def intersections(self) -> tuple[IntersectionNode, ...]:
        return tuple(
            n for n in self._nodes.values() if isinstance(n, IntersectionNode)
        )

    def label_of(self, node_id: str) -> str:
        return self.node(node_id).label

    def neighbors(self, node_id: str) -> tuple[str, ...]:
        """Traversable neighbors (connect and adjacent edges), id-sorted."""
        self.node(node_id)
        return self._adjacent[node_id]

    def observable_neighbors(self, node_id: str) -> tuple[str, ...]:
        self.node(node_id)
        return self._observable[node_id]

    def edge_between(self, a: str, b: str) -> Edge | None:
        return self._edge_by_pair.get(frozenset((a, b)))

    def edge_kind(self, a: str, b: str) -> EdgeKind | None:
        edge = self.edge_between(a, b)
        return edge.kind if edge is not None else None

    def landmark_by_label(self, label: str) -> LandmarkNode | None:
        """Exact lookup after normalization; ambiguity resolved by node id."""
        wanted = normalize_label(label)
        hits = [
            n
            for n in self.landmarks
            if normalize_label(n.label) == wanted
        ]
        return min(hits, key=lambda n: n.id) if hits else None

    def _edge_keys(self) -> set[tuple]:
        # Endpoint order within an edge is not meaningful.
        return {
            (*sorted(e.pair), e.kind.value, e.road_label) for e in self._edges
        }

    def __eq__(self, other) -> bool:
        if not isinstance(other, SceneGraph):
            return NotImplemented
        return (
            self.map_id == other.map_id
            and self.meta == other.meta
            and sorted(self._nodes.values(), key=lambda n: n.id)
            == sorted(other._nodes.values(), key=lambda n: n.id)
            and self._edge_keys() == other._edge_keys()
        )

    def __hash__(self):
        return hash((self.map_id, len(self._nodes), len(self._edges)))

    def __repr__(self):
        return (
            f"SceneGraph({self.map_id!r}, {len(self._nodes)} nodes, "
            f"{len(self._edges)} edges)"
        )


# -- validation -------------------------------------------------------------

LANDMARK_ISOLATED = "LANDMARK_ISOLATED"
INTERSECTION_ISOLATED = "INTERSECTION_ISOLATED"
INTERSECTION_UNDERCONNECTED = "INTERSECTION_UNDERCONNECTED"
GRAPH_DISCONNECTED = "GRAPH_DISCONNECTED"
EDGE_KIND_MISMATCH = "EDGE_KIND_MISMATCH"
DUPLICATE_LABEL = "DUPLICATE_LABEL"

SEVERITY_ERROR = "error"
SEVERITY_WARNING = "warning"


@dataclass(frozen=True)
class Violation:
    code: str
    severity: str
    subject: tuple[str, ...]
    message: str


@dataclass(frozen=True)
class ValidationReport:
    """All findings from one validation pass, errors and warnings."""

    records: tuple[Violation, ...]

    @property
    def violations(self) -> tuple[Violation, ...]:
        return tuple(r for r in self.records if r.severity == SEVERITY_ERROR)

    @property
    def warnings(self) -> tuple[Violation, ...]:
        return tuple(r for r in self.records if r.severity == SEVERITY_WARNING)

    @property
    def is_valid(self) -> bool:
        return not self.violations

    def codes(self) -> tuple[str, ...]:
        return tuple(r.code for r in self.violations)


def validate(graph: SceneGraph, strict_degree: bool = False) -> ValidationReport:
    """Check the connectivity rules; one record per broken invariant.

    Rules: every landmark has at least one adjacent edge; every intersection
    has at least one connect edge; the traversable subgraph is connected
    over all nodes; edge kinds respect node types; landmark labels are
    unique after normalization.

    An intersection whose connect-degree is exactly 1 is treated as an
    "end" of a road and reported at warning severity; pass
    ``strict_degree=True`` to escalate those findings to errors.

    Nodes already reported isolated are left out of the connectivity check,
    so one defect yields one record.
    """
    records: list[Violation] = []
    isolated: set[str] = set()

    connect_degree: dict[str, int] = {n.id: 0 for n in graph.nodes}
    adjacent_degree: dict[str, int] = {n.id: 0 for n in graph.nodes}
    for edge in graph.edges:
        if edge.kind is EdgeKind.CONNECT:
            connect_degree[edge.a] += 1
            connect_degree[edge.b] += 1
        elif edge.kind is EdgeKind.ADJACENT:
            adjacent_degree[edge.a] += 1
            adjacent_degree[edge.b] += 1

    for node in sorted(graph.landmarks, key=lambda n: n.id):
        if adjacent_degree[node.id] == 0:
            isolated.add(node.id)
            records.append(
                Violation(
                    LANDMARK_ISOLATED,
                    SEVERITY_ERROR,
                    (node.id,),
                    f"landmark {node.label!r} has no adjacent edge",
                )
            )

    for node in sorted(graph.intersections, key=lambda n: n.id):
        degree = connect_degree[node.id]
        if degree == 0:
            isolated.add(node.id)
            records.append(
                Violation(
                    INTERSECTION_ISOLATED,
                    SEVERITY_ERROR,
                    (node.id,),
                    f"intersection {node.id!r} has no connect edge",
                )
            )
        elif degree == 1:
            severity = SEVERITY_ERROR if strict_degree else SEVERITY_WARNING
            records.append(
                Violation(
                    INTERSECTION_UNDERCONNECTED,
                    severity,
                    (node.id,),
                    f"intersection {node.id!r} has connect-degree 1 (road end)",
                )
            )

    for edge in sorted(graph.edges, key=lambda e: tuple(sorted(e.pair))):
        both_intersections = not graph.is_landmark(edge.a) and not graph.is_landmark(
            edge.b
        )
        if edge.kind is EdgeKind.CONNECT and not both_intersections:
            records.append(
                Violation(
                    EDGE_KIND_MISMATCH,
                    SEVERITY_ERROR,
                    tuple(sorted(edge.pair)),
                    f"connect edge {edge.a!r}-{edge.b!r} must join two intersections",
                )
            )
        elif edge.kind is not EdgeKind.CONNECT and both_intersections:
            records.append(
                Violation(
                    EDGE_KIND_MISMATCH,
                    SEVERITY_ERROR,
                    tuple(sorted(edge.pair)),
                    f"{edge.kind.value} edge {edge.a!r}-{edge.b!r} must touch a landmark",
                )
            )

    seen: dict[str, list[str]] = {}
    for node in graph.landmarks:
        seen.setdefault(normalize_label(node.label), []).append(node.id)
    for norm, ids in sorted(seen.items()):
        if len(ids) > 1:
            records.append(
                Violation(
                    DUPLICATE_LABEL,
                    SEVERITY_ERROR,
                    tuple(sorted(ids)),
                    f"label {norm!r} is shared by {len(ids)} landmarks",
                )
            )

    components = _traversable_components(graph, exclude=isolated)
    if len(components) > 1:
        reps = tuple(sorted(min(c) for c in components))
        records.append(
            Violation(
                GRAPH_DISCONNECTED,
                SEVERITY_ERROR,
                reps,
                f"traversable subgraph splits into {len(components)} components",
            )
        )

    return ValidationReport(tuple(records))


def _traversable_components(
    graph: SceneGraph, exclude: set[str] = frozenset()
) -> list[set[str]]:
    remaining = set(n.id for n in graph.nodes) - exclude
    components: list[set[str]] = []
    while remaining:
        root = min(remaining)
        seen = {root}
        queue = deque([root])
        while queue:
            current = queue.popleft()
            for nbr in graph.neighbors(current):
                if nbr not in seen:
                    seen.add(nbr)
                    queue.append(nbr)
        components.append(seen)
        remaining -= seen
    return components


# -- path algorithms ---------------------------------------------------------


def _hop_distances(graph: SceneGraph, source: str) -> dict[str, int]:
    """Breadth-first hop counts from ``source`` over traversable edges."""
    dist = {source: 0}
    queue = deque([source])
    while queue:
        current = queue.popleft()
        for nbr in graph.neighbors(current):
            if nbr not in dist:
                dist[nbr] = dist[current] + 1
                queue.append(nbr)
    return dist


def shortest_path(graph: SceneGraph, s: str, t: str) -> GraphPath:
    """Minimum-hop traversable path from ``s`` to ``t``.

    Ties between equal-length paths are broken by the lexicographically
    smallest node-id sequence, so results are reproducible.
    """
    graph.node(s)
    graph.node(t)
    if s == t:
        raise ValueError("start and end must differ")

    dist_to_t = _hop_distances(graph, t)
    if s not in dist_to_t:
        raise NoPathError(f"no traversable path from {s!r} to {t!r}", s=s, t=t)

    nodes = [s]
    current = s
    while current != t:
        # Neighbors are id-sorted, so the first one on a shortest route is
        # the lexicographic choice.
        current = next(
            nbr
            for nbr in graph.neighbors(current)
            if dist_to_t.get(nbr, -1) == dist_to_t[current] - 1
        )
        nodes.append(current)
    return GraphPath(tuple(nodes))


def all_simple_paths(
    graph: SceneGraph, s: str, t: str, cap: int = DEFAULT_PATH_CAP
) -> list[GraphPath]:
    """Every simple traversable path from ``s`` to ``t``, depth-first.

    Enumeration visits id-sorted neighbors, so the output order is
    deterministic.  Raises :class:`PathExplosionError` once more than
    ``cap`` paths exist, which signals the graph is outside the intended
    size regime.
    """
    graph.node(s)
    graph.node(t)
    if s == t:
        raise ValueError("start and end must differ")
    if cap < 1:
        raise ValueError("cap must be at least 1")

    found: list[GraphPath] = []
    trail = [s]
    on_trail = {s}

    def extend(current: str) -> None:
        for nbr in graph.neighbors(current):
            if nbr == t:
                if len(found) >= cap:
                    raise PathExplosionError(
                        f"more than {cap} simple paths between {s!r} and {t!r}",
                        s=s,
                        t=t,
                        cap=cap,
                    )
                found.append(GraphPath((*trail, t)))
            elif nbr not in on_trail:
                trail.append(nbr)
                on_trail.add(nbr)
                extend(nbr)
                trail.pop()
                on_trail.remove(nbr)

    extend(s)
    return found


def check_path(graph: SceneGraph, path: GraphPath) -> None:
    """Raise :class:`InvalidPathError` unless every hop is traversable."""
    for a, b in zip(path.nodes, path.nodes[1:]):
        kind = graph.edge_kind(a, b)
        if kind is None or kind not in TRAVERSABLE_KINDS:
            raise InvalidPathError(
                f"hop {a!r}-{b!r} is not a traversable edge", a=a, b=b
            )
