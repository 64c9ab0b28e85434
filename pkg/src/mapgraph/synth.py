"""Seeded random scene graphs plus brute-force reference algorithms.

The generator always emits graphs that pass validation, which makes it the
workhorse for property tests.  The reference algorithms at the bottom are
deliberately naive (matrix relaxation, bare recursion) and share no code
with :mod:`mapgraph.core`; they exist to cross-check the production path
algorithms, so keeping them independent is the point.
"""

from __future__ import annotations

import math
import random

from .core import (
    Edge,
    EdgeKind,
    GraphPath,
    IntersectionNode,
    LandmarkNode,
    SceneGraph,
    SceneMeta,
    SceneType,
)

_ADJECTIVES = (
    "Amber", "Birch", "Cedar", "Dusty", "Eastern", "Fern", "Golden", "Hazel",
    "Iron", "Jade", "Kestrel", "Lilac", "Maple", "Northern", "Opal", "Pine",
    "Quiet", "Raven", "Silver", "Tulip", "Umber", "Violet", "Willow", "Zephyr",
)

_NOUNS = (
    "Arch", "Bridge", "Café", "Dock", "Exhibit", "Fountain", "Garden", "Hall",
    "Inn", "Junction Store", "Kiosk", "Lawn", "Meadow", "Nook", "Overlook",
    "Pavilion", "Quarry", "Rotunda", "Stage", "Terrace", "Under Pass",
    "Vista", "Workshop", "Yard",
)

_ROADS = (
    "Main Path", "River Road", "Garden Walk", "Old Trail", "Hill Street",
    "Lake Loop", "Forest Lane", "Market Row",
)


def _labels(rng: random.Random, count: int) -> list[str]:
    combos = [f"{a} {n}" for a in _ADJECTIVES for n in _NOUNS]
    rng.shuffle(combos)
    if count <= len(combos):
        return combos[:count]
    extra = [f"{combos[i % len(combos)]} {i}" for i in range(count - len(combos))]
    return combos + extra


def generate(
    seed: int,
    n_intersections: int = 5,
    n_landmarks: int = 4,
    extra_edges: int = 0,
    canvas: tuple[float, float] = (1000.0, 800.0),
    observable_rate: float = 0.15,
    scene_type: SceneType = SceneType.URBAN,
    map_id: str | None = None,
) -> SceneGraph:
    """Random valid scene graph: an intersection spanning tree, ``extra_edges``
    chords, each landmark adjacent to its nearest intersection, and a seeded
    sprinkling of observable edges."""
    if n_intersections < 2:
        raise ValueError("need at least 2 intersections")
    if n_landmarks < 2:
        raise ValueError("need at least 2 landmarks")

    rng = random.Random(seed)
    width, height = canvas

    intersections = [
        IntersectionNode(
            id=f"i{idx:02d}",
            center=(round(rng.uniform(0, width), 1), round(rng.uniform(0, height), 1)),
        )
        for idx in range(n_intersections)
    ]
    landmarks = [
        LandmarkNode(
            id=f"l{idx:02d}",
            center=(round(rng.uniform(0, width), 1), round(rng.uniform(0, height), 1)),
            radius=round(rng.uniform(8, 40), 1),
            label=label,
        )
        for idx, label in enumerate(_labels(rng, n_landmarks))
    ]

    edges: list[Edge] = []
    # Random recursive tree keeps every intersection connected.
    for idx in range(1, n_intersections):
        other = intersections[rng.randrange(idx)]
        edges.append(
            Edge(
                intersections[idx].id,
                other.id,
                EdgeKind.CONNECT,
                road_label=rng.choice(_ROADS),
            )
        )

    existing = {frozenset((e.a, e.b)) for e in edges}
    chords = [
        (a.id, b.id)
        for i, a in enumerate(intersections)
        for b in intersections[i + 1 :]
        if frozenset((a.id, b.id)) not in existing
    ]
    rng.shuffle(chords)
    for a, b in chords[:extra_edges]:
        edges.append(Edge(a, b, EdgeKind.CONNECT, road_label=rng.choice(_ROADS)))
        existing.add(frozenset((a, b)))

    for landmark in landmarks:
        nearest = min(
            intersections,
            key=lambda node: (math.dist(landmark.center, node.center), node.id),
        )
        edges.append(Edge(landmark.id, nearest.id, EdgeKind.ADJACENT))
        existing.add(frozenset((landmark.id, nearest.id)))

    if observable_rate > 0:
        others = intersections + landmarks
        for landmark in landmarks:
            for node in others:
                if node.id == landmark.id:
                    continue
                if frozenset((landmark.id, node.id)) in existing:
                    continue
                if rng.random() < observable_rate:
                    edges.append(Edge(landmark.id, node.id, EdgeKind.OBSERVABLE))
                    existing.add(frozenset((landmark.id, node.id)))

    return SceneGraph(
        map_id=map_id or f"synthetic-{seed}",
        nodes=[*intersections, *landmarks],
        edges=edges,
        meta=SceneMeta(scene_type=scene_type),
    )


def random_landmark_path(graph: SceneGraph, rng: random.Random) -> GraphPath:
    """Random traversable simple path between two distinct landmarks.

    Uses a randomized depth-first walk, so paths are frequently longer than
    the shortest route; useful for exercising the scoring code.
    """
    landmark_ids = sorted(n.id for n in graph.landmarks)
    s, t = rng.sample(landmark_ids, 2)
    trail = [s]
    on_trail = {s}

    def walk(current: str) -> bool:
        if current == t:
            return True
        nbrs = [n for n in graph.neighbors(current) if n not in on_trail]
        rng.shuffle(nbrs)
        for nbr in nbrs:
            trail.append(nbr)
            on_trail.add(nbr)
            if walk(nbr):
                return True
            trail.pop()
            on_trail.remove(nbr)
        return False

    if not walk(s):
        raise AssertionError("valid graphs are connected; walk cannot fail")
    return GraphPath(tuple(trail))


# -- reference algorithms (independent of mapgraph.core internals) -----------


def _traversable_pairs(graph: SceneGraph) -> set[tuple[str, str]]:
    pairs = set()
    for edge in graph.edges:
        if edge.kind in (EdgeKind.CONNECT, EdgeKind.ADJACENT):
            pairs.add((edge.a, edge.b))
            pairs.add((edge.b, edge.a))
    return pairs


def oracle_shortest(graph: SceneGraph, s: str, t: str) -> int | None:
    """Hop distance via dense matrix relaxation; None when unreachable."""
    ids = sorted(n.id for n in graph.nodes)
    index = {node_id: i for i, node_id in enumerate(ids)}
    size = len(ids)
    inf = math.inf
    dist = [[0 if i == j else inf for j in range(size)] for i in range(size)]
    for a, b in _traversable_pairs(graph):
        dist[index[a]][index[b]] = 1
    for k in range(size):
        for i in range(size):
            for j in range(size):
                through = dist[i][k] + dist[k][j]
                if through < dist[i][j]:
                    dist[i][j] = through
    value = dist[index[s]][index[t]]
    return None if value == inf else int(value)


def oracle_all_simple(graph: SceneGraph, s: str, t: str) -> set[tuple[str, ...]]:
    """Every simple path as a set of node tuples, by bare recursion."""
    pairs = _traversable_pairs(graph)
    neighbors: dict[str, set[str]] = {}
    for a, b in pairs:
        neighbors.setdefault(a, set()).add(b)

    results: set[tuple[str, ...]] = set()

    def search(current: str, seen: tuple[str, ...]) -> None:
        if current == t:
            results.add(seen)
            return
        for nbr in neighbors.get(current, ()):
            if nbr not in seen:
                search(nbr, seen + (nbr,))

    search(s, (s,))
    return results
