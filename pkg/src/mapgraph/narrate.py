"""Turns a graph path into templated natural-language navigation steps.

Each emitted line follows the canonical grammar

    {from} -> {to} (from {direction}, moving along {road} from {from})

optionally followed by a surrounding sentence naming landmarks visible from
the step's head node, and the narration always closes with an arrival note.
Runs of road hops between two landmarks collapse into a single walking
step by default, because intersections carry no printable name; the hop
count of a collapsed step is kept so path-quality scoring stays exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .core import (
    EdgeKind,
    GraphPath,
    SceneGraph,
    check_path,
)
from .errors import IdenticalPointsError, NotLandmarkEndpointsError

#: An axis contributes to the quantized direction when its displacement
#: component is at least this fraction of the total displacement norm.
DIRECTION_AXIS_THRESHOLD = 0.25

ARRIVAL_NOTE_TEMPLATE = "You have arrived at {destination}."
STEP_TEMPLATE = "{src} -> {dst} (from {direction}, moving along {road} from {src})"
SURROUNDING_TEMPLATE = "Nearby you can see {labels}."
FALLBACK_ROAD = "the path"

MODE_SCREEN = "screen"
MODE_COMPASS = "compass"


class Direction(Enum):
    """Eight screen-relative directions; y grows downward in image space."""

    UP = "Up"
    DOWN = "Down"
    LEFT = "Left"
    RIGHT = "Right"
    LEFT_UP = "Left and Up"
    LEFT_DOWN = "Left and Down"
    RIGHT_UP = "Right and Up"
    RIGHT_DOWN = "Right and Down"

    def phrase(self, mode: str = MODE_SCREEN) -> str:
        if mode == MODE_SCREEN:
            return self.value
        if mode == MODE_COMPASS:
            return COMPASS_ALIAS[self]
        raise ValueError(f"unknown direction mode {mode!r}")


COMPASS_ALIAS = {
    Direction.UP: "North",
    Direction.DOWN: "South",
    Direction.LEFT: "West",
    Direction.RIGHT: "East",
    Direction.LEFT_UP: "Northwest",
    Direction.LEFT_DOWN: "Southwest",
    Direction.RIGHT_UP: "Northeast",
    Direction.RIGHT_DOWN: "Southeast",
}


def get_direction(src: tuple[float, float], dst: tuple[float, float]) -> Direction:
    """Quantize the displacement ``dst - src`` to one of eight directions."""
    dx = dst[0] - src[0]
    dy = dst[1] - src[1]
    norm = math.hypot(dx, dy)
    if norm == 0:
        raise IdenticalPointsError(f"points coincide at {src!r}")
    threshold = DIRECTION_AXIS_THRESHOLD * norm
    horizontal = ""
    vertical = ""
    if abs(dx) >= threshold:
        horizontal = "Right" if dx > 0 else "Left"
    if abs(dy) >= threshold:
        vertical = "Down" if dy > 0 else "Up"
    if horizontal and vertical:
        return Direction(f"{horizontal} and {vertical}")
    return Direction(horizontal or vertical)


class StepKind(str, Enum):
    WALK = "Walk"  # along the road network
    MOVE = "Move"  # between a landmark and the road network


@dataclass(frozen=True)
class NavStep:
    """One narrated instruction step.

    ``direction``, ``road_phrase``, and ``kind`` may be absent on steps
    parsed back from model output; narration always fills them.  ``hops``
    preserves the number of underlying edges a collapsed step spans.
    """

    from_label: str
    to_label: str
    direction: Direction | None = None
    road_phrase: str | None = None
    kind: StepKind | None = None
    surrounding: tuple[str, ...] = ()
    from_id: str | None = None
    to_id: str | None = None
    hops: int = 1

    def __post_init__(self):
        if self.from_label == self.to_label:
            raise ValueError("step endpoints must carry distinct labels")


@dataclass(frozen=True)
class NavInstruction:
    """An ordered chain of steps plus the closing arrival note."""

    steps: tuple[NavStep, ...]
    arrival_note: str
    mode: str = MODE_SCREEN

    def __post_init__(self):
        if not self.steps:
            raise ValueError("an instruction needs at least one step")
        for left, right in zip(self.steps, self.steps[1:]):
            if left.to_label != right.from_label:
                raise ValueError(
                    f"step chain breaks between {left.to_label!r} "
                    f"and {right.from_label!r}"
                )

    def render(self) -> str:
        lines = []
        for step in self.steps:
            line = STEP_TEMPLATE.format(
                src=step.from_label,
                dst=step.to_label,
                direction=(step.direction or Direction.UP).phrase(self.mode),
                road=step.road_phrase or FALLBACK_ROAD,
            )
            if step.surrounding:
                line += " " + SURROUNDING_TEMPLATE.format(
                    labels=", ".join(step.surrounding)
                )
            lines.append(line)
        lines.append(self.arrival_note)
        return "\n".join(lines)


def _surrounding(graph: SceneGraph, node_id: str) -> tuple[str, ...]:
    labels = [
        graph.label_of(nbr)
        for nbr in graph.observable_neighbors(node_id)
        if graph.is_landmark(nbr)
    ]
    return tuple(sorted(labels))


def _segment_road(graph: SceneGraph, nodes: tuple[str, ...]) -> str:
    for a, b in zip(nodes, nodes[1:]):
        edge = graph.edge_between(a, b)
        if edge is not None and edge.road_label:
            return edge.road_label
    return FALLBACK_ROAD


def _display_label(graph: SceneGraph, node_id: str) -> str:
    node = graph.node(node_id)
    if graph.is_landmark(node_id):
        return node.label
    # Unnamed junctions need distinct labels so step chains stay coherent.
    return f"{node.label} {node_id}"


def _step(graph: SceneGraph, nodes: tuple[str, ...], kind: StepKind,
          from_label: str, to_label: str) -> NavStep:
    src = graph.node(nodes[0])
    dst = graph.node(nodes[-1])
    return NavStep(
        from_label=from_label,
        to_label=to_label,
        direction=get_direction(src.center, dst.center),
        road_phrase=_segment_road(graph, nodes),
        kind=kind,
        surrounding=_surrounding(graph, nodes[-1]),
        from_id=nodes[0],
        to_id=nodes[-1],
        hops=len(nodes) - 1,
    )


def narrate_path(
    graph: SceneGraph,
    path: GraphPath,
    mode: str = MODE_SCREEN,
    collapse: bool = True,
) -> NavInstruction:
    """Narrate a traversable path whose endpoints are landmarks.

    With ``collapse`` (the default), any landmark-to-landmark stretch that
    walks road edges becomes a single step between the two landmark names;
    a stretch through exactly one intersection keeps its two moves, and the
    intersection is referred to by its constant label.  With
    ``collapse=False`` every edge becomes its own step and junctions are
    labeled ``intersection <id>``.
    """
    if mode not in (MODE_SCREEN, MODE_COMPASS):
        raise ValueError(f"unknown narration mode {mode!r}")
    check_path(graph, path)
    if not (graph.is_landmark(path.start) and graph.is_landmark(path.end)):
        raise NotLandmarkEndpointsError(
            f"path endpoints {path.start!r}, {path.end!r} must both be landmarks"
        )

    steps: list[NavStep] = []
    if not collapse:
        for a, b in zip(path.nodes, path.nodes[1:]):
            kind = (
                StepKind.WALK
                if graph.edge_kind(a, b) is EdgeKind.CONNECT
                else StepKind.MOVE
            )
            steps.append(
                _step(
                    graph,
                    (a, b),
                    kind,
                    _display_label(graph, a),
                    _display_label(graph, b),
                )
            )
    else:
        marks = [
            i for i, node_id in enumerate(path.nodes) if graph.is_landmark(node_id)
        ]
        for left, right in zip(marks, marks[1:]):
            segment = path.nodes[left : right + 1]
            has_road_hop = any(
                graph.edge_kind(a, b) is EdgeKind.CONNECT
                for a, b in zip(segment, segment[1:])
            )
            if has_road_hop:
                steps.append(
                    _step(
                        graph,
                        segment,
                        StepKind.WALK,
                        graph.label_of(segment[0]),
                        graph.label_of(segment[-1]),
                    )
                )
            else:
                for a, b in zip(segment, segment[1:]):
                    steps.append(
                        _step(
                            graph,
                            (a, b),
                            StepKind.MOVE,
                            graph.label_of(a),
                            graph.label_of(b),
                        )
                    )

    arrival = ARRIVAL_NOTE_TEMPLATE.format(destination=graph.label_of(path.end))
    return NavInstruction(steps=tuple(steps), arrival_note=arrival, mode=mode)
