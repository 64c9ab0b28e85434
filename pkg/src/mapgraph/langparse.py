"""Parses navigation text back into a graph path and grades the outcome.

Responses are judged through a three-level cascade: missing path (empty or
refusal), format non-compliance (no parseable step line, or a mention that
matches no landmark), linguistic incoherence (broken step chain or wrong
endpoints).  Anything that survives is scored: the landmark waypoints are
resolved to shortest traversable subpaths, concatenated, and the resulting
hop count is divided by the shortest-path length.

Mentions are linked to landmarks by exact normalized match first, then by
trailing-numeral-stripped match, then by a token-set similarity ratio.
A mention of the bare word ``intersection`` (optionally followed by one
token) is treated as a structural node reference rather than a failed
landmark; narrated paths legitimately contain them.
"""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass
from difflib import SequenceMatcher
from enum import Enum
from importlib import resources

from . import core
from .core import GraphPath, SceneGraph
from .errors import NoPathError, TooFewLocationsError, UnresolvablePairError
from .narrate import COMPASS_ALIAS, Direction, NavStep

#: Minimum token-set similarity for a fuzzy landmark match.
FUZZY_THRESHOLD = 0.85

STEP_LINE_RE = re.compile(r"^(.+?)\s*(?:->|→|\$\\rightarrow\$)\s*(.+?)\s*(?:\((.*?)\)?)?\s*$")

_INTERSECTION_REF_RE = re.compile(r"^intersection(?:\s+\S+)?$")
_TRAILING_NUMERAL_RE = re.compile(r"\s*\d+$")
_PUNCT_RE = re.compile(r"[^\w\s]", re.UNICODE)


def load_refusal_patterns(path: str | None = None) -> tuple[str, ...]:
    """Refusal phrases are shipped as data so deployments can extend them."""
    if path is None:
        text = (
            resources.files("mapgraph.data")
            .joinpath("refusal_patterns.json")
            .read_text(encoding="utf-8")
        )
    else:
        with open(path, encoding="utf-8") as handle:
            text = handle.read()
    doc = json.loads(text)
    return tuple(doc["patterns"])


def normalize_mention(text: str) -> str:
    """Case-fold, strip punctuation, and collapse whitespace."""
    lowered = text.strip().casefold()
    stripped = _PUNCT_RE.sub(" ", lowered)
    return " ".join(stripped.split())


def strip_trailing_numeral(text: str) -> str:
    return _TRAILING_NUMERAL_RE.sub("", text)


def is_intersection_reference(mention: str) -> bool:
    return bool(_INTERSECTION_REF_RE.match(normalize_mention(mention)))


def _ratio(a: str, b: str) -> float:
    return SequenceMatcher(None, a, b, autojunk=False).ratio()


def token_set_ratio(a: str, b: str) -> float:
    """Similarity that ignores word order and duplicated tokens.

    The shared-token string is compared against each side's remainder; the
    maximum of the three ratios is returned, so a mention whose tokens are a
    subset of the label's scores 1.0.
    """
    tokens_a = set(a.split())
    tokens_b = set(b.split())
    if not tokens_a or not tokens_b:
        return 0.0
    shared = " ".join(sorted(tokens_a & tokens_b))
    combined_a = (shared + " " + " ".join(sorted(tokens_a - tokens_b))).strip()
    combined_b = (shared + " " + " ".join(sorted(tokens_b - tokens_a))).strip()
    return max(
        _ratio(shared, combined_a),
        _ratio(shared, combined_b),
        _ratio(combined_a, combined_b),
    )


@dataclass(frozen=True)
class MentionMatch:
    mention: str
    node_id: str | None
    score: float
    is_intersection: bool = False

    @property
    def matched(self) -> bool:
        return self.node_id is not None


def match_mention(
    mention: str, graph: SceneGraph, threshold: float = FUZZY_THRESHOLD
) -> MentionMatch:
    """Link one textual mention to a landmark node."""
    norm = normalize_mention(mention)
    if is_intersection_reference(norm):
        return MentionMatch(mention, None, 0.0, is_intersection=True)

    landmarks = sorted(graph.landmarks, key=lambda n: n.id)
    labels = {node.id: normalize_mention(node.label) for node in landmarks}

    for node in landmarks:
        if labels[node.id] == norm:
            return MentionMatch(mention, node.id, 1.0)

    norm_stripped = strip_trailing_numeral(norm)
    for node in landmarks:
        label = labels[node.id]
        if norm_stripped and norm_stripped in (label, strip_trailing_numeral(label)):
            return MentionMatch(mention, node.id, 1.0)
        if norm == strip_trailing_numeral(label):
            return MentionMatch(mention, node.id, 1.0)

    best_id: str | None = None
    best_score = 0.0
    for node in landmarks:
        score = token_set_ratio(norm, labels[node.id])
        if score > best_score:
            best_id, best_score = node.id, score
    if best_score >= threshold:
        return MentionMatch(mention, best_id, best_score)
    return MentionMatch(mention, None, best_score)


# -- response parsing ---------------------------------------------------------


@dataclass(frozen=True)
class ParsedResponse:
    """Raw text split into step lines; the original text is kept verbatim."""

    raw: str
    lines: tuple[str, ...]
    steps: tuple[NavStep, ...]
    rejected_lines: tuple[str, ...] = ()
    unmatched_lines: tuple[str, ...] = ()


def _mine_direction(clause: str) -> Direction | None:
    phrases = {d.value.casefold(): d for d in Direction}
    phrases.update({alias.casefold(): d for d, alias in COMPASS_ALIAS.items()})
    match = re.search(r"\bfrom\s+([A-Za-z ]+?)(?:,|$)", clause)
    if match:
        return phrases.get(match.group(1).strip().casefold())
    return None


def _mine_road(clause: str) -> str | None:
    match = re.search(r"\b(?:moving|continue|continuing|head(?:ing)?)?\s*along\s+(.+?)(?:\s+from\s+.+)?$", clause)
    if match:
        return match.group(1).strip() or None
    return None


def parse_response(text: str) -> ParsedResponse:
    """Split a response into step lines under the lenient line grammar."""
    lines: list[str] = []
    steps: list[NavStep] = []
    rejected: list[str] = []
    unmatched: list[str] = []
    for raw_line in text.splitlines():
        line = raw_line.strip()
        if not line:
            continue
        match = STEP_LINE_RE.match(line)
        if not match or not match.group(2).strip():
            unmatched.append(line)
            continue
        lines.append(line)
        from_text = match.group(1).strip()
        to_text = match.group(2).strip()
        if from_text == to_text:
            rejected.append(line)
            continue
        clause = (match.group(3) or "").strip()
        steps.append(
            NavStep(
                from_label=from_text,
                to_label=to_text,
                direction=_mine_direction(clause) if clause else None,
                road_phrase=_mine_road(clause) if clause else None,
            )
        )
    return ParsedResponse(
        raw=text,
        lines=tuple(lines),
        steps=tuple(steps),
        rejected_lines=tuple(rejected),
        unmatched_lines=tuple(unmatched),
    )


def _mention_stream(
    response: ParsedResponse, graph: SceneGraph, threshold: float
) -> list[MentionMatch]:
    matches = []
    for step in response.steps:
        matches.append(match_mention(step.from_label, graph, threshold))
        matches.append(match_mention(step.to_label, graph, threshold))
    return matches


def _merge_stream(stream: list[MentionMatch]) -> list[MentionMatch]:
    merged: list[MentionMatch] = []
    for match in stream:
        if match.is_intersection:
            continue
        if merged and _same_place(merged[-1], match):
            continue
        merged.append(match)
    return merged


def _same_place(a: MentionMatch, b: MentionMatch) -> bool:
    if a.matched and b.matched:
        return a.node_id == b.node_id
    return normalize_mention(a.mention) == normalize_mention(b.mention)


def get_locations(
    text: str, graph: SceneGraph, threshold: float = FUZZY_THRESHOLD
) -> list[tuple[str, str | None, float]]:
    """Landmark mentions from each step line, in order, duplicates merged.

    Unmatched mentions are kept with their sub-threshold best score;
    structural ``intersection`` references are filtered out.
    """
    response = parse_response(text)
    stream = _merge_stream(_mention_stream(response, graph, threshold))
    return [(m.mention, m.node_id, round(m.score, 4)) for m in stream]


def split2edges(
    locations: list[tuple[str, str | None, float]],
    text: str,
    graph: SceneGraph,
) -> list[tuple[str, str]]:
    """Consecutive matched-landmark pairs in textual order."""
    matched = [node_id for _, node_id, _ in locations if node_id is not None]
    deduped: list[str] = []
    for node_id in matched:
        if not deduped or deduped[-1] != node_id:
            deduped.append(node_id)
    if len(deduped) < 2:
        raise TooFewLocationsError(
            f"need at least two matched locations, got {len(deduped)}"
        )
    return list(zip(deduped, deduped[1:]))


def get_path(pairs: list[tuple[str, str]], graph: SceneGraph) -> GraphPath:
    """Resolve waypoint pairs to shortest subpaths and join them.

    Resolution by shortest subpath makes the final score a pure detour
    penalty over the claimed waypoints.
    """
    if not pairs:
        raise ValueError("pairs must be nonempty")
    nodes: list[str] = []
    for a, b in pairs:
        try:
            segment = core.shortest_path(graph, a, b)
        except NoPathError as exc:
            raise UnresolvablePairError(
                f"no traversable route between {a!r} and {b!r}", a=a, b=b
            ) from exc
        if nodes:
            nodes.extend(segment.nodes[1:])
        else:
            nodes.extend(segment.nodes)
    return GraphPath(tuple(nodes))


# -- classification -----------------------------------------------------------


class EvalStatus(str, Enum):
    SCORED = "Scored"
    MISSING_PATH = "MissingPath"
    LINGUISTIC_INCOHERENCE = "LinguisticIncoherence"
    FORMAT_NON_COMPLIANCE = "FormatNonCompliance"


@dataclass(frozen=True)
class EvalRecord:
    """Judged outcome for one response to one query."""

    query_id: str
    status: EvalStatus
    pqs: float | None = None
    resolved_path: GraphPath | None = None
    diagnostics: tuple[str, ...] = ()
    model: str | None = None
    method: str | None = None

    def to_dict(self) -> dict:
        return {
            "query_id": self.query_id,
            "model": self.model,
            "method": self.method,
            "status": self.status.value,
            "pqs": self.pqs,
            "resolved_path": list(self.resolved_path.nodes)
            if self.resolved_path
            else None,
            "diagnostics": list(self.diagnostics),
        }


_DEFAULT_PATTERNS: tuple[str, ...] | None = None


def _refusal_patterns() -> tuple[str, ...]:
    global _DEFAULT_PATTERNS
    if _DEFAULT_PATTERNS is None:
        _DEFAULT_PATTERNS = load_refusal_patterns()
    return _DEFAULT_PATTERNS


def classify(
    response: ParsedResponse,
    query: tuple[str, str],
    graph: SceneGraph,
    threshold: float = FUZZY_THRESHOLD,
    refusal_patterns: tuple[str, ...] | None = None,
    model: str | None = None,
    method: str | None = None,
    query_id: str = "",
) -> EvalRecord:
    """Total, deterministic judgment of one response against one query."""
    start, end = query
    graph.node(start)
    graph.node(end)
    patterns = (
        refusal_patterns if refusal_patterns is not None else _refusal_patterns()
    )

    def record(status, pqs=None, path=None, diagnostics=()):
        return EvalRecord(
            query_id=query_id,
            status=status,
            pqs=pqs,
            resolved_path=path,
            diagnostics=tuple(diagnostics),
            model=model,
            method=method,
        )

    body = response.raw.strip()
    folded = body.casefold()
    if not body:
        return record(EvalStatus.MISSING_PATH, diagnostics=["empty response"])
    hits = [p for p in patterns if p.casefold() in folded]
    if hits:
        return record(
            EvalStatus.MISSING_PATH,
            diagnostics=[f"refusal pattern: {hits[0]!r}"],
        )

    if not response.steps:
        return record(
            EvalStatus.FORMAT_NON_COMPLIANCE,
            diagnostics=["no line matches the step grammar"],
        )

    stream = _mention_stream(response, graph, threshold)
    misses = [m for m in stream if not m.matched and not m.is_intersection]
    if misses:
        return record(
            EvalStatus.FORMAT_NON_COMPLIANCE,
            diagnostics=[
                f"unmatched mention {m.mention!r} (best score {m.score:.2f})"
                for m in misses
            ],
        )

    # Chain coherence over raw step labels / matched nodes.
    pair_stream = [(stream[2 * i], stream[2 * i + 1]) for i in range(len(response.steps))]
    for (_, left_to), (right_from, _) in zip(pair_stream, pair_stream[1:]):
        if not _same_place(left_to, right_from):
            return record(
                EvalStatus.LINGUISTIC_INCOHERENCE,
                diagnostics=[
                    f"chain breaks: {left_to.mention!r} then {right_from.mention!r}"
                ],
            )

    first_from = pair_stream[0][0]
    last_to = pair_stream[-1][1]
    if first_from.node_id != start:
        return record(
            EvalStatus.LINGUISTIC_INCOHERENCE,
            diagnostics=[
                f"route starts at {first_from.mention!r}, "
                f"query starts at {graph.label_of(start)!r}"
            ],
        )
    if last_to.node_id != end:
        return record(
            EvalStatus.LINGUISTIC_INCOHERENCE,
            diagnostics=[
                f"route ends at {last_to.mention!r}, "
                f"query ends at {graph.label_of(end)!r}"
            ],
        )

    locations = _merge_stream(stream)
    pairs = list(
        zip(
            [m.node_id for m in locations],
            [m.node_id for m in locations[1:]],
        )
    )
    resolved = get_path(pairs, graph)
    score = resolved.hops / core.shortest_path(graph, start, end).hops
    diagnostics = []
    if response.rejected_lines:
        diagnostics.append(f"{len(response.rejected_lines)} step line(s) rejected")
    return record(EvalStatus.SCORED, pqs=score, path=resolved, diagnostics=diagnostics)


# -- record serialization -------------------------------------------------------


def records_to_jsonl(records: list[EvalRecord]) -> str:
    return "".join(
        json.dumps(r.to_dict(), ensure_ascii=False) + "\n" for r in records
    )


def records_to_csv(records: list[EvalRecord]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["query_id", "model", "method", "status", "pqs", "diagnostics"])
    for r in records:
        writer.writerow(
            [
                r.query_id,
                r.model or "",
                r.method or "",
                r.status.value,
                f"{r.pqs:.4f}" if r.pqs is not None else "",
                "; ".join(r.diagnostics),
            ]
        )
    return buffer.getvalue()


def read_responses_jsonl(text: str) -> list[dict]:
    """Parse line-delimited response records; extra keys are preserved."""
    records = []
    for idx, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        doc = json.loads(line)
        for key in ("query_id", "model", "method", "response_text"):
            if key not in doc:
                raise ValueError(f"response line {idx} is missing {key!r}")
        records.append(doc)
    return records
