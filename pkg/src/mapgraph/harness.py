"""Drives vision-language models over benchmark queries.

Two protocols are supported: a single-turn zero-shot request, and a
four-stage chained protocol (localize, describe surroundings, iteratively
connect the path, summarize) whose prompt transcript grows append-only.
Responses are cached content-addressed on (model, method, request payload),
so repeated runs are free and cache-warm runs are byte-identical to cold
ones.

A deterministic stub endpoint replays scripted fixtures, or synthesizes a
shortest-path narration when unscripted, which keeps the whole pipeline
runnable offline.
"""

from __future__ import annotations

import base64
import csv
import hashlib
import io
import json
import os
import statistics
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Protocol

from . import core, langparse, narrate
from .core import SceneGraph
from .errors import CacheCorruptError, TransportError
from .langparse import FUZZY_THRESHOLD, EvalRecord, EvalStatus
from .querygen import Query

METHOD_ZERO_SHOT = "zero-shot"
METHOD_COT = "cot"

DEFAULT_MAX_ITERS = 12
DEFAULT_JOBS = 4
TEMPERATURE = 0.0

_STAGE_LOCALIZATION = "localization"
_STAGE_SURROUNDING = "surrounding"
_STAGE_CONNECT = "connect"
_STAGE_SUMMARIZE = "summarize"

COT_STAGE_ORDER = (
    _STAGE_LOCALIZATION,
    _STAGE_SURROUNDING,
    _STAGE_CONNECT,
    _STAGE_SUMMARIZE,
)


def load_prompts() -> dict:
    text = (
        resources.files("mapgraph.data")
        .joinpath("prompts.json")
        .read_text(encoding="utf-8")
    )
    return json.loads(text)


_PROMPTS: dict | None = None


def _prompts() -> dict:
    global _PROMPTS
    if _PROMPTS is None:
        _PROMPTS = load_prompts()
    return _PROMPTS


def _render_prompt(name: str, **fields) -> str:
    prompts = _prompts()
    template = prompts[name]
    if "{contract}" in template:
        fields["contract"] = prompts["format_contract"]
    return template.format(**fields)


@dataclass(frozen=True)
class ModelEndpoint:
    """Transport description for one chat-completions endpoint."""

    base_url: str
    model: str
    auth_env: str = ""
    timeout: float = 60.0
    max_retries: int = 2
    rate_limit_rpm: int = 0

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")


class Transcript:
    """Append-only message log; doubles as the accumulating prompt."""

    def __init__(self):
        self._messages: list[dict] = []

    def append(
        self,
        role: str,
        content: str,
        image: str | None = None,
        stage: str | None = None,
    ) -> None:
        self._messages.append(
            {"role": role, "content": content, "image": image, "stage": stage}
        )

    @property
    def messages(self) -> tuple[dict, ...]:
        return tuple(dict(m) for m in self._messages)

    def stages(self) -> tuple[str, ...]:
        return tuple(m["stage"] for m in self._messages if m["stage"])

    def to_jsonl(self) -> str:
        return "".join(
            json.dumps(m, ensure_ascii=False) + "\n" for m in self._messages
        )


@dataclass(frozen=True)
class ChatRequest:
    """One model call plus the metadata backends may consult.

    Transport backends only read ``messages``/``model``; the stub uses the
    query and graph to synthesize deterministic replies.
    """

    messages: tuple[dict, ...]
    model: str
    method: str
    query_id: str
    stage: str | None = None
    iteration: int = 0
    query: Query | None = None
    graph: SceneGraph | None = None


class ChatBackend(Protocol):
    model: str

    def complete(self, request: ChatRequest) -> str: ...


# -- caching ---------------------------------------------------------------------


def _payload_digest(request: ChatRequest) -> str:
    payload = {
        "model": request.model,
        "method": request.method,
        "messages": list(request.messages),
    }
    blob = json.dumps(payload, sort_keys=True, ensure_ascii=False).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


class ResponseCache:
    """Content-addressed response store; one JSON file per request digest."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._write_lock = threading.Lock()

    def _path(self, key: str) -> Path:
        return self.directory / f"{key}.json"

    def get(self, request: ChatRequest) -> str | None:
        path = self._path(_payload_digest(request))
        if not path.exists():
            return None
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
            return doc["response"]
        except (json.JSONDecodeError, KeyError) as exc:
            raise CacheCorruptError(
                f"cache entry {path.name} cannot be decoded", path=str(path)
            ) from exc

    def put(self, request: ChatRequest, response: str) -> None:
        path = self._path(_payload_digest(request))
        doc = {
            "model": request.model,
            "method": request.method,
            "response": response,
        }
        # Write-then-rename keeps concurrent readers off partial files.
        with self._write_lock:
            scratch = path.with_suffix(".tmp")
            scratch.write_text(
                json.dumps(doc, ensure_ascii=False, indent=2), encoding="utf-8"
            )
            os.replace(scratch, path)


# -- backends --------------------------------------------------------------------


class _RateGate:
    """Token-bucket-of-one: spaces requests at least an interval apart."""

    def __init__(self, rpm: int):
        self._interval = 60.0 / rpm if rpm > 0 else 0.0
        self._lock = threading.Lock()
        self._next_at = 0.0

    def wait(self) -> None:
        if self._interval <= 0:
            return
        with self._lock:
            now = time.monotonic()
            delay = self._next_at - now
            self._next_at = max(now, self._next_at) + self._interval
        if delay > 0:
            time.sleep(delay)


class HttpEndpoint:
    """Chat-completions transport with retries and rate limiting."""

    def __init__(self, config: ModelEndpoint):
        self.config = config
        self.model = config.model
        self._gate = _RateGate(config.rate_limit_rpm)

    def _headers(self) -> dict:
        import os

        headers = {"Content-Type": "application/json"}
        if self.config.auth_env:
            token = os.environ.get(self.config.auth_env, "")
            if token:
                headers["Authorization"] = f"Bearer {token}"
        return headers

    def complete(self, request: ChatRequest) -> str:
        import requests

        payload = {
            "model": self.config.model,
            "temperature": TEMPERATURE,
            "messages": _wire_messages(request.messages),
        }
        url = self.config.base_url.rstrip("/") + "/chat/completions"
        last_error: Exception | None = None
        attempts = self.config.max_retries + 1
        for attempt in range(attempts):
            self._gate.wait()
            try:
                reply = requests.post(
                    url,
                    json=payload,
                    headers=self._headers(),
                    timeout=self.config.timeout,
                )
                if reply.status_code != 429 and reply.status_code < 500:
                    reply.raise_for_status()
                    doc = reply.json()
                    return doc["choices"][0]["message"]["content"]
                last_error = TransportError(
                    f"HTTP {reply.status_code} from {url}", status=reply.status_code
                )
            except TransportError:
                pass
            except Exception as exc:  # noqa: BLE001 - network stack varies
                last_error = exc
            if attempt + 1 < attempts:
                time.sleep(min(2**attempt, 8))
        raise TransportError(
            f"{url} unreachable after {attempts} attempt(s): {last_error}",
            attempts=attempts,
        )


def _wire_messages(messages: tuple[dict, ...]) -> list[dict]:
    wire = []
    for message in messages:
        if message.get("image"):
            content = [
                {"type": "text", "text": message["content"]},
                {"type": "image_url", "image_url": {"url": message["image"]}},
            ]
        else:
            content = message["content"]
        wire.append({"role": message["role"], "content": content})
    return wire


class StubEndpoint:
    """Deterministic offline backend.

    ``script`` maps query ids to canned replies: either a plain string
    (served for every call about that query) or a mapping with per-stage
    entries (``zero-shot``, ``localization``, ``surrounding``, ``connect``
    as a list per iteration, ``summarize``).  Unscripted queries are
    answered with a narration of the shortest path, i.e. an ideal model.
    """

    def __init__(self, script: Mapping | None = None, model: str = "stub"):
        self.script = dict(script or {})
        self.model = model

    @classmethod
    def from_file(cls, path: str | Path, model: str = "stub") -> "StubEndpoint":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(script=doc.get("responses", doc), model=doc.get("model", model))

    def _ideal_answer(self, request: ChatRequest) -> str:
        if request.query is None or request.graph is None:
            return "No path found."
        path = core.shortest_path(
            request.graph, request.query.start, request.query.end
        )
        return narrate.narrate_path(request.graph, path).render()

    def complete(self, request: ChatRequest) -> str:
        entry = self.script.get(request.query_id)
        if isinstance(entry, str):
            return entry
        if isinstance(entry, Mapping):
            if request.method == METHOD_ZERO_SHOT and "zero-shot" in entry:
                return entry["zero-shot"]
            if request.stage == _STAGE_CONNECT and "connect" in entry:
                steps = entry["connect"]
                index = min(request.iteration, len(steps) - 1)
                return steps[index]
            if request.stage in entry:
                return entry[request.stage]
        if request.stage == _STAGE_LOCALIZATION:
            return "Key landmarks identified on the map."
        if request.stage == _STAGE_SURROUNDING:
            return "The start sits beside the main path."
        if request.stage == _STAGE_CONNECT:
            # One narrated line per iteration; the last line names the
            # destination, which terminates the loop.
            answer = self._ideal_answer(request)
            lines = [l for l in answer.splitlines() if "->" in l]
            if not lines:
                return answer
            index = min(request.iteration, len(lines) - 1)
            return lines[index]
        return self._ideal_answer(request)


def _complete_cached(
    backend: ChatBackend, request: ChatRequest, cache: ResponseCache | None
) -> str:
    if cache is not None:
        hit = cache.get(request)
        if hit is not None:
            return hit
    response = backend.complete(request)
    if cache is not None:
        cache.put(request, response)
    return response


# -- protocol drivers -------------------------------------------------------------


def encode_image(path: str | Path) -> str:
    data = Path(path).read_bytes()
    suffix = Path(path).suffix.lstrip(".").lower() or "png"
    mime = {"jpg": "jpeg"}.get(suffix, suffix)
    return f"data:image/{mime};base64,{base64.b64encode(data).decode('ascii')}"


def _image_url(image: str | Path | None) -> str | None:
    if image is None:
        return None
    text = str(image)
    if text.startswith("data:"):
        return text
    return encode_image(text)


def run_zero_shot(
    endpoint: ChatBackend,
    image: str | Path | None,
    query: Query,
    graph: SceneGraph,
    cache: ResponseCache | None = None,
) -> str:
    """Single chat turn: the map image plus the navigation instruction."""
    prompt = _render_prompt(
        "zero_shot",
        start=graph.label_of(query.start),
        end=graph.label_of(query.end),
    )
    transcript = Transcript()
    transcript.append("user", prompt, image=_image_url(image), stage="zero-shot")
    request = ChatRequest(
        messages=transcript.messages,
        model=endpoint.model,
        method=METHOD_ZERO_SHOT,
        query_id=query.query_id,
        stage="zero-shot",
        query=query,
        graph=graph,
    )
    return _complete_cached(endpoint, request, cache)


def mentions_destination(
    text: str, label: str, threshold: float = FUZZY_THRESHOLD
) -> bool:
    """True when the reply names the destination, fuzzily."""
    if langparse.normalize_mention(label) in langparse.normalize_mention(text):
        return True
    parsed = langparse.parse_response(text)
    for step in parsed.steps:
        for mention in (step.from_label, step.to_label):
            score = langparse.token_set_ratio(
                langparse.normalize_mention(mention),
                langparse.normalize_mention(label),
            )
            if score >= threshold:
                return True
    return False


@dataclass
class CotRun:
    """Outcome of one chained-protocol run."""

    text: str
    transcript: Transcript
    connect_iterations: int
    max_iters_exceeded: bool


def run_cot(
    endpoint: ChatBackend,
    image: str | Path | None,
    query: Query,
    graph: SceneGraph,
    max_iters: int = DEFAULT_MAX_ITERS,
    cache: ResponseCache | None = None,
    transcript_dir: str | Path | None = None,
) -> str:
    """Four-stage chained protocol; returns the final summarized navigation."""
    return run_cot_detailed(
        endpoint,
        image,
        query,
        graph,
        max_iters=max_iters,
        cache=cache,
        transcript_dir=transcript_dir,
    ).text


def run_cot_detailed(
    endpoint: ChatBackend,
    image: str | Path | None,
    query: Query,
    graph: SceneGraph,
    max_iters: int = DEFAULT_MAX_ITERS,
    cache: ResponseCache | None = None,
    transcript_dir: str | Path | None = None,
) -> CotRun:
    start = graph.label_of(query.start)
    end = graph.label_of(query.end)
    transcript = Transcript()
    image_url = _image_url(image)

    def ask(stage: str, prompt: str, iteration: int = 0) -> str:
        # The image rides on the first user turn only.
        attach = image_url if not transcript.messages else None
        transcript.append("user", prompt, image=attach, stage=stage)
        request = ChatRequest(
            messages=transcript.messages,
            model=endpoint.model,
            method=METHOD_COT,
            query_id=query.query_id,
            stage=stage,
            iteration=iteration,
            query=query,
            graph=graph,
        )
        reply = _complete_cached(endpoint, request, cache)
        transcript.append("assistant", reply, stage=stage)
        return reply

    ask(_STAGE_LOCALIZATION, _render_prompt("cot_localization", start=start, end=end))
    ask(_STAGE_SURROUNDING, _render_prompt("cot_surrounding", start=start))

    connect_prompt = _render_prompt("cot_connect", start=start, end=end)
    iterations = 0
    reached = False
    for iteration in range(max_iters):
        reply = ask(_STAGE_CONNECT, connect_prompt, iteration=iteration)
        iterations += 1
        if mentions_destination(reply, end):
            reached = True
            break

    final = ask(_STAGE_SUMMARIZE, _render_prompt("cot_summarize", start=start, end=end))

    if transcript_dir is not None:
        directory = Path(transcript_dir)
        directory.mkdir(parents=True, exist_ok=True)
        name = f"{query.query_id}-{endpoint.model}-cot.jsonl"
        (directory / name).write_text(transcript.to_jsonl(), encoding="utf-8")

    return CotRun(
        text=final,
        transcript=transcript,
        connect_iterations=iterations,
        max_iters_exceeded=not reached,
    )


# -- suite runner ------------------------------------------------------------------


@dataclass(frozen=True)
class SuiteResult:
    """Classified records plus the raw responses and any transport errors."""

    records: tuple[EvalRecord, ...]
    responses: tuple[dict, ...]
    errors: tuple[dict, ...]
    scene_of: Mapping[str, str]
    method: str

    def header(self) -> dict:
        return {
            "method": self.method,
            "temperature": TEMPERATURE,
            "prompts_version": _prompts()["version"],
            "queries": len(self.responses) + len(self.errors),
            "transport_errors": len(self.errors),
        }

    # Quality: rows per (method, model), one column of mean PQS per scene.
    def quality_rows(self) -> list[dict]:
        scenes = sorted(set(self.scene_of.values()))
        by_model: dict[str, dict[str, list[float]]] = {}
        for record in self.records:
            if record.status is not EvalStatus.SCORED or record.pqs is None:
                continue
            scene = self.scene_of.get(record.query_id, "unknown")
            by_model.setdefault(record.model or "", {}).setdefault(scene, []).append(
                record.pqs
            )
        rows = []
        for model in sorted(by_model):
            row = {"method": self.method, "model": model}
            for scene in scenes:
                values = by_model[model].get(scene)
                row[scene] = round(statistics.fmean(values), 4) if values else None
            rows.append(row)
        return rows

    # Failures: percentage of each failure class per (method, model).
    def failure_rows(self) -> list[dict]:
        counts: dict[str, dict[EvalStatus, int]] = {}
        totals: dict[str, int] = {}
        for record in self.records:
            model = record.model or ""
            totals[model] = totals.get(model, 0) + 1
            counts.setdefault(model, {}).setdefault(record.status, 0)
            counts[model][record.status] += 1
        rows = []
        for model in sorted(totals):
            total = totals[model]

            def pct(status: EvalStatus) -> float:
                return round(100.0 * counts[model].get(status, 0) / total, 4)

            rows.append(
                {
                    "method": self.method,
                    "model": model,
                    "missing_paths": pct(EvalStatus.MISSING_PATH),
                    "linguistic_incoherence": pct(EvalStatus.LINGUISTIC_INCOHERENCE),
                    "format_non_compliance": pct(EvalStatus.FORMAT_NON_COMPLIANCE),
                }
            )
        return rows

    def render_quality(self, fmt: str = "table") -> str:
        return _render_rows(self.quality_rows(), fmt, self.header())

    def render_failures(self, fmt: str = "table") -> str:
        return _render_rows(self.failure_rows(), fmt, self.header())


def _render_rows(rows: list[dict], fmt: str, header: dict) -> str:
    if fmt == "jsonl":
        lines = [json.dumps({"header": header}, ensure_ascii=False, sort_keys=True)]
        lines += [json.dumps(r, ensure_ascii=False, sort_keys=True) for r in rows]
        return "\n".join(lines) + "\n"
    columns = list(rows[0]) if rows else ["method", "model"]
    if fmt == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow(["" if row[c] is None else row[c] for c in columns])
        return buffer.getvalue()
    if fmt == "table":
        head = " ".join(f"{key}={value}" for key, value in sorted(header.items()))
        cells = [
            ["" if row[c] is None else str(row[c]) for c in columns] for row in rows
        ]
        widths = [
            max(len(columns[i]), *(len(r[i]) for r in cells)) if cells else len(columns[i])
            for i in range(len(columns))
        ]
        lines = [f"# {head}"]
        lines.append("  ".join(c.ljust(w) for c, w in zip(columns, widths)).rstrip())
        for row in cells:
            lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def _resolve_image(graph: SceneGraph, image_dir: str | Path | None) -> str | None:
    path = graph.meta.image_path
    if not path:
        return None
    candidate = Path(path)
    if not candidate.is_absolute() and image_dir is not None:
        candidate = Path(image_dir) / candidate
    return str(candidate) if candidate.exists() else None


def collect_responses(
    endpoints: Iterable[ChatBackend],
    graphs: Mapping[str, SceneGraph],
    queries: Iterable[Query],
    method: str,
    cache: ResponseCache | None = None,
    jobs: int = DEFAULT_JOBS,
    max_iters: int = DEFAULT_MAX_ITERS,
    image_dir: str | Path | None = None,
    transcript_dir: str | Path | None = None,
) -> tuple[list[dict], list[dict]]:
    """Fan endpoints x queries out over a worker pool.

    Returns (responses, errors); a transport failure on one query never
    aborts the rest.
    """
    if method not in (METHOD_ZERO_SHOT, METHOD_COT):
        raise ValueError(f"unknown method {method!r}")
    missing = sorted({q.map_id for q in queries} - set(graphs))
    if missing:
        raise ValueError(f"queries reference unknown graphs: {missing}")
    tasks = sorted(
        ((endpoint, query) for endpoint in endpoints for query in queries),
        key=lambda pair: (pair[0].model, pair[1].query_id),
    )

    def run(task):
        endpoint, query = task
        graph = graphs[query.map_id]
        image = _resolve_image(graph, image_dir)
        base = {
            "query_id": query.query_id,
            "model": endpoint.model,
            "method": method,
            "map_id": query.map_id,
            "start": query.start,
            "end": query.end,
        }
        try:
            if method == METHOD_ZERO_SHOT:
                return {
                    **base,
                    "response_text": run_zero_shot(
                        endpoint, image, query, graph, cache=cache
                    ),
                }, None
            run = run_cot_detailed(
                endpoint,
                image,
                query,
                graph,
                max_iters=max_iters,
                cache=cache,
                transcript_dir=transcript_dir,
            )
            record = {**base, "response_text": run.text}
            if run.max_iters_exceeded:
                record["max_iters_exceeded"] = True
            return record, None
        except TransportError as exc:
            return None, {**base, "error": exc.code, "detail": str(exc)}

    responses: list[dict] = []
    errors: list[dict] = []
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        for response, error in pool.map(run, tasks):
            if response is not None:
                responses.append(response)
            if error is not None:
                errors.append(error)
    responses.sort(key=lambda r: (r["model"], r["query_id"]))
    errors.sort(key=lambda r: (r["model"], r["query_id"]))
    return responses, errors


def score_responses(
    responses: Iterable[dict],
    graphs: Mapping[str, SceneGraph],
    queries: Mapping[str, Query] | None = None,
    threshold: float = FUZZY_THRESHOLD,
) -> list[EvalRecord]:
    """Classify raw response records against their graphs and queries."""
    queries = queries or {}
    records = []
    for doc in responses:
        query_id = doc["query_id"]
        if "map_id" in doc and "start" in doc and "end" in doc:
            map_id, start, end = doc["map_id"], doc["start"], doc["end"]
        elif query_id in queries:
            query = queries[query_id]
            map_id, start, end = query.map_id, query.start, query.end
        else:
            raise ValueError(
                f"response {query_id!r} carries no endpoints and no query "
                "definition was supplied"
            )
        if map_id not in graphs:
            raise ValueError(
                f"response {query_id!r} references unknown graph {map_id!r}"
            )
        graph = graphs[map_id]
        parsed = langparse.parse_response(doc["response_text"])
        records.append(
            langparse.classify(
                parsed,
                (start, end),
                graph,
                threshold=threshold,
                model=doc.get("model"),
                method=doc.get("method"),
                query_id=query_id,
            )
        )
    records.sort(key=lambda r: (r.model or "", r.query_id))
    return records


def run_suite(
    endpoints: Iterable[ChatBackend],
    graphs: Mapping[str, SceneGraph],
    queries: Iterable[Query],
    method: str,
    cache: ResponseCache | None = None,
    jobs: int = DEFAULT_JOBS,
    max_iters: int = DEFAULT_MAX_ITERS,
    image_dir: str | Path | None = None,
    transcript_dir: str | Path | None = None,
    threshold: float = FUZZY_THRESHOLD,
) -> SuiteResult:
    """Collect responses, classify them, and aggregate the report tables."""
    query_list = sorted(queries, key=lambda q: q.query_id)
    responses, errors = collect_responses(
        endpoints,
        graphs,
        query_list,
        method,
        cache=cache,
        jobs=jobs,
        max_iters=max_iters,
        image_dir=image_dir,
        transcript_dir=transcript_dir,
    )
    records = score_responses(responses, graphs, threshold=threshold)
    scene_of = {
        q.query_id: graphs[q.map_id].meta.scene_type.value for q in query_list
    }
    return SuiteResult(
        records=tuple(records),
        responses=tuple(responses),
        errors=tuple(errors),
        scene_of=scene_of,
        method=method,
    )


def responses_to_jsonl(responses: Iterable[dict]) -> str:
    return "".join(
        json.dumps(doc, ensure_ascii=False, sort_keys=True) + "\n"
        for doc in responses
    )
