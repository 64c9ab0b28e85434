"""Scene-graph toolkit for human-readable maps.

Validates annotated map graphs, computes complexity and query-difficulty
indices, converts between graph paths and natural-language navigation,
and drives vision-language models over benchmark queries with caching
and deterministic offline stubs.
"""

from .core import (
    DEFAULT_PATH_CAP,
    Edge,
    EdgeKind,
    GraphPath,
    IntersectionNode,
    LandmarkNode,
    SceneGraph,
    SceneMeta,
    SceneType,
    Projection,
    LandmarkStyle,
    TraversableStyle,
    ValidationReport,
    Violation,
    all_simple_paths,
    shortest_path,
    validate,
)
from .langparse import (
    EvalRecord,
    EvalStatus,
    ParsedResponse,
    classify,
    get_locations,
    get_path,
    parse_response,
    split2edges,
    token_set_ratio,
)
from .metrics import (
    ComplexityReport,
    DifficultyLabel,
    GraphComplexity,
    aspli,
    classify_graph_difficulty,
    classify_query_difficulty,
    elements_index,
    meshedness_index,
    pqs,
    qdi,
)
from .narrate import Direction, NavInstruction, NavStep, get_direction, narrate_path
from .querygen import DatasetStats, Query, dataset_stats, generate_queries

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_PATH_CAP",
    "Edge",
    "EdgeKind",
    "GraphPath",
    "IntersectionNode",
    "LandmarkNode",
    "SceneGraph",
    "SceneMeta",
    "SceneType",
    "Projection",
    "LandmarkStyle",
    "TraversableStyle",
    "ValidationReport",
    "Violation",
    "all_simple_paths",
    "shortest_path",
    "validate",
    "EvalRecord",
    "EvalStatus",
    "ParsedResponse",
    "classify",
    "get_locations",
    "get_path",
    "parse_response",
    "split2edges",
    "token_set_ratio",
    "ComplexityReport",
    "DifficultyLabel",
    "GraphComplexity",
    "aspli",
    "classify_graph_difficulty",
    "classify_query_difficulty",
    "elements_index",
    "meshedness_index",
    "pqs",
    "qdi",
    "Direction",
    "NavInstruction",
    "NavStep",
    "get_direction",
    "narrate_path",
    "DatasetStats",
    "Query",
    "dataset_stats",
    "generate_queries",
    "__version__",
]
