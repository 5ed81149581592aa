"""Social event detection in hyperbolic space + toponym-chain geolocation."""

from ._core import (
    Error,
    EvalError,
    Gazetteer,
    GazetteerEntry,
    GeoPoint,
    Message,
    ParseError,
    UnlocatableError,
    ValidationError,
    acc_at,
    centroid,
    detect_clusters,
    embed_text,
    evaluate,
    exp_map,
    format_rfc3339,
    geolocate_cluster,
    haversine,
    load_dataset,
    log_map,
    ole_date,
    parse_rfc3339,
    run_pipeline,
    tokenize,
)

__all__ = [
    "Error",
    "EvalError",
    "Gazetteer",
    "GazetteerEntry",
    "GeoPoint",
    "Message",
    "ParseError",
    "UnlocatableError",
    "ValidationError",
    "acc_at",
    "centroid",
    "detect_clusters",
    "embed_text",
    "evaluate",
    "exp_map",
    "format_rfc3339",
    "geolocate_cluster",
    "haversine",
    "load_dataset",
    "log_map",
    "ole_date",
    "parse_rfc3339",
    "run_pipeline",
    "tokenize",
]
