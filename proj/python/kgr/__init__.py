"""Python bindings for the kgr knowledge-graph pipeline."""

from ._core import (
    KgrError,
    g2,
    load_checkpoint,
    metrics,
    parse_scores,
    read_predications,
    relation_presets,
    run,
    score,
    write_demo_corpus,
)

__all__ = [
    "KgrError",
    "g2",
    "load_checkpoint",
    "metrics",
    "parse_scores",
    "read_predications",
    "relation_presets",
    "run",
    "score",
    "write_demo_corpus",
]
