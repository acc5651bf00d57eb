"""Python front end for the lokg core.

Documents (taxonomies, graphs) stay as JSON text so they can be written to
disk unchanged; reports come back as dicts.
"""

import json

from ._lokg import LokgError, best_match_average, clean_text, default_config
from . import _lokg

__all__ = [
    "LokgError",
    "best_match_average",
    "build",
    "clean_text",
    "default_config",
    "filter",
    "generate",
    "metrics",
    "mine",
    "run",
]


def generate(seed=7, journeys=20, n_domains=4, overlap=0.2, bilingual=0.2):
    """Synthetic taxonomy document and its ground-truth labels (dict)."""
    doc, labels = _lokg.generate(seed, journeys, n_domains, overlap, bilingual)
    return doc, json.loads(labels)


def filter(document):  # noqa: A001 - mirrors the CLI stage name
    """Cleaned taxonomy document and the removal report."""
    doc, report = _lokg.filter(document)
    return doc, json.loads(report)


def mine(document, threshold=0.88, jobs=0):
    """Mining summary with the passed verdicts under "passed"."""
    return json.loads(_lokg.mine(document, threshold, jobs))


def build(document, verdicts):
    """Knowledge graph document from a taxonomy and passed verdicts."""
    return _lokg.build(document, json.dumps(verdicts))


def metrics(kg_document, bc="exact"):
    """Hierarchy-only vs completed graph comparison."""
    return json.loads(_lokg.metrics(kg_document, bc))


def run(config_path, reproducible=True):
    """All stages for an INI config; returns the per-stage summaries."""
    return json.loads(_lokg.run(str(config_path), reproducible))
