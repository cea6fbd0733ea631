"""Citation-network base maps of science.

Thin wrapper over the C++ core. Graphs are passed as a node count plus a list
of ``(u, v, weight)`` tuples; partitions come back as one cluster id per node,
numbered by decreasing cluster size.
"""

import json

from ._core import (
    Error,
    InputError,
    cpm_quality,
    hyperlinks,
    leiden,
    node_size,
    output_dir,
    place_children,
    run_all,
    run_stage,
    synthesize,
    tfs_score,
)
from ._core import map_data_schema_json as _schema_json
from ._core import validate_bundle_json as _validate_json

__all__ = [
    "Error",
    "InputError",
    "cpm_quality",
    "hyperlinks",
    "leiden",
    "map_data_schema",
    "node_size",
    "output_dir",
    "place_children",
    "run_all",
    "run_stage",
    "synthesize",
    "tfs_score",
    "validate_bundle",
]


def validate_bundle(path):
    """Report dict with ``valid`` and ``errors`` for a bundle directory."""
    return json.loads(_validate_json(str(path)))


def map_data_schema():
    return json.loads(_schema_json())
