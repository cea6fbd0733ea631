import itertools
import json
import math
import os
from pathlib import Path

import jsonschema
import pytest

import sciatlas

FIXTURE = Path(os.environ.get("SCIATLAS_FIXTURE_DIR", Path(__file__).resolve().parents[2] / "data" / "fixture"))
SCHEMA = Path(os.environ.get("SCIATLAS_SCHEMA", Path(__file__).resolve().parents[2] / "schema" / "map_data.schema.json"))


def direct_cpm(n, edges, labels, gamma, weights=None):
    weights = weights or [1.0] * n
    internal, size = {}, {}
    for u, v, w in edges:
        if labels[u] == labels[v]:
            internal[labels[u]] = internal.get(labels[u], 0.0) + w
    for i, c in enumerate(labels):
        size[c] = size.get(c, 0.0) + weights[i]
    return sum(internal.get(c, 0.0) - gamma * s * (s - 1) / 2 for c, s in size.items())


def partitions(n):
    # Restricted growth strings enumerate every set partition once.
    def grow(prefix, top):
        if len(prefix) == n:
            yield list(prefix)
            return
        for c in range(top + 2):
            yield from grow(prefix + [c], max(top, c))

    yield from grow([0], 0)


TRIANGLES = [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0), (3, 4, 1.0), (4, 5, 1.0), (3, 5, 1.0), (2, 3, 1.0)]


def test_cpm_matches_direct_formula():
    labels = [0, 0, 0, 1, 1, 1]
    assert sciatlas.cpm_quality(6, TRIANGLES, labels, 0.1) == pytest.approx(direct_cpm(6, TRIANGLES, labels, 0.1))
    assert sciatlas.cpm_quality(3, [], [0, 0, 0], 1.0) == pytest.approx(-3.0)


def test_leiden_splits_bridged_triangles():
    labels = sciatlas.leiden(6, TRIANGLES, 0.3, seed=1)
    assert labels[0] == labels[1] == labels[2]
    assert labels[3] == labels[4] == labels[5]
    assert labels[0] != labels[3]


def test_leiden_against_enumeration():
    edges = [(0, 1, 0.9), (1, 2, 0.4), (2, 3, 0.8), (3, 4, 0.7), (4, 0, 0.2), (1, 3, 0.3), (2, 4, 0.6)]
    gamma = 0.25
    best = max(direct_cpm(5, edges, p, gamma) for p in partitions(5))
    got = direct_cpm(5, edges, sciatlas.leiden(5, edges, gamma, seed=3), gamma)
    assert got <= best + 1e-9
    assert got >= best - 0.05 * abs(best)


def test_leiden_rejects_bad_input():
    with pytest.raises(sciatlas.Error):
        sciatlas.leiden(2, [(0, 1, 1.0)], -1.0)
    with pytest.raises(sciatlas.Error):
        sciatlas.leiden(2, [(0, 5, 1.0)], 0.1)


def test_node_size_and_hyperlinks():
    assert sciatlas.node_size(31763) == pytest.approx(math.sqrt(31763))
    assert sciatlas.node_size(400, "Specialty") == pytest.approx(10.0)
    h = sciatlas.hyperlinks([str(i) for i in range(3825)])
    assert h["sentinel"] is None
    assert len(h["links"]) == 8
    assert h["links"][-1][0] == "3501-3825"
    assert sciatlas.hyperlinks([str(i) for i in range(5001)])["sentinel"] == "Too many publ. (5001)"


def test_tfs_and_placement():
    assert sciatlas.tfs_score(8, 10, 0.5) == pytest.approx(math.sqrt(6.4), abs=1e-12)
    raw = [(1.0, 2.0), (-3.0, 0.5), (4.0, 4.0)]
    placed = sciatlas.place_children(raw, (10.0, -5.0), 0.5)
    cx = sum(p[0] for p in placed) / 3
    cy = sum(p[1] for p in placed) / 3
    assert (cx, cy) == pytest.approx((10.0, -5.0), abs=1e-12)
    assert sciatlas.place_children([(7.0, 7.0)], (1.0, 2.0), 0.5) == [(1.0, 2.0)]


def test_pipeline_bundle_matches_schema(tmp_path):
    out = tmp_path / "run"
    sciatlas.run_all(FIXTURE / "pipeline.json", [f"output_dir={json.dumps(str(out))}"])
    schema = json.loads(SCHEMA.read_text())
    assert sciatlas.map_data_schema() == schema
    bundles = [out / "bundle"] + sorted((out / "overlays").iterdir())
    assert len(bundles) == 4
    base = json.loads((out / "bundle" / "data.json").read_text())
    for b in bundles:
        data = json.loads((b / "data.json").read_text())
        jsonschema.validate(data, schema)
        report = sciatlas.validate_bundle(b)
        assert report["valid"], report
        # Overlays reuse the base coordinates exactly.
        coords = {n["id"]: (n["x"], n["y"]) for n in data["nodes"]}
        assert coords == {n["id"]: (n["x"], n["y"]) for n in base["nodes"]}


def test_stage_refuses_stale_checkpoint(tmp_path):
    out = tmp_path / "run"
    overrides = [f"output_dir={json.dumps(str(out))}"]
    sciatlas.run_stage("ingest", FIXTURE / "pipeline.json", overrides)
    sciatlas.run_stage("cluster", FIXTURE / "pipeline.json", overrides)
    with pytest.raises(sciatlas.Error):
        sciatlas.run_stage("label", FIXTURE / "pipeline.json", overrides + ["seed=7"])
    sciatlas.run_stage("label", FIXTURE / "pipeline.json", overrides + ["seed=7"], force=True)


def test_synthesize_writes_corpus(tmp_path):
    sciatlas.synthesize(tmp_path, publications=300, seed=5)
    lines = (tmp_path / "publications.jsonl").read_text().splitlines()
    assert len(lines) >= 300
    assert all(json.loads(line)["pub_id"] for line in itertools.islice(lines, 20))
    assert (tmp_path / "citations.tsv").stat().st_size > 0
