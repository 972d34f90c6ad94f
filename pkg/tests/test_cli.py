import csv
import io
import json

import pytest

from ssc_lab import cli


def _small_contraction(outputs):
    return {
        "name": "tiny-contraction",
        "kind": "contraction",
        "params": {
            "seed": 7, "chain": [{"radius": 1.0}], "p": 2.0, "pairs": 300, "bound": 0.5,
            "fixed_point": {"start": {"explicit": [[1, 2.0]]}, "tol": 1e-10, "max_iter": 60},
            "preimage_points": 20,
        },
        "outputs": outputs,
    }


def test_contraction_config_writes_csv(tmp_path):
    path = tmp_path / "out" / "c.csv"
    cfg = _small_contraction([{"format": "csv", "path": str(path)}])
    cfg_file = tmp_path / "cfg.json"
    cfg_file.write_text(json.dumps(cfg))
    out = io.StringIO()
    assert cli.run_path(str(cfg_file), stdout=out) == 0
    assert "status 0" in out.getvalue()
    rows = dict(csv.reader(path.read_text().splitlines()[1:]))
    assert float(rows["max_ratio"]) <= 0.5
    assert rows["preimage_agree"] == rows["preimage_decided"] == "20"


def test_no_outputs_prints_document():
    out = io.StringIO()
    assert cli.run_config(_small_contraction([]), stdout=out) == 0
    doc = json.loads(out.getvalue())
    assert doc["verdict"] == "true" and doc["status"] == 0
    assert doc["summary"]["fixed_point"]["converged"]


def test_expected_failure_is_recorded(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert cli.demo("example-4-1", stdout=io.StringIO()) == 0
    doc = json.loads((tmp_path / "ssc-lab-out" / "example-4-1.json").read_text())
    assert doc["summary"]["pointwise"]["recorded_as"] == "expected-failure"
    assert doc["summary"]["families"]["mismatches"] == []
    svg = (tmp_path / "ssc-lab-out" / "example-4-1.svg").read_text()
    assert svg.startswith("<svg") and "polyline" in svg


def test_mismatched_expectation_gives_status_2():
    cfg = cli.load_demo("example-4-1")
    cfg["outputs"] = []
    cfg["params"]["cases"][0]["expect"] = "true"
    assert cli.run_config(cfg, stdout=io.StringIO()) == 2


def test_demo_listing_and_unknown_demo(capsys):
    assert "borel-parity" in cli.list_demos()
    err = io.StringIO()
    assert cli.demo("nope", stderr=err) == 1
    msg = json.loads(err.getvalue())
    assert msg["error"] == "unknown demo" and "example-4-1" in msg["available"]
    assert cli.main(["list-demos"]) == 0
    assert "claim2-contraction" in capsys.readouterr().out.split()


def test_borel_demo_via_main(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    assert cli.main(["demo", "borel-parity"]) == 0
    rows = list(csv.DictReader((tmp_path / "ssc-lab-out" / "borel-parity.csv").open()))
    assert rows and all(r["verdict"] in ("true", "false") for r in rows)


@pytest.mark.parametrize("text", [
    "{not json",
    json.dumps({"name": "x", "kind": "teleport", "params": {"seed": 1}}),
    json.dumps({"name": "x", "kind": "baire2", "params": {"points": 3}}),
    json.dumps({"name": "x", "kind": "baire2", "params": {"seed": 1, "points": 3},
                "outputs": [{"format": "svg", "path": "a.svg"}]}),
])
def test_bad_configs_exit_1_with_json_error(tmp_path, text):
    f = tmp_path / "bad.json"
    f.write_text(text)
    err = io.StringIO()
    assert cli.run_path(str(f), stdout=io.StringIO(), stderr=err) == 1
    assert json.loads(err.getvalue())["error"] == "config"


def test_missing_config_file(tmp_path):
    err = io.StringIO()
    assert cli.run_path(str(tmp_path / "absent.json"), stderr=err) == 1
    assert "cannot read" in json.loads(err.getvalue())["message"]


def test_outputs_are_byte_identical_across_runs(tmp_path, monkeypatch):
    blobs = []
    for sub in ("a", "b"):
        d = tmp_path / sub
        d.mkdir()
        monkeypatch.chdir(d)
        for name in ("baire2-chi", "determining-sets"):
            assert cli.demo(name, stdout=io.StringIO()) == 0
        blobs.append({p.name: p.read_bytes() for p in sorted((d / "ssc-lab-out").iterdir())})
    assert blobs[0] == blobs[1] and len(blobs[0]) == 4


def test_seed_override_changes_samples():
    a = cli.load_demo("baire2-chi")
    b = cli.load_demo("baire2-chi")
    b["params"]["seed"] = 1
    _, da, ra = cli.execute(a)
    _, db, rb = cli.execute(b)
    assert da["seed"] == cli.DEMO_SEED and db["seed"] == 1
    assert ra.rows != rb.rows
