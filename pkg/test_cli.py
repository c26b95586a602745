"""
Tests for the rideforge command line
"""
import json

import pandas as pd

from experiments.generator import generate_batch
from models.instance import load_instance, save_instance
from models.schemas import GeneratorConfig
from rideforge import main


def test_demo(tmp_path, capsys):
    out = tmp_path / "demo.json"
    assert main(["demo", "--json", str(out)]) == 0
    assert "WMS winner: R [1, 2]" in capsys.readouterr().out
    docs = json.loads(out.read_text(encoding='utf-8'))
    assert set(docs) == {"wms", "ums", "vcgs"}
    assert docs["wms"]["prices"]["1"] == {"num": 20, "den": 3}


def test_gen_then_run(tmp_path):
    instances = tmp_path / "instances"
    report = tmp_path / "report.csv"
    assert main(["gen", "--n", "4", "--count", "3", "--seed", "5", "--out", str(instances)]) == 0
    files = sorted(p.name for p in instances.glob("*.json"))
    assert files == ["instance_0000.json", "instance_0001.json", "instance_0002.json"]

    assert main(["run", "--in", str(instances), "--variants", "WMS-UB,VCG", "--out", str(report)]) == 0
    frame = pd.read_csv(report)
    assert set(frame["variant"]) <= {"WMS-UB", "VCG"}
    assert "time_ms" not in set(frame["metric"])


def test_gen_is_reproducible(tmp_path):
    first, second = tmp_path / "a", tmp_path / "b"
    main(["gen", "--n", "3", "--seed", "9", "--out", str(first)])
    main(["gen", "--n", "3", "--seed", "9", "--out", str(second)])
    assert (first / "instance_0000.json").read_bytes() == (second / "instance_0000.json").read_bytes()


def test_run_without_instances_fails(tmp_path, capsys):
    assert main(["run", "--in", str(tmp_path), "--out", str(tmp_path / "r.csv")]) == 1
    assert "no instance files" in capsys.readouterr().out


def test_run_rejects_unknown_variant(tmp_path):
    main(["gen", "--n", "3", "--out", str(tmp_path)])
    assert main(["run", "--in", str(tmp_path), "--variants", "Nope", "--out", str(tmp_path / "r.csv")]) == 1


def test_run_rejects_malformed_instance(tmp_path, capsys):
    (tmp_path / "bad.json").write_text(json.dumps({"version": 1, "n": 2}), encoding='utf-8')
    assert main(["run", "--in", str(tmp_path), "--out", str(tmp_path / "r.csv")]) == 1
    assert "Validation failed" in capsys.readouterr().out


def test_verify_writes_summary(tmp_path, capsys):
    summary = tmp_path / "summary.json"
    code = main(["verify", "--suite", "critical", "--samples", "1", "--summary", str(summary)])
    assert code == 0
    assert capsys.readouterr().out.strip().endswith("PASS")
    data = json.loads(summary.read_text(encoding='utf-8'))
    assert data["suite"] == "critical"
    assert all(v == 0 for v in data["violations"].values())


def test_sweep(tmp_path):
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--n-list", "3", "--sigma-list", "0,3", "--count", "2",
                 "--variants", "WMS-Direct", "--out", str(out)]) == 0
    frame = pd.read_csv(out)
    assert list(frame.columns) == ["n", "sigma", "variant", "metric", "mean", "std", "count"]
    assert set(frame["sigma"]) == {0.0, 3.0}


def test_run_rejects_negative_matrix_entry(tmp_path, capsys, two_passenger_line):
    path = save_instance(two_passenger_line, tmp_path / "negative.json")
    data = json.loads(path.read_text(encoding='utf-8'))
    data["geometry"]["travel_cost"][3][4] = -50
    path.write_text(json.dumps(data), encoding='utf-8')
    assert main(["run", "--in", str(tmp_path), "--out", str(tmp_path / "r.csv")]) == 1
    assert "negative-entry at travel_cost[3][4]" in capsys.readouterr().out
    assert not (tmp_path / "r.csv").exists()


def test_gen_writes_the_derived_batch(tmp_path):
    assert main(["gen", "--n", "3", "--count", "2", "--seed", "4", "--out", str(tmp_path)]) == 0
    batch = generate_batch(GeneratorConfig(n=3, seed=4), 2)
    for k, expected in enumerate(batch):
        loaded = load_instance(tmp_path / f"instance_000{k}.json")
        assert loaded.travel_cost == expected.travel_cost
        assert loaded.bids() == expected.bids()
