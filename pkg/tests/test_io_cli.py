import json
from math import comb
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from equimeasure import cli, io, sphere
from equimeasure.measures import DiscreteMeasure

CONFIGS = Path(__file__).resolve().parents[1] / "demos" / "configs"


def write_config(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def run(args, capsys):
    code = cli.main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def strip_timestamp(text):
    doc = json.loads(text)
    doc["metadata"].pop("timestamp")
    return doc


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 20))
def test_measure_json_round_trip_is_exact(seed, n):
    rng = np.random.default_rng(seed)
    w = rng.random(n)
    mu = DiscreteMeasure(sphere.sample_uniform(n, seed), w / w.sum())
    back = io.measure_from_records(json.loads(io.measure_to_json(mu)))
    np.testing.assert_array_equal(back.points, mu.points)
    np.testing.assert_array_equal(back.weights, mu.weights)


def test_measure_csv_round_trip_is_exact(tmp_path):
    mu = DiscreteMeasure.uniform(sphere.sample_uniform(7, 3, dim=3))
    path = tmp_path / "m.csv"
    path.write_text(io.measure_to_csv(mu))
    back = io.load_measure(path)
    np.testing.assert_array_equal(back.points, mu.points)
    np.testing.assert_array_equal(back.weights, mu.weights)
    assert path.read_text().splitlines()[0] == "x0,x1,x2,x3,weight"


def test_report_json_keeps_full_precision():
    text = io.report_to_json({"x": 0.1 + 0.2, "n": np.int64(3), "ok": np.bool_(True), "v": np.array([1.5])})
    doc = json.loads(text)
    assert doc == {"x": 0.30000000000000004, "n": 3, "ok": True, "v": [1.5]}


def test_config_errors_name_the_field():
    with pytest.raises(io.ConfigError) as info:
        io.build_map({"family": "rational", "numerator": [[1, 0], "x", [1, 0]]})
    assert info.value.field == "map.numerator[1]"
    with pytest.raises(io.ConfigError) as info:
        io.build_map({"family": "mobius"})
    assert info.value.field == "map.family"
    with pytest.raises(io.ConfigError) as info:
        io.parse_point({"coords": [1, 1, 0]}, 2, 0, "verify.seed_point")
    assert info.value.field == "verify.seed_point.coords"


def test_parse_point_forms():
    np.testing.assert_array_equal(io.parse_point({"chart": "inf"}, 2, 0, "p"), sphere.north_pole(2))
    np.testing.assert_allclose(io.parse_point({"chart": [1, 0]}, 2, 0, "p"), [1, 0, 0], atol=1e-16)
    a = io.parse_point("random", 3, 5, "p")
    np.testing.assert_array_equal(a, io.parse_point("random", 3, 5, "p"))
    assert a.shape == (4,)


def test_pullback_of_one_gives_roots_of_unity(tmp_path, capsys):
    cfg = {"schema_version": 1, "seed": 0,
           "map": {"family": "rational", "numerator": [[0, 0], [0, 0], [1, 0]]},
           "pullback": {"seed_point": {"chart": [1, 0]}, "k": 10, "prune_strategy": "none"}}
    code, out, _ = run(["pullback", "--config", write_config(tmp_path, cfg)], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["atoms"] == 1024 and len(doc["measure"]) == 1024
    assert abs(doc["total_mass"] - 1) < 1e-12
    assert {r["weight"] for r in doc["measure"]} == {1 / 1024}


def test_chebyshev_moments_from_the_cli(tmp_path, capsys):
    code, out, _ = run(["pullback", "--config", str(CONFIGS / "chebyshev_pullback.json")], capsys)
    assert code == 0
    doc = json.loads(out)
    moments = dict((j, v) for j, v in doc["moments"])
    for j in (1, 2, 3):
        assert moments[2 * j] == pytest.approx(comb(2 * j, j), rel=0.03)
        assert abs(moments[2 * j - 1]) < 0.03
    assert set(doc["snapshots"]) == {"4", "8"}


def test_cli_is_deterministic_apart_from_the_timestamp(tmp_path, capsys):
    args = ["pullback", "--config", str(CONFIGS / "square_pullback.json"), "--seed", "17", "--threads", "2"]
    _, first, _ = run(args, capsys)
    _, second, _ = run(args, capsys)
    assert strip_timestamp(first) == strip_timestamp(second)
    first_lines = [l for l in first.splitlines() if "timestamp" not in l]
    second_lines = [l for l in second.splitlines() if "timestamp" not in l]
    assert first_lines == second_lines


def test_malformed_coefficient_is_a_config_error(tmp_path, capsys):
    cfg = {"schema_version": 1, "seed": 0,
           "map": {"family": "rational", "numerator": [[0, 0], [0, "one"], [1, 0]]},
           "pullback": {"k": 2}}
    code, out, err = run(["pullback", "--config", write_config(tmp_path, cfg)], capsys)
    assert code == 2
    assert out == ""
    assert "map.numerator[1]" in err


def test_schema_version_is_checked(tmp_path, capsys):
    code, _, err = run(["pullback", "--config", write_config(tmp_path, {"schema_version": 2})], capsys)
    assert code == 2 and "schema_version" in err


def test_exceptional_seed_reports_failed_convergence(capsys):
    code, out, _ = run(["verify", "--config", str(CONFIGS / "exceptional_seed_verify.json")], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["status"] == "FAILED-CONVERGENCE"
    assert doc["seed_exceptional"] and doc["stuck_atom_mass"] == 1.0


def test_square_verify_passes(capsys):
    code, out, _ = run(["verify", "--config", str(CONFIGS / "square_verify.json")], capsys)
    assert code == 0
    assert json.loads(out)["status"] == "OK"


@pytest.mark.parametrize("name,command", [
    ("two_point_capacity.json", "capacity"),
    ("circle_capacity.json", "capacity"),
    ("square_deviation.json", "deviation"),
    ("lattes_exceptional.json", "exceptional"),
    ("chebyshev_mixing.json", "mixing"),
    ("zorich_pullback.json", "pullback"),
])
def test_demo_configs_run(name, command, tmp_path, capsys):
    out_path = tmp_path / "out.json"
    code, _, err = run([command, "--config", str(CONFIGS / name), "--out", str(out_path)], capsys)
    assert code == 0, err
    doc = json.loads(out_path.read_text())
    assert doc["metadata"]["subcommand"] == command


def test_csv_output(tmp_path, capsys):
    code, out, _ = run(["capacity", "--config", str(CONFIGS / "two_point_capacity.json"), "--format", "csv"], capsys)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "x0,x1,x2,weight" and len(lines) == 3
    code, _, err = run(["exceptional", "--config", str(CONFIGS / "lattes_exceptional.json"), "--format", "csv"], capsys)
    assert code == 2 and "--format" in err


def test_pullback_csv_writes_the_convergence_table(tmp_path, capsys):
    out = tmp_path / "measure.csv"
    code, _, _ = run(["pullback", "--config", str(CONFIGS / "square_pullback.json"), "--format", "csv",
                      "--out", str(out)], capsys)
    assert code == 0
    assert len(io.load_measure(out)) == 1024
    table = (tmp_path / "measure_convergence.csv").read_text().splitlines()
    assert table[0] == "k,deviation" and len(table) == 12
