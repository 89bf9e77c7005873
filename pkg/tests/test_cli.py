"""CLI dispatch, exit codes, manifests, and byte-determinism."""

import json
import math
from pathlib import Path

import pytest

from hkvol.cli import balls_from_json, balls_to_json, main, validate_manifest
from hkvol.tilings import lattice_balls


def run(args):
    return main(args)


class TestDispatch:
    def test_no_args_usage(self, capsys):
        assert main([]) == 2
        assert "usage" in capsys.readouterr().err

    def test_unknown_command(self):
        assert main(["frobnicate"]) == 2

    def test_bad_flag(self):
        assert main(["bounds", "--k", "2", "--bogus"]) == 2

    def test_invalid_value(self, tmp_path):
        assert main(["volumes", "--delta", "-1", "--output-dir", str(tmp_path)]) == 2


class TestBounds:
    def test_k2_value(self, tmp_path):
        assert run(["bounds", "--k", "2", "--output-dir", str(tmp_path)]) == 0
        doc = json.loads((tmp_path / "bounds.json").read_text())
        assert doc["upper_bound"] == pytest.approx(3.1045588330612803)
        assert doc["n"] == 24


class TestVolumes:
    def test_delta_one(self, tmp_path):
        assert run([
            "volumes", "--delta", "1", "--samples", "262144",
            "--output-dir", str(tmp_path),
        ]) == 0
        doc = json.loads((tmp_path / "volumes.json").read_text())
        rec = doc[0]
        assert rec["closed_form"] == pytest.approx(2.0 * math.pi / 3.0)
        assert rec["mc_value"] == pytest.approx(rec["closed_form"], rel=0.02)
        csv_text = (tmp_path / "volumes.csv").read_text()
        assert "." in csv_text and "," in csv_text.splitlines()[0]


class TestManifest:
    def test_written_and_valid(self, tmp_path):
        run(["bounds", "--k", "3", "--output-dir", str(tmp_path)])
        doc = json.loads((tmp_path / "manifest.json").read_text())
        assert validate_manifest(doc)
        assert doc["command"] == "bounds"
        assert doc["config"]["k"] == 3
        assert "bounds.json" in doc["outputs"]
        assert "timestamp" not in json.dumps(doc).lower()

    def test_validator_rejects_malformed(self):
        assert not validate_manifest({"command": "x"})
        assert not validate_manifest([])
        assert not validate_manifest({"command": 1, "config": {}, "outputs": []})


class TestDeterminism:
    def test_repeated_runs_byte_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert run([
                "volumes", "--delta", "0.5", "1", "--samples", "65536",
                "--seed", "3", "--output-dir", str(out),
            ]) == 0
        for name in ("volumes.json", "volumes.csv", "manifest.json"):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_diagram_svg_byte_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert run([
                "diagram", "--k", "1", "--samples", "256", "--output-dir", str(out),
            ]) == 0
        assert (a / "diagram_slice.svg").read_bytes() == (b / "diagram_slice.svg").read_bytes()
        assert (a / "diagram_points.csv").read_bytes() == (b / "diagram_points.csv").read_bytes()

    def test_seed_changes_output(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        run(["volumes", "--delta", "1", "--samples", "65536", "--seed", "1", "--output-dir", str(a)])
        run(["volumes", "--delta", "1", "--samples", "65536", "--seed", "2", "--output-dir", str(b)])
        assert (a / "volumes.json").read_bytes() != (b / "volumes.json").read_bytes()


class TestConfigSerialization:
    def test_roundtrip(self):
        balls = tuple(lattice_balls(2))
        doc = balls_to_json(balls)
        again = balls_from_json(doc)
        assert again == balls
        assert set(doc[0]) == {"center", "radius"}
        assert len(doc[0]["center"]) == 3

    def test_tile_config_loadable(self, tmp_path):
        run(["tile", "--k", "2", "--output-dir", str(tmp_path)])
        doc = json.loads((tmp_path / "tile_config.json").read_text())
        balls = balls_from_json(doc)
        assert len(balls) == 24
