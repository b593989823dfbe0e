import json
import math

import jsonschema
import pytest

from teichpent.cli import main

HEXAGON_SCHEMA = {
    "type": "object",
    "required": ["segments", "turns", "first_axis", "labels"],
    "properties": {
        "segments": {
            "type": "array",
            "minItems": 5,
            "maxItems": 6,
            "items": {"type": "number", "minimum": 0},
        },
        "turns": {
            "type": "array",
            "minItems": 5,
            "maxItems": 6,
            "items": {"enum": ["+", "-", "0"]},
        },
        "first_axis": {"enum": ["H", "V"]},
        "labels": {
            "type": "object",
            "required": ["0", "p2", "1", "p4", "inf"],
            "additionalProperties": False,
            "properties": {
                name: {"type": "integer", "minimum": 0, "maximum": 5}
                for name in ("0", "p2", "1", "p4", "inf")
            },
        },
    },
}

PENTAGON_SCHEMA = {
    "type": "object",
    "required": ["p2", "p4"],
    "properties": {"p2": {"type": "number"}, "p4": {"type": "number"}},
}


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestHexagonCommand:
    def test_generic_json(self, capsys):
        code, out, _ = run(
            capsys, "hexagon", "--p2", "0.5", "--p4", "2", "--phi",
            "0.7853981633974483",
        )
        assert code == 0
        data = json.loads(out)
        jsonschema.validate(data, HEXAGON_SCHEMA)
        assert len(data["segments"]) == 6
        assert data["degenerate"] is False
        assert data["closure_residual"] < 1e-8

    def test_rectangular_flag(self, capsys):
        code, out, _ = run(capsys, "hexagon", "--p2", "0.5", "--p4", "2", "--phi", "0")
        assert code == 0
        data = json.loads(out)
        jsonschema.validate(data, HEXAGON_SCHEMA)
        assert data["degenerate"] is True
        assert "0" in data["turns"]

    def test_range_error_exit_2(self, capsys):
        code, _, err = run(capsys, "hexagon", "--p2", "2", "--p4", "3", "--phi", "1")
        assert code == 2
        assert "p2" in err

    def test_deterministic_output(self, capsys):
        args = ("hexagon", "--p2", "0.37", "--p4", "2.41", "--phi", "1.234")
        _, out1, _ = run(capsys, *args)
        _, out2, _ = run(capsys, *args)
        assert out1 == out2

    def test_svg_and_json_files(self, capsys, tmp_path):
        svg = tmp_path / "hex.svg"
        js = tmp_path / "hex.json"
        code, _, _ = run(
            capsys, "hexagon", "--p2", "0.5", "--p4", "2", "--phi", "0.9",
            "--svg", str(svg), "--json", str(js),
        )
        assert code == 0
        text = svg.read_text()
        assert "<svg" in text and "polygon" in text
        for label in ("0", "p2", "1", "p4", "inf", "z0"):
            assert f">{label}<" in text
        jsonschema.validate(json.loads(js.read_text()), HEXAGON_SCHEMA)


class TestExtremalCommand:
    def test_identity(self, capsys):
        code, out, _ = run(capsys, "extremal", "--p", "0.5,2", "--q", "0.5,2")
        assert code == 0
        assert "K = 1.0" in out
        assert "distance = 0.0" in out

    def test_malformed_q_exit_2(self, capsys):
        code, _, _ = run(capsys, "extremal", "--p", "0.5,2", "--q", "nonsense")
        assert code == 2

    def test_forward_construction(self, capsys, tmp_path):
        # Build the target with geodesic, then recover K = 2.
        csv = tmp_path / "ray.csv"
        code, out, _ = run(
            capsys, "geodesic", "--p", "0.5,2", "--phi", "1.0", "--kmax", "2",
            "--steps", "1", "--csv", str(csv),
        )
        assert code == 0
        row = csv.read_text().splitlines()[1].split(",")
        q = f"{row[1]},{row[2]}"
        code, out, _ = run(capsys, "extremal", "--p", "0.5,2", "--q", q)
        assert code == 0
        k_line = next(line for line in out.splitlines() if line.startswith("K ="))
        assert float(k_line.split("=")[1]) == pytest.approx(2.0, abs=1e-5)


class TestGeodesicCommand:
    def test_trivial_ray(self, capsys):
        code, out, _ = run(
            capsys, "geodesic", "--p", "0.5,2", "--phi", "0.3", "--kmax", "1",
            "--steps", "1",
        )
        assert code == 0
        values = out.strip().split(",")
        assert float(values[0]) == 1.0
        assert float(values[1]) == pytest.approx(0.5, abs=1e-8)
        assert float(values[2]) == pytest.approx(2.0, abs=1e-8)
        assert float(values[3]) == 0.0

    def test_csv_header(self, capsys, tmp_path):
        csv = tmp_path / "ray.csv"
        run(
            capsys, "geodesic", "--p", "0.5,2", "--phi", "0.3", "--kmax", "1",
            "--steps", "1", "--csv", str(csv),
        )
        assert csv.read_text().splitlines()[0] == "K,p2,p4,distance"


class TestAtlasCommand:
    def test_row_count_and_determinism(self, capsys, tmp_path):
        c1, c2 = tmp_path / "a1.csv", tmp_path / "a2.csv"
        code, _, _ = run(capsys, "atlas", "--grid", "2,3,4", "--csv", str(c1))
        assert code == 0
        run(capsys, "atlas", "--grid", "2,3,4", "--csv", str(c2))
        b1, b2 = c1.read_bytes(), c2.read_bytes()
        assert b1 == b2
        assert len(b1.splitlines()) == 1 + 2 * 3 * 4

    def test_bad_grid_exit_2(self, capsys):
        code, _, _ = run(capsys, "atlas", "--grid", "2,3")
        assert code == 2


class TestMapCommand:
    def test_identity_points(self, capsys, tmp_path):
        pts = tmp_path / "pts.txt"
        pts.write_text("0 1\n0.5 0.5\n-1 2\n")
        code, out, _ = run(capsys, "map", "--p", "0.5,2", "--q", "0.5,2",
                           "--points", str(pts))
        assert code == 0
        originals = [(0.0, 1.0), (0.5, 0.5), (-1.0, 2.0)]
        for line, (re0, im0) in zip(out.strip().splitlines(), originals):
            re1, im1 = (float(v) for v in line.split())
            assert abs(complex(re1, im1) - complex(re0, im0)) < 1e-8


class TestSelftest:
    def test_fast_passes(self, capsys):
        import time

        start = time.perf_counter()
        code, out, _ = run(capsys, "selftest", "--fast")
        elapsed = time.perf_counter() - start
        assert code == 0
        assert "FAIL" not in out
        assert elapsed < 60.0


class TestEnvironmentTolerance:
    def test_tol_env_override(self, capsys, monkeypatch):
        monkeypatch.setenv("TEICHPENT_TOL", "1e-6")
        code, out, _ = run(
            capsys, "hexagon", "--p2", "0.5", "--p4", "2", "--phi", "0.9"
        )
        assert code == 0
        json.loads(out)
