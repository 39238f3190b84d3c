import math

import pytest

from midair.cli import EXIT_OK, EXIT_PARSE, EXIT_SCRIPT, main

from .conftest import GOLDEN, STATS, scene_path


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestReplay:
    def test_golden_walkthrough(self, tmp_path, capsys):
        out_scene = tmp_path / "final.json"
        out_effects = tmp_path / "effects.log"
        code, _, _ = run(
            capsys,
            "replay",
            "--scene", str(scene_path("lamp")),
            "--script", str(GOLDEN / "walkthrough_script.jsonl"),
            "--out-scene", str(out_scene),
            "--out-effects", str(out_effects),
        )
        assert code == EXIT_OK
        assert out_scene.read_bytes() == (GOLDEN / "walkthrough_final_scene.json").read_bytes()
        assert out_effects.read_bytes() == (GOLDEN / "walkthrough_effects.log").read_bytes()

    def test_empty_script_reserializes_input(self, tmp_path, capsys):
        script = tmp_path / "empty.jsonl"
        script.write_text("")
        out_scene = tmp_path / "out.json"
        out_effects = tmp_path / "fx.log"
        code, _, _ = run(
            capsys,
            "replay",
            "--scene", str(scene_path("wheel")),
            "--script", str(script),
            "--out-scene", str(out_scene),
            "--out-effects", str(out_effects),
        )
        assert code == EXIT_OK
        assert out_scene.read_bytes() == scene_path("wheel").read_bytes()
        assert out_effects.read_text() == ""

    def test_bad_script_line_number(self, tmp_path, capsys):
        script = tmp_path / "bad.jsonl"
        script.write_text('{"voice": "select"}\n{"voice": "append"}\n{"voice": "remove"}\n{oops}\n')
        code, _, err = run(
            capsys,
            "replay",
            "--scene", str(scene_path("lamp")),
            "--script", str(script),
            "--out-scene", str(tmp_path / "s.json"),
            "--out-effects", str(tmp_path / "e.log"),
        )
        assert code == EXIT_SCRIPT
        assert "line 4" in err

    def test_missing_script_file(self, tmp_path, capsys):
        code, _, err = run(
            capsys,
            "replay",
            "--scene", str(scene_path("lamp")),
            "--script", str(tmp_path / "nope.jsonl"),
            "--out-scene", str(tmp_path / "s.json"),
            "--out-effects", str(tmp_path / "e.log"),
        )
        assert code == EXIT_SCRIPT
        assert "cannot read script" in err

    def test_missing_scene(self, tmp_path, capsys):
        code, _, err = run(
            capsys,
            "replay",
            "--scene", str(tmp_path / "ghost.json"),
            "--script", str(GOLDEN / "walkthrough_script.jsonl"),
            "--out-scene", str(tmp_path / "s.json"),
            "--out-effects", str(tmp_path / "e.log"),
        )
        assert code == EXIT_PARSE
        assert "cannot read scene" in err

    def test_invalid_scene(self, tmp_path, capsys):
        scene = tmp_path / "bad.json"
        scene.write_text('{"name": "x"}')
        code, _, err = run(
            capsys,
            "replay",
            "--scene", str(scene),
            "--script", str(GOLDEN / "walkthrough_script.jsonl"),
            "--out-scene", str(tmp_path / "s.json"),
            "--out-effects", str(tmp_path / "e.log"),
        )
        assert code == EXIT_PARSE
        assert "invalid scene" in err


class TestMesh:
    def write_sphere(self, tmp_path):
        path = tmp_path / "sphere.json"
        path.write_text(
            '{"name": "s", "primitives": [{"id": "a", "kind": "sphere", "params": {"radius": 1.0}}],'
            ' "root": {"leaf": "a"}}'
        )
        return path

    def test_sphere_obj(self, tmp_path, capsys):
        out = tmp_path / "sphere.obj"
        code, stdout, _ = run(
            capsys, "mesh", "--scene", str(self.write_sphere(tmp_path)), "--resolution", "64", "--out", str(out)
        )
        assert code == EXIT_OK
        lines = stdout.splitlines()
        assert lines[0].startswith("triangles: ")
        volume = float(lines[1].split(": ")[1])
        truth = 4 * math.pi / 3
        assert abs(volume - truth) / truth < 0.02
        assert out.read_bytes().startswith(b"v ") or b"\nv " in out.read_bytes()

    def test_stl_format(self, tmp_path, capsys):
        out = tmp_path / "sphere.stl"
        code, stdout, _ = run(
            capsys,
            "mesh", "--scene", str(self.write_sphere(tmp_path)),
            "--resolution", "16", "--format", "stl", "--out", str(out),
        )
        assert code == EXIT_OK
        blob = out.read_bytes()
        count = int(stdout.splitlines()[0].split(": ")[1])
        assert len(blob) == 80 + 4 + 50 * count

    def test_resolution_out_of_range(self, tmp_path, capsys):
        code, _, err = run(
            capsys, "mesh", "--scene", str(scene_path("lamp")), "--resolution", "4", "--out", str(tmp_path / "x.obj")
        )
        assert code == EXIT_PARSE
        assert "out of range" in err

    def test_empty_solid(self, tmp_path, capsys):
        scene = tmp_path / "empty.json"
        scene.write_text(
            '{"name": "e", "primitives": ['
            '{"id": "a", "kind": "sphere", "params": {"radius": 1.0}},'
            '{"id": "b", "kind": "sphere", "params": {"radius": 1.0},'
            ' "pose": {"translation": [9.0, 0.0, 0.0]}}],'
            ' "root": {"op": "intersection", "id": "r", "children": [{"leaf": "a"}, {"leaf": "b"}]}}'
        )
        code, stdout, _ = run(capsys, "mesh", "--scene", str(scene), "--resolution", "16", "--out", str(tmp_path / "e.obj"))
        assert code == EXIT_OK
        assert stdout.splitlines()[0] == "triangles: 0"


class TestStats:
    def test_study_table(self, capsys):
        code, stdout, _ = run(capsys, "stats", "--csv", str(STATS / "recognition_counts.csv"))
        assert code == EXIT_OK
        assert stdout.splitlines() == [
            "P1: 83.3%",
            "P2: 59.8%",
            "P3: 68.1%",
            "P4: 67.1%",
            "P5: 75.0%",
            "total recognized: 252",
            "total unrecognized: 109",
            "mean: 70.7%",
        ]

    def test_zero_total_row(self, tmp_path, capsys):
        csv = tmp_path / "z.csv"
        csv.write_text("P1,0,0\n")
        code, _, err = run(capsys, "stats", "--csv", str(csv))
        assert code == EXIT_PARSE
        assert "zero total" in err

    def test_malformed_csv(self, tmp_path, capsys):
        csv = tmp_path / "m.csv"
        csv.write_text("P1,60\n")
        code, _, err = run(capsys, "stats", "--csv", str(csv))
        assert code == EXIT_PARSE
        assert "row 1" in err

    def test_missing_file(self, tmp_path, capsys):
        code, _, err = run(capsys, "stats", "--csv", str(tmp_path / "nope.csv"))
        assert code == EXIT_PARSE


class TestUsage:
    def test_no_command(self, capsys):
        assert main([]) == EXIT_PARSE
        capsys.readouterr()

    def test_unknown_command(self, capsys):
        assert main(["polish"]) == EXIT_PARSE
        capsys.readouterr()

    def test_bad_bind(self, capsys, tmp_path):
        code, _, err = run(capsys, "serve", "--scene", str(scene_path("lamp")), "--bind", "nonsense")
        assert code == EXIT_PARSE
        assert "HOST:PORT" in err
