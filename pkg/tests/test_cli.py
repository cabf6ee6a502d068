import json

import pytest

from conftest import write_battery_config, write_synthetic_archive
from veatkit.cli import main
from veatkit.embeddings import read_archive

SUBCOMMANDS = ["pool", "veat", "scveat", "battery", "correlate", "compare",
               "agreement", "oracle-check"]


class TestHelp:
    def test_top_level_help(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--help"])
        assert exc.value.code == 0
        assert "veatkit" in capsys.readouterr().out

    @pytest.mark.parametrize("sub", SUBCOMMANDS)
    def test_subcommand_help(self, sub, capsys):
        with pytest.raises(SystemExit) as exc:
            main([sub, "--help"])
        assert exc.value.code == 0

    def test_unknown_flag_exits_one(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["veat", "--bogus"])
        assert exc.value.code == 1
        assert "usage" in capsys.readouterr().err

    def test_unknown_subcommand_exits_one(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 1


class TestVeatCommand:
    def test_prints_d_p_method(self, tmp_path, capsys):
        archive = write_synthetic_archive(
            tmp_path / "demo.jsonl",
            ["flower", "insect", "pleasant", "unpleasant"],
            dim=6, n=4, seed=7,
        )
        code = main([
            "veat", "--archive", str(archive), "--x", "flower", "--y", "insect",
            "--a", "pleasant", "--b", "unpleasant", "--seed", "7",
        ])
        out = capsys.readouterr().out
        assert code == 0
        assert "d = " in out
        assert "p = " in out
        assert "method = exact" in out

    def test_missing_archive_exits_two(self, tmp_path, capsys):
        missing = tmp_path / "absent.jsonl"
        code = main([
            "veat", "--archive", str(missing), "--x", "a", "--y", "b",
            "--a", "c", "--b", "d",
        ])
        assert code == 2
        assert "absent.jsonl" in capsys.readouterr().err

    def test_unknown_concept_exits_one(self, tmp_path, capsys):
        archive = write_synthetic_archive(
            tmp_path / "demo.jsonl", ["flower", "insect"], dim=4, n=3, seed=1
        )
        code = main([
            "veat", "--archive", str(archive), "--x", "flower", "--y", "weapon",
            "--a", "flower", "--b", "insect",
        ])
        assert code == 1
        assert "weapon" in capsys.readouterr().err

    def test_flag_config_file(self, tmp_path, capsys):
        archive = write_synthetic_archive(
            tmp_path / "demo.jsonl",
            ["flower", "insect", "pleasant", "unpleasant"],
            dim=6, n=4, seed=7,
        )
        cfg = tmp_path / "flags.json"
        cfg.write_text(json.dumps({"seed": 11, "tie_rule": "plus_one"}))
        code = main([
            "veat", "--archive", str(archive), "--x", "flower", "--y", "insect",
            "--a", "pleasant", "--b", "unpleasant", "--config", str(cfg),
        ])
        assert code == 0


class TestPoolCommand:
    def test_pool_then_read(self, tmp_path, capsys):
        frames_path = tmp_path / "frames.jsonl"
        records = [
            {
                "video_id": f"v{i}",
                "concept": "demo",
                "timestamps": [0.0, 0.25],
                "frames": [[1.0, 2.0 + i], [3.0, 4.0 + i]],
            }
            for i in range(2)
        ]
        frames_path.write_text(
            "\n".join(json.dumps(r) for r in records) + "\n"
        )
        out_path = tmp_path / "pooled.jsonl"
        code = main(["pool", "--frames", str(frames_path), "--out",
                     str(out_path)])
        assert code == 0
        pooled = read_archive(out_path)
        assert len(pooled) == 2
        assert pooled[0].vector == (2.0, 3.0)
        assert pooled[0].n_frames == 2


class TestBatteryCommand:
    def test_end_to_end_files(self, tmp_path, capsys):
        archive = write_synthetic_archive(
            tmp_path / "arch.jsonl",
            ["flower", "insect", "pleasant", "unpleasant"],
            dim=6, n=4, seed=3,
        )
        config = write_battery_config(
            tmp_path / "battery.json",
            [archive],
            veat_tests=[{"name": "t", "x": "flower", "y": "insect",
                         "a": "pleasant", "b": "unpleasant"}],
        )
        out_dir = tmp_path / "out"
        code = main(["battery", str(config), "--output-dir", str(out_dir)])
        assert code == 0
        for name in ("results.csv", "results.json", "report.md",
                     "manifest.json"):
            assert (out_dir / name).exists()

    def test_output_dir_env(self, tmp_path, capsys, monkeypatch):
        archive = write_synthetic_archive(
            tmp_path / "arch.jsonl",
            ["flower", "insect", "pleasant", "unpleasant"],
            dim=6, n=4, seed=3,
        )
        config = write_battery_config(
            tmp_path / "battery.json",
            [archive],
            veat_tests=[{"name": "t", "x": "flower", "y": "insect",
                         "a": "pleasant", "b": "unpleasant"}],
        )
        env_dir = tmp_path / "envout"
        monkeypatch.setenv("VEATKIT_OUTPUT_DIR", str(env_dir))
        assert main(["battery", str(config)]) == 0
        assert (env_dir / "results.json").exists()

    def test_identical_invocations_byte_identical(self, tmp_path, capsys):
        archive = write_synthetic_archive(
            tmp_path / "arch.jsonl",
            ["flower", "insect", "pleasant", "unpleasant"],
            dim=6, n=4, seed=3,
        )
        config = write_battery_config(
            tmp_path / "battery.json",
            [archive],
            veat_tests=[{"name": "t", "x": "flower", "y": "insect",
                         "a": "pleasant", "b": "unpleasant"}],
            exact_threshold=1,  # force Monte Carlo so the seed matters
            iterations=2000,
        )
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        assert main(["battery", str(config), "--output-dir", str(out1)]) == 0
        assert main(["battery", str(config), "--output-dir", str(out2)]) == 0
        assert (out1 / "results.json").read_bytes() == (
            out2 / "results.json"
        ).read_bytes()
        assert (out1 / "results.csv").read_bytes() == (
            out2 / "results.csv"
        ).read_bytes()


class TestAnalysisCommands:
    def test_agreement(self, tmp_path, capsys):
        path = tmp_path / "ann.csv"
        rows = ["video_id,annotator_id,category"]
        for i in range(4):
            cat = "man" if i % 2 else "woman"
            rows += [f"v{i},r{r},{cat}" for r in range(3)]
        path.write_text("\n".join(rows) + "\n")
        assert main(["agreement", "--annotations", str(path)]) == 0
        assert "fleiss_kappa = 1.0000" in capsys.readouterr().out

    def test_correlate_and_compare(self, tmp_path, capsys):
        labels = ["nurse", "secretary", "librarian"]
        archive = write_synthetic_archive(
            tmp_path / "occ.jsonl",
            labels + [f"{lab}_d1" for lab in labels] + ["man", "woman"],
            dim=8, n=4, seed=31,
        )
        scveat = []
        for lab in labels:
            scveat.append({"name": f"{lab}-c", "x": lab, "a": "man",
                           "b": "woman", "group": "g", "condition": "control",
                           "label": lab, "scenario": lab})
            scveat.append({"name": f"{lab}-d1", "x": f"{lab}_d1", "a": "man",
                           "b": "woman", "condition": "debias1", "label": lab,
                           "scenario": lab})
        config = write_battery_config(
            tmp_path / "battery.json", [archive], scveat_tests=scveat,
        )
        out_dir = tmp_path / "out"
        assert main(["battery", str(config), "--output-dir",
                     str(out_dir)]) == 0
        capsys.readouterr()

        code = main([
            "correlate", "--results", str(out_dir / "results.json"),
            "--group", "g", "--axis", "pct_women", "--source", "occupations",
            "--pairs",
        ])
        out = capsys.readouterr().out
        assert code == 0
        assert "r = " in out and "n = 3" in out
        assert "nurse" in out

        code = main(["compare", "--results", str(out_dir / "results.json")])
        out = capsys.readouterr().out
        assert code == 0
        assert "nurse" in out and "debias1" in out


class TestOracleCheck:
    def test_passes(self, capsys):
        assert main(["oracle-check", "--trials", "25", "--seed", "3"]) == 0
        assert "passed" in capsys.readouterr().out
