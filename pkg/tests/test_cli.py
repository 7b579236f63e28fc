"""Command-line behavior: artifacts, reruns, config precedence, exit codes."""

import json
import os

import pytest

from sedkit import (
    FIRST_LOCAL_MINIMUM,
    GLOBAL_MIN_FALLBACK,
    WorldConfig,
    generate_world,
    load_world,
    make_source_model,
    predict,
    save_dataset,
)
from sedkit.cli import main

FAST_TRAIN = ["--epochs", "5", "--grid", "0.8,0.6,0.4", "--image-count", "8"]


def lines_of(path):
    return path.read_text().splitlines()


def data_rows(path):
    rows = lines_of(path)
    assert rows[0].startswith("# config: ")
    return rows[1], [line.split(",") for line in rows[2:]]


class TestToyCommand:
    def test_writes_one_row_per_degree(self, tmp_path, capsys):
        out = tmp_path / "run"
        code = main(
            ["toy", "--out", str(out), "--degrees", "0.0,0.2,0.4", "--trials", "1", "--seed", "3"]
        )
        assert code == 0
        header, rows = data_rows(out / "toy.csv")
        assert header == (
            "noise_degree_fraction,entropy_positive_mix_nats,"
            "entropy_negative_mix_nats,mean_self_entropy_nats"
        )
        assert [float(row[0]) for row in rows] == [0.0, 0.2, 0.4]
        for row in rows:
            assert all(float(cell) >= 0.0 for cell in row[1:])
        assert capsys.readouterr().out.startswith("toy: 3 noise degrees")

    def test_config_comment_records_resolved_settings(self, tmp_path):
        out = tmp_path / "run"
        main(["toy", "--out", str(out), "--degrees", "0.0,0.1", "--trials", "2", "--seed", "7"])
        comment = lines_of(out / "toy.csv")[0]
        assert comment.startswith("# config: command=toy seed=7")
        assert f"out={out}" in comment
        assert "toy.trials=2" in comment
        assert "toy.degrees=[0.0,0.1]" in comment

    def test_rerun_is_byte_identical(self, tmp_path):
        out = tmp_path / "run"
        argv = ["toy", "--out", str(out), "--degrees", "0.0,0.25,0.5", "--trials", "2"]
        assert main(argv) == 0
        first = (out / "toy.csv").read_bytes()
        assert main(argv) == 0
        assert (out / "toy.csv").read_bytes() == first

    def test_emit_svg_writes_plot(self, tmp_path):
        out = tmp_path / "run"
        main(["toy", "--out", str(out), "--degrees", "0.0,0.5", "--trials", "1", "--emit-svg"])
        svg = (out / "toy.svg").read_text()
        assert svg.startswith("<svg")
        assert "</svg>" in svg


class TestWorldGenCommand:
    def test_saved_world_round_trips(self, tmp_path, capsys):
        out = tmp_path / "run"
        code = main(["world", "gen", "--out", str(out), "--image-count", "6", "--seed", "4"])
        assert code == 0
        world = load_world(str(out / "world.json"))
        assert world == generate_world(WorldConfig(image_count=6, seed=4))
        assert capsys.readouterr().out.startswith("world: 6 images")


class TestSweepCommand:
    def test_artifacts_and_selection_agree(self, tmp_path, capsys):
        out = tmp_path / "run"
        code = main(["sweep", "--out", str(out), "--seed", "1"] + FAST_TRAIN)
        assert code == 0
        header, rows = data_rows(out / "sweep.csv")
        assert header == (
            "confidence_threshold,mean_self_entropy_nats,"
            "mean_average_precision,pseudo_label_count,selected"
        )
        assert [float(row[0]) for row in rows] == [0.8, 0.6, 0.4]
        selected_rows = [i for i, row in enumerate(rows) if row[4] == "true"]
        doc = json.loads((out / "sweep.json").read_text())
        assert selected_rows == [doc["selected_index"]]
        assert doc["selection_kind"] in (FIRST_LOCAL_MINIMUM, GLOBAL_MIN_FALLBACK)
        assert doc["selected_threshold"] == [0.8, 0.6, 0.4][doc["selected_index"]]
        assert capsys.readouterr().out.startswith("sweep: selected threshold")

    def test_csv_floats_read_back_exactly_as_json_values(self, tmp_path):
        out = tmp_path / "run"
        main(["sweep", "--out", str(out), "--seed", "1"] + FAST_TRAIN)
        _, rows = data_rows(out / "sweep.csv")
        doc = json.loads((out / "sweep.json").read_text())
        for row, point in zip(rows, doc["points"]):
            assert float(row[1]) == point["mean_self_entropy_nats"]
            assert float(row[2]) == point["mean_average_precision"]
            assert int(row[3]) == point["pseudo_label_count"]

    def test_comment_carries_world_and_sgd_settings(self, tmp_path):
        out = tmp_path / "run"
        main(["sweep", "--out", str(out), "--seed", "1"] + FAST_TRAIN)
        comment = lines_of(out / "sweep.csv")[0]
        assert "command=sweep" in comment
        assert "world.image_count=8" in comment
        assert "world.seed=1" in comment
        assert "sgd.epochs=5" in comment
        assert "sweep.grid=[0.8,0.6,0.4]" in comment
        assert "dataset=<generated>" in comment

    def test_rerun_is_byte_identical(self, tmp_path):
        out = tmp_path / "run"
        argv = ["sweep", "--out", str(out), "--seed", "2"] + FAST_TRAIN
        assert main(argv) == 0
        first = {name: (out / name).read_bytes() for name in ("sweep.csv", "sweep.json")}
        assert main(argv) == 0
        for name, payload in first.items():
            assert (out / name).read_bytes() == payload

    def test_runs_on_a_saved_world_file(self, tmp_path):
        world_dir = tmp_path / "world"
        main(["world", "gen", "--out", str(world_dir), "--image-count", "8", "--seed", "1"])
        out = tmp_path / "run"
        code = main(
            [
                "sweep",
                "--out",
                str(out),
                "--seed",
                "1",
                "--dataset",
                str(world_dir / "world.json"),
                "--epochs",
                "5",
                "--grid",
                "0.8,0.5",
            ]
        )
        assert code == 0
        comment = lines_of(out / "sweep.csv")[0]
        assert f"dataset={world_dir / 'world.json'}" in comment


class TestAdaptCommand:
    def test_adapt_writes_sweep_and_summary(self, tmp_path, capsys):
        out = tmp_path / "run"
        code = main(["adapt", "--out", str(out), "--seed", "1"] + FAST_TRAIN)
        assert code == 0
        header, rows = data_rows(out / "adapt.csv")
        assert header == (
            "selected_confidence_threshold,selection_kind,"
            "selected_mean_self_entropy_nats,source_mean_average_precision,"
            "adapted_mean_average_precision,adapted_model_mean_self_entropy_nats,"
            "mosaic_enabled"
        )
        assert len(rows) == 1
        row = rows[0]
        assert float(row[0]) in (0.8, 0.6, 0.4)
        assert row[1] in (FIRST_LOCAL_MINIMUM, GLOBAL_MIN_FALLBACK)
        assert 0.0 <= float(row[4]) <= 1.0
        assert row[6] == "false"
        assert (out / "sweep.csv").exists()
        assert (out / "sweep.json").exists()
        assert capsys.readouterr().out.startswith("adapt: threshold")

    def test_mosaic_flag_recorded_and_applied(self, tmp_path):
        out = tmp_path / "run"
        code = main(
            ["adapt", "--out", str(out), "--seed", "1", "--mosaic", "--count", "4"] + FAST_TRAIN
        )
        assert code == 0
        _, rows = data_rows(out / "adapt.csv")
        assert rows[0][6] == "true"
        comment = lines_of(out / "adapt.csv")[0]
        assert "mosaic.enabled=true" in comment
        assert "mosaic.count=4" in comment

    def test_rerun_is_byte_identical(self, tmp_path):
        out = tmp_path / "run"
        argv = ["adapt", "--out", str(out), "--seed", "3", "--mosaic"] + FAST_TRAIN
        assert main(argv) == 0
        names = ("sweep.csv", "adapt.csv", "sweep.json")
        first = {name: (out / name).read_bytes() for name in names}
        assert main(argv) == 0
        for name, payload in first.items():
            assert (out / name).read_bytes() == payload


class TestAnalyzeCommand:
    def test_histogram_rows_per_bin_plus_fn(self, tmp_path, capsys):
        out = tmp_path / "run"
        code = main(["analyze", "--out", str(out), "--image-count", "6", "--bins", "4"])
        assert code == 0
        header, rows = data_rows(out / "analyze.csv")
        assert header == "row_kind,confidence_bin_low,confidence_bin_high,ratio_of_ground_truth"
        assert len(rows) == 4 * 2 + 1
        assert [row[0] for row in rows[:-1]] == ["tp", "fp"] * 4
        fn_row = rows[-1]
        assert fn_row[0] == "fn" and fn_row[1] == "" and fn_row[2] == ""
        assert 0.0 <= float(fn_row[3]) <= 1.0
        assert capsys.readouterr().out.startswith("analyze: fn_ratio")

    def test_dataset_without_detections_reports_everything_missed(self, tmp_path):
        world_dir = tmp_path / "world"
        main(["world", "gen", "--out", str(world_dir), "--image-count", "5", "--seed", "2"])
        out = tmp_path / "run"
        code = main(
            [
                "analyze",
                "--out",
                str(out),
                "--dataset",
                str(world_dir / "world.json"),
                "--bins",
                "2",
            ]
        )
        assert code == 0
        _, rows = data_rows(out / "analyze.csv")
        assert all(float(row[3]) == 0.0 for row in rows[:-1])
        assert float(rows[-1][3]) == 1.0


class TestMosaicCommand:
    def test_saves_requested_sample_count(self, tmp_path, capsys):
        out = tmp_path / "run"
        code = main(["mosaic", "--out", str(out), "--image-count", "6", "--count", "3"])
        assert code == 0
        doc = json.loads((out / "mosaic.json").read_text())
        assert len(doc["samples"]) == 3
        assert all(len(sample["tiles"]) == 4 for sample in doc["samples"])
        assert capsys.readouterr().out.startswith("mosaic: 3 samples")


class TestEvalCommand:
    def test_scores_saved_detections(self, tmp_path, capsys):
        world = generate_world(WorldConfig(image_count=6, seed=4))
        source = make_source_model(world)
        detected = predict(source, world)
        dataset_path = tmp_path / "detected.json"
        save_dataset(detected, str(dataset_path))
        out = tmp_path / "run"
        code = main(["eval", "--out", str(out), "--dataset", str(dataset_path), "--iou", "0.5"])
        assert code == 0
        header, rows = data_rows(out / "eval.csv")
        assert header == "category_index,category_name,average_precision"
        assert rows[-1][0] == "mean"
        assert 0.0 <= float(rows[-1][2]) <= 1.0
        assert len(rows) == len(detected.category_names) + 1
        assert capsys.readouterr().out.startswith("eval: mAP")


class TestConfigPrecedence:
    def test_flags_override_config_file(self, tmp_path):
        cfg = tmp_path / "cfg.toml"
        cfg.write_text('[run]\nseed = 5\nout = "%s"\n\n[world]\nimage_count = 4\n' % (tmp_path / "cfg_out"))
        flag_out = tmp_path / "flag_out"
        code = main(
            ["world", "gen", "--config", str(cfg), "--seed", "9", "--out", str(flag_out)]
        )
        assert code == 0
        assert not (tmp_path / "cfg_out").exists()
        world = load_world(str(flag_out / "world.json"))
        assert world == generate_world(WorldConfig(image_count=4, seed=9))

    def test_config_file_values_apply_without_flags(self, tmp_path):
        cfg = tmp_path / "cfg.toml"
        cfg.write_text('[run]\nseed = 5\nout = "%s"\n\n[world]\nimage_count = 4\n' % (tmp_path / "cfg_out"))
        code = main(["world", "gen", "--config", str(cfg)])
        assert code == 0
        world = load_world(str(tmp_path / "cfg_out" / "world.json"))
        assert world == generate_world(WorldConfig(image_count=4, seed=5))

    def test_explicit_world_seed_beats_run_seed(self, tmp_path):
        cfg = tmp_path / "cfg.toml"
        cfg.write_text("[world]\nimage_count = 4\nseed = 2\n")
        out = tmp_path / "run"
        code = main(["world", "gen", "--config", str(cfg), "--seed", "9", "--out", str(out)])
        assert code == 0
        world = load_world(str(out / "world.json"))
        assert world == generate_world(WorldConfig(image_count=4, seed=2))

    def test_default_out_dir_is_relative_to_cwd(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        code = main(["toy", "--degrees", "0.0,0.1", "--trials", "1"])
        assert code == 0
        assert set(os.listdir(tmp_path)) == {"out"}
        assert (tmp_path / "out" / "toy.csv").exists()


class TestExitCodes:
    def test_eval_without_dataset_is_a_usage_error(self, capsys):
        assert main(["eval"]) == 1
        err = capsys.readouterr().err
        assert err.startswith("error:")
        assert "eval requires --dataset" in err

    def test_unknown_config_key_names_section_and_key(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.toml"
        cfg.write_text("[world]\nimge_count = 4\n")
        assert main(["world", "gen", "--config", str(cfg)]) == 1
        err = capsys.readouterr().err
        assert "config section [world]" in err
        assert "imge_count" in err

    def test_unknown_config_section(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.toml"
        cfg.write_text("[wrld]\nimage_count = 4\n")
        assert main(["world", "gen", "--config", str(cfg)]) == 1
        assert "unknown section [wrld]" in capsys.readouterr().err

    def test_malformed_toml(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.toml"
        cfg.write_text("not = [toml\n")
        assert main(["toy", "--config", str(cfg)]) == 1
        assert "config file" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path, capsys):
        assert main(["toy", "--config", str(tmp_path / "absent.toml")]) == 1
        assert "cannot read config file" in capsys.readouterr().err

    def test_unknown_flag(self, capsys):
        assert main(["toy", "--bogus"]) == 1
        assert capsys.readouterr().err.startswith("error:")

    def test_non_numeric_seed_flag(self, capsys):
        assert main(["toy", "--seed", "x"]) == 1
        assert capsys.readouterr().err.startswith("error:")

    def test_invalid_world_size_is_a_validation_error(self, capsys):
        assert main(["world", "gen", "--image-count", "0"]) == 1
        assert capsys.readouterr().err.startswith("error:")

    def test_unwritable_output_directory_is_a_runtime_failure(self, tmp_path, capsys):
        blocker = tmp_path / "blocker"
        blocker.write_text("occupied")
        code = main(["world", "gen", "--image-count", "4", "--out", str(blocker)])
        assert code == 2
        assert capsys.readouterr().err.startswith("failure:")
