"""
Tests for the qmd command line: exit codes and output files
"""
import csv
import logging

import pytest

from qmd.main import EXIT_DATA, EXIT_EXHAUSTED, EXIT_NO_INPUT, EXIT_OK, EXIT_USAGE, main
from qmd.output_handler import FileManager

FAST_FLAGS = ["--set", "pyramid_levels=2", "--set", "iterations_per_level=5",
              "--set", "max_outer_iterations=3", "--set", "kmeans_restarts=2", "--jobs", "1", "--no-timing"]
SMALL_SUITE = ["--size", "2", "--num-null", "1", "--width", "48", "--height", "48",
               "--min-frames", "60", "--max-frames", "60"]


@pytest.fixture(autouse=True)
def reset_qmd_logger():
    yield
    logging.getLogger("qmd").handlers.clear()


@pytest.fixture
def sequence_dir(tmp_path, small_sequence):
    frames, gt = small_sequence
    return FileManager(tmp_path / "input").save_sequence(frames, gt)


def read_rows(path):
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


class TestUsage:

    def test_missing_out_is_a_usage_error(self, capsys):
        assert main(["synth"]) == EXIT_USAGE
        assert "--out" in capsys.readouterr().err

    def test_unknown_command(self):
        assert main(["explode", "--out", "x"]) == EXIT_USAGE

    def test_unknown_config_key(self, tmp_path, sequence_dir):
        code = main(["detect", "--input", str(sequence_dir), "--threshold", "1", "--out", str(tmp_path / "o"),
                     "--set", "bogus=1"])
        assert code == EXIT_USAGE

    def test_config_file_keys_are_checked(self, tmp_path, sequence_dir):
        conf = tmp_path / "params.env"
        conf.write_text("PYRAMID_LEVELS=two\n")
        code = main(["detect", "--input", str(sequence_dir), "--threshold", "1", "--out", str(tmp_path / "o"),
                     "--config", str(conf)])
        assert code == EXIT_USAGE

    def test_missing_config_file(self, tmp_path, sequence_dir):
        code = main(["detect", "--input", str(sequence_dir), "--threshold", "1", "--out", str(tmp_path / "o"),
                     "--config", str(tmp_path / "absent.env")])
        assert code == EXIT_USAGE

    def test_missing_input_directory(self, tmp_path):
        code = main(["detect", "--input", str(tmp_path / "absent"), "--threshold", "1", "--out", str(tmp_path / "o")])
        assert code == EXIT_NO_INPUT

    def test_empty_suite_directory(self, tmp_path):
        (tmp_path / "suite").mkdir()
        code = main(["sweep", "--suite", str(tmp_path / "suite"), "--out", str(tmp_path / "o")])
        assert code == EXIT_NO_INPUT

    def test_too_short_sequence(self, tmp_path, small_sequence):
        frames, gt = small_sequence
        directory = FileManager(tmp_path / "input").save_sequence(frames[:2], name="short")
        code = main(["detect", "--input", str(directory), "--threshold", "1", "--out", str(tmp_path / "o")]
                    + FAST_FLAGS)
        assert code == EXIT_DATA


class TestSynth:

    def test_suite_is_byte_identical_across_runs(self, tmp_path):
        assert main(["synth", "--out", str(tmp_path / "a"), "--seed", "4"] + SMALL_SUITE) == EXIT_OK
        assert main(["synth", "--out", str(tmp_path / "b"), "--seed", "4"] + SMALL_SUITE) == EXIT_OK
        files_a = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file())
        files_b = sorted(p.relative_to(tmp_path / "b") for p in (tmp_path / "b").rglob("*") if p.is_file())
        assert files_a == files_b
        assert len([f for f in files_a if f.name.startswith("frame_")]) == 120
        for rel in files_a:
            assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes()

    def test_null_only(self, tmp_path):
        assert main(["synth", "--out", str(tmp_path), "--null-only"] + SMALL_SUITE) == EXIT_OK
        assert sorted(p.name for p in tmp_path.iterdir()) == ["seq_01"]
        assert "change_frame=none" in (tmp_path / "seq_01" / "manifest.txt").read_text()


class TestDetect:

    def test_exhausted_stream(self, tmp_path, sequence_dir):
        out = tmp_path / "o"
        code = main(["detect", "--input", str(sequence_dir), "--threshold", "1e6", "--out", str(out)] + FAST_FLAGS)
        assert code == EXIT_EXHAUSTED
        rows = read_rows(out / "trace.csv")
        assert [int(r["n"]) for r in rows] == list(range(1, 11))
        assert all(r["millis"] == "0.0" for r in rows)
        assert not (out / "mask_stop.png").exists()

    def test_baseline_stop_writes_mask_and_rasters(self, tmp_path, sequence_dir):
        out = tmp_path / "o"
        code = main(["detect", "--input", str(sequence_dir), "--detector", "baseline_F", "--threshold", "0",
                     "--out", str(out), "--dump-rasters"] + FAST_FLAGS)
        assert code == EXIT_OK
        assert (out / "mask_stop.png").exists()
        assert len(read_rows(out / "trace.csv")) == 3
        rasters = sorted(p.name for p in (out / "rasters").iterdir())
        assert rasters == ["flow_bwd_0002.f32", "flow_bwd_0003.f32", "flow_fwd_0001.f32", "flow_fwd_0002.f32",
                           "residual_0002.f32", "residual_0003.f32"]


class TestTraceAndSweep:

    def test_gaussian_glr_trace(self, tmp_path):
        code = main(["trace", "--gaussian", "1.0", "--length", "50", "--change", "25", "--seed", "3",
                     "--out", str(tmp_path)])
        assert code == EXIT_OK
        rows = read_rows(tmp_path / "glr_trace.csv")
        assert len(rows) == 50
        assert list(rows[0]) == ["n", "lambda_log", "k_star"]

    def test_gaussian_change_out_of_range(self, tmp_path):
        assert main(["trace", "--gaussian", "1.0", "--length", "10", "--change", "20",
                     "--out", str(tmp_path)]) == EXIT_USAGE

    def test_sweep_over_a_written_suite(self, tmp_path, sequence_dir):
        out = tmp_path / "sweep"
        code = main(["sweep", "--suite", str(sequence_dir.parent), "--detector", "fast",
                     "--thresholds=-1e9,1e6", "--traces", "--out", str(out)] + FAST_FLAGS)
        assert code == EXIT_OK
        rows = read_rows(out / "sweep.csv")
        assert [float(r["b"]) for r in rows] == [-1e9, 1e6]
        assert rows[0]["num_false_alarms"] == "1"
        assert rows[1]["num_misses"] == "1"
        assert (out / "trace_small.csv").exists()

    def test_suite_without_manifest(self, tmp_path):
        FileManager(tmp_path / "suite").save_sequence([[[0.0] * 8] * 8] * 3, name="bare")
        code = main(["sweep", "--suite", str(tmp_path / "suite"), "--out", str(tmp_path / "o")])
        assert code == EXIT_NO_INPUT

    def test_bad_thresholds(self, tmp_path, sequence_dir):
        code = main(["sweep", "--suite", str(sequence_dir.parent), "--thresholds", "a,b", "--out", str(tmp_path / "o")])
        assert code == EXIT_USAGE
