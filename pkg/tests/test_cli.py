import json

import numpy as np
import pytest
from click.testing import CliRunner

from oms.cli import main
from oms.dataset_io import mask_filename, read_mask, write_dataset
from oms.synthetic import SceneConfig, SceneObject, generate_scene
from oms.events import SensorGeometry


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    """Small synthetic dataset on disk (12 frames, 64x48)."""
    config = SceneConfig(
        geometry=SensorGeometry(64, 48),
        n_frames=13,
        bg_density=0.01,
        camera_velocity=(1.0, 0.0),
        objects=(SceneObject("disk", 20, (1.0, 0.0), (0.0, 24.0)),),
        noise_rate=0.0,
        seed=3,
    )
    events, masks, ts = generate_scene(config)
    out = tmp_path_factory.mktemp("dataset")
    manifest_path = write_dataset(out, events, config.geometry, masks, ts)
    return manifest_path, len(masks)


def run_cli(*args):
    return CliRunner().invoke(main, [str(a) for a in args])


class TestRun:
    def test_writes_one_mask_per_timestamp(self, dataset, tmp_path):
        manifest_path, n = dataset
        out = tmp_path / "run"
        result = run_cli("run", "--manifest", manifest_path, "--out", out, "--alpha", 0.13)
        assert result.exit_code == 0, result.output
        assert len(list(out.glob("oms_*.pgm"))) == n
        run_doc = json.loads((out / "run.json").read_text())
        assert run_doc["params"]["alpha"] == 0.13
        assert run_doc["frames"] == n

    def test_missing_manifest_exit_2(self, tmp_path):
        result = run_cli("run", "--manifest", tmp_path / "nope.json", "--out", tmp_path / "o")
        assert result.exit_code == 2
        assert "manifest not found" in result.output

    def test_rerun_byte_identical(self, dataset, tmp_path):
        manifest_path, n = dataset
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            result = run_cli("run", "--manifest", manifest_path, "--out", out,
                             "--alpha", 0.13, "--threads", 4 if name == "b" else 1)
            assert result.exit_code == 0, result.output
            outs.append(out)
        for i in range(n):
            f = mask_filename(i).replace("mask", "oms")
            assert (outs[0] / f).read_bytes() == (outs[1] / f).read_bytes()

    def test_flags_override_config_file(self, dataset, tmp_path):
        manifest_path, _ = dataset
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"alpha": 0.5, "r2": 5}))
        out = tmp_path / "run"
        result = run_cli("run", "--manifest", manifest_path, "--out", out,
                         "--config", cfg, "--alpha", 0.25)
        assert result.exit_code == 0, result.output
        doc = json.loads((out / "run.json").read_text())
        assert doc["params"]["alpha"] == 0.25  # flag wins
        assert doc["params"]["r2"] == 5        # config file beats default

    def test_overlays(self, dataset, tmp_path):
        manifest_path, n = dataset
        out = tmp_path / "run"
        result = run_cli("run", "--manifest", manifest_path, "--out", out, "--emit-overlays")
        assert result.exit_code == 0, result.output
        assert len(list(out.glob("overlay_*.pgm"))) == n


class TestEval:
    def test_perfect_predictions(self, dataset, tmp_path):
        manifest_path, n = dataset
        # predictions = copies of the ground truth
        pred_dir = tmp_path / "preds"
        pred_dir.mkdir()
        for i in range(n):
            src = manifest_path.parent / "masks" / mask_filename(i)
            (pred_dir / f"oms_{i:05d}.pgm").write_bytes(src.read_bytes())
        result = run_cli("eval", "--pred-dir", pred_dir, "--manifest", manifest_path)
        assert result.exit_code == 0, result.output
        report = json.loads(result.output)
        assert report["mean_iou"] == 100.0
        assert report["detection_rate"] == 100.0

    def test_empty_predictions(self, dataset, tmp_path):
        manifest_path, n = dataset
        pred_dir = tmp_path / "preds"
        pred_dir.mkdir()
        from oms.dataset_io import write_mask

        for i in range(n):
            write_mask(np.zeros((48, 64), np.uint8), pred_dir / f"oms_{i:05d}.pgm")
        result = run_cli("eval", "--pred-dir", pred_dir, "--manifest", manifest_path)
        report = json.loads(result.output)
        assert report["mean_iou"] == 0.0 and report["detection_rate"] == 0.0

    def test_verbose_frames(self, dataset, tmp_path):
        manifest_path, n = dataset
        out = tmp_path / "run"
        run_cli("run", "--manifest", manifest_path, "--out", out, "--alpha", 0.13)
        result = run_cli("eval", "--pred-dir", out, "--manifest", manifest_path, "--verbose")
        report = json.loads(result.output)
        assert len(report["frames"]) == n


class TestSynth:
    def test_writes_dataset(self, tmp_path):
        scene = {
            "geometry": {"width": 64, "height": 48},
            "n_frames": 5,
            "bg_density": 0.05,
            "camera_velocity": [1.0, 0.0],
            "objects": [
                {"shape": "disk", "size": 6, "velocity": [1.0, 0.0], "start": [10.0, 24.0]}
            ],
            "noise_rate": 0.0,
            "seed": 11,
        }
        scene_path = tmp_path / "scene.json"
        scene_path.write_text(json.dumps(scene))
        out = tmp_path / "ds"
        result = run_cli("synth", scene_path, "--out", out)
        assert result.exit_code == 0, result.output
        assert (out / "manifest.json").exists()
        assert len(list((out / "masks").glob("*.pgm"))) == 4

    def test_roundtrips_through_run(self, dataset, tmp_path):
        manifest_path, n = dataset
        masks = [read_mask(manifest_path.parent / "masks" / mask_filename(i)) for i in range(n)]
        assert any(m.any() for m in masks)


class TestBench:
    def test_smoke(self, dataset):
        manifest_path, _ = dataset
        result = run_cli("bench", "--manifest", manifest_path, "--threads", 2)
        assert result.exit_code == 0, result.output
        doc = json.loads(result.output)
        assert doc["masks_identical_across_thread_counts"] is True
        assert doc["p50_ms"] > 0 and doc["p95_ms"] >= doc["p50_ms"]

    def test_empty_dataset(self, tmp_path, rng):
        from oms.events import EVENT_DTYPE

        manifest_path = write_dataset(
            tmp_path / "empty", np.empty(0, dtype=EVENT_DTYPE),
            SensorGeometry(64, 48), [], [],
        )
        result = run_cli("bench", "--manifest", manifest_path)
        assert result.exit_code == 0
        assert "nothing to benchmark" in result.output


class TestKernelDump:
    def test_grid_output(self):
        result = run_cli("kernel-dump", "--radius", 2)
        assert result.exit_code == 0
        grid = [[float(v) for v in line.split()] for line in result.output.strip().splitlines()]
        assert len(grid) == 4 and all(len(r) == 4 for r in grid)
        assert abs(sum(sum(r) for r in grid) - 1.0) < 1e-9
