import csv
import json
import os
from pathlib import Path

import numpy as np
import pytest

import pathex.cli as cli
from pathex.synthetic import generate_synthetic_slide


@pytest.fixture(scope="module")
def bundle(tmp_path_factory):
    out = tmp_path_factory.mktemp("bundle")
    synth = generate_synthetic_slide(seed=5, slide_size=(640, 640),
                                     n_objects=50, size_range=(3, 28))
    paths = synth.write_dir(out)
    paths["n_objects"] = 50
    return paths


def run(argv, capsys):
    code = cli.main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestExtract:
    def test_geojson_csv_shape(self, bundle, tmp_path, capsys):
        out = tmp_path / "f.csv"
        code, _, err = run([
            "extract", "--slide", bundle["slide"], "--geojson", bundle["annotations"],
            "--out", str(out),
        ], capsys)
        assert code == 0
        with open(out, newline="") as fh:
            rows = list(csv.reader(fh))
        assert len(rows) == 1 + bundle["n_objects"]
        assert all(len(r) == 4 + 247 for r in rows)
        summary = json.loads(err.strip().splitlines()[-1])
        assert summary["event"] == "extract_summary"
        assert summary["objects"] == bundle["n_objects"]

    def test_label_mask_with_classes(self, bundle, tmp_path, capsys):
        out = tmp_path / "l.csv"
        code, _, _ = run([
            "extract", "--slide", bundle["slide"], "--label-mask", bundle["labels"],
            "--class-map", bundle["classes"], "--out", str(out),
        ], capsys)
        assert code == 0

    def test_both_inputs_usage_error(self, bundle, tmp_path, capsys):
        with pytest.raises(SystemExit) as err:
            cli.main([
                "extract", "--slide", bundle["slide"],
                "--geojson", bundle["annotations"],
                "--label-mask", bundle["labels"],
                "--out", str(tmp_path / "x.csv"),
            ])
        assert err.value.code == 2

    def test_small_budget_usage_error(self, bundle, tmp_path, capsys):
        code, _, _ = run([
            "extract", "--slide", bundle["slide"], "--geojson", bundle["annotations"],
            "--out", str(tmp_path / "x.csv"), "--memory-budget", "512KiB",
        ], capsys)
        assert code == 2

    def test_missing_file_is_io_error(self, tmp_path, capsys):
        code, _, _ = run([
            "extract", "--slide", str(tmp_path / "nope.tiff"),
            "--geojson", str(tmp_path / "nope.geojson"),
            "--out", str(tmp_path / "x.csv"),
        ], capsys)
        assert code == 3

    def test_partial_output_removed_on_failure(self, bundle, tmp_path, capsys):
        out = tmp_path / "partial.csv"
        code, _, _ = run([
            "extract", "--slide", bundle["slide"], "--geojson", bundle["annotations"],
            "--out", str(out), "--annotated-out", str(tmp_path / "no" / "dir.geojson"),
        ], capsys)
        assert code == 3
        assert not out.exists()

    def test_annotated_out_requires_geojson(self, bundle, tmp_path, capsys):
        code, _, _ = run([
            "extract", "--slide", bundle["slide"], "--label-mask", bundle["labels"],
            "--out", str(tmp_path / "x.csv"),
            "--annotated-out", str(tmp_path / "a.geojson"),
        ], capsys)
        assert code == 2

    def test_annotated_output_has_pathomics(self, bundle, tmp_path, capsys):
        out = tmp_path / "f.csv"
        ann = tmp_path / "a.geojson"
        code, _, _ = run([
            "extract", "--slide", bundle["slide"], "--geojson", bundle["annotations"],
            "--out", str(out), "--annotated-out", str(ann),
        ], capsys)
        assert code == 0
        doc = json.loads(ann.read_text())
        assert len(doc["features"]) == bundle["n_objects"]
        assert all(len(f["properties"]["pathomics"]) == 247 for f in doc["features"])

    def test_env_budget_respected(self, bundle, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("PATHEX_MEMORY_BUDGET", "512KiB")
        code, _, _ = run([
            "extract", "--slide", bundle["slide"], "--geojson", bundle["annotations"],
            "--out", str(tmp_path / "x.csv"),
        ], capsys)
        assert code == 2
        # the flag must override the env var
        code, _, _ = run([
            "extract", "--slide", bundle["slide"], "--geojson", bundle["annotations"],
            "--out", str(tmp_path / "y.csv"), "--memory-budget", "1GiB",
        ], capsys)
        assert code == 0

    def test_worker_counts_byte_identical(self, bundle, tmp_path, capsys):
        outputs = []
        for workers in ("1", "4", "8"):
            out = tmp_path / f"w{workers}.csv"
            code, _, _ = run([
                "extract", "--slide", bundle["slide"],
                "--geojson", bundle["annotations"],
                "--out", str(out), "--workers", workers,
            ], capsys)
            assert code == 0
            outputs.append(out.read_bytes())
        assert outputs[0] == outputs[1] == outputs[2]


class TestBench:
    def test_synthetic_bench_reports_speedup(self, capsys):
        code, out, _ = run([
            "bench", "--synthetic", "seed=2,objects=120,size=4:20,slide=768x768",
            "--repeats", "1",
        ], capsys)
        assert code == 0
        doc = json.loads(out)
        assert doc["equivalence"]["ok"] is True
        assert doc["objects"] == 120
        assert doc["speedup"] > 1.0

    def test_zero_repeats_usage_error(self, capsys):
        code, _, _ = run(["bench", "--synthetic", "", "--repeats", "0"], capsys)
        assert code == 2

    def test_fault_injection_exits_4(self, bundle, capsys, monkeypatch):
        import pathex.cli as cli_mod

        real = cli_mod.oracle_features

        def corrupted(patch, mask, bbox):
            values = real(patch, mask, bbox)
            values = np.array(values)
            values[0] += 1.0
            return values

        monkeypatch.setattr(cli_mod, "oracle_features", corrupted)
        code, out, _ = run([
            "bench", "--slide", bundle["slide"], "--label-mask", bundle["labels"],
            "--repeats", "1",
        ], capsys)
        assert code == 4
        doc = json.loads(out)
        assert doc["equivalence"]["ok"] is False
        assert "SizeShape_Area" in doc["equivalence"]["failed_features"]


class TestCompare:
    def _extract(self, bundle, tmp_path, capsys, name, mode):
        out = tmp_path / name
        code, _, _ = run([
            "extract", "--slide", bundle["slide"], "--geojson", bundle["annotations"],
            "--out", str(out), "--mode", mode,
        ], capsys)
        assert code == 0
        return out

    def test_same_csv_distance_zero(self, bundle, tmp_path, capsys):
        a = self._extract(bundle, tmp_path, capsys, "a.csv", "batched")
        code, out, _ = run(["compare", str(a), str(a)], capsys)
        assert code == 0
        doc = json.loads(out)
        assert all(r["l1_distance"] == 0.0 for r in doc["features"])

    def test_batched_vs_per_object_distance_zero(self, bundle, tmp_path, capsys):
        a = self._extract(bundle, tmp_path, capsys, "a.csv", "batched")
        b = self._extract(bundle, tmp_path, capsys, "b.csv", "per-object")
        code, out, _ = run(["compare", str(a), str(b), "--bins", "32"], capsys)
        assert code == 0
        assert all(r["l1_distance"] == 0.0 for r in json.loads(out)["features"])

    def test_different_slides_exceed_tolerance(self, bundle, tmp_path, capsys):
        a = self._extract(bundle, tmp_path, capsys, "a.csv", "batched")
        other = generate_synthetic_slide(seed=99, slide_size=(640, 640),
                                         n_objects=50, size_range=(6, 40))
        paths = other.write_dir(tmp_path / "other")
        b = tmp_path / "b.csv"
        code, _, _ = run([
            "extract", "--slide", paths["slide"], "--geojson", paths["annotations"],
            "--out", str(b),
        ], capsys)
        assert code == 0
        code, out, _ = run(["compare", str(a), str(b)], capsys)
        assert code == 5
        doc = json.loads(out)
        assert any(r["l1_distance"] > 0 for r in doc["features"])

    def test_missing_column_is_io_error(self, bundle, tmp_path, capsys):
        a = self._extract(bundle, tmp_path, capsys, "a.csv", "batched")
        code, _, _ = run([
            "compare", str(a), str(a), "--features", "NoSuchFeature",
        ], capsys)
        assert code == 3

    def test_plot_dir_renders_figures(self, bundle, tmp_path, capsys):
        a = self._extract(bundle, tmp_path, capsys, "a.csv", "batched")
        plots = tmp_path / "plots"
        code, out, _ = run([
            "compare", str(a), str(a), "--plot-dir", str(plots),
        ], capsys)
        assert code == 0
        doc = json.loads(out)
        rendered = [Path(p) for p in doc["figures"]]
        assert len(rendered) == 4
        assert all(p.exists() and p.stat().st_size > 0 for p in rendered)


class TestInspectAndGenerate:
    def test_inspect_whole_slide(self, bundle, capsys):
        code, out, _ = run([
            "inspect", "--slide", bundle["slide"], "--geojson", bundle["annotations"],
            "--window", "0,0,640,640",
        ], capsys)
        assert code == 0
        doc = json.loads(out)
        assert doc["ids"] == list(range(1, bundle["n_objects"] + 1))
        assert doc["height"] >= 1 and doc["node_count"] >= 1

    def test_inspect_matches_linear_scan(self, bundle, capsys):
        from pathex.geojson import ingest_geojson
        from pathex.model import BoundingBox
        from pathex.oracle import oracle_query
        from pathex.slide import open_slide

        slide = open_slide(bundle["slide"])
        regions, _ = ingest_geojson(Path(bundle["annotations"]).read_bytes(),
                                    slide.width, slide.height)
        window = (100, 100, 250, 200)
        code, out, _ = run([
            "inspect", "--slide", bundle["slide"], "--geojson", bundle["annotations"],
            "--window", ",".join(map(str, window)),
        ], capsys)
        assert code == 0
        expect = oracle_query(regions, BoundingBox(window[0], window[1],
                                                   window[0] + window[2],
                                                   window[1] + window[3]))
        assert json.loads(out)["ids"] == expect

    def test_inspect_empty_window(self, bundle, capsys):
        code, out, _ = run([
            "inspect", "--slide", bundle["slide"], "--geojson", bundle["annotations"],
            "--window", "636,636,2,2",
        ], capsys)
        assert code == 0

    def test_generate_deterministic(self, tmp_path, capsys):
        args = ["generate", "--seed", "4", "--objects", "15",
                "--size-range", "4,20", "--slide-size", "256,256"]
        code, _, _ = run([*args, "--out-dir", str(tmp_path / "a")], capsys)
        assert code == 0
        code, _, _ = run([*args, "--out-dir", str(tmp_path / "b")], capsys)
        assert code == 0
        for name in ("slide.tiff", "labels.png", "annotations.geojson", "classes.json"):
            assert (tmp_path / "a" / name).read_bytes() == \
                (tmp_path / "b" / name).read_bytes()

    def test_generate_zero_objects(self, tmp_path, capsys):
        code, out, _ = run([
            "generate", "--seed", "1", "--objects", "0", "--out-dir",
            str(tmp_path / "z"),
        ], capsys)
        assert code == 0
        doc = json.loads((tmp_path / "z" / "annotations.geojson").read_text())
        assert doc == {"type": "FeatureCollection", "features": []}

    def test_generate_overfull_exits_6(self, tmp_path, capsys):
        code, _, _ = run([
            "generate", "--seed", "1", "--objects", "500",
            "--size-range", "16,32", "--slide-size", "64,64",
            "--out-dir", str(tmp_path / "o"),
        ], capsys)
        assert code == 6
