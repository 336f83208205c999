import json

import numpy as np
import pytest
from PIL import Image

from streetlfe.cli import main
from streetlfe.config import load_config
from streetlfe.depth import load_raw_grid
from streetlfe.geometry import PanoDims, PixelCoord
from streetlfe.masks import SegMask, write_mask_bundle
from streetlfe.synth import DoorSpec, SceneSpec, save_scene, write_scene_fixture


def example_spec(**overrides) -> SceneSpec:
    kwargs = dict(
        camera_height_m=2.5,
        camera_elev_m=2.5,
        ground_elev_m=0.0,
        facade_distance_m=6.0,
        facade_azimuth_deg=15.0,
        door=DoorSpec(center_offset_m=0.2, width_m=1.2, bottom_elev_m=1.0, height_m=2.0),
        depth_dims=PanoDims(width_px=1024, height_px=512),
        panorama_id="pano-demo",
        property_id="prop-demo",
    )
    kwargs.update(overrides)
    return SceneSpec(**kwargs)


@pytest.fixture()
def fixture_dir(tmp_path):
    write_scene_fixture(example_spec(), tmp_path)
    return tmp_path


class TestSynthCommand:
    def test_writes_fixture_tree(self, tmp_path, capsys):
        scene_path = tmp_path / "scene.json"
        save_scene(scene_path, example_spec())
        out = tmp_path / "fx"
        assert main(["synth", "--scene", str(scene_path), "--out", str(out)]) == 0
        assert (out / "parcels.geojson").is_file()
        assert (out / "panos" / "pano-demo.json").is_file()
        assert (out / "panos" / "pano-demo.depth.bin").is_file()
        assert (out / "masks" / "pano-demo" / "manifest.json").is_file()


class TestEstimateCommand:
    def test_single_scene_available(self, fixture_dir, capsys):
        out = fixture_dir / "out.geojson"
        code = main(
            [
                "estimate",
                "--parcels", str(fixture_dir / "parcels.geojson"),
                "--panos", str(fixture_dir / "panos"),
                "--masks", str(fixture_dir / "masks"),
                "--out", str(out),
            ]
        )
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["type"] == "FeatureCollection"
        assert len(doc["features"]) == 1
        props = doc["features"][0]["properties"]
        assert props["status"] == "Available"
        assert props["property_id"] == "prop-demo"
        assert abs(props["lfe_m"] - 1.0) < 0.05
        assert props["panorama_id"] == "pano-demo"
        assert "availability" not in capsys.readouterr().err

    def test_runs_are_byte_identical(self, fixture_dir):
        args = [
            "estimate",
            "--parcels", str(fixture_dir / "parcels.geojson"),
            "--panos", str(fixture_dir / "panos"),
            "--masks", str(fixture_dir / "masks"),
        ]
        out1 = fixture_dir / "a.geojson"
        out2 = fixture_dir / "b.geojson"
        assert main(args + ["--out", str(out1)]) == 0
        assert main(args + ["--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_parcel_without_masks_is_no_mask(self, fixture_dir):
        parcels = json.loads((fixture_dir / "parcels.geojson").read_text())
        orphan = {
            "type": "Feature",
            "geometry": {"type": "Point", "coordinates": [-95.37, 29.76]},
            "properties": {"property_id": "orphan"},
        }
        parcels["features"].append(orphan)
        (fixture_dir / "parcels.geojson").write_text(json.dumps(parcels))
        out = fixture_dir / "out.geojson"
        main(
            [
                "estimate",
                "--parcels", str(fixture_dir / "parcels.geojson"),
                "--panos", str(fixture_dir / "panos"),
                "--masks", str(fixture_dir / "masks"),
                "--out", str(out),
            ]
        )
        features = json.loads(out.read_text())["features"]
        by_id = {f["properties"]["property_id"]: f["properties"] for f in features}
        assert by_id["orphan"]["status"] == "Unavailable(NoMask)"
        assert by_id["orphan"]["panorama_id"] is None
        assert "lfe_m" not in by_id["orphan"]

    def test_empty_parcel_file(self, fixture_dir, capsys):
        empty = fixture_dir / "empty.geojson"
        empty.write_text(json.dumps({"type": "FeatureCollection", "features": []}))
        out = fixture_dir / "out.geojson"
        code = main(
            [
                "estimate",
                "--parcels", str(empty),
                "--panos", str(fixture_dir / "panos"),
                "--masks", str(fixture_dir / "masks"),
                "--out", str(out),
            ]
        )
        assert code == 0
        assert json.loads(out.read_text()) == {"type": "FeatureCollection", "features": []}

    def test_min_points_flag_overrides(self, fixture_dir):
        out = fixture_dir / "out.geojson"
        main(
            [
                "estimate",
                "--parcels", str(fixture_dir / "parcels.geojson"),
                "--panos", str(fixture_dir / "panos"),
                "--masks", str(fixture_dir / "masks"),
                "--out", str(out),
                "--min-points", "100000",
            ]
        )
        props = json.loads(out.read_text())["features"][0]["properties"]
        assert props["status"] == "Unavailable(NoDoorBottom)"

    def test_bundle_less_masks_root_yields_no_mask_rows(self, fixture_dir):
        empty_masks = fixture_dir / "no-bundles"
        empty_masks.mkdir()
        out = fixture_dir / "out.geojson"
        code = main(
            [
                "estimate",
                "--parcels", str(fixture_dir / "parcels.geojson"),
                "--panos", str(fixture_dir / "panos"),
                "--masks", str(empty_masks),
                "--out", str(out),
            ]
        )
        assert code == 0
        props = json.loads(out.read_text())["features"][0]["properties"]
        assert props["status"] == "Unavailable(NoMask)"

    def test_base64_depth_payload_accepted(self, fixture_dir):
        # Depth supplied as a base64 text payload instead of a raw grid.
        import numpy as np

        from streetlfe.depth import PlaneSet, encode_plane_payload

        pano_dir = fixture_dir / "panos"
        (pano_dir / "pano-demo.depth.bin").unlink()
        # Single facade plane straight ahead: depth exists everywhere the
        # door mask points, so the estimate still succeeds.
        import math

        az = math.radians(15.0)
        normal = (math.sin(az), math.cos(az), 0.0)
        ps = PlaneSet.from_planes(
            [(normal, 6.0)], np.ones((256, 512), dtype=np.uint8)
        )
        (pano_dir / "pano-demo.depth.b64").write_text(encode_plane_payload(ps))
        out = fixture_dir / "out.geojson"
        code = main(
            [
                "estimate",
                "--parcels", str(fixture_dir / "parcels.geojson"),
                "--panos", str(pano_dir),
                "--masks", str(fixture_dir / "masks"),
                "--out", str(out),
            ]
        )
        assert code == 0
        props = json.loads(out.read_text())["features"][0]["properties"]
        assert props["status"] == "Available"
        assert abs(props["lfe_m"] - 1.0) < 0.2  # coarser 256-row payload grid

    def test_missing_parcel_file_fails(self, fixture_dir, capsys):
        code = main(
            [
                "estimate",
                "--parcels", str(fixture_dir / "nope.geojson"),
                "--panos", str(fixture_dir / "panos"),
                "--masks", str(fixture_dir / "masks"),
                "--out", str(fixture_dir / "out.geojson"),
            ]
        )
        assert code == 1
        assert "error:" in capsys.readouterr().err

    def test_live_fetch_requires_api_key(self, fixture_dir, capsys, monkeypatch):
        monkeypatch.delenv("STREETLFE_API_KEY", raising=False)
        code = main(
            [
                "estimate",
                "--parcels", str(fixture_dir / "parcels.geojson"),
                "--panos", str(fixture_dir / "panos"),
                "--masks", str(fixture_dir / "masks"),
                "--out", str(fixture_dir / "out.geojson"),
                "--live-fetch",
            ]
        )
        assert code == 1


class TestEvalCommand:
    def run_pipeline(self, fixture_dir):
        out = fixture_dir / "out.geojson"
        main(
            [
                "estimate",
                "--parcels", str(fixture_dir / "parcels.geojson"),
                "--panos", str(fixture_dir / "panos"),
                "--masks", str(fixture_dir / "masks"),
                "--out", str(out),
            ]
        )
        return out

    def test_eval_against_truth(self, fixture_dir, capsys):
        out = self.run_pipeline(fixture_dir)
        report_path = fixture_dir / "report.json"
        code = main(
            [
                "eval",
                "--pred", str(out),
                "--truth", str(fixture_dir / "parcels.geojson"),
                "--out", str(report_path),
            ]
        )
        assert code == 0
        stdout = capsys.readouterr().out
        assert "availability: 100.00% (1/1)" in stdout
        report = json.loads(report_path.read_text())
        assert report["availability_pct"] == 100.0
        assert report["mae_m"] < 0.05

    def test_predictions_equal_truth(self, tmp_path, capsys):
        truth = {
            "type": "FeatureCollection",
            "features": [
                {
                    "type": "Feature",
                    "geometry": {"type": "Point", "coordinates": [-95.4, 29.7]},
                    "properties": {"property_id": f"p{i}", "lfe_truth_m": 1.0 + i},
                }
                for i in range(4)
            ],
        }
        preds = {
            "type": "FeatureCollection",
            "features": [
                {
                    "type": "Feature",
                    "geometry": {"type": "Point", "coordinates": [-95.4, 29.7]},
                    "properties": {
                        "property_id": f"p{i}",
                        "status": "Available",
                        "lfe_m": 1.0 + i,
                    },
                }
                for i in range(4)
            ],
        }
        (tmp_path / "truth.geojson").write_text(json.dumps(truth))
        (tmp_path / "pred.geojson").write_text(json.dumps(preds))
        code = main(
            [
                "eval",
                "--pred", str(tmp_path / "pred.geojson"),
                "--truth", str(tmp_path / "truth.geojson"),
            ]
        )
        assert code == 0
        stdout = capsys.readouterr().out
        assert "availability: 100.00% (4/4)" in stdout
        assert "0.0000" in stdout  # MAE

    def test_no_overlap_fails(self, tmp_path, capsys):
        (tmp_path / "truth.geojson").write_text(
            json.dumps(
                {
                    "type": "FeatureCollection",
                    "features": [
                        {
                            "type": "Feature",
                            "geometry": {"type": "Point", "coordinates": [0, 0]},
                            "properties": {"property_id": "only-truth"},
                        }
                    ],
                }
            )
        )
        (tmp_path / "pred.geojson").write_text(
            json.dumps({"type": "FeatureCollection", "features": []})
        )
        code = main(
            [
                "eval",
                "--pred", str(tmp_path / "pred.geojson"),
                "--truth", str(tmp_path / "truth.geojson"),
            ]
        )
        assert code == 1
        assert "error:" in capsys.readouterr().err


class TestEvalSegCommand:
    def test_identical_bundles_are_perfect(self, fixture_dir, capsys):
        bundle = fixture_dir / "masks" / "pano-demo"
        code = main(["eval-seg", "--pred", str(bundle), "--gt", str(bundle)])
        assert code == 0
        stdout = capsys.readouterr().out
        assert "100.00" in stdout  # IoU and AP50 both perfect

    def test_disjoint_bundles(self, tmp_path, capsys):
        def bundle(where, origin):
            write_mask_bundle(
                [
                    SegMask(
                        property_id="p",
                        panorama_id="pano",
                        crop_origin=PixelCoord(*origin),
                        crop_w=8,
                        crop_h=8,
                        bitmap=np.ones((8, 8), dtype=bool),
                        score=0.7,
                        prompt="",
                        model_id="",
                    )
                ],
                where,
                panorama_id="pano",
            )

        bundle(tmp_path / "a", (0, 0))
        bundle(tmp_path / "b", (100, 100))
        code = main(["eval-seg", "--pred", str(tmp_path / "a"), "--gt", str(tmp_path / "b")])
        assert code == 0
        out = capsys.readouterr().out
        assert "0.00" in out


class TestDecodeDepthCommand:
    def test_all_nan_payload(self, tmp_path):
        from streetlfe.depth import PlaneSet, encode_plane_payload

        ps = PlaneSet.from_planes(
            [((0.0, 0.0, -1.0), 2.5)], np.zeros((2, 4), dtype=np.uint8)
        )
        payload_path = tmp_path / "payload.b64"
        payload_path.write_text(encode_plane_payload(ps))
        out = tmp_path / "grid.bin"
        code = main(["decode-depth", "--in", str(payload_path), "--out", str(out)])
        assert code == 0
        grid = load_raw_grid(out)
        assert np.isnan(grid.values).all()


class TestStitchCommand:
    def test_two_by_two_grid(self, tmp_path):
        rng = np.random.default_rng(2)
        tile_dir = tmp_path / "tiles"
        tile_dir.mkdir()
        for r in range(2):
            for c in range(2):
                arr = rng.integers(0, 255, size=(512, 512, 3), dtype=np.uint8)
                Image.fromarray(arr).save(tile_dir / f"{r}_{c}.png")
        out = tmp_path / "pano.png"
        code = main(["stitch", "--tiles", str(tile_dir), "--out", str(out)])
        assert code == 0
        with Image.open(out) as img:
            assert img.size == (1024, 1024)


class TestConfigPrecedence:
    def test_flags_beat_file_beat_defaults(self, tmp_path):
        cfg_file = tmp_path / "cfg.toml"
        cfg_file.write_text("min_points = 7\noutlier_k = 2.0\n")
        cfg = load_config(cfg_file, {"min_points": 9})
        assert cfg.min_points == 9
        assert cfg.outlier_k == 2.0
        assert cfg.fov_deg == 90.0

    def test_unknown_keys_rejected(self, tmp_path):
        cfg_file = tmp_path / "cfg.toml"
        cfg_file.write_text("typo_key = 1\n")
        with pytest.raises(ValueError):
            load_config(cfg_file, None)
