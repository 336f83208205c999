import json

import numpy as np
import pytest

from streetlfe.errors import (
    DimensionMismatch,
    MissingManifest,
    NonBinaryPixel,
    ParseError,
)
from streetlfe.geometry import PanoDims, PixelCoord
from streetlfe.masks import (
    SegMask,
    read_mask_bundle,
    read_pgm,
    scan_mask_bundles,
    write_mask_bundle,
    write_pgm,
)


def make_mask(rng: np.random.Generator, pid: str = "p1", pano: str = "pano-a") -> SegMask:
    w = int(rng.integers(3, 40))
    h = int(rng.integers(3, 40))
    return SegMask(
        property_id=pid,
        panorama_id=pano,
        crop_origin=PixelCoord(x=int(rng.integers(0, 500)), y=int(rng.integers(0, 200))),
        crop_w=w,
        crop_h=h,
        bitmap=rng.random((h, w)) < 0.4,
        score=float(rng.uniform(0, 1)),
        prompt="the door in the front of the house",
        model_id="model-x",
    )


class TestPgm:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(5)
        bitmap = rng.random((17, 23)) < 0.5
        path = tmp_path / "m.pgm"
        write_pgm(path, bitmap)
        arr = read_pgm(path)
        assert arr.shape == (17, 23)
        np.testing.assert_array_equal(arr == 255, bitmap)

    def test_rejects_gray_pixel(self, tmp_path):
        path = tmp_path / "gray.pgm"
        path.write_bytes(b"P5\n2 2\n255\n" + bytes([0, 255, 128, 0]))
        with pytest.raises(NonBinaryPixel):
            read_pgm(path)

    def test_rejects_wrong_maxval(self, tmp_path):
        path = tmp_path / "deep.pgm"
        path.write_bytes(b"P5\n1 1\n65535\n\x00\x00")
        with pytest.raises(NonBinaryPixel):
            read_pgm(path)

    def test_rejects_truncated_raster(self, tmp_path):
        path = tmp_path / "short.pgm"
        path.write_bytes(b"P5\n4 4\n255\n" + bytes(7))
        with pytest.raises(DimensionMismatch):
            read_pgm(path)

    def test_rejects_wrong_magic(self, tmp_path):
        path = tmp_path / "p2.pgm"
        path.write_bytes(b"P2\n1 1\n255\n0")
        with pytest.raises(ParseError):
            read_pgm(path)

    def test_header_comments_tolerated(self, tmp_path):
        path = tmp_path / "c.pgm"
        path.write_bytes(b"P5\n# a comment\n2 1\n255\n" + bytes([255, 0]))
        arr = read_pgm(path)
        np.testing.assert_array_equal(arr, [[255, 0]])


class TestBundle:
    def test_single_all_ones_mask(self, tmp_path):
        mask = SegMask(
            property_id="A1",
            panorama_id="pano-a",
            crop_origin=PixelCoord(10, 20),
            crop_w=40,
            crop_h=80,
            bitmap=np.ones((80, 40), dtype=bool),
            score=0.9,
            prompt="door",
            model_id="m",
        )
        write_mask_bundle([mask], tmp_path)
        loaded = read_mask_bundle(tmp_path)
        assert len(loaded) == 1
        assert loaded[0].bitmap.all()
        assert loaded[0].area_px == 40 * 80

    def test_round_trip_field_for_field(self, tmp_path):
        rng = np.random.default_rng(17)
        masks = [make_mask(rng, pid=f"p{i}") for i in range(5)]
        write_mask_bundle(masks, tmp_path)
        loaded = read_mask_bundle(tmp_path)
        assert len(loaded) == len(masks)
        for orig, back in zip(masks, loaded):
            assert back.property_id == orig.property_id
            assert back.panorama_id == orig.panorama_id
            assert back.crop_origin == orig.crop_origin
            assert (back.crop_w, back.crop_h) == (orig.crop_w, orig.crop_h)
            np.testing.assert_array_equal(back.bitmap, orig.bitmap)
            assert back.score == orig.score
            assert back.prompt == orig.prompt
            assert back.model_id == orig.model_id

    def test_empty_bundle(self, tmp_path):
        write_mask_bundle([], tmp_path, panorama_id="pano-z")
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["masks"] == []
        assert manifest["panorama_id"] == "pano-z"
        assert list(tmp_path.glob("*.pgm")) == []
        assert read_mask_bundle(tmp_path) == []

    def test_two_masks_same_property_order_preserved(self, tmp_path):
        rng = np.random.default_rng(23)
        masks = [make_mask(rng, pid="same"), make_mask(rng, pid="same")]
        write_mask_bundle(masks, tmp_path)
        assert len(list(tmp_path.glob("*.pgm"))) == 2
        loaded = read_mask_bundle(tmp_path)
        for orig, back in zip(masks, loaded):
            np.testing.assert_array_equal(back.bitmap, orig.bitmap)

    def test_missing_manifest(self, tmp_path):
        with pytest.raises(MissingManifest):
            read_mask_bundle(tmp_path)

    def test_manifest_dimension_mismatch(self, tmp_path):
        mask = SegMask(
            property_id="A1",
            panorama_id="p",
            crop_origin=PixelCoord(0, 0),
            crop_w=40,
            crop_h=80,
            bitmap=np.zeros((80, 40), dtype=bool),
            score=0.5,
            prompt="",
            model_id="",
        )
        write_mask_bundle([mask], tmp_path)
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        manifest["masks"][0]["crop_h"] = 81
        (tmp_path / "manifest.json").write_text(json.dumps(manifest))
        with pytest.raises(DimensionMismatch):
            read_mask_bundle(tmp_path)

    def test_non_binary_pixel_in_bundle(self, tmp_path):
        mask = SegMask(
            property_id="A1",
            panorama_id="p",
            crop_origin=PixelCoord(0, 0),
            crop_w=4,
            crop_h=4,
            bitmap=np.zeros((4, 4), dtype=bool),
            score=0.5,
            prompt="",
            model_id="",
        )
        write_mask_bundle([mask], tmp_path)
        pgm = next(tmp_path.glob("*.pgm"))
        data = bytearray(pgm.read_bytes())
        data[-1] = 128
        pgm.write_bytes(bytes(data))
        with pytest.raises(NonBinaryPixel):
            read_mask_bundle(tmp_path)

    def test_score_serialized_losslessly(self, tmp_path):
        mask = SegMask(
            property_id="A1",
            panorama_id="p",
            crop_origin=PixelCoord(0, 0),
            crop_w=2,
            crop_h=2,
            bitmap=np.ones((2, 2), dtype=bool),
            score=0.12345678901234567,
            prompt="",
            model_id="",
        )
        write_mask_bundle([mask], tmp_path)
        assert read_mask_bundle(tmp_path)[0].score == mask.score

    def test_scan_nested_bundles(self, tmp_path):
        rng = np.random.default_rng(31)
        write_mask_bundle([make_mask(rng, pano="a")], tmp_path / "a", panorama_id="a")
        write_mask_bundle([make_mask(rng, pano="b")], tmp_path / "b", panorama_id="b")
        masks = scan_mask_bundles(tmp_path)
        assert [m.panorama_id for m in masks] == ["a", "b"]

    def test_scan_without_bundles(self, tmp_path):
        with pytest.raises(MissingManifest):
            scan_mask_bundles(tmp_path)


class TestSegMaskInvariants:
    def test_bitmap_shape_checked(self):
        with pytest.raises(DimensionMismatch):
            SegMask(
                property_id="x",
                panorama_id="p",
                crop_origin=PixelCoord(0, 0),
                crop_w=4,
                crop_h=4,
                bitmap=np.zeros((3, 4), dtype=bool),
                score=0.5,
                prompt="",
                model_id="",
            )

    def test_score_range_checked(self):
        with pytest.raises(ValueError):
            SegMask(
                property_id="x",
                panorama_id="p",
                crop_origin=PixelCoord(0, 0),
                crop_w=2,
                crop_h=2,
                bitmap=np.zeros((2, 2), dtype=bool),
                score=1.5,
                prompt="",
                model_id="",
            )

    def test_pano_pixels_stay_in_bounds_with_wrap(self):
        rng = np.random.default_rng(77)
        dims = PanoDims(width_px=512, height_px=256)
        for _ in range(50):
            mask = SegMask(
                property_id="x",
                panorama_id="p",
                crop_origin=PixelCoord(x=int(rng.integers(0, 512)), y=int(rng.integers(0, 200))),
                crop_w=30,
                crop_h=20,
                bitmap=rng.random((20, 30)) < 0.5,
                score=0.5,
                prompt="",
                model_id="",
            )
            mask.validate_within(dims)
            pts = mask.pano_pixels(dims)
            if pts.size:
                assert pts[:, 0].min() >= 0 and pts[:, 0].max() < 512
                assert pts[:, 1].min() >= 0 and pts[:, 1].max() < 256

    def test_validate_within_rejects_overflow(self):
        dims = PanoDims(width_px=512, height_px=256)
        mask = SegMask(
            property_id="x",
            panorama_id="p",
            crop_origin=PixelCoord(0, 250),
            crop_w=4,
            crop_h=10,
            bitmap=np.zeros((10, 4), dtype=bool),
            score=0.5,
            prompt="",
            model_id="",
        )
        with pytest.raises(DimensionMismatch):
            mask.validate_within(dims)
