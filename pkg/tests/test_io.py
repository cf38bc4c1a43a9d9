"""Tests for GSPL cloud files, PNG images and bundle directories."""

import json

import numpy as np
import pytest
from pydantic import ValidationError

from gsdefend.core.errors import DimensionMismatchError, MissingArtifactError, ParseError, UnsupportedVersionError
from gsdefend.core.models import BYTES_PER_SPLAT
from gsdefend.scene.io import (
    HEADER,
    MAGIC,
    decode_cloud,
    encode_cloud,
    load_bundle,
    load_cloud,
    load_image,
    save_bundle,
    save_cloud,
    save_image,
)
from gsdefend.scene.types import GaussianCloud, ImageBuffer


class TestCloudCodec:
    """Tests for the binary cloud format."""

    def test_round_trip_is_lossless(self, ground_truth):
        decoded = decode_cloud(encode_cloud(ground_truth))
        np.testing.assert_array_equal(decoded.as_matrix(), ground_truth.as_matrix())

    def test_layout(self, ground_truth):
        data = encode_cloud(ground_truth)
        assert data[:4] == MAGIC
        assert len(data) == HEADER.size + 20 * BYTES_PER_SPLAT == 14 + 2240

    def test_empty_cloud(self):
        assert len(decode_cloud(encode_cloud(GaussianCloud.empty()))) == 0

    def test_truncated_header(self):
        with pytest.raises(ParseError) as exc_info:
            decode_cloud(b"GSPL\x01")
        assert exc_info.value.offset == 5

    def test_bad_magic(self, ground_truth):
        data = b"XXXX" + encode_cloud(ground_truth)[4:]
        with pytest.raises(ParseError, match="magic") as exc_info:
            decode_cloud(data)
        assert exc_info.value.offset == 0

    def test_unsupported_version(self):
        with pytest.raises(UnsupportedVersionError) as exc_info:
            decode_cloud(HEADER.pack(MAGIC, 2, 0))
        assert exc_info.value.offset == 4

    def test_truncated_splats(self, ground_truth):
        data = encode_cloud(ground_truth)
        cut = HEADER.size + 3 * BYTES_PER_SPLAT + 17
        with pytest.raises(ParseError, match="3 of 20") as exc_info:
            decode_cloud(data[:cut])
        assert exc_info.value.offset == HEADER.size + 3 * BYTES_PER_SPLAT

    def test_trailing_bytes(self, ground_truth):
        data = encode_cloud(ground_truth)
        with pytest.raises(ParseError, match="trailing") as exc_info:
            decode_cloud(data + b"\x00\x00")
        assert exc_info.value.offset == len(data)

    def test_save_and_load(self, ground_truth, tmp_path):
        save_cloud(ground_truth, tmp_path / "nested" / "cloud.gspl")
        loaded = load_cloud(tmp_path / "nested" / "cloud.gspl")
        np.testing.assert_array_equal(loaded.as_matrix(), ground_truth.as_matrix())

    def test_missing_file(self, tmp_path):
        with pytest.raises(MissingArtifactError):
            load_cloud(tmp_path / "absent.gspl")


class TestImages:
    """Tests for 8-bit PNG persistence."""

    def test_quantized_image_round_trips(self, rng, tmp_path):
        image = ImageBuffer(rng.uniform(0, 1, (6, 5, 3))).quantized()
        save_image(image, tmp_path / "a.png")
        loaded = load_image(tmp_path / "a.png")
        np.testing.assert_array_equal(loaded.pixels, image.pixels)

    def test_values_are_clamped(self, tmp_path):
        image = ImageBuffer(np.full((2, 2, 3), 1.7))
        save_image(image, tmp_path / "a.png")
        np.testing.assert_array_equal(load_image(tmp_path / "a.png").pixels, 1.0)

    def test_missing_image(self, tmp_path):
        with pytest.raises(MissingArtifactError):
            load_image(tmp_path / "absent.png")


class TestBundles:
    """Tests for bundle directories."""

    def test_round_trip(self, tiny_bundle, tmp_path):
        save_bundle(tiny_bundle, tmp_path / "clean")
        loaded = load_bundle(tmp_path / "clean")

        assert loaded.metadata == tiny_bundle.metadata
        assert len(loaded.train_views) == len(tiny_bundle.train_views)
        assert len(loaded.test_views) == len(tiny_bundle.test_views)
        for (cam_a, img_a), (cam_b, img_b) in zip(
            loaded.train_views + loaded.test_views, tiny_bundle.train_views + tiny_bundle.test_views
        ):
            np.testing.assert_array_equal(img_a.pixels, img_b.pixels)
            np.testing.assert_array_equal(cam_a.rotation, cam_b.rotation)
            np.testing.assert_array_equal(cam_a.translation, cam_b.translation)
            assert (cam_a.fx, cam_a.cx, cam_a.width) == (cam_b.fx, cam_b.cx, cam_b.width)

    def test_directory_contents(self, tiny_bundle, tmp_path):
        save_bundle(tiny_bundle, tmp_path)
        records = json.loads((tmp_path / "cameras.json").read_text())
        assert [r["split"] for r in records] == ["train"] * 6 + ["test"] * 2
        assert len(records[0]["rotation"]) == 9
        assert (tmp_path / "train_005.png").is_file()
        assert (tmp_path / "test_001.png").is_file()
        assert json.loads((tmp_path / "bundle.json").read_text())["kind"] == "clean"

    def test_missing_cameras(self, tiny_bundle, tmp_path):
        save_bundle(tiny_bundle, tmp_path)
        (tmp_path / "cameras.json").unlink()
        with pytest.raises(MissingArtifactError, match="cameras.json"):
            load_bundle(tmp_path)

    def test_missing_image(self, tiny_bundle, tmp_path):
        save_bundle(tiny_bundle, tmp_path)
        (tmp_path / "train_002.png").unlink()
        with pytest.raises(MissingArtifactError):
            load_bundle(tmp_path)

    def test_camera_schema_violation(self, tiny_bundle, tmp_path):
        save_bundle(tiny_bundle, tmp_path)
        records = json.loads((tmp_path / "cameras.json").read_text())
        del records[0]["fx"]
        (tmp_path / "cameras.json").write_text(json.dumps(records))
        with pytest.raises(ValidationError):
            load_bundle(tmp_path)

    def test_image_size_must_match_camera(self, tiny_bundle, tmp_path):
        save_bundle(tiny_bundle, tmp_path)
        save_image(ImageBuffer.filled(8, 8, 0.0), tmp_path / "train_000.png")
        with pytest.raises(DimensionMismatchError, match="train_000.png"):
            load_bundle(tmp_path)
