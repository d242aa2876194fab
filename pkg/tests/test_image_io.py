"""Codec round trips, PPM parsing, corpus and output manifests."""

from __future__ import annotations

import json

import numpy as np
import pytest

from thumbaug.image import BBox
from thumbaug.image_io import CodecError, load_image, save_image
from thumbaug.manifest import (
    iter_manifest_records,
    read_corpus_manifest,
    read_output_manifest,
    write_manifest_line,
)
from thumbaug.pipeline import AugRecord
from thumbaug.strategies import Strategy


class TestPpm:
    def test_known_bytes_land_in_row_major_order(self, tmp_path):
        raster = bytes(range(12))  # 2x2 RGB
        path = tmp_path / "tiny.ppm"
        path.write_bytes(b"P6\n2 2\n255\n" + raster)
        img = load_image(path)
        assert img.shape == (2, 2, 3)
        assert img.tobytes() == raster

    def test_header_comments_are_skipped(self, tmp_path):
        path = tmp_path / "c.ppm"
        path.write_bytes(b"P6\n# made by hand\n1 1\n255\n\x01\x02\x03")
        assert load_image(path).tolist() == [[[1, 2, 3]]]

    def test_round_trip(self, tmp_path, rng_images):
        img = rng_images(7, 5)
        path = tmp_path / "img.ppm"
        save_image(img, path)
        assert np.array_equal(load_image(path), img)

    def test_truncated_raster_is_rejected(self, tmp_path):
        path = tmp_path / "short.ppm"
        path.write_bytes(b"P6\n2 2\n255\n\x00\x01")
        with pytest.raises(CodecError):
            load_image(path)

    def test_bad_maxval_is_rejected(self, tmp_path):
        path = tmp_path / "deep.ppm"
        path.write_bytes(b"P6\n1 1\n65535\n\x00\x00\x00\x00\x00\x00")
        with pytest.raises(CodecError):
            load_image(path)

    def test_single_channel_cannot_be_ppm(self, tmp_path):
        img = np.zeros((2, 2, 1), dtype=np.uint8)
        with pytest.raises(CodecError):
            save_image(img, tmp_path / "gray.ppm")


class TestPng:
    def test_round_trip(self, tmp_path, rng_images):
        img = rng_images(9, 4)
        path = tmp_path / "img.png"
        save_image(img, path)
        assert np.array_equal(load_image(path), img)

    def test_one_pixel_image(self, tmp_path):
        img = np.array([[[3, 200, 17]]], dtype=np.uint8)
        path = tmp_path / "one.png"
        save_image(img, path)
        assert np.array_equal(load_image(path), img)

    def test_grayscale_png_expands_to_three_equal_channels(self, tmp_path, rng_images):
        gray = rng_images(6, 6, channels=1)
        path = tmp_path / "g.png"
        save_image(gray, path)
        loaded = load_image(path)
        assert loaded.shape == (6, 6, 3)
        for c in range(3):
            assert np.array_equal(loaded[..., c], gray[..., 0])

    def test_truncated_png_is_rejected(self, tmp_path, rng_images):
        path = tmp_path / "img.png"
        save_image(rng_images(16, 16), path)
        data = path.read_bytes()
        path.write_bytes(data[: len(data) // 2])
        with pytest.raises(CodecError):
            load_image(path)

    def test_saving_is_byte_deterministic(self, tmp_path, rng_images):
        img = rng_images(12, 12)
        a, b = tmp_path / "a.png", tmp_path / "b.png"
        save_image(img, a)
        save_image(img, b)
        assert a.read_bytes() == b.read_bytes()


class TestCodecErrors:
    def test_unknown_content(self, tmp_path):
        path = tmp_path / "mystery.png"
        path.write_bytes(b"definitely not an image")
        with pytest.raises(CodecError):
            load_image(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            load_image(tmp_path / "absent.png")

    def test_unsupported_save_extension(self, tmp_path, rng_images):
        with pytest.raises(CodecError):
            save_image(rng_images(2, 2), tmp_path / "img.jpg")

    def test_unwritable_directory(self, tmp_path, rng_images):
        with pytest.raises(OSError):
            save_image(rng_images(2, 2), tmp_path / "no_such_dir" / "img.png")


class TestCorpusManifest:
    def test_csv_with_and_without_header(self, tmp_path):
        body = "a.png,dog,0\nb.png,cat,1\n"
        bare = tmp_path / "bare.csv"
        bare.write_text(body)
        headed = tmp_path / "headed.csv"
        headed.write_text("input_path,sample_id,class_index\n" + body)
        for path in (bare, headed):
            entries = read_corpus_manifest(path)
            assert [e.sample_id for e in entries] == ["dog", "cat"]
            assert [e.class_index for e in entries] == [0, 1]
            assert entries[0].input_path == tmp_path / "a.png"

    def test_jsonl(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        path.write_text(
            json.dumps({"input_path": "x.png", "sample_id": "x", "class_index": 3}) + "\n"
        )
        (entry,) = read_corpus_manifest(path)
        assert entry.sample_id == "x"
        assert entry.class_index == 3

    def test_absolute_paths_kept(self, tmp_path):
        path = tmp_path / "corpus.csv"
        path.write_text("/elsewhere/a.png,a,0\n")
        (entry,) = read_corpus_manifest(path)
        assert str(entry.input_path) == "/elsewhere/a.png"

    def test_duplicate_sample_id_rejected(self, tmp_path):
        path = tmp_path / "corpus.csv"
        path.write_text("a.png,same,0\nb.png,same,1\n")
        with pytest.raises(ValueError, match="same"):
            read_corpus_manifest(path)

    def test_bad_class_index(self, tmp_path):
        path = tmp_path / "corpus.csv"
        path.write_text("a.png,a,not-a-number\n")
        with pytest.raises(ValueError):
            read_corpus_manifest(path)


class TestOutputManifest:
    def record(self):
        return AugRecord(
            output_id="s1",
            strategy_applied=Strategy.MST,
            sources=(("s1", 0.75), ("s2", 0.25)),
            boxes=(BBox(3, 4, 8, 8),),
            batch_index=2,
            root_seed=99,
        )

    def test_round_trip_preserves_everything(self, tmp_path):
        path = tmp_path / "manifest.jsonl"
        with open(path, "w") as fh:
            write_manifest_line(fh, self.record(), "s1.png")
        (rec,) = read_output_manifest(path)
        assert rec.output_path == "s1.png"
        assert rec.strategy is Strategy.MST
        assert rec.sources == (("s1", 0.75), ("s2", 0.25))
        assert rec.boxes == (BBox(3, 4, 8, 8),)
        assert rec.batch_index == 2
        assert rec.root_seed == 99

    def test_weights_round_trip_exactly(self, tmp_path):
        # 0.6 and 0.2 are not binary-exact; the serialized text must still
        # reconstruct the identical float64 values
        record = AugRecord(
            output_id="s1",
            strategy_applied=Strategy.MMT,
            sources=(("s1", 0.6), ("s2", 0.2), ("s3", 0.2)),
            boxes=(BBox(0, 0, 2, 2), BBox(4, 4, 2, 2)),
            batch_index=0,
            root_seed=0,
        )
        path = tmp_path / "manifest.jsonl"
        with open(path, "w") as fh:
            write_manifest_line(fh, record, "s1.png")
        (rec,) = read_output_manifest(path)
        assert rec.sources == (("s1", 0.6), ("s2", 0.2), ("s3", 0.2))

    def test_line_is_plain_json_with_expected_keys(self, tmp_path):
        path = tmp_path / "manifest.jsonl"
        with open(path, "w") as fh:
            write_manifest_line(fh, self.record(), "s1.png")
        obj = json.loads(path.read_text())
        assert list(obj) == [
            "output_path",
            "strategy",
            "sources",
            "boxes",
            "batch_index",
            "root_seed",
        ]
        assert obj["boxes"] == [{"x": 3, "y": 4, "w": 8, "h": 8}]

    def test_lane_reconstruction(self):
        def rec(batch):
            return AugRecord("x", Strategy.NONE, (("x", 1.0),), (), batch, 0)

        records = [rec(0), rec(0), rec(1), rec(2), rec(2)]
        # simulate parsed records; only batch_index matters for lanes
        lanes = [lane for _, lane in iter_manifest_records(records)]
        assert lanes == [0, 1, 0, 0, 1]
