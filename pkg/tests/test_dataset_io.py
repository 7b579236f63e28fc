"""Serialization: round-trip equality, byte stability, golden files, diagnostics."""

import json
import os

import pytest

from sedkit import (
    BoundingBox,
    Dataset,
    Detection,
    GroundTruth,
    ImageRecord,
    MosaicConfig,
    ProbVector,
    ValidationError,
    WorldConfig,
    atomic_write_text,
    generate_pseudo_labels,
    generate_world,
    load_dataset,
    load_mosaic_batch,
    load_pseudo_labels,
    load_world,
    mosaic_batch,
    save_dataset,
    save_mosaic_batch,
    save_pseudo_labels,
    save_world,
)

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


def box(x_min, y_min, x_max, y_max):
    return BoundingBox(x_min, y_min, x_max, y_max)


def det(b, confidence, n_fg=2, category=0):
    rest = (1.0 - confidence) / n_fg
    probs = [rest] * (n_fg + 1)
    probs[category] = confidence
    return Detection.from_probs(b, ProbVector(tuple(probs)))


def sample_dataset():
    """Three images covering every optional-field combination the schema has."""
    images = (
        ImageRecord(
            image_id="img-0000",
            width=120.0,
            height=90.0,
            detections=(det(box(10, 10, 34, 30), 0.8), det(box(40, 12, 64, 40), 0.55, category=1)),
            ground_truth=(GroundTruth(box=box(11, 9, 35, 31), category=0),),
        ),
        ImageRecord(
            image_id="img-0001",
            width=64.0,
            height=64.0,
            detections=(),
            ground_truth=(),
        ),
        ImageRecord(
            image_id="img-0002",
            width=100.0,
            height=100.0,
            detections=(det(box(5, 5, 25, 25), 0.35),),
            ground_truth=None,
        ),
    )
    return Dataset(images=images, category_names=("car", "bike"))


def labeled_pool():
    """Five labeled source images for mosaic composition."""
    pool = []
    for idx in range(5):
        x = 4.0 + 2.0 * idx
        gts = (
            GroundTruth(box=box(x, 6.0, x + 14.0, 22.0), category=idx % 2),
            GroundTruth(box=box(30.0, 8.0 + idx, 52.0, 30.0 + idx), category=(idx + 1) % 2),
        )
        img = ImageRecord(
            image_id=f"src-{idx}", width=60.0, height=40.0, detections=(), ground_truth=gts
        )
        pool.append((img, gts))
    return pool


def write_json(tmp_path, name, payload):
    path = tmp_path / name
    text = payload if isinstance(payload, str) else json.dumps(payload)
    path.write_text(text)
    return str(path)


class TestAtomicWriteText:
    def test_creates_and_overwrites(self, tmp_path):
        path = tmp_path / "note.txt"
        atomic_write_text(str(path), "one")
        assert path.read_text() == "one"
        atomic_write_text(str(path), "two")
        assert path.read_text() == "two"

    def test_leaves_no_temp_files_behind(self, tmp_path):
        path = tmp_path / "note.txt"
        atomic_write_text(str(path), "payload")
        atomic_write_text(str(path), "payload again")
        assert os.listdir(tmp_path) == ["note.txt"]


class TestDatasetRoundTrip:
    def test_loaded_dataset_equals_original(self, tmp_path):
        ds = sample_dataset()
        path = str(tmp_path / "ds.json")
        save_dataset(ds, path)
        assert load_dataset(path) == ds

    def test_save_load_save_is_byte_stable(self, tmp_path):
        first = tmp_path / "first.json"
        second = tmp_path / "second.json"
        save_dataset(sample_dataset(), str(first))
        save_dataset(load_dataset(str(first)), str(second))
        assert first.read_bytes() == second.read_bytes()

    def test_optional_fields_round_trip_as_written(self, tmp_path):
        ds = sample_dataset()
        path = str(tmp_path / "ds.json")
        save_dataset(ds, path)
        loaded = load_dataset(path)
        assert loaded.images[1].ground_truth == ()
        assert loaded.images[1].detections == ()
        assert loaded.images[2].ground_truth is None
        raw = json.loads((tmp_path / "ds.json").read_text())
        assert "detections" not in raw["images"][1]
        assert "ground_truth" not in raw["images"][2]


class TestWorldRoundTrip:
    def test_generated_world_round_trips(self, tmp_path):
        world = generate_world(WorldConfig(image_count=6, seed=5))
        path = str(tmp_path / "world.json")
        save_world(world, path)
        assert load_world(path) == world

    def test_world_save_load_save_is_byte_stable(self, tmp_path):
        world = generate_world(WorldConfig(image_count=6, seed=5))
        first = tmp_path / "first.json"
        second = tmp_path / "second.json"
        save_world(world, str(first))
        save_world(load_world(str(first)), str(second))
        assert first.read_bytes() == second.read_bytes()

    def test_load_dataset_ignores_candidate_annotations(self, tmp_path):
        world = generate_world(WorldConfig(image_count=4, seed=2))
        path = str(tmp_path / "world.json")
        save_world(world, path)
        assert load_dataset(path) == world.dataset


class TestMosaicRoundTrip:
    def test_batch_round_trips(self, tmp_path):
        cfg = MosaicConfig(canvas_width=120.0, canvas_height=80.0, seed=9)
        batch = mosaic_batch(labeled_pool(), 5, cfg)
        path = str(tmp_path / "mosaics.json")
        save_mosaic_batch(batch, path)
        assert load_mosaic_batch(path) == batch

    def test_batch_save_load_save_is_byte_stable(self, tmp_path):
        cfg = MosaicConfig(canvas_width=120.0, canvas_height=80.0, seed=9)
        batch = mosaic_batch(labeled_pool(), 5, cfg)
        first = tmp_path / "first.json"
        second = tmp_path / "second.json"
        save_mosaic_batch(batch, str(first))
        save_mosaic_batch(load_mosaic_batch(str(first)), str(second))
        assert first.read_bytes() == second.read_bytes()


class TestPseudoLabelRoundTrip:
    def test_label_set_round_trips(self, tmp_path):
        ds = sample_dataset()
        labels = generate_pseudo_labels(ds, 0.5)
        path = str(tmp_path / "labels.json")
        save_pseudo_labels(labels, ds, path)
        assert load_pseudo_labels(path) == labels

    def test_save_load_save_is_byte_stable(self, tmp_path):
        ds = sample_dataset()
        labels = generate_pseudo_labels(ds, 0.5)
        first = tmp_path / "first.json"
        second = tmp_path / "second.json"
        save_pseudo_labels(labels, ds, str(first))
        save_pseudo_labels(load_pseudo_labels(str(first)), ds, str(second))
        assert first.read_bytes() == second.read_bytes()

    def test_document_records_threshold_and_per_image_labels(self, tmp_path):
        ds = sample_dataset()
        labels = generate_pseudo_labels(ds, 0.5)
        path = tmp_path / "labels.json"
        save_pseudo_labels(labels, ds, str(path))
        raw = json.loads(path.read_text())
        assert raw["provenance"] == {"confidence_threshold": 0.5}
        assert [img["id"] for img in raw["images"]] == ["img-0000", "img-0001", "img-0002"]
        assert len(raw["images"][0]["pseudo_labels"]) == 2
        assert raw["images"][1]["pseudo_labels"] == []
        assert raw["images"][2]["pseudo_labels"] == []

    def test_save_rejects_mismatched_dataset(self, tmp_path):
        ds = sample_dataset()
        labels = generate_pseudo_labels(ds, 0.5)
        subset = Dataset(images=ds.images[:1], category_names=ds.category_names)
        with pytest.raises(ValidationError) as err:
            save_pseudo_labels(labels, subset, str(tmp_path / "labels.json"))
        assert "label set and dataset list different images" in str(err.value)


class TestGoldenFixtures:
    def test_golden_dataset_loads_to_known_values(self):
        ds = load_dataset(os.path.join(FIXTURES, "golden_dataset.json"))
        assert ds.category_names == ("car", "bike")
        first_img, second_img = ds.images

        assert first_img.image_id == "img-a"
        assert (first_img.width, first_img.height) == (100.0, 80.0)
        assert first_img.ground_truth == (
            GroundTruth(box=BoundingBox(10.0, 10.0, 30.0, 40.0), category=1),
        )
        top, runner_up = first_img.detections
        assert top.probs.values == (0.7, 0.2, 0.1)
        assert (top.confidence, top.category) == (0.7, 0)
        assert top.box == BoundingBox(12.0, 11.0, 29.0, 38.0)
        assert runner_up.probs.values == (0.1, 0.6, 0.3)
        assert (runner_up.confidence, runner_up.category) == (0.6, 1)

        assert second_img.image_id == "img-b"
        assert (second_img.width, second_img.height) == (50.0, 50.0)
        assert isinstance(second_img.width, float)
        assert second_img.detections == ()
        assert second_img.ground_truth == ()

    def test_golden_dataset_resave_agrees_in_memory(self, tmp_path):
        golden = os.path.join(FIXTURES, "golden_dataset.json")
        ds = load_dataset(golden)
        path = str(tmp_path / "resaved.json")
        save_dataset(ds, path)
        assert load_dataset(path) == ds

    def test_golden_world_loads_to_known_values(self):
        world = load_world(os.path.join(FIXTURES, "golden_world.json"))
        assert world.image_ids == ("img-w0", "img-w1")
        twin, clutter = world.candidates["img-w0"]
        assert twin.gt_index == 0
        assert twin.box == world.dataset.images[0].ground_truth[0].box
        assert (twin.hardness, twin.clutter_affinity, twin.source_jitter) == (0.7, 0.1, -0.05)
        assert clutter.gt_index is None
        assert clutter.box == BoundingBox(30.0, 30.0, 44.0, 40.0)
        assert (clutter.hardness, clutter.clutter_affinity) == (0.5, 0.9)
        assert world.candidates["img-w1"] == ()


def valid_doc():
    return {
        "version": 1,
        "categories": ["car", "bike"],
        "images": [
            {
                "id": "img-0000",
                "width": 64.0,
                "height": 64.0,
                "detections": [{"box": [4.0, 4.0, 20.0, 20.0], "probs": [0.9, 0.05, 0.05]}],
            }
        ],
    }


class TestDatasetRejections:
    def load_error(self, tmp_path, payload, name="bad.json"):
        path = write_json(tmp_path, name, payload)
        with pytest.raises(ValidationError) as err:
            load_dataset(path)
        return str(err.value)

    def test_malformed_json(self, tmp_path):
        assert "malformed JSON" in self.load_error(tmp_path, "{ nope")

    def test_top_level_must_be_object(self, tmp_path):
        assert "expected a top-level object" in self.load_error(tmp_path, [1, 2])

    def test_wrong_version(self, tmp_path):
        doc = valid_doc()
        doc["version"] = 2
        assert "unsupported schema version 2 (expected 1)" in self.load_error(tmp_path, doc)

    def test_missing_version(self, tmp_path):
        doc = valid_doc()
        del doc["version"]
        assert "unsupported schema version None (expected 1)" in self.load_error(tmp_path, doc)

    def test_categories_must_be_strings(self, tmp_path):
        doc = valid_doc()
        doc["categories"] = "car"
        assert "categories must be a list of strings" in self.load_error(tmp_path, doc)

    def test_images_must_be_a_list(self, tmp_path):
        doc = valid_doc()
        doc["images"] = {}
        assert "images must be a list" in self.load_error(tmp_path, doc)

    def test_image_entry_must_be_object(self, tmp_path):
        doc = valid_doc()
        doc["images"] = ["img-0000"]
        assert "images[0]: expected an object" in self.load_error(tmp_path, doc)

    def test_missing_id_is_reported_by_index(self, tmp_path):
        doc = valid_doc()
        del doc["images"][0]["id"]
        assert "images[0]: missing required field 'id'" in self.load_error(tmp_path, doc)

    def test_missing_width_is_reported_by_image_id(self, tmp_path):
        doc = valid_doc()
        del doc["images"][0]["width"]
        assert "image 'img-0000': missing required field 'width'" in self.load_error(tmp_path, doc)

    def test_non_numeric_width(self, tmp_path):
        doc = valid_doc()
        doc["images"][0]["width"] = "wide"
        message = self.load_error(tmp_path, doc)
        assert "image 'img-0000'.width: expected a number, got 'wide'" in message

    def test_bad_probability_sum_names_image_and_detection(self, tmp_path):
        doc = valid_doc()
        doc["images"] = [
            {"id": "img-0000", "width": 64.0, "height": 64.0},
            {"id": "img-0001", "width": 64.0, "height": 64.0},
            {
                "id": "img-0002",
                "width": 64.0,
                "height": 64.0,
                "detections": [{"box": [4.0, 4.0, 20.0, 20.0], "probs": [0.5, 0.2, 0.1]}],
            },
        ]
        message = self.load_error(tmp_path, doc)
        assert (
            "image 'img-0002' detections[0]: probabilities sum to 0.8, "
            "expected 1 within 1e-09" in message
        )

    def test_degenerate_ground_truth_box(self, tmp_path):
        doc = valid_doc()
        doc["images"].append(
            {
                "id": "img-0001",
                "width": 64.0,
                "height": 64.0,
                "ground_truth": [{"box": [5.0, 5.0, 5.0, 9.0], "category": 0}],
            }
        )
        message = self.load_error(tmp_path, doc)
        assert "image 'img-0001' ground_truth[0]: degenerate box (5.0, 5.0, 5.0, 9.0)" in message

    def test_box_must_be_four_numbers(self, tmp_path):
        doc = valid_doc()
        doc["images"][0]["detections"][0]["box"] = [1.0, 2.0, 3.0]
        message = self.load_error(tmp_path, doc)
        assert "image 'img-0000' detections[0]: box must be a list of four numbers" in message

    def test_box_coordinates_must_be_numbers(self, tmp_path):
        doc = valid_doc()
        doc["images"][0]["detections"][0]["box"] = [1.0, 2.0, 3.0, "x"]
        assert "box coordinates must be numbers, got 'x'" in self.load_error(tmp_path, doc)

    def test_duplicate_image_ids(self, tmp_path):
        doc = valid_doc()
        doc["images"].append(dict(doc["images"][0]))
        assert "duplicate image id 'img-0000'" in self.load_error(tmp_path, doc)

    def test_probability_vector_width_checked_against_categories(self, tmp_path):
        doc = valid_doc()
        doc["categories"] = ["car"]
        message = self.load_error(tmp_path, doc)
        assert "image 'img-0000': probability vector has 3 entries, expected 2" in message


class TestWorldRejections:
    def test_dataset_file_is_not_a_world(self, tmp_path):
        path = write_json(tmp_path, "plain.json", valid_doc())
        with pytest.raises(ValidationError) as err:
            load_world(path)
        assert "no candidate annotations; not a world file" in str(err.value)

    def test_gt_index_must_be_integer_or_null(self, tmp_path):
        doc = valid_doc()
        doc["images"][0]["candidates"] = [
            {
                "box": [4.0, 4.0, 20.0, 20.0],
                "apparent_category": 0,
                "hardness": 0.5,
                "clutter_affinity": 0.1,
                "source_jitter": 0.0,
                "gt_index": True,
            }
        ]
        path = write_json(tmp_path, "bad.json", doc)
        with pytest.raises(ValidationError) as err:
            load_world(path)
        assert "candidates[0].gt_index: expected an integer or null" in str(err.value)

    def test_twin_candidate_must_match_ground_truth_box(self, tmp_path):
        doc = {
            "version": 1,
            "categories": ["car"],
            "images": [
                {
                    "id": "img-w0",
                    "width": 64.0,
                    "height": 64.0,
                    "ground_truth": [{"box": [8.0, 8.0, 24.0, 24.0], "category": 0}],
                    "candidates": [
                        {
                            "box": [9.0, 8.0, 24.0, 24.0],
                            "apparent_category": 0,
                            "hardness": 0.5,
                            "clutter_affinity": 0.1,
                            "source_jitter": 0.0,
                            "gt_index": 0,
                        }
                    ],
                }
            ],
        }
        path = write_json(tmp_path, "bad.json", doc)
        with pytest.raises(ValidationError) as err:
            load_world(path)
        assert "candidate 0 disagrees with its ground-truth box" in str(err.value)

    def test_every_ground_truth_needs_a_twin(self, tmp_path):
        doc = {
            "version": 1,
            "categories": ["car"],
            "images": [
                {
                    "id": "img-w0",
                    "width": 64.0,
                    "height": 64.0,
                    "ground_truth": [{"box": [8.0, 8.0, 24.0, 24.0], "category": 0}],
                    "candidates": [],
                }
            ],
        }
        path = write_json(tmp_path, "bad.json", doc)
        with pytest.raises(ValidationError) as err:
            load_world(path)
        assert "every ground truth needs exactly one candidate" in str(err.value)


class TestPseudoLabelRejections:
    def base_doc(self):
        return {
            "version": 1,
            "provenance": {"confidence_threshold": 0.5},
            "images": [
                {
                    "id": "img-a",
                    "width": 64.0,
                    "height": 64.0,
                    "pseudo_labels": [
                        {"box": [4.0, 4.0, 20.0, 20.0], "category": 0, "confidence": 0.8}
                    ],
                }
            ],
        }

    def test_confidence_at_threshold_is_rejected(self, tmp_path):
        doc = self.base_doc()
        doc["images"][0]["pseudo_labels"][0]["confidence"] = 0.5
        path = write_json(tmp_path, "bad.json", doc)
        with pytest.raises(ValidationError) as err:
            load_pseudo_labels(path)
        assert "image 'img-a' pseudo_labels[0]: confidence 0.5 not above threshold 0.5" in str(
            err.value
        )

    def test_missing_provenance(self, tmp_path):
        doc = self.base_doc()
        del doc["provenance"]
        path = write_json(tmp_path, "bad.json", doc)
        with pytest.raises(ValidationError) as err:
            load_pseudo_labels(path)
        assert "missing provenance.confidence_threshold" in str(err.value)

    def test_wrong_version(self, tmp_path):
        doc = self.base_doc()
        doc["version"] = 99
        path = write_json(tmp_path, "bad.json", doc)
        with pytest.raises(ValidationError) as err:
            load_pseudo_labels(path)
        assert "unsupported pseudo-label document" in str(err.value)


class TestMosaicRejections:
    def test_malformed_json(self, tmp_path):
        path = write_json(tmp_path, "bad.json", "[[[")
        with pytest.raises(ValidationError) as err:
            load_mosaic_batch(path)
        assert "malformed JSON" in str(err.value)

    def test_wrong_version(self, tmp_path):
        path = write_json(tmp_path, "bad.json", {"version": 3, "samples": []})
        with pytest.raises(ValidationError) as err:
            load_mosaic_batch(path)
        assert "unsupported mosaic batch document" in str(err.value)

    def test_missing_cut_point(self, tmp_path):
        path = write_json(tmp_path, "bad.json", {"version": 1, "samples": [{}]})
        with pytest.raises(ValidationError) as err:
            load_mosaic_batch(path)
        assert "samples[0].cut_point: expected [x, y]" in str(err.value)
