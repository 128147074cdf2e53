import copy
import json
import math

import pytest

from embedstory.bundle import (
    DEFAULT_PALETTE,
    SLICE_IDS,
    build_bundle,
    default_narratives,
    default_quiz,
    parity_fixtures,
    serialize_bundle,
    validate_bundle,
)
from embedstory.losses import Triplet, triplet_loss


def slice_payload(doc, slice_id):
    for entry in doc["slices"]:
        if entry["id"] == slice_id:
            return entry["payload"]
    raise KeyError(slice_id)


class TestBuildBundle:
    def test_constructive_validity(self, story_bundle):
        assert validate_bundle(story_bundle) == []

    def test_training_frames_match_epochs(self, story_bundle, trained_run):
        payload = slice_payload(story_bundle, "training")
        assert len(payload["frames"]) == trained_run.hyperparams.epochs + 1
        assert len(payload["loss_curve"]) == len(payload["frames"])

    def test_slice_order(self, story_bundle):
        assert [s["id"] for s in story_bundle["slices"]] == list(SLICE_IDS)

    def test_initial_loss_recomputation(self, story_bundle):
        payload = slice_payload(story_bundle, "loss_function")
        b = payload["bubbles"]
        expected = triplet_loss(
            Triplet(
                [b["anchor"]["x"], b["anchor"]["y"]],
                [b["positive"]["x"], b["positive"]["y"]],
                [b["negative"]["x"], b["negative"]["y"]],
            ),
            payload["margin_default"],
        ).loss
        assert payload["initial_loss"] == pytest.approx(expected, abs=1e-9)

    def test_euclid_slice_reuses_triplet(self, story_bundle):
        euclid = slice_payload(story_bundle, "euclidean_distance")["bubbles"]
        loss = slice_payload(story_bundle, "loss_function")["bubbles"]
        assert euclid == loss

    def test_radius_recomputation(self, story_bundle):
        payload = slice_payload(story_bundle, "inferencing")
        frames = slice_payload(story_bundle, "training")["frames"]
        coords = {b["id"]: (b["x"], b["y"]) for b in frames[-1]["bubbles"]}
        kth = coords[payload["neighbors"][-1]["id"]]
        expected = math.dist(payload["query_coords"], kth)
        assert payload["radius"] == pytest.approx(expected, abs=1e-9)

    def test_every_bubble_color_in_palette(self, story_bundle):
        palette = set(story_bundle["palette"])
        assert set(DEFAULT_PALETTE) <= palette
        frames = slice_payload(story_bundle, "training")["frames"]
        for frame in frames:
            for bub in frame["bubbles"]:
                assert bub["color"] in palette

    def test_assets_resolve_and_include_query(self, story_bundle):
        payload = slice_payload(story_bundle, "inferencing")
        assert payload["query_asset_id"] in story_bundle["assets"]
        concept = slice_payload(story_bundle, "snn_concept")
        for ref in concept["figure_asset_ids"]:
            assert ref in story_bundle["assets"]

    def test_serialization_round_trip_and_determinism(
        self, trained_run, projection_frames, inference_result, synthetic_dataset, story_bundle
    ):
        blob = serialize_bundle(story_bundle)
        parsed = json.loads(blob)
        assert parsed == story_bundle
        assert validate_bundle(blob) == []
        rebuilt = build_bundle(
            trained_run, projection_frames, inference_result, synthetic_dataset,
            quiz=default_quiz(),
        )
        assert serialize_bundle(rebuilt) == blob

    def test_fingerprint_mismatch_rejected(
        self, trained_run, projection_frames, inference_result, synthetic_dataset
    ):
        import dataclasses

        stale = dataclasses.replace(trained_run.hyperparams)
        bad_run = type(trained_run)(
            "0" * 16, stale, trained_run.snapshots, trained_run.final_net
        )
        with pytest.raises(ValueError, match="fingerprint"):
            build_bundle(bad_run, projection_frames, inference_result, synthetic_dataset)


class TestValidator:
    def test_reordered_slices_error_names_order(self, story_bundle):
        doc = copy.deepcopy(story_bundle)
        doc["slices"][0], doc["slices"][1] = doc["slices"][1], doc["slices"][0]
        errors = validate_bundle(doc)
        assert len(errors) == 1
        assert errors[0]["path"] == "slices"
        assert "snn_concept" in errors[0]["message"]

    def test_unknown_asset_reference_reports_id(self, story_bundle):
        doc = copy.deepcopy(story_bundle)
        slice_payload(doc, "snn_concept")["figure_asset_ids"][0] = "ghost-asset"
        errors = validate_bundle(doc)
        assert any("ghost-asset" in e["message"] for e in errors)

    def test_perturbed_initial_loss_detected(self, story_bundle):
        doc = copy.deepcopy(story_bundle)
        slice_payload(doc, "loss_function")["initial_loss"] += 0.1
        errors = validate_bundle(doc)
        assert any(e["path"].endswith("initial_loss") for e in errors)

    def test_perturbed_radius_detected(self, story_bundle):
        doc = copy.deepcopy(story_bundle)
        slice_payload(doc, "inferencing")["radius"] += 0.01
        errors = validate_bundle(doc)
        assert any(e["path"].endswith("radius") for e in errors)

    def test_unsorted_neighbors_detected(self, story_bundle):
        doc = copy.deepcopy(story_bundle)
        neighbors = slice_payload(doc, "inferencing")["neighbors"]
        neighbors[0], neighbors[-1] = neighbors[-1], neighbors[0]
        errors = validate_bundle(doc)
        assert any("non-decreasing" in e["message"] for e in errors)

    def test_multiple_errors_all_reported(self, story_bundle):
        doc = copy.deepcopy(story_bundle)
        doc["scroll_mode"] = "continuous"
        slice_payload(doc, "loss_function")["initial_loss"] += 1.0
        slice_payload(doc, "snn_concept")["narrative"] = ""
        errors = validate_bundle(doc)
        assert len(errors) >= 3

    def test_non_json_input_raises(self):
        with pytest.raises(ValueError, match="not JSON"):
            validate_bundle("{nope")

    def test_bad_quiz_shape_detected(self, story_bundle):
        doc = copy.deepcopy(story_bundle)
        doc["quiz"] = doc["quiz"][:5]
        errors = validate_bundle(doc)
        assert any(e["path"] == "quiz" for e in errors)

    def test_bad_format_version(self, story_bundle):
        doc = copy.deepcopy(story_bundle)
        doc["format_version"] = 9
        errors = validate_bundle(doc)
        assert any(e["path"] == "format_version" for e in errors)


class TestQuiz:
    def test_seven_questions_four_choices(self):
        quiz = default_quiz()
        assert len(quiz) == 7
        for q in quiz:
            assert len(q["choices"]) == 4
            assert 0 <= q["answer_index"] < 4

    def test_first_question_origin(self):
        quiz = default_quiz()
        assert "origin of the word Siamese" in quiz[0]["prompt"]
        assert quiz[0]["choices"][quiz[0]["answer_index"]] == "Siamese Twin"

    def test_third_question_answer(self):
        quiz = default_quiz()
        assert quiz[2]["choices"][quiz[2]["answer_index"]] == "CNN or ConvNet"

    def test_loss_question_answer(self):
        quiz = default_quiz()
        assert quiz[1]["choices"][quiz[1]["answer_index"]] == "Contrastive Loss"


class TestNarratives:
    def test_packaged_narratives_load(self):
        pack = default_narratives()
        assert pack["snn_concept"]
        assert "sqrt" in pack["formula_text"]


class TestParityFixtures:
    def test_twenty_cases_with_recomputable_losses(self):
        doc = parity_fixtures()
        assert doc["format_version"] == 1
        assert len(doc["cases"]) == 20
        active = inactive = 0
        for case in doc["cases"]:
            expected = triplet_loss(
                Triplet(case["anchor"], case["positive"], case["negative"]),
                case["margin"],
            ).loss
            assert case["loss"] == pytest.approx(expected, abs=1e-12)
            if case["loss"] > 0:
                active += 1
            else:
                inactive += 1
        assert active and inactive  # both hinge branches exercised

    def test_deterministic(self):
        assert parity_fixtures() == parity_fixtures()
