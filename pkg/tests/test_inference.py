import math

import numpy as np
import pytest

from embedstory.infer import (
    Neighbor,
    build_inference,
    embed_query,
    inference_from_json,
    inference_to_json,
    nearest_neighbors,
    place_query_2d,
)
from embedstory.net import forward
from embedstory.rng import SplitMix64
from embedstory.tsne import ProjectionFrame


def brute_force_neighbors(q, gallery, ids, k):
    """Exhaustive-sort oracle: full distance list, then (distance, id) sort."""
    scored = []
    for i, row in enumerate(gallery):
        d = math.sqrt(sum((a - b) ** 2 for a, b in zip(row, q)))
        scored.append((d, ids[i]))
    scored.sort()
    return [Neighbor(item_id, d) for d, item_id in scored[: min(k, len(ids))]]


class TestEmbedQuery:
    def test_matches_gallery_row(self, trained_run, synthetic_dataset):
        gallery, _ = forward(trained_run.final_net, synthetic_dataset.items)
        q = embed_query(trained_run.final_net, synthetic_dataset.items[3])
        assert np.array_equal(q, gallery[3])

    def test_batch_of_one_equals_row_extraction(self, trained_run, synthetic_dataset):
        items = synthetic_dataset.items[:4]
        batch, _ = forward(trained_run.final_net, items)
        solo = embed_query(trained_run.final_net, items[2])
        assert np.array_equal(solo, batch[2])


class TestNearestNeighbors:
    def test_exact_match_ranks_first(self):
        gallery = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]])
        out = nearest_neighbors(np.array([1.0, 1.0]), gallery, ["a", "b", "c"], 2)
        assert out[0] == Neighbor("b", 0.0)

    def test_k_larger_than_gallery_clamps(self):
        gallery = np.array([[0.0], [1.0]])
        out = nearest_neighbors(np.array([0.2]), gallery, ["a", "b"], 10)
        assert len(out) == 2

    def test_ties_break_by_id(self):
        gallery = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]])
        out = nearest_neighbors(np.array([0.0, 0.0]), gallery, ["zz", "aa", "mm"], 3)
        assert [n.id for n in out] == ["aa", "mm", "zz"]

    @pytest.mark.parametrize("seed", range(100))
    def test_matches_brute_force_oracle(self, seed):
        rng = SplitMix64(seed)
        n = 1 + rng.randrange(64)
        d = 1 + rng.randrange(8)
        gallery = rng.normals((n, d))
        ids = [f"item-{i:02d}" for i in range(n)]
        # a few duplicate rows to force distance ties
        if n >= 4:
            gallery[1] = gallery[0]
            gallery[3] = gallery[2]
        q = rng.normals(d)
        k = 1 + rng.randrange(n + 3)
        ours = nearest_neighbors(q, gallery, ids, k)
        oracle = brute_force_neighbors(q, gallery.tolist(), ids, k)
        assert [n.id for n in ours] == [n.id for n in oracle]
        for a, b in zip(ours, oracle):
            assert a.distance == pytest.approx(b.distance, abs=1e-12)

    def test_empty_gallery_rejected(self):
        with pytest.raises(ValueError, match="non-empty"):
            nearest_neighbors(np.zeros(2), np.zeros((0, 2)), [], 1)


class TestPlacement:
    def test_coincident_query_lands_on_item(self):
        snapshot = np.array([[0.0, 0.0], [5.0, 0.0], [0.0, 5.0], [5.0, 5.0]])
        coords = np.array([[-1.0, -1.0], [1.0, -1.0], [-1.0, 1.0], [1.0, 1.0]])
        frame = ProjectionFrame(0, coords, 0.0)
        x, y = place_query_2d(snapshot[2], snapshot, frame)
        assert (x, y) == pytest.approx((-1.0, 1.0), abs=1e-6)

    def test_two_equidistant_near_midpoint(self):
        # two nearest at equal distance, third much farther: the direct
        # formula gives weights (w, w, eps), so the point sits near the
        # midpoint of the first two
        snapshot = np.array([[1.0, 0.0], [-1.0, 0.0], [100.0, 0.0]])
        coords = np.array([[0.5, 0.5], [-0.5, 0.5], [0.9, -0.9]])
        frame = ProjectionFrame(0, coords, 0.0)
        q = np.array([0.0, 0.0])
        x, y = place_query_2d(q, snapshot, frame)
        d = [1.0, 1.0, 100.0]
        w = np.array([1.0 / (di + 1e-9) for di in d])
        w /= w.sum()
        expected = w @ coords
        assert (x, y) == pytest.approx(tuple(expected), abs=1e-12)
        assert (x, y) == pytest.approx((0.0, 0.5), abs=1e-2)

    def test_result_in_convex_hull_of_three_nearest(self):
        rng = SplitMix64(8)
        snapshot = rng.normals((10, 4))
        coords = rng.normals((10, 2))
        frame = ProjectionFrame(0, coords, 0.0)
        q = rng.normals(4)
        x, y = place_query_2d(q, snapshot, frame)
        d = np.linalg.norm(snapshot - q, axis=1)
        three = sorted(range(10), key=lambda i: (d[i], i))[:3]
        hull = coords[three]
        assert min(hull[:, 0]) - 1e-9 <= x <= max(hull[:, 0]) + 1e-9
        assert min(hull[:, 1]) - 1e-9 <= y <= max(hull[:, 1]) + 1e-9


class TestBuildInference:
    def test_gallery_copy_query(self, trained_run, projection_frames, synthetic_dataset):
        query = synthetic_dataset.items[0]
        result = build_inference(
            trained_run.final_net, synthetic_dataset, projection_frames, query, k=1
        )
        assert result.neighbors == [Neighbor(query.id, 0.0)]
        assert result.radius_2d == pytest.approx(0.0, abs=1e-9)
        assert result.query_coords_2d == pytest.approx(
            tuple(projection_frames[-1].coords[0]), abs=1e-6
        )

    def test_k_equals_gallery_size(self, trained_run, projection_frames, synthetic_dataset):
        query = synthetic_dataset.items[5]
        n = len(synthetic_dataset.items)
        result = build_inference(
            trained_run.final_net, synthetic_dataset, projection_frames, query, k=n
        )
        assert len(result.neighbors) == n
        row = synthetic_dataset.ids().index(result.neighbors[-1].id)
        kth = projection_frames[-1].coords[row]
        expected = math.dist(result.query_coords_2d, tuple(kth))
        assert result.radius_2d == pytest.approx(expected, abs=1e-12)

    def test_bars_sorted_ascending(self, inference_result):
        distances = [n.distance for n in inference_result.neighbors]
        assert distances == sorted(distances)

    def test_radius_uses_frame_coordinates(
        self, trained_run, projection_frames, synthetic_dataset, inference_result
    ):
        ids = synthetic_dataset.ids()
        row = ids.index(inference_result.neighbors[-1].id)
        kth = projection_frames[-1].coords[row]
        expected = math.dist(inference_result.query_coords_2d, tuple(kth))
        assert inference_result.radius_2d == pytest.approx(expected, abs=1e-12)

    def test_json_round_trip(self, inference_result):
        doc = inference_to_json(inference_result, "fp")
        assert doc["format_version"] == 1
        assert doc["dataset_fingerprint"] == "fp"
        again = inference_from_json(doc)
        assert again.query_id == inference_result.query_id
        assert again.k == inference_result.k
        assert again.neighbors == inference_result.neighbors
        assert again.radius_2d == pytest.approx(inference_result.radius_2d)
