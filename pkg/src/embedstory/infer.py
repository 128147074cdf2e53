"""Query embedding, exact k-nearest-neighbor ranking, and 2D placement.

The query never re-triggers a projection: it is dropped into the existing
final frame at the inverse-distance-weighted average of its three nearest
gallery items, so the gallery bubbles stay put when the test bubble
appears. The radius around the test bubble is measured in frame units to
the k-th neighbor's 2D position.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Image, LabeledDataset
from .net import EmbeddingNet, forward
from .tsne import ProjectionFrame

PLACEMENT_NEIGHBORS = 3
PLACEMENT_EPS = 1e-9


@dataclass(frozen=True)
class Neighbor:
    id: str
    distance: float


@dataclass
class InferenceResult:
    query_id: str
    query_embedding: np.ndarray
    query_coords_2d: tuple[float, float]
    k: int
    neighbors: list[Neighbor]
    radius_2d: float


def embed_query(net: EmbeddingNet, img: Image) -> np.ndarray:
    emb, _ = forward(net, [img])
    return emb[0]


def nearest_neighbors(
    q: np.ndarray, gallery: np.ndarray, ids: list[str], k: int
) -> list[Neighbor]:
    """The min(k, N) gallery items closest to q, ties broken by id ascending."""
    if k < 1:
        raise ValueError("k must be >= 1")
    gallery = np.asarray(gallery, dtype=np.float64)
    if gallery.ndim != 2 or gallery.shape[0] == 0:
        raise ValueError("gallery must be a non-empty N x D matrix")
    if len(ids) != gallery.shape[0]:
        raise ValueError("ids must align with gallery rows")
    q = np.asarray(q, dtype=np.float64)
    dists = np.sqrt(np.sum((gallery - q) ** 2, axis=1))
    ranked = sorted(range(len(ids)), key=lambda i: (dists[i], ids[i]))
    return [Neighbor(ids[i], float(dists[i])) for i in ranked[: min(k, len(ids))]]


def place_query_2d(
    q: np.ndarray, snapshot: np.ndarray, frame: ProjectionFrame
) -> tuple[float, float]:
    """Drop q into the frame between its nearest gallery items.

    Inverse-distance weights over the three nearest embedding-space
    neighbors; a coincident neighbor dominates through the epsilon term,
    so an exact copy of a gallery item lands on that item's bubble.
    """
    snapshot = np.asarray(snapshot, dtype=np.float64)
    if snapshot.shape[0] != frame.coords.shape[0]:
        raise ValueError("snapshot rows must align with frame rows")
    q = np.asarray(q, dtype=np.float64)
    dists = np.sqrt(np.sum((snapshot - q) ** 2, axis=1))
    order = sorted(range(len(dists)), key=lambda i: (dists[i], i))
    chosen = order[: min(PLACEMENT_NEIGHBORS, len(order))]
    weights = np.array([1.0 / (dists[i] + PLACEMENT_EPS) for i in chosen])
    weights /= weights.sum()
    point = weights @ frame.coords[chosen]
    return float(point[0]), float(point[1])


def build_inference(
    net: EmbeddingNet,
    data: LabeledDataset,
    frames: list[ProjectionFrame],
    query: Image,
    k: int = 5,
) -> InferenceResult:
    """Embed the query, rank the gallery, and place the test bubble."""
    if not frames:
        raise ValueError("need at least one projection frame")
    final = frames[-1]
    gallery, _ = forward(net, data.items)
    ids = data.ids()
    q = embed_query(net, query)
    neighbors = nearest_neighbors(q, gallery, ids, k)
    coords = place_query_2d(q, gallery, final)
    row_of = {item_id: i for i, item_id in enumerate(ids)}
    kth = final.coords[row_of[neighbors[-1].id]]
    radius = float(np.sqrt((kth[0] - coords[0]) ** 2 + (kth[1] - coords[1]) ** 2))
    return InferenceResult(query.id, q, coords, k, neighbors, radius)


def inference_to_json(result: InferenceResult, dataset_fingerprint: str) -> dict:
    return {
        "format_version": 1,
        "dataset_fingerprint": dataset_fingerprint,
        "query_id": result.query_id,
        "k": result.k,
        "query_coords_2d": [float(result.query_coords_2d[0]), float(result.query_coords_2d[1])],
        "radius_2d": float(result.radius_2d),
        "neighbors": [{"id": n.id, "distance": float(n.distance)} for n in result.neighbors],
    }


def inference_from_json(doc: dict) -> InferenceResult:
    if doc.get("format_version") != 1:
        raise ValueError(f"unsupported inference format_version {doc.get('format_version')!r}")
    return InferenceResult(
        query_id=doc["query_id"],
        query_embedding=np.zeros(0),
        query_coords_2d=(doc["query_coords_2d"][0], doc["query_coords_2d"][1]),
        k=doc["k"],
        neighbors=[Neighbor(n["id"], n["distance"]) for n in doc["neighbors"]],
        radius_2d=doc["radius_2d"],
    )
