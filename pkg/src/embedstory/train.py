"""Triplet sampling and the SGD training loop with per-epoch snapshots.

One batch of triplets per epoch, one SGD step per batch, so the epoch
index lines up with one frame of the training animation. Snapshot 0 is
the untrained network; snapshot e (e >= 1) holds the embeddings after
epoch e's step together with the mean batch loss measured at the
parameters the step was computed from. Snapshot 0's loss comes from a
probe batch drawn the same way but never applied.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import LabeledDataset, dataset_fingerprint
from .losses import LabeledPair, Margin, Triplet, contrastive_loss, triplet_loss
from .net import (
    EmbeddingNet,
    apply_gradients,
    backward,
    forward,
    from_checkpoint,
    images_to_batch,
    to_checkpoint,
)
from .rng import SplitMix64

LOSS_KINDS = ("triplet", "contrastive")
SAMPLING_STRATEGIES = ("random", "semi_hard")


@dataclass(frozen=True)
class HyperParams:
    epochs: int = 30
    batch_triplets: int = 64
    learning_rate: float = 0.05
    margin: float = 1.0
    loss_kind: str = "triplet"
    sampling: str = "random"
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.batch_triplets < 1:
            raise ValueError("batch_triplets must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        Margin(self.margin)
        if self.loss_kind not in LOSS_KINDS:
            raise ValueError(f"loss_kind must be one of {LOSS_KINDS}")
        if self.sampling not in SAMPLING_STRATEGIES:
            raise ValueError(f"sampling must be one of {SAMPLING_STRATEGIES}")


@dataclass
class EpochSnapshot:
    epoch: int
    embeddings: np.ndarray  # N x D over the whole dataset
    mean_loss: float


@dataclass
class TrainingRun:
    dataset_fingerprint: str
    hyperparams: HyperParams
    snapshots: list[EpochSnapshot]
    final_net: EmbeddingNet

    @property
    def loss_curve(self) -> list[float]:
        return [s.mean_loss for s in self.snapshots]


def _class_index(labels: list[str]) -> dict[str, list[int]]:
    by_label: dict[str, list[int]] = {}
    for i, label in enumerate(labels):
        by_label.setdefault(label, []).append(i)
    return by_label


def sample_triplets(
    labels: list[str],
    count: int,
    strategy: str,
    rng: SplitMix64,
    *,
    embeddings: np.ndarray | None = None,
    margin: float | None = None,
) -> list[tuple[int, int, int]]:
    """Draw `count` (anchor, positive, negative) index triplets.

    `random` draws the anchor uniformly, then a same-label positive, then
    a different-label negative. `semi_hard` keeps the anchor/positive
    draws and restricts the negative to the semi-hard window
    d_ap^2 < d_an^2 < d_ap^2 + margin; when the window is empty it draws
    from all negatives, consuming the stream exactly like `random`, so
    the two strategies coincide on a batch with no usable window.
    """
    if strategy not in SAMPLING_STRATEGIES:
        raise ValueError(f"sampling must be one of {SAMPLING_STRATEGIES}")
    by_label = _class_index(labels)
    if len(by_label) < 2:
        raise ValueError("triplet sampling needs >= 2 classes")
    for label, members in by_label.items():
        if len(members) < 2:
            raise ValueError(f"class {label!r} needs >= 2 members")
    if strategy == "semi_hard":
        if embeddings is None or margin is None:
            raise ValueError("semi_hard sampling needs embeddings and margin")
        embeddings = np.asarray(embeddings, dtype=np.float64)

    n = len(labels)
    sames = {
        label: members for label, members in by_label.items()
    }
    others = {
        label: [i for i in range(n) if labels[i] != label] for label in by_label
    }
    triplets = []
    for _ in range(count):
        a = rng.randrange(n)
        positives = [i for i in sames[labels[a]] if i != a]
        p = positives[rng.randrange(len(positives))]
        negatives = others[labels[a]]
        if strategy == "semi_hard":
            d_ap2 = float(np.sum((embeddings[a] - embeddings[p]) ** 2))
            window = [
                j
                for j in negatives
                if d_ap2 < float(np.sum((embeddings[a] - embeddings[j]) ** 2)) < d_ap2 + margin
            ]
            pool = window if window else negatives
        else:
            pool = negatives
        nidx = pool[rng.randrange(len(pool))]
        triplets.append((a, p, nidx))
    return triplets


def _batch_loss_and_upstream(
    embeddings: np.ndarray,
    triplets: list[tuple[int, int, int]],
    hp: HyperParams,
) -> tuple[float, np.ndarray]:
    """Mean batch loss and d(mean loss)/d(embeddings) as an N x D matrix.

    With contrastive loss each triplet contributes a similar (a, p) pair
    and a dissimilar (a, n) pair, and the mean runs over pairs.
    """
    upstream = np.zeros_like(embeddings)
    total = 0.0
    margin = hp.margin
    if hp.loss_kind == "triplet":
        for a, p, nidx in triplets:
            res = triplet_loss(Triplet(embeddings[a], embeddings[p], embeddings[nidx]), margin)
            total += res.loss
            upstream[a] += res.grad_anchor
            upstream[p] += res.grad_positive
            upstream[nidx] += res.grad_negative
        units = len(triplets)
    else:
        for a, p, nidx in triplets:
            pos = contrastive_loss(LabeledPair(embeddings[a], embeddings[p], True), margin)
            neg = contrastive_loss(LabeledPair(embeddings[a], embeddings[nidx], False), margin)
            total += pos.loss + neg.loss
            upstream[a] += pos.grad_a + neg.grad_a
            upstream[p] += pos.grad_b
            upstream[nidx] += neg.grad_b
        units = 2 * len(triplets)
    return total / units, upstream / units


def train(net: EmbeddingNet, data: LabeledDataset, hp: HyperParams) -> TrainingRun:
    """Run the SGD loop and record one snapshot per epoch plus the start state."""
    fingerprint = dataset_fingerprint(data)
    labels = data.labels()
    batch = images_to_batch(data.items, net.input_shape)
    rng = SplitMix64(hp.seed)

    current = net
    emb, cache = forward(current, batch)
    probe = sample_triplets(
        labels, hp.batch_triplets, hp.sampling, rng, embeddings=emb, margin=hp.margin
    )
    loss0, _ = _batch_loss_and_upstream(emb, probe, hp)
    snapshots = [EpochSnapshot(0, emb, loss0)]

    for epoch in range(1, hp.epochs + 1):
        triplets = sample_triplets(
            labels, hp.batch_triplets, hp.sampling, rng, embeddings=emb, margin=hp.margin
        )
        mean_loss, upstream = _batch_loss_and_upstream(emb, triplets, hp)
        grads = backward(current, cache, upstream)
        current = apply_gradients(current, grads, hp.learning_rate)
        emb, cache = forward(current, batch)
        snapshots.append(EpochSnapshot(epoch, emb, mean_loss))

    return TrainingRun(fingerprint, hp, snapshots, current)


def first_sampled_triplet(
    hp: HyperParams, labels: list[str], initial_embeddings: np.ndarray
) -> tuple[int, int, int]:
    """Replay the sampler stream and return the run's first drawn triplet."""
    rng = SplitMix64(hp.seed)
    triplets = sample_triplets(
        labels, hp.batch_triplets, hp.sampling, rng,
        embeddings=initial_embeddings, margin=hp.margin,
    )
    return triplets[0]


def evaluate_retrieval(net: EmbeddingNet, data: LabeledDataset) -> float:
    """Leave-one-out top-1 accuracy in embedding space.

    Each item's nearest other item (Euclidean, ties to the lowest index)
    votes with its label.
    """
    if len(data.items) < 2:
        raise ValueError("retrieval evaluation needs >= 2 items")
    emb, _ = forward(net, data.items)
    labels = data.labels()
    sq = np.sum(emb**2, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (emb @ emb.T)
    np.fill_diagonal(d2, np.inf)
    nearest = np.argmin(d2, axis=1)  # first minimum: lowest-index tie-break
    hits = sum(1 for i, j in enumerate(nearest) if labels[i] == labels[j])
    return hits / len(labels)


def run_to_json(run: TrainingRun) -> dict:
    hp = run.hyperparams
    return {
        "format_version": 1,
        "hyperparams": {
            "epochs": hp.epochs,
            "batch_triplets": hp.batch_triplets,
            "learning_rate": hp.learning_rate,
            "margin": hp.margin,
            "loss_kind": hp.loss_kind,
            "sampling": hp.sampling,
            "seed": hp.seed,
        },
        "dataset_fingerprint": run.dataset_fingerprint,
        "loss_curve": [float(s.mean_loss) for s in run.snapshots],
        "snapshots": [
            {"epoch": s.epoch, "embeddings": s.embeddings.tolist()}
            for s in run.snapshots
        ],
        "final_net": to_checkpoint(run.final_net),
    }


def run_from_json(doc: dict) -> TrainingRun:
    if doc.get("format_version") != 1:
        raise ValueError(f"unsupported run format_version {doc.get('format_version')!r}")
    hp = HyperParams(**doc["hyperparams"])
    curve = doc["loss_curve"]
    snapshots = [
        EpochSnapshot(s["epoch"], np.asarray(s["embeddings"], dtype=np.float64), curve[i])
        for i, s in enumerate(doc["snapshots"])
    ]
    return TrainingRun(
        doc["dataset_fingerprint"], hp, snapshots, from_checkpoint(doc["final_net"])
    )
