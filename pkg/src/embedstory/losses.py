"""Euclidean distance and the two metric-learning losses with exact gradients.

Triplet loss is the squared-distance hinge
    max(0, ||a-p||^2 - ||a-n||^2 + m)
and contrastive loss is
    similar:    d^2
    dissimilar: max(0, m - d)^2
with d the Euclidean distance. At a hinge kink the subgradient is taken
as 0 (the inactive branch), which makes gradients deterministic and dead
exactly when the constraint is already satisfied.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .rng import SplitMix64


@dataclass(frozen=True)
class Margin:
    value: float

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("margin must be >= 0")


@dataclass(frozen=True)
class Triplet:
    anchor: np.ndarray
    positive: np.ndarray
    negative: np.ndarray

    def __post_init__(self):
        a, p, n = (np.asarray(v, dtype=np.float64) for v in
                   (self.anchor, self.positive, self.negative))
        if not (a.shape == p.shape == n.shape) or a.ndim != 1:
            raise ValueError("triplet members must be vectors of one dimension")
        object.__setattr__(self, "anchor", a)
        object.__setattr__(self, "positive", p)
        object.__setattr__(self, "negative", n)


@dataclass(frozen=True)
class LabeledPair:
    a: np.ndarray
    b: np.ndarray
    similar: bool

    def __post_init__(self):
        a = np.asarray(self.a, dtype=np.float64)
        b = np.asarray(self.b, dtype=np.float64)
        if a.shape != b.shape or a.ndim != 1:
            raise ValueError("pair members must be vectors of one dimension")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)


class ContrastiveResult(NamedTuple):
    loss: float
    grad_a: np.ndarray
    grad_b: np.ndarray


class TripletResult(NamedTuple):
    loss: float
    grad_anchor: np.ndarray
    grad_positive: np.ndarray
    grad_negative: np.ndarray


class GradCheckReport(NamedTuple):
    max_rel_error: float
    checked: int
    skipped: int


def _margin_value(m) -> float:
    return m.value if isinstance(m, Margin) else float(Margin(float(m)).value)


def euclidean_distance(u, v) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    return float(np.sqrt(np.sum((u - v) ** 2)))


def contrastive_loss(pair: LabeledPair, m) -> ContrastiveResult:
    """Loss and gradients wrt both embeddings.

    For a coincident dissimilar pair the distance direction is undefined,
    so the gradient is 0 there while the loss is still m^2.
    """
    margin = _margin_value(m)
    diff = pair.a - pair.b
    d = float(np.sqrt(np.sum(diff**2)))
    if pair.similar:
        loss = d * d
        grad_a = 2.0 * diff
        return ContrastiveResult(loss, grad_a, -grad_a)
    slack = margin - d
    if slack <= 0.0:
        zero = np.zeros_like(diff)
        return ContrastiveResult(0.0, zero, zero.copy())
    loss = slack * slack
    if d == 0.0:
        zero = np.zeros_like(diff)
        return ContrastiveResult(loss, zero, zero.copy())
    grad_a = -2.0 * slack * diff / d
    return ContrastiveResult(loss, grad_a, -grad_a)


def triplet_loss(t: Triplet, m) -> TripletResult:
    margin = _margin_value(m)
    ap = t.anchor - t.positive
    an = t.anchor - t.negative
    slack = float(np.sum(ap**2) - np.sum(an**2)) + margin
    if slack <= 0.0:
        zero = np.zeros_like(ap)
        return TripletResult(0.0, zero, zero.copy(), zero.copy())
    return TripletResult(slack, 2.0 * (ap - an), -2.0 * ap, 2.0 * an)


def _triplet_scalar(a, p, n, margin) -> float:
    return triplet_loss(Triplet(a, p, n), margin).loss


def _contrastive_scalar(a, b, similar, margin) -> float:
    return contrastive_loss(LabeledPair(a, b, similar), margin).loss


def loss_gradient_check(
    loss_kind: str,
    dim: int,
    seed: int,
    *,
    trials: int = 10,
    h: float = 1e-5,
    kink_margin: float = 0.05,
) -> GradCheckReport:
    """Compare analytic loss gradients to central finite differences.

    Random inputs whose hinge slack lies within `kink_margin` of the kink
    (or, for a dissimilar contrastive pair, whose distance is near 0) are
    skipped and counted, since the loss is not differentiable there.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if loss_kind not in ("triplet", "contrastive"):
        raise ValueError(f"unknown loss kind {loss_kind!r}")
    rng = SplitMix64(seed)
    max_rel = 0.0
    checked = 0
    skipped = 0
    for trial in range(trials):
        margin = 0.25 + rng.uniform() * 2.0
        if loss_kind == "triplet":
            a, p, n = (rng.normals(dim) for _ in range(3))
            res = triplet_loss(Triplet(a, p, n), margin)
            slack = float(np.sum((a - p) ** 2) - np.sum((a - n) ** 2)) + margin
            if abs(slack) < kink_margin:
                skipped += 1
                continue
            vectors = [a, p, n]
            grads = [res.grad_anchor, res.grad_positive, res.grad_negative]
            scalar = lambda vs: _triplet_scalar(vs[0], vs[1], vs[2], margin)
        else:
            a, b = rng.normals(dim), rng.normals(dim)
            similar = trial % 2 == 0
            d = euclidean_distance(a, b)
            if not similar and (abs(margin - d) < kink_margin or d < kink_margin):
                skipped += 1
                continue
            res = contrastive_loss(LabeledPair(a, b, similar), margin)
            vectors = [a, b]
            grads = [res.grad_a, res.grad_b]
            scalar = lambda vs: _contrastive_scalar(vs[0], vs[1], similar, margin)

        for vi, (vec, grad) in enumerate(zip(vectors, grads)):
            for j in range(dim):
                plus = [v.copy() for v in vectors]
                minus = [v.copy() for v in vectors]
                plus[vi][j] += h
                minus[vi][j] -= h
                numeric = (scalar(plus) - scalar(minus)) / (2.0 * h)
                denom = max(abs(numeric), abs(grad[j]), 1e-8)
                max_rel = max(max_rel, abs(numeric - grad[j]) / denom)
        checked += 1
    return GradCheckReport(max_rel, checked, skipped)
