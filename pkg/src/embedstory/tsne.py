"""t-SNE from scratch: perplexity-calibrated affinities, KL descent, warm starts.

High-dimensional affinities use per-row Gaussian kernels whose precision
is found by binary search so every row's Shannon entropy (base 2) matches
log2(perplexity). The 2D layout minimizes KL(P || Q) against a Student-t
kernel with one degree of freedom via momentum gradient descent, with
early exaggeration on fresh runs.

A sequence of per-epoch snapshots is projected with warm starts: frame e
starts from frame e-1's pre-normalization coordinates and runs a reduced
budget with no exaggeration, which keeps bubble motion smooth across the
training animation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import SplitMix64

Q_FLOOR = 1e-12  # Student-t kernel floor; keeps log(Q) finite
_LN2 = float(np.log(2.0))


@dataclass(frozen=True)
class TsneConfig:
    perplexity: float = 15.0
    iterations: int = 500
    learning_rate: float = 100.0
    early_exaggeration: float = 4.0
    exaggeration_iters: int | None = None  # default: min(100, iterations)
    momentum: float = 0.8  # used after iteration 250; min(0.5, momentum) before
    seed: int = 0

    def __post_init__(self):
        if self.perplexity <= 1.0:
            raise ValueError("perplexity must be > 1")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.early_exaggeration < 1.0:
            raise ValueError("early_exaggeration must be >= 1")
        if self.exaggeration_iters is None:
            object.__setattr__(self, "exaggeration_iters", min(100, self.iterations))
        if not 0 <= self.exaggeration_iters <= self.iterations:
            raise ValueError("exaggeration_iters must lie in [0, iterations]")
        if not 0.0 <= self.momentum < 1.0:
            raise ValueError("momentum must lie in [0, 1)")


@dataclass
class AffinityMatrix:
    """Symmetric joint affinities: non-negative, zero diagonal, total mass 1."""

    P: np.ndarray

    def __post_init__(self):
        P = np.asarray(self.P, dtype=np.float64)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise ValueError("affinity matrix must be square")
        if np.any(np.diag(P) != 0.0):
            raise ValueError("affinity diagonal must be zero")
        if np.any(P < 0.0):
            raise ValueError("affinities must be non-negative")
        if not np.allclose(P, P.T, atol=1e-12):
            raise ValueError("affinity matrix must be symmetric")
        if abs(P.sum() - 1.0) > 1e-9:
            raise ValueError(f"affinities must sum to 1, got {P.sum()!r}")
        self.P = P


@dataclass
class ProjectionFrame:
    epoch: int
    coords: np.ndarray  # N x 2, normalized into [-1, 1]^2 preserving aspect
    kl: float


def _squared_distances(X: np.ndarray) -> np.ndarray:
    sq = np.sum(X**2, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
    np.maximum(d2, 0.0, out=d2)
    np.fill_diagonal(d2, 0.0)
    return d2


def _row_entropy_bits(d_row: np.ndarray, beta: float) -> tuple[float, np.ndarray]:
    """Entropy (bits) and probabilities of the conditional Gaussian row.

    The row is shifted by its minimum before exponentiation; the shift
    cancels in the normalized probabilities and keeps exp() in range.
    """
    shifted = d_row - d_row.min()
    e = np.exp(-beta * shifted)
    s = e.sum()
    p = e / s
    h_nats = np.log(s) + beta * float(np.dot(shifted, p))
    return h_nats / _LN2, p


def pairwise_affinities(
    X: np.ndarray, perplexity: float, *, tol_bits: float = 1e-5, max_iter: int = 50
) -> tuple[AffinityMatrix, np.ndarray]:
    """Perplexity-calibrated symmetric affinities plus the per-row precisions.

    Each row's precision beta_i is binary-searched until the conditional
    distribution's entropy is within `tol_bits` of log2(perplexity),
    capped at `max_iter` bisection steps. Rows whose distances are all
    zero are rejected: the caller must deduplicate or jitter.
    """
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if n < 3:
        raise ValueError("need at least 3 points")
    if not perplexity < n:
        raise ValueError(f"perplexity {perplexity} must be < N = {n}")
    target = float(np.log2(perplexity))

    d2 = _squared_distances(X)
    cond = np.zeros((n, n))
    betas = np.empty(n)
    for i in range(n):
        row = np.delete(d2[i], i)
        if row.max() == 0.0:
            raise ValueError(
                f"row {i} has zero distance to every other point; "
                "deduplicate or jitter the input"
            )
        beta, lo, hi = 1.0, 0.0, np.inf
        h_bits, p = _row_entropy_bits(row, beta)
        for _ in range(max_iter):
            if abs(h_bits - target) <= tol_bits:
                break
            if h_bits > target:  # too flat: raise precision
                lo = beta
                beta = beta * 2.0 if hi == np.inf else (lo + hi) / 2.0
            else:
                hi = beta
                beta = beta / 2.0 if lo == 0.0 else (lo + hi) / 2.0
            h_bits, p = _row_entropy_bits(row, beta)
        betas[i] = beta
        cond[i, :i] = p[:i]
        cond[i, i + 1 :] = p[i:]

    P = (cond + cond.T) / (2.0 * n)
    return AffinityMatrix(P), betas


def _student_t_q(Y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Normalized Student-t affinities Q (floored) and the raw kernel weights."""
    w = 1.0 / (1.0 + _squared_distances(Y))
    np.fill_diagonal(w, 0.0)
    q = np.maximum(w / w.sum(), Q_FLOOR)
    return q, w


def kl_divergence(P, Y: np.ndarray) -> float:
    """KL(P || Q) of a layout; terms with P_ij = 0 contribute nothing."""
    P = P.P if isinstance(P, AffinityMatrix) else np.asarray(P, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if Y.shape[0] != P.shape[0]:
        raise ValueError("layout rows must match affinity rows")
    q, _ = _student_t_q(Y)
    mask = P > 0.0
    return float(np.sum(P[mask] * np.log(P[mask] / q[mask])))


def _descend(
    P: np.ndarray,
    Y0: np.ndarray,
    config: TsneConfig,
    iterations: int,
    exaggeration: bool,
    trace: list | None,
) -> np.ndarray:
    """Momentum descent with per-coordinate adaptive gains.

    Gains grow where the gradient opposes the velocity and decay where it
    agrees, which damps the oscillations plain momentum shows at this
    learning rate and keeps the KL trace descending.
    """
    Y = Y0.copy()
    vel = np.zeros_like(Y)
    gains = np.ones_like(Y)
    if trace is not None:
        trace.append(kl_divergence(P, Y))
    for it in range(iterations):
        if exaggeration and it < config.exaggeration_iters:
            p_eff = P * config.early_exaggeration
        else:
            p_eff = P
        q, w = _student_t_q(Y)
        pq = (p_eff - q) * w
        grad = 4.0 * (pq.sum(axis=1)[:, None] * Y - pq @ Y)
        opposed = (grad > 0.0) != (vel > 0.0)
        gains = np.where(opposed, gains + 0.2, gains * 0.8)
        np.maximum(gains, 0.01, out=gains)
        mom = config.momentum if it >= 250 else min(0.5, config.momentum)
        vel = mom * vel - config.learning_rate * (gains * grad)
        Y = Y + vel
        Y = Y - Y.mean(axis=0)
        if trace is not None:
            trace.append(kl_divergence(P, Y))
    return Y


def _normalize(Y: np.ndarray) -> np.ndarray:
    centered = Y - Y.mean(axis=0)
    scale = np.abs(centered).max()
    return centered / (scale if scale > 0.0 else 1.0)


def tsne(
    X: np.ndarray,
    config: TsneConfig,
    init: np.ndarray | None = None,
    *,
    epoch: int = 0,
    return_trace: bool = False,
):
    """Project one N x D matrix to a normalized 2D frame.

    `init` overrides the default seeded Gaussian start (sigma 1e-2).
    With `return_trace` the per-iteration KL values (against the true,
    un-exaggerated P) come back alongside the frame.
    """
    X = np.asarray(X, dtype=np.float64)
    affinity, _ = pairwise_affinities(X, config.perplexity)
    n = X.shape[0]
    if init is not None:
        Y0 = np.array(init, dtype=np.float64)
        if Y0.shape != (n, 2):
            raise ValueError(f"init must be {n} x 2, got {Y0.shape}")
    else:
        Y0 = SplitMix64(config.seed).normals((n, 2), sigma=1e-2)
    trace: list | None = [] if return_trace else None
    Y = _descend(affinity.P, Y0, config, config.iterations, True, trace)
    frame = ProjectionFrame(epoch, _normalize(Y), kl_divergence(affinity, Y))
    return (frame, trace) if return_trace else frame


def project_run(run, config: TsneConfig) -> list[ProjectionFrame]:
    """One temporally coherent frame per training snapshot.

    Frame 0 is a full t-SNE run on the untrained snapshot; each later
    frame warm-starts from its predecessor's raw coordinates and runs
    iterations / 5 (at least 50) steps with no exaggeration.
    """
    if not run.snapshots:
        raise ValueError("training run has no snapshots")
    frames = []
    warm_iters = max(config.iterations // 5, 50)
    Y_raw: np.ndarray | None = None
    for snap in run.snapshots:
        affinity, _ = pairwise_affinities(snap.embeddings, config.perplexity)
        if Y_raw is None:
            Y0 = SplitMix64(config.seed).normals((snap.embeddings.shape[0], 2), sigma=1e-2)
            Y_raw = _descend(affinity.P, Y0, config, config.iterations, True, None)
        else:
            Y_raw = _descend(affinity.P, Y_raw, config, warm_iters, False, None)
        frames.append(
            ProjectionFrame(snap.epoch, _normalize(Y_raw), kl_divergence(affinity, Y_raw))
        )
    return frames


def frames_to_json(
    frames: list[ProjectionFrame], config: TsneConfig, dataset_fingerprint: str
) -> dict:
    return {
        "format_version": 1,
        "config": {
            "perplexity": config.perplexity,
            "iterations": config.iterations,
            "learning_rate": config.learning_rate,
            "early_exaggeration": config.early_exaggeration,
            "exaggeration_iters": config.exaggeration_iters,
            "momentum": config.momentum,
            "seed": config.seed,
        },
        "dataset_fingerprint": dataset_fingerprint,
        "frames": [
            {"epoch": f.epoch, "kl": float(f.kl), "coords": f.coords.tolist()}
            for f in frames
        ],
    }


def frames_from_json(doc: dict) -> tuple[list[ProjectionFrame], TsneConfig, str]:
    if doc.get("format_version") != 1:
        raise ValueError(f"unsupported frames format_version {doc.get('format_version')!r}")
    config = TsneConfig(**doc["config"])
    frames = [
        ProjectionFrame(f["epoch"], np.asarray(f["coords"], dtype=np.float64), f["kl"])
        for f in doc["frames"]
    ]
    return frames, config, doc.get("dataset_fingerprint", "")
