"""Shared-weight convolutional embedding network with analytic gradients.

Layer stack: [conv(k x k, valid, stride 1) -> relu -> maxpool 2x2/2]* then
[fully connected]* with relu on all but the last layer, which is linear
and defines the embedding dimension. Everything runs in float64; the
backward pass is exact, which the finite-difference tests rely on.

Array layout conventions:
    batch    (B, H, W, C)   pixel values already scaled to [0, 1]
    conv w   (out_c, kh, kw, in_c), bias (out_c,)
    fc w     (in_dim, out_dim), bias (out_dim,)

Max-pool ties are broken by the first maximal element in row-major window
order so the backward routing is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dataset import Image
from .rng import SplitMix64


@dataclass(frozen=True)
class ConvSpec:
    out_channels: int
    kernel: int


@dataclass(frozen=True)
class FcSpec:
    out_dim: int
    activation: str = "relu"  # "relu" or "linear"


@dataclass(frozen=True)
class NetArchitecture:
    conv_layers: tuple[ConvSpec, ...]
    fc_layers: tuple[FcSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, "conv_layers", tuple(self.conv_layers))
        object.__setattr__(self, "fc_layers", tuple(self.fc_layers))
        if not self.fc_layers:
            raise ValueError("need at least one fully connected layer")
        if self.fc_layers[-1].activation != "linear":
            raise ValueError("final fc layer must be linear")
        for fc in self.fc_layers:
            if fc.activation not in ("relu", "linear"):
                raise ValueError(f"unknown activation {fc.activation!r}")

    @property
    def embedding_dim(self) -> int:
        return self.fc_layers[-1].out_dim

    def layer_shapes(self, input_shape: tuple[int, int, int]) -> list[dict]:
        """Shape inference: conv H-k+1, pool floor(H/2), then flatten.

        Raises ValueError if any spatial size underflows below 1.
        """
        h, w, c = input_shape
        shapes = []
        for spec in self.conv_layers:
            ch, cw = h - spec.kernel + 1, w - spec.kernel + 1
            if ch < 1 or cw < 1:
                raise ValueError(
                    f"conv kernel {spec.kernel} underflows {h}x{w} input"
                )
            ph, pw = ch // 2, cw // 2
            if ph < 1 or pw < 1:
                raise ValueError(f"maxpool underflows {ch}x{cw} conv output")
            shapes.append(
                {
                    "kind": "conv",
                    "in": (h, w, c),
                    "conv_out": (ch, cw, spec.out_channels),
                    "pool_out": (ph, pw, spec.out_channels),
                }
            )
            h, w, c = ph, pw, spec.out_channels
        dim = h * w * c
        for spec in self.fc_layers:
            shapes.append({"kind": "fc", "in_dim": dim, "out_dim": spec.out_dim})
            dim = spec.out_dim
        return shapes


DEFAULT_ARCHITECTURE = NetArchitecture(
    conv_layers=(ConvSpec(8, 3), ConvSpec(16, 3)),
    fc_layers=(FcSpec(32, "linear"),),
)

DEFAULT_INPUT_SHAPE = (16, 16, 3)


@dataclass
class EmbeddingNet:
    """Architecture plus one parameter set shared by every Siamese branch."""

    architecture: NetArchitecture
    input_shape: tuple[int, int, int]
    params: list[dict]

    @property
    def embedding_dim(self) -> int:
        return self.architecture.embedding_dim

    def parameter_count(self) -> int:
        return sum(p["w"].size + p["b"].size for p in self.params)


def init_network(
    arch: NetArchitecture, input_shape: tuple[int, int, int], seed: int
) -> EmbeddingNet:
    """He-initialized weights (zero-mean Gaussian, variance 2/fan_in), zero biases."""
    shapes = arch.layer_shapes(tuple(input_shape))
    rng = SplitMix64(seed)
    params = []
    for spec, shape in zip(arch.conv_layers, shapes):
        _, _, in_c = shape["in"]
        fan_in = spec.kernel * spec.kernel * in_c
        w = rng.normals(
            (spec.out_channels, spec.kernel, spec.kernel, in_c),
            sigma=np.sqrt(2.0 / fan_in),
        )
        params.append({"w": w, "b": np.zeros(spec.out_channels)})
    for spec, shape in zip(arch.fc_layers, shapes[len(arch.conv_layers):]):
        fan_in = shape["in_dim"]
        w = rng.normals((fan_in, spec.out_dim), sigma=np.sqrt(2.0 / fan_in))
        params.append({"w": w, "b": np.zeros(spec.out_dim)})
    return EmbeddingNet(arch, tuple(input_shape), params)


def images_to_batch(images: Sequence[Image], input_shape) -> np.ndarray:
    h, w, c = input_shape
    batch = np.empty((len(images), h, w, c), dtype=np.float64)
    for i, img in enumerate(images):
        if (img.height, img.width, img.channels) != (h, w, c):
            raise ValueError(
                f"image {img.id!r} is {img.height}x{img.width}x{img.channels}, "
                f"network expects {h}x{w}x{c}"
            )
        batch[i] = img.to_array()
    return batch


def _conv_forward(x, w, b):
    bsz, h, wid, _ = x.shape
    oc, k, _, _ = w.shape
    ho, wo = h - k + 1, wid - k + 1
    out = np.zeros((bsz, ho, wo, oc))
    for di in range(k):
        for dj in range(k):
            out += x[:, di : di + ho, dj : dj + wo, :] @ w[:, di, dj, :].T
    return out + b


def _conv_backward(dout, x, w):
    bsz, h, wid, _ = x.shape
    oc, k, _, _ = w.shape
    ho, wo = dout.shape[1], dout.shape[2]
    dw = np.zeros_like(w)
    dx = np.zeros_like(x)
    db = dout.sum(axis=(0, 1, 2))
    for di in range(k):
        for dj in range(k):
            patch = x[:, di : di + ho, dj : dj + wo, :]
            dw[:, di, dj, :] = np.tensordot(dout, patch, axes=([0, 1, 2], [0, 1, 2]))
            dx[:, di : di + ho, dj : dj + wo, :] += dout @ w[:, di, dj, :]
    return dx, dw, db


def _maxpool_forward(x):
    bsz, h, w, c = x.shape
    ho, wo = h // 2, w // 2
    win = (
        x[:, : 2 * ho, : 2 * wo, :]
        .reshape(bsz, ho, 2, wo, 2, c)
        .transpose(0, 1, 3, 5, 2, 4)
        .reshape(bsz, ho, wo, c, 4)
    )
    idx = win.argmax(axis=4)  # argmax takes the first max: row-major tie-break
    out = np.take_along_axis(win, idx[..., None], axis=4)[..., 0]
    return out, idx


def _maxpool_backward(dout, idx, in_shape):
    bsz, h, w, c = in_shape
    ho, wo = h // 2, w // 2
    dwin = np.zeros((bsz, ho, wo, c, 4))
    np.put_along_axis(dwin, idx[..., None], dout[..., None], axis=4)
    dx = np.zeros(in_shape)
    dx[:, : 2 * ho, : 2 * wo, :] = (
        dwin.reshape(bsz, ho, wo, c, 2, 2)
        .transpose(0, 1, 4, 2, 5, 3)
        .reshape(bsz, 2 * ho, 2 * wo, c)
    )
    return dx


def forward(net: EmbeddingNet, batch) -> tuple[np.ndarray, list]:
    """Embed a batch; returns (B x D matrix, cache for backward).

    `batch` is either a sequence of Image values or an already scaled
    (B, H, W, C) float array.
    """
    if isinstance(batch, np.ndarray):
        x = np.asarray(batch, dtype=np.float64)
        if x.shape[1:] != tuple(net.input_shape):
            raise ValueError(
                f"batch shape {x.shape[1:]} does not match input {net.input_shape}"
            )
    else:
        x = images_to_batch(batch, net.input_shape)

    cache = []
    n_conv = len(net.architecture.conv_layers)
    for li in range(n_conv):
        w, b = net.params[li]["w"], net.params[li]["b"]
        z = _conv_forward(x, w, b)
        a = np.maximum(z, 0.0)
        pooled, idx = _maxpool_forward(a)
        cache.append({"kind": "conv", "x": x, "z": z, "a_shape": a.shape, "idx": idx})
        x = pooled
    flat_shape = x.shape
    x = x.reshape(x.shape[0], -1)
    for li, spec in enumerate(net.architecture.fc_layers):
        w, b = net.params[n_conv + li]["w"], net.params[n_conv + li]["b"]
        # (B, 1, in) @ (in, out) runs one fixed-shape product per image, so
        # each row is bitwise independent of the batch it sits in
        z = (x[:, None, :] @ w)[:, 0, :] + b
        cache.append({"kind": "fc", "x": x, "z": z, "activation": spec.activation,
                      "flat_shape": flat_shape if li == 0 else None})
        x = np.maximum(z, 0.0) if spec.activation == "relu" else z
    return x, cache


def backward(net: EmbeddingNet, cache: list, upstream: np.ndarray) -> list[dict]:
    """Gradients of sum(upstream * embeddings) for every parameter.

    The cache must come from a forward call on this exact net; shapes are
    checked against it.
    """
    upstream = np.asarray(upstream, dtype=np.float64)
    if upstream.shape != cache[-1]["z"].shape:
        raise ValueError(
            f"upstream shape {upstream.shape} does not match "
            f"embeddings {cache[-1]['z'].shape}"
        )
    n_conv = len(net.architecture.conv_layers)
    grads: list[dict | None] = [None] * len(net.params)
    dout = upstream
    flat_shape = None
    for li in range(len(net.architecture.fc_layers) - 1, -1, -1):
        entry = cache[n_conv + li]
        if entry["activation"] == "relu":
            dout = dout * (entry["z"] > 0.0)
        grads[n_conv + li] = {
            "w": entry["x"].T @ dout,
            "b": dout.sum(axis=0),
        }
        dout = (dout[:, None, :] @ net.params[n_conv + li]["w"].T)[:, 0, :]
        if entry["flat_shape"] is not None:
            flat_shape = entry["flat_shape"]
    dout = dout.reshape(flat_shape)
    for li in range(n_conv - 1, -1, -1):
        entry = cache[li]
        da = _maxpool_backward(dout, entry["idx"], entry["a_shape"])
        dz = da * (entry["z"] > 0.0)
        dx, dw, db = _conv_backward(dz, entry["x"], net.params[li]["w"])
        grads[li] = {"w": dw, "b": db}
        dout = dx
    return grads


def apply_gradients(net: EmbeddingNet, grads: list[dict], learning_rate: float) -> EmbeddingNet:
    """Plain SGD step, theta <- theta - lr * g; returns a new network."""
    new_params = []
    for p, g in zip(net.params, grads):
        if p["w"].shape != g["w"].shape or p["b"].shape != g["b"].shape:
            raise ValueError("gradient shapes do not match parameters")
        new_params.append(
            {"w": p["w"] - learning_rate * g["w"], "b": p["b"] - learning_rate * g["b"]}
        )
    return EmbeddingNet(net.architecture, net.input_shape, new_params)


def zero_gradients(net: EmbeddingNet) -> list[dict]:
    return [{"w": np.zeros_like(p["w"]), "b": np.zeros_like(p["b"])} for p in net.params]


def to_checkpoint(net: EmbeddingNet) -> dict:
    """JSON-ready checkpoint document."""
    return {
        "format_version": 1,
        "architecture": {
            "conv_layers": [
                {"out_channels": c.out_channels, "kernel": c.kernel}
                for c in net.architecture.conv_layers
            ],
            "fc_layers": [
                {"out_dim": f.out_dim, "activation": f.activation}
                for f in net.architecture.fc_layers
            ],
        },
        "input_shape": list(net.input_shape),
        "parameters": [
            {"w": p["w"].tolist(), "b": p["b"].tolist()} for p in net.params
        ],
    }


def from_checkpoint(doc: dict) -> EmbeddingNet:
    if doc.get("format_version") != 1:
        raise ValueError(f"unsupported checkpoint format_version {doc.get('format_version')!r}")
    arch = NetArchitecture(
        conv_layers=tuple(
            ConvSpec(c["out_channels"], c["kernel"])
            for c in doc["architecture"]["conv_layers"]
        ),
        fc_layers=tuple(
            FcSpec(f["out_dim"], f["activation"])
            for f in doc["architecture"]["fc_layers"]
        ),
    )
    params = [
        {"w": np.asarray(p["w"], dtype=np.float64), "b": np.asarray(p["b"], dtype=np.float64)}
        for p in doc["parameters"]
    ]
    net = EmbeddingNet(arch, tuple(doc["input_shape"]), params)
    expected = init_network(arch, net.input_shape, 0)
    for got, want in zip(params, expected.params):
        if got["w"].shape != want["w"].shape or got["b"].shape != want["b"].shape:
            raise ValueError("checkpoint parameter shapes do not match architecture")
    return net
