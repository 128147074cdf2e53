"""Labeled raster images: PPM/PGM codec, synthetic generation, directory import.

The only raster formats are binary PPM (P6, RGB) and PGM (P5, gray) with
maxval 255. Synthetic datasets give each class a base color plus a
class-specific stripe pattern, so a plain color average is not enough to
separate classes and the embedding network has something to learn.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .rng import SplitMix64, fnv1a_hex


class PpmError(ValueError):
    """Malformed PPM/PGM input. `offset` is the byte position of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


@dataclass(frozen=True)
class Image:
    """One labeled raster image, pixels row-major, 8-bit per sample."""

    width: int
    height: int
    channels: int
    pixels: bytes
    id: str
    label: str

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("image dimensions must be >= 1")
        if self.channels not in (1, 3):
            raise ValueError("channels must be 1 or 3")
        expected = self.width * self.height * self.channels
        if len(self.pixels) != expected:
            raise ValueError(
                f"pixel payload has {len(self.pixels)} bytes, expected {expected}"
            )

    def to_array(self) -> np.ndarray:
        """(height, width, channels) float64 array scaled to [0, 1]."""
        arr = np.frombuffer(self.pixels, dtype=np.uint8).astype(np.float64)
        return arr.reshape(self.height, self.width, self.channels) / 255.0


@dataclass
class LabeledDataset:
    items: tuple[Image, ...]
    classes: tuple[str, ...]
    class_colors: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        self.items = tuple(self.items)
        self.classes = tuple(self.classes)
        seen_ids = set()
        counts = {c: 0 for c in self.classes}
        for img in self.items:
            if img.label not in counts:
                raise ValueError(f"label {img.label!r} not in classes")
            counts[img.label] += 1
            if img.id in seen_ids:
                raise ValueError(f"duplicate image id {img.id!r}")
            seen_ids.add(img.id)
        for cls, n in counts.items():
            if n < 2:
                raise ValueError(f"class {cls!r} needs >= 2 items, has {n}")

    def labels(self) -> list[str]:
        return [img.label for img in self.items]

    def ids(self) -> list[str]:
        return [img.id for img in self.items]


@dataclass(frozen=True)
class SyntheticConfig:
    num_classes: int = 4
    per_class: int = 25
    image_size: int = 16
    noise_sigma: float = 10.0
    seed: int = 42

    def __post_init__(self):
        if self.num_classes < 2:
            raise ValueError("num_classes must be >= 2")
        if self.per_class < 2:
            raise ValueError("per_class must be >= 2")
        if self.image_size < 4:
            raise ValueError("image_size must be >= 4")


def _read_token(data: bytes, pos: int) -> tuple[bytes, int]:
    """Next whitespace-delimited header token, skipping '#' comments."""
    n = len(data)
    while pos < n:
        c = data[pos : pos + 1]
        if c == b"#":
            while pos < n and data[pos : pos + 1] != b"\n":
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            break
    if pos >= n:
        raise PpmError("unexpected end of header", pos)
    start = pos
    while pos < n and not data[pos : pos + 1].isspace():
        pos += 1
    return data[start:pos], pos


def read_ppm(data: bytes, *, id: str = "", label: str = "") -> Image:
    """Decode a binary PPM (P6) or PGM (P5) byte string.

    Raises PpmError with the byte offset on a bad magic number, a maxval
    other than 255, or a truncated pixel payload.
    """
    magic, pos = _read_token(data, 0)
    if magic == b"P6":
        channels = 3
    elif magic == b"P5":
        channels = 1
    else:
        raise PpmError(f"unsupported magic {magic[:8]!r}", 0)

    fields = []
    for name in ("width", "height", "maxval"):
        token, pos = _read_token(data, pos)
        try:
            value = int(token)
        except ValueError:
            raise PpmError(f"non-numeric {name} {token!r}", pos - len(token)) from None
        fields.append(value)
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise PpmError(f"invalid dimensions {width}x{height}", pos)
    if maxval != 255:
        raise PpmError(f"maxval must be 255, got {maxval}", pos)

    # exactly one whitespace byte separates the header from the payload
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise PpmError("missing whitespace after maxval", pos)
    pos += 1

    expected = width * height * channels
    payload = data[pos : pos + expected]
    if len(payload) < expected:
        raise PpmError(
            f"truncated pixel payload, need {expected} bytes, have {len(payload)}",
            pos + len(payload),
        )
    return Image(width, height, channels, payload, id=id, label=label)


def write_ppm(img: Image) -> bytes:
    """Encode as P6 (3 channels) or P5 (1 channel). Inverse of read_ppm."""
    magic = b"P6" if img.channels == 3 else b"P5"
    header = magic + b"\n%d %d\n255\n" % (img.width, img.height)
    return header + img.pixels


STRIPE_AMPLITUDE = 8.0
_SATURATION = 0.55
_VALUE_DARK = 0.64
_VALUE_LIGHT = 0.70


def _hsv_to_rgb(h: float, s: float, v: float) -> tuple[int, int, int]:
    i = int(h * 6.0) % 6
    f = h * 6.0 - int(h * 6.0)
    p, q, t = v * (1 - s), v * (1 - f * s), v * (1 - (1 - f) * s)
    r, g, b = [
        (v, t, p), (q, v, p), (p, v, t), (p, q, v), (t, p, v), (v, p, q),
    ][i]
    return tuple(int(round(255 * x)) for x in (r, g, b))


def class_prototype_color(k: int, num_classes: int) -> tuple[int, int, int]:
    """Base color of class k: classes pair up like 2i/2i+1 sharing a hue.

    Pair members are a darker and a lighter variant of the same hue, the
    way two similar breeds share a coat color; their stripe patterns do
    the rest of the telling apart. Values stay away from 0/255 so the
    additive noise almost never clips.
    """
    pairs = (num_classes + 1) // 2
    hue = ((k // 2) / pairs) % 1.0
    value = _VALUE_DARK if k % 2 == 0 else _VALUE_LIGHT
    return _hsv_to_rgb(hue, _SATURATION, value)


def _hex_color(rgb: tuple[int, int, int]) -> str:
    return "#{:02X}{:02X}{:02X}".format(*rgb)


def _class_stripe(k: int, size: int) -> np.ndarray:
    """Zero-mean sinusoidal stripe; frequency per pair, orientation by parity."""
    freq = (k // 2) % max(size // 2, 1) + 1
    axis = np.arange(size, dtype=np.float64) + 0.5
    wave = STRIPE_AMPLITUDE * np.sin(2.0 * math.pi * freq * axis / size)
    if k % 2 == 0:
        return np.tile(wave, (size, 1))  # horizontal stripes
    return np.tile(wave[:, None], (1, size))  # vertical stripes


def generate_synthetic(config: SyntheticConfig) -> LabeledDataset:
    """Deterministic stand-in dataset: per-class color + stripes + noise.

    Class k draws around `class_prototype_color(k)` plus `_class_stripe(k)`
    plus seeded Gaussian noise. Within a hue pair only the lightness and
    the stripe orientation differ, which keeps the metric-learning task
    from collapsing into a pure color lookup. Stripes integrate to zero
    over the image, so each class's mean pixel color stays at its
    prototype up to the noise's sampling error.
    """
    rng = SplitMix64(config.seed)
    size = config.image_size
    items = []
    classes = []
    class_colors = {}
    for k in range(config.num_classes):
        label = f"class{k}"
        classes.append(label)
        base = class_prototype_color(k, config.num_classes)
        class_colors[label] = _hex_color(base)
        stripe = _class_stripe(k, size)
        for i in range(config.per_class):
            noise = rng.normals((size, size, 3), sigma=config.noise_sigma)
            img = np.array(base, dtype=np.float64) + stripe[:, :, None] + noise
            pixels = np.clip(np.rint(img), 0, 255).astype(np.uint8).tobytes()
            items.append(
                Image(size, size, 3, pixels, id=f"{label}/{i:03d}", label=label)
            )
    return LabeledDataset(tuple(items), tuple(classes), class_colors)


def load_directory(root: str) -> LabeledDataset:
    """Read `root/<class>/<name>.ppm` into a dataset, sorted by (label, filename).

    Item ids are `<class>/<stem>`, so equal file names in different class
    directories stay distinct. The ordering contract makes the result
    independent of filesystem enumeration order. Class colors default to
    the synthetic palette.
    """
    try:
        entries = sorted(os.listdir(root))
    except OSError as exc:
        raise ValueError(f"cannot read dataset root {root!r}: {exc}") from exc
    class_dirs = [e for e in entries if os.path.isdir(os.path.join(root, e))]
    if not class_dirs:
        raise ValueError(f"dataset root {root!r} has no class subdirectories")

    items = []
    for label in class_dirs:
        files = sorted(
            f
            for f in os.listdir(os.path.join(root, label))
            if f.lower().endswith((".ppm", ".pgm"))
        )
        if len(files) < 2:
            raise ValueError(f"class {label!r} needs >= 2 items, has {len(files)}")
        for fname in files:
            path = os.path.join(root, label, fname)
            try:
                with open(path, "rb") as fh:
                    data = fh.read()
            except OSError as exc:
                raise ValueError(f"unreadable file {path!r}: {exc}") from exc
            stem = os.path.splitext(fname)[0]
            try:
                items.append(read_ppm(data, id=f"{label}/{stem}", label=label))
            except PpmError as exc:
                raise ValueError(f"bad image {path!r}: {exc}") from exc

    classes = tuple(class_dirs)
    colors = {
        label: _hex_color(class_prototype_color(k, len(classes)))
        for k, label in enumerate(classes)
    }
    return LabeledDataset(tuple(items), classes, colors)


def _item_filename(img: Image) -> str:
    stem = img.id.rsplit("/", 1)[-1]
    return f"{img.label}/{stem}.ppm"


def dataset_manifest(ds: LabeledDataset) -> dict:
    """Manifest document describing the dataset; its bytes define the fingerprint."""
    core = {
        "format_version": 1,
        "classes": list(ds.classes),
        "class_colors": {c: ds.class_colors.get(c, "") for c in ds.classes},
        "items": [
            {
                "id": img.id,
                "label": img.label,
                "file": _item_filename(img),
                "width": img.width,
                "height": img.height,
                "channels": img.channels,
                "pixels_fnv1a": fnv1a_hex(img.pixels),
            }
            for img in ds.items
        ],
    }
    manifest = dict(core)
    manifest["fingerprint"] = fnv1a_hex(_canonical_bytes(core))
    return manifest


def dataset_fingerprint(ds: LabeledDataset) -> str:
    return dataset_manifest(ds)["fingerprint"]


def _canonical_bytes(doc: dict) -> bytes:
    return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")


def save_dataset(ds: LabeledDataset, root: str) -> dict:
    """Write `root/<class>/<stem>.ppm` files plus `manifest.json`; returns the manifest."""
    os.makedirs(root, exist_ok=True)
    for img in ds.items:
        os.makedirs(os.path.join(root, img.label), exist_ok=True)
        with open(os.path.join(root, _item_filename(img)), "wb") as fh:
            fh.write(write_ppm(img))
    manifest = dataset_manifest(ds)
    with open(os.path.join(root, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest
