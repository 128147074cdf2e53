"""Compile training, projection, and inference artifacts into a story bundle.

The bundle is a single JSON document with six slices in a fixed order:
concept, embedding model, distance, loss, training, inferencing. It is
the only contract between this package and the scrollytelling UI, so it
is fully self-contained (assets ship base64-embedded) and every number
the UI recomputes live (the 2D triplet loss, the inference radius) is
re-derivable from other fields; the validator enforces that redundancy.

Serialization is canonical: UTF-8, keys in lexicographic order, compact
separators. Identical inputs give byte-identical bundles.
"""

from __future__ import annotations

import base64
import importlib.resources
import json
import math

from .dataset import LabeledDataset, Image, dataset_fingerprint, write_ppm
from .infer import InferenceResult
from .losses import Margin, Triplet, triplet_loss
from .rng import SplitMix64
from .train import TrainingRun, first_sampled_triplet
from .tsne import ProjectionFrame

SLICE_IDS = (
    "snn_concept",
    "embedding_model",
    "euclidean_distance",
    "loss_function",
    "training",
    "inferencing",
)

# Siamese-cat coat palette: brown, light brown, gray, black, white
DEFAULT_PALETTE = ("#5C4033", "#C4A484", "#808080", "#000000", "#FFFFFF")

MARGIN_RANGE = (0.0, 5.0)
QUERY_ASSET_ID = "query"
_GRID_COLUMNS = 4
_RECOMPUTE_TOL = 1e-9


def default_narratives() -> dict:
    """The packaged narrative text resource."""
    text = (
        importlib.resources.files("embedstory")
        .joinpath("data/narratives.json")
        .read_text(encoding="utf-8")
    )
    return json.loads(text)


def default_quiz() -> list[dict]:
    """The seven-question multiple-choice quiz, four choices each."""
    return [
        {
            "prompt": "What is the origin of the word Siamese in Siamese Neural Network?",
            "choices": [
                "Siamese Cat",
                "Siamese Twin",
                "Siamese Fighting Fish",
                "A researcher's surname",
            ],
            "answer_index": 1,
        },
        {
            "prompt": "Which loss function is associated with the term Siamese?",
            "choices": [
                "Cross-Entropy Loss",
                "Hinge Loss",
                "Contrastive Loss",
                "Mean Squared Error",
            ],
            "answer_index": 2,
        },
        {
            "prompt": "What kind of network is the most popular at the heart of the "
                      "image processing Embedding Model?",
            "choices": [
                "RNN or LSTM",
                "CNN or ConvNet",
                "Transformer",
                "Decision Tree",
            ],
            "answer_index": 1,
        },
        {
            "prompt": "A batch of data is organized as follows: 1) the original image, "
                      "2) an image nearly identical to the original, 3) an image that "
                      "does not resemble the original. What is the name of this type of batch?",
            "choices": ["Pairs", "Triplets", "Quadruplets", "Mini-batches"],
            "answer_index": 1,
        },
        {
            "prompt": "What should you expect to observe throughout training?",
            "choices": [
                "Loss value gradually decreases",
                "Loss value gradually increases",
                "Loss value stays exactly constant",
                "Loss value oscillates without any trend",
            ],
            "answer_index": 0,
        },
        {
            "prompt": "What does it mean if similar objects are close together and "
                      "dissimilar objects are separated?",
            "choices": [
                "Loss value gradually decreases",
                "The model has diverged",
                "The margin is zero",
                "The data is unlabeled",
            ],
            "answer_index": 0,
        },
        {
            "prompt": "How will the final trained model be able to solve the business problem?",
            "choices": [
                "It compares a new object to the trained surrounding objects to find "
                "the most similar ones, and can serve as a pre-trained model",
                "It generates brand-new product images from scratch",
                "It predicts future sales figures from the images",
                "It compresses the images so the website loads faster",
            ],
            "answer_index": 0,
        },
    ]


def _architecture_text(run: TrainingRun) -> str:
    net = run.final_net
    h, w, c = net.input_shape
    parts = [f"input {h}x{w}x{c}"]
    for conv in net.architecture.conv_layers:
        parts.append(f"conv {conv.out_channels}@{conv.kernel}x{conv.kernel} + relu")
        parts.append("maxpool 2x2")
    for fc in net.architecture.fc_layers:
        parts.append(f"fc {fc.out_dim} ({fc.activation})")
    parts.append(f"embedding dim {net.embedding_dim}")
    return " -> ".join(parts)


def _bubble(item_id: str, coords) -> dict:
    return {"id": item_id, "x": float(coords[0]), "y": float(coords[1])}


def build_bundle(
    run: TrainingRun,
    frames: list[ProjectionFrame],
    inference: InferenceResult,
    data: LabeledDataset,
    narratives: dict | None = None,
    quiz: list[dict] | None = None,
    *,
    query_image: Image | None = None,
) -> dict:
    """Assemble the six-slice story bundle from mutually consistent artifacts.

    The distance and loss slices are built around the run's first sampled
    triplet, with coordinates taken from frame 0. The query asset comes
    from `query_image`, or from the gallery when the inference query is a
    dataset item.
    """
    narratives = narratives if narratives is not None else default_narratives()
    fingerprint = dataset_fingerprint(data)
    if run.dataset_fingerprint != fingerprint:
        raise ValueError(
            f"training run fingerprint {run.dataset_fingerprint} does not match "
            f"dataset {fingerprint}"
        )
    if len(frames) != len(run.snapshots):
        raise ValueError(
            f"{len(frames)} frames for {len(run.snapshots)} snapshots"
        )
    n = len(data.items)
    for frame in frames:
        if frame.coords.shape[0] != n:
            raise ValueError("frame rows do not match dataset size")

    ids = data.ids()
    labels = data.labels()
    id_row = {item_id: i for i, item_id in enumerate(ids)}
    for neighbor in inference.neighbors:
        if neighbor.id not in id_row:
            raise ValueError(f"inference neighbor {neighbor.id!r} not in dataset")

    assets = {
        img.id: {
            "ppm_base64": base64.b64encode(write_ppm(img)).decode("ascii"),
            "label": img.label,
        }
        for img in data.items
    }
    if QUERY_ASSET_ID in assets:
        raise ValueError(f"dataset id {QUERY_ASSET_ID!r} collides with the query asset")
    if query_image is not None:
        assets[QUERY_ASSET_ID] = {
            "ppm_base64": base64.b64encode(write_ppm(query_image)).decode("ascii"),
            "label": query_image.label or "query",
        }
    elif inference.query_id in id_row:
        source = data.items[id_row[inference.query_id]]
        assets[QUERY_ASSET_ID] = {
            "ppm_base64": base64.b64encode(write_ppm(source)).decode("ascii"),
            "label": source.label,
        }
    else:
        raise ValueError("query_image required: inference query is not a gallery item")

    palette = list(DEFAULT_PALETTE)
    for cls in data.classes:
        color = data.class_colors.get(cls, "")
        if color and color not in palette:
            palette.append(color)

    frame0 = frames[0]
    a_idx, p_idx, n_idx = first_sampled_triplet(
        run.hyperparams, labels, run.snapshots[0].embeddings
    )
    tri_bubbles = {
        "anchor": _bubble(ids[a_idx], frame0.coords[a_idx]),
        "positive": _bubble(ids[p_idx], frame0.coords[p_idx]),
        "negative": _bubble(ids[n_idx], frame0.coords[n_idx]),
    }
    margin_default = run.hyperparams.margin
    initial_loss = triplet_loss(
        Triplet(
            [tri_bubbles["anchor"]["x"], tri_bubbles["anchor"]["y"]],
            [tri_bubbles["positive"]["x"], tri_bubbles["positive"]["y"]],
            [tri_bubbles["negative"]["x"], tri_bubbles["negative"]["y"]],
        ),
        Margin(margin_default),
    ).loss

    samples_per_class: dict[str, list[str]] = {}
    for item_id, label in zip(ids, labels):
        samples_per_class.setdefault(label, [])
        if len(samples_per_class[label]) < 2:
            samples_per_class[label].append(item_id)
    sample_ids = [item_id for cls in data.classes for item_id in samples_per_class[cls]]
    before_grid = [
        {"asset_id": item_id, "row": i // _GRID_COLUMNS, "col": i % _GRID_COLUMNS}
        for i, item_id in enumerate(sample_ids)
    ]
    after_bubbles = [
        {
            "id": item_id,
            "x": float(frame0.coords[id_row[item_id]][0]),
            "y": float(frame0.coords[id_row[item_id]][1]),
            "color": data.class_colors[labels[id_row[item_id]]],
        }
        for item_id in sample_ids
    ]

    training_frames = [
        {
            "epoch": frame.epoch,
            "bubbles": [
                {
                    "id": ids[i],
                    "x": float(frame.coords[i][0]),
                    "y": float(frame.coords[i][1]),
                    "class": labels[i],
                    "color": data.class_colors[labels[i]],
                }
                for i in range(n)
            ],
            "loss": float(run.snapshots[fi].mean_loss),
        }
        for fi, frame in enumerate(frames)
    ]

    slices = [
        {
            "id": "snn_concept",
            "payload": {
                "narrative": narratives.get("snn_concept", ""),
                "figure_asset_ids": [samples_per_class[cls][0] for cls in data.classes],
            },
        },
        {
            "id": "embedding_model",
            "payload": {
                "sample_asset_ids": sample_ids,
                "before_grid": before_grid,
                "after_bubbles": after_bubbles,
                "architecture_text": narratives.get("architecture_text")
                or _architecture_text(run),
            },
        },
        {
            "id": "euclidean_distance",
            "payload": {
                "bubbles": tri_bubbles,
                "lines": [
                    {
                        "from": tri_bubbles["anchor"]["id"],
                        "to": tri_bubbles["positive"]["id"],
                        "role": "anchor-positive",
                    },
                    {
                        "from": tri_bubbles["anchor"]["id"],
                        "to": tri_bubbles["negative"]["id"],
                        "role": "anchor-negative",
                    },
                ],
                "formula_text": narratives.get("formula_text", ""),
            },
        },
        {
            "id": "loss_function",
            "payload": {
                "bubbles": tri_bubbles,
                "margin_default": float(margin_default),
                "margin_range": list(MARGIN_RANGE),
                "loss_kind": "triplet",
                "initial_loss": float(initial_loss),
            },
        },
        {
            "id": "training",
            "payload": {
                "frames": training_frames,
                "loss_curve": [float(v) for v in run.loss_curve],
            },
        },
        {
            "id": "inferencing",
            "payload": {
                "query_asset_id": QUERY_ASSET_ID,
                "query_coords": [
                    float(inference.query_coords_2d[0]),
                    float(inference.query_coords_2d[1]),
                ],
                "radius": float(inference.radius_2d),
                "k": inference.k,
                "neighbors": [
                    {"id": nb.id, "distance": float(nb.distance)}
                    for nb in inference.neighbors
                ],
            },
        },
    ]

    bundle = {
        "format_version": 1,
        "scroll_mode": "steps",
        "dataset_fingerprint": fingerprint,
        "palette": palette,
        "assets": assets,
        "slices": slices,
    }
    if quiz is not None:
        bundle["quiz"] = quiz
    return bundle


def serialize_bundle(bundle: dict) -> bytes:
    """Canonical bytes: UTF-8, lexicographic key order, compact separators."""
    return (
        json.dumps(bundle, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
        + "\n"
    ).encode("utf-8")


def _is_hex_color(value) -> bool:
    return (
        isinstance(value, str)
        and len(value) == 7
        and value[0] == "#"
        and all(c in "0123456789abcdefABCDEF" for c in value[1:])
    )


def _dist2d(a: tuple[float, float], b: tuple[float, float]) -> float:
    return math.sqrt((a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2)


def _triplet_loss_2d(a, p, n, margin: float) -> float:
    d_ap2 = (a[0] - p[0]) ** 2 + (a[1] - p[1]) ** 2
    d_an2 = (a[0] - n[0]) ** 2 + (a[1] - n[1]) ** 2
    return max(0.0, d_ap2 - d_an2 + margin)


class _Checker:
    def __init__(self):
        self.errors: list[dict] = []

    def fail(self, path: str, message: str):
        self.errors.append({"path": path, "message": message})

    def require(self, condition: bool, path: str, message: str) -> bool:
        if not condition:
            self.fail(path, message)
        return condition


def validate_bundle(document) -> list[dict]:
    """Check every bundle invariant; returns all violations, not just the first.

    Accepts a JSON string/bytes or an already parsed dict. Raises
    ValueError when the input is not JSON at all.
    """
    if isinstance(document, (str, bytes)):
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ValueError(f"input is not JSON: {exc}") from exc
    else:
        doc = document
    c = _Checker()
    if not isinstance(doc, dict):
        c.fail("", "bundle must be a JSON object")
        return c.errors

    if doc.get("format_version") != 1:
        c.fail("format_version", f"expected 1, got {doc.get('format_version')!r}")
    if doc.get("scroll_mode") != "steps":
        c.fail("scroll_mode", f"expected 'steps', got {doc.get('scroll_mode')!r}")

    palette = doc.get("palette")
    if not isinstance(palette, list) or not palette:
        c.fail("palette", "palette must be a non-empty list")
        palette = []
    else:
        for i, color in enumerate(palette):
            c.require(_is_hex_color(color), f"palette[{i}]", f"bad hex color {color!r}")
    palette_set = set(palette)

    assets = doc.get("assets")
    if not isinstance(assets, dict):
        c.fail("assets", "assets must be a map of id to asset")
        assets = {}
    for asset_id, asset in assets.items():
        path = f"assets[{asset_id}]"
        if not c.require(isinstance(asset, dict), path, "asset must be an object"):
            continue
        c.require(isinstance(asset.get("label"), str), f"{path}.label", "label must be a string")
        b64 = asset.get("ppm_base64")
        if c.require(isinstance(b64, str), f"{path}.ppm_base64", "must be a base64 string"):
            try:
                raw = base64.b64decode(b64, validate=True)
                c.require(
                    raw[:2] in (b"P5", b"P6"),
                    f"{path}.ppm_base64",
                    "decoded asset is not a PPM/PGM payload",
                )
            except (ValueError, TypeError):
                c.fail(f"{path}.ppm_base64", "invalid base64")

    def check_asset_ref(asset_id, path):
        c.require(
            isinstance(asset_id, str) and asset_id in assets,
            path,
            f"unresolved asset reference {asset_id!r}",
        )

    def check_coord(value, path):
        ok = isinstance(value, (int, float)) and -1.0 - 1e-9 <= value <= 1.0 + 1e-9
        c.require(ok, path, f"coordinate {value!r} outside [-1, 1]")

    slices = doc.get("slices")
    if not isinstance(slices, list):
        c.fail("slices", "slices must be a list")
        return c.errors
    got_ids = [s.get("id") for s in slices if isinstance(s, dict)]
    if got_ids != list(SLICE_IDS):
        c.fail(
            "slices",
            f"slice ids must be exactly {list(SLICE_IDS)} in order, got {got_ids}",
        )
        return c.errors

    payloads = {}
    for i, entry in enumerate(slices):
        payload = entry.get("payload")
        if not c.require(isinstance(payload, dict), f"slices[{i}].payload", "missing payload"):
            return c.errors
        payloads[entry["id"]] = (i, payload)

    i, p = payloads["snn_concept"]
    base = f"slices[{i}].payload"
    c.require(isinstance(p.get("narrative"), str) and p.get("narrative"),
              f"{base}.narrative", "narrative must be non-empty text")
    for j, ref in enumerate(p.get("figure_asset_ids", [])):
        check_asset_ref(ref, f"{base}.figure_asset_ids[{j}]")

    i, p = payloads["embedding_model"]
    base = f"slices[{i}].payload"
    for j, ref in enumerate(p.get("sample_asset_ids", [])):
        check_asset_ref(ref, f"{base}.sample_asset_ids[{j}]")
    for j, cell in enumerate(p.get("before_grid", [])):
        check_asset_ref(cell.get("asset_id"), f"{base}.before_grid[{j}].asset_id")
        c.require(
            isinstance(cell.get("row"), int) and cell["row"] >= 0
            and isinstance(cell.get("col"), int) and cell["col"] >= 0,
            f"{base}.before_grid[{j}]", "row/col must be non-negative integers",
        )
    for j, bub in enumerate(p.get("after_bubbles", [])):
        check_asset_ref(bub.get("id"), f"{base}.after_bubbles[{j}].id")
        check_coord(bub.get("x"), f"{base}.after_bubbles[{j}].x")
        check_coord(bub.get("y"), f"{base}.after_bubbles[{j}].y")
        c.require(bub.get("color") in palette_set, f"{base}.after_bubbles[{j}].color",
                  f"color {bub.get('color')!r} not in palette")
    c.require(isinstance(p.get("architecture_text"), str) and p["architecture_text"],
              f"{base}.architecture_text", "architecture_text must be non-empty")

    def check_triplet_bubbles(p, base):
        bubbles = p.get("bubbles")
        if not c.require(isinstance(bubbles, dict), f"{base}.bubbles", "bubbles must be an object"):
            return None
        for role in ("anchor", "positive", "negative"):
            bub = bubbles.get(role)
            if not c.require(isinstance(bub, dict), f"{base}.bubbles.{role}", "missing bubble"):
                return None
            check_asset_ref(bub.get("id"), f"{base}.bubbles.{role}.id")
            check_coord(bub.get("x"), f"{base}.bubbles.{role}.x")
            check_coord(bub.get("y"), f"{base}.bubbles.{role}.y")
        return bubbles

    i, p = payloads["euclidean_distance"]
    base = f"slices[{i}].payload"
    bubbles = check_triplet_bubbles(p, base)
    lines = p.get("lines", [])
    roles = [line.get("role") for line in lines if isinstance(line, dict)]
    c.require(
        sorted(roles) == ["anchor-negative", "anchor-positive"],
        f"{base}.lines",
        "need exactly one anchor-positive and one anchor-negative line",
    )
    if bubbles:
        known = {bubbles[r]["id"] for r in ("anchor", "positive", "negative")}
        for j, line in enumerate(lines):
            for key in ("from", "to"):
                c.require(line.get(key) in known, f"{base}.lines[{j}].{key}",
                          f"line endpoint {line.get(key)!r} is not a slice bubble")
    c.require(isinstance(p.get("formula_text"), str) and p["formula_text"],
              f"{base}.formula_text", "formula_text must be non-empty")

    i, p = payloads["loss_function"]
    base = f"slices[{i}].payload"
    bubbles = check_triplet_bubbles(p, base)
    margin = p.get("margin_default")
    c.require(isinstance(margin, (int, float)) and margin >= 0,
              f"{base}.margin_default", "margin_default must be >= 0")
    c.require(p.get("margin_range") == [0, 5] or p.get("margin_range") == [0.0, 5.0],
              f"{base}.margin_range", f"margin_range must be [0, 5], got {p.get('margin_range')!r}")
    c.require(p.get("loss_kind") == "triplet", f"{base}.loss_kind",
              f"loss_kind must be 'triplet', got {p.get('loss_kind')!r}")
    initial = p.get("initial_loss")
    if bubbles and isinstance(margin, (int, float)) and isinstance(initial, (int, float)):
        expect = _triplet_loss_2d(
            (bubbles["anchor"]["x"], bubbles["anchor"]["y"]),
            (bubbles["positive"]["x"], bubbles["positive"]["y"]),
            (bubbles["negative"]["x"], bubbles["negative"]["y"]),
            float(margin),
        )
        c.require(
            abs(expect - initial) <= _RECOMPUTE_TOL,
            f"{base}.initial_loss",
            f"initial_loss {initial!r} does not re-derive from coords (expected {expect!r})",
        )

    i, p = payloads["training"]
    base = f"slices[{i}].payload"
    tframes = p.get("frames", [])
    curve = p.get("loss_curve", [])
    c.require(isinstance(tframes, list) and tframes, f"{base}.frames", "frames must be non-empty")
    c.require(
        isinstance(curve, list) and len(curve) == len(tframes),
        f"{base}.loss_curve",
        f"loss_curve length {len(curve)} != frames length {len(tframes)}",
    )
    bubble_counts = set()
    final_frame_coords = {}
    for j, frame in enumerate(tframes):
        fbase = f"{base}.frames[{j}]"
        c.require(isinstance(frame.get("epoch"), int), f"{fbase}.epoch", "epoch must be an integer")
        loss = frame.get("loss")
        c.require(isinstance(loss, (int, float)) and loss >= 0, f"{fbase}.loss",
                  "loss must be >= 0")
        bubbles = frame.get("bubbles", [])
        bubble_counts.add(len(bubbles))
        for b, bub in enumerate(bubbles):
            check_asset_ref(bub.get("id"), f"{fbase}.bubbles[{b}].id")
            check_coord(bub.get("x"), f"{fbase}.bubbles[{b}].x")
            check_coord(bub.get("y"), f"{fbase}.bubbles[{b}].y")
            c.require(bub.get("color") in palette_set, f"{fbase}.bubbles[{b}].color",
                      f"color {bub.get('color')!r} not in palette")
            c.require(isinstance(bub.get("class"), str), f"{fbase}.bubbles[{b}].class",
                      "class must be a string")
            if j == len(tframes) - 1 and isinstance(bub.get("id"), str):
                final_frame_coords[bub["id"]] = (bub.get("x", 0.0), bub.get("y", 0.0))
    c.require(len(bubble_counts) <= 1, f"{base}.frames",
              f"frames disagree on bubble count: {sorted(bubble_counts)}")

    i, p = payloads["inferencing"]
    base = f"slices[{i}].payload"
    check_asset_ref(p.get("query_asset_id"), f"{base}.query_asset_id")
    k = p.get("k")
    c.require(isinstance(k, int) and k >= 1, f"{base}.k", "k must be a positive integer")
    coords = p.get("query_coords")
    coords_ok = (
        isinstance(coords, list) and len(coords) == 2
        and all(isinstance(v, (int, float)) for v in coords)
    )
    c.require(coords_ok, f"{base}.query_coords", "query_coords must be [x, y]")
    neighbors = p.get("neighbors", [])
    if isinstance(k, int) and bubble_counts:
        expected_len = min(k, max(bubble_counts))
        c.require(len(neighbors) == expected_len, f"{base}.neighbors",
                  f"expected min(k, gallery) = {expected_len} neighbors, got {len(neighbors)}")
    prev = -math.inf
    for j, nb in enumerate(neighbors):
        check_asset_ref(nb.get("id"), f"{base}.neighbors[{j}].id")
        dist = nb.get("distance")
        if c.require(isinstance(dist, (int, float)) and dist >= 0,
                     f"{base}.neighbors[{j}].distance", "distance must be >= 0"):
            c.require(dist >= prev, f"{base}.neighbors[{j}].distance",
                      "distances must be non-decreasing")
            prev = dist
    radius = p.get("radius")
    if (
        coords_ok
        and neighbors
        and isinstance(radius, (int, float))
        and isinstance(neighbors[-1].get("id"), str)
        and neighbors[-1]["id"] in final_frame_coords
    ):
        kth = final_frame_coords[neighbors[-1]["id"]]
        expect = _dist2d((coords[0], coords[1]), kth)
        c.require(
            abs(expect - radius) <= _RECOMPUTE_TOL,
            f"{base}.radius",
            f"radius {radius!r} does not re-derive from frame coords (expected {expect!r})",
        )
    else:
        c.require(isinstance(radius, (int, float)) and radius >= 0, f"{base}.radius",
                  "radius must be >= 0")

    quiz = doc.get("quiz")
    if quiz is not None:
        if not c.require(isinstance(quiz, list) and len(quiz) == 7, "quiz",
                         "quiz must have exactly 7 questions"):
            return c.errors
        for j, q in enumerate(quiz):
            qbase = f"quiz[{j}]"
            c.require(isinstance(q.get("prompt"), str) and q["prompt"], f"{qbase}.prompt",
                      "prompt must be non-empty")
            choices = q.get("choices")
            if c.require(isinstance(choices, list) and len(choices) == 4, f"{qbase}.choices",
                         "need exactly 4 choices"):
                idx = q.get("answer_index")
                c.require(isinstance(idx, int) and 0 <= idx < 4, f"{qbase}.answer_index",
                          "answer_index must be in [0, 4)")
    return c.errors


def parity_fixtures(count: int = 20, seed: int = 20240214) -> dict:
    """Deterministic triplet-loss cases the UI must reproduce to 1e-9.

    Coordinates live in the bundle's [-1, 1]^2 space; margins sweep the
    slider range including both endpoints, so the hinge is exercised on
    both sides of the kink.
    """
    rng = SplitMix64(seed)
    cases = []
    for i in range(count):
        pts = {
            role: (rng.uniform() * 2.0 - 1.0, rng.uniform() * 2.0 - 1.0)
            for role in ("anchor", "positive", "negative")
        }
        margin = (MARGIN_RANGE[1] - MARGIN_RANGE[0]) * i / (count - 1) if count > 1 else 1.0
        loss = triplet_loss(
            Triplet(list(pts["anchor"]), list(pts["positive"]), list(pts["negative"])),
            Margin(margin),
        ).loss
        cases.append(
            {
                "anchor": [pts["anchor"][0], pts["anchor"][1]],
                "positive": [pts["positive"][0], pts["positive"][1]],
                "negative": [pts["negative"][0], pts["negative"][1]],
                "margin": margin,
                "loss": float(loss),
            }
        )
    return {"format_version": 1, "cases": cases}
