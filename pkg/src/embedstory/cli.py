"""Pipeline command line: dataset, train, project, infer, bundle, stats, serve.

Every artifact file embeds the dataset fingerprint and each stage checks
its inputs agree before writing anything, so a stale file from another
run fails loudly instead of producing a silently inconsistent bundle.

Exit codes: 0 success, 1 data error (bad input file, fingerprint
mismatch, invalid bundle), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from . import bundle as bundle_mod
from . import dataset as dataset_mod
from . import infer as infer_mod
from . import stats as stats_mod
from . import train as train_mod
from . import tsne as tsne_mod
from .net import DEFAULT_ARCHITECTURE, init_network


class DataError(Exception):
    """User-facing pipeline failure; maps to exit code 1."""


def _read_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"{path} is not valid JSON: {exc}") from exc


def _write_json(path: str, doc: dict) -> None:
    tmp = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(tmp)


def _check_fingerprints(named: list[tuple[str, str]]) -> str:
    """All (file, fingerprint) pairs must agree; returns the fingerprint."""
    first_file, first_fp = named[0]
    for path, fp in named[1:]:
        if fp != first_fp:
            raise DataError(
                f"dataset fingerprint mismatch: {first_file} has {first_fp}, "
                f"{path} has {fp}"
            )
    return first_fp


def _load_dataset(root: str) -> dataset_mod.LabeledDataset:
    try:
        return dataset_mod.load_directory(root)
    except ValueError as exc:
        raise DataError(str(exc)) from exc


def _query_id(query_path: str, data_root: str) -> str:
    """Dataset-relative id (`class/stem`) when the query is a gallery file."""
    stem = os.path.splitext(os.path.basename(query_path))[0]
    parent = os.path.dirname(os.path.abspath(query_path))
    if os.path.dirname(parent) == os.path.abspath(data_root):
        return f"{os.path.basename(parent)}/{stem}"
    return stem


def cmd_dataset_gen(args) -> int:
    config = dataset_mod.SyntheticConfig(
        num_classes=args.classes,
        per_class=args.per_class,
        image_size=args.size,
        noise_sigma=args.noise_sigma,
        seed=args.seed,
    )
    data = dataset_mod.generate_synthetic(config)
    manifest = dataset_mod.save_dataset(data, args.out)
    print(
        f"wrote {len(data.items)} images in {len(data.classes)} classes to {args.out} "
        f"(fingerprint {manifest['fingerprint']})"
    )
    return 0


def cmd_dataset_import(args) -> int:
    data = _load_dataset(args.root)
    manifest = dataset_mod.dataset_manifest(data)
    with open(os.path.join(args.root, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(
        f"imported {len(data.items)} images in {len(data.classes)} classes "
        f"(fingerprint {manifest['fingerprint']})"
    )
    return 0


def cmd_train(args) -> int:
    data = _load_dataset(args.data)
    first = data.items[0]
    input_shape = (first.height, first.width, first.channels)
    for img in data.items:
        if (img.height, img.width, img.channels) != input_shape:
            raise DataError(
                f"image {img.id!r} shape differs from {input_shape}; "
                "all images must share one shape"
            )
    hp = train_mod.HyperParams(
        epochs=args.epochs,
        batch_triplets=args.batch_triplets,
        learning_rate=args.learning_rate,
        margin=args.margin,
        loss_kind=args.loss,
        sampling=args.sampling,
        seed=args.seed,
    )
    net_seed = args.net_seed if args.net_seed is not None else args.seed + 1
    try:
        net = init_network(DEFAULT_ARCHITECTURE, input_shape, net_seed)
        run = train_mod.train(net, data, hp)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    _write_json(args.out, train_mod.run_to_json(run))
    final = run.loss_curve[-1]
    acc = train_mod.evaluate_retrieval(run.final_net, data)
    print(
        f"trained {hp.epochs} epochs: mean loss {run.loss_curve[0]:.4f} -> {final:.4f}, "
        f"top-1 retrieval {acc:.3f}, wrote {args.out}"
    )
    return 0


def cmd_project(args) -> int:
    run_doc = _read_json(args.run)
    try:
        run = train_mod.run_from_json(run_doc)
        config = tsne_mod.TsneConfig(
            perplexity=args.perplexity,
            iterations=args.iterations,
            learning_rate=args.learning_rate,
            early_exaggeration=args.early_exaggeration,
            exaggeration_iters=args.exaggeration_iters,
            momentum=args.momentum,
            seed=args.seed,
        )
        frames = tsne_mod.project_run(run, config)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    _write_json(
        args.out, tsne_mod.frames_to_json(frames, config, run.dataset_fingerprint)
    )
    print(f"projected {len(frames)} frames, wrote {args.out}")
    return 0


def cmd_infer(args) -> int:
    run_doc = _read_json(args.run)
    frames_doc = _read_json(args.frames)
    data = _load_dataset(args.data)
    fingerprint = _check_fingerprints(
        [
            (args.run, run_doc.get("dataset_fingerprint", "")),
            (args.frames, frames_doc.get("dataset_fingerprint", "")),
            (args.data, dataset_mod.dataset_fingerprint(data)),
        ]
    )
    try:
        run = train_mod.run_from_json(run_doc)
        frames, _, _ = tsne_mod.frames_from_json(frames_doc)
        with open(args.query, "rb") as fh:
            raw = fh.read()
        query = dataset_mod.read_ppm(raw, id=_query_id(args.query, args.data), label="")
        result = infer_mod.build_inference(run.final_net, data, frames, query, args.k)
    except OSError as exc:
        raise DataError(f"cannot read {args.query}: {exc}") from exc
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    _write_json(args.out, infer_mod.inference_to_json(result, fingerprint))
    top = result.neighbors[0]
    print(
        f"query {result.query_id!r}: nearest {top.id!r} at distance {top.distance:.4f}, "
        f"wrote {args.out}"
    )
    return 0


def cmd_bundle(args) -> int:
    run_doc = _read_json(args.run)
    frames_doc = _read_json(args.frames)
    inference_doc = _read_json(args.inference)
    data = _load_dataset(args.data)
    _check_fingerprints(
        [
            (args.run, run_doc.get("dataset_fingerprint", "")),
            (args.frames, frames_doc.get("dataset_fingerprint", "")),
            (args.inference, inference_doc.get("dataset_fingerprint", "")),
            (args.data, dataset_mod.dataset_fingerprint(data)),
        ]
    )
    try:
        run = train_mod.run_from_json(run_doc)
        frames, _, _ = tsne_mod.frames_from_json(frames_doc)
        inference = infer_mod.inference_from_json(inference_doc)
        query_image = None
        if args.query:
            with open(args.query, "rb") as fh:
                raw = fh.read()
            stem = os.path.splitext(os.path.basename(args.query))[0]
            query_image = dataset_mod.read_ppm(raw, id=stem, label="")
        narratives = _read_json(args.narratives) if args.narratives else None
        quiz = None if args.no_quiz else bundle_mod.default_quiz()
        doc = bundle_mod.build_bundle(
            run, frames, inference, data, narratives, quiz, query_image=query_image
        )
    except OSError as exc:
        raise DataError(str(exc)) from exc
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    errors = bundle_mod.validate_bundle(doc)
    if errors:
        for err in errors:
            print(f"bundle invalid at {err['path']}: {err['message']}", file=sys.stderr)
        raise DataError("built bundle failed validation")
    payload = bundle_mod.serialize_bundle(doc)
    with open(args.out, "wb") as fh:
        fh.write(payload)
    print(f"wrote bundle ({len(payload)} bytes, {len(doc['assets'])} assets) to {args.out}")
    return 0


def cmd_parity(args) -> int:
    doc = bundle_mod.parity_fixtures(count=args.count, seed=args.seed)
    _write_json(args.out, doc)
    print(f"wrote {len(doc['cases'])} parity cases to {args.out}")
    return 0


_STATS_ROW = "{:<16} {:>3} {:>9} {:>10} {:>14} {:>9}"


def cmd_stats(args) -> int:
    if args.csv:
        try:
            with open(args.csv, "r", encoding="utf-8") as fh:
                groups = stats_mod.parse_csv(fh.read())
        except OSError as exc:
            raise DataError(f"cannot read {args.csv}: {exc}") from exc
        except ValueError as exc:
            raise DataError(str(exc)) from exc
    else:
        groups = stats_mod.builtin_study_data()
    report = stats_mod.study_report(groups)

    print("Group summaries")
    print(_STATS_ROW.format("group", "N", "pre mean", "post mean", "std. deviation", "s.e. mean"))
    for name, g in report["groups"].items():
        print(
            _STATS_ROW.format(
                name, g["n"], f"{g['pre_mean']:.2f}", f"{g['post_mean']:.2f}",
                f"{g['post_sd']:.2f}", f"{g['post_se']:.2f}",
            )
        )
    lev = report["levene"]
    print("\nLevene's test for equality of variances")
    print(f"  F = {lev['F']:.2f}, p = {lev['p']:.3f}")
    for label, key in (
        ("equal variances assumed", "t_test_pooled"),
        ("equal variances not assumed", "t_test_welch"),
    ):
        t = report[key]
        lo, hi = t["ci95"]
        print(f"\nt-test for equality of means ({label})")
        print(
            f"  t = {t['t']:.2f}, df = {t['df']:.2f}, p (2-tailed) = {t['p_two_tailed']:.3g}\n"
            f"  mean difference = {t['mean_difference']:.2f}, "
            f"s.e. difference = {t['se_difference']:.2f}, "
            f"95% CI [{lo:.2f}, {hi:.2f}]"
        )
    if args.out:
        _write_json(args.out, report)
        print(f"\nwrote report to {args.out}")
    return 0


class _BundleHandler(BaseHTTPRequestHandler):
    routes: dict[str, tuple[bytes, str]] = {}
    ui_dir: str | None = None

    _CONTENT_TYPES = {
        ".html": "text/html; charset=utf-8",
        ".js": "application/javascript; charset=utf-8",
        ".mjs": "application/javascript; charset=utf-8",
        ".css": "text/css; charset=utf-8",
        ".json": "application/json",
        ".svg": "image/svg+xml",
        ".png": "image/png",
        ".ico": "image/x-icon",
        ".ppm": "image/x-portable-pixmap",
        ".txt": "text/plain; charset=utf-8",
        ".map": "application/json",
    }

    def log_message(self, fmt, *log_args):  # keep test output quiet
        pass

    def _resolve(self) -> tuple[bytes, str] | None:
        path = self.path.split("?", 1)[0].split("#", 1)[0]
        if path in self.routes:
            return self.routes[path]
        if self.ui_dir is None:
            return None
        rel = path.lstrip("/") or "index.html"
        full = os.path.normpath(os.path.join(self.ui_dir, rel))
        if not full.startswith(os.path.abspath(self.ui_dir)):
            return None
        if os.path.isdir(full):
            full = os.path.join(full, "index.html")
        if not os.path.isfile(full):
            return None
        with open(full, "rb") as fh:
            body = fh.read()
        ext = os.path.splitext(full)[1].lower()
        return body, self._CONTENT_TYPES.get(ext, "application/octet-stream")

    def _respond(self, include_body: bool) -> None:
        found = self._resolve()
        if found is None:
            self.send_error(404, "not found")
            return
        body, ctype = found
        self.send_response(200)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        if include_body:
            self.wfile.write(body)

    def do_GET(self):
        self._respond(include_body=True)

    def do_HEAD(self):
        self._respond(include_body=False)

    def _method_not_allowed(self):
        self.send_error(405, "method not allowed")

    do_POST = _method_not_allowed
    do_PUT = _method_not_allowed
    do_DELETE = _method_not_allowed
    do_PATCH = _method_not_allowed


def make_server(
    bundle_bytes: bytes,
    ui_dir: str | None,
    port: int,
    parity_bytes: bytes | None = None,
) -> ThreadingHTTPServer:
    """Static server exposing /bundle.json, /parity.json, and the UI files."""
    if parity_bytes is None:
        parity_bytes = (
            json.dumps(bundle_mod.parity_fixtures(), sort_keys=True) + "\n"
        ).encode("utf-8")
    resolved_ui_dir = os.path.abspath(ui_dir) if ui_dir else None

    class Handler(_BundleHandler):
        routes = {
            "/bundle.json": (bundle_bytes, "application/json"),
            "/parity.json": (parity_bytes, "application/json"),
        }
        ui_dir = resolved_ui_dir

    return ThreadingHTTPServer(("127.0.0.1", port), Handler)


def cmd_serve(args) -> int:
    try:
        with open(args.bundle, "rb") as fh:
            bundle_bytes = fh.read()
    except OSError as exc:
        raise DataError(f"cannot read {args.bundle}: {exc}") from exc
    try:
        errors = bundle_mod.validate_bundle(bundle_bytes)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    if errors:
        for err in errors:
            print(f"bundle invalid at {err['path']}: {err['message']}", file=sys.stderr)
        raise DataError(f"refusing to serve invalid bundle {args.bundle}")
    parity_bytes = None
    if args.parity:
        try:
            with open(args.parity, "rb") as fh:
                parity_bytes = fh.read()
        except OSError as exc:
            raise DataError(f"cannot read {args.parity}: {exc}") from exc
    try:
        server = make_server(bundle_bytes, args.ui_dir, args.port, parity_bytes)
    except OSError as exc:
        raise DataError(f"cannot bind port {args.port}: {exc}") from exc
    print(f"serving on http://127.0.0.1:{args.port}/ (ctrl-c to stop)")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embedstory",
        description="train a Siamese embedding net and compile a scrollytelling bundle",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_dataset = sub.add_parser("dataset", help="generate or import a labeled image dataset")
    dsub = p_dataset.add_subparsers(dest="dataset_command", required=True)
    p_gen = dsub.add_parser("gen", help="write a synthetic PPM dataset")
    p_gen.add_argument("--classes", type=int, default=4)
    p_gen.add_argument("--per-class", type=int, default=25)
    p_gen.add_argument("--size", type=int, default=16)
    p_gen.add_argument("--noise-sigma", type=float, default=10.0)
    p_gen.add_argument("--seed", type=int, default=42)
    p_gen.add_argument("--out", required=True)
    p_gen.set_defaults(func=cmd_dataset_gen)
    p_imp = dsub.add_parser("import", help="validate a dataset directory and write its manifest")
    p_imp.add_argument("--root", required=True)
    p_imp.set_defaults(func=cmd_dataset_import)

    p_train = sub.add_parser("train", help="train the embedding network")
    p_train.add_argument("--data", required=True)
    p_train.add_argument("--out", required=True)
    p_train.add_argument("--epochs", type=int, default=30)
    p_train.add_argument("--batch-triplets", type=int, default=64)
    p_train.add_argument("--learning-rate", type=float, default=0.05)
    p_train.add_argument("--margin", type=float, default=1.0)
    p_train.add_argument("--loss", choices=train_mod.LOSS_KINDS, default="triplet")
    p_train.add_argument("--sampling", choices=train_mod.SAMPLING_STRATEGIES, default="random")
    p_train.add_argument("--seed", type=int, default=7)
    p_train.add_argument("--net-seed", type=int, default=None,
                         help="weight init seed (default: --seed + 1)")
    p_train.set_defaults(func=cmd_train)

    p_project = sub.add_parser("project", help="project per-epoch snapshots to 2D frames")
    p_project.add_argument("--run", required=True)
    p_project.add_argument("--out", required=True)
    p_project.add_argument("--perplexity", type=float, default=15.0)
    p_project.add_argument("--iterations", type=int, default=500)
    p_project.add_argument("--learning-rate", type=float, default=100.0)
    p_project.add_argument("--early-exaggeration", type=float, default=4.0)
    p_project.add_argument("--exaggeration-iters", type=int, default=100)
    p_project.add_argument("--momentum", type=float, default=0.8)
    p_project.add_argument("--seed", type=int, default=0)
    p_project.set_defaults(func=cmd_project)

    p_infer = sub.add_parser("infer", help="rank gallery neighbors for a query image")
    p_infer.add_argument("--run", required=True)
    p_infer.add_argument("--frames", required=True)
    p_infer.add_argument("--data", required=True)
    p_infer.add_argument("--query", required=True)
    p_infer.add_argument("--k", type=int, default=5)
    p_infer.add_argument("--out", required=True)
    p_infer.set_defaults(func=cmd_infer)

    p_bundle = sub.add_parser("bundle", help="compile the story bundle")
    p_bundle.add_argument("--run", required=True)
    p_bundle.add_argument("--frames", required=True)
    p_bundle.add_argument("--inference", required=True)
    p_bundle.add_argument("--data", required=True)
    p_bundle.add_argument("--query", default=None,
                          help="query PPM (optional when the query is a gallery item)")
    p_bundle.add_argument("--narratives", default=None,
                          help="JSON narrative pack (default: packaged text)")
    p_bundle.add_argument("--no-quiz", action="store_true")
    p_bundle.add_argument("--out", required=True)
    p_bundle.set_defaults(func=cmd_bundle)

    p_parity = sub.add_parser("parity", help="write the UI loss-parity fixture")
    p_parity.add_argument("--count", type=int, default=20)
    p_parity.add_argument("--seed", type=int, default=20240214)
    p_parity.add_argument("--out", required=True)
    p_parity.set_defaults(func=cmd_parity)

    p_stats = sub.add_parser("stats", help="reproduce the study statistics")
    p_stats.add_argument("--csv", default=None,
                         help="CSV with group,pid,pre,post (default: bundled study)")
    p_stats.add_argument("--out", default=None, help="also write the report as JSON")
    p_stats.set_defaults(func=cmd_stats)

    p_serve = sub.add_parser("serve", help="serve the UI and the bundle over HTTP")
    p_serve.add_argument("--bundle", required=True)
    p_serve.add_argument("--ui-dir", default=None)
    p_serve.add_argument("--parity", default=None)
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
