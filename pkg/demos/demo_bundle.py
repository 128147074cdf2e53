"""Compile the six-slice story bundle and validate it."""

import json

from embedstory.bundle import build_bundle, default_quiz, serialize_bundle, validate_bundle
from embedstory.dataset import SyntheticConfig, generate_synthetic
from embedstory.infer import build_inference
from embedstory.net import DEFAULT_ARCHITECTURE, DEFAULT_INPUT_SHAPE, init_network
from embedstory.train import HyperParams, train
from embedstory.tsne import TsneConfig, project_run

data = generate_synthetic(SyntheticConfig(seed=42))
net = init_network(DEFAULT_ARCHITECTURE, DEFAULT_INPUT_SHAPE, seed=43)
run = train(net, data, HyperParams(epochs=15, seed=7))
frames = project_run(run, TsneConfig(iterations=300, seed=0))
inference = build_inference(run.final_net, data, frames, data.items[0], k=5)

bundle = build_bundle(run, frames, inference, data, quiz=default_quiz())
errors = validate_bundle(bundle)
print("validation errors:", errors or "none")

for entry in bundle["slices"]:
    payload = entry["payload"]
    keys = ", ".join(sorted(payload))
    print(f"slice {entry['id']:20s} fields: {keys}")

blob = serialize_bundle(bundle)
with open("bundle_demo.json", "wb") as fh:
    fh.write(blob)
print(f"wrote bundle_demo.json ({len(blob)} bytes, {len(bundle['assets'])} assets)")
print("quiz question 1:", json.dumps(bundle["quiz"][0], indent=2))
