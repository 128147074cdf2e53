"""Embed a query image and rank its nearest gallery neighbors."""

from embedstory.dataset import SyntheticConfig, generate_synthetic
from embedstory.infer import build_inference
from embedstory.net import DEFAULT_ARCHITECTURE, DEFAULT_INPUT_SHAPE, init_network
from embedstory.train import HyperParams, train
from embedstory.tsne import TsneConfig, project_run

data = generate_synthetic(SyntheticConfig(seed=42))
net = init_network(DEFAULT_ARCHITECTURE, DEFAULT_INPUT_SHAPE, seed=43)
run = train(net, data, HyperParams(epochs=15, seed=7))
frames = project_run(run, TsneConfig(iterations=300, seed=0))

query = data.items[30]  # a gallery image re-used as the "new" test image
result = build_inference(run.final_net, data, frames, query, k=5)

print(f"query {result.query_id} (true class {query.label})")
print(f"placed at ({result.query_coords_2d[0]:+.3f}, {result.query_coords_2d[1]:+.3f}),"
      f" radius {result.radius_2d:.3f} frame units")
print("rank  id            distance   bar")
for rank, nb in enumerate(result.neighbors, start=1):
    bar = "#" * max(1, int(25 * nb.distance / max(n.distance for n in result.neighbors) + 1e-9)) \
        if nb.distance > 0 else ""
    print(f"{rank:4d}  {nb.id:12s}  {nb.distance:8.4f}   {bar}")
