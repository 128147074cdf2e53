"""Project per-epoch embeddings to 2D and check the layout quality."""

import numpy as np

from embedstory.dataset import SyntheticConfig, generate_synthetic
from embedstory.net import DEFAULT_ARCHITECTURE, DEFAULT_INPUT_SHAPE, init_network
from embedstory.train import HyperParams, train
from embedstory.tsne import TsneConfig, project_run

data = generate_synthetic(SyntheticConfig(seed=42))
net = init_network(DEFAULT_ARCHITECTURE, DEFAULT_INPUT_SHAPE, seed=43)
run = train(net, data, HyperParams(epochs=10, seed=7))

frames = project_run(run, TsneConfig(perplexity=15, iterations=500, seed=0))
print(f"{len(frames)} frames, one per snapshot")
print("epoch   kl        max|coord|   mean step vs previous frame")
prev = None
for frame in frames:
    step = "" if prev is None else f"{np.linalg.norm(frame.coords - prev, axis=1).mean():.4f}"
    print(f"{frame.epoch:5d}   {frame.kl:.4f}    {np.abs(frame.coords).max():.4f}       {step}")
    prev = frame.coords

# classes should occupy separate regions by the last frame
labels = np.array([data.classes.index(l) for l in data.labels()])
final = frames[-1].coords
for k, cls in enumerate(data.classes):
    center = final[labels == k].mean(axis=0)
    print(f"{cls}: cluster center ({center[0]:+.2f}, {center[1]:+.2f})")
