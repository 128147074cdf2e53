"""Train the Siamese embedding net and watch the triplet loss fall."""

from embedstory.dataset import SyntheticConfig, generate_synthetic
from embedstory.net import DEFAULT_ARCHITECTURE, DEFAULT_INPUT_SHAPE, init_network
from embedstory.train import HyperParams, evaluate_retrieval, train

data = generate_synthetic(SyntheticConfig(seed=42))
net = init_network(DEFAULT_ARCHITECTURE, DEFAULT_INPUT_SHAPE, seed=43)
hp = HyperParams(epochs=30, batch_triplets=64, learning_rate=0.05, margin=1.0, seed=7)

print("untrained retrieval:", evaluate_retrieval(net, data))
run = train(net, data, hp)

print("epoch  mean batch loss")
for snap in run.snapshots:
    bar = "#" * int(60 * snap.mean_loss / max(run.loss_curve))
    print(f"{snap.epoch:5d}  {snap.mean_loss:8.4f}  {bar}")

print("trained retrieval:", evaluate_retrieval(run.final_net, data))
print("snapshots recorded:", len(run.snapshots), "of", hp.epochs, "epochs + start")
