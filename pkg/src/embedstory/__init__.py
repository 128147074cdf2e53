"""Metric-learning scrollytelling engine.

Trains a shared-weight convolutional embedding network with triplet or
contrastive loss, projects per-epoch embeddings to temporally coherent
2D frames with t-SNE, runs nearest-neighbor inference, reproduces the
bundled study statistics, and compiles everything into a six-slice
story bundle for the companion scrollytelling UI.
"""

__version__ = "0.1.0"
