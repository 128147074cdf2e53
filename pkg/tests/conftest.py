"""Shared pipeline fixtures.

The trained run, projection frames, and bundle are expensive enough to
build once per session; every consumer treats them as read-only.
"""

import pytest

from embedstory import bundle as bundle_mod
from embedstory import dataset, infer, net, train, tsne

NET_SEED = 43
SAMPLER_SEED = 7


@pytest.fixture(scope="session")
def synthetic_dataset():
    return dataset.generate_synthetic(dataset.SyntheticConfig())


@pytest.fixture(scope="session")
def trained_run(synthetic_dataset):
    start = net.init_network(net.DEFAULT_ARCHITECTURE, net.DEFAULT_INPUT_SHAPE, NET_SEED)
    hp = train.HyperParams(
        epochs=30, batch_triplets=64, learning_rate=0.05, margin=1.0, seed=SAMPLER_SEED
    )
    return train.train(start, synthetic_dataset, hp)


@pytest.fixture(scope="session")
def projection_frames(trained_run):
    return tsne.project_run(trained_run, tsne.TsneConfig())


@pytest.fixture(scope="session")
def inference_result(trained_run, projection_frames, synthetic_dataset):
    query = synthetic_dataset.items[0]
    return infer.build_inference(
        trained_run.final_net, synthetic_dataset, projection_frames, query, k=5
    )


@pytest.fixture(scope="session")
def story_bundle(trained_run, projection_frames, inference_result, synthetic_dataset):
    return bundle_mod.build_bundle(
        trained_run,
        projection_frames,
        inference_result,
        synthetic_dataset,
        quiz=bundle_mod.default_quiz(),
    )
