import numpy as np
import pytest

from embedstory.dataset import Image
from embedstory.net import (
    DEFAULT_ARCHITECTURE,
    DEFAULT_INPUT_SHAPE,
    ConvSpec,
    EmbeddingNet,
    FcSpec,
    NetArchitecture,
    apply_gradients,
    backward,
    forward,
    from_checkpoint,
    init_network,
    to_checkpoint,
)
from embedstory.rng import SplitMix64

SMALL_ARCH = NetArchitecture((ConvSpec(4, 3),), (FcSpec(5, "linear"),))
SMALL_SHAPE = (6, 6, 3)


def random_batch(shape, n, seed):
    rng = SplitMix64(seed)
    return rng.normals((n, *shape)) * 0.4 + 0.5


def finite_diff_max_rel_error(net, x, upstream, h=1e-5):
    _, cache = forward(net, x)
    grads = backward(net, cache, upstream)

    def scalar():
        emb, _ = forward(net, x)
        return float(np.sum(upstream * emb))

    worst = 0.0
    for li, p in enumerate(net.params):
        for key in ("w", "b"):
            it = np.nditer(p[key], flags=["multi_index"])
            for _ in it:
                idx = it.multi_index
                orig = p[key][idx]
                p[key][idx] = orig + h
                fp = scalar()
                p[key][idx] = orig - h
                fm = scalar()
                p[key][idx] = orig
                numeric = (fp - fm) / (2 * h)
                analytic = grads[li][key][idx]
                denom = max(abs(numeric), abs(analytic), 1e-8)
                worst = max(worst, abs(numeric - analytic) / denom)
    return worst


class TestArchitecture:
    def test_default_shape_table(self):
        # hand-derived: 16x16x3 --conv3--> 14x14x8 --pool--> 7x7x8
        #               --conv3--> 5x5x16 --pool--> 2x2x16 --flatten--> 64 --fc--> 32
        shapes = DEFAULT_ARCHITECTURE.layer_shapes(DEFAULT_INPUT_SHAPE)
        assert shapes[0]["conv_out"] == (14, 14, 8)
        assert shapes[0]["pool_out"] == (7, 7, 8)
        assert shapes[1]["conv_out"] == (5, 5, 16)
        assert shapes[1]["pool_out"] == (2, 2, 16)
        assert shapes[2] == {"kind": "fc", "in_dim": 64, "out_dim": 32}
        net = init_network(DEFAULT_ARCHITECTURE, DEFAULT_INPUT_SHAPE, 0)
        assert net.params[0]["w"].shape == (8, 3, 3, 3)
        assert net.params[1]["w"].shape == (16, 3, 3, 8)
        assert net.params[2]["w"].shape == (64, 32)

    def test_spatial_underflow_rejected(self):
        arch = NetArchitecture((ConvSpec(2, 5),), (FcSpec(3, "linear"),))
        with pytest.raises(ValueError, match="underflow"):
            init_network(arch, (4, 4, 1), 0)

    def test_final_layer_must_be_linear(self):
        with pytest.raises(ValueError, match="linear"):
            NetArchitecture((), (FcSpec(8, "relu"),))


class TestInit:
    def test_deterministic_per_seed(self):
        a = init_network(SMALL_ARCH, SMALL_SHAPE, 11)
        b = init_network(SMALL_ARCH, SMALL_SHAPE, 11)
        for pa, pb in zip(a.params, b.params):
            assert np.array_equal(pa["w"], pb["w"])
            assert np.array_equal(pa["b"], pb["b"])
        c = init_network(SMALL_ARCH, SMALL_SHAPE, 12)
        assert not np.array_equal(a.params[0]["w"], c.params[0]["w"])

    def test_biases_zero(self):
        net = init_network(SMALL_ARCH, SMALL_SHAPE, 11)
        for p in net.params:
            assert not p["b"].any()

    def test_he_variance_scale(self):
        arch = NetArchitecture((), (FcSpec(64, "linear"),))
        net = init_network(arch, (8, 8, 3), 2)
        w = net.params[0]["w"]
        assert abs(w.var() - 2.0 / 192) < 0.15 * (2.0 / 192)


class TestForward:
    def test_zero_net_gives_zero_embeddings(self):
        zero = EmbeddingNet(
            SMALL_ARCH, SMALL_SHAPE,
            [{"w": np.zeros_like(p["w"]), "b": np.zeros_like(p["b"])}
             for p in init_network(SMALL_ARCH, SMALL_SHAPE, 0).params],
        )
        emb, _ = forward(zero, random_batch(SMALL_SHAPE, 3, 1))
        assert not emb.any()

    def test_duplicate_images_identical_rows(self):
        net = init_network(SMALL_ARCH, SMALL_SHAPE, 4)
        x = random_batch(SMALL_SHAPE, 2, 2)
        both = np.concatenate([x, x[:1]], axis=0)
        emb, _ = forward(net, both)
        assert np.array_equal(emb[0], emb[2])

    def test_output_shape(self):
        net = init_network(DEFAULT_ARCHITECTURE, DEFAULT_INPUT_SHAPE, 0)
        emb, _ = forward(net, random_batch(DEFAULT_INPUT_SHAPE, 7, 3))
        assert emb.shape == (7, 32)

    def test_permuting_batch_permutes_rows(self):
        net = init_network(SMALL_ARCH, SMALL_SHAPE, 4)
        x = random_batch(SMALL_SHAPE, 5, 6)
        perm = [3, 0, 4, 1, 2]
        emb, _ = forward(net, x)
        emb_p, _ = forward(net, x[perm])
        assert np.array_equal(emb_p, emb[perm])

    def test_accepts_images_and_scales_by_255(self):
        net = init_network(SMALL_ARCH, SMALL_SHAPE, 4)
        img = Image(6, 6, 3, bytes(range(108)), id="a", label="x")
        emb_img, _ = forward(net, [img])
        arr = np.frombuffer(bytes(range(108)), dtype=np.uint8).reshape(1, 6, 6, 3) / 255.0
        emb_arr, _ = forward(net, arr)
        assert np.allclose(emb_img, emb_arr)

    def test_shape_mismatch_rejected(self):
        net = init_network(SMALL_ARCH, SMALL_SHAPE, 4)
        with pytest.raises(ValueError, match="match"):
            forward(net, np.zeros((2, 5, 5, 3)))


class TestBackward:
    def test_zero_upstream_zero_grads(self):
        net = init_network(SMALL_ARCH, SMALL_SHAPE, 5)
        x = random_batch(SMALL_SHAPE, 2, 7)
        _, cache = forward(net, x)
        grads = backward(net, cache, np.zeros((2, 5)))
        assert all(not g["w"].any() and not g["b"].any() for g in grads)

    def test_gradients_linear_in_upstream(self):
        net = init_network(SMALL_ARCH, SMALL_SHAPE, 5)
        x = random_batch(SMALL_SHAPE, 2, 8)
        _, cache = forward(net, x)
        up = SplitMix64(9).normals((2, 5))
        g1 = backward(net, cache, up)
        g2 = backward(net, cache, 2.0 * up)
        for a, b in zip(g1, g2):
            assert np.allclose(2.0 * a["w"], b["w"])
            assert np.allclose(2.0 * a["b"], b["b"])

    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_finite_difference_check(self, seed):
        net = init_network(SMALL_ARCH, SMALL_SHAPE, seed)
        assert net.parameter_count() <= 500
        x = random_batch(SMALL_SHAPE, 2, seed + 100)
        up = SplitMix64(seed + 200).normals((2, 5))
        assert finite_diff_max_rel_error(net, x, up) <= 1e-4

    def test_relu_dead_zone_blocks_gradient(self):
        # drive one conv channel's pre-activations strictly negative via a
        # large negative bias: its weight gradients must vanish
        net = init_network(SMALL_ARCH, SMALL_SHAPE, 6)
        net.params[0]["b"][0] = -100.0
        x = random_batch(SMALL_SHAPE, 2, 12)
        _, cache = forward(net, x)
        assert np.all(cache[0]["z"][..., 0] < 0.0)
        grads = backward(net, cache, np.ones((2, 5)))
        assert not grads[0]["w"][0].any()
        assert grads[0]["b"][0] == 0.0

    def test_upstream_shape_mismatch_rejected(self):
        net = init_network(SMALL_ARCH, SMALL_SHAPE, 5)
        _, cache = forward(net, random_batch(SMALL_SHAPE, 2, 7))
        with pytest.raises(ValueError, match="upstream"):
            backward(net, cache, np.zeros((3, 5)))


class TestApplyGradients:
    def test_zero_learning_rate_no_change(self):
        net = init_network(SMALL_ARCH, SMALL_SHAPE, 5)
        x = random_batch(SMALL_SHAPE, 2, 7)
        _, cache = forward(net, x)
        grads = backward(net, cache, np.ones((2, 5)))
        stepped = apply_gradients(net, grads, 0.0)
        for p, q in zip(net.params, stepped.params):
            assert np.array_equal(p["w"], q["w"])

    def test_zero_grads_no_change(self):
        net = init_network(SMALL_ARCH, SMALL_SHAPE, 5)
        zeros = [{"w": np.zeros_like(p["w"]), "b": np.zeros_like(p["b"])} for p in net.params]
        stepped = apply_gradients(net, zeros, 0.5)
        for p, q in zip(net.params, stepped.params):
            assert np.array_equal(p["w"], q["w"])

    def test_scalar_sgd_arithmetic(self):
        arch = NetArchitecture((), (FcSpec(1, "linear"),))
        net = EmbeddingNet(arch, (1, 1, 1), [{"w": np.array([[1.0]]), "b": np.array([0.0])}])
        stepped = apply_gradients(net, [{"w": np.array([[0.5]]), "b": np.array([0.0])}], 0.1)
        assert stepped.params[0]["w"][0, 0] == pytest.approx(0.95)


class TestCheckpoint:
    def test_round_trip(self):
        net = init_network(SMALL_ARCH, SMALL_SHAPE, 5)
        doc = to_checkpoint(net)
        assert doc["format_version"] == 1
        assert set(doc) == {"format_version", "architecture", "input_shape", "parameters"}
        again = from_checkpoint(doc)
        x = random_batch(SMALL_SHAPE, 2, 3)
        a, _ = forward(net, x)
        b, _ = forward(again, x)
        assert np.array_equal(a, b)

    def test_bad_version_rejected(self):
        net = init_network(SMALL_ARCH, SMALL_SHAPE, 5)
        doc = to_checkpoint(net)
        doc["format_version"] = 2
        with pytest.raises(ValueError, match="format_version"):
            from_checkpoint(doc)
