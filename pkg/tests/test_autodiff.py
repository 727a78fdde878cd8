import numpy as np
import pytest
from retsynth.autodiff import (
    Graph,
    RunningStats,
    Tensor,
    activation,
    batchnorm2d,
    conv2d,
    conv_transpose2d,
    grad_check,
    linear,
    losses,
    no_grad,
    pool_and_resize,
    precision,
    softmax,
)
from retsynth.networks import build_discriminator
from retsynth.shared.errors import (
    ConfigurationError,
    ContractError,
    DegenerateInputError,
    DimensionError,
    LabelError,
    NumericError,
)

LAYER_TOL = 1e-4
NETWORK_TOL = 1e-3


def leaf(rng, *shape):
    return Tensor(rng.normal(size=shape), requires_grad=True)


def weighted_sum(out_fn, rng):
    """loss = sum(out * r) with a fixed random r, so no gradient is trivially zero"""
    weights = {}

    def loss():
        out = out_fn()
        if "r" not in weights:
            weights["r"] = Tensor(rng.normal(size=out.shape))
        return (out * weights["r"]).sum()

    return loss


def test_scalar_arithmetic_gradients():
    x = Tensor([2.0, 3.0], requires_grad=True)
    y = Tensor([4.0, 5.0], requires_grad=True)
    loss = (x * y + x * 2.0 - y).sum()
    loss.backward()
    np.testing.assert_allclose(x.grad, [6.0, 7.0])
    np.testing.assert_allclose(y.grad, [1.0, 2.0])


def test_backward_accumulates_until_zeroed():
    x = Tensor([1.0, -2.0], requires_grad=True)
    (x * 3.0).sum().backward()
    (x * 3.0).sum().backward()
    np.testing.assert_allclose(x.grad, [6.0, 6.0])
    x.zero_grad()
    assert x.grad is None


def test_shared_subgraph_is_visited_once():
    x = Tensor([1.5], requires_grad=True)
    shared = x * x
    loss = (shared + shared).sum()
    graph = Graph.from_output(loss)
    assert len({id(node) for node in graph.nodes}) == len(graph.nodes)
    loss.backward()
    np.testing.assert_allclose(x.grad, [6.0])


def test_backward_needs_a_scalar():
    x = Tensor(np.ones(3), requires_grad=True)
    with pytest.raises(ContractError):
        (x * 2.0).backward()


def test_non_finite_values_are_rejected():
    with pytest.raises(NumericError):
        Tensor([np.nan])
    with pytest.raises(NumericError):
        Tensor([0.0, 1.0], requires_grad=True).log()


def test_no_grad_records_nothing():
    x = Tensor([1.0], requires_grad=True)
    with no_grad():
        y = x * 2.0
    assert y.creator is None and not y.requires_grad


def test_precision_switches_leaf_dtype():
    assert Tensor([1.0]).dtype == np.float32
    with precision(np.float64):
        assert Tensor([1.0]).dtype == np.float64
    assert Tensor([1.0]).dtype == np.float32
    with pytest.raises(ContractError):
        with precision(np.int32):
            pass


def test_conv2d_output_shape_and_errors(rng):
    x = leaf(rng, 2, 3, 8, 8)
    w = leaf(rng, 5, 3, 4, 4)
    assert conv2d(x, w, stride=2, pad=1).shape == (2, 5, 4, 4)
    with pytest.raises(DimensionError):
        conv2d(x, leaf(rng, 5, 2, 3, 3))
    with pytest.raises(ConfigurationError):
        conv2d(leaf(rng, 1, 3, 2, 2), w)


def test_conv_transpose_is_the_adjoint_of_conv(rng):
    x = rng.normal(size=(1, 3, 6, 6))
    y = rng.normal(size=(1, 4, 3, 3))
    w = rng.normal(size=(4, 3, 4, 4))
    with precision(np.float64):
        forward = conv2d(Tensor(x), Tensor(w), stride=2, pad=1).numpy()
        adjoint = conv_transpose2d(Tensor(y), Tensor(w), stride=2, pad=1).numpy()
    assert adjoint.shape == x.shape
    np.testing.assert_allclose(np.sum(forward * y), np.sum(x * adjoint), rtol=1e-10)


def test_conv2d_gradients(rng):
    x, w, b = leaf(rng, 2, 3, 5, 5), leaf(rng, 4, 3, 3, 3), leaf(rng, 4)
    loss = weighted_sum(lambda: conv2d(x, w, b, stride=2, pad=1), rng)
    assert grad_check({"x": x, "w": w, "b": b}, loss) < LAYER_TOL


def test_conv_transpose2d_gradients(rng):
    x, w, b = leaf(rng, 2, 3, 3, 3), leaf(rng, 3, 2, 4, 4), leaf(rng, 2)
    loss = weighted_sum(lambda: conv_transpose2d(x, w, b, stride=2, pad=1), rng)
    assert grad_check({"x": x, "w": w, "b": b}, loss) < LAYER_TOL


@pytest.mark.parametrize("mode", ["train", "eval"])
def test_batchnorm_gradients(rng, mode):
    x, gamma, beta = leaf(rng, 4, 3, 3, 3), leaf(rng, 3), leaf(rng, 3)
    running = RunningStats.fresh(3)
    loss = weighted_sum(lambda: batchnorm2d(x, gamma, beta, running, mode=mode), rng)
    assert grad_check({"x": x, "gamma": gamma, "beta": beta}, loss) < LAYER_TOL


def test_batchnorm_running_stats_and_degenerate_batch(rng):
    running = RunningStats.fresh(2)
    x = Tensor(rng.normal(3.0, 1.0, size=(8, 2, 4, 4)))
    batchnorm2d(x, Tensor(np.ones(2)), Tensor(np.zeros(2)), running, momentum=0.5)
    assert np.all(running.mean > 1.0)
    with pytest.raises(DegenerateInputError):
        batchnorm2d(Tensor(np.ones((1, 2, 1, 1))), Tensor(np.ones(2)), Tensor(np.zeros(2)), running)


@pytest.mark.parametrize("kind", ["relu", "leaky_relu", "tanh", "sigmoid"])
def test_activation_gradients(rng, kind):
    x = leaf(rng, 3, 7)
    loss = weighted_sum(lambda: activation(x, kind), rng)
    assert grad_check({"x": x}, loss) < LAYER_TOL


@pytest.mark.parametrize("kind", ["avg_pool2", "global_avg", "nearest_upsample2"])
def test_pool_and_resize_gradients(rng, kind):
    x = leaf(rng, 2, 3, 4, 4)
    loss = weighted_sum(lambda: pool_and_resize(x, kind), rng)
    assert grad_check({"x": x}, loss) < LAYER_TOL


def test_avg_pool_needs_even_dims(rng):
    with pytest.raises(DimensionError, match="axes 2, 3"):
        pool_and_resize(leaf(rng, 1, 1, 5, 4), "avg_pool2")


def test_linear_gradients(rng):
    x, w, b = leaf(rng, 4, 6), leaf(rng, 3, 6), leaf(rng, 3)
    loss = weighted_sum(lambda: linear(x, w, b), rng)
    assert grad_check({"x": x, "w": w, "b": b}, loss) < LAYER_TOL


def test_loss_gradients(rng):
    logits = leaf(rng, 5, 4)
    labels = np.array([0, 3, 1, 2, 3])
    assert grad_check({"logits": logits}, lambda: losses(logits, labels, "softmax_xent")) < LAYER_TOL

    probs = Tensor(rng.uniform(0.1, 0.9, size=(6, 1)), requires_grad=True)
    targets = (rng.random((6, 1)) > 0.5).astype(float)
    assert grad_check({"p": probs}, lambda: losses(probs, targets, "bce")) < LAYER_TOL

    pred = leaf(rng, 3, 4)
    target = rng.normal(size=(3, 4))
    assert grad_check({"pred": pred}, lambda: losses(pred, target, "l2")) < LAYER_TOL


def test_loss_errors(rng):
    with pytest.raises(ContractError):
        losses(Tensor([[0.5]]), [[0.3]], "bce")
    with pytest.raises(LabelError):
        losses(leaf(rng, 2, 3), np.array([0, 3]), "softmax_xent")
    with pytest.raises(DimensionError):
        losses(leaf(rng, 2, 3), np.zeros((3, 3)), "l2")
    with pytest.raises(ConfigurationError):
        losses(leaf(rng, 2, 3), np.zeros((2, 3)), "hinge")


def test_softmax_rows_sum_to_one(rng):
    probs = softmax(rng.normal(size=(4, 5)) * 10)
    np.testing.assert_allclose(probs.sum(axis=1), 1.0)


def test_grad_check_rejects_eps_outside_range(rng):
    x = leaf(rng, 2)
    with pytest.raises(ConfigurationError):
        grad_check({"x": x}, lambda: (x * 2.0).sum(), eps=1e-2)


def test_grad_check_restores_dtype(rng):
    x = leaf(rng, 3)
    grad_check({"x": x}, lambda: (x * x).sum())
    assert x.dtype == np.float32 and x.grad is None


def test_full_discriminator_gradients(rng):
    net = build_discriminator(img_size=8, img_channels=1, base_ch=8, head="sigmoid", seed=0)
    x = Tensor(rng.uniform(-1, 1, size=(4, 1, 8, 8)))
    targets = np.array([[1.0], [0.0], [1.0], [0.0]])
    assert grad_check(net, lambda: losses(net(x), targets, "bce")) < NETWORK_TOL


def test_discriminator_with_batchnorm_gradients(rng):
    net = build_discriminator(img_size=16, img_channels=1, base_ch=8, head="linear", seed=0)
    x = Tensor(rng.uniform(-1, 1, size=(4, 1, 16, 16)))
    assert grad_check(net, lambda: net(x).mean()) < NETWORK_TOL


def test_backward_values():
    x = Tensor([3.0], requires_grad=True)
    (x * x).sum().backward()
    np.testing.assert_allclose(x.grad, [6.0])
    x, y = Tensor([2.0], requires_grad=True), Tensor([5.0], requires_grad=True)
    (x * y).sum().backward()
    np.testing.assert_allclose(x.grad, [5.0])
    np.testing.assert_allclose(y.grad, [2.0])


def test_conv2d_sums_ones():
    out = conv2d(Tensor(np.ones((1, 1, 3, 3))), Tensor(np.ones((1, 1, 2, 2))), Tensor(np.zeros(1)))
    np.testing.assert_array_equal(out.numpy(), np.full((1, 1, 2, 2), 4.0))


def test_conv2d_identity_kernel_returns_the_input(rng):
    x = rng.normal(size=(2, 2, 5, 5))
    weight = np.zeros((2, 2, 3, 3))
    weight[0, 0, 1, 1] = weight[1, 1, 1, 1] = 1.0
    with precision(np.float64):
        out = conv2d(Tensor(x), Tensor(weight), pad=1).numpy()
    np.testing.assert_allclose(out, x, atol=1e-12)


def test_conv2d_is_a_cross_correlation():
    x = np.arange(16.0).reshape(1, 1, 4, 4)
    weight = np.zeros((1, 1, 2, 2))
    weight[0, 0, 0, 0] = 1.0
    out = conv2d(Tensor(x), Tensor(weight)).numpy()
    np.testing.assert_array_equal(out, x[:, :, :3, :3])


def test_conv_transpose2d_spreads_ones():
    out = conv_transpose2d(Tensor(np.ones((1, 1, 1, 1))), Tensor(np.ones((1, 1, 2, 2))))
    np.testing.assert_array_equal(out.numpy(), np.ones((1, 1, 2, 2)))
    up = conv_transpose2d(Tensor(np.ones((1, 2, 8, 8))), Tensor(np.ones((2, 3, 4, 4))), stride=2, pad=1)
    assert up.shape == (1, 3, 16, 16)


def test_batchnorm_of_a_constant_channel_is_zero():
    x = Tensor(np.full((4, 2, 3, 3), 7.0))
    out = batchnorm2d(x, Tensor(np.ones(2)), Tensor(np.zeros(2)), RunningStats.fresh(2))
    np.testing.assert_array_equal(out.numpy(), 0.0)


def test_batchnorm_applies_gamma_and_beta(rng):
    x = rng.normal(size=(8, 3, 4, 4))
    x = (x - x.mean(axis=(0, 2, 3), keepdims=True)) / x.std(axis=(0, 2, 3), keepdims=True)
    with precision(np.float64):
        gamma, beta = Tensor(np.full(3, 2.0)), Tensor(np.full(3, 3.0))
        out = batchnorm2d(Tensor(x), gamma, beta, RunningStats.fresh(3, np.float64), eps=1e-10).numpy()
    np.testing.assert_allclose(out.mean(axis=(0, 2, 3)), 3.0, atol=1e-5)
    np.testing.assert_allclose(out.std(axis=(0, 2, 3)), 2.0, atol=1e-5)


def test_batchnorm_train_mode_centers_each_channel(rng):
    with precision(np.float64):
        x = Tensor(rng.normal(3.0, 2.0, size=(6, 4, 5, 5)))
        out = batchnorm2d(x, Tensor(np.ones(4)), Tensor(np.zeros(4)), RunningStats.fresh(4, np.float64))
    assert np.abs(out.numpy().mean(axis=(0, 2, 3))).max() < 1e-6


def test_activation_values():
    np.testing.assert_allclose(activation(Tensor([-1.0]), "leaky_relu", slope=0.2).numpy(), [-0.2], rtol=1e-6)
    assert activation(Tensor([0.0]), "tanh").numpy()[0] == 0.0
    x = Tensor([0.0], requires_grad=True)
    out = activation(x, "sigmoid")
    assert out.numpy()[0] == 0.5
    out.sum().backward()
    np.testing.assert_allclose(x.grad, [0.25])


def test_pool_and_resize_values():
    averaged = pool_and_resize(Tensor([[[[1.0, 2.0], [3.0, 4.0]]]]), "global_avg")
    np.testing.assert_allclose(averaged.numpy(), [[2.5]])
    upsampled = pool_and_resize(Tensor([[[[1.0]]]]), "nearest_upsample2")
    np.testing.assert_array_equal(upsampled.numpy(), np.ones((1, 1, 2, 2)))


def test_pooling_then_upsampling_keeps_block_means(rng):
    with precision(np.float64):
        x = Tensor(rng.normal(size=(1, 2, 4, 4)))
        round_trip = pool_and_resize(pool_and_resize(x, "avg_pool2"), "nearest_upsample2").numpy()
    blocks = x.numpy().reshape(1, 2, 2, 2, 2, 2).mean(axis=(3, 5))
    np.testing.assert_allclose(round_trip.reshape(1, 2, 2, 2, 2, 2).mean(axis=(3, 5)), blocks, atol=1e-12)


def test_loss_values(rng):
    assert losses(Tensor([[0.5]]), [[1.0]], "bce").item() == pytest.approx(np.log(2), abs=1e-6)
    uniform = losses(Tensor(np.zeros((3, 4))), np.array([0, 2, 3]), "softmax_xent")
    assert uniform.item() == pytest.approx(np.log(4), abs=1e-6)
    x = rng.normal(size=(2, 3))
    assert losses(Tensor(x), x, "l2").item() == 0.0
