import numpy as np
import pytest
from retsynth.autodiff import Tensor
from retsynth.load import load_checkpoint
from retsynth.networks import (
    LatentSampler,
    build_classifier,
    build_decoder,
    build_discriminator,
    build_encoder,
    build_mlp,
)
from retsynth.shared.errors import (
    ConfigurationError,
    ContractError,
    NumericError,
    TrainingAborted,
)
from retsynth.training import (
    BatchStream,
    GanConfig,
    Optimizer,
    OptimizerConfig,
    TrainReport,
    WganConfig,
    accuracy,
    affine_augment,
    clip_weights,
    gan_step,
    optimizer_step,
    scheduled_lr,
    train_autoencoder,
    train_classifier,
    train_gan,
    train_wgan,
    wgan_step,
)


def single_param(value):
    return {"w": Tensor(np.array([value]), requires_grad=True)}


def test_sgd_step():
    params = single_param(1.0)
    optimizer_step(params, {"w": np.array([0.5])}, OptimizerConfig(kind="sgd", lr=0.1), {})
    np.testing.assert_allclose(params["w"].data, [0.95])


def test_rmsprop_step():
    params = single_param(1.0)
    config = OptimizerConfig(kind="rmsprop", lr=0.01, rho=0.9, eps=1e-8)
    state = optimizer_step(params, {"w": np.array([2.0])}, config, {})
    # v = 0.1 * 4 = 0.4, update = 0.01 * 2 / sqrt(0.4)
    np.testing.assert_allclose(params["w"].data, [1.0 - 0.02 / np.sqrt(0.4)], rtol=1e-6)
    assert state["t"] == 1


def test_adam_first_step_moves_by_lr():
    params = single_param(1.0)
    config = OptimizerConfig(kind="adam", lr=0.001)
    optimizer_step(params, {"w": np.array([-3.0])}, config, {})
    np.testing.assert_allclose(params["w"].data, [1.001], rtol=1e-6)


def test_missing_gradient_counts_as_zero():
    params = single_param(1.0)
    optimizer_step(params, {}, OptimizerConfig(kind="adam"), {})
    np.testing.assert_allclose(params["w"].data, [1.0])


def test_optimizer_detects_shape_drift():
    params = single_param(1.0)
    config = OptimizerConfig(kind="adam")
    state = optimizer_step(params, {"w": np.array([1.0])}, config, {})
    params["w"] = Tensor(np.zeros(2), requires_grad=True)
    with pytest.raises(ContractError):
        optimizer_step(params, {"w": np.zeros(2)}, config, state)
    with pytest.raises(ContractError):
        optimizer_step(params, {"w": np.zeros(3)}, config, {})


def test_optimizer_config_validation():
    with pytest.raises(ConfigurationError):
        OptimizerConfig(kind="lbfgs")
    with pytest.raises(ConfigurationError):
        OptimizerConfig(lr=0.0)
    with pytest.raises(ConfigurationError):
        OptimizerConfig(b1=1.0)


def test_scheduled_lr_halves_the_epochs():
    rates = [scheduled_lr(epoch, 4, (1e-4, 1e-5)) for epoch in range(4)]
    assert rates == [1e-4, 1e-4, 1e-5, 1e-5]
    assert scheduled_lr(0, 1) == 1e-4
    with pytest.raises(ConfigurationError):
        scheduled_lr(0, 0)


def test_batch_stream_covers_each_pass():
    images = np.arange(10).reshape(10, 1)
    stream = BatchStream(images, batch_size=3, seed=0)
    seen = np.concatenate([stream() for _ in range(3)]).ravel()
    assert len(set(seen)) == 9
    stream()
    assert stream.passes == 2
    with pytest.raises(ConfigurationError):
        BatchStream(images[:1], batch_size=4, seed=0)


def test_batch_stream_is_seeded():
    images = np.arange(20).reshape(20, 1)
    first = BatchStream(images, 4, seed=3)()
    np.testing.assert_array_equal(BatchStream(images, 4, seed=3)(), first)


def test_clip_weights_bound_is_exact_in_float32():
    values = np.array([-1.0, 0.005, 1.0], dtype=np.float32)
    clipped = clip_weights(values, 0.01)
    assert clipped.dtype == np.float32
    assert np.abs(clipped).max() <= 0.01
    assert clipped[1] == np.float32(0.005)


def test_gan_step_updates_both_players(tiny_generator, rng):
    discriminator = build_discriminator(img_size=32, img_channels=1, base_ch=8, head="sigmoid", seed=1)
    cfg = GanConfig(batch_size=4, latent_dim=8, steps=1)
    g_before, d_before = tiny_generator.checksum(), discriminator.checksum()
    real = rng.uniform(-1, 1, size=(4, 1, 32, 32))
    d_loss, g_loss, state = gan_step(tiny_generator, discriminator, real, LatentSampler(8, 0), cfg)
    assert np.isfinite(d_loss) and np.isfinite(g_loss)
    assert d_loss > 0 and g_loss > 0
    assert state.step == 1
    assert tiny_generator.checksum() != g_before
    assert discriminator.checksum() != d_before
    assert all(param.grad is None for param in discriminator.parameters().values())


def test_saturating_generator_loss_is_negative(tiny_generator, rng):
    discriminator = build_discriminator(img_size=32, img_channels=1, base_ch=8, head="sigmoid", seed=1)
    cfg = GanConfig(batch_size=4, latent_dim=8, steps=1, saturating=True)
    real = rng.uniform(-1, 1, size=(4, 1, 32, 32))
    _, g_loss, _ = gan_step(tiny_generator, discriminator, real, LatentSampler(8, 0), cfg)
    assert g_loss < 0


def test_gan_step_rejects_out_of_range_images(tiny_generator, tiny_critic):
    cfg = GanConfig(batch_size=2, latent_dim=8, steps=1)
    with pytest.raises(ContractError):
        gan_step(tiny_generator, tiny_critic, np.full((2, 1, 32, 32), 2.0), LatentSampler(8, 0), cfg)


def test_non_finite_loss_aborts_training(monkeypatch, tiny_generator, tiny_critic, rng):
    def exploding(*args, **kwargs):
        raise NumericError("loss overflowed")

    monkeypatch.setattr("retsynth.training.gan.losses", exploding)
    cfg = GanConfig(batch_size=2, latent_dim=8, steps=1)
    real = rng.uniform(-1, 1, size=(2, 1, 32, 32))
    with pytest.raises(TrainingAborted) as info:
        gan_step(tiny_generator, tiny_critic, real, LatentSampler(8, 0), cfg)
    assert info.value.step == 0
    assert "d_loss" in info.value.losses


def test_wgan_step_keeps_critic_clipped(tiny_generator, tiny_critic, rng):
    cfg = WganConfig(batch_size=4, latent_dim=8, n_critic=2, lr=0.01, clip_c=0.01)
    real = rng.uniform(-1, 1, size=(4, 1, 32, 32))
    state = None
    for _ in range(2):
        estimate, g_loss, state = wgan_step(tiny_generator, tiny_critic, real, LatentSampler(8, 0), cfg, state)
        assert np.isfinite(estimate) and np.isfinite(g_loss)
        assert max(np.abs(p.data).max() for p in tiny_critic.parameters().values()) <= 0.01
    assert state.step == 2


def test_toy_wgan_moves_the_generator_to_the_data():
    generator = build_mlp(1, [], 1, seed=0)
    generator.layer("out").params["bias"].data[...] = -1.0
    critic = build_mlp(1, [], 1, seed=1)
    real = np.ones((64, 1))
    cfg = WganConfig(latent_dim=1, lr=0.02, optimizer="rmsprop", n_critic=5, clip_c=0.01, batch_size=16)
    stream = BatchStream(real, cfg.batch_size, seed=0)
    sampler = LatentSampler(dim=1, seed=0)

    state, estimates = None, []
    for _ in range(200):
        estimate, _, state = wgan_step(generator, critic, stream, sampler, cfg, state)
        estimates.append(estimate)
        assert max(np.abs(p.data).max() for p in critic.parameters().values()) <= cfg.clip_c

    assert np.mean(estimates[-20:]) < np.mean(estimates[:20])
    samples = generator.predict(LatentSampler(dim=1, seed=9).sample(4096).numpy())
    assert abs(samples.mean() - 1.0) < 0.2


def constant_discriminator():
    """a sigmoid head on zero weights: D = 0.5 for every input"""
    discriminator = build_mlp(1, [], 1, head="sigmoid", seed=2)
    for param in discriminator.parameters().values():
        param.data[...] = 0.0
    return discriminator


def test_gan_losses_at_an_undecided_discriminator():
    generator = build_mlp(1, [], 1, seed=3)
    for param in generator.parameters().values():
        param.data[...] = 0.0
    cfg = GanConfig(batch_size=8, latent_dim=1, steps=1)
    d_loss, g_loss, _ = gan_step(generator, constant_discriminator(), np.zeros((8, 1)), LatentSampler(1, 0), cfg)
    assert d_loss == pytest.approx(2 * np.log(2), abs=1e-6)
    assert g_loss == pytest.approx(np.log(2), abs=1e-6)


def test_gan_d_loss_matches_clamped_cross_entropy(rng):
    generator = build_mlp(1, [4], 1, seed=3)
    discriminator = build_mlp(1, [4], 1, head="sigmoid", seed=4)
    real = rng.uniform(-1, 1, size=(8, 1))
    fake = generator.predict(LatentSampler(1, 0).sample(8).numpy())
    p_real = np.clip(discriminator.predict(real).astype(np.float64), 1e-7, 1 - 1e-7)
    p_fake = np.clip(discriminator.predict(fake).astype(np.float64), 1e-7, 1 - 1e-7)
    expected = -np.mean(np.log(p_real)) - np.mean(np.log(1 - p_fake))

    cfg = GanConfig(batch_size=8, latent_dim=1, steps=1)
    d_loss, _, _ = gan_step(generator, discriminator, real, LatentSampler(1, 0), cfg)
    assert d_loss == pytest.approx(expected, abs=1e-6)


def test_adversarial_steps_leave_other_networks_alone(tiny_generator, tiny_critic, tiny_classifier, rng):
    bystander = tiny_classifier.checksum()
    real = rng.uniform(-1, 1, size=(4, 1, 32, 32))
    discriminator = build_discriminator(img_size=32, img_channels=1, base_ch=8, head="sigmoid", seed=1)
    gan_step(tiny_generator, discriminator, real, LatentSampler(8, 0), GanConfig(batch_size=4, latent_dim=8))
    wgan_step(tiny_generator, tiny_critic, real, LatentSampler(8, 0), WganConfig(batch_size=4, latent_dim=8))
    assert tiny_classifier.checksum() == bystander


def test_train_wgan_report(tiny_generator, tiny_critic, rng):
    images = rng.uniform(-1, 1, size=(6, 1, 32, 32))
    cfg = WganConfig(batch_size=3, latent_dim=8, n_critic=1, steps=3, seed=2)
    report = train_wgan(tiny_generator, tiny_critic, images, cfg)
    frame = report.to_frame()
    assert list(frame.columns) == ["step", "critic_estimate", "g_loss"]
    assert len(frame) == 3
    assert report.checksum == tiny_generator.checksum()
    assert report.extra["opponent_checksum"] == tiny_critic.checksum()


def test_train_wgan_needs_a_linear_critic(tiny_generator, rng):
    discriminator = build_discriminator(img_size=32, img_channels=1, base_ch=8, head="sigmoid")
    with pytest.raises(ConfigurationError, match="linear"):
        train_wgan(tiny_generator, discriminator, rng.uniform(-1, 1, size=(4, 1, 32, 32)), WganConfig(latent_dim=8))


def test_train_gan_checks_latent_dim(tiny_generator, tiny_critic, rng):
    with pytest.raises(ConfigurationError, match="latent_dim"):
        train_gan(tiny_generator, tiny_critic, rng.uniform(-1, 1, size=(4, 1, 32, 32)), GanConfig(latent_dim=100))


def test_adversarial_config_validation():
    with pytest.raises(ConfigurationError):
        GanConfig(batch_size=1)
    with pytest.raises(ConfigurationError):
        WganConfig(clip_c=0.0)
    with pytest.raises(ConfigurationError):
        WganConfig(n_critic=0)


def test_affine_augment_keeps_shape_and_range(rng):
    image = rng.uniform(-1, 1, size=(3, 16, 16)).astype(np.float32)
    out = affine_augment(image, 1.0, rng)
    assert out.shape == image.shape and out.dtype == image.dtype
    assert out.min() >= -1.0 and out.max() <= 1.0
    assert affine_augment(image, 0.0, rng) is image
    with pytest.raises(ConfigurationError):
        affine_augment(image, 1.5, rng)


@pytest.mark.parametrize("seed", range(5))
def test_affine_augment_fills_within_the_input_range(seed):
    rng = np.random.default_rng(seed)
    image = rng.uniform(0.2, 0.6, size=(1, 16, 16)).astype(np.float32)
    out = affine_augment(image, 1.0, rng)
    assert out.min() >= image.min() and out.max() <= image.max()
    assert not np.array_equal(out, image)


def separable_split(rng, per_class):
    images, labels = [], []
    for label, level in enumerate((-0.8, 0.0, 0.8)):
        images.append(np.clip(level + 0.05 * rng.normal(size=(per_class, 1, 16, 16)), -1, 1))
        labels.append(np.full(per_class, label))
    return np.concatenate(images), np.concatenate(labels)


def test_train_classifier_report_and_checkpoint(tiny_classifier, rng, tmp_path):
    dataset = {split: separable_split(rng, n) for split, n in (("train", 4), ("val", 2), ("test", 2))}
    path = tmp_path / "classifier.bin"
    report = train_classifier(
        tiny_classifier,
        dataset,
        epochs=4,
        lr_schedule=(0.01, 0.001),
        augment_prob=0.0,
        batch_size=4,
        checkpoint_path=path,
    )
    assert report.series["lr"] == [0.01, 0.01, 0.001, 0.001]
    assert report.extra["updates_per_epoch"] == 3
    assert len(report.to_frame()) == 4
    assert report.extra["best_val_accuracy"] == max(report.series["val_accuracy"])
    assert accuracy(tiny_classifier, *dataset["val"]) == report.extra["best_val_accuracy"]

    networks, counters = load_checkpoint(path, expected_kinds={"classifier": "classifier"})
    assert networks["classifier"].checksum() == tiny_classifier.checksum()
    assert counters["epoch"] == report.extra["best_epoch"]


def test_train_classifier_is_deterministic_without_augmentation(rng):
    dataset = {split: separable_split(rng, n) for split, n in (("train", 5), ("val", 2), ("test", 2))}
    runs = []
    for _ in range(2):
        net = build_classifier(num_classes=3, img_size=16, img_channels=1, base_ch=8, seed=0)
        report = train_classifier(
            net, dataset, epochs=3, lr_schedule=(0.01, 0.001), augment_prob=0.0, seed=4, batch_size=4
        )
        runs.append((report.series["loss"], report.checksum))
    assert runs[0] == runs[1]
    assert report.extra["updates_per_epoch"] == 4


def test_train_classifier_needs_val_split(tiny_classifier, rng):
    dataset = {"train": separable_split(rng, 2), "val": (np.empty((0, 1, 16, 16)), np.empty(0, dtype=int))}
    with pytest.raises(ConfigurationError, match="val"):
        train_classifier(tiny_classifier, dataset, epochs=1)


def test_autoencoder_reduces_reconstruction_error(rng):
    encoder = build_encoder(1, img_channels=1, img_size=8, seed=0)
    decoder = build_decoder(1, img_channels=1, img_size=8, seed=1)
    images = np.clip(rng.normal(0, 0.3, size=(20, 1, 8, 8)), -1, 1)
    report = train_autoencoder(encoder, decoder, images, steps=60, lr=0.01, batch_size=8)
    assert report.series["loss"][-1] < report.series["loss"][0]
    assert report.extra["level"] == 1
    assert np.isfinite(report.extra["psnr"])


def test_autoencoder_rejects_mismatched_levels(rng):
    with pytest.raises(ConfigurationError, match="level"):
        train_autoencoder(build_encoder(1, 1, 8), build_decoder(2, 1, 8), rng.normal(size=(4, 1, 8, 8)), steps=1)


def test_train_report_validation():
    report = TrainReport()
    report.record(a=1.0, b=2.0)
    report.record(a=3.0)
    with pytest.raises(ContractError):
        report.validate()
    report = TrainReport()
    report.record(a=float("nan"))
    with pytest.raises(ContractError):
        report.validate()


def test_optimizer_binds_network_parameters(tiny_classifier):
    optimizer = Optimizer(tiny_classifier, OptimizerConfig(kind="sgd", lr=0.1))
    assert set(optimizer.params) == set(tiny_classifier.parameters())
    with pytest.raises(ConfigurationError):
        optimizer.lr = -1.0
