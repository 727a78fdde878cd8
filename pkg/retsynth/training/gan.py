"""
Adversarial training: the vanilla GAN objective and the weight-clipped
Wasserstein critic.

The discriminator step minimizes -[log D(x) + log(1 - D(G(z)))]. The generator
step minimizes -log D(G(z)) by default; `saturating=True` switches it to the
minimax form log(1 - D(G(z))). Fakes for the D/critic updates are produced
without a graph, so G receives no gradient from those updates, and D/critic
gradients from the generator update are discarded.
"""

from dataclasses import dataclass, field
import logging
import time
import numpy as np
from tqdm import tqdm
from ..autodiff import Tensor, losses, no_grad
from ..networks import LatentSampler
from ..shared.errors import ConfigurationError, ContractError, NumericError, TrainingAborted
from .batches import BatchStream
from .optim import Optimizer, OptimizerConfig
from .report import TrainReport

logger = logging.getLogger(__name__)


@dataclass
class GanConfig:
    batch_size: int = 64
    latent_dim: int = 100
    lr_g: float = 2e-4
    lr_d: float = 2e-4
    optimizer: str = "adam"
    b1: float = 0.5
    steps: int = 1000
    seed: int = 0
    saturating: bool = False

    def __post_init__(self):
        if self.lr_g <= 0 or self.lr_d <= 0:
            raise ConfigurationError(f"learning rates must be positive, got {self.lr_g}, {self.lr_d}")
        if self.batch_size < 2:
            raise ConfigurationError(f"batch_size must be >= 2 for batchnorm, got {self.batch_size}")
        if self.steps < 1:
            raise ConfigurationError(f"steps must be >= 1, got {self.steps}")

    def optimizer_config(self, lr):
        return OptimizerConfig(kind=self.optimizer, lr=lr, b1=self.b1)


@dataclass
class WganConfig:
    clip_c: float = 0.01
    n_critic: int = 5
    lr: float = 5e-5
    optimizer: str = "rmsprop"
    steps: int = 1000
    seed: int = 0
    batch_size: int = 64
    latent_dim: int = 100

    def __post_init__(self):
        if self.clip_c <= 0:
            raise ConfigurationError(f"clip_c must be positive, got {self.clip_c}")
        if self.n_critic < 1:
            raise ConfigurationError(f"n_critic must be >= 1, got {self.n_critic}")
        if self.lr <= 0:
            raise ConfigurationError(f"lr must be positive, got {self.lr}")
        if self.batch_size < 2:
            raise ConfigurationError(f"batch_size must be >= 2 for batchnorm, got {self.batch_size}")
        if self.steps < 1:
            raise ConfigurationError(f"steps must be >= 1, got {self.steps}")

    def optimizer_config(self):
        return OptimizerConfig(kind=self.optimizer, lr=self.lr)


@dataclass
class AdversarialState:
    """optimizer state of both players plus the step counter"""

    g_opt: Optimizer
    d_opt: Optimizer
    step: int = 0
    last_losses: dict = field(default_factory=dict)

    @classmethod
    def for_gan(cls, generator, discriminator, cfg):
        return cls(
            g_opt=Optimizer(generator, cfg.optimizer_config(cfg.lr_g)),
            d_opt=Optimizer(discriminator, cfg.optimizer_config(cfg.lr_d)),
        )

    @classmethod
    def for_wgan(cls, generator, critic, cfg):
        return cls(
            g_opt=Optimizer(generator, cfg.optimizer_config()),
            d_opt=Optimizer(critic, cfg.optimizer_config()),
        )


def _real_tensor(real_batch):
    real = np.asarray(real_batch)
    if real.size and (real.min() < -1.0 or real.max() > 1.0):
        raise ContractError(
            f"real batch must lie in [-1, 1], got [{real.min()}, {real.max()}]"
        )
    return Tensor(real)


def clip_weights(values, clip_c):
    """clamps values to [-clip_c, clip_c], the bound rounded toward zero in the array dtype"""
    values = np.asarray(values)
    dtype = values.dtype if np.issubdtype(values.dtype, np.floating) else np.dtype(np.float64)
    bound = np.asarray(clip_c, dtype=dtype)
    if bound > clip_c:
        bound = np.nextafter(bound, dtype.type(0))
    return np.clip(values, -bound, bound)


def clip_parameters(network, clip_c):
    for param in network.parameters().values():
        param.data = clip_weights(param.data, clip_c)


def gan_step(generator, discriminator, real_batch, sampler, cfg, state=None):
    """one discriminator update followed by one generator update

    Args:
        generator (Network): G, updated by the generator step only
        discriminator (Network): D with a sigmoid head
        real_batch (np.ndarray): N x C x H x W images in [-1, 1]
        sampler (LatentSampler): source of z
        cfg (GanConfig): learning rates and loss variant
        state (AdversarialState, optional): optimizer state; created when None

    Raises:
        TrainingAborted: if a loss becomes non-finite

    Returns:
        tuple[float, float, AdversarialState]: d_loss, g_loss and the state
    """
    state = state or AdversarialState.for_gan(generator, discriminator, cfg)
    real = _real_tensor(real_batch)
    n = real.shape[0]
    generator.train()
    discriminator.train()
    observed = {}

    try:
        with no_grad():
            fake = generator(sampler.sample(n))
        d_real = discriminator(real)
        d_fake = discriminator(fake.detach())
        d_loss = losses(d_real, np.ones(d_real.shape), "bce") + losses(
            d_fake, np.zeros(d_fake.shape), "bce"
        )
        observed["d_loss"] = d_loss.item()
        state.d_opt.zero_grad()
        d_loss.backward()
        state.d_opt.step()

        fake = generator(sampler.sample(n))
        p_fake = discriminator(fake)
        if cfg.saturating:
            g_loss = -losses(p_fake, np.zeros(p_fake.shape), "bce")
        else:
            g_loss = losses(p_fake, np.ones(p_fake.shape), "bce")
        observed["g_loss"] = g_loss.item()
        state.g_opt.zero_grad()
        g_loss.backward()
        state.g_opt.step()
        state.d_opt.zero_grad()
    except NumericError as exc:
        logger.error("gan step %s produced non-finite values: %s", state.step, exc)
        raise TrainingAborted(state.step, observed or {"d_loss": float("nan")}) from exc

    state.step += 1
    state.last_losses = observed
    return observed["d_loss"], observed["g_loss"], state


def wgan_step(generator, critic, real_batch, sampler, cfg, state=None):
    """n_critic clipped critic updates, then one generator update

    `real_batch` is either an array reused by every critic update or a callable
    returning a fresh batch per critic update.

    Returns:
        tuple[float, float, AdversarialState]: critic_estimate
        (mean C(x) - mean C(fake) of the last critic pass), g_loss and the state
    """
    state = state or AdversarialState.for_wgan(generator, critic, cfg)
    next_batch = real_batch if callable(real_batch) else (lambda: real_batch)
    generator.train()
    critic.train()
    observed = {}

    try:
        for _ in range(cfg.n_critic):
            real = _real_tensor(next_batch())
            with no_grad():
                fake = generator(sampler.sample(real.shape[0]))
            c_real = critic(real).mean()
            c_fake = critic(fake.detach()).mean()
            critic_loss = c_fake - c_real
            observed["critic_estimate"] = -critic_loss.item()
            state.d_opt.zero_grad()
            critic_loss.backward()
            state.d_opt.step()
            clip_parameters(critic, cfg.clip_c)

        fake = generator(sampler.sample(real.shape[0]))
        g_loss = -critic(fake).mean()
        observed["g_loss"] = g_loss.item()
        state.g_opt.zero_grad()
        g_loss.backward()
        state.g_opt.step()
        state.d_opt.zero_grad()
    except NumericError as exc:
        logger.error("wgan step %s produced non-finite values: %s", state.step, exc)
        raise TrainingAborted(state.step, observed or {"critic_estimate": float("nan")}) from exc

    state.step += 1
    state.last_losses = observed
    return observed["critic_estimate"], observed["g_loss"], state


def _run(step_fn, names, generator, opponent, images, cfg, desc):
    stream = BatchStream(images, cfg.batch_size, cfg.seed)
    sampler = LatentSampler(dim=cfg.latent_dim, seed=cfg.seed + 1)
    report = TrainReport()
    state = None
    started = time.perf_counter()

    for step in tqdm(range(cfg.steps), desc=desc, leave=False):
        first, second, state = step_fn(stream, sampler, state)
        report.record(**{names[0]: first, names[1]: second})
        if (step + 1) % 100 == 0:
            logger.info("%s step %s: %s %.4f, %s %.4f", desc, step + 1, names[0], first, names[1], second)

    report.wall_time = time.perf_counter() - started
    report.checksum = generator.checksum()
    report.extra["opponent_checksum"] = opponent.checksum()
    return report.validate()


def train_gan(generator, discriminator, images, cfg):
    """runs cfg.steps gan_steps over seeded batches of `images`"""
    if generator.spec.get("latent_dim", cfg.latent_dim) != cfg.latent_dim:
        raise ConfigurationError(
            f"generator latent_dim {generator.spec['latent_dim']} != config {cfg.latent_dim}"
        )

    def step_fn(stream, sampler, state):
        return gan_step(generator, discriminator, stream(), sampler, cfg, state)

    return _run(step_fn, ("d_loss", "g_loss"), generator, discriminator, images, cfg, "train-gan")


def train_wgan(generator, critic, images, cfg):
    """runs cfg.steps wgan_steps; each critic update draws its own batch"""
    if critic.spec.get("head", "linear") != "linear":
        raise ConfigurationError("the Wasserstein critic needs a linear head")
    if generator.spec.get("latent_dim", cfg.latent_dim) != cfg.latent_dim:
        raise ConfigurationError(
            f"generator latent_dim {generator.spec['latent_dim']} != config {cfg.latent_dim}"
        )

    def step_fn(stream, sampler, state):
        return wgan_step(generator, critic, stream, sampler, cfg, state)

    return _run(step_fn, ("critic_estimate", "g_loss"), generator, critic, images, cfg, "train-wgan")
