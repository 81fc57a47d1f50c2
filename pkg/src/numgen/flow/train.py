"""Training loop for the velocity model.

Each step is deterministic given (seed, step index): the batch indices and
all per-step draws (timesteps, noise, conditioning dropout) come from seeds
derived with the package splitting rule, so runs reproduce exactly and any
step can be replayed in isolation.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..noise import LatentBox, PriorConfig, apply_prior
from ..seeds import derive_seed
from .net import NetConfig, VelocityNet, forward_interpolate, velocity_target

log = logging.getLogger(__name__)

_STAGE_INIT = 0
_STAGE_BATCH = 1
_STAGE_STEP = 2


@dataclass
class TrainConfig:
    batch_size: int = 16
    steps: int = 2000
    learning_rate: float = 0.02
    timestep_strategy: str = "uniform"  # or "logit_normal"
    logit_mu: float = 0.0
    logit_sigma: float = 1.0
    shared_noise_batching: bool = False
    cond_dropout_prob: float = 0.1
    seed: int = 0
    # noise prior baked into training noise, using each sample's layout
    prior: PriorConfig | None = None

    def __post_init__(self):
        if self.batch_size < 1 or self.steps < 1 or self.learning_rate <= 0:
            raise ValueError("batch_size, steps and learning_rate must be positive")
        if self.timestep_strategy not in ("uniform", "logit_normal"):
            raise ValueError(f"unknown timestep strategy {self.timestep_strategy!r}")
        if self.logit_sigma <= 0:
            raise ValueError("logit_sigma must be > 0")
        if not 0.0 <= self.cond_dropout_prob < 1.0:
            raise ValueError("cond_dropout_prob must be in [0, 1)")


@dataclass
class TrainBatch:
    x0: np.ndarray       # (B, C, H, W) in [-1, 1]
    counts: np.ndarray   # (B,)
    latent_boxes: list[list[LatentBox]] | None = None


def sample_timesteps(rng: np.random.Generator, n: int, strategy: str,
                     mu: float = 0.0, sigma: float = 1.0) -> np.ndarray:
    """Per-sample interpolation times: uniform on [0, 1] or the sigmoid of a
    normal draw (logit-normal), which shifts mass toward early times for
    negative mu."""
    if strategy == "uniform":
        return rng.random(n)
    return 1.0 / (1.0 + np.exp(-rng.normal(mu, sigma, n)))


def train_step(
    model: VelocityNet,
    batch: TrainBatch,
    config: TrainConfig,
    step_index: int,
    on_batch: Callable[[np.ndarray, np.ndarray, np.ndarray, np.ndarray], None] | None = None,
) -> float:
    """One SGD step on the velocity-matching loss; returns the scalar loss.

    Draw order from the step RNG: timesteps, noise, conditioning dropout.
    ``on_batch`` is an instrumentation hook receiving (x0, eps, t, c) exactly
    as used for the update.
    """
    rng = np.random.default_rng(derive_seed(derive_seed(config.seed, _STAGE_STEP), step_index))
    x0 = batch.x0
    b = x0.shape[0]
    if b == 0:
        raise ValueError("empty batch")
    t = sample_timesteps(rng, b, config.timestep_strategy, config.logit_mu, config.logit_sigma)
    if config.shared_noise_batching:
        eps = np.broadcast_to(
            rng.standard_normal((1,) + x0.shape[1:], dtype=np.float32), x0.shape
        ).copy()
    else:
        eps = rng.standard_normal(x0.shape, dtype=np.float32)
    if config.prior is not None:
        if batch.latent_boxes is None:
            raise ValueError("training with a prior needs per-sample layout boxes")
        eps = np.stack([
            apply_prior(eps[i], batch.latent_boxes[i], config.prior) for i in range(b)
        ])
    c = np.asarray(batch.counts, dtype=np.int64).copy()
    c[rng.random(b) < config.cond_dropout_prob] = 0
    if on_batch is not None:
        on_batch(x0, eps, t, c)
    x_t = forward_interpolate(x0, eps, t.astype(np.float32))
    target = velocity_target(x0, eps)
    loss, grads = model.loss_and_grads(x_t, t, c, target)
    if not np.isfinite(loss):
        raise FloatingPointError(
            f"non-finite loss {loss} at step {step_index} "
            f"(lr={config.learning_rate}, strategy={config.timestep_strategy})"
        )
    model.sgd_step(grads, config.learning_rate)
    return loss


def train(
    x0: np.ndarray,
    counts: np.ndarray,
    config: TrainConfig,
    net_config: NetConfig | None = None,
    latent_boxes: list[list[LatentBox]] | None = None,
    log_every: int = 0,
) -> tuple[VelocityNet, list[float]]:
    """Train a fresh model on (image, count) arrays; returns the model and
    the per-step loss trace."""
    if net_config is None:
        net_config = NetConfig(
            image_channels=x0.shape[1], height=x0.shape[2], width=x0.shape[3],
            k_max=int(counts.max()),
        )
    model = VelocityNet(net_config, seed=derive_seed(config.seed, _STAGE_INIT))
    batch_seed = derive_seed(config.seed, _STAGE_BATCH)
    n = x0.shape[0]
    losses: list[float] = []
    for step in range(config.steps):
        idx = np.random.default_rng(derive_seed(batch_seed, step)).integers(0, n, config.batch_size)
        batch = TrainBatch(
            x0[idx],
            counts[idx],
            [latent_boxes[int(i)] for i in idx] if latent_boxes is not None else None,
        )
        loss = train_step(model, batch, config, step)
        losses.append(loss)
        if log_every and (step % log_every == 0 or step == config.steps - 1):
            log.info("step=%d loss=%.5f", step, loss)
    return model, losses
