"""Euler ODE sampling with optional classifier-free guidance and count-aware
noise priors applied to the initial state."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..layout import LayoutSpec, plan_random_layout
from ..noise import PriorConfig, apply_prior, map_boxes_to_latent
from ..seeds import derive_seed
from .net import VelocityNet

_STAGE_LAYOUT = 1


@dataclass
class SampleConfig:
    ode_steps: int = 50
    cfg_scale: float = 3.5
    prior: PriorConfig | None = None
    layout: LayoutSpec | None = None  # explicit layout; else planned per count
    seed: int = 0
    fill_fraction: float = 0.25
    max_attempts: int = 1000

    def __post_init__(self):
        if self.ode_steps < 1:
            raise ValueError("ode_steps must be >= 1")
        if self.cfg_scale < 0:
            raise ValueError("cfg_scale must be >= 0")


def plan_sample_layout(count: int, h: int, w: int, config: SampleConfig) -> LayoutSpec:
    if config.layout is not None:
        return config.layout
    return plan_random_layout(count, w, h, config.fill_fraction, config.max_attempts,
                              seed=derive_seed(config.seed, _STAGE_LAYOUT))


def euler_sample(model: VelocityNet, initial_noise: np.ndarray, count: int,
                 config: SampleConfig) -> np.ndarray:
    """Integrate dx/dt = v from t=1 (noise) to t=0 in uniform Euler steps.

    With cfg_scale > 0 the velocity is v_uncond + scale * (v_cond -
    v_uncond); otherwise the conditional velocity alone.  When a prior is
    configured the initial noise is first transformed using a layout planned
    for the requested count.  The result is clamped to [-1, 1] at the end
    only.
    """
    if count < 1 or count > model.config.k_max:
        raise ValueError(f"count must be in 1..{model.config.k_max}, got {count}")
    c, h, w = initial_noise.shape
    x = initial_noise.astype(np.float32).copy()
    if config.prior is not None:
        layout = plan_sample_layout(count, h, w, config)
        x = apply_prior(x, map_boxes_to_latent(layout, h, w), config.prior)
    dt = np.float32(1.0 / config.ode_steps)
    use_cfg = config.cfg_scale > 0
    scale = np.float32(config.cfg_scale)
    for i in range(config.ode_steps):
        t = 1.0 - i / config.ode_steps
        if use_cfg:
            xb = np.stack([x, x])
            tb = np.array([t, t], dtype=np.float32)
            cb = np.array([count, 0], dtype=np.int64)
            v_pair = model.forward(xb, tb, cb)
            v_hat = v_pair[1] + scale * (v_pair[0] - v_pair[1])
        else:
            v_hat = model.forward(x[None], np.array([t], dtype=np.float32),
                                  np.array([count], dtype=np.int64))[0]
        x = x - dt * v_hat
    return np.clip(x, -1.0, 1.0)
