"""Zero-shot count inference by velocity-loss ranking.

Scores every candidate count with a cheap shared set of (t, noise) pairs,
keeps the best few, then rescores those with a larger fresh set; the count
with the lowest refined loss wins.  Sharing the pairs across candidates
removes sampling variance from the comparison.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..seeds import derive_seed
from .net import VelocityNet, forward_interpolate, velocity_target

_STAGE_COARSE = 1
_STAGE_REFINE = 2

Pair = tuple[float, np.ndarray]


@dataclass
class ClassifierConfig:
    candidates: tuple[int, ...]
    coarse_timesteps: int = 8
    top_m: int = 4
    refine_timesteps: int = 32
    shared_pairs: bool = True
    seed: int = 0

    def __post_init__(self):
        self.candidates = tuple(sorted(set(int(k) for k in self.candidates)))
        if not self.candidates:
            raise ValueError("need at least one candidate count")
        if self.top_m < 1 or self.top_m > len(self.candidates):
            raise ValueError("top_m must be in 1..len(candidates)")
        if self.coarse_timesteps < 1 or self.refine_timesteps < 1:
            raise ValueError("timestep counts must be >= 1")


def make_pairs(n: int, shape: tuple[int, ...], seed: int) -> list[Pair]:
    """n (t, eps) evaluation pairs: stratified times (i + 0.5)/n and seeded
    standard-normal noise, reusable across candidate counts."""
    rng = np.random.default_rng(seed)
    return [((i + 0.5) / n, rng.standard_normal(shape, dtype=np.float32)) for i in range(n)]


def count_loss(model: VelocityNet, x: np.ndarray, k: int, pairs: list[Pair]) -> float:
    """Mean velocity-matching loss of image x under count condition k over
    the given (t, eps) pairs; deterministic for a fixed pair list."""
    if not pairs:
        raise ValueError("need at least one (t, eps) pair")
    n = len(pairs)
    ts = np.array([p[0] for p in pairs], dtype=np.float32)
    eps = np.stack([p[1] for p in pairs])
    x_rep = np.broadcast_to(x.astype(np.float32), eps.shape)
    x_t = forward_interpolate(x_rep, eps, ts)
    target = velocity_target(x_rep, eps)
    v = model.forward(x_t, ts, np.full(n, k, dtype=np.int64))
    return float(np.mean((v.astype(np.float64) - target.astype(np.float64)) ** 2))


@dataclass
class ClassifyResult:
    k_hat: int
    coarse_losses: dict[int, float]
    refined_losses: dict[int, float]
    top_set: tuple[int, ...]

    def coarse_ranking(self) -> list[int]:
        return [k for k, _ in sorted(self.coarse_losses.items(), key=lambda kv: (kv[1], kv[0]))]

    def refined_ranking(self) -> list[int]:
        """Refined candidates first (by refined loss), the rest in coarse
        order behind them."""
        refined = [k for k, _ in sorted(self.refined_losses.items(), key=lambda kv: (kv[1], kv[0]))]
        rest = [k for k in self.coarse_ranking() if k not in self.refined_losses]
        return refined + rest

    def rank_of(self, k: int, stage: str = "refined") -> int:
        ranking = self.coarse_ranking() if stage == "coarse" else self.refined_ranking()
        return ranking.index(k) + 1


def classify_coarse_to_fine(model: VelocityNet, x: np.ndarray,
                            config: ClassifierConfig) -> ClassifyResult:
    """Two-stage count classification; ties resolve to the smaller count."""
    shape = x.shape
    coarse_pairs = make_pairs(config.coarse_timesteps, shape, derive_seed(config.seed, _STAGE_COARSE))
    coarse = {}
    for k in config.candidates:
        pairs = coarse_pairs if config.shared_pairs else make_pairs(
            config.coarse_timesteps, shape, derive_seed(derive_seed(config.seed, _STAGE_COARSE), k))
        coarse[k] = count_loss(model, x, k, pairs)
    top = tuple(k for k, _ in sorted(coarse.items(), key=lambda kv: (kv[1], kv[0]))[:config.top_m])

    refine_pairs = make_pairs(config.refine_timesteps, shape, derive_seed(config.seed, _STAGE_REFINE))
    refined = {}
    for k in top:
        pairs = refine_pairs if config.shared_pairs else make_pairs(
            config.refine_timesteps, shape, derive_seed(derive_seed(config.seed, _STAGE_REFINE), k))
        refined[k] = count_loss(model, x, k, pairs)
    k_hat = min(refined.items(), key=lambda kv: (kv[1], kv[0]))[0]
    return ClassifyResult(k_hat, coarse, refined, top)
