"""Velocity-field network and rectified-flow primitives.

The network maps an image-shaped state plus a sinusoidal time embedding and
a learned count embedding (index 0 is the unconditional token) to a velocity
of the same shape: a 3x3 conv, a pointwise conv, and a final 3x3 conv with
ReLU between.  Forward and backward passes are written against NumPy so the
analytic gradients can be cross-checked with finite differences.

Internally activations are channels-last so every layer reduces to one
2-D GEMM; the public API uses (batch, channels, height, width).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

PARAM_ORDER = ("w1", "b1", "w2", "b2", "w3", "b3", "emb")


@dataclass
class NetConfig:
    image_channels: int = 1
    height: int = 32
    width: int = 32
    hidden: int = 64
    time_dim: int = 8
    count_dim: int = 8
    k_max: int = 8
    activation: str = "silu"  # or "relu" / "identity"

    @property
    def in_channels(self) -> int:
        return self.image_channels + self.time_dim + self.count_dim

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "NetConfig":
        return cls(**d)


def forward_interpolate(x0: np.ndarray, eps: np.ndarray, t) -> np.ndarray:
    """Straight-line state (1 - t) * x0 + t * eps; t is a scalar in [0, 1]
    or a per-sample vector for batched inputs."""
    if x0.shape != eps.shape:
        raise ValueError(f"shape mismatch: {x0.shape} vs {eps.shape}")
    t_arr = np.asarray(t, dtype=x0.dtype)
    if np.any(t_arr < 0) or np.any(t_arr > 1):
        raise ValueError("t must lie in [0, 1]")
    if t_arr.ndim == 1:
        t_arr = t_arr.reshape(-1, *([1] * (x0.ndim - 1)))
    one = np.asarray(1.0, dtype=x0.dtype)
    return (one - t_arr) * x0 + t_arr * eps


def velocity_target(x0: np.ndarray, eps: np.ndarray) -> np.ndarray:
    """Constant velocity of the straight-line path: eps - x0."""
    if x0.shape != eps.shape:
        raise ValueError(f"shape mismatch: {x0.shape} vs {eps.shape}")
    return eps - x0


def time_features(t: np.ndarray, dim: int, dtype=np.float32) -> np.ndarray:
    """Sinusoidal features [sin(pi 2^j t), cos(pi 2^j t)], j = 0..dim/2-1."""
    if dim % 2 != 0:
        raise ValueError("time embedding dim must be even")
    t = np.asarray(t, dtype=np.float64).reshape(-1, 1)
    freqs = np.pi * (2.0 ** np.arange(dim // 2))
    angles = t * freqs
    return np.concatenate([np.sin(angles), np.cos(angles)], axis=1).astype(dtype)


def _im2col3(x: np.ndarray) -> np.ndarray:
    """(B, H, W, C) -> (B*H*W, 9*C) patches of the zero-padded input."""
    b, h, w, c = x.shape
    xp = np.zeros((b, h + 2, w + 2, c), dtype=x.dtype)
    xp[:, 1:-1, 1:-1, :] = x
    win = np.lib.stride_tricks.sliding_window_view(xp, (3, 3), axis=(1, 2))
    # win: (B, H, W, C, 3, 3) -> patch layout (ki, kj, C)
    return np.ascontiguousarray(win.transpose(0, 1, 2, 4, 5, 3)).reshape(b * h * w, 9 * c)


def _col2im3(dcols: np.ndarray, b: int, h: int, w: int, c: int) -> np.ndarray:
    d = dcols.reshape(b, h, w, 3, 3, c)
    dxp = np.zeros((b, h + 2, w + 2, c), dtype=dcols.dtype)
    for ki in range(3):
        for kj in range(3):
            dxp[:, ki:ki + h, kj:kj + w, :] += d[:, :, :, ki, kj, :]
    return dxp[:, 1:-1, 1:-1, :]


def _shift_bounds(h: int, ki: int) -> tuple[int, int]:
    """Output row range touched by kernel row ki under same-padding."""
    return max(0, 1 - ki), h - max(0, ki - 1)


def _conv3_small_forward(a: np.ndarray, w: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """3x3 same-pad conv for few output channels, avoiding the big im2col
    buffer: one (BHW, C) x (C, 9*Cout) GEMM plus nine shifted adds."""
    b, h, wd, c = a.shape
    cout = w.shape[0]
    wk = w.reshape(cout, 3, 3, c)
    g = (a.reshape(-1, c) @ wk.reshape(-1, c).T).reshape(b, h, wd, cout, 3, 3)
    y = np.zeros((b, h, wd, cout), dtype=a.dtype)
    for ki in range(3):
        i0, i1 = _shift_bounds(h, ki)
        for kj in range(3):
            j0, j1 = _shift_bounds(wd, kj)
            y[:, i0:i1, j0:j1, :] += g[:, i0 + ki - 1:i1 + ki - 1,
                                       j0 + kj - 1:j1 + kj - 1, :, ki, kj]
    return y + bias


def _conv3_small_backward(dv: np.ndarray, a: np.ndarray, w: np.ndarray):
    """Backward of _conv3_small_forward: builds the shifted-output stack
    (cheap, few channels) and reduces with two GEMMs."""
    b, h, wd, c = a.shape
    cout = w.shape[0]
    dg = np.zeros((b, h, wd, cout, 3, 3), dtype=dv.dtype)
    for ki in range(3):
        u0, u1 = max(0, ki - 1), h - max(0, 1 - ki)
        for kj in range(3):
            v0, v1 = max(0, kj - 1), wd - max(0, 1 - kj)
            dg[:, u0:u1, v0:v1, :, ki, kj] = dv[:, u0 + 1 - ki:u1 + 1 - ki,
                                                v0 + 1 - kj:v1 + 1 - kj, :]
    dg2 = dg.reshape(-1, cout * 9)
    aflat = a.reshape(-1, c)
    dw = (dg2.T @ aflat).reshape(cout, 9 * c)
    da = (dg2 @ w.reshape(-1, c)).reshape(b, h, wd, c)
    db = dv.sum(axis=(0, 1, 2))
    return da, dw, db


class VelocityNet:
    """v(x_t, t, count) with parameters in float32 (float64 for checks)."""

    def __init__(self, config: NetConfig, seed: int = 0, dtype=np.float32,
                 params: dict[str, np.ndarray] | None = None):
        self.config = config
        self.dtype = dtype
        if params is not None:
            self.params = {k: np.asarray(v, dtype=dtype).copy() for k, v in params.items()}
            return
        rng = np.random.default_rng(seed)
        cin = config.in_channels
        hid = config.hidden
        cimg = config.image_channels

        def he(shape, fan_in):
            return (rng.standard_normal(shape) * np.sqrt(2.0 / fan_in)).astype(dtype)

        # w1/w3 columns follow the (ki, kj, channel) patch layout of _im2col3
        self.params = {
            "w1": he((hid, 9 * cin), 9 * cin),
            "b1": np.zeros(hid, dtype=dtype),
            "w2": he((hid, hid), hid),
            "b2": np.zeros(hid, dtype=dtype),
            "w3": he((cimg, 9 * hid), 9 * hid),
            "b3": np.zeros(cimg, dtype=dtype),
            "emb": (rng.standard_normal((config.k_max + 1, config.count_dim)) * 0.5).astype(dtype),
        }

    def astype(self, dtype) -> "VelocityNet":
        return VelocityNet(self.config, dtype=dtype, params=self.params)

    def _act(self, z: np.ndarray) -> np.ndarray:
        if self.config.activation == "silu":
            return z / (1.0 + np.exp(-z))
        if self.config.activation == "relu":
            return np.maximum(z, 0)
        return z

    def _act_grad(self, z: np.ndarray) -> np.ndarray:
        if self.config.activation == "silu":
            s = 1.0 / (1.0 + np.exp(-z))
            return s * (1.0 + z * (1.0 - s))
        if self.config.activation == "relu":
            return (z > 0).astype(z.dtype)
        return np.ones_like(z)

    def _assemble_input(self, x: np.ndarray, t: np.ndarray, c: np.ndarray) -> np.ndarray:
        """Channels-last input map (B, H, W, Cin)."""
        cfg = self.config
        b, _, h, w = x.shape
        c = np.asarray(c, dtype=np.int64)
        if np.any(c < 0) or np.any(c > cfg.k_max):
            raise ValueError(f"count index out of range 0..{cfg.k_max}")
        inp = np.empty((b, h, w, cfg.in_channels), dtype=self.dtype)
        inp[..., :cfg.image_channels] = x.transpose(0, 2, 3, 1)
        tf = time_features(t, cfg.time_dim, dtype=self.dtype)
        ce = self.params["emb"][c]
        inp[..., cfg.image_channels:cfg.image_channels + cfg.time_dim] = tf[:, None, None, :]
        inp[..., cfg.image_channels + cfg.time_dim:] = ce[:, None, None, :]
        return inp

    def forward(self, x: np.ndarray, t: np.ndarray, c: np.ndarray) -> np.ndarray:
        v, _ = self._forward_cached(x, t, c)
        return v

    def _forward_cached(self, x, t, c):
        p = self.params
        b, _, h, w = x.shape
        cimg = self.config.image_channels
        inp = self._assemble_input(x, t, c)
        cols1 = _im2col3(inp)                      # (BHW, 9*Cin)
        z1 = cols1 @ p["w1"].T + p["b1"]           # (BHW, hidden)
        a1 = self._act(z1)
        z2 = a1 @ p["w2"].T + p["b2"]
        a2 = self._act(z2).reshape(b, h, w, -1)
        v_last = _conv3_small_forward(a2, p["w3"], p["b3"])
        v = v_last.transpose(0, 3, 1, 2)
        return v, (b, h, w, z1, cols1, a1, z2, a2)

    def loss_and_grads(self, x: np.ndarray, t: np.ndarray, c: np.ndarray,
                       target: np.ndarray):
        """Mean squared velocity error and gradients for every parameter."""
        p = self.params
        cfg = self.config
        v, (b, h, w, z1, cols1, a1, z2, a2) = self._forward_cached(x, t, c)
        diff = v - target.astype(self.dtype)
        loss = float(np.mean(diff.astype(np.float64) ** 2))
        dv = np.ascontiguousarray(
            ((2.0 / diff.size) * diff).transpose(0, 2, 3, 1), dtype=self.dtype)

        da2, dw3, db3 = _conv3_small_backward(dv, a2, p["w3"])
        dz2 = da2.reshape(-1, cfg.hidden) * self._act_grad(z2)
        dw2 = dz2.T @ a1
        db2 = dz2.sum(axis=0)
        da1 = dz2 @ p["w2"]
        dz1 = da1 * self._act_grad(z1)
        dw1 = dz1.T @ cols1
        db1 = dz1.sum(axis=0)
        dcols1 = dz1 @ p["w1"]
        dinp = _col2im3(dcols1, b, h, w, cfg.in_channels)

        demb_feat = dinp[..., cfg.image_channels + cfg.time_dim:].sum(axis=(1, 2))
        gemb = np.zeros_like(p["emb"])
        np.add.at(gemb, np.asarray(c, dtype=np.int64), demb_feat)
        grads = {"w1": dw1, "b1": db1, "w2": dw2, "b2": db2,
                 "w3": dw3, "b3": db3, "emb": gemb}
        return loss, grads

    def sgd_step(self, grads: dict[str, np.ndarray], lr: float) -> None:
        for name in PARAM_ORDER:
            self.params[name] -= np.asarray(lr, dtype=self.dtype) * grads[name].astype(self.dtype)

    def n_params(self) -> int:
        return sum(p.size for p in self.params.values())


def grad_check(model: VelocityNet, x0: np.ndarray, count: int, h: float = 1e-4,
               n_checks: int = 64, seed: int = 0) -> float:
    """Max relative error between analytic gradients and central finite
    differences on a random parameter subset, computed in float64.

    The default step keeps the difference interval small enough that it
    rarely straddles a ReLU kink, where the finite-difference side itself
    goes wrong for piecewise-linear activations.
    """
    m = model.astype(np.float64)
    rng = np.random.default_rng(seed)
    x0b = x0.astype(np.float64)[None]
    eps = rng.standard_normal(x0b.shape)
    t = np.array([rng.uniform(0.2, 0.8)])
    c = np.array([count])
    x_t = forward_interpolate(x0b, eps, t)
    target = velocity_target(x0b, eps)

    _, grads = m.loss_and_grads(x_t, t, c, target)
    sizes = [m.params[k].size for k in PARAM_ORDER]
    total = sum(sizes)
    flat_idx = rng.choice(total, size=min(n_checks, total), replace=False)
    offsets = np.cumsum([0] + sizes)

    worst = 0.0
    for fi in sorted(int(i) for i in flat_idx):
        gi = int(np.searchsorted(offsets, fi, side="right")) - 1
        name = PARAM_ORDER[gi]
        local = fi - offsets[gi]
        param = m.params[name]
        orig = param.flat[local]
        param.flat[local] = orig + h
        lp, _ = m.loss_and_grads(x_t, t, c, target)
        param.flat[local] = orig - h
        lm, _ = m.loss_and_grads(x_t, t, c, target)
        param.flat[local] = orig
        fd = (lp - lm) / (2.0 * h)
        an = float(grads[name].flat[local])
        denom = max(abs(fd), abs(an), 1e-8)
        worst = max(worst, abs(fd - an) / denom)
    return worst
