"""Model checkpoints: one NTF1 tensor per parameter group plus a JSON
config sidecar."""

from __future__ import annotations

import json
from pathlib import Path

from ..ntf import read_ntf, write_ntf
from .net import PARAM_ORDER, NetConfig, VelocityNet


def save_model(model: VelocityNet, ckpt_dir: str | Path, extra: dict | None = None) -> Path:
    ckpt_dir = Path(ckpt_dir)
    ckpt_dir.mkdir(parents=True, exist_ok=True)
    config = {"net": model.config.to_dict(), "params": list(PARAM_ORDER)}
    if extra:
        config["extra"] = extra
    (ckpt_dir / "config.json").write_text(
        json.dumps(config, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    for name in PARAM_ORDER:
        write_ntf(ckpt_dir / f"{name}.ntf", model.params[name])
    return ckpt_dir


def load_model(ckpt_dir: str | Path) -> tuple[VelocityNet, dict]:
    ckpt_dir = Path(ckpt_dir)
    config = json.loads((ckpt_dir / "config.json").read_text(encoding="utf-8"))
    net_config = NetConfig.from_dict(config["net"])
    params = {name: read_ntf(ckpt_dir / f"{name}.ntf") for name in config["params"]}
    model = VelocityNet(net_config, params=params)
    return model, config.get("extra", {})
