"""Command-line interface.

One executable with subcommands for the whole pipeline: dataset generation,
noise construction, training, sampling, classification, oracle evaluation,
spatial analysis, noise probing, and report emission.

Config precedence is CLI flags > TOML config file (``--config``) > built-in
defaults; every run persists its fully-resolved configuration as
``run.json`` in the output directory.  The ``NUMGEN_OUT`` environment
variable overrides the output directory.  Exit codes: 0 success, 1 runtime
failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from . import _kernels
from .data_engine import DEFAULT_CATEGORIES, DatasetConfig, generate_dataset, load_manifest
from .layout import LayoutSpec, PlacementFailure, plan_random_layout
from .metrics import bucket_report, exact_accuracy, mean_absolute_error, tolerance_accuracy
from .noise import PriorConfig, apply_prior, map_boxes_to_latent, sample_noise
from .ntf import write_ntf
from .oracle import count_components, evaluate_set
from .reporting import (
    read_components_jsonl,
    read_pairs_csv,
    write_components_jsonl,
    write_histogram_csv,
    write_metrics_csv,
    write_metrics_json,
    write_modes_csv,
    write_pairs_csv,
    write_stability_csv,
)
from .seeds import derive_seed
from .stats import DEFAULT_TAUS, mode_preference, stability_table
from .svg import bar_svg, scatter_svg

log = logging.getLogger("numgen")


class ConfigError(ValueError):
    pass


def _parse_range(text: str) -> tuple[int, int]:
    """'1..50' -> (1, 50); a single integer n means n..n."""
    if ".." in text:
        lo, hi = text.split("..", 1)
        return int(lo), int(hi)
    v = int(text)
    return v, v


def _parse_categories(text: str) -> tuple[str, ...]:
    if text.isdigit():
        n = int(text)
        if n < 1 or n > len(DEFAULT_CATEGORIES):
            raise ConfigError(f"--categories count must be 1..{len(DEFAULT_CATEGORIES)}")
        return DEFAULT_CATEGORIES[:n]
    return tuple(s.strip() for s in text.split(",") if s.strip())


_PRIOR_NAMES = {"scaled": "uniform_scaled", "fixed": "fixed", "gaussian": "gaussian"}


def _prior_from(resolved: dict) -> PriorConfig | None:
    name = resolved.get("prior", "none")
    if name in (None, "none"):
        return None
    if name not in _PRIOR_NAMES:
        raise ConfigError(f"--prior must be one of none|scaled|fixed|gaussian, got {name!r}")
    return PriorConfig(_PRIOR_NAMES[name], gamma=resolved["gamma"],
                       fixed_seed=resolved["fixed_seed"], w=resolved["w"],
                       alpha=resolved["alpha"])


def _resolve(args: argparse.Namespace, defaults: dict) -> dict:
    """Merge CLI flags over config-file values over defaults."""
    file_cfg = {}
    if getattr(args, "config", None):
        with open(args.config, "rb") as f:
            doc = tomllib.load(f)
        file_cfg = doc.get(args.command, doc)
    resolved = dict(defaults)
    for key in defaults:
        if key in file_cfg:
            resolved[key] = file_cfg[key]
        cli_val = getattr(args, key, None)
        if cli_val is not None:
            resolved[key] = cli_val
    return resolved


def _out_dir(resolved: dict) -> Path:
    out = os.environ.get("NUMGEN_OUT") or resolved.get("out")
    if not out:
        raise ConfigError("an output directory is required (--out or NUMGEN_OUT)")
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_run_json(out: Path, command: str, resolved: dict) -> None:
    doc = {"command": command, "kernel_backend": _kernels.BACKEND}
    doc.update({k: (str(v) if isinstance(v, Path) else v) for k, v in resolved.items()})
    (out / "run.json").write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n",
                                  encoding="utf-8")


def _add_prior_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--prior", choices=["none", "scaled", "fixed", "gaussian"])
    p.add_argument("--gamma", type=float, help="in-box scale factor (scaled prior)")
    p.add_argument("--fixed-seed", dest="fixed_seed", type=int,
                   help="seed of the canonical replacement sample (fixed prior)")
    p.add_argument("--w", type=float, help="bump weight (gaussian prior)")
    p.add_argument("--alpha", type=float, help="sigma = alpha * |(box_w, box_h)| (gaussian prior)")


_PRIOR_DEFAULTS = {"prior": "none", "gamma": 0.1, "fixed_seed": 0, "w": 0.3, "alpha": 0.8}


# ---------------------------------------------------------------- gen-data

_GEN_DATA_DEFAULTS = {
    "out": None, "counts": "1..50", "per_cell": 2, "categories": "10",
    "layout": "random", "canvas": 512, "fill": 0.25, "max_attempts": 1000,
    "background_gray": 200, "count_style": "numeral", "seed": 0,
    "variable_size": False, "layer_dir": None, "sidecars": False, "jobs": 1,
    "styles": None,
}


def _cmd_gen_data(args) -> int:
    resolved = _resolve(args, _GEN_DATA_DEFAULTS)
    out = _out_dir(resolved)
    lo, hi = _parse_range(str(resolved["counts"]))
    kwargs = {}
    if resolved["styles"]:
        kwargs["styles"] = tuple(str(resolved["styles"]).split(","))
    config = DatasetConfig(
        out_dir=out,
        categories=_parse_categories(str(resolved["categories"])),
        count_min=lo, count_max=hi,
        samples_per=int(resolved["per_cell"]),
        layout_type=str(resolved["layout"]),
        canvas_w=int(resolved["canvas"]), canvas_h=int(resolved["canvas"]),
        fill_fraction=float(resolved["fill"]),
        max_attempts=int(resolved["max_attempts"]),
        background_gray=int(resolved["background_gray"]),
        count_style=str(resolved["count_style"]),
        master_seed=int(resolved["seed"]),
        variable_size=bool(resolved["variable_size"]),
        layer_dir=resolved["layer_dir"],
        write_layout_sidecars=bool(resolved["sidecars"]),
        jobs=int(resolved["jobs"]),
        **kwargs,
    )
    _write_run_json(out, "gen-data", resolved)
    manifest = generate_dataset(config)
    log.info("wrote %d records to %s", config.n_records, manifest)
    print(manifest)
    return 0


# ---------------------------------------------------------------- gen-noise

_GEN_NOISE_DEFAULTS = {
    "out": None, "channels": 1, "height": 64, "width": 64, "seed": 0,
    "count": None, "layout_json": None, "canvas": 512, "fill": 0.25,
    "max_attempts": 1000, **_PRIOR_DEFAULTS,
}


def _cmd_gen_noise(args) -> int:
    resolved = _resolve(args, _GEN_NOISE_DEFAULTS)
    out = _out_dir(resolved)
    _write_run_json(out, "gen-noise", resolved)
    noise = sample_noise(int(resolved["channels"]), int(resolved["height"]),
                         int(resolved["width"]), int(resolved["seed"]))
    write_ntf(out / "noise.ntf", noise)
    prior = _prior_from(resolved)
    if prior is not None:
        if resolved["layout_json"]:
            layout = LayoutSpec.from_dict(
                json.loads(Path(resolved["layout_json"]).read_text(encoding="utf-8")))
        elif resolved["count"] is not None:
            layout = plan_random_layout(
                int(resolved["count"]), int(resolved["canvas"]), int(resolved["canvas"]),
                float(resolved["fill"]), int(resolved["max_attempts"]),
                seed=derive_seed(int(resolved["seed"]), 1))
        else:
            raise ConfigError("a prior needs --layout-json or --count")
        boxes = map_boxes_to_latent(layout, noise.shape[1], noise.shape[2])
        write_ntf(out / "noise_prior.ntf", apply_prior(noise, boxes, prior))
        (out / "layout.json").write_text(
            json.dumps(layout.to_dict(), sort_keys=True) + "\n", encoding="utf-8")
    log.info("noise written to %s", out)
    return 0


# ---------------------------------------------------------------- train

_TRAIN_DEFAULTS = {
    "out": None, "manifest": None, "steps": 2000, "batch_size": 16,
    "lr": 0.02, "timestep": "uniform", "logit_mu": 0.0, "logit_sigma": 1.0,
    "shared_noise": False, "cond_dropout": 0.1, "seed": 0, "hidden": 64,
    **_PRIOR_DEFAULTS,
}


def _cmd_train(args) -> int:
    from .flow import NetConfig, TrainConfig, load_training_set, save_model, train

    resolved = _resolve(args, _TRAIN_DEFAULTS)
    if not resolved["manifest"]:
        raise ConfigError("--manifest is required")
    out = _out_dir(resolved)
    _write_run_json(out, "train", resolved)
    ds = load_training_set(resolved["manifest"])
    strategy = str(resolved["timestep"]).replace("-", "_")
    config = TrainConfig(
        batch_size=int(resolved["batch_size"]), steps=int(resolved["steps"]),
        learning_rate=float(resolved["lr"]), timestep_strategy=strategy,
        logit_mu=float(resolved["logit_mu"]), logit_sigma=float(resolved["logit_sigma"]),
        shared_noise_batching=bool(resolved["shared_noise"]),
        cond_dropout_prob=float(resolved["cond_dropout"]),
        seed=int(resolved["seed"]), prior=_prior_from(resolved),
    )
    net_config = NetConfig(image_channels=ds.x0.shape[1], height=ds.x0.shape[2],
                           width=ds.x0.shape[3], hidden=int(resolved["hidden"]),
                           k_max=int(ds.counts.max()))
    model, losses = train(ds.x0, ds.counts, config, net_config,
                          latent_boxes=ds.latent_boxes, log_every=200)
    ckpt = out / "checkpoint"
    save_model(model, ckpt, extra={"background_gray": ds.background_gray,
                                   "train_seed": config.seed})
    with open(out / "loss.csv", "w", encoding="utf-8") as f:
        f.write("step,loss\n")
        for i, loss in enumerate(losses):
            f.write(f"{i},{loss:.8g}\n")
    log.info("loss %.4f -> %.4f; checkpoint at %s", losses[0],
             float(np.mean(losses[-50:])), ckpt)
    print(ckpt)
    return 0


# ---------------------------------------------------------------- sample

_SAMPLE_DEFAULTS = {
    "out": None, "ckpt": None, "counts": None, "per_count": 1,
    "ode_steps": 50, "cfg_scale": 3.5, "seed": 0, "fill": 0.25,
    "max_attempts": 1000, **_PRIOR_DEFAULTS,
}


def _cmd_sample(args) -> int:
    from .flow import SampleConfig, euler_sample, load_model, plan_sample_layout, unit_to_image
    from PIL import Image

    resolved = _resolve(args, _SAMPLE_DEFAULTS)
    if not resolved["ckpt"]:
        raise ConfigError("--ckpt is required")
    out = _out_dir(resolved)
    _write_run_json(out, "sample", resolved)
    model, extra = load_model(resolved["ckpt"])
    bg = int(extra.get("background_gray", 200))
    k_max = model.config.k_max
    lo, hi = _parse_range(str(resolved["counts"])) if resolved["counts"] else (1, k_max)
    prior = _prior_from(resolved)
    (out / "images").mkdir(exist_ok=True)
    records = []
    rid = 0
    for count in range(lo, hi + 1):
        for s in range(int(resolved["per_count"])):
            noise_seed = derive_seed(int(resolved["seed"]), rid)
            eps = sample_noise(model.config.image_channels, model.config.height,
                               model.config.width, noise_seed)
            sc = SampleConfig(ode_steps=int(resolved["ode_steps"]),
                              cfg_scale=float(resolved["cfg_scale"]), prior=prior,
                              seed=noise_seed, fill_fraction=float(resolved["fill"]),
                              max_attempts=int(resolved["max_attempts"]))
            img = euler_sample(model, eps, count, sc)
            rel = f"images/sample_{rid:05d}_c{count:02d}.png"
            Image.fromarray(unit_to_image(img[0])).save(out / rel, format="PNG")
            rec = {
                "record_id": rid, "image_path": rel, "count": count,
                "category": "sample", "template_id": 0,
                "prompt": f"{count} objects", "image_seed": noise_seed,
                "background_gray": bg,
                "layout": (plan_sample_layout(count, model.config.height,
                                              model.config.width, sc).to_dict()
                           if prior is not None else None),
            }
            records.append(rec)
            rid += 1
    manifest = out / "manifest.jsonl"
    with open(manifest, "w", encoding="utf-8") as f:
        for rec in records:
            f.write(json.dumps(rec, sort_keys=True, separators=(",", ":")) + "\n")
    print(manifest)
    return 0


# ---------------------------------------------------------------- classify

_CLASSIFY_DEFAULTS = {
    "out": None, "ckpt": None, "manifest": None, "candidates": None,
    "coarse": 8, "top_m": 4, "refine": 32, "seed": 0, "jobs": 1,
}

_CLS_MODEL = None


def _classify_init(ckpt: str) -> None:
    from .flow import load_model

    _classify_init_model(load_model(ckpt)[0])


def _classify_init_model(model) -> None:
    global _CLS_MODEL
    _CLS_MODEL = model


def _classify_job(task):
    from .flow import classify_coarse_to_fine, image_to_unit
    from .oracle import load_image

    manifest_dir, rec, config = task
    img = load_image(manifest_dir / rec["image_path"])
    x = image_to_unit(img[:, :, 0])[None]
    result = classify_coarse_to_fine(_CLS_MODEL, x, config)
    true_k = int(rec["count"])
    in_range = min(config.candidates) <= true_k <= max(config.candidates)
    return (int(rec["record_id"]), true_k, result.k_hat,
            result.rank_of(true_k, "coarse") if in_range else "",
            result.rank_of(true_k, "refined") if in_range else "")


def _cmd_classify(args) -> int:
    from .flow import ClassifierConfig, load_model

    resolved = _resolve(args, _CLASSIFY_DEFAULTS)
    if not resolved["ckpt"] or not resolved["manifest"]:
        raise ConfigError("--ckpt and --manifest are required")
    out = _out_dir(resolved)
    _write_run_json(out, "classify", resolved)
    model, _ = load_model(resolved["ckpt"])
    k_max = model.config.k_max
    lo, hi = (_parse_range(str(resolved["candidates"]))
              if resolved["candidates"] else (1, k_max))
    config = ClassifierConfig(candidates=tuple(range(lo, hi + 1)),
                              coarse_timesteps=int(resolved["coarse"]),
                              top_m=int(resolved["top_m"]),
                              refine_timesteps=int(resolved["refine"]),
                              seed=int(resolved["seed"]))
    manifest_path = Path(resolved["manifest"])
    records = load_manifest(manifest_path)
    jobs = int(resolved["jobs"])
    tasks = [(manifest_path.parent, rec, config) for rec in records]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        ckpt = str(resolved["ckpt"])
        with ProcessPoolExecutor(max_workers=jobs, initializer=_classify_init,
                                 initargs=(ckpt,)) as pool:
            rows = list(pool.map(_classify_job, tasks,
                                 chunksize=max(1, len(tasks) // (jobs * 4))))
    else:
        _classify_init_model(model)
        rows = [_classify_job(task) for task in tasks]
    rows.sort(key=lambda r: r[0])
    with open(out / "predictions.csv", "w", encoding="utf-8") as f:
        f.write("record_id,requested,predicted,coarse_rank,refined_rank\n")
        for row in rows:
            f.write(",".join(str(v) for v in row) + "\n")
    write_pairs_csv(out / "pairs.csv", [(r, t, p) for r, t, p, _, _ in rows])
    acc = float(np.mean([t == p for _, t, p, _, _ in rows])) if rows else 0.0
    log.info("classified %d images, top-1 accuracy %.3f", len(rows), acc)
    print(out / "predictions.csv")
    return 0


# ---------------------------------------------------------------- eval

_EVAL_DEFAULTS = {
    "out": None, "manifest": None, "delta": 16, "connectivity": 8,
    "min_area": 4, "background_gray": None, "jobs": 1,
}


def _cmd_eval(args) -> int:
    resolved = _resolve(args, _EVAL_DEFAULTS)
    if not resolved["manifest"]:
        raise ConfigError("--manifest is required")
    out = _out_dir(resolved)
    _write_run_json(out, "eval", resolved)
    manifest_path = Path(resolved["manifest"])
    results, errors = evaluate_set(
        manifest_path, delta=int(resolved["delta"]),
        connectivity=int(resolved["connectivity"]),
        min_area=int(resolved["min_area"]),
        background_gray=(int(resolved["background_gray"])
                         if resolved["background_gray"] is not None else None),
        jobs=int(resolved["jobs"]))
    records = {int(r["record_id"]): r for r in load_manifest(manifest_path)}
    write_pairs_csv(out / "pairs.csv",
                    [(rid, pair.requested, pair.predicted) for rid, pair, _ in results])
    entries = []
    for rid, pair, report in results:
        rec = records[rid]
        layout = rec.get("layout")
        w = layout["canvas_w"] if layout else 0
        h = layout["canvas_h"] if layout else 0
        entries.append((rid, pair.requested, w, h, report))
    write_components_jsonl(out / "components.jsonl", entries)
    if errors:
        with open(out / "errors.csv", "w", encoding="utf-8") as f:
            f.write("record_id,error\n")
            for rid, msg in errors:
                f.write(f"{rid},{msg.replace(',', ';')}\n")
        log.warning("%d records failed to evaluate", len(errors))
    pairs = [(p.requested, p.predicted) for _, p, _ in results]
    if pairs:
        log.info("EAcc=%.4f MAE=%.4f TAcc=%.4f over %d records",
                 exact_accuracy(pairs), mean_absolute_error(pairs),
                 tolerance_accuracy(pairs), len(pairs))
    print(out / "pairs.csv")
    return 0


# ---------------------------------------------------------------- analyze

_ANALYZE_DEFAULTS = {
    "out": None, "components": None, "manifest": None, "taus": None,
    "seed": 0, "restarts": 1, "svg": False,
}


def _cmd_analyze(args) -> int:
    resolved = _resolve(args, _ANALYZE_DEFAULTS)
    if not resolved["components"]:
        raise ConfigError("--components is required")
    out = _out_dir(resolved)
    _write_run_json(out, "analyze", resolved)
    docs = read_components_jsonl(resolved["components"])
    taus = (tuple(float(t) for t in str(resolved["taus"]).split(","))
            if resolved["taus"] else DEFAULT_TAUS)

    groups: dict[int, list[tuple[float, float]]] = {}
    for doc in docs:
        n = int(doc["predicted"])
        w, h = doc.get("image_w") or 0, doc.get("image_h") or 0
        if n < 1 or not w or not h:
            continue
        pts = [((c["x"] + c["w"] / 2.0) / w, (c["y"] + c["h"] / 2.0) / h)
               for c in doc["components"]]
        groups.setdefault(n, []).extend(pts)
    groups_arr = {n: np.asarray(p) for n, p in groups.items()}

    table = stability_table(groups_arr, taus=taus, seed=int(resolved["seed"]),
                            restarts=int(resolved["restarts"]))
    ns = sorted({rec.n for recs in table.values() for rec in recs})
    write_stability_csv(out / "stability.csv", table, ns)

    from .stats import cluster_groups
    clustered = cluster_groups(groups_arr, seed=int(resolved["seed"]),
                               restarts=int(resolved["restarts"]))
    clusters_doc = {
        str(n): {"centers": [[float(x), float(y)] for x, y in r.centers],
                 "inertia": r.inertia, "iterations": r.iterations}
        for n, r in clustered.items()
    }
    (out / "clusters.json").write_text(
        json.dumps(clusters_doc, sort_keys=True, indent=2) + "\n", encoding="utf-8")

    # per-noise-seed count modes (meaningful for probe outputs)
    mode_rows = []
    if resolved["manifest"]:
        by_seed: dict[int, list[int]] = {}
        preds = {int(d["record_id"]): int(d["predicted"]) for d in docs}
        for rec in load_manifest(resolved["manifest"]):
            rid = int(rec["record_id"])
            if rid in preds:
                seed = int(rec.get("noise_seed", rec.get("image_seed", 0)))
                by_seed.setdefault(seed, []).append(preds[rid])
        for seed in sorted(by_seed):
            mode, conc = mode_preference(by_seed[seed])
            mode_rows.append((seed, mode, conc))
    write_modes_csv(out / "modes.csv", mode_rows)

    if resolved["svg"]:
        for n, r in sorted(clustered.items()):
            pts = [(float(x), float(y)) for x, y in groups_arr[n]]
            (out / f"centers_n{n:02d}.svg").write_text(
                scatter_svg(pts, f"object centers, actual count {n}",
                            "x", "y", diagonal=False), encoding="utf-8")
    print(out / "stability.csv")
    return 0


# ---------------------------------------------------------------- probe-noise

_PROBE_DEFAULTS = {
    "out": None, "ckpt": None, "n_seeds": 50, "counts": None,
    "ode_steps": 50, "cfg_scale": 1.5, "seed": 0, "save_images": False,
    **_PRIOR_DEFAULTS,
}


def _cmd_probe_noise(args) -> int:
    from PIL import Image

    from .flow import SampleConfig, euler_sample, load_model, unit_to_image

    resolved = _resolve(args, _PROBE_DEFAULTS)
    if not resolved["ckpt"]:
        raise ConfigError("--ckpt is required")
    out = _out_dir(resolved)
    _write_run_json(out, "probe-noise", resolved)
    model, extra = load_model(resolved["ckpt"])
    bg = int(extra.get("background_gray", 200))
    k_max = model.config.k_max
    lo, hi = _parse_range(str(resolved["counts"])) if resolved["counts"] else (1, k_max)
    prior = _prior_from(resolved)
    n_bins = k_max + 5
    hist_rows, mode_rows, records, pair_rows = [], [], [], []
    rid = 0
    if resolved["save_images"]:
        (out / "images").mkdir(exist_ok=True)
    for i in range(int(resolved["n_seeds"])):
        noise_seed = derive_seed(int(resolved["seed"]), i)
        eps = sample_noise(model.config.image_channels, model.config.height,
                           model.config.width, noise_seed)
        predicted = []
        for count in range(lo, hi + 1):
            sc = SampleConfig(ode_steps=int(resolved["ode_steps"]),
                              cfg_scale=float(resolved["cfg_scale"]),
                              prior=prior, seed=noise_seed)
            img = euler_sample(model, eps, count, sc)
            u8 = unit_to_image(img[0])
            pred = count_components(u8, background_gray=bg).count
            predicted.append(pred)
            pair_rows.append((rid, count, pred))
            if resolved["save_images"]:
                rel = f"images/probe_s{i:03d}_c{count:02d}.png"
                Image.fromarray(u8).save(out / rel, format="PNG")
                records.append({"record_id": rid, "image_path": rel, "count": count,
                                "category": "probe", "template_id": 0,
                                "prompt": f"{count} objects", "image_seed": noise_seed,
                                "noise_seed": noise_seed, "background_gray": bg,
                                "layout": None})
            rid += 1
        hist = np.bincount(np.clip(predicted, 0, n_bins), minlength=n_bins + 1)
        hist_rows.append((noise_seed, [int(v) for v in hist[:n_bins]] + [int(hist[n_bins])]))
        mode, conc = mode_preference(predicted)
        mode_rows.append((noise_seed, mode, conc))
    write_histogram_csv(out / "histograms.csv",
                        [(s, h) for s, h in hist_rows], n_bins)
    write_modes_csv(out / "modes.csv", mode_rows)
    write_pairs_csv(out / "pairs.csv", pair_rows)
    mean_conc = float(np.mean([c for _, _, c in mode_rows]))
    summary = {
        "n_seeds": int(resolved["n_seeds"]), "counts": [lo, hi],
        "mean_concentration": mean_conc,
        # context line observed in large-scale text-to-image studies
        "reference_concentration_large_scale": 0.5,
    }
    (out / "probe_summary.json").write_text(
        json.dumps(summary, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    if records:
        with open(out / "manifest.jsonl", "w", encoding="utf-8") as f:
            for rec in records:
                f.write(json.dumps(rec, sort_keys=True, separators=(",", ":")) + "\n")
    print(f"mean_concentration={mean_conc:.4f} (large-scale reference: 0.5)")
    return 0


# ---------------------------------------------------------------- report

_REPORT_DEFAULTS = {
    "out": None, "pairs": None, "edges": "1,10,20,30", "tolerance": 2,
    "svg": False,
}


def _cmd_report(args) -> int:
    resolved = _resolve(args, _REPORT_DEFAULTS)
    if not resolved["pairs"]:
        raise ConfigError("--pairs is required")
    out = _out_dir(resolved)
    _write_run_json(out, "report", resolved)
    rows = read_pairs_csv(resolved["pairs"])
    if rows.skipped:
        log.warning("skipped %d malformed pairs rows", rows.skipped)
    if not rows:
        raise ConfigError(f"{resolved['pairs']}: no usable pairs")
    pairs = [(req, pred) for _, req, pred in rows]
    edges = tuple(int(e) for e in str(resolved["edges"]).split(","))
    report = bucket_report(pairs, edges=edges, t=int(resolved["tolerance"]))
    write_metrics_csv(out / "metrics.csv", report)
    write_metrics_json(out / "metrics.json", report)
    with open(out / "scatter.csv", "w", encoding="utf-8") as f:
        f.write("requested,predicted\n")
        for req, pred in pairs:
            f.write(f"{req},{pred}\n")
    max_pred = max(max(p for _, p in pairs), max(r for r, _ in pairs))
    hist = np.bincount([p for _, p in pairs], minlength=max_pred + 1)
    with open(out / "histogram.csv", "w", encoding="utf-8") as f:
        f.write("predicted,n\n")
        for v, n in enumerate(hist):
            f.write(f"{v},{int(n)}\n")
    if resolved["svg"]:
        (out / "scatter.svg").write_text(
            scatter_svg([(float(r), float(p)) for r, p in pairs],
                        "predicted vs requested count"), encoding="utf-8")
        (out / "histogram.svg").write_text(
            bar_svg([str(v) for v in range(len(hist))],
                    [float(n) for n in hist], "predicted count histogram"),
            encoding="utf-8")
    for row in report.rows():
        print(f"{row.label}: n={row.n} EAcc={row.exact_accuracy:.4f} "
              f"TAcc={row.tolerance_accuracy:.4f} MAE={row.mae:.4f}")
    return 0


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="numgen",
        description="Count-exact synthetic data, count-aware noise priors, "
                    "counting metrics, and a desk-scale rectified-flow model.")
    parser.add_argument("--log-level", default="INFO",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, defaults):
        p = sub.add_parser(name)
        p.set_defaults(func=fn, defaults=defaults)
        p.add_argument("--config", help="TOML config file")
        p.add_argument("--out", "-o", help="output directory")
        return p

    p = add("gen-data", _cmd_gen_data, _GEN_DATA_DEFAULTS)
    p.add_argument("--counts", help="count range, e.g. 1..50")
    p.add_argument("--per-cell", dest="per_cell", type=int,
                   help="samples per (category, count)")
    p.add_argument("--categories", help="category count or comma list")
    p.add_argument("--layout", choices=["random", "grid"])
    p.add_argument("--canvas", type=int)
    p.add_argument("--fill", type=float)
    p.add_argument("--max-attempts", dest="max_attempts", type=int)
    p.add_argument("--background-gray", dest="background_gray", type=int)
    p.add_argument("--count-style", dest="count_style", choices=["numeral", "word"])
    p.add_argument("--seed", type=int)
    p.add_argument("--variable-size", dest="variable_size", action="store_const", const=True)
    p.add_argument("--layer-dir", dest="layer_dir")
    p.add_argument("--sidecars", action="store_const", const=True)
    p.add_argument("--styles", help="comma list of glyph styles")
    p.add_argument("--jobs", type=int)

    p = add("gen-noise", _cmd_gen_noise, _GEN_NOISE_DEFAULTS)
    p.add_argument("--channels", type=int)
    p.add_argument("--height", type=int)
    p.add_argument("--width", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--count", type=int, help="plan a layout for this count")
    p.add_argument("--layout-json", dest="layout_json")
    p.add_argument("--canvas", type=int)
    p.add_argument("--fill", type=float)
    p.add_argument("--max-attempts", dest="max_attempts", type=int)
    _add_prior_flags(p)

    p = add("train", _cmd_train, _TRAIN_DEFAULTS)
    p.add_argument("--manifest")
    p.add_argument("--steps", type=int)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--timestep", choices=["uniform", "logit-normal"])
    p.add_argument("--logit-mu", dest="logit_mu", type=float)
    p.add_argument("--logit-sigma", dest="logit_sigma", type=float)
    p.add_argument("--shared-noise", dest="shared_noise", action="store_const", const=True)
    p.add_argument("--cond-dropout", dest="cond_dropout", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--hidden", type=int)
    _add_prior_flags(p)

    p = add("sample", _cmd_sample, _SAMPLE_DEFAULTS)
    p.add_argument("--ckpt")
    p.add_argument("--counts", help="count range, e.g. 1..8")
    p.add_argument("--per-count", dest="per_count", type=int)
    p.add_argument("--ode-steps", dest="ode_steps", type=int)
    p.add_argument("--cfg-scale", dest="cfg_scale", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--fill", type=float)
    p.add_argument("--max-attempts", dest="max_attempts", type=int)
    _add_prior_flags(p)

    p = add("classify", _cmd_classify, _CLASSIFY_DEFAULTS)
    p.add_argument("--ckpt")
    p.add_argument("--manifest")
    p.add_argument("--candidates", help="candidate count range, e.g. 1..8")
    p.add_argument("--coarse", type=int, help="coarse-stage timesteps")
    p.add_argument("--top-m", dest="top_m", type=int)
    p.add_argument("--refine", type=int, help="refinement-stage timesteps")
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int)

    p = add("eval", _cmd_eval, _EVAL_DEFAULTS)
    p.add_argument("--manifest")
    p.add_argument("--delta", type=int)
    p.add_argument("--connectivity", type=int, choices=[4, 8])
    p.add_argument("--min-area", dest="min_area", type=int)
    p.add_argument("--background-gray", dest="background_gray", type=int)
    p.add_argument("--jobs", type=int)

    p = add("analyze", _cmd_analyze, _ANALYZE_DEFAULTS)
    p.add_argument("--components")
    p.add_argument("--manifest")
    p.add_argument("--taus", help="comma list of stability thresholds")
    p.add_argument("--seed", type=int)
    p.add_argument("--restarts", type=int)
    p.add_argument("--svg", action="store_const", const=True)

    p = add("probe-noise", _cmd_probe_noise, _PROBE_DEFAULTS)
    p.add_argument("--ckpt")
    p.add_argument("--n-seeds", dest="n_seeds", type=int)
    p.add_argument("--counts")
    p.add_argument("--ode-steps", dest="ode_steps", type=int)
    p.add_argument("--cfg-scale", dest="cfg_scale", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--save-images", dest="save_images", action="store_const", const=True)
    _add_prior_flags(p)

    p = add("report", _cmd_report, _REPORT_DEFAULTS)
    p.add_argument("--pairs")
    p.add_argument("--edges", help="comma list of bucket edges")
    p.add_argument("--tolerance", type=int)
    p.add_argument("--svg", action="store_const", const=True)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level),
                        format="%(levelname)s %(name)s %(message)s",
                        stream=sys.stderr)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except PlacementFailure as exc:
        rid = getattr(exc, "record_id", None)
        where = f" (record {rid})" if rid is not None else ""
        print(f"error: {exc}{where}", file=sys.stderr)
        return 1
    except (OSError, ValueError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
