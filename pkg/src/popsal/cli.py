"""Command-line entry point.

Subcommands: generate, model run, evaluate, aggregate, plot. Options come
from flags, an optional JSON config file, and built-in defaults, in that
precedence order. Exit codes: 0 success, 1 validation error, 2 I/O error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np
from PIL import Image

from . import dataset_io, harness, stimgen
from .errors import MissingComponentError, OutputError, PopsalError, ValidationError
from .fixsim import FixationSimulator
from .models import MODEL_REGISTRY, make_model


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    p = Path(path)
    if not p.exists():
        raise MissingComponentError(f"config file not found: {p}")
    try:
        return json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ValidationError(f"config file {p} is not valid JSON: {e}") from e


def _pick(flag_value, config: dict, section: str, key: str, default):
    """flags > config file > default."""
    if flag_value is not None:
        return flag_value
    return config.get(section, {}).get(key, default)


def _simulator_from(args, config: dict) -> FixationSimulator:
    return FixationSimulator(
        suppression_radius=float(_pick(args.suppression_radius, config, "fixsim", "suppression_radius", 35.0)),
        hit_radius_base=float(_pick(args.hit_radius, config, "fixsim", "hit_radius_base", 35.0)),
        hit_radius_max=float(_pick(args.hit_radius_max, config, "fixsim", "hit_radius_max", 70.0)),
        max_fixations=int(_pick(args.max_fixations, config, "fixsim", "max_fixations", 100)),
    )


def _cmd_generate(args) -> int:
    config = _load_config(args.config)
    spec_kwargs = config.get("array", {})
    spec = stimgen.ArraySpec(**spec_kwargs)
    if "sweep" in config:
        sweep = stimgen.SweepConfig.from_dict(config["sweep"])
    else:
        sweep = stimgen.default_sweep()
    seed = args.seed if args.seed is not None else int(config.get("seed", 0))
    manifest = stimgen.gen_dataset(
        sweep,
        args.out,
        seed=seed,
        spec=spec,
        workers=args.workers,
        supersample=args.supersample,
    )
    total = sum(manifest.counts.values())
    print(f"generated {total} samples under {args.out}: {manifest.counts}")
    return 0


def _cmd_model_run(args) -> int:
    config = _load_config(args.config)
    overrides = dict(config.get("model", {}))
    overrides.pop("model", None)
    if args.center_bias:
        overrides["center_bias"] = True
    model = make_model(args.model, **overrides).fit()

    ids, _ = harness.dataset_ids(args.dataset)
    out_dir = Path(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OutputError(f"cannot create {out_dir}: {e}") from e

    dataset = Path(args.dataset)
    for sample_id in ids:
        image_path = dataset / "images" / f"{sample_id}.png"
        if not image_path.exists():
            raise MissingComponentError(f"missing image for {sample_id!r}: {image_path}")
        with Image.open(image_path) as im:
            image = np.asarray(im.convert("RGB"))
        saliency = model.saliency_map(image)
        dataset_io.save_saliency_map(saliency, out_dir / f"{sample_id}.png")
    print(f"wrote {len(ids)} saliency maps to {out_dir}")
    return 0


def _cmd_evaluate(args) -> int:
    config = _load_config(args.config)
    sim = _simulator_from(args, config)
    report = harness.run_eval(args.dataset, args.maps, simulator=sim, workers=args.workers)
    harness.write_report(report, args.out)
    print(f"evaluated {len(report.rows)} images -> {args.out}")
    return 0


def _cmd_aggregate(args) -> int:
    config = _load_config(args.config)
    report = harness.load_report(args.report)
    out_dir = Path(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OutputError(f"cannot create {out_dir}: {e}") from e

    max_fix = int(_pick(args.max_fixations, config, "fixsim", "max_fixations", 100))
    bin_widths = {}
    for feature in ("color", "orientation", "size"):
        flag = getattr(args, f"bin_width_{feature}")
        width = _pick(flag, config, "aggregate", f"bin_width_{feature}", None)
        if width is not None:
            bin_widths[feature] = float(width)

    budgets = args.budgets or config.get("aggregate", {}).get("budgets") or list(harness.DEFAULT_BUDGETS)
    budgets = sorted(int(b) for b in budgets)

    written: list[Path] = []
    curves = harness.aggregate_by_td(report, bin_widths=bin_widths, max_fixations=max_fix)
    if curves:
        written += harness.write_binned_curves(curves, out_dir)
    written += harness.write_detection_curves(harness.detection_curves(report, budgets), out_dir)

    if args.annotations:
        ann_dir = Path(args.annotations)
        sidecars = sorted(ann_dir.glob("*.json"))
        if not sidecars:
            raise MissingComponentError(f"no annotation sidecars under {ann_dir}")
        scenes = [dataset_io.load_scene_annotation(p) for p in sidecars]
        summary = harness.aggregate_scenes(report, scenes)
        summary_path = out_dir / "scene_summary.json"
        summary_path.write_text(json.dumps(summary.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        written.append(summary_path)

    print(f"wrote {len(written)} aggregation file(s) to {out_dir}")
    return 0


def _cmd_plot(args) -> int:
    in_dir = Path(args.in_dir)
    named = {}
    for path in sorted(in_dir.glob("binned_curve_*.csv")):
        curve = harness.load_binned_curve(path)
        named[f"gsi_{curve.feature}"] = curve
    for path in sorted(in_dir.glob("detection_curve_*.csv")):
        name = path.stem.replace("detection_curve_", "")
        named[f"detection_{name}"] = harness.load_detection_curve(path)
    paths = harness.emit_plots(named, args.out)
    print(f"wrote {len(paths)} SVG file(s) to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="popsal", description="Singleton search saliency benchmark")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a search-array dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--config", default=None, help="JSON config file")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--supersample", type=int, default=1, help="image-only anti-alias factor")
    p.set_defaults(func=_cmd_generate)

    p_model = sub.add_parser("model", help="built-in reference models")
    model_sub = p_model.add_subparsers(dest="model_command", required=True)
    p = model_sub.add_parser("run", help="run a model over a dataset")
    p.add_argument("--model", required=True, choices=sorted(MODEL_REGISTRY))
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--center-bias", action="store_true")
    p.add_argument("--config", default=None)
    p.set_defaults(func=_cmd_model_run)

    p = sub.add_parser("evaluate", help="score saliency maps against a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--maps", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--max-fixations", type=int, default=None)
    p.add_argument("--suppression-radius", type=float, default=None)
    p.add_argument("--hit-radius", type=float, default=None)
    p.add_argument("--hit-radius-max", type=float, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--config", default=None)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("aggregate", help="curves and tables from a report CSV")
    p.add_argument("--report", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--annotations", default=None, help="scene annotation dir for group tables")
    p.add_argument("--budgets", type=int, nargs="+", default=None)
    p.add_argument("--bin-width-color", type=float, default=None)
    p.add_argument("--bin-width-orientation", type=float, default=None)
    p.add_argument("--bin-width-size", type=float, default=None)
    p.add_argument("--max-fixations", type=int, default=None)
    p.add_argument("--config", default=None)
    p.set_defaults(func=_cmd_aggregate)

    p = sub.add_parser("plot", help="SVG charts from aggregation CSVs")
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_plot)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (MissingComponentError, OutputError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except PopsalError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
