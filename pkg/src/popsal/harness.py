"""Batch evaluation and aggregation: per-image rows, curves, scene tables.

``run_eval`` pairs every dataset image with a same-named saliency raster,
computes the discrimination metrics and a fixation trace, and yields a report
whose CSV serialization is byte-stable. Aggregations bin by target-distractor
difference (curve analogs), build detection-vs-budget curves, and summarize
annotated natural scenes by color vs non-color targets.
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import dataset_io
from .errors import MissingComponentError, ValidationError
from .fixsim import DetectionCurve, FixationSimulator, FixationTrace, detection_curve
from .metrics import evaluate_sample
from .svgplot import line_chart

SCHEMA_VERSION = "popsal-report/v1"
REPORT_COLUMNS = [
    "id",
    "feature",
    "td_value",
    "gsi",
    "msr_targ",
    "msr_bg",
    "found",
    "num_fixations",
    "s_target_mean",
    "s_distr_mean",
    "max_target",
    "max_distr",
    "max_bg",
]

DEFAULT_BUDGETS = (1, 5, 10, 25, 50, 75, 100)
DEFAULT_BIN_WIDTHS = {"color": 10.0, "orientation": 5.0, "size": 0.1}
_AXIS_NAMES = {"color": "hue_diff_deg", "orientation": "orientation_diff_deg", "size": "size_ratio"}


@dataclass
class EvalRow:
    id: str
    feature: str
    td_value: float | None
    gsi: float | None
    msr_targ: float | None
    msr_bg: float | None
    found: bool
    num_fixations: int
    s_target_mean: float
    s_distr_mean: float
    max_target: float
    max_distr: float
    max_bg: float


@dataclass
class EvalReport:
    rows: list[EvalRow]
    config_snapshot: dict = field(default_factory=dict)
    dataset_manifest_ref: str = ""


def _map_path(maps_dir: Path, sample_id: str) -> Path:
    return maps_dir / f"{sample_id}.png"


def _eval_one(args) -> EvalRow:
    dataset_dir, maps_dir, sample_id, is_scene, sim_params = args
    dataset_dir = Path(dataset_dir)
    maps_dir = Path(maps_dir)
    sim = FixationSimulator(**sim_params)

    if is_scene:
        scene = dataset_io.load_scene_annotation(dataset_dir / "annotations" / f"{sample_id}.json")
        target, distractor = scene.target_mask, scene.distractor_mask
        w, h = scene.image_size
        ys, xs = np.nonzero(target)
        center = (float(xs.mean()), float(ys.mean()))
        hit_radius = sim.hit_radius_for("scene")
        feature: str = "scene"
        td_value = None
    else:
        record = dataset_io.read_sample(dataset_dir, sample_id)
        target, distractor = record.target_mask, record.distractor_mask
        w, h = record.image_size
        center = record.meta.target_center
        hit_radius = sim.hit_radius_for(record.meta.feature, record.meta.target_size_px)
        feature = record.meta.feature
        td_value = record.meta.td_value

    saliency = dataset_io.load_saliency_map(_map_path(maps_dir, sample_id), w, h)
    metrics = evaluate_sample(sample_id, saliency, target, distractor)
    trace = sim.simulate(saliency, center, hit_radius)
    return EvalRow(
        id=sample_id,
        feature=feature,
        td_value=td_value,
        gsi=metrics.gsi,
        msr_targ=metrics.msr_targ,
        msr_bg=metrics.msr_bg,
        found=trace.found,
        num_fixations=trace.count,
        s_target_mean=metrics.s_target_mean,
        s_distr_mean=metrics.s_distr_mean,
        max_target=metrics.max_target,
        max_distr=metrics.max_distr,
        max_bg=metrics.max_bg,
    )


def dataset_ids(dataset_dir) -> tuple[list[str], bool]:
    """All sample ids under a dataset root; second value marks scene datasets."""
    dataset_dir = Path(dataset_dir)
    if (dataset_dir / "manifest.json").exists():
        return dataset_io.read_manifest(dataset_dir).ids, False
    scene_ids = dataset_io.list_scene_ids(dataset_dir)
    if scene_ids:
        return scene_ids, True
    raise MissingComponentError(f"no manifest.json or annotations/ found under {dataset_dir}")


def run_eval(dataset_dir, maps_dir, simulator: FixationSimulator | None = None, workers: int = 1) -> EvalReport:
    """Evaluate every dataset image against its saliency map.

    All missing maps are reported in one error before any work starts.
    Rows come back sorted by id regardless of execution order.
    """
    dataset_dir = Path(dataset_dir)
    maps_dir = Path(maps_dir)
    sim = (simulator or FixationSimulator()).fit()

    ids, is_scene = dataset_ids(dataset_dir)
    missing = [sample_id for sample_id in ids if not _map_path(maps_dir, sample_id).exists()]
    if missing:
        raise MissingComponentError(
            f"missing saliency maps for {len(missing)} id(s): {', '.join(missing)}"
        )

    jobs = [(str(dataset_dir), str(maps_dir), sample_id, is_scene, sim.get_params()) for sample_id in ids]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_eval_one, jobs, chunksize=8))
    else:
        rows = [_eval_one(job) for job in jobs]
    rows.sort(key=lambda r: r.id)

    manifest_ref = str(dataset_dir / "manifest.json") if not is_scene else ""
    return EvalReport(
        rows=rows,
        config_snapshot={"fixsim": sim.get_params(), "dataset": str(dataset_dir), "maps": str(maps_dir)},
        dataset_manifest_ref=manifest_ref,
    )


def _fmt_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value) if math.isfinite(value) else "inf"
    return str(value)


def write_report(report: EvalReport, path) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        fh.write(f"# {SCHEMA_VERSION}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(REPORT_COLUMNS)
        for row in report.rows:
            writer.writerow([_fmt_cell(getattr(row, col)) for col in REPORT_COLUMNS])
    return path


def _parse_opt_float(cell: str) -> float | None:
    if cell == "":
        return None
    return float(cell)


def load_report(path) -> EvalReport:
    path = Path(path)
    if not path.exists():
        raise MissingComponentError(f"report not found: {path}")
    rows = []
    with path.open(newline="", encoding="utf-8") as fh:
        first = fh.readline()
        if not first.startswith("#"):
            raise ValidationError(f"{path}: missing schema header comment")
        reader = csv.DictReader(fh)
        for raw in reader:
            rows.append(
                EvalRow(
                    id=raw["id"],
                    feature=raw["feature"],
                    td_value=_parse_opt_float(raw["td_value"]),
                    gsi=_parse_opt_float(raw["gsi"]),
                    msr_targ=_parse_opt_float(raw["msr_targ"]),
                    msr_bg=_parse_opt_float(raw["msr_bg"]),
                    found=raw["found"] == "true",
                    num_fixations=int(raw["num_fixations"]),
                    s_target_mean=float(raw["s_target_mean"]),
                    s_distr_mean=float(raw["s_distr_mean"]),
                    max_target=float(raw["max_target"]),
                    max_distr=float(raw["max_distr"]),
                    max_bg=float(raw["max_bg"]),
                )
            )
    return EvalReport(rows=rows)


@dataclass
class BinnedCurve:
    """Per-feature aggregation over target-distractor difference bins."""

    feature: str
    axis: str
    bin_edges: tuple[float, ...]
    mean_gsi: tuple[float | None, ...]
    mean_fixations: tuple[float | None, ...]
    n_per_bin: tuple[int, ...]  # rows contributing a defined GSI
    n_undefined: tuple[int, ...]

    def bin_centers(self) -> tuple[float, ...]:
        return tuple(
            (self.bin_edges[i] + self.bin_edges[i + 1]) / 2.0 for i in range(len(self.bin_edges) - 1)
        )


def aggregate_by_td(
    report: EvalReport,
    bin_widths: dict[str, float] | None = None,
    max_fixations: int = 100,
) -> dict[str, BinnedCurve]:
    """Bin rows by TD difference per feature; means of GSI and fixation count.

    Rows with undefined GSI are excluded from the GSI mean but tallied.
    Not-found traces enter the fixation mean at ``max_fixations``.
    """
    widths = dict(DEFAULT_BIN_WIDTHS)
    if bin_widths:
        widths.update(bin_widths)

    curves: dict[str, BinnedCurve] = {}
    for feature in ("color", "orientation", "size"):
        rows = [r for r in report.rows if r.feature == feature and r.td_value is not None]
        if not rows:
            continue
        width = float(widths[feature])
        hi = max(r.td_value for r in rows)
        n_bins = max(int(math.ceil(hi / width)), 1)
        edges = tuple(i * width for i in range(n_bins + 1))

        gsi_sum = [0.0] * n_bins
        gsi_n = [0] * n_bins
        undef = [0] * n_bins
        fix_sum = [0.0] * n_bins
        fix_n = [0] * n_bins
        for r in rows:
            b = min(int(r.td_value / width), n_bins - 1)
            if r.gsi is None:
                undef[b] += 1
            else:
                gsi_sum[b] += r.gsi
                gsi_n[b] += 1
            fix_sum[b] += r.num_fixations if r.found else max_fixations
            fix_n[b] += 1

        curves[feature] = BinnedCurve(
            feature=feature,
            axis=_AXIS_NAMES[feature],
            bin_edges=edges,
            mean_gsi=tuple(gsi_sum[i] / gsi_n[i] if gsi_n[i] else None for i in range(n_bins)),
            mean_fixations=tuple(fix_sum[i] / fix_n[i] if fix_n[i] else None for i in range(n_bins)),
            n_per_bin=tuple(gsi_n),
            n_undefined=tuple(undef),
        )
    return curves


def detection_curves(report: EvalReport, budgets=DEFAULT_BUDGETS) -> dict[str, DetectionCurve]:
    """Detection-vs-budget curves per feature, plus one over all rows."""
    groups: dict[str, list[FixationTrace]] = {}
    for row in report.rows:
        trace = FixationTrace(fixations=(), found=row.found, count=row.num_fixations)
        groups.setdefault(row.feature, []).append(trace)
        groups.setdefault("all", []).append(trace)
    return {name: detection_curve(traces, budgets) for name, traces in sorted(groups.items())}


@dataclass
class GroupStats:
    n_scenes: int
    mean_msr_targ: float | None
    mean_msr_bg: float | None
    n_inf_targ: int
    n_inf_bg: int
    n_undef_targ: int
    n_undef_bg: int


@dataclass
class SceneSummary:
    """Color / non-color / all target groups plus discrimination banding."""

    groups: dict[str, GroupStats]
    banding: dict[str, int]
    n_unbanded: int

    def to_dict(self) -> dict:
        return {
            "groups": {name: vars(stats) for name, stats in self.groups.items()},
            "banding": dict(self.banding),
            "n_unbanded": self.n_unbanded,
        }


def _group_stats(rows: list[EvalRow]) -> GroupStats:
    def summarize(values):
        finite = [v for v in values if v is not None and math.isfinite(v)]
        n_inf = sum(1 for v in values if v is not None and math.isinf(v))
        n_undef = sum(1 for v in values if v is None)
        mean = sum(finite) / len(finite) if finite else None
        return mean, n_inf, n_undef

    mean_t, inf_t, undef_t = summarize([r.msr_targ for r in rows])
    mean_b, inf_b, undef_b = summarize([r.msr_bg for r in rows])
    return GroupStats(
        n_scenes=len(rows),
        mean_msr_targ=mean_t,
        mean_msr_bg=mean_b,
        n_inf_targ=inf_t,
        n_inf_bg=inf_b,
        n_undef_targ=undef_t,
        n_undef_bg=undef_b,
    )


def aggregate_scenes(report: EvalReport, scenes) -> SceneSummary:
    """Mean saliency ratios for color / non-color / all targets, plus banding.

    Banding counts targets that are not discriminated (msr_targ < 1), somewhat
    discriminated (1 <= msr_targ <= 2) and strongly discriminated (> 2, which
    includes infinite ratios); undefined ratios are tallied separately.
    """
    rows_by_id = {r.id: r for r in report.rows}
    color_rows, noncolor_rows, all_rows = [], [], []
    for scene in scenes:
        row = rows_by_id.get(scene.id)
        if row is None:
            raise ValidationError(f"no report row for scene {scene.id!r}")
        all_rows.append(row)
        if "color" in scene.popout_features:
            color_rows.append(row)
        else:
            noncolor_rows.append(row)

    banding = {"below_1": 0, "1_to_2": 0, "above_2": 0}
    n_unbanded = 0
    for row in all_rows:
        v = row.msr_targ
        if v is None:
            n_unbanded += 1
        elif v < 1.0:
            banding["below_1"] += 1
        elif v <= 2.0:
            banding["1_to_2"] += 1
        else:
            banding["above_2"] += 1

    return SceneSummary(
        groups={
            "color": _group_stats(color_rows),
            "non_color": _group_stats(noncolor_rows),
            "all": _group_stats(all_rows),
        },
        banding=banding,
        n_unbanded=n_unbanded,
    )


def write_binned_curves(curves: dict[str, BinnedCurve], out_dir) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for feature, curve in sorted(curves.items()):
        path = out_dir / f"binned_curve_{feature}.csv"
        with path.open("w", newline="", encoding="utf-8") as fh:
            fh.write(f"# {SCHEMA_VERSION} axis={curve.axis}\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["bin_lo", "bin_hi", "n", "mean_gsi", "mean_fixations", "n_undefined"])
            for i in range(len(curve.bin_edges) - 1):
                writer.writerow(
                    [
                        _fmt_cell(curve.bin_edges[i]),
                        _fmt_cell(curve.bin_edges[i + 1]),
                        curve.n_per_bin[i],
                        _fmt_cell(curve.mean_gsi[i]),
                        _fmt_cell(curve.mean_fixations[i]),
                        curve.n_undefined[i],
                    ]
                )
        paths.append(path)
    return paths


def load_binned_curve(path) -> BinnedCurve:
    path = Path(path)
    feature = path.stem.replace("binned_curve_", "")
    with path.open(newline="", encoding="utf-8") as fh:
        header = fh.readline()
        axis = header.strip().split("axis=")[-1] if "axis=" in header else _AXIS_NAMES.get(feature, "td")
        reader = csv.DictReader(fh)
        lo, hi, gsi_m, fix_m, ns, undefs = [], [], [], [], [], []
        for raw in reader:
            lo.append(float(raw["bin_lo"]))
            hi.append(float(raw["bin_hi"]))
            ns.append(int(raw["n"]))
            gsi_m.append(_parse_opt_float(raw["mean_gsi"]))
            fix_m.append(_parse_opt_float(raw["mean_fixations"]))
            undefs.append(int(raw["n_undefined"]))
    edges = tuple(lo) + (hi[-1],) if lo else ()
    return BinnedCurve(
        feature=feature,
        axis=axis,
        bin_edges=edges,
        mean_gsi=tuple(gsi_m),
        mean_fixations=tuple(fix_m),
        n_per_bin=tuple(ns),
        n_undefined=tuple(undefs),
    )


def write_detection_curves(curves: dict[str, DetectionCurve], out_dir) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, curve in sorted(curves.items()):
        path = out_dir / f"detection_curve_{name}.csv"
        with path.open("w", newline="", encoding="utf-8") as fh:
            fh.write(f"# {SCHEMA_VERSION}\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["budget", "fraction_found"])
            for budget, fraction in zip(curve.budgets, curve.fraction_found):
                writer.writerow([budget, _fmt_cell(float(fraction))])
        paths.append(path)
    return paths


def load_detection_curve(path) -> DetectionCurve:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        fh.readline()
        reader = csv.DictReader(fh)
        budgets, fractions = [], []
        for raw in reader:
            budgets.append(int(raw["budget"]))
            fractions.append(float(raw["fraction_found"]))
    return DetectionCurve(budgets=tuple(budgets), fraction_found=tuple(fractions))


def emit_plots(named_curves: dict, out_dir) -> list[Path]:
    """One self-contained SVG per curve; keys become file names."""
    if not named_curves:
        raise ValidationError("no curves to plot")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, curve in sorted(named_curves.items()):
        path = out_dir / f"{name}.svg"
        if isinstance(curve, BinnedCurve):
            points = list(zip(curve.bin_centers(), curve.mean_gsi))
            line_chart(path, points, x_label=curve.axis, y_label="mean GSI", title=name)
        elif isinstance(curve, DetectionCurve):
            points = [(float(b), f) for b, f in zip(curve.budgets, curve.fraction_found)]
            line_chart(path, points, x_label="fixation budget", y_label="fraction of targets found", title=name)
        else:
            raise ValidationError(f"cannot plot object of type {type(curve).__name__}")
        paths.append(path)
    return paths
