import hashlib
from pathlib import Path

import numpy as np
import pytest
from scipy import ndimage

from popsal.errors import ConfigurationError, DegenerateStimulusError, ValidationError
from popsal.stimgen import (
    ArraySpec,
    FeatureSweep,
    StimulusParams,
    SweepConfig,
    default_sweep,
    gen_dataset,
    plan_layout,
    render_array,
)

SPEC = ArraySpec()


def test_zero_jitter_puts_center_element_at_image_center():
    spec = ArraySpec(jitter=0.0)
    layout = plan_layout(spec, target_cell=24, seed=123)
    assert layout.centers[24] == (512.0, 512.0)
    # every element sits exactly on its cell center
    for cell, center in enumerate(layout.centers):
        assert center == spec.cell_center(cell)


def test_jitter_offsets_bounded_by_15px():
    for seed in range(20):
        layout = plan_layout(SPEC, seed=seed)
        for cell, (x, y) in enumerate(layout.centers):
            cx, cy = SPEC.cell_center(cell)
            assert abs(x - cx) <= 15.0
            assert abs(y - cy) <= 15.0


def test_min_pairwise_center_distance():
    # pitch - 2*jitter = 1024/7 - 30, checked exhaustively over layouts
    bound = 1024.0 / 7.0 - 30.0
    for seed in range(10):
        centers = plan_layout(SPEC, seed=seed).centers
        for i in range(len(centers)):
            for j in range(i + 1, len(centers)):
                d = np.hypot(centers[i][0] - centers[j][0], centers[i][1] - centers[j][1])
                assert d >= bound - 1e-9


def test_layout_deterministic_and_seed_sensitive():
    a = plan_layout(SPEC, seed=99)
    b = plan_layout(SPEC, seed=99)
    c = plan_layout(SPEC, seed=100)
    assert a == b
    assert a.centers != c.centers


def test_layout_draws_target_cell_from_seed():
    cells = {plan_layout(SPEC, seed=s).target_index for s in range(30)}
    assert all(0 <= c < 49 for c in cells)
    assert len(cells) > 5  # uniform draw, not stuck


def test_target_cell_out_of_range():
    with pytest.raises(ValidationError):
        plan_layout(SPEC, target_cell=49, seed=0)


def test_spec_disjointness_precondition_named():
    with pytest.raises(ConfigurationError, match="pitch"):
        plan_layout(ArraySpec(jitter=40.0), seed=0)


def test_color_hues_render_exact_rgb():
    layout = plan_layout(SPEC, target_cell=24, seed=1)
    sample = render_array(SPEC, StimulusParams("color", 180.0, 0.0), layout)
    assert np.all(sample.image[sample.distractor_mask] == (255, 0, 0))
    assert np.all(sample.image[sample.target_mask] == (0, 255, 255))


def test_degenerate_stimuli_rejected():
    layout = plan_layout(SPEC, seed=2)
    with pytest.raises(DegenerateStimulusError):
        render_array(SPEC, StimulusParams.for_size(75.0, SPEC), layout)
    with pytest.raises(DegenerateStimulusError):
        render_array(SPEC, StimulusParams("color", 0.0, 10.0), layout)
    with pytest.raises(DegenerateStimulusError):
        render_array(SPEC, StimulusParams("orientation", 0.0, 10.0), layout)


def test_size_bounds_rejected():
    layout = plan_layout(SPEC, seed=2)
    for bad in (17.0, 141.0):
        with pytest.raises(ValidationError):
            render_array(SPEC, StimulusParams.for_size(bad, SPEC), layout)


def _bbox_wh(mask):
    ys, xs = np.nonzero(mask)
    return (int(xs.max() - xs.min() + 1), int(ys.max() - ys.min() + 1))


def test_orientation_90deg_target_bbox_is_transposed():
    # Same layout, so both targets share one jittered center: a horizontal
    # bar (0 + 90 deg) and a vertical one (90 + 90 = 180 deg, geometrically 0).
    layout = plan_layout(SPEC, target_cell=17, seed=3)
    horizontal = render_array(SPEC, StimulusParams("orientation", 90.0, 0.0), layout)
    vertical = render_array(SPEC, StimulusParams("orientation", 90.0, 90.0), layout)

    w_h, h_h = _bbox_wh(horizontal.target_mask)
    w_v, h_v = _bbox_wh(vertical.target_mask)
    assert (w_h, h_h) == (h_v, w_v)
    assert 74 <= w_h <= 76 and 14 <= h_h <= 16
    assert horizontal.target_mask.sum() == vertical.target_mask.sum()


@pytest.mark.parametrize(
    "params",
    [
        StimulusParams("color", 90.0, 300.0),
        StimulusParams("orientation", 45.0, 30.0, element_hue_deg=10.0),
        StimulusParams.for_size(140.0, SPEC),
        StimulusParams.for_size(18.0, SPEC),
    ],
)
def test_geometry_and_mask_fidelity(params):
    layout = plan_layout(SPEC, seed=7)
    sample = render_array(SPEC, params, layout)

    target, distractor = sample.target_mask, sample.distractor_mask
    assert not np.any(target & distractor)
    assert target.any()
    assert ndimage.label(distractor)[1] == 48
    # footprints stay off the image border
    combined = target | distractor
    assert not combined[0].any() and not combined[-1].any()
    assert not combined[:, 0].any() and not combined[:, -1].any()
    # non-background pixels belong to exactly one mask; background stays gray
    colored = np.any(sample.image != SPEC.background_gray, axis=2)
    assert np.array_equal(colored, combined)


def test_oversized_corner_target_clamped_within_jitter():
    for cell in (0, 6, 42, 48):
        layout = plan_layout(SPEC, target_cell=cell, seed=11)
        sample = render_array(SPEC, StimulusParams.for_size(140.0, SPEC), layout)
        x, y = sample.layout.centers[cell]
        cx, cy = SPEC.cell_center(cell)
        assert abs(x - cx) <= SPEC.jitter + 1e-9
        assert abs(y - cy) <= SPEC.jitter + 1e-9
        assert x - 70.0 >= 0 and x + 70.0 <= 1024
        assert y - 70.0 >= 0 and y + 70.0 <= 1024
        ys, xs = np.nonzero(sample.target_mask)
        assert xs.min() >= 0 and xs.max() < 1024 and ys.min() >= 0 and ys.max() < 1024


def test_render_deterministic():
    layout = plan_layout(SPEC, seed=5)
    params = StimulusParams("color", 45.0, 10.0)
    a = render_array(SPEC, params, layout)
    b = render_array(SPEC, params, layout)
    assert np.array_equal(a.image, b.image)
    assert np.array_equal(a.target_mask, b.target_mask)


def test_supersampling_changes_image_but_not_masks():
    layout = plan_layout(SPEC, seed=5)
    params = StimulusParams("color", 45.0, 10.0)
    hard = render_array(SPEC, params, layout)
    smooth = render_array(SPEC, params, layout, supersample=4)
    assert np.array_equal(hard.target_mask, smooth.target_mask)
    assert np.array_equal(hard.distractor_mask, smooth.distractor_mask)
    assert hard.image.shape == smooth.image.shape
    assert not np.array_equal(hard.image, smooth.image)  # softened edges


def test_default_sweep_reproduces_published_counts():
    sweep = default_sweep()
    assert len(sweep.color.values) * sweep.color.instances == 810
    assert len(sweep.orientation.values) * sweep.orientation.instances == 864
    assert len(sweep.size.values) * sweep.size.instances == 840
    assert sweep.color.values[0] == 4.0 and sweep.color.values[-1] == 180.0
    assert sweep.orientation.values[0] == pytest.approx(1.875) and sweep.orientation.values[-1] == 90.0
    assert min(sweep.size.values) == 18.0 and max(sweep.size.values) == 140.0
    assert 75.0 not in sweep.size.values


def test_gen_dataset_single_sample(tmp_path):
    sweep = SweepConfig(color=FeatureSweep((90.0,), 1))
    manifest = gen_dataset(sweep, tmp_path, seed=4)
    assert manifest.counts == {"color": 1}
    assert manifest.ids == ["color_000_000"]
    assert (tmp_path / "images" / "color_000_000.png").exists()
    assert (tmp_path / "manifest.json").exists()


def _tree_digest(root: Path) -> dict[str, str]:
    return {
        str(p.relative_to(root)): hashlib.sha256(p.read_bytes()).hexdigest()
        for p in sorted(root.rglob("*"))
        if p.is_file()
    }


def test_gen_dataset_rerun_is_byte_identical(tmp_path):
    sweep = SweepConfig(
        color=FeatureSweep((30.0, 150.0), 2),
        orientation=FeatureSweep((90.0,), 2),
        size=FeatureSweep((30.0,), 2),
    )
    gen_dataset(sweep, tmp_path / "a", seed=21)
    gen_dataset(sweep, tmp_path / "b", seed=21)
    assert _tree_digest(tmp_path / "a") == _tree_digest(tmp_path / "b")


def test_gen_dataset_workers_match_serial(tmp_path):
    sweep = SweepConfig(color=FeatureSweep((60.0, 120.0), 2))
    gen_dataset(sweep, tmp_path / "serial", seed=8, workers=1)
    gen_dataset(sweep, tmp_path / "parallel", seed=8, workers=2)
    assert _tree_digest(tmp_path / "serial") == _tree_digest(tmp_path / "parallel")


def test_gen_dataset_propagates_invalid_sweep(tmp_path):
    with pytest.raises(ValidationError):
        gen_dataset(SweepConfig(color=FeatureSweep((200.0,), 1)), tmp_path, seed=0)
