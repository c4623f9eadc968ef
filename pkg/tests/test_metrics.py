import math

import numpy as np
import pytest

from oracles import naive_gsi, naive_msr_bg, naive_msr_targ, random_disjoint_masks
from popsal.errors import ValidationError
from popsal.metrics import evaluate_sample, gsi, msr_bg, msr_targ


def _masks_8x8():
    target = np.zeros((8, 8), dtype=bool)
    target[1:3, 1:3] = True
    distractor = np.zeros((8, 8), dtype=bool)
    distractor[5:7, 5:7] = True
    return target, distractor


def test_gsi_is_one_when_map_equals_target_mask():
    target, distractor = _masks_8x8()
    saliency = target.astype(float)
    assert gsi(saliency, target, distractor) == 1.0


def test_gsi_is_minus_one_when_only_distractors_highlighted():
    target, distractor = _masks_8x8()
    saliency = distractor.astype(float) * 0.7
    assert gsi(saliency, target, distractor) == -1.0


def test_gsi_zero_on_constant_map():
    target, distractor = _masks_8x8()
    for c in (0.2, 1.0):
        assert gsi(np.full((8, 8), c), target, distractor) == 0.0


def test_gsi_4x4_example():
    # target pixels average 0.6, distractor pixels average 0.2 -> GSI 0.5
    saliency = np.zeros((4, 4))
    target = np.zeros((4, 4), dtype=bool)
    distractor = np.zeros((4, 4), dtype=bool)
    target[0, 0], target[0, 1] = True, True
    saliency[0, 0], saliency[0, 1] = 0.5, 0.7
    distractor[3, 2], distractor[3, 3] = True, True
    saliency[3, 2], saliency[3, 3] = 0.1, 0.3
    assert gsi(saliency, target, distractor) == pytest.approx(0.5, abs=1e-12)


def test_gsi_undefined_when_both_means_zero():
    target, distractor = _masks_8x8()
    assert gsi(np.zeros((8, 8)), target, distractor) is None


def test_msr_targ_examples():
    target, distractor = _masks_8x8()
    saliency = np.zeros((8, 8))
    saliency[1, 1] = 0.9
    saliency[5, 5] = 0.3
    assert msr_targ(saliency, target, distractor) == pytest.approx(3.0, abs=1e-12)
    assert msr_targ(np.zeros((8, 8)), target, distractor) is None
    assert msr_targ(saliency * 0.5, target, distractor) == msr_targ(saliency, target, distractor)


def test_msr_targ_infinite_when_distractors_silent():
    target, distractor = _masks_8x8()
    saliency = np.zeros((8, 8))
    saliency[1, 1] = 0.4
    assert msr_targ(saliency, target, distractor) == math.inf


def test_msr_bg_examples():
    target, distractor = _masks_8x8()
    saliency = np.zeros((8, 8))
    saliency[1, 1] = 0.5  # target only; background silent
    assert msr_bg(saliency, target, distractor) == 0.0

    saliency[0, 7] = 0.8  # background peak
    saliency[1, 1] = 0.4
    assert msr_bg(saliency, target, distractor) == pytest.approx(2.0, abs=1e-12)

    assert msr_bg(np.full((8, 8), 0.6), target, distractor) == 1.0


def test_scale_invariance_exact_for_half_and_tight_for_three():
    rng = np.random.default_rng(0)
    for _ in range(20):
        target, distractor = random_disjoint_masks(rng, 8, 8)
        saliency = rng.random((8, 8)) / 3.0  # keep c=3 inside [0, 1]
        base = (
            gsi(saliency, target, distractor),
            msr_targ(saliency, target, distractor),
            msr_bg(saliency, target, distractor),
        )
        half = (
            gsi(saliency * 0.5, target, distractor),
            msr_targ(saliency * 0.5, target, distractor),
            msr_bg(saliency * 0.5, target, distractor),
        )
        assert half == base  # powers of two rescale exactly
        triple = (
            gsi(saliency * 3.0, target, distractor),
            msr_targ(saliency * 3.0, target, distractor),
            msr_bg(saliency * 3.0, target, distractor),
        )
        for a, b in zip(triple, base):
            assert a == pytest.approx(b, abs=1e-12)


def test_bounds_and_extreme_conditions():
    rng = np.random.default_rng(1)
    for _ in range(50):
        target, distractor = random_disjoint_masks(rng, 6, 6)
        saliency = rng.random((6, 6))
        g = gsi(saliency, target, distractor)
        assert -1.0 <= g <= 1.0
        # gsi hits 1 iff distractor mean is 0 while target mean > 0
        assert (g == 1.0) == (saliency[distractor].sum() == 0.0 and saliency[target].sum() > 0.0)


def test_precondition_errors():
    target, distractor = _masks_8x8()
    saliency = np.zeros((8, 8))
    with pytest.raises(ValidationError, match="empty"):
        gsi(saliency, np.zeros((8, 8), dtype=bool), distractor)
    with pytest.raises(ValidationError, match="shape"):
        gsi(saliency, np.ones((4, 4), dtype=bool), distractor)
    with pytest.raises(ValidationError, match="overlap"):
        gsi(saliency, target, target)
    with pytest.raises(ValidationError):
        gsi(np.full((8, 8), 2.0), target, distractor)  # values outside [0, 1]
    with pytest.raises(ValidationError, match="background"):
        everything = np.ones((8, 8), dtype=bool)
        everything[0, 0] = False
        msr_bg(saliency, np.asarray([[True] + [False] * 7] + [[False] * 8] * 7), everything)


def test_oracle_equivalence_on_random_small_maps():
    rng = np.random.default_rng(2)
    for _ in range(200):
        h, w = rng.integers(2, 17, size=2)
        target, distractor = random_disjoint_masks(rng, h, w)
        saliency = rng.random((h, w))
        if rng.random() < 0.15:
            saliency[target] = 0.0  # exercise degenerate branches
        if rng.random() < 0.15:
            saliency[distractor] = 0.0

        s_list = saliency.tolist()
        t_list = target.tolist()
        d_list = distractor.tolist()
        expected = (
            naive_gsi(s_list, t_list, d_list),
            naive_msr_targ(s_list, t_list, d_list),
            naive_msr_bg(s_list, t_list, d_list),
        )
        actual = (
            gsi(saliency, target, distractor),
            msr_targ(saliency, target, distractor),
            msr_bg(saliency, target, distractor),
        )
        for got, want in zip(actual, expected):
            if want is None:
                assert got is None
            elif math.isinf(want):
                assert math.isinf(got)
            else:
                assert got == pytest.approx(want, abs=1e-12)


def test_evaluate_sample_consistent_with_individual_metrics():
    rng = np.random.default_rng(4)
    target, distractor = random_disjoint_masks(rng, 10, 10)
    saliency = rng.random((10, 10))
    record = evaluate_sample("img0", saliency, target, distractor)
    assert record.id == "img0"
    assert record.gsi == gsi(saliency, target, distractor)
    assert record.msr_targ == msr_targ(saliency, target, distractor)
    assert record.msr_bg == msr_bg(saliency, target, distractor)
    assert record.gsi == pytest.approx(
        (record.s_target_mean - record.s_distr_mean) / (record.s_target_mean + record.s_distr_mean),
        abs=1e-12,
    )
