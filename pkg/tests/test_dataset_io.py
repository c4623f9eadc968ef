import json

import numpy as np
import pytest
from PIL import Image

from popsal import dataset_io
from popsal.errors import IntegrityError, MissingComponentError, ValidationError
from popsal.stimgen import ArraySpec, StimulusParams, plan_layout, render_array

SPEC = ArraySpec()


@pytest.fixture
def sample():
    layout = plan_layout(SPEC, target_cell=24, seed=42)
    return render_array(SPEC, StimulusParams("color", 120.0, 40.0), layout, sample_id="color_demo")


def test_write_read_roundtrip(tmp_path, sample):
    sample_id = dataset_io.write_sample(sample, tmp_path)
    record = dataset_io.read_sample(tmp_path, sample_id)

    assert np.array_equal(record.target_mask, sample.target_mask)
    assert np.array_equal(record.distractor_mask, sample.distractor_mask)
    assert record.meta.feature == "color"
    assert record.meta.td_value == 120.0
    assert record.meta.distractor_value == 40.0
    assert record.meta.target_cell == 24
    assert record.meta.seed == 42
    assert record.meta.target_center == sample.layout.centers[24]
    assert record.image_size == (1024, 1024)


def test_duplicate_id_refused(tmp_path, sample):
    dataset_io.write_sample(sample, tmp_path)
    with pytest.raises(ValidationError, match="already exists"):
        dataset_io.write_sample(sample, tmp_path)


def test_masks_written_strictly_two_valued(tmp_path, sample):
    dataset_io.write_sample(sample, tmp_path)
    for sub in ("masks_target", "masks_distractor"):
        with Image.open(tmp_path / sub / "color_demo.png") as im:
            arr = np.asarray(im)
        values = np.unique(arr)
        assert values.tolist() == [0, 255]


def test_missing_metadata_reported(tmp_path, sample):
    dataset_io.write_sample(sample, tmp_path)
    (tmp_path / "meta" / "color_demo.json").unlink()
    with pytest.raises(MissingComponentError, match="metadata.*color_demo"):
        dataset_io.read_sample(tmp_path, "color_demo")


def test_mask_dimension_mismatch_is_integrity_error(tmp_path, sample):
    dataset_io.write_sample(sample, tmp_path)
    small = np.zeros((512, 512), dtype=np.uint8)
    small[10:20, 10:20] = 255
    Image.fromarray(small).save(tmp_path / "masks_target" / "color_demo.png")
    with pytest.raises(IntegrityError, match="512"):
        dataset_io.read_sample(tmp_path, "color_demo")


def test_nonbinary_mask_rejected(tmp_path, sample):
    dataset_io.write_sample(sample, tmp_path)
    gray = np.full((1024, 1024), 37, dtype=np.uint8)
    Image.fromarray(gray).save(tmp_path / "masks_target" / "color_demo.png")
    with pytest.raises(IntegrityError, match="0/255"):
        dataset_io.read_sample(tmp_path, "color_demo")


def test_load_saliency_8bit_normalization(tmp_path):
    arr = np.zeros((4, 6), dtype=np.uint8)
    arr[0, 0] = 255
    arr[1, 1] = 128
    Image.fromarray(arr).save(tmp_path / "m.png")
    loaded = dataset_io.load_saliency_map(tmp_path / "m.png", 6, 4)
    assert loaded[0, 0] == 1.0
    assert loaded[2, 2] == 0.0
    assert loaded[1, 1] == 128 / 255


def test_load_saliency_16bit_normalization(tmp_path):
    arr = np.zeros((3, 3), dtype=np.uint16)
    arr[0, 0] = 65535
    arr[1, 1] = 1000
    Image.fromarray(arr).save(tmp_path / "m16.png")
    loaded = dataset_io.load_saliency_map(tmp_path / "m16.png", 3, 3)
    assert loaded[0, 0] == 1.0
    assert loaded[1, 1] == 1000 / 65535


def test_load_saliency_dimension_mismatch_names_both(tmp_path):
    Image.fromarray(np.zeros((512, 512), dtype=np.uint8)).save(tmp_path / "m.png")
    with pytest.raises(IntegrityError, match="512x512.*1024x1024"):
        dataset_io.load_saliency_map(tmp_path / "m.png", 1024, 1024)


def test_load_saliency_multichannel_rejected(tmp_path):
    Image.fromarray(np.zeros((8, 8, 3), dtype=np.uint8)).save(tmp_path / "rgb.png")
    with pytest.raises(ValidationError, match="single-channel"):
        dataset_io.load_saliency_map(tmp_path / "rgb.png", 8, 8)


def test_load_saliency_is_monotone(tmp_path):
    rng = np.random.default_rng(3)
    arr = rng.integers(0, 256, size=(16, 16)).astype(np.uint8)
    Image.fromarray(arr).save(tmp_path / "m.png")
    loaded = dataset_io.load_saliency_map(tmp_path / "m.png", 16, 16)
    flat_raw = arr.ravel()
    flat = loaded.ravel()
    for _ in range(500):
        i, j = rng.integers(0, flat.size, size=2)
        if flat_raw[i] >= flat_raw[j]:
            assert flat[i] >= flat[j]
        else:
            assert flat[i] < flat[j]


def test_save_saliency_roundtrip_16bit(tmp_path):
    rng = np.random.default_rng(5)
    values = rng.random((12, 9))
    dataset_io.save_saliency_map(values, tmp_path / "m.png")
    loaded = dataset_io.load_saliency_map(tmp_path / "m.png", 9, 12)
    assert np.max(np.abs(loaded - values)) <= 0.5 / 65535


def _scene_arrays():
    image = np.full((48, 64, 3), 90, dtype=np.uint8)
    target = np.zeros((48, 64), dtype=bool)
    target[5:15, 5:15] = True
    distractor = np.zeros((48, 64), dtype=bool)
    distractor[30:40, 30:40] = True
    distractor[30:40, 50:60] = True
    return image, target, distractor


def test_scene_roundtrip(tmp_path):
    image, target, distractor = _scene_arrays()
    sidecar = dataset_io.write_scene(
        tmp_path, "scene_a", image, target, distractor, "flowers", 12, ["color"]
    )
    scene = dataset_io.load_scene_annotation(sidecar)
    assert scene.object_type == "flowers"
    assert scene.num_distractors == 12
    assert scene.popout_features == ("color",)
    assert np.array_equal(scene.target_mask, target)
    assert np.array_equal(scene.distractor_mask, distractor)


def test_scene_unknown_feature_label(tmp_path):
    image, target, distractor = _scene_arrays()
    sidecar = dataset_io.write_scene(
        tmp_path, "scene_b", image, target, distractor, "sweets", 4, ["sparkle"]
    )
    with pytest.raises(ValidationError, match="sparkle"):
        dataset_io.load_scene_annotation(sidecar)


def test_scene_multifeature_accepts_closed_vocabulary(tmp_path):
    image, target, distractor = _scene_arrays()
    sidecar = dataset_io.write_scene(
        tmp_path, "scene_c", image, target, distractor, "tiles", 6,
        ["color", "size", "pattern/texture"],
    )
    scene = dataset_io.load_scene_annotation(sidecar)
    assert "color" in scene.popout_features


def test_scene_too_few_distractors(tmp_path):
    image, target, distractor = _scene_arrays()
    sidecar = dataset_io.write_scene(tmp_path, "scene_d", image, target, distractor, "eggs", 1, ["size"])
    with pytest.raises(ValidationError, match="num_distractors"):
        dataset_io.load_scene_annotation(sidecar)


def test_scene_empty_features(tmp_path):
    image, target, distractor = _scene_arrays()
    sidecar = dataset_io.write_scene(tmp_path, "scene_e", image, target, distractor, "birds", 3, [])
    with pytest.raises(ValidationError, match="non-empty"):
        dataset_io.load_scene_annotation(sidecar)


def test_scene_missing_raster(tmp_path):
    image, target, distractor = _scene_arrays()
    sidecar = dataset_io.write_scene(tmp_path, "scene_f", image, target, distractor, "leaves", 5, ["shape"])
    (tmp_path / "masks_target" / "scene_f.png").unlink()
    with pytest.raises(MissingComponentError):
        dataset_io.load_scene_annotation(sidecar)


def test_manifest_missing(tmp_path):
    with pytest.raises(MissingComponentError):
        dataset_io.read_manifest(tmp_path)


def test_meta_json_field_names(tmp_path, sample):
    dataset_io.write_sample(sample, tmp_path)
    raw = json.loads((tmp_path / "meta" / "color_demo.json").read_text())
    assert set(raw) == {
        "feature", "td_value", "distractor_value", "target_size_px",
        "target_center", "target_cell", "seed",
    }
    assert set(raw["target_center"]) == {"x", "y"}
