"""
Tests for the nMNIST testbed generator
"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pandas as pd
import pytest
from pydantic import ValidationError

from dataset_io import parse_coco
from errors import TestbedError
from testbed import DigitPool, TestbedSpec, generate_dataset, generate_sample, split_labels, standard_specs
from testbed import nmnist


def test_standard_specs_match_reference_ratios():
    specs = standard_specs()
    assert [s.digit_count for s in specs] == [3, 6, 26, 101]
    assert [s.canvas_side for s in specs] == [64, 128, 256, 512]
    for spec, pct in zip(specs, [19.1, 4.8, 1.2, 0.3]):
        assert abs(100.0 * spec.o2i - pct) < 0.5
        assert (spec.n_train, spec.n_val, spec.n_test) == (11276, 1972, 4040)
        assert spec.positive_fraction == 0.5
    assert specs[0].o2i == pytest.approx(0.1914, abs=1e-4)
    assert specs[3].o2i == pytest.approx(0.0030, abs=1e-4)


def test_spec_rejects_inconsistent_o2i():
    with pytest.raises(ValidationError):
        TestbedSpec(o2i=0.05, canvas_side=64, digit_count=3)
    assert TestbedSpec.custom(128, 6).o2i == pytest.approx(784 / 16384)


def _pool(mnist_dir, prefix="train"):
    return DigitPool.from_idx(mnist_dir / f"{prefix}-images-idx3-ubyte.gz",
                              mnist_dir / f"{prefix}-labels-idx1-ubyte.gz")


def test_pool_needs_both_kinds_of_digit():
    images = np.zeros((4, 28, 28), dtype=np.uint8)
    with pytest.raises(TestbedError):
        DigitPool(images, np.array([1, 2, 4, 5]))
    with pytest.raises(TestbedError):
        DigitPool(images, np.array([3, 3, 3, 3]))
    with pytest.raises(TestbedError, match="empty"):
        DigitPool.from_pairs([])


def test_negative_sample_has_no_three(mnist_dir):
    pool = _pool(mnist_dir)
    spec = TestbedSpec.custom(64, 3)
    sample = generate_sample(spec, pool, False, np.random.default_rng(1))
    assert not sample.positive and sample.label == 0
    assert sample.target_boxes == ()
    assert all(digit != 3 for digit, _ in sample.placements)


def test_positive_sample_has_exactly_one_three(mnist_dir):
    pool = _pool(mnist_dir)
    spec = TestbedSpec.custom(64, 3)
    for seed in range(20):
        sample = generate_sample(spec, pool, True, np.random.default_rng(seed))
        digits = [digit for digit, _ in sample.placements]
        assert len(digits) == 3 and digits.count(3) == 1
        assert len(sample.target_boxes) == 1
        assert all(box.fits(64, 64) for _, box in sample.placements)


def test_sample_is_deterministic(mnist_dir):
    pool = _pool(mnist_dir)
    spec = TestbedSpec.custom(128, 6)
    a = generate_sample(spec, pool, True, np.random.default_rng(5))
    b = generate_sample(spec, pool, True, np.random.default_rng(5))
    assert a == b


def test_digits_cover_fixed_area(mnist_dir):
    pool = _pool(mnist_dir)
    spec = TestbedSpec.custom(256, 26)
    areas = [
        box.area for seed in range(100)
        for _, box in generate_sample(spec, pool, seed % 2 == 0, np.random.default_rng(seed)).placements
    ]
    assert np.mean(areas) / spec.canvas_side ** 2 == pytest.approx(spec.o2i)


def test_split_labels_balance():
    flags = split_labels(11276, 0.5, np.random.default_rng(0))
    assert flags.sum() == 5638
    assert split_labels(7, 0.5, np.random.default_rng(0)).sum() == 4


def test_generated_dataset_files(tmp_path, mnist_dir):
    spec = TestbedSpec.custom(64, 3, n_train=11, n_val=4, n_test=6, seed=2)
    out = tmp_path / "nmnist"
    manifest = generate_dataset(spec, _pool(mnist_dir), _pool(mnist_dir, "t10k"), out)
    assert manifest["splits"]["train"] == {"images": 11, "positives": 6, "negatives": 5}
    assert (out / "manifest.json").exists()

    for split, n in (("train", 11), ("val", 4), ("test", 6)):
        labels = pd.read_csv(out / split / "labels.csv", dtype={"image_id": str})
        assert len(labels) == n
        assert abs(int(labels["label"].sum()) - n / 2) <= 0.5
        boxes = parse_coco(out / split / "coco.json").boxes_by_file()
        for image_id, label in zip(labels["image_id"], labels["label"]):
            assert (out / split / f"{image_id}.png").exists()
            threes = [b for category, b in boxes[f"{image_id}.png"] if category == 3]
            assert (len(threes) >= 1) == bool(label)


def test_dataset_limit_and_worker_count_do_not_change_bytes(tmp_path, mnist_dir):
    spec = TestbedSpec.custom(64, 3, seed=9)
    train, test = _pool(mnist_dir), _pool(mnist_dir, "t10k")
    one = generate_dataset(spec, train, test, tmp_path / "one", limit=10, workers=1)
    two = generate_dataset(spec, train, test, tmp_path / "two", limit=10, workers=2, chunk_size=3)
    assert one == two
    assert one["splits"]["val"]["images"] == 10
    for path in sorted((tmp_path / "one").rglob("*")):
        if path.is_file():
            twin = tmp_path / "two" / path.relative_to(tmp_path / "one")
            assert twin.read_bytes() == path.read_bytes(), path.name


def _tree_bytes(root):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_single_worker_runs_in_threads_keep_their_own_pools(tmp_path, mnist_dir):
    spec = TestbedSpec.custom(64, 3, seed=4)
    train, test = _pool(mnist_dir), _pool(mnist_dir, "t10k")
    inverted = DigitPool(255 - train.images, train.labels)
    runs = {"plain": (train, test), "inverted": (inverted, test)}

    with ThreadPoolExecutor(max_workers=2) as executor:
        futures = [
            executor.submit(generate_dataset, spec, pools[0], pools[1], tmp_path / "threaded" / name, limit=6)
            for name, pools in runs.items()
        ]
        for future in futures:
            future.result()
    for name, pools in runs.items():
        generate_dataset(spec, pools[0], pools[1], tmp_path / "serial" / name, limit=6)
        assert _tree_bytes(tmp_path / "threaded" / name) == _tree_bytes(tmp_path / "serial" / name)

    assert nmnist._WORKER_POOLS == {}
