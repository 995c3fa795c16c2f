"""
Shared fixtures: a toy camera-trap tree and small MNIST-style IDX files
"""

import sys
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent))

from dataset_io.idx import write_idx
from dataset_io.images import encode_png
from localization import LocalizerConfig, localize
from testbed.synthetic_bursts import SyntheticBurstSpec, generate_burst

TOY_START = datetime(2024, 3, 1, 6, 0, 0, tzinfo=timezone.utc)
TOY_SPEC = dict(width=160, height=120, object_size=20, displacement=30)


def toy_image_id(camera: str, when: datetime) -> str:
    return f"{camera}_{when.strftime('%Y%m%d_%H%M%S')}"


def build_camera_tree(root: Path, cameras=("camA", "camB"), bursts_per_camera=2, frames=3, seed=7):
    """Write <root>/<camera>/<camera>_<timestamp>.png; returns {image_id: class_id}.

    The first burst of every camera holds a moving animal (class 1 or 2), the
    second is empty but carries a transient distractor blob.
    """
    labels = {}
    for c, camera in enumerate(cameras):
        for b in range(bursts_per_camera):
            with_object = b == 0
            spec = SyntheticBurstSpec(
                **TOY_SPEC, n_frames=frames, with_object=with_object,
                distractor_rate=0.0 if with_object else 1.0, distractor_size=12,
            )
            rng = np.random.default_rng([seed, c, b])
            burst, _ = generate_burst(spec, rng)
            start = TOY_START + timedelta(hours=c, minutes=10 * b)
            for k, frame in enumerate(burst.frames):
                image_id = toy_image_id(camera, start + timedelta(seconds=k))
                encode_png(frame.image, root / camera / f"{image_id}.png")
                labels[image_id] = (c + 1) if with_object else 0
    return labels


def write_mapping(path: Path, labels, class_names=None, tags=None) -> Path:
    rows = []
    for image_id in sorted(labels):
        row = {"image_id": image_id, "class_id": labels[image_id]}
        if class_names is not None:
            row["class_name"] = class_names.get(labels[image_id], "")
        if tags is not None:
            row["tag"] = tags.get(image_id, "")
        rows.append(row)
    pd.DataFrame(rows).to_csv(path, index=False)
    return path


@pytest.fixture
def toy_tree(tmp_path):
    root = tmp_path / "images"
    labels = build_camera_tree(root)
    mapping = write_mapping(tmp_path / "mapping.csv", labels, class_names={1: "cassowary", 2: "bandicoot"})
    return root, mapping, labels


def _digit_images(rng, labels):
    """28x28 stand-ins for MNIST digits: a bright blob whose size encodes the label."""
    images = np.zeros((len(labels), 28, 28), dtype=np.uint8)
    for i, label in enumerate(labels):
        half = 3 + int(label)
        cx, cy = rng.integers(10, 18, size=2)
        images[i, max(0, cy - half):cy + half, max(0, cx - half):cx + half] = rng.integers(128, 256)
    return images


@pytest.fixture
def mnist_dir(tmp_path):
    rng = np.random.default_rng(3)
    out = tmp_path / "mnist"
    out.mkdir()
    for prefix, n in (("train", 120), ("t10k", 60)):
        labels = np.arange(n, dtype=np.uint8) % 10
        write_idx(_digit_images(rng, labels), out / f"{prefix}-images-idx3-ubyte.gz")
        write_idx(labels, out / f"{prefix}-labels-idx1-ubyte.gz")
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


SUITE_BURSTS = (
    # (kind, class_id, SyntheticBurstSpec overrides)
    *[("moving", 1, {}) for _ in range(4)],
    *[("static", 2, {"displacement": 0}) for _ in range(2)],
    *[("distractor", 0, {"with_object": False, "distractor_rate": 1.0, "distractor_size": 12}) for _ in range(2)],
    ("empty", 0, {"with_object": False}),
)


@pytest.fixture(scope="session")
def synthetic_suite():
    """Localized synthetic bursts with their construction truth.

    Returns (localization frames, {image_id: truth box or None},
    {image_id: class_id}, {image_id: kind}).
    """
    cfg = LocalizerConfig(tighten_boxes=True)
    frames, truth, classes, kinds = [], {}, {}, {}
    for i, (kind, class_id, overrides) in enumerate(SUITE_BURSTS):
        spec = SyntheticBurstSpec(**overrides)
        burst, boxes = generate_burst(spec, np.random.default_rng([21, i]), prefix=f"s{i:02d}")
        frames.extend(localize(burst, cfg).frames)
        for frame, box in zip(burst.frames, boxes):
            truth[frame.image_id] = box
            classes[frame.image_id] = class_id
            kinds[frame.image_id] = kind
    return frames, truth, classes, kinds
