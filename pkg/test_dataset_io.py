"""
Tests for image, mapping, burst, COCO, IDX and CSV table I/O
"""

import gzip
import json
import struct

import numpy as np
import pytest
from pydantic import ValidationError

from annotation import AnnotationStatus, LabelMapping, WeakAnnotation, correct
from dataset_io import (
    IMAGES_MAGIC,
    LABELS_MAGIC,
    CocoDocument,
    ImageRecord,
    TrainingManifest,
    build_manifest,
    decode_image,
    encode_jpeg,
    encode_png,
    export_coco,
    export_training_manifest,
    extract_timestamp,
    group_bursts,
    parse_box_table,
    parse_burst_map,
    parse_coco,
    parse_idx,
    parse_mapping,
    parse_predictions,
    read_idx,
    read_image_size,
    write_box_table,
    write_idx,
)
from dataset_io.training_manifest import DetectorSchedule
from errors import (
    IdxCountMismatchError,
    IdxHeaderError,
    IdxMagicError,
    IdxPayloadError,
    ImageDecodeError,
    MappingFileError,
    PredictionFileError,
)
from imaging import BoundingBox, ImageBuffer
from localization import FrameLocalization


# Images

def test_png_round_trip(tmp_path, rng):
    img = ImageBuffer(rng.integers(0, 256, size=(9, 11, 3), dtype=np.uint8))
    path = encode_png(img, tmp_path / "a.png")
    assert decode_image(path) == img
    assert read_image_size(path) == (11, 9)


def test_gray_png_decodes_as_rgb(tmp_path):
    path = encode_png(ImageBuffer(np.full((3, 4), 77, np.uint8)), tmp_path / "g.png")
    img = decode_image(path)
    assert img.shape == (3, 4, 3)
    assert (img.pixels == 77).all()


def test_jpeg_decodes(tmp_path):
    path = encode_jpeg(ImageBuffer(np.full((16, 16, 3), 128, np.uint8)), tmp_path / "a.jpg")
    assert decode_image(path).shape == (16, 16, 3)


def test_corrupt_image_names_path(tmp_path):
    bad = tmp_path / "broken.jpg"
    bad.write_bytes(b"\xff\xd8\xff not really a jpeg")
    with pytest.raises(ImageDecodeError, match="broken.jpg"):
        decode_image(bad)


# Mapping files

def _write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def test_mapping_parses_names_and_tags(tmp_path):
    path = _write(tmp_path / "m.csv",
                  "image_id,class_id,class_name,tag\na,0,,\nb,2,pig,blur\n\nc,2,pig,\n")
    labels = parse_mapping(path)
    assert labels.entries == {"a": 0, "b": 2, "c": 2}
    assert labels.class_name(2) == "pig"
    assert labels.tags == {"b": "blur"}


@pytest.mark.parametrize("text, fragment", [
    ("", "no labels"),
    ("image_id\na\n", "class_id"),
    ("image_id,class_id\na,1\nb,cat\n", "line 3"),
    ("image_id,class_id\na,1\nb,-2\n", "negative"),
    ("image_id,class_id\na,1\nb,2\na,3\n", "line 4"),
])
def test_mapping_errors(tmp_path, text, fragment):
    with pytest.raises(MappingFileError, match=fragment):
        parse_mapping(_write(tmp_path / "m.csv", text))


def test_duplicate_mapping_row_names_first_line(tmp_path):
    path = _write(tmp_path / "m.csv", "image_id,class_id\na,1\nb,2\na,3\n")
    with pytest.raises(MappingFileError, match="first seen on line 2"):
        parse_mapping(path)


# Bursts

def test_timestamp_from_filename(tmp_path):
    path = tmp_path / "cam_20240301_060000.png"
    assert extract_timestamp(path) == 1709272800.0
    assert extract_timestamp(tmp_path / "img_1712.5.png", regex=r"_(\d+\.\d+)\.png", fmt="") == 1712.5


def test_timestamp_falls_back_to_mtime(tmp_path):
    path = tmp_path / "nodate.png"
    path.write_bytes(b"")
    assert extract_timestamp(path) == path.stat().st_mtime


def test_group_bursts_gap_and_cap():
    records = [ImageRecord(f"i{k}", "cam", t) for k, t in enumerate([0, 1, 2, 3, 20, 21, 100])]
    records.append(ImageRecord("other", "cam2", 0.5))
    bursts = group_bursts(records, gap_seconds=5, max_burst=3)
    assert [b.image_ids for b in bursts] == [
        ("i0", "i1", "i2"), ("i3",), ("i4", "i5"), ("i6",), ("other",),
    ]
    assert bursts[0].burst_id == "cam_00001"
    assert bursts[-1].burst_id == "cam2_00001"


def test_build_manifest_from_tree(toy_tree):
    root, _, labels = toy_tree
    manifest = build_manifest(root)
    assert len(manifest.images) == len(labels) == 12
    assert len(manifest.bursts) == 4
    assert all(len(b.image_ids) == 3 for b in manifest.bursts)
    assert set(manifest.camera_of().values()) == {"camA", "camB"}
    assert all((r.width, r.height) == (160, 120) for r in manifest.images)


# COCO

def _coco_fixture(tmp_path, toy_tree):
    root, mapping, labels = toy_tree
    manifest = build_manifest(root)
    annos = []
    for image_id, class_id in sorted(labels.items()):
        if class_id:
            annos.append(WeakAnnotation(image_id, class_id, BoundingBox(5, 6, 20, 30), AnnotationStatus.BOX_AND_ANIMAL))
        else:
            annos.append(WeakAnnotation(image_id, 0, None, AnnotationStatus.TRUE_EMPTY))
    return export_coco(annos, manifest, parse_mapping(mapping), tmp_path / "out.json"), labels


def test_coco_export_structure(tmp_path, toy_tree):
    path, labels = _coco_fixture(tmp_path, toy_tree)
    data = json.loads(path.read_text(encoding="utf-8"))
    assert [c["id"] for c in data["categories"]] == [1, 2]
    assert data["categories"][0]["name"] == "cassowary"
    assert len(data["images"]) == 12
    assert len(data["annotations"]) == sum(1 for c in labels.values() if c)
    ann = data["annotations"][0]
    assert ann["bbox"] == [5, 6, 20, 30] and ann["area"] == 600 and ann["iscrowd"] == 0
    assert data["images"][0]["file_name"].startswith("camA/")
    assert data["images"][0]["width"] == 160


def test_coco_round_trip_is_byte_identical(tmp_path, toy_tree):
    path, _ = _coco_fixture(tmp_path, toy_tree)
    again = parse_coco(path).write(tmp_path / "again.json")
    assert again.read_bytes() == path.read_bytes()


def test_coco_export_lists_fp_corrected_image_without_annotation(tmp_path, toy_tree):
    root, mapping, labels = toy_tree
    box = BoundingBox(5, 6, 20, 30)
    loc = [FrameLocalization(image_id, (box,), (box.area,)) for image_id in sorted(labels)]
    annos = correct(loc, parse_mapping(mapping))
    corrected = {a.image_id for a in annos if a.status is AnnotationStatus.FP_CORRECTED}
    assert corrected == {i for i, c in labels.items() if c == 0}

    path = export_coco(annos, build_manifest(root), parse_mapping(mapping), tmp_path / "fp.json")
    doc = parse_coco(path)
    ids = {image["file_name"].split("/")[-1].rsplit(".", 1)[0]: image["id"] for image in doc.images}
    assert corrected <= set(ids)
    boxed = {a["image_id"] for a in doc.annotations}
    assert not boxed & {ids[i] for i in corrected}
    assert len(doc.annotations) == len(labels) - len(corrected)


def test_coco_boxes_by_file():
    doc = CocoDocument()
    doc.add_category(3, "digit_3", supercategory="digit")
    a = doc.add_image("a.png", 10, 10)
    doc.add_image("b.png", 10, 10)
    doc.add_annotation(a["id"], 3, BoundingBox(1, 1, 2, 2))
    assert doc.boxes_by_file() == {"a.png": [(3, BoundingBox(1, 1, 2, 2))], "b.png": []}
    with pytest.raises(ValueError):
        doc.add_category(0, "empty")


# IDX

def _raw_idx(magic, dims, payload):
    return struct.pack(f">I{len(dims)}I", magic, *dims) + bytes(payload)


def test_idx_round_trip(tmp_path):
    images = np.arange(2 * 28 * 28, dtype=np.int64).reshape(2, 28, 28) % 256
    labels = np.array([3, 7], dtype=np.uint8)
    write_idx(images, tmp_path / "img.idx")
    write_idx(labels, tmp_path / "lbl.idx")
    pairs = parse_idx(tmp_path / "img.idx", tmp_path / "lbl.idx")
    assert [label for _, label in pairs] == [3, 7]
    assert np.array_equal(pairs[1][0].pixels[:, :, 0], images[1])


def test_idx_reads_gzip(tmp_path):
    raw = _raw_idx(LABELS_MAGIC, [3], [1, 2, 3])
    with gzip.open(tmp_path / "l.gz", "wb") as f:
        f.write(raw)
    assert read_idx(tmp_path / "l.gz", LABELS_MAGIC).tolist() == [1, 2, 3]


def test_idx_corruptions_raise_distinct_errors(tmp_path):
    good_images = _raw_idx(IMAGES_MAGIC, [2, 2, 2], range(8))
    good_labels = _raw_idx(LABELS_MAGIC, [2], [1, 2])
    cases = {
        "bad_magic": (_raw_idx(0x0803 + 0x100, [2, 2, 2], range(8)), good_labels, IdxMagicError),
        "short_header": (b"\x00\x00", good_labels, IdxHeaderError),
        "truncated_dims": (struct.pack(">II", IMAGES_MAGIC, 2), good_labels, IdxHeaderError),
        "truncated_payload": (good_images[:-3], good_labels, IdxPayloadError),
        "count_mismatch": (good_images, _raw_idx(LABELS_MAGIC, [3], [1, 2, 3]), IdxCountMismatchError),
    }
    for name, (images, labels, error) in cases.items():
        (tmp_path / f"{name}.img").write_bytes(images)
        (tmp_path / f"{name}.lbl").write_bytes(labels)
        with pytest.raises(error):
            parse_idx(tmp_path / f"{name}.img", tmp_path / f"{name}.lbl")


def test_idx_magic_error_names_expected_value(tmp_path):
    (tmp_path / "x").write_bytes(_raw_idx(LABELS_MAGIC, [1], [0]))
    with pytest.raises(IdxMagicError, match="2051"):
        read_idx(tmp_path / "x", IMAGES_MAGIC)


# Tables

def test_predictions_parse_and_errors(tmp_path):
    good = _write(tmp_path / "p.csv", "image_id,predicted_class,posterior\na,1,0.9\nb,0,0.3\n")
    preds = parse_predictions(good)
    assert [(p.image_id, p.predicted_class, p.posterior) for p in preds] == [("a", 1, 0.9), ("b", 0, 0.3)]

    with pytest.raises(PredictionFileError, match="line 3"):
        parse_predictions(_write(tmp_path / "q.csv", "image_id,predicted_class,posterior\na,1,0.9\nb,1,1.5\n"))
    with pytest.raises(PredictionFileError, match="line 1"):
        parse_predictions(_write(tmp_path / "r.csv", "image_id,class\na,1\n"))
    with pytest.raises(PredictionFileError, match="duplicate"):
        parse_predictions(_write(tmp_path / "s.csv", "image_id,predicted_class,posterior\na,1,0.9\na,1,0.8\n"))


def test_box_table_round_trip(tmp_path):
    boxes = {"b": BoundingBox(1, 2, 3, 4), "a": None}
    path = write_box_table(boxes, tmp_path / "boxes.csv")
    assert parse_box_table(path) == boxes


def test_burst_map(tmp_path):
    path = _write(tmp_path / "b.csv", "image_id,burst_id\na,x\nb,x\n")
    assert parse_burst_map(path) == {"a": "x", "b": "x"}


# Training manifest

def test_training_manifest_defaults(tmp_path):
    path = export_training_manifest(tmp_path / "tm.json")
    data = json.loads(path.read_text(encoding="utf-8"))
    assert data["detector"]["epochs"] == 200
    assert data["detector"]["optimizer"] == "SGD"
    assert data["detector"]["lr_decay_epochs"] == [100, 170, 190]
    assert data["detector"]["batch_size"] == 32
    assert data["detector"]["lr_initial"] == 0.001
    assert data["classifier_baseline"]["epochs"] == 50
    assert data["classifier_baseline"]["lr_decay_epochs"] == [20, 40]
    assert path.read_text(encoding="utf-8") == TrainingManifest().dumps()


def test_training_manifest_rejects_bad_schedule():
    with pytest.raises(ValidationError):
        DetectorSchedule(lr_decay_epochs=[100, 90])
    with pytest.raises(ValidationError):
        DetectorSchedule(epochs=150, lr_decay_epochs=[100, 170])


def test_mapping_feeds_label_mapping(tmp_path):
    path = _write(tmp_path / "m.csv", "image_id,class_id\nx,4\n")
    assert isinstance(parse_mapping(path), LabelMapping)
