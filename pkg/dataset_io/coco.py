"""
COCO-style detection annotations: writer, parser and weak-annotation export
"""

import json
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from annotation.weak_annotator import LabelMapping, WeakAnnotation
from dataset_io.bursts import IngestManifest
from dataset_io.images import read_image_size
from errors import MissingLabelError
from imaging.image_core import BoundingBox


class CocoDocument:
    """In-memory COCO dataset with byte-stable serialization."""

    def __init__(self, info: Optional[dict] = None):
        self.info = dict(info or {})
        self.images: List[dict] = []
        self.annotations: List[dict] = []
        self.categories: List[dict] = []

    def add_category(self, category_id: int, name: str, supercategory: str = "animal") -> dict:
        if category_id < 1:
            raise ValueError(f"COCO category ids start at 1, got {category_id}")
        category = {"id": int(category_id), "name": name, "supercategory": supercategory}
        self.categories.append(category)
        return category

    def add_image(self, file_name: str, width: int, height: int, image_id: Optional[int] = None) -> dict:
        image = {
            "id": int(image_id) if image_id is not None else len(self.images) + 1,
            "file_name": file_name,
            "width": int(width),
            "height": int(height),
        }
        self.images.append(image)
        return image

    def add_annotation(self, image_id: int, category_id: int, box: BoundingBox) -> dict:
        annotation = {
            "id": len(self.annotations) + 1,
            "image_id": int(image_id),
            "category_id": int(category_id),
            "bbox": box.as_list(),
            "area": box.area,
            "iscrowd": 0,
        }
        self.annotations.append(annotation)
        return annotation

    def to_dict(self) -> dict:
        return {
            "info": self.info,
            "images": self.images,
            "annotations": self.annotations,
            "categories": self.categories,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, ensure_ascii=False) + "\n"

    def write(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(self.dumps())
        return path

    @classmethod
    def from_dict(cls, data: dict) -> "CocoDocument":
        for key in ("images", "annotations", "categories"):
            if not isinstance(data.get(key), list):
                raise ValueError(f"COCO document is missing the '{key}' list")
        doc = cls(data.get("info"))
        doc.images = [dict(image) for image in data["images"]]
        doc.annotations = [dict(annotation) for annotation in data["annotations"]]
        doc.categories = [dict(category) for category in data["categories"]]
        return doc

    def boxes_by_file(self) -> Dict[str, List[tuple]]:
        """file_name -> [(category_id, BoundingBox)] for every image, empty lists included."""
        file_of = {image["id"]: image["file_name"] for image in self.images}
        result: Dict[str, List[tuple]] = {name: [] for name in file_of.values()}
        for annotation in self.annotations:
            result[file_of[annotation["image_id"]]].append(
                (annotation["category_id"], BoundingBox(*annotation["bbox"]))
            )
        return result


def parse_coco(path) -> CocoDocument:
    with open(path, "r", encoding="utf-8") as f:
        return CocoDocument.from_dict(json.load(f))


def export_coco(annos: Sequence[WeakAnnotation], images: IngestManifest,
                labels: LabelMapping, path, info: Optional[dict] = None) -> Path:
    """Write weak annotations as COCO; images without a box get no annotation record."""
    records = images.by_id()
    doc = CocoDocument(info)
    for class_id in labels.taxa():
        doc.add_category(class_id, labels.class_name(class_id))

    for anno in sorted(annos, key=lambda a: a.image_id):
        record = records.get(anno.image_id)
        if record is None:
            raise MissingLabelError(anno.image_id, what="manifest entry")
        width, height = record.width, record.height
        if width is None or height is None:
            width, height = read_image_size(record.path)
        if record.path is not None:
            try:
                file_name = record.path.relative_to(images.root_dir).as_posix()
            except ValueError:
                file_name = record.path.name
        else:
            file_name = anno.image_id
        image = doc.add_image(file_name, width, height)
        if anno.box is not None:
            doc.add_annotation(image["id"], anno.class_id, anno.box)
    return doc.write(path)
