"""
Image scanning and burst grouping

Camera-trap folders are laid out as <root>/<camera_id>/<image file>; the
image id is the file stem.
"""

import logging
import re
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import config
from errors import ImageDecodeError
from dataset_io.images import read_image_size

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ImageRecord:
    image_id: str
    camera_id: str
    timestamp: float
    path: Optional[Path] = None
    width: Optional[int] = None
    height: Optional[int] = None


@dataclass(frozen=True)
class Burst:
    burst_id: str
    camera_id: str
    image_ids: Tuple[str, ...]


@dataclass
class IngestManifest:
    root_dir: Path
    images: List[ImageRecord] = field(default_factory=list)
    bursts: List[Burst] = field(default_factory=list)

    def image(self, image_id: str) -> ImageRecord:
        return self.by_id()[image_id]

    def by_id(self) -> Dict[str, ImageRecord]:
        return {record.image_id: record for record in self.images}

    def camera_of(self) -> Dict[str, str]:
        return {record.image_id: record.camera_id for record in self.images}

    def burst_of(self) -> Dict[str, str]:
        return {image_id: burst.burst_id for burst in self.bursts for image_id in burst.image_ids}

    def with_sizes(self, sizes: Dict[str, Tuple[int, int]]) -> "IngestManifest":
        images = [
            replace(record, width=sizes[record.image_id][0], height=sizes[record.image_id][1])
            if record.image_id in sizes else record
            for record in self.images
        ]
        return IngestManifest(self.root_dir, images, list(self.bursts))


def extract_timestamp(path, source: str = config.TIMESTAMP_SOURCE,
                      regex: str = config.TIMESTAMP_REGEX,
                      fmt: Optional[str] = config.TIMESTAMP_FORMAT) -> float:
    """Seconds since the epoch, from the file name or its modification time.

    With source 'filename' the first capture group of `regex` is parsed with
    `fmt` (strptime, taken as UTC) or as plain seconds when `fmt` is empty.
    Files whose name does not match fall back to the modification time.
    """
    path = Path(path)
    if source == "filename":
        match = re.search(regex, path.name)
        if match:
            text = match.group(1)
            if not fmt:
                return float(text)
            stamp = datetime.strptime(text, fmt).replace(tzinfo=timezone.utc)
            return stamp.timestamp()
        logger.warning(f"No timestamp in file name {path.name}, using modification time")
    elif source != "mtime":
        raise ValueError(f"Unknown timestamp source '{source}' (expected filename or mtime)")
    return path.stat().st_mtime


def scan_images(root_dir, source: str = config.TIMESTAMP_SOURCE,
                regex: str = config.TIMESTAMP_REGEX,
                fmt: Optional[str] = config.TIMESTAMP_FORMAT,
                extensions: Sequence[str] = config.IMAGE_EXTENSIONS) -> List[ImageRecord]:
    root_dir = Path(root_dir)
    if not root_dir.is_dir():
        raise FileNotFoundError(f"Image root not found: {root_dir}")

    records = []
    seen = {}
    for camera_dir in sorted(p for p in root_dir.iterdir() if p.is_dir()):
        for path in sorted(camera_dir.iterdir()):
            if not path.is_file() or path.suffix.lower() not in extensions:
                continue
            image_id = path.stem
            if image_id in seen:
                raise ValueError(f"Duplicate image id '{image_id}': {seen[image_id]} and {path}")
            seen[image_id] = path
            try:
                width, height = read_image_size(path)
            except ImageDecodeError as e:
                logger.warning(str(e))
                width = height = None
            records.append(ImageRecord(
                image_id=image_id,
                camera_id=camera_dir.name,
                timestamp=extract_timestamp(path, source, regex, fmt),
                path=path,
                width=width,
                height=height,
            ))
    logger.info(f"Found {len(records)} images in {len({r.camera_id for r in records})} camera folders")
    return records


def group_bursts(images: Iterable[ImageRecord], gap_seconds: float = config.GAP_SECONDS,
                 max_burst: int = config.MAX_BURST) -> List[Burst]:
    """Greedy grouping of consecutive same-camera images into bursts."""
    if max_burst < 1:
        raise ValueError(f"max_burst must be >= 1, got {max_burst}")
    ordered = sorted(images, key=lambda r: (r.camera_id, r.timestamp, r.image_id))

    bursts: List[Burst] = []
    current: List[ImageRecord] = []
    counters: Dict[str, int] = {}

    def close():
        if current:
            camera = current[0].camera_id
            counters[camera] = counters.get(camera, 0) + 1
            bursts.append(Burst(
                burst_id=f"{camera}_{counters[camera]:05d}",
                camera_id=camera,
                image_ids=tuple(r.image_id for r in current),
            ))
            current.clear()

    for record in ordered:
        if current:
            previous = current[-1]
            same_trigger = (
                record.camera_id == previous.camera_id
                and record.timestamp - previous.timestamp <= gap_seconds
                and len(current) < max_burst
            )
            if not same_trigger:
                close()
        current.append(record)
    close()
    return bursts


def build_manifest(root_dir, source: str = config.TIMESTAMP_SOURCE,
                   regex: str = config.TIMESTAMP_REGEX,
                   fmt: Optional[str] = config.TIMESTAMP_FORMAT,
                   gap_seconds: float = config.GAP_SECONDS,
                   max_burst: int = config.MAX_BURST) -> IngestManifest:
    images = scan_images(root_dir, source, regex, fmt)
    bursts = group_bursts(images, gap_seconds, max_burst)
    logger.info(f"Grouped {len(images)} images into {len(bursts)} bursts")
    return IngestManifest(Path(root_dir), images, bursts)
