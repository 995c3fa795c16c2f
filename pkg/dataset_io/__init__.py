"""
Dataset I/O module for weaktrap
"""

from .images import decode_image, encode_jpeg, encode_png, read_image_size
from .bursts import Burst, ImageRecord, IngestManifest, build_manifest, extract_timestamp, group_bursts, scan_images
from .mapping import parse_mapping
from .coco import CocoDocument, export_coco, parse_coco
from .idx import IMAGES_MAGIC, LABELS_MAGIC, parse_idx, read_idx, write_idx
from .tables import parse_box_table, parse_burst_map, parse_predictions, write_box_table
from .training_manifest import TrainingManifest, export_training_manifest

__all__ = [
    'IMAGES_MAGIC',
    'LABELS_MAGIC',
    'Burst',
    'CocoDocument',
    'ImageRecord',
    'IngestManifest',
    'TrainingManifest',
    'build_manifest',
    'decode_image',
    'encode_jpeg',
    'encode_png',
    'export_coco',
    'export_training_manifest',
    'extract_timestamp',
    'group_bursts',
    'parse_box_table',
    'parse_burst_map',
    'parse_coco',
    'parse_idx',
    'parse_mapping',
    'parse_predictions',
    'read_idx',
    'read_image_size',
    'scan_images',
    'write_box_table',
    'write_idx',
]
