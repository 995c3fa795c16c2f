"""
Imaging module for weaktrap
"""

from .image_core import (
    BinaryMask,
    BoundingBox,
    BurstSequence,
    FloatMap,
    Frame,
    ImageBuffer,
    bounding_box_of,
    box_iou,
    to_grayscale,
)
from .morphology import Component, connected_components, dilate, erode, label_components

__all__ = [
    'BinaryMask',
    'BoundingBox',
    'BurstSequence',
    'Component',
    'FloatMap',
    'Frame',
    'ImageBuffer',
    'bounding_box_of',
    'box_iou',
    'connected_components',
    'dilate',
    'erode',
    'label_components',
    'to_grayscale',
]
