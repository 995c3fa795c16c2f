"""
Tools module for weaktrap
"""

from .debug_dump import draw_boxes, dump_trace, mask_overlay
from .report_tables import (
    challenge_table,
    classification_table,
    localization_table,
    quality_table,
    split_table,
    write_json,
)

__all__ = [
    'challenge_table',
    'classification_table',
    'draw_boxes',
    'dump_trace',
    'localization_table',
    'mask_overlay',
    'quality_table',
    'split_table',
    'write_json',
]
