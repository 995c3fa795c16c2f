"""
Localization module for weaktrap
"""

from .motion_localizer import (
    FrameLocalization,
    FrameTrace,
    LocalizationResult,
    LocalizationTrace,
    LocalizerConfig,
    compute_background,
    localize,
    motion_map,
    threshold,
    trace_burst,
)

__all__ = [
    'FrameLocalization',
    'FrameTrace',
    'LocalizationResult',
    'LocalizationTrace',
    'LocalizerConfig',
    'compute_background',
    'localize',
    'motion_map',
    'threshold',
    'trace_burst',
]
