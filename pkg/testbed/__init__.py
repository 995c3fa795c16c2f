"""
Testbed module for weaktrap: nMNIST tiny-object data and synthetic bursts
"""

from .nmnist import (
    DigitPool,
    TestbedSample,
    TestbedSpec,
    digit_o2i,
    generate_dataset,
    generate_sample,
    split_labels,
    standard_specs,
)
from .synthetic_bursts import SyntheticBurstSpec, generate_burst

__all__ = [
    'DigitPool',
    'SyntheticBurstSpec',
    'TestbedSample',
    'TestbedSpec',
    'digit_o2i',
    'generate_burst',
    'generate_dataset',
    'generate_sample',
    'split_labels',
    'standard_specs',
]
