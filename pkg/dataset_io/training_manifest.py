"""
Training manifest: detector and classifier-baseline hyperparameters

Emitted as configuration for an external trainer; nothing here trains.
"""

import json
from pathlib import Path
from typing import List

from pydantic import BaseModel, ConfigDict, Field, model_validator


class _Schedule(BaseModel):
    model_config = ConfigDict(frozen=True)

    epochs: int = Field(gt=0)
    batch_size: int = Field(default=32, gt=0)
    lr_initial: float = Field(default=1e-3, gt=0.0)
    lr_decay_factor: float = Field(default=10.0, gt=1.0)
    lr_decay_epochs: List[int] = Field(default_factory=list)

    @model_validator(mode="after")
    def _decays_increasing(self):
        decays = self.lr_decay_epochs
        if any(b <= a for a, b in zip(decays, decays[1:])):
            raise ValueError(f"lr_decay_epochs must be strictly increasing: {decays}")
        if decays and decays[-1] >= self.epochs:
            raise ValueError(f"lr decay at epoch {decays[-1]} is not before epoch {self.epochs}")
        return self


class DetectorSchedule(_Schedule):
    epochs: int = Field(default=200, gt=0)
    optimizer: str = "SGD"
    lr_decay_epochs: List[int] = Field(default_factory=lambda: [100, 170, 190])


class ClassifierSchedule(_Schedule):
    epochs: int = Field(default=50, gt=0)
    lr_decay_epochs: List[int] = Field(default_factory=lambda: [20, 40])


class TrainingManifest(BaseModel):
    model_config = ConfigDict(frozen=True)

    detector: DetectorSchedule = Field(default_factory=DetectorSchedule)
    classifier_baseline: ClassifierSchedule = Field(default_factory=ClassifierSchedule)

    def dumps(self) -> str:
        return json.dumps(self.model_dump(), sort_keys=True, indent=2) + "\n"


def export_training_manifest(path, manifest: TrainingManifest = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    manifest = manifest or TrainingManifest()
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(manifest.dumps())
    return path
