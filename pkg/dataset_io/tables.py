"""
CSV tables: model predictions, truth boxes and burst maps
"""

from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import pandas as pd

from errors import PredictionFileError
from evaluation.evaluator import PredictionRecord
from imaging.image_core import BoundingBox

PREDICTION_COLUMNS = ("image_id", "predicted_class", "posterior")
BOX_COLUMNS = ("image_id", "x", "y", "w", "h")


def _rows(path, required: Sequence[str]) -> Iterator[Tuple[int, dict]]:
    """(line number, row) pairs; the header is line 1 and blank lines are skipped."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"File not found: {path}")
    try:
        df = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True,
                         skip_blank_lines=False)
    except pd.errors.EmptyDataError:
        raise PredictionFileError(f"{path}: empty file")
    except pd.errors.ParserError as e:
        raise PredictionFileError(f"{path}: malformed CSV: {e}")
    df = df.fillna("")
    df.columns = [str(c).strip() for c in df.columns]
    missing = [c for c in required if c not in df.columns]
    if missing:
        raise PredictionFileError(
            f"{path}: expected columns {','.join(required)}, missing {','.join(missing)}", line=1
        )
    for line, row in enumerate(df.to_dict("records"), start=2):
        row = {key: str(value).strip() for key, value in row.items()}
        if any(row.values()):
            yield line, row


def parse_predictions(path) -> List[PredictionRecord]:
    records = []
    seen: Dict[str, int] = {}
    for line, row in _rows(path, PREDICTION_COLUMNS):
        image_id = row["image_id"]
        if not image_id:
            raise PredictionFileError("empty image_id", line=line)
        if image_id in seen:
            raise PredictionFileError(
                f"duplicate image_id '{image_id}' (first seen on line {seen[image_id]})", line=line
            )
        try:
            predicted = int(row["predicted_class"])
            posterior = float(row["posterior"])
        except ValueError:
            raise PredictionFileError(
                f"cannot read predicted_class='{row['predicted_class']}' posterior='{row['posterior']}'",
                line=line,
            )
        try:
            records.append(PredictionRecord(image_id, predicted, posterior))
        except ValueError as e:
            raise PredictionFileError(str(e), line=line)
        seen[image_id] = line
    return records


def parse_box_table(path) -> Dict[str, Optional[BoundingBox]]:
    """image_id -> box; rows with blank coordinates mean "no object"."""
    boxes: Dict[str, Optional[BoundingBox]] = {}
    for line, row in _rows(path, BOX_COLUMNS):
        image_id = row["image_id"]
        if image_id in boxes:
            raise PredictionFileError(f"duplicate image_id '{image_id}'", line=line)
        coords = [row[key] for key in ("x", "y", "w", "h")]
        if not any(coords):
            boxes[image_id] = None
            continue
        try:
            boxes[image_id] = BoundingBox(*(int(float(value)) for value in coords))
        except ValueError as e:
            raise PredictionFileError(f"bad box for '{image_id}': {e}", line=line)
    return boxes


def parse_burst_map(path) -> Dict[str, str]:
    burst_of = {}
    for line, row in _rows(path, ("image_id", "burst_id")):
        if not row["image_id"] or not row["burst_id"]:
            raise PredictionFileError("image_id and burst_id are required", line=line)
        burst_of[row["image_id"]] = row["burst_id"]
    return burst_of


def write_box_table(boxes: Dict[str, Optional[BoundingBox]], path) -> Path:
    path = Path(path)
    rows = []
    for image_id in sorted(boxes):
        box = boxes[image_id]
        coords = box.as_list() if box is not None else ["", "", "", ""]
        rows.append(dict(zip(BOX_COLUMNS, [image_id, *coords])))
    pd.DataFrame(rows, columns=list(BOX_COLUMNS)).to_csv(path, index=False)
    return path
