"""
Mapping file parser: image_id,class_id[,class_name][,tag]
"""

from pathlib import Path
from typing import Dict

import pandas as pd

from annotation.weak_annotator import EMPTY_CLASS, LabelMapping
from errors import MappingFileError

REQUIRED_COLUMNS = ("image_id", "class_id")


def parse_mapping(path) -> LabelMapping:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Mapping file not found: {path}")
    try:
        df = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8",
                         skipinitialspace=True, skip_blank_lines=False)
    except pd.errors.EmptyDataError:
        raise MappingFileError(f"{path}: no labels (empty file)")
    except pd.errors.ParserError as e:
        raise MappingFileError(f"{path}: malformed CSV: {e}")

    df = df.fillna("")
    columns = [str(c).strip() for c in df.columns]
    df.columns = columns
    missing = [c for c in REQUIRED_COLUMNS if c not in columns]
    if missing:
        raise MappingFileError(f"{path}: missing column(s) {', '.join(missing)}", line=1)

    entries: Dict[str, int] = {}
    first_seen: Dict[str, int] = {}
    class_names: Dict[int, str] = {}
    tags: Dict[str, str] = {}

    # header is line 1
    for line, row in enumerate(df.to_dict("records"), start=2):
        if not any(str(value).strip() for value in row.values()):
            continue
        image_id = str(row["image_id"]).strip()
        raw_class = str(row["class_id"]).strip()
        if not image_id:
            raise MappingFileError("empty image_id", line=line)
        try:
            class_id = int(raw_class)
        except ValueError:
            raise MappingFileError(f"class_id '{raw_class}' is not an integer", line=line)
        if class_id < 0:
            raise MappingFileError(f"class_id {class_id} is negative", line=line)
        if image_id in entries:
            raise MappingFileError(
                f"duplicate image_id '{image_id}' (first seen on line {first_seen[image_id]})",
                line=line,
            )
        entries[image_id] = class_id
        first_seen[image_id] = line

        name = str(row.get("class_name", "")).strip()
        if name and class_id != EMPTY_CLASS:
            class_names.setdefault(class_id, name)
        tag = str(row.get("tag", "")).strip()
        if tag:
            tags[image_id] = tag

    return LabelMapping(entries, class_names, tags)

