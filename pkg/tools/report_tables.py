"""
Report Tables - Renders evaluation and split reports as text and JSON
"""

import json
from pathlib import Path
from typing import Dict, Mapping

import pandas as pd


def write_json(data, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(json.dumps(data, sort_keys=True, indent=2) + "\n")
    return path


def classification_table(report) -> str:
    summary = []
    summary.append("=== CLASSIFICATION REPORT ===\n")
    summary.append(f"Images: {report.n_images}")
    df = pd.DataFrame(
        {
            "count": [report.counts["presence_fn"], report.counts["presence_fp"],
                      report.counts["taxa_error"], report.counts["correct"]],
            "percent": [report.presence_fn_pct, report.presence_fp_pct,
                        report.taxa_error_pct, report.accuracy_pct],
        },
        index=["presence FN", "presence FP", "taxa error", "accuracy"],
    )
    summary.append(df.to_string(float_format=lambda v: f"{v:.1f}"))

    if report.confusion:
        summary.append("\n=== CONFUSION (rows: truth, columns: predicted) ===")
        confusion = pd.DataFrame(report.confusion).T.fillna(0).astype(int)
        confusion = confusion.reindex(sorted(confusion.index)).reindex(sorted(confusion.columns), axis=1)
        summary.append(confusion.to_string())
    return "\n".join(summary)


def localization_table(report) -> str:
    df = pd.DataFrame(
        {"percent": [report.correct_pct, report.fp_pct, report.fn_pct]},
        index=["correct", "false positive", "false negative"],
    )
    return "\n".join([
        "=== LOCALIZATION REPORT ===\n",
        f"Frames: {report.n_frames}",
        df.to_string(float_format=lambda v: f"{v:.1f}"),
    ])


def quality_table(report) -> str:
    df = pd.DataFrame(
        {"percent": [report.correct_pct, report.fp_pct, report.fn_pct]},
        index=["correct", "FP (before correction)", "FN"],
    )
    return "\n".join([
        "=== ANNOTATION QUALITY ===\n",
        f"Images: {report.n_images}",
        df.to_string(float_format=lambda v: f"{v:.1f}"),
    ])


def challenge_table(breakdown: Mapping[str, Mapping[str, float]]) -> str:
    df = pd.DataFrame(breakdown).T
    df["sum"] = df.sum(axis=1)
    df.loc["sum"] = df.sum(axis=0)
    return "=== CHALLENGE BREAKDOWN (% of images) ===\n\n" + df.to_string(float_format=lambda v: f"{v:.1f}")


def split_table(split_report: Dict[str, dict]) -> str:
    summary = ["=== SPLIT REPORT ===\n"]
    sizes = pd.Series({name: part["images"] for name, part in split_report.items()}, name="images")
    summary.append(sizes.to_string())

    cameras = pd.DataFrame({name: part["per_camera"] for name, part in split_report.items()}).fillna(0).astype(int)
    if not cameras.empty:
        summary.append("\n=== IMAGES PER CAMERA ===")
        summary.append(cameras.sort_index().to_string())

    classes = pd.DataFrame({name: part["per_class"] for name, part in split_report.items()}).fillna(0).astype(int)
    if not classes.empty:
        summary.append("\n=== IMAGES PER CLASS ===")
        summary.append(classes.sort_index().to_string())
    return "\n".join(summary)
