#!/usr/bin/env python3
"""
weaktrap - Weakly supervised camera-trap annotation
Main entry point for the application
"""

import argparse
import logging
import sys
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime
from pathlib import Path
from typing import Dict, List, Optional, Tuple

# Add project root to path
sys.path.append(str(Path(__file__).parent))

import config
from annotation import (
    PARTITIONS,
    FnPolicy,
    TruthRecord,
    annotation_quality,
    correct,
    split_by_camera,
    status_counts,
)
from dataset_io import (
    build_manifest,
    decode_image,
    export_coco,
    export_training_manifest,
    parse_box_table,
    parse_burst_map,
    parse_mapping,
    parse_predictions,
    write_box_table,
)
from errors import DimensionMismatchError, ImageDecodeError, MappingFileError, WeakTrapError
from evaluation import (
    challenge_breakdown,
    classification_report,
    localization_report,
    review_queue,
    vote_by_burst,
)
from imaging.image_core import BurstSequence, Frame
from localization import FrameLocalization, LocalizationResult, LocalizerConfig, localize, trace_burst
from pipeline_config import PipelineConfig
from testbed import DigitPool, TestbedSpec, generate_dataset, standard_specs
from tools import (
    challenge_table,
    classification_table,
    dump_trace,
    localization_table,
    quality_table,
    split_table,
    write_json,
)

MNIST_FILES = {
    "train_images": "train-images-idx3-ubyte",
    "train_labels": "train-labels-idx1-ubyte",
    "test_images": "t10k-images-idx3-ubyte",
    "test_labels": "t10k-labels-idx1-ubyte",
}


# Configure logging
def setup_logging(log_dir=config.LOG_DIR, verbose=False):
    """Setup logging configuration"""
    log_dir = Path(log_dir)
    log_dir.mkdir(parents=True, exist_ok=True)
    log_path = log_dir / f'weaktrap_{datetime.now().strftime("%Y%m%d_%H%M%S")}.log'

    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.FileHandler(log_path),
            logging.StreamHandler()
        ],
        force=True,
    )
    return logging.getLogger(__name__), log_path


def _shape_groups(frames: List[Frame]) -> List[List[Frame]]:
    groups: Dict[tuple, List[Frame]] = {}
    for frame in frames:
        groups.setdefault(frame.image.shape, []).append(frame)
    return list(groups.values())


def localize_burst(job) -> dict:
    """Worker: decode one burst and localize its frames.

    job is (burst_id, camera_id, [(image_id, path, timestamp)], localizer settings, debug dir).
    """
    burst_id, camera_id, members, localizer_settings, debug_dir = job
    cfg = LocalizerConfig(**localizer_settings)
    frames, failures, sizes = [], [], {}
    for image_id, path, timestamp in members:
        try:
            image = decode_image(path)
        except ImageDecodeError as e:
            failures.append((image_id, str(e)))
            continue
        frames.append(Frame(image_id, image, timestamp))
        sizes[image_id] = (image.width, image.height)

    if not frames:
        return {"burst_id": burst_id, "frames": [], "failures": failures, "sizes": sizes, "warnings": []}

    warnings = []
    try:
        sequences = [BurstSequence(camera_id, tuple(frames), burst_id=burst_id)]
    except DimensionMismatchError as e:
        # localize each resolution separately
        warnings.append(f"Burst {burst_id}: {e}; localizing frames of each size separately")
        sequences = [
            BurstSequence(camera_id, tuple(group), burst_id=f"{burst_id}_{k + 1}")
            for k, group in enumerate(_shape_groups(frames))
        ]

    localized = []
    for sequence in sequences:
        if debug_dir:
            trace = trace_burst(sequence, cfg)
            dump_trace(trace, debug_dir)
            localized.extend(trace.result.frames)
        else:
            localized.extend(localize(sequence, cfg).frames)
    return {"burst_id": burst_id, "frames": localized, "failures": failures, "sizes": sizes, "warnings": warnings}


class WeakTrapPipeline:
    """Main weaktrap class for orchestrating the annotate workflow"""

    def __init__(self, image_root, mapping_path, cfg: Optional[PipelineConfig] = None):
        self.image_root = Path(image_root)
        self.mapping_path = Path(mapping_path)
        self.cfg = cfg or PipelineConfig()
        self.logger = logging.getLogger(__name__)

    def _jobs(self, manifest):
        records = manifest.by_id()
        localizer_settings = self.cfg.localizer.model_dump()
        debug_dir = str(self.cfg.debug_dump) if self.cfg.debug_dump else None
        for burst in manifest.bursts:
            members = [
                (image_id, str(records[image_id].path), records[image_id].timestamp)
                for image_id in burst.image_ids
            ]
            yield burst.burst_id, burst.camera_id, members, localizer_settings, debug_dir

    def localize_all(self, manifest) -> Tuple[LocalizationResult, Dict[str, Tuple[int, int]], List[str]]:
        jobs = list(self._jobs(manifest))
        if self.cfg.workers > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=self.cfg.workers) as executor:
                outputs = list(executor.map(localize_burst, jobs, chunksize=4))
        else:
            outputs = [localize_burst(job) for job in jobs]

        results, sizes, failed = [], {}, []
        for output in outputs:
            for message in output["warnings"]:
                self.logger.warning(message)
            for image_id, message in output["failures"]:
                self.logger.warning(f"Skipping {image_id}: {message}")
                failed.append(image_id)
            sizes.update(output["sizes"])
            results.append(LocalizationResult(tuple(output["frames"])))
        return LocalizationResult.merge(results), sizes, sorted(failed)

    def run(self) -> dict:
        """Ingest, localize, correct, split and export; returns the run summary."""
        start = time.perf_counter()
        cfg = self.cfg
        out_dir = Path(cfg.output_dir)
        out_dir.mkdir(parents=True, exist_ok=True)

        labels = parse_mapping(self.mapping_path)
        if len(labels) == 0:
            raise MappingFileError(f"{self.mapping_path}: no labels")

        manifest = build_manifest(
            self.image_root,
            source=cfg.ingest.timestamp_source,
            regex=cfg.ingest.timestamp_regex,
            fmt=cfg.ingest.timestamp_format,
            gap_seconds=cfg.ingest.gap_seconds,
            max_burst=cfg.ingest.max_burst,
        )
        on_disk = set(manifest.by_id())
        unmatched = [image_id for image_id in labels if image_id not in on_disk]
        if unmatched:
            self.logger.warning(f"{len(unmatched)} labelled image(s) not found under {self.image_root}")
        unlabelled = sorted(image_id for image_id in on_disk if image_id not in labels)
        if unlabelled:
            # still part of their burst background
            self.logger.warning(f"{len(unlabelled)} image(s) have no mapping row and are left out "
                                f"of the annotations: {', '.join(unlabelled[:10])}")
        unknown = sorted(set(cfg.split.test_cameras) - {r.camera_id for r in manifest.images})
        if unknown:
            self.logger.warning(f"Test camera(s) with no images: {', '.join(unknown)}")

        self.logger.info(f"Localizing {len(manifest.images)} images in {len(manifest.bursts)} bursts "
                         f"with {cfg.workers} worker(s)")
        loc, sizes, failed = self.localize_all(manifest)
        manifest = manifest.with_sizes(sizes)

        labelled = LocalizationResult(tuple(frame for frame in loc if frame.image_id in labels))
        annos = correct(labelled, labels, cfg.fn_policy)
        counts = status_counts(annos)
        for status, count in counts.items():
            self.logger.info(f"  {status}: {count}")

        split = split_by_camera(
            annos,
            manifest.camera_of(),
            manifest.burst_of(),
            set(cfg.split.test_cameras),
            cfg.split.val_fraction,
            cfg.split.seed,
        )
        for name in PARTITIONS:
            export_coco(split.partition(name), manifest, labels, out_dir / f"{name}.json",
                        info={"description": f"weaktrap weak annotations ({name})"})
        write_json(split.split_report, out_dir / "split_report.json")
        (out_dir / "split_report.txt").write_text(split_table(split.split_report) + "\n", encoding="utf-8")
        export_training_manifest(out_dir / "training_manifest.json")
        write_box_table({frame.image_id: frame.best_box for frame in loc}, out_dir / "localization_boxes.csv")

        summary = {
            "images": len(manifest.images),
            "bursts": len(manifest.bursts),
            "decode_failures": failed,
            "unlabelled": unlabelled,
            "annotations": len(annos),
            "status_counts": counts,
            "partitions": {name: len(split.partition(name)) for name in PARTITIONS},
            "config": cfg.model_dump(mode="json"),
        }
        write_json(summary, out_dir / "run_summary.json")

        elapsed = time.perf_counter() - start
        throughput = len(loc) / elapsed if elapsed > 0 else 0.0
        self.logger.info(f"Annotated {len(loc)} images in {elapsed:.2f}s ({throughput:.2f} images/sec)")
        self.logger.info(f"Outputs written to {out_dir}")
        return summary


def cmd_annotate(args) -> int:
    cfg = PipelineConfig.resolve(
        args.config,
        threshold_t=args.threshold,
        erosion_kernel=args.erosion_kernel,
        dilation_kernel=args.dilation_kernel,
        connectivity=args.connectivity,
        max_components=args.max_components,
        tighten_boxes=True if args.tighten_boxes else None,
        timestamp_source=args.timestamp_source,
        timestamp_regex=args.timestamp_regex,
        gap_seconds=args.gap_seconds,
        max_burst=args.max_burst,
        fn_policy=args.fn_policy,
        test_cameras=args.test_cameras,
        val_fraction=args.val_fraction,
        seed=args.seed,
        output_dir=args.output,
        debug_dump=args.debug_dump,
        workers=args.workers,
    )
    WeakTrapPipeline(args.images, args.mapping, cfg).run()
    return 0


def _find_idx(mnist_dir: Path, stem: str) -> Path:
    for candidate in (mnist_dir / stem, mnist_dir / f"{stem}.gz"):
        if candidate.exists():
            return candidate
    raise FileNotFoundError(f"MNIST file {stem}[.gz] not found in {mnist_dir}")


def _testbed_spec(args, parser) -> Tuple[TestbedSpec, str]:
    if args.spec is not None:
        if args.digits is not None or args.side is not None:
            parser.error("--spec cannot be combined with --digits/--side")
        return standard_specs(seed=args.seed)[args.spec - 1], f"spec{args.spec}"
    if args.digits is None or args.side is None:
        parser.error("give --spec 1-4, or both --digits and --side for a custom spec")
    return TestbedSpec.custom(args.side, args.digits, seed=args.seed), f"custom_{args.side}_{args.digits}"


def cmd_testbed(args, parser) -> int:
    logger = logging.getLogger(__name__)
    spec, name = _testbed_spec(args, parser)
    mnist_dir = Path(args.mnist_dir)
    train_pool = DigitPool.from_idx(_find_idx(mnist_dir, MNIST_FILES["train_images"]),
                                    _find_idx(mnist_dir, MNIST_FILES["train_labels"]))
    test_pool = DigitPool.from_idx(_find_idx(mnist_dir, MNIST_FILES["test_images"]),
                                   _find_idx(mnist_dir, MNIST_FILES["test_labels"]))
    out_dir = Path(args.out) if args.out else Path(config.TESTBED_DIR) / name

    logger.info(f"Generating {name}: {spec.canvas_side}x{spec.canvas_side} canvases, "
                f"{spec.digit_count} digits, O2I {100.0 * spec.o2i:.2f}%")
    start = time.perf_counter()
    manifest = generate_dataset(spec, train_pool, test_pool, out_dir, limit=args.limit, workers=args.workers)
    total = sum(part["images"] for part in manifest["splits"].values())
    logger.info(f"Wrote {total} canvases to {out_dir} in {time.perf_counter() - start:.1f}s")
    return 0


def _report_path(args, mode: str) -> Path:
    if args.out:
        return Path(args.out)
    predictions = Path(args.predictions)
    return predictions.with_name(f"{predictions.stem}_{mode}_report.json")


def _box_frames(boxes) -> List[FrameLocalization]:
    return [
        FrameLocalization(image_id, (box,) if box is not None else (), (box.area,) if box is not None else ())
        for image_id, box in sorted(boxes.items())
    ]


def cmd_evaluate(args) -> int:
    if args.mode == "classification":
        preds = parse_predictions(args.predictions)
        truth = parse_mapping(args.truth)
        if args.burst_map:
            preds = vote_by_burst(preds, parse_burst_map(args.burst_map))
        report = classification_report(preds, truth)
        data = report.as_dict()
        text = classification_table(report)
        if truth.tags:
            truth_boxes = parse_box_table(args.truth_boxes) if args.truth_boxes else None
            breakdown = challenge_breakdown(preds, truth, truth_boxes, args.image_size)
            data["challenge_breakdown"] = breakdown
            text += "\n\n" + challenge_table(breakdown)
    elif args.mode == "annotation":
        labels = parse_mapping(args.truth)
        truth_boxes = parse_box_table(args.truth_boxes) if args.truth_boxes else {}
        annos = correct(_box_frames(parse_box_table(args.predictions)), labels)
        truth = [TruthRecord(image_id, truth_boxes.get(image_id), labels[image_id]) for image_id in labels]
        report = annotation_quality(annos, truth, args.iou_min)
        data = report.as_dict()
        text = quality_table(report)
    else:
        report = localization_report(_box_frames(parse_box_table(args.predictions)),
                                     parse_box_table(args.truth), args.iou_min)
        data = report.as_dict()
        text = localization_table(report)

    print(text)
    path = write_json(data, _report_path(args, args.mode))
    logging.getLogger(__name__).info(f"Report written to {path}")
    return 0


def cmd_review(args) -> int:
    queue = review_queue(parse_predictions(args.predictions))
    if args.top is not None:
        queue = queue[:args.top]
    for image_id in queue:
        print(image_id)
    return 0


def cmd_manifest(args) -> int:
    path = export_training_manifest(args.out)
    logging.getLogger(__name__).info(f"Training manifest written to {path}")
    return 0


def _image_size(value: str) -> Tuple[int, int]:
    try:
        width, height = (int(v) for v in value.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WIDTHxHEIGHT, got '{value}'")
    return width, height


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description='weaktrap - Weakly supervised camera-trap annotation')
    parser.add_argument('--verbose', '-v', action='store_true', help='Enable verbose logging')
    parser.add_argument('--log-dir', type=str, default=None, help=f'Run log directory (default: {config.LOG_DIR})')
    sub = parser.add_subparsers(dest='command', required=True)

    annotate = sub.add_parser('annotate', help='Turn image-level labels into weak box annotations')
    annotate.add_argument('images', type=str, help='Image root laid out as <root>/<camera_id>/<image>')
    annotate.add_argument('mapping', type=str, help='CSV mapping image_id,class_id[,class_name][,tag]')
    annotate.add_argument('--config', type=str, default=None, help='JSON config file')
    annotate.add_argument('--output', '-o', type=str, default=None, help='Output directory')
    annotate.add_argument('--threshold', type=float, default=None, help='Motion threshold t in (0, 1)')
    annotate.add_argument('--erosion-kernel', type=int, default=None)
    annotate.add_argument('--dilation-kernel', type=int, default=None)
    annotate.add_argument('--connectivity', type=int, choices=[4, 8], default=None)
    annotate.add_argument('--max-components', type=int, default=None)
    annotate.add_argument('--tighten-boxes', action='store_true', help='Shrink boxes to the thresholded pixels')
    annotate.add_argument('--timestamp-source', choices=['filename', 'mtime'], default=None)
    annotate.add_argument('--timestamp-regex', type=str, default=None)
    annotate.add_argument('--gap-seconds', type=float, default=None)
    annotate.add_argument('--max-burst', type=int, default=None)
    annotate.add_argument('--fn-policy', choices=[p.value for p in FnPolicy], default=None)
    annotate.add_argument('--test-cameras', nargs='*', default=None, help='Camera ids held out for test')
    annotate.add_argument('--val-fraction', type=float, default=None)
    annotate.add_argument('--seed', type=int, default=None)
    annotate.add_argument('--debug-dump', type=str, default=None, help='Directory for step-by-step images')
    annotate.add_argument('--workers', type=int, default=None)

    testbed = sub.add_parser('testbed', help='Generate the nMNIST tiny-object testbed')
    testbed.add_argument('--spec', type=int, choices=[1, 2, 3, 4], default=None,
                         help='Standard configuration: 1=64px/3 digits ... 4=512px/101 digits')
    testbed.add_argument('--digits', type=int, default=None, help='Digits per canvas (custom spec)')
    testbed.add_argument('--side', type=int, default=None, help='Canvas side in pixels (custom spec)')
    testbed.add_argument('--mnist-dir', type=str, default=config.MNIST_DIR)
    testbed.add_argument('--out', type=str, default=None)
    testbed.add_argument('--seed', type=int, default=config.SEED)
    testbed.add_argument('--limit', type=int, default=None, help='Cap every split at N canvases')
    testbed.add_argument('--workers', type=int, default=config.WORKERS)

    evaluate = sub.add_parser('evaluate', help='Score predictions against truth')
    evaluate.add_argument('predictions', type=str)
    evaluate.add_argument('truth', type=str)
    evaluate.add_argument('--mode', choices=['classification', 'localization', 'annotation'], default='classification',
                          help='annotation: localizer box table against the mapping, FP counted before correction')
    evaluate.add_argument('--burst-map', type=str, default=None, help='image_id,burst_id CSV for burst voting')
    evaluate.add_argument('--truth-boxes', type=str, default=None,
                          help='Truth box table (tiny tag, annotation mode)')
    evaluate.add_argument('--image-size', type=_image_size, default=None, help='WIDTHxHEIGHT')
    evaluate.add_argument('--iou-min', type=float, default=config.IOU_MIN)
    evaluate.add_argument('--out', type=str, default=None, help='Report JSON path')

    review = sub.add_parser('review', help='List images lowest-confidence first')
    review.add_argument('predictions', type=str)
    review.add_argument('--top', type=int, default=None)

    manifest = sub.add_parser('manifest', help='Write the detector training manifest')
    manifest.add_argument('--out', type=str, default=str(Path(config.OUTPUT_DIR) / 'training_manifest.json'))
    return parser


def main(argv=None) -> int:
    """Main execution function"""
    parser = build_parser()
    args = parser.parse_args(argv)

    logger, _ = setup_logging(args.log_dir or config.LOG_DIR, args.verbose)
    try:
        if args.command == 'annotate':
            return cmd_annotate(args)
        if args.command == 'testbed':
            return cmd_testbed(args, parser)
        if args.command == 'evaluate':
            return cmd_evaluate(args)
        if args.command == 'review':
            return cmd_review(args)
        return cmd_manifest(args)
    except KeyboardInterrupt:
        logger.info("Interrupted by user")
        return 1
    except (WeakTrapError, OSError, ValueError, KeyError) as e:
        logger.error(f"{args.command} failed: {e}")
        logger.debug(traceback.format_exc())
        return 1


if __name__ == "__main__":
    sys.exit(main())
