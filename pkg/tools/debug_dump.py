"""
Debug Dump Tool - Saves every localization step of a burst as images

For each burst: the background B, then per frame the motion map M (value x 255),
the thresholded map T, the denoised map D, D tinted over the grayscale frame
and the frame with its boxes, plus one figure with all steps side by side.
"""

import logging
from pathlib import Path

import matplotlib
matplotlib.use('Agg')
import matplotlib.patches as patches
import matplotlib.pyplot as plt
import numpy as np

from dataset_io.images import encode_png
from imaging.image_core import ImageBuffer, to_grayscale

logger = logging.getLogger(__name__)

BOX_COLOR = (255, 0, 0)


def _mask_image(bits: np.ndarray) -> ImageBuffer:
    return ImageBuffer(np.where(bits, 255, 0).astype(np.uint8))


def _motion_image(values: np.ndarray) -> ImageBuffer:
    return ImageBuffer(np.clip(np.rint(values * 255.0), 0, 255).astype(np.uint8))


def mask_overlay(img: ImageBuffer, bits: np.ndarray, alpha: float = 0.5) -> ImageBuffer:
    """Grayscale copy of the frame with the mask tinted in the box color."""
    gray = to_grayscale(img).pixels.astype(np.float64)
    rgb = np.repeat(gray, 3, axis=2)
    tint = np.asarray(BOX_COLOR, dtype=np.float64)
    rgb[bits] = (1.0 - alpha) * rgb[bits] + alpha * tint
    return ImageBuffer(np.clip(np.floor(rgb + 0.5), 0, 255).astype(np.uint8))


def draw_boxes(img: ImageBuffer, boxes, thickness: int = 3) -> ImageBuffer:
    pixels = img.pixels.copy()
    if pixels.shape[2] == 1:
        pixels = np.repeat(pixels, 3, axis=2)
    for box in boxes:
        for offset in range(thickness):
            x1, y1 = box.x + offset, box.y + offset
            x2, y2 = box.x2 - 1 - offset, box.y2 - 1 - offset
            if x1 > x2 or y1 > y2:
                break
            pixels[y1, x1:x2 + 1] = BOX_COLOR
            pixels[y2, x1:x2 + 1] = BOX_COLOR
            pixels[y1:y2 + 1, x1] = BOX_COLOR
            pixels[y1:y2 + 1, x2] = BOX_COLOR
    return ImageBuffer(pixels)


def _steps_figure(trace, path: Path):
    n = len(trace.frames)
    fig, axes = plt.subplots(n, 6, figsize=(18, 3 * n), squeeze=False)
    titles = ["frame I", "background B", "motion M", "threshold T", "denoised D", "boxes"]
    for row, frame_trace in enumerate(trace.frames):
        frame = trace.burst.frames[row].image
        panels = [
            frame.pixels,
            trace.background.pixels,
            frame_trace.motion.values,
            frame_trace.thresholded.bits,
            frame_trace.denoised.bits,
            frame.pixels,
        ]
        for col, data in enumerate(panels):
            ax = axes[row][col]
            if data.ndim == 3 and data.shape[2] == 3:
                ax.imshow(data)
            else:
                gray = data[:, :, 0] if data.ndim == 3 else data
                ax.imshow(gray.astype(np.float32), cmap='gray', vmin=0.0,
                          vmax=255.0 if gray.dtype == np.uint8 else 1.0)
            ax.set_xticks([])
            ax.set_yticks([])
            if row == 0:
                ax.set_title(titles[col], fontsize=11, fontweight='bold')
            if col == 0:
                ax.set_ylabel(frame_trace.image_id, fontsize=9)
        for box in frame_trace.localization.boxes:
            axes[row][5].add_patch(patches.Rectangle(
                (box.x, box.y), box.w, box.h, fill=False, edgecolor='red', linewidth=2
            ))
    fig.tight_layout()
    fig.savefig(path, dpi=100, bbox_inches='tight')
    plt.close(fig)


def dump_trace(trace, out_dir, figure: bool = True) -> Path:
    """Write the step images of one burst under out_dir/<burst_id>/."""
    burst_name = trace.burst.burst_id or trace.burst.frames[0].image_id
    burst_dir = Path(out_dir) / burst_name
    burst_dir.mkdir(parents=True, exist_ok=True)

    encode_png(trace.background, burst_dir / "background.png")
    for frame, frame_trace in zip(trace.burst.frames, trace.frames):
        stem = frame_trace.image_id
        encode_png(_motion_image(frame_trace.motion.values), burst_dir / f"{stem}_motion.png")
        encode_png(_mask_image(frame_trace.thresholded.bits), burst_dir / f"{stem}_threshold.png")
        encode_png(_mask_image(frame_trace.denoised.bits), burst_dir / f"{stem}_denoised.png")
        encode_png(mask_overlay(frame.image, frame_trace.denoised.bits), burst_dir / f"{stem}_overlay.png")
        encode_png(draw_boxes(frame.image, frame_trace.localization.boxes), burst_dir / f"{stem}_boxes.png")

    if figure:
        try:
            _steps_figure(trace, burst_dir / f"{burst_name}_steps.png")
        except Exception as e:
            plt.close('all')
            logger.warning(f"Could not render step figure for {burst_name}: {e}")
    logger.debug(f"Debug dump written to {burst_dir}")
    return burst_dir
