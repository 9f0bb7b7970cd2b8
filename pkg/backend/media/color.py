"""Colour conversion and chroma resampling."""

from __future__ import annotations

from typing import Tuple

import numpy as np

from exceptions import DimensionMismatch, ValidationError
from models.frame import BitDepth, ChromaFormat, Frame, Plane

# BT.601 full-range (JFIF) matrix.
_RGB_TO_YCBCR = np.array([
    [0.299, 0.587, 0.114],
    [-0.168736, -0.331264, 0.5],
    [0.5, -0.418688, -0.081312],
])
_YCBCR_TO_RGB = np.array([
    [1.0, 0.0, 1.402],
    [1.0, -0.344136, -0.714136],
    [1.0, 1.772, 0.0],
])


def rgb_to_ycbcr(r: np.ndarray, g: np.ndarray, b: np.ndarray) -> Frame:
    """Convert 8-bit RGB planes to a 4:4:4 8-bit frame."""
    if not (r.shape == g.shape == b.shape):
        raise DimensionMismatch(r.shape, (g.shape, b.shape), "RGB plane")

    rgb = np.stack([r, g, b], axis=-1).astype(np.float64)
    ycc = rgb @ _RGB_TO_YCBCR.T
    ycc[..., 1:] += 128.0
    ycc = np.clip(np.floor(ycc + 0.5), 0, 255).astype(np.uint16)
    return Frame.from_arrays(ycc[..., 0], ycc[..., 1], ycc[..., 2], ChromaFormat.YUV444)


def chroma_upsample(frame: Frame) -> Frame:
    """Nearest-neighbour replication of chroma up to the luma grid."""
    if frame.format == ChromaFormat.YUV444:
        return frame
    s_x, s_y = frame.format.s_x, frame.format.s_y
    h, w = frame.y.shape

    def up(plane: Plane) -> np.ndarray:
        return np.repeat(np.repeat(plane.array, s_y, axis=0), s_x, axis=1)[:h, :w]

    return Frame.from_arrays(frame.y.array, up(frame.cb), up(frame.cr), ChromaFormat.YUV444, frame.depth)


def chroma_downsample(frame: Frame, target: ChromaFormat) -> Frame:
    """Average coincident chroma samples of a 4:4:4 frame onto the target grid.

    Odd luma dimensions are completed by edge replication before averaging.
    """
    if frame.format != ChromaFormat.YUV444:
        raise ValidationError(
            "chroma_downsample expects a 4:4:4 source",
            details={"format": frame.format.tag}
        )
    if target == ChromaFormat.YUV444:
        return frame

    s_x, s_y = target.s_x, target.s_y
    chroma_w, chroma_h = target.chroma_dims(frame.width, frame.height)
    n = s_x * s_y

    def down(plane: Plane) -> np.ndarray:
        arr = plane.array.astype(np.int64)
        arr = np.pad(
            arr,
            ((0, chroma_h * s_y - arr.shape[0]), (0, chroma_w * s_x - arr.shape[1])),
            mode="edge",
        )
        sums = arr.reshape(chroma_h, s_y, chroma_w, s_x).sum(axis=(1, 3))
        return (sums + n // 2) // n

    return Frame.from_arrays(frame.y.array, down(frame.cb), down(frame.cr), target, frame.depth)


def ycbcr_to_rgb(frame: Frame) -> np.ndarray:
    """Inverse full-range conversion to float RGB in [0, 1], shape (h, w, 3)."""
    full = chroma_upsample(frame)
    scale = float(frame.depth.max_value)
    mid = float(frame.depth.midpoint)
    ycc = np.stack([
        full.y.array.astype(np.float64) / scale,
        (full.cb.array.astype(np.float64) - mid) / scale,
        (full.cr.array.astype(np.float64) - mid) / scale,
    ], axis=-1)
    return np.clip(ycc @ _YCBCR_TO_RGB.T, 0.0, 1.0)


def rgb_planes_from_frame(frame: Frame) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """8-bit RGB planes for writing previews."""
    rgb = np.floor(ycbcr_to_rgb(frame) * 255.0 + 0.5).astype(np.uint8)
    return rgb[..., 0], rgb[..., 1], rgb[..., 2]


def to_depth(frame: Frame, depth: BitDepth) -> Frame:
    """Rescale an 8-bit frame to a higher precision by left shift."""
    shift = int(depth) - int(frame.depth)
    if shift < 0:
        raise ValidationError("cannot reduce bit depth", details={"from": int(frame.depth), "to": int(depth)})
    planes = [p.array.astype(np.uint16) << shift for p in frame.planes]
    return Frame.from_arrays(*planes, fmt=frame.format, depth=depth)
