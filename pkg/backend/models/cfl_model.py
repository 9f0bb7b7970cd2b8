"""Chroma-from-luma predictor: Q3 luma AC extraction, DC prediction and CfL synthesis."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from exceptions import (
    AlphaOutOfRange,
    DimensionMismatch,
    EmptyCorpus,
    InvalidBlockSize,
    OutOfBounds,
)
from logging_config import get_logger
from models.frame import BitDepth, ChromaFormat, Frame

logger = get_logger(__name__)

MAX_ALPHA_Q3 = 16
MAX_BLOCK = 32
ANALYSIS_SIZES = (4, 8, 16, 32)


def _is_pow2(n: int) -> bool:
    return 1 <= n <= MAX_BLOCK and n & (n - 1) == 0


def _log2(n: int) -> int:
    return n.bit_length() - 1


def round_half_away_q6(products: np.ndarray) -> np.ndarray:
    """Divide Q6 products by 64, rounding halves away from zero."""
    products = np.asarray(products, dtype=np.int64)
    return np.where(products >= 0, (products + 32) >> 6, -((-products + 32) >> 6))


@dataclass(frozen=True)
class Q3AcBlock:
    """Zero-mean subsampled luma in 1/8 sample units."""
    width: int
    height: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not (_is_pow2(self.width) and _is_pow2(self.height)):
            raise InvalidBlockSize(self.width, self.height)
        if self.values.shape != (self.height, self.width):
            raise DimensionMismatch((self.height, self.width), self.values.shape, "AC block")


class NeighborAvailability(str, Enum):
    ABOVE = "above"
    LEFT = "left"
    BOTH = "both"
    NONE = "none"


@dataclass(frozen=True)
class DcPrediction:
    value: int
    neighbor_availability: NeighborAvailability


def _pad_to(region: np.ndarray, height: int, width: int) -> np.ndarray:
    """Crop or edge-replicate a 2-D region to exactly (height, width)."""
    region = np.asarray(region)[:height, :width]
    pad_h, pad_w = height - region.shape[0], width - region.shape[1]
    if pad_h or pad_w:
        region = np.pad(region, ((0, pad_h), (0, pad_w)), mode="edge")
    return region


def subsample_sum(recon_luma: np.ndarray, fmt: ChromaFormat, u: int, v: int) -> int:
    """Sum of the luma samples coincident with chroma position (u, v).

    Footprint samples past the region edge replicate the last row or column.
    """
    recon_luma = np.asarray(recon_luma)
    height, width = recon_luma.shape
    chroma_w, chroma_h = fmt.chroma_dims(width, height)
    if not (0 <= u < chroma_w and 0 <= v < chroma_h):
        raise OutOfBounds(u, v, chroma_w, chroma_h)

    xs = np.minimum(np.arange(u * fmt.s_x, (u + 1) * fmt.s_x), width - 1)
    ys = np.minimum(np.arange(v * fmt.s_y, (v + 1) * fmt.s_y), height - 1)
    return int(recon_luma[np.ix_(ys, xs)].astype(np.int64).sum())


def subsample_sums(recon_luma: np.ndarray, fmt: ChromaFormat, width: int, height: int) -> np.ndarray:
    """Subsample sums for a width x height chroma grid (int64, shape (height, width))."""
    luma = _pad_to(np.asarray(recon_luma, dtype=np.int64), height * fmt.s_y, width * fmt.s_x)
    return luma.reshape(height, fmt.s_y, width, fmt.s_x).sum(axis=(1, 3))


def q3_ac_batch(luma: np.ndarray, fmt: ChromaFormat) -> Tuple[np.ndarray, np.ndarray]:
    """Q3 AC extraction over a leading batch axis.

    `luma` has shape (batch, N*s_y, M*s_x). Returns the Q3 subsampled values q
    and the zero-mean AC values, both int64 and shaped (batch, N, M), so callers
    can check range before narrowing.
    """
    luma = np.asarray(luma, dtype=np.int64)
    batch, luma_h, luma_w = luma.shape
    width, height = luma_w // fmt.s_x, luma_h // fmt.s_y
    if width * fmt.s_x != luma_w or height * fmt.s_y != luma_h:
        raise DimensionMismatch((height * fmt.s_y, width * fmt.s_x), (luma_h, luma_w), "luma region")
    if not (_is_pow2(width) and _is_pow2(height)):
        raise InvalidBlockSize(width, height)

    sums = luma.reshape(batch, height, fmt.s_y, width, fmt.s_x).sum(axis=(2, 4))
    q = sums << (3 - fmt.log2_area)
    log2_count = _log2(width) + _log2(height)
    # Round-to-nearest average with a single shift.
    avg = (q.sum(axis=(1, 2)) + ((1 << log2_count) >> 1)) >> log2_count
    return q, q - avg[:, None, None]


def luma_to_q3_ac(recon_luma: np.ndarray, fmt: ChromaFormat, width: int, height: int) -> Q3AcBlock:
    """Zero-mean Q3 luma for a width x height chroma block.

    `recon_luma` is the co-located reconstructed luma; regions smaller than the
    (height*s_y, width*s_x) footprint are completed by edge replication.
    """
    if not (_is_pow2(width) and _is_pow2(height)):
        raise InvalidBlockSize(width, height)
    luma = _pad_to(np.asarray(recon_luma, dtype=np.int64), height * fmt.s_y, width * fmt.s_x)
    _, ac = q3_ac_batch(luma[None], fmt)
    return Q3AcBlock(width=width, height=height, values=ac[0].astype(np.int16))


def dc_predict(
    above: Optional[Sequence[int]],
    left: Optional[Sequence[int]],
    depth: BitDepth,
) -> DcPrediction:
    """Rounded mean of the available neighbours, or the mid-level without any."""
    above = None if above is None or len(above) == 0 else np.asarray(above, dtype=np.int64)
    left = None if left is None or len(left) == 0 else np.asarray(left, dtype=np.int64)

    if above is not None and left is not None:
        samples, availability = np.concatenate([above, left]), NeighborAvailability.BOTH
    elif above is not None:
        samples, availability = above, NeighborAvailability.ABOVE
    elif left is not None:
        samples, availability = left, NeighborAvailability.LEFT
    else:
        return DcPrediction(BitDepth(depth).midpoint, NeighborAvailability.NONE)

    count = samples.size
    return DcPrediction(int((int(samples.sum()) + count // 2) // count), availability)


def cfl_predict(ac: Q3AcBlock, alpha_q3: int, dc: DcPrediction, depth: BitDepth) -> np.ndarray:
    """CfL(alpha) = clip(DC + alpha * AC), alpha and AC both in Q3."""
    if not -MAX_ALPHA_Q3 <= alpha_q3 <= MAX_ALPHA_Q3:
        raise AlphaOutOfRange(alpha_q3)
    scaled = round_half_away_q6(int(alpha_q3) * ac.values.astype(np.int64))
    return np.clip(dc.value + scaled, 0, BitDepth(depth).max_value)


@dataclass(frozen=True)
class DcErrorStats:
    """Box-plot summary of squared DC errors for one block size."""
    size: int
    count: int
    q1: float
    median: float
    q3: float
    lo_whisker: float
    hi_whisker: float

    def as_row(self) -> Dict[str, float]:
        return {
            "size": self.size,
            "q1": self.q1,
            "median": self.median,
            "q3": self.q3,
            "lo_whisker": self.lo_whisker,
            "hi_whisker": self.hi_whisker,
        }


def box_plot_stats(size: int, errors: np.ndarray) -> DcErrorStats:
    """Quartiles with whiskers at the furthest data within 1.5 IQR."""
    errors = np.asarray(errors, dtype=np.float64)
    q1, median, q3 = np.percentile(errors, [25, 50, 75])
    iqr = q3 - q1
    inside = errors[(errors >= q1 - 1.5 * iqr) & (errors <= q3 + 1.5 * iqr)]
    return DcErrorStats(
        size=size,
        count=int(errors.size),
        q1=float(q1),
        median=float(median),
        q3=float(q3),
        lo_whisker=float(inside.min()),
        hi_whisker=float(inside.max()),
    )


def block_dc_errors(source: np.ndarray, neighbours: np.ndarray, size: int, depth: BitDepth) -> np.ndarray:
    """Squared error between each full block's mean and its DC prediction.

    `neighbours` supplies the border samples (the source itself or a
    reconstruction of it); block means always come from `source`.
    """
    source = np.asarray(source, dtype=np.int64)
    neighbours = np.asarray(neighbours, dtype=np.int64)
    rows, cols = source.shape[0] // size, source.shape[1] // size
    if rows == 0 or cols == 0:
        return np.empty(0)

    blocks = source[:rows * size, :cols * size].reshape(rows, size, cols, size)
    means = blocks.mean(axis=(1, 3))

    above = np.zeros((rows, cols), dtype=np.int64)
    left = np.zeros((rows, cols), dtype=np.int64)
    if rows > 1:
        edge_rows = neighbours[size - 1:(rows - 1) * size:size, :cols * size]
        above[1:] = edge_rows.reshape(rows - 1, cols, size).sum(axis=2)
    if cols > 1:
        edge_cols = neighbours[:rows * size, size - 1:(cols - 1) * size:size]
        left[:, 1:] = edge_cols.T.reshape(cols - 1, rows, size).sum(axis=2).T

    has_above = np.arange(rows)[:, None] > 0
    has_left = np.arange(cols)[None, :] > 0
    both = has_above & has_left
    dc = np.full((rows, cols), BitDepth(depth).midpoint, dtype=np.int64)
    dc = np.where(both, (above + left + size) // (2 * size), dc)
    dc = np.where(has_above & ~has_left, (above + size // 2) // size, dc)
    dc = np.where(has_left & ~has_above, (left + size // 2) // size, dc)
    return ((means - dc) ** 2).reshape(-1)


def dc_error_analysis(
    frames: Iterable[Frame],
    block_sizes: Sequence[int] = ANALYSIS_SIZES,
    recon: Optional[Sequence[Frame]] = None,
) -> List[DcErrorStats]:
    """Distribution of squared DC prediction error of the chroma block mean.

    Neighbours come from `recon` when given (one reconstruction per frame),
    otherwise from the source frames themselves.
    """
    frames = list(frames)
    if not frames:
        raise EmptyCorpus("DC error analysis needs at least one frame")
    if recon is not None and len(recon) != len(frames):
        raise DimensionMismatch(len(frames), len(recon), "reconstruction list")

    results = []
    for size in block_sizes:
        if not _is_pow2(size):
            raise InvalidBlockSize(size, size)
        errors = []
        for index, frame in enumerate(frames):
            border = recon[index] if recon is not None else frame
            for plane, border_plane in ((frame.cb, border.cb), (frame.cr, border.cr)):
                errors.append(block_dc_errors(plane.array, border_plane.array, size, frame.depth))
        errors = np.concatenate(errors) if errors else np.empty(0)
        if errors.size == 0:
            logger.warning(f"No {size}x{size} chroma blocks fit in the corpus; skipping")
            continue
        stats = box_plot_stats(size, errors)
        logger.info(f"DC error {size}x{size}: {stats.count} blocks, median {stats.median:.3f}")
        results.append(stats)
    return results
