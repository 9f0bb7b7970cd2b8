"""Residual path: orthonormal DCT, dead-zone quantizer and coefficient coding."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import List, Optional

import numpy as np
from scipy.fft import dctn, idctn

from codec.range_coder import CdfTable, RangeDecoder, RateEstimator, SymbolWriter
from exceptions import InvalidPayload, UnsupportedBlockSize

TRANSFORM_SIZES = (4, 8, 16, 32)
DEFAULT_DEADZONE = 1.0 / 3.0

LUMA, CHROMA = 0, 1
LEVEL_SYMBOLS = 16
LEVEL_ESCAPE = LEVEL_SYMBOLS - 1
EOB_CLASSES = 12  # bit length of 0..1024
POSITION_BUCKETS = (1, 3, 6, 15, 31)  # upper bounds of the first five buckets
MAX_EXP_GOLOMB_PREFIX = 32


def _check_size(shape) -> int:
    if len(shape) != 2 or shape[0] != shape[1] or shape[0] not in TRANSFORM_SIZES:
        raise UnsupportedBlockSize(shape)
    return shape[0]


@lru_cache(maxsize=None)
def scan_order(size: int) -> np.ndarray:
    """Flat indices in anti-diagonal order, top row first within a diagonal."""
    rows, cols = np.divmod(np.arange(size * size), size)
    return np.lexsort((rows, rows + cols))


def _bucket(position: int) -> int:
    for bucket, bound in enumerate(POSITION_BUCKETS):
        if position < bound:
            return bucket
    return len(POSITION_BUCKETS)


class CoefficientContexts:
    """CDFs for end-of-block classes and levels, per plane type."""

    def __init__(self):
        self.eob = [CdfTable(EOB_CLASSES) for _ in (LUMA, CHROMA)]
        self.levels: List[List[List[CdfTable]]] = [
            [[CdfTable(LEVEL_SYMBOLS) for _ in range(3)] for _ in range(len(POSITION_BUCKETS) + 1)]
            for _ in (LUMA, CHROMA)
        ]

    def level_cdf(self, plane_type: int, position: int, previous: int) -> CdfTable:
        return self.levels[plane_type][_bucket(position)][min(previous, 2)]

    def copy(self) -> "CoefficientContexts":
        clone = CoefficientContexts.__new__(CoefficientContexts)
        clone.eob = [cdf.copy() for cdf in self.eob]
        clone.levels = [[[cdf.copy() for cdf in ctx] for ctx in bucket] for bucket in self.levels]
        return clone


def forward_transform(residual: np.ndarray) -> np.ndarray:
    _check_size(np.shape(residual))
    return dctn(np.asarray(residual, dtype=np.float64), type=2, norm="ortho")


def inverse_transform(coeffs: np.ndarray) -> np.ndarray:
    _check_size(np.shape(coeffs))
    return idctn(np.asarray(coeffs, dtype=np.float64), type=2, norm="ortho")


def quantize(coeffs: np.ndarray, step: float, deadzone: float = DEFAULT_DEADZONE) -> np.ndarray:
    """sign(c) * floor(|c| / step + deadzone)."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    return (np.sign(coeffs) * np.floor(np.abs(coeffs) / step + deadzone)).astype(np.int64)


def reconstruct_residual(levels: np.ndarray, step: float) -> np.ndarray:
    """Dequantise, inverse transform and round half up to integers."""
    return np.floor(inverse_transform(np.asarray(levels, dtype=np.float64) * step) + 0.5).astype(np.int64)


def _write_exp_golomb(writer: SymbolWriter, value: int) -> None:
    code = value + 1
    length = code.bit_length()
    writer.encode_bits(0, length - 1)
    writer.encode_bits(code, length)


def _read_exp_golomb(decoder: RangeDecoder) -> int:
    zeros = 0
    while decoder.decode_bits(1) == 0:
        zeros += 1
        if zeros > MAX_EXP_GOLOMB_PREFIX:
            raise InvalidPayload("runaway Exp-Golomb prefix in coefficient data")
    return ((1 << zeros) | decoder.decode_bits(zeros)) - 1


def code_levels(writer: SymbolWriter, levels: np.ndarray, contexts: CoefficientContexts, plane_type: int) -> None:
    """End-of-block position, then level, escape suffix and sign per scan position."""
    size = _check_size(levels.shape)
    scanned = levels.reshape(-1)[scan_order(size)]
    nonzero = np.flatnonzero(scanned)
    eob = int(nonzero[-1]) + 1 if nonzero.size else 0

    eob_class = eob.bit_length()
    writer.encode_symbol(contexts.eob[plane_type], eob_class)
    if eob_class > 1:
        writer.encode_bits(eob - (1 << (eob_class - 1)), eob_class - 1)

    previous = 0
    for position in range(eob):
        level = int(scanned[position])
        magnitude = abs(level)
        writer.encode_symbol(contexts.level_cdf(plane_type, position, previous), min(magnitude, LEVEL_ESCAPE))
        if magnitude >= LEVEL_ESCAPE:
            _write_exp_golomb(writer, magnitude - LEVEL_ESCAPE)
        if magnitude:
            writer.encode_bits(int(level < 0), 1)
        previous = magnitude


def decode_levels(decoder: RangeDecoder, contexts: CoefficientContexts, plane_type: int, size: int) -> np.ndarray:
    _check_size((size, size))
    eob_class = decoder.decode_symbol(contexts.eob[plane_type])
    if eob_class == 0:
        eob = 0
    elif eob_class == 1:
        eob = 1
    else:
        eob = (1 << (eob_class - 1)) + decoder.decode_bits(eob_class - 1)
    if eob > size * size:
        raise InvalidPayload(f"end of block {eob} beyond {size}x{size}", details={"eob": eob})

    scanned = np.zeros(size * size, dtype=np.int64)
    previous = 0
    for position in range(eob):
        magnitude = decoder.decode_symbol(contexts.level_cdf(plane_type, position, previous))
        if magnitude == LEVEL_ESCAPE:
            magnitude += _read_exp_golomb(decoder)
        level = magnitude
        if magnitude and decoder.decode_bits(1):
            level = -magnitude
        scanned[position] = level
        previous = magnitude

    levels = np.zeros(size * size, dtype=np.int64)
    levels[scan_order(size)] = scanned
    return levels.reshape(size, size)


@dataclass(frozen=True)
class TransformResult:
    levels: np.ndarray
    rate_units: int
    recon_residual: np.ndarray

    @property
    def rate_bits(self) -> float:
        return self.rate_units / 512


def transform_quantize_block(
    residual: np.ndarray,
    step: float,
    contexts: CoefficientContexts,
    plane_type: int,
    writer: Optional[SymbolWriter] = None,
    deadzone: float = DEFAULT_DEADZONE,
) -> TransformResult:
    """Transform, quantise and (optionally) code one residual block.

    The returned rate is estimated on the contexts as they were before
    coding; passing a writer then emits the symbols and adapts the contexts.
    """
    residual = np.asarray(residual)
    _check_size(residual.shape)
    levels = quantize(forward_transform(residual), step, deadzone)

    estimator = RateEstimator()
    code_levels(estimator, levels, contexts, plane_type)
    if writer is not None:
        code_levels(writer, levels, contexts, plane_type)
    return TransformResult(levels, estimator.units, reconstruct_residual(levels, step))
