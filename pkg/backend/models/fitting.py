"""Exact least-squares fitting of the chroma model and alpha quantization."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Optional, Tuple, Union

import numpy as np

from exceptions import DimensionMismatch, InsufficientNeighbors, ValidationError

ALPHA_STEPS = 8  # grid step 1/8
MAX_MAGNITUDE = 16

Number = Union[int, float, Fraction]


@dataclass(frozen=True)
class FitResult:
    """Model chroma = alpha * luma + beta with exact rational coefficients."""
    alpha: Fraction
    beta: Fraction
    degenerate: bool = False

    def predict(self, luma: np.ndarray) -> np.ndarray:
        return float(self.alpha) * np.asarray(luma, dtype=np.float64) + float(self.beta)


@dataclass(frozen=True)
class ZeroMeanPrediction:
    """alpha_z * AC + beta_z evaluated exactly."""
    values: np.ndarray

    @classmethod
    def from_fit(cls, fit: FitResult, ac: np.ndarray) -> "ZeroMeanPrediction":
        ac = _as_exact(ac)
        return cls(values=np.array([fit.alpha * a + fit.beta for a in ac.flat], dtype=object).reshape(ac.shape))


def _as_exact(values: np.ndarray) -> np.ndarray:
    """Object array of ints/Fractions so sums never round."""
    values = np.asarray(values)
    if values.dtype == object:
        return values
    if not np.issubdtype(values.dtype, np.integer):
        raise ValidationError("exact fitting needs integer or Fraction samples", details={"dtype": str(values.dtype)})
    return values.astype(np.int64).astype(object)


def _check_pair(luma: np.ndarray, chroma: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    luma, chroma = np.asarray(luma), np.asarray(chroma)
    if luma.shape != chroma.shape:
        raise DimensionMismatch(luma.shape, chroma.shape)
    return _as_exact(luma).reshape(-1), _as_exact(chroma).reshape(-1)


def fit_ls(recon_luma: np.ndarray, chroma: np.ndarray) -> FitResult:
    """Ordinary least squares of chroma on luma.

    A constant luma block makes the normal equations singular; the fit then
    falls back to alpha = 0 and beta = mean(chroma).
    """
    luma, chroma = _check_pair(recon_luma, chroma)
    n = luma.size
    if n < 2:
        raise ValidationError("least squares needs at least two samples", details={"samples": n})

    sum_l = sum(luma)
    sum_c = sum(chroma)
    sum_ll = sum(luma * luma)
    sum_lc = sum(luma * chroma)

    denominator = n * sum_ll - sum_l * sum_l
    if denominator == 0:
        return FitResult(alpha=Fraction(0), beta=Fraction(sum_c) / n, degenerate=True)

    alpha = Fraction(n * sum_lc - sum_l * sum_c) / denominator
    beta = (Fraction(sum_c) - alpha * sum_l) / n
    return FitResult(alpha=alpha, beta=beta)


def fit_ls_zero_mean(ac: np.ndarray, chroma: np.ndarray) -> FitResult:
    """Least squares against a zero-mean luma block: beta reduces to mean(chroma)."""
    ac, chroma = _check_pair(ac, chroma)
    n = chroma.size
    beta = Fraction(sum(chroma)) / n
    energy = sum(ac * ac)
    if energy == 0:
        return FitResult(alpha=Fraction(0), beta=beta, degenerate=True)
    return FitResult(alpha=Fraction(sum(ac * chroma)) / energy, beta=beta)


def implicit_fit(neighbor_luma: np.ndarray, neighbor_chroma: np.ndarray) -> FitResult:
    """Fit on reconstructed neighbour pairs, as a decoder could without signalling."""
    neighbor_luma = np.asarray(neighbor_luma).reshape(-1)
    neighbor_chroma = np.asarray(neighbor_chroma).reshape(-1)
    if neighbor_luma.size != neighbor_chroma.size:
        raise DimensionMismatch(neighbor_luma.size, neighbor_chroma.size, "neighbour set")
    if neighbor_luma.size < 2:
        raise InsufficientNeighbors(int(neighbor_luma.size))
    return fit_ls(neighbor_luma, neighbor_chroma)


def implicit_neighbors(
    luma_grid: np.ndarray,
    chroma: np.ndarray,
    x: int,
    y: int,
    width: int,
    height: int,
) -> Tuple[np.ndarray, np.ndarray]:
    """Above row and left column of the chroma block at (x, y) with co-located luma.

    `luma_grid` is luma already brought onto the chroma grid (subsample sums or
    Q3 values); both planes share its coordinates.
    """
    luma_grid, chroma = np.asarray(luma_grid), np.asarray(chroma)
    luma_parts, chroma_parts = [], []
    if y > 0:
        x_end = min(x + width, chroma.shape[1])
        luma_parts.append(luma_grid[y - 1, x:x_end])
        chroma_parts.append(chroma[y - 1, x:x_end])
    if x > 0:
        y_end = min(y + height, chroma.shape[0])
        luma_parts.append(luma_grid[y:y_end, x - 1])
        chroma_parts.append(chroma[y:y_end, x - 1])
    if not luma_parts:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    return np.concatenate(luma_parts).astype(np.int64), np.concatenate(chroma_parts).astype(np.int64)


@dataclass(frozen=True)
class PlaneAlpha:
    """Signalled form of one plane's alpha: sign in {-1, 0, 1} and magnitude index 0..15."""
    sign: int
    mag_index: Optional[int] = None

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValidationError("alpha sign must be -1, 0 or 1", details={"sign": self.sign})
        if (self.sign == 0) != (self.mag_index is None):
            raise ValidationError(
                "magnitude index is present iff the sign is non-zero",
                details={"sign": self.sign, "mag_index": self.mag_index}
            )
        if self.mag_index is not None and not 0 <= self.mag_index < MAX_MAGNITUDE:
            raise ValidationError("magnitude index outside 0..15", details={"mag_index": self.mag_index})

    @property
    def alpha_q3(self) -> int:
        return 0 if self.sign == 0 else self.sign * (self.mag_index + 1)

    @property
    def alpha(self) -> Fraction:
        return Fraction(self.alpha_q3, ALPHA_STEPS)

    @classmethod
    def from_q3(cls, alpha_q3: int) -> "PlaneAlpha":
        if alpha_q3 == 0:
            return cls(0)
        return cls(1 if alpha_q3 > 0 else -1, abs(alpha_q3) - 1)


def quantize_alpha(alpha: Number) -> PlaneAlpha:
    """Nearest point of the {0, +-1/8, ..., +-2} grid; ties go to the smaller magnitude."""
    alpha = Fraction(alpha)
    scaled = abs(alpha) * ALPHA_STEPS
    magnitude = min(math.ceil(scaled - Fraction(1, 2)), MAX_MAGNITUDE)
    if magnitude <= 0:
        return PlaneAlpha(0)
    return PlaneAlpha(1 if alpha > 0 else -1, magnitude - 1)


def exact_sse(prediction: np.ndarray, chroma: np.ndarray) -> Rational:
    """Sum of squared errors without rounding (prediction may hold Fractions)."""
    prediction, chroma = _check_pair(prediction, chroma)
    diff = prediction - chroma
    return sum(diff * diff)
