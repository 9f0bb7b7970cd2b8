"""Bjontegaard rate difference between two RD curves."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, List, Mapping, NamedTuple, Tuple

import numpy as np
from scipy.interpolate import PchipInterpolator

from exceptions import InvalidCurve, NoOverlap
from logging_config import get_logger

logger = get_logger(__name__)

PCHIP = "pchip"
CLASSIC = "classic"


@dataclass(frozen=True)
class RdCurve:
    """(rate, quality) points sorted by strictly increasing rate."""
    rates: Tuple[float, ...]
    qualities: Tuple[float, ...]

    def __post_init__(self):
        if len(self.rates) != len(self.qualities):
            raise InvalidCurve("rate and quality lists differ in length")
        if len(self.rates) < 2:
            raise InvalidCurve("an RD curve needs at least two points")
        if any(r <= 0 for r in self.rates):
            raise InvalidCurve("rates must be positive")
        if any(b <= a for a, b in zip(self.rates, self.rates[1:])):
            raise InvalidCurve("rates must be strictly increasing", details={"rates": list(self.rates)})
        if any(b < a for a, b in zip(self.qualities, self.qualities[1:])):
            raise InvalidCurve("quality must not decrease as rate grows", details={"qualities": list(self.qualities)})

    @classmethod
    def from_points(cls, points: Iterable[Tuple[float, float]]) -> "RdCurve":
        ordered = sorted((float(r), float(q)) for r, q in points)
        return cls(tuple(r for r, _ in ordered), tuple(q for _, q in ordered))

    def log_rate_by_quality(self) -> Tuple[np.ndarray, np.ndarray]:
        """Quality abscissae (strictly increasing) with log-rate ordinates.

        Points tied on quality keep only the cheapest rate.
        """
        qualities: List[float] = []
        log_rates: List[float] = []
        for rate, quality in zip(self.rates, self.qualities):
            if qualities and quality == qualities[-1]:
                continue
            qualities.append(quality)
            log_rates.append(float(np.log(rate)))
        if len(qualities) < 2:
            raise InvalidCurve("curve quality is flat; nothing to integrate")
        return np.array(qualities), np.array(log_rates)


def _integral(qualities: np.ndarray, log_rates: np.ndarray, low: float, high: float, mode: str) -> float:
    if mode == PCHIP:
        return float(PchipInterpolator(qualities, log_rates).integrate(low, high))
    if mode == CLASSIC:
        degree = min(3, len(qualities) - 1)
        poly = np.polyint(np.polyfit(qualities, log_rates, degree))
        return float(np.polyval(poly, high) - np.polyval(poly, low))
    raise ValueError(f"unknown BD-rate interpolation {mode!r}")


def bd_rate(baseline: RdCurve, test: RdCurve, mode: str = PCHIP) -> float:
    """Average rate change of `test` against `baseline` at equal quality, in percent.

    Negative values mean the test curve needs fewer bits.
    """
    base_q, base_r = baseline.log_rate_by_quality()
    test_q, test_r = test.log_rate_by_quality()
    low = max(base_q[0], test_q[0])
    high = min(base_q[-1], test_q[-1])
    if low >= high:
        raise NoOverlap(float(low), float(high))

    diff = (_integral(test_q, test_r, low, high, mode) - _integral(base_q, base_r, low, high, mode)) / (high - low)
    return float((np.exp(diff) - 1.0) * 100.0)


class MeanBdRate(NamedTuple):
    percent: float
    images: int


def mean_bd_rate(
    pairs: Mapping[str, Tuple[RdCurve, RdCurve]],
    mode: str = PCHIP,
    skip_invalid: bool = False,
) -> MeanBdRate:
    """Arithmetic mean of per-image BD-rates, keyed by image name.

    With `skip_invalid` an image whose curves cannot be compared is left out
    of the mean; the result is NaN when every image is left out.
    """
    if not pairs:
        raise InvalidCurve("no curve pairs to average")
    values = []
    for name, (base, test) in pairs.items():
        try:
            values.append(bd_rate(base, test, mode))
        except (InvalidCurve, NoOverlap) as e:
            if not skip_invalid:
                raise
            logger.warning(f"Skipping {name}: {e.message}")
    percent = float(np.mean(values)) if values else math.nan
    return MeanBdRate(percent, len(values))
