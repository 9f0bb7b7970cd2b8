"""Adaptive multi-symbol range coder with 15-bit CDFs.

The coder keeps a 32-bit low/range pair and renormalises a byte at a time,
resolving carries through a cached byte. Probabilities adapt by counting.
"""

from __future__ import annotations

from typing import List, Optional, Protocol, Sequence

import numpy as np

from exceptions import SymbolOutOfRange, TruncatedStream, ValidationError

PROB_BITS = 15
PROB_TOP = 1 << PROB_BITS
MAX_ALPHABET = 16
ADAPT_RATE = 5
COUNT_LIMIT = 1 << 16

RATE_SCALE = 512  # rates are integers in 1/512 bit
_TOP = 1 << 24
_MASK32 = 0xFFFFFFFF

# -log2(f / 2^15) in 1/512 bit for every possible frequency.
_COST_TABLE = np.zeros(PROB_TOP + 1, dtype=np.int64)
_COST_TABLE[1:] = np.round((PROB_BITS - np.log2(np.arange(1, PROB_TOP + 1))) * RATE_SCALE).astype(np.int64)


class CdfTable:
    """Cumulative distribution over a small alphabet.

    `cdf` has n + 1 entries from 0 to 2^15; symbol s owns [cdf[s], cdf[s+1]).
    Adaptive tables add 2^rate to the coded symbol's count and rescale the
    counts into the CDF so every symbol keeps at least 1/2^15.
    """

    __slots__ = ("size", "adaptive", "rate", "counts", "cdf")

    def __init__(self, size: int, adaptive: bool = True, rate: int = ADAPT_RATE):
        if not 2 <= size <= MAX_ALPHABET:
            raise ValidationError("alphabet size must be 2..16", details={"size": size})
        self.size = size
        self.adaptive = adaptive
        self.rate = rate
        self.counts: List[int] = [1 << rate] * size
        self.cdf: List[int] = []
        self._derive()

    @classmethod
    def from_cdf(cls, cdf: Sequence[int]) -> "CdfTable":
        """Fixed (non-adapting) table from explicit cumulative values."""
        cdf = [int(c) for c in cdf]
        if len(cdf) < 3 or cdf[0] != 0 or cdf[-1] != PROB_TOP:
            raise ValidationError("CDF must run from 0 to 32768", details={"cdf": cdf})
        if any(b <= a for a, b in zip(cdf, cdf[1:])):
            raise ValidationError("CDF must be strictly increasing", details={"cdf": cdf})
        table = cls(len(cdf) - 1, adaptive=False)
        table.cdf = cdf
        return table

    def _derive(self) -> None:
        total = sum(self.counts)
        span = PROB_TOP - self.size
        cdf, running = [0], 0
        for i, count in enumerate(self.counts[:-1], start=1):
            running += count
            cdf.append(running * span // total + i)
        cdf.append(PROB_TOP)
        self.cdf = cdf

    def check(self, symbol: int) -> None:
        if not 0 <= symbol < self.size:
            raise SymbolOutOfRange(symbol, self.size)

    def interval(self, symbol: int):
        """(cumulative start, frequency) of a symbol."""
        self.check(symbol)
        return self.cdf[symbol], self.cdf[symbol + 1] - self.cdf[symbol]

    def probability(self, symbol: int) -> float:
        _, freq = self.interval(symbol)
        return freq / PROB_TOP

    def update(self, symbol: int) -> None:
        if not self.adaptive:
            return
        self.check(symbol)
        self.counts[symbol] += 1 << self.rate
        if sum(self.counts) > COUNT_LIMIT:
            self.counts = [(c + 1) >> 1 for c in self.counts]
        self._derive()

    def copy(self) -> "CdfTable":
        clone = CdfTable.__new__(CdfTable)
        clone.size = self.size
        clone.adaptive = self.adaptive
        clone.rate = self.rate
        clone.counts = list(self.counts)
        clone.cdf = list(self.cdf)
        return clone

    def __repr__(self) -> str:
        return f"CdfTable(size={self.size}, adaptive={self.adaptive})"


def estimate_rate_bits(cdf: CdfTable, symbol: int) -> int:
    """Cost of coding `symbol` under the current CDF, in 1/512 bit."""
    _, freq = cdf.interval(symbol)
    return int(_COST_TABLE[freq])


def rate_units_to_bits(units: int) -> float:
    return units / RATE_SCALE


class SymbolWriter(Protocol):
    """Anything that accepts coded symbols: the real encoder or a rate estimator."""

    def encode_symbol(self, cdf: CdfTable, symbol: int) -> None:
        ...

    def encode_bits(self, value: int, nbits: int) -> None:
        ...


class RateEstimator:
    """Sums estimated symbol costs without touching the CDFs unless asked to."""

    def __init__(self, adapt: bool = False):
        self.adapt = adapt
        self.units = 0

    def encode_symbol(self, cdf: CdfTable, symbol: int) -> None:
        self.units += estimate_rate_bits(cdf, symbol)
        if self.adapt:
            cdf.update(symbol)

    def encode_bits(self, value: int, nbits: int) -> None:
        self.units += nbits * RATE_SCALE

    @property
    def bits(self) -> float:
        return rate_units_to_bits(self.units)


class RangeEncoder:
    """Carry-propagating range encoder producing a byte string."""

    def __init__(self):
        self.low = 0
        self.range = _MASK32
        self._cache = 0
        self._cache_size = 1
        self._out = bytearray()
        self._finished: Optional[bytes] = None

    def _shift_low(self) -> None:
        if self.low < 0xFF000000 or self.low > _MASK32:
            carry = self.low >> 32
            pending = self._cache
            while True:
                self._out.append((pending + carry) & 0xFF)
                pending = 0xFF
                self._cache_size -= 1
                if self._cache_size == 0:
                    break
            self._cache = (self.low >> 24) & 0xFF
        self._cache_size += 1
        self.low = (self.low & 0x00FFFFFF) << 8

    def _normalize(self) -> None:
        while self.range < _TOP:
            self.range <<= 8
            self._shift_low()

    def encode_symbol(self, cdf: CdfTable, symbol: int) -> None:
        start, freq = cdf.interval(symbol)
        r = self.range >> PROB_BITS
        self.low += r * start
        self.range = r * freq
        self._normalize()
        cdf.update(symbol)

    def encode_bits(self, value: int, nbits: int) -> None:
        """Equiprobable raw bits, most significant first."""
        for shift in range(nbits - 1, -1, -1):
            self.range >>= 1
            if (value >> shift) & 1:
                self.low += self.range
            self._normalize()

    def finish(self) -> bytes:
        if self._finished is None:
            for _ in range(5):
                self._shift_low()
            # The first emitted byte is always zero.
            self._finished = bytes(self._out[1:])
        return self._finished


class RangeDecoder:
    """Inverse of RangeEncoder; the caller replays the same CDF trajectory."""

    def __init__(self, data: bytes, offset: int = 0):
        self._data = data
        self._pos = offset
        self.range = _MASK32
        self.code = 0
        for _ in range(4):
            self.code = (self.code << 8) | self._next_byte()

    def _next_byte(self) -> int:
        if self._pos >= len(self._data):
            raise TruncatedStream(self._pos)
        byte = self._data[self._pos]
        self._pos += 1
        return byte

    def _normalize(self) -> None:
        while self.range < _TOP:
            self.code = ((self.code << 8) | self._next_byte()) & _MASK32
            self.range <<= 8

    def decode_symbol(self, cdf: CdfTable) -> int:
        r = self.range >> PROB_BITS
        target = min(self.code // r, PROB_TOP - 1)
        symbol = 0
        while cdf.cdf[symbol + 1] <= target:
            symbol += 1
        start, freq = cdf.interval(symbol)
        self.code -= r * start
        self.range = r * freq
        self._normalize()
        cdf.update(symbol)
        return symbol

    def decode_bits(self, nbits: int) -> int:
        value = 0
        for _ in range(nbits):
            self.range >>= 1
            bit = 0
            if self.code >= self.range:
                self.code -= self.range
                bit = 1
            value = (value << 1) | bit
            self._normalize()
        return value

    @property
    def position(self) -> int:
        return self._pos
