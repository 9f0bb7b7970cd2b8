import math
from collections import Counter

import numpy as np
import pytest

from codec.range_coder import (
    PROB_TOP,
    RATE_SCALE,
    CdfTable,
    RangeDecoder,
    RangeEncoder,
    RateEstimator,
    estimate_rate_bits,
)
from exceptions import SymbolOutOfRange, TruncatedStream, ValidationError


def _encode(symbols, size, with_bits=False):
    """Code a stream; returns payload and the estimated rate along the same CDF trajectory."""
    encoder = RangeEncoder()
    cdf = CdfTable(size)
    estimate = 0
    for symbol in symbols:
        estimate += estimate_rate_bits(cdf, int(symbol))
        encoder.encode_symbol(cdf, int(symbol))
        if with_bits:
            encoder.encode_bits(int(symbol) & 5, 3)
            estimate += 3 * RATE_SCALE
    return encoder.finish(), estimate / RATE_SCALE


def _decode(payload, count, size, with_bits=False):
    decoder = RangeDecoder(payload)
    cdf = CdfTable(size)
    out = []
    for _ in range(count):
        symbol = decoder.decode_symbol(cdf)
        if with_bits:
            assert decoder.decode_bits(3) == symbol & 5
        out.append(symbol)
    return out


def _skewed(rng, count):
    """Symbol 0 with probability 0.9, the other 15 uniformly."""
    symbols = rng.integers(1, 16, size=count)
    symbols[rng.random(count) < 0.9] = 0
    return symbols


def _entropy_bits(symbols):
    counts = Counter(int(s) for s in symbols)
    n = len(symbols)
    return -sum(c * math.log2(c / n) for c in counts.values())


def test_uniform_source_costs_four_bits_per_symbol(rng):
    symbols = rng.integers(0, 16, size=1000)
    payload, _ = _encode(symbols, 16)
    assert 3990 <= 8 * len(payload) <= 4100
    assert _decode(payload, 1000, 16) == symbols.tolist()


@pytest.mark.parametrize("make", [
    lambda rng: rng.integers(0, 16, size=3000),
    lambda rng: np.zeros(3000, dtype=int),
    lambda rng: np.full(3000, 15),
    lambda rng: np.tile([0, 15], 1500),
    lambda rng: np.repeat(np.arange(16), 200),
])
def test_roundtrip(rng, make):
    symbols = make(rng)
    payload, _ = _encode(symbols, 16, with_bits=True)
    assert _decode(payload, len(symbols), 16, with_bits=True) == symbols.tolist()


def test_binary_and_small_alphabets(rng):
    for size in (2, 3, 8):
        symbols = rng.integers(0, size, size=500)
        payload, _ = _encode(symbols, size)
        assert _decode(payload, 500, size) == symbols.tolist()


def test_skewed_source_approaches_entropy(rng):
    symbols = _skewed(rng, 20_000)
    payload, estimate = _encode(symbols, 16)
    measured = 8 * len(payload)
    assert measured <= 1.03 * _entropy_bits(symbols)
    assert abs(measured - estimate) <= 0.01 * estimate + 32
    assert _decode(payload, len(symbols), 16) == symbols.tolist()


@pytest.mark.slow
def test_long_streams_roundtrip_and_match_estimates(rng):
    for symbols in (rng.integers(0, 16, size=100_000), _skewed(rng, 100_000)):
        payload, estimate = _encode(symbols, 16)
        assert abs(8 * len(payload) - estimate) <= 0.01 * estimate + 32
        assert _decode(payload, len(symbols), 16) == symbols.tolist()
    uniform, _ = _encode(rng.integers(0, 16, size=10_000), 16)
    assert 3.99 <= 8 * len(uniform) / 10_000 <= 4.10


def test_estimate_rate_bits_examples():
    assert estimate_rate_bits(CdfTable(16), 3) == 4 * RATE_SCALE
    assert estimate_rate_bits(CdfTable(2), 1) == RATE_SCALE

    cdf = CdfTable.from_cdf([0, 1000, 30000, PROB_TOP])
    for symbol in range(3):
        exact = -math.log2(cdf.probability(symbol))
        assert abs(estimate_rate_bits(cdf, symbol) / RATE_SCALE - exact) <= 1 / 256


def test_estimate_is_monotone_in_probability():
    cdf = CdfTable.from_cdf([0, 100, 1100, 11100, PROB_TOP])
    rates = [estimate_rate_bits(cdf, s) for s in range(4)]
    assert rates == sorted(rates, reverse=True)


def test_symbol_out_of_range():
    with pytest.raises(SymbolOutOfRange):
        estimate_rate_bits(CdfTable(4), 4)
    with pytest.raises(SymbolOutOfRange):
        RangeEncoder().encode_symbol(CdfTable(4), -1)


def test_cdf_stays_valid_under_updates(rng):
    cdf = CdfTable(16)
    for symbol in np.concatenate([np.zeros(5000, dtype=int), rng.integers(0, 16, size=5000)]):
        cdf.update(int(symbol))
        assert cdf.cdf[0] == 0 and cdf.cdf[-1] == PROB_TOP
        assert all(b > a for a, b in zip(cdf.cdf, cdf.cdf[1:]))
    assert sum(cdf.counts) <= 1 << 16


def test_fixed_tables_do_not_adapt():
    cdf = CdfTable.from_cdf([0, 16384, PROB_TOP])
    cdf.update(0)
    assert cdf.cdf == [0, 16384, PROB_TOP]
    with pytest.raises(ValidationError):
        CdfTable.from_cdf([0, 100, 100, PROB_TOP])
    with pytest.raises(ValidationError):
        CdfTable(17)


def test_estimator_leaves_contexts_alone():
    cdf = CdfTable(8)
    before = list(cdf.cdf)
    estimator = RateEstimator()
    for symbol in range(8):
        estimator.encode_symbol(cdf, symbol)
    estimator.encode_bits(5, 3)
    assert cdf.cdf == before
    assert estimator.bits == 8 * 3 + 3

    adaptive = RateEstimator(adapt=True)
    adaptive.encode_symbol(cdf, 0)
    assert cdf.cdf != before


def test_copy_is_independent():
    cdf = CdfTable(4)
    clone = cdf.copy()
    clone.update(2)
    assert cdf.cdf != clone.cdf


def test_truncated_stream(rng):
    payload, _ = _encode(rng.integers(0, 16, size=200), 16)
    with pytest.raises(TruncatedStream):
        _decode(payload[: len(payload) // 2], 200, 16)
    with pytest.raises(TruncatedStream):
        RangeDecoder(b"\x00\x01")


def test_empty_stream_finishes_to_four_bytes():
    assert len(RangeEncoder().finish()) == 4
