import numpy as np
import pytest

from exceptions import AlphaOutOfRange, EmptyCorpus, InvalidBlockSize, OutOfBounds
from models.cfl_model import (
    DcPrediction,
    NeighborAvailability,
    Q3AcBlock,
    block_dc_errors,
    box_plot_stats,
    cfl_predict,
    dc_error_analysis,
    dc_predict,
    luma_to_q3_ac,
    q3_ac_batch,
    round_half_away_q6,
    subsample_sum,
)
from models.frame import BitDepth, ChromaFormat, Frame

FORMATS = list(ChromaFormat)
SIZES = (1, 2, 4, 8, 16, 32)
INT16_MIN, INT16_MAX = -(1 << 15), (1 << 15) - 1


def test_subsample_sum_examples():
    quad = np.array([[10, 12], [14, 16]])
    assert subsample_sum(quad, ChromaFormat.YUV420, 0, 0) == 52
    assert subsample_sum(np.array([[99]]), ChromaFormat.YUV444, 0, 0) == 99
    assert subsample_sum(np.array([[10, 12]]), ChromaFormat.YUV422, 0, 0) == 22


def test_subsample_sum_out_of_bounds():
    with pytest.raises(OutOfBounds):
        subsample_sum(np.zeros((4, 4)), ChromaFormat.YUV420, 2, 0)


def test_constant_luma_has_no_ac():
    for fmt in FORMATS:
        luma = np.full((4 * fmt.s_y, 4 * fmt.s_x), 100)
        assert not luma_to_q3_ac(luma, fmt, 4, 4).values.any()


def test_q3_worked_example():
    # One position sums to 412, the other three to 400.
    luma = np.array([[100, 104, 100, 100], [104, 104, 100, 100],
                     [100, 100, 100, 100], [100, 100, 100, 100]])
    q, ac = q3_ac_batch(luma[None], ChromaFormat.YUV420)
    assert q[0].tolist() == [[824, 800], [800, 800]]
    assert ac[0].tolist() == [[18, -6], [-6, -6]]


def test_twelve_bit_max_fits_int16():
    luma = np.full((32, 32), 4095)
    q, ac = q3_ac_batch(luma[None], ChromaFormat.YUV444)
    assert np.all(q == 32760)
    assert not ac.any()
    assert luma_to_q3_ac(luma, ChromaFormat.YUV444, 32, 32).values.dtype == np.int16


@pytest.mark.parametrize("width, height", [(3, 4), (4, 6), (64, 4), (0, 4)])
def test_invalid_block_sizes(width, height):
    with pytest.raises(InvalidBlockSize):
        luma_to_q3_ac(np.zeros((8, 8)), ChromaFormat.YUV444, width, height)


def test_luma_region_is_edge_replicated():
    region = np.array([[10, 20], [30, 40]])
    ac = luma_to_q3_ac(region, ChromaFormat.YUV444, 4, 4)
    full = luma_to_q3_ac(np.pad(region, ((0, 2), (0, 2)), mode="edge"), ChromaFormat.YUV444, 4, 4)
    assert np.array_equal(ac.values, full.values)


def _containment_run(rng, blocks_per_case):
    for depth in BitDepth:
        for fmt in FORMATS:
            for width in SIZES:
                for height in SIZES:
                    luma = rng.integers(0, depth.max_value + 1,
                                        size=(blocks_per_case, height * fmt.s_y, width * fmt.s_x))
                    # Extremes as well as noise.
                    luma[0] = depth.max_value
                    luma[1] = 0
                    luma[2, ::2] = depth.max_value
                    q, ac = q3_ac_batch(luma, fmt)
                    assert q.min() >= INT16_MIN and q.max() <= INT16_MAX
                    assert ac.min() >= INT16_MIN and ac.max() <= INT16_MAX
                    # Zero-sum up to the rounding of the average.
                    totals = ac.sum(axis=(1, 2))
                    assert np.all(np.abs(totals) <= width * height // 2)
                    divisible = q.sum(axis=(1, 2)) % (width * height) == 0
                    assert np.all(totals[divisible] == 0)


def test_q3_containment(rng):
    _containment_run(rng, 8)


@pytest.mark.slow
def test_q3_containment_million_blocks(rng):
    # 3 depths * 4 formats * 36 sizes * 2315 blocks ~ 10^6
    _containment_run(rng, 2315)


def test_dc_predict_examples():
    assert dc_predict([10, 10], [20, 20], BitDepth.EIGHT) == DcPrediction(15, NeighborAvailability.BOTH)
    assert dc_predict(None, None, BitDepth.EIGHT) == DcPrediction(128, NeighborAvailability.NONE)
    assert dc_predict([7], None, BitDepth.EIGHT) == DcPrediction(7, NeighborAvailability.ABOVE)
    assert dc_predict(None, [3, 4], BitDepth.TEN).value == 4
    assert dc_predict(None, [], BitDepth.TWELVE).value == 2048


def test_round_half_away_from_zero():
    assert round_half_away_q6(np.array([32, -32, 31, -31, 96, -96])).tolist() == [1, -1, 0, 0, 2, -2]


def test_cfl_predict_examples():
    ac = Q3AcBlock(1, 1, np.array([[16]], dtype=np.int16))
    dc = DcPrediction(100, NeighborAvailability.BOTH)
    assert cfl_predict(ac, 8, dc, BitDepth.EIGHT).tolist() == [[102]]
    assert cfl_predict(ac, -8, dc, BitDepth.EIGHT).tolist() == [[98]]
    assert cfl_predict(ac, 0, dc, BitDepth.EIGHT).tolist() == [[100]]


def test_cfl_predict_clips_and_validates():
    ac = Q3AcBlock(2, 1, np.array([[2000, -2000]], dtype=np.int16))
    dc = DcPrediction(250, NeighborAvailability.ABOVE)
    assert cfl_predict(ac, 16, dc, BitDepth.EIGHT).tolist() == [[255, 0]]
    with pytest.raises(AlphaOutOfRange):
        cfl_predict(ac, 17, dc, BitDepth.EIGHT)


def _random_case(rng):
    fmt = FORMATS[rng.integers(len(FORMATS))]
    depth = list(BitDepth)[rng.integers(3)]
    width, height = (int(s) for s in rng.choice([1, 2, 4, 8, 16, 32], size=2))
    luma = rng.integers(0, depth.max_value + 1, size=(height * fmt.s_y, width * fmt.s_x))
    dc = DcPrediction(int(rng.integers(0, depth.max_value + 1)), NeighborAvailability.BOTH)
    return luma_to_q3_ac(luma, fmt, width, height), dc, depth


def test_cfl_zero_equals_dc(rng):
    for _ in range(500):
        ac, dc, depth = _random_case(rng)
        assert np.all(cfl_predict(ac, 0, dc, depth) == dc.value)


@pytest.mark.slow
def test_cfl_zero_equals_dc_ten_thousand_blocks(rng):
    for _ in range(10_000):
        ac, dc, depth = _random_case(rng)
        assert np.all(cfl_predict(ac, 0, dc, depth) == dc.value)


def test_cfl_offsets_are_antisymmetric(rng):
    for _ in range(200):
        ac, _, depth = _random_case(rng)
        mid = DcPrediction(depth.midpoint, NeighborAvailability.NONE)
        alpha = int(rng.integers(1, 17))
        up = cfl_predict(ac, alpha, mid, depth).astype(np.int64) - mid.value
        down = cfl_predict(ac, -alpha, mid, depth).astype(np.int64) - mid.value
        unclipped = (np.abs(up) < mid.value - 1) & (np.abs(down) < mid.value - 1)
        assert np.array_equal(up[unclipped], -down[unclipped])


def _frame(cb, cr=None, depth=BitDepth.EIGHT):
    cb = np.asarray(cb)
    cr = cb if cr is None else np.asarray(cr)
    return Frame.from_arrays(np.zeros(cb.shape), cb, cr, ChromaFormat.YUV444, depth)


def test_dc_errors_zero_on_constant_chroma():
    stats = dc_error_analysis([_frame(np.full((64, 64), 77))])
    assert [s.size for s in stats] == [4, 8, 16, 32]
    # The top-left block predicts the mid-level; everything else is exact.
    assert all(s.median == 0 for s in stats)


def _brute_force_errors(plane, size, depth):
    errors = []
    rows, cols = plane.shape[0] // size, plane.shape[1] // size
    for by in range(rows):
        for bx in range(cols):
            y, x = by * size, bx * size
            above = plane[y - 1, x:x + size] if by else None
            left = plane[y:y + size, x - 1] if bx else None
            dc = dc_predict(above, left, depth).value
            errors.append((plane[y:y + size, x:x + size].mean() - dc) ** 2)
    return np.array(errors)


def test_block_dc_errors_match_brute_force(rng):
    gradient = np.tile(np.arange(0, 200, 3)[:64], (48, 1))
    noisy = rng.integers(0, 256, size=(40, 72))
    for plane in (gradient, noisy):
        for size in (4, 8, 16, 32):
            fast = block_dc_errors(plane, plane, size, BitDepth.EIGHT)
            assert np.allclose(fast, _brute_force_errors(plane, size, BitDepth.EIGHT))


def test_gradient_medians_match_brute_force():
    gradient = np.tile(np.arange(0, 192, 3), (48, 1))
    stats = dc_error_analysis([_frame(gradient)])
    for s in stats:
        errors = np.concatenate([_brute_force_errors(gradient, s.size, BitDepth.EIGHT)] * 2)
        assert s.median == pytest.approx(float(np.median(errors)))


def test_box_plot_whiskers_exclude_outliers():
    stats = box_plot_stats(4, np.array([0, 1, 1, 1, 2, 2, 2, 3, 100.0]))
    assert stats.median == 2
    assert stats.hi_whisker == 3
    assert stats.lo_whisker == 0


def test_dc_error_analysis_requires_frames():
    with pytest.raises(EmptyCorpus):
        dc_error_analysis([])
