from fractions import Fraction

import numpy as np
import pytest

from codec.cfl_signaling import ChromaContexts, all_cfl_params, cfl_params_rate, code_cfl_params, mode_flag_rate
from codec.range_coder import RATE_SCALE, RateEstimator
from codec.rd_search import (
    ALPHAS,
    ChromaMode,
    RateModel,
    RdConfig,
    SearchSpace,
    distortion_in_q3_domain,
    make_rd_config,
    plane_distortions,
    rd_select,
    sse,
)
from exceptions import DimensionMismatch, ValidationError
from models.cfl_model import DcPrediction, NeighborAvailability, cfl_predict, luma_to_q3_ac
from models.fitting import fit_ls_zero_mean, quantize_alpha
from models.frame import BitDepth, ChromaFormat

PARAMS = list(all_cfl_params())


def _adapted_contexts(rng, updates=40):
    contexts = ChromaContexts()
    estimator = RateEstimator(adapt=True)
    for index in rng.integers(0, len(PARAMS), size=updates):
        estimator.encode_symbol(contexts.mode_flag, int(rng.integers(0, 2)))
        code_cfl_params(estimator, PARAMS[index], contexts)
    return contexts


def _plane(rng, size, fmt, clip=False):
    luma = rng.integers(0, 256, size=(size * fmt.s_y, size * fmt.s_x))
    ac = luma_to_q3_ac(luma, fmt, size, size)
    dc_value = int(rng.choice([3, 252])) if clip else int(rng.integers(40, 216))
    dc = DcPrediction(dc_value, NeighborAvailability.BOTH)
    slope = int(rng.integers(-16, 17))
    ref = cfl_predict(ac, slope, dc, BitDepth.EIGHT) + rng.integers(-6, 7, size=ac.values.shape)
    return ac, np.clip(ref, 0, 255), dc


def _case(rng):
    size = int(rng.choice([1, 2, 4, 8]))
    fmt = list(ChromaFormat)[rng.integers(4)]
    clip = rng.random() < 0.3
    ac_cb, ref_cb, dc_cb = _plane(rng, size, fmt, clip)
    ac_cr, ref_cr, dc_cr = _plane(rng, size, fmt, clip)
    return ac_cb, ac_cr, ref_cb, ref_cr, dc_cb, dc_cr, _adapted_contexts(rng)


def _brute_force(ac_cb, ac_cr, ref_cb, ref_cr, dc_cb, dc_cr, contexts, lambda_):
    """Minimum over DC and every signallable parameter set, materialising each prediction."""
    d_cb = {a: sse(cfl_predict(ac_cb, a, dc_cb, BitDepth.EIGHT), ref_cb) for a in range(-16, 17)}
    d_cr = {a: sse(cfl_predict(ac_cr, a, dc_cr, BitDepth.EIGHT), ref_cr) for a in range(-16, 17)}
    flag_dc, flag_cfl = mode_flag_rate(contexts, False), mode_flag_rate(contexts, True)

    keys = [(d_cb[0] + d_cr[0] + lambda_ * Fraction(flag_dc, RATE_SCALE), 0, 0, 0, 0)]
    for params in PARAMS:
        a_cb, a_cr = params.alphas
        rate = flag_cfl + cfl_params_rate(params, contexts)
        cost = d_cb[a_cb] + d_cr[a_cr] + lambda_ * Fraction(rate, RATE_SCALE)
        keys.append((cost, 1, abs(a_cb) + abs(a_cr), a_cb, a_cr))
    return min(keys)


def _brute_force_run(rng, cases):
    for _ in range(cases):
        case = _case(rng)
        contexts = case[-1]
        for lambda_ in (0, 10, 100):
            best = _brute_force(*case, lambda_=Fraction(lambda_))
            for space in SearchSpace:
                decision = rd_select(*case[:6], RdConfig(Fraction(lambda_), search_space=space), contexts)
                assert decision.cost == best[0]
                assert decision.alphas == (best[3], best[4])
                assert decision.mode == (ChromaMode.CFL if best[1] else ChromaMode.DC)


def test_rd_select_matches_brute_force(rng):
    _brute_force_run(rng, 12)


@pytest.mark.slow
def test_rd_select_matches_brute_force_500_cases(rng):
    _brute_force_run(rng, 500)


def test_search_does_not_touch_contexts(rng):
    case = _case(rng)
    contexts = case[-1]
    before = contexts.copy()
    rd_select(*case[:6], RdConfig(Fraction(5)), contexts)
    assert contexts.joint_sign.cdf == before.joint_sign.cdf
    assert contexts.mode_flag.cdf == before.mode_flag.cdf
    assert all(
        a.cdf == b.cdf for plane_a, plane_b in zip(contexts.magnitude, before.magnitude)
        for a, b in zip(plane_a, plane_b)
    )


def test_rate_never_grows_with_lambda(rng):
    for _ in range(10):
        case = _case(rng)
        rates = [
            rd_select(*case[:6], RdConfig(Fraction(lambda_)), case[-1]).rate_units
            for lambda_ in (0, 1, 5, 10, 50, 100, 1000, 100_000)
        ]
        assert rates == sorted(rates, reverse=True)


def test_huge_lambda_selects_dc(rng):
    case = _case(rng)
    decision = rd_select(*case[:6], RdConfig(Fraction(10 ** 9)), case[-1])
    assert decision.mode == ChromaMode.DC
    assert decision.params is None


def test_exact_linear_chroma_recovers_alpha():
    luma = np.tile([[20, 120], [120, 20]], (2, 2))
    ac = luma_to_q3_ac(luma, ChromaFormat.YUV444, 4, 4)
    assert set(np.abs(ac.values).ravel().tolist()) == {400}
    dc = DcPrediction(128, NeighborAvailability.BOTH)
    ref_cb = cfl_predict(ac, 8, dc, BitDepth.EIGHT)
    ref_cr = np.full((4, 4), 128)
    decision = rd_select(ac, ac, ref_cb, ref_cr, dc, dc, RdConfig(Fraction(0)), ChromaContexts())
    assert decision.mode == ChromaMode.CFL
    assert decision.alphas == (8, 0)
    assert decision.distortion == 0


def test_lambda_zero_beats_quantized_least_squares(rng):
    for _ in range(20):
        case = _case(rng)
        ac_cb, ac_cr, ref_cb, ref_cr, dc_cb, dc_cr, contexts = case
        decision = rd_select(*case[:6], RdConfig(Fraction(0)), contexts)
        for ac, ref, dc, chosen in ((ac_cb, ref_cb, dc_cb, decision.alphas[0]),
                                    (ac_cr, ref_cr, dc_cr, decision.alphas[1])):
            fitted = quantize_alpha(fit_ls_zero_mean(ac.values, ref).alpha * 8).alpha_q3
            assert (sse(cfl_predict(ac, chosen, dc, BitDepth.EIGHT), ref)
                    <= sse(cfl_predict(ac, fitted, dc, BitDepth.EIGHT), ref))


def test_sse_examples(rng):
    block = rng.integers(0, 256, size=(4, 4))
    assert sse(block, block) == 0
    assert sse(block, block + 1) == 16
    other = rng.integers(0, 256, size=(4, 4))
    assert sse(block, other) == sum(int(a - b) ** 2 for a, b in zip(block.flat, other.flat))
    with pytest.raises(DimensionMismatch):
        sse(block, other[:2])


def test_q3_domain_distortion_matches_materialised_path(rng):
    luma = rng.integers(100, 141, size=(8, 8))
    ac = luma_to_q3_ac(luma, ChromaFormat.YUV444, 8, 8)
    dc = DcPrediction(128, NeighborAvailability.BOTH)
    ref = rng.integers(90, 170, size=(8, 8))
    for alpha in range(-16, 17):
        expected = sse(cfl_predict(ac, alpha, dc, BitDepth.EIGHT), ref)
        assert distortion_in_q3_domain(ac, alpha, ref - dc.value) == expected
    assert distortion_in_q3_domain(ac, 0, ref - dc.value) == sse(np.full((8, 8), 128), ref)


def test_plane_distortions_are_exact_when_clipping(rng):
    luma = rng.integers(0, 256, size=(8, 8))
    ac = luma_to_q3_ac(luma, ChromaFormat.YUV444, 8, 8)
    dc = DcPrediction(250, NeighborAvailability.BOTH)
    ref = rng.integers(200, 256, size=(8, 8))
    table = plane_distortions(ac, ref, dc, BitDepth.EIGHT)
    for index, alpha in enumerate(ALPHAS):
        assert table[index] == sse(cfl_predict(ac, int(alpha), dc, BitDepth.EIGHT), ref)


def _fake_residual(plane, alpha):
    target = 5 if plane == 0 else -3
    return 100 * abs(alpha - target), RATE_SCALE * abs(alpha)


def test_full_rate_model_ranks_on_evaluator():
    ac = luma_to_q3_ac(np.arange(16).reshape(4, 4), ChromaFormat.YUV444, 4, 4)
    dc = DcPrediction(128, NeighborAvailability.BOTH)
    ref = np.full((4, 4), 128)
    cfg = RdConfig(Fraction(0), rate_model=RateModel.FULL)
    decision = rd_select(ac, ac, ref, ref, dc, dc, cfg, ChromaContexts(), residual=_fake_residual)
    assert decision.alphas == (5, -3)
    assert decision.distortion == 0

    with pytest.raises(ValidationError):
        rd_select(ac, ac, ref, ref, dc, dc, cfg, ChromaContexts())


def test_finalist_comparison_agrees_without_residual_cost(rng):
    case = _case(rng)
    ac_cb, ac_cr, ref_cb, ref_cr, dc_cb, dc_cr, contexts = case
    tables = [plane_distortions(ac_cb, ref_cb, dc_cb, BitDepth.EIGHT),
              plane_distortions(ac_cr, ref_cr, dc_cr, BitDepth.EIGHT)]

    def residual(plane, alpha):
        return int(tables[plane][alpha + 16]), 0

    cfg = RdConfig(Fraction(20))
    plain = rd_select(*case[:6], cfg, contexts)
    settled = rd_select(*case[:6], cfg, contexts, residual=residual)
    assert (settled.alphas, settled.cost) == (plain.alphas, plain.cost)


def test_rd_config_validation():
    assert RdConfig(0.1).lambda_ == Fraction(1, 10)
    with pytest.raises(ValidationError):
        RdConfig(Fraction(-1))
    cfg = make_rd_config(2.5, "full", "full", code_mode_flag=False)
    assert (cfg.search_space, cfg.rate_model, cfg.code_mode_flag) == (SearchSpace.FULL, RateModel.FULL, False)
