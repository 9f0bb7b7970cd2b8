"""Rate-distortion selection between DC and CfL chroma prediction."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, List, Optional, Tuple, Union

import numpy as np

from codec.cfl_signaling import (
    ChromaContexts,
    CflParams,
    JOINT_SIGNS,
    Sign,
    mode_flag_rate,
)
from codec.range_coder import RATE_SCALE, estimate_rate_bits
from exceptions import DimensionMismatch, ValidationError
from models.cfl_model import MAX_ALPHA_Q3, DcPrediction, Q3AcBlock, cfl_predict, round_half_away_q6
from models.frame import BitDepth

LAMBDA_MAX_DENOMINATOR = 1 << 16
ALPHAS = np.arange(-MAX_ALPHA_Q3, MAX_ALPHA_Q3 + 1)
_ZERO = MAX_ALPHA_Q3  # index of alpha 0 in ALPHAS
_SIGN_INDEX = np.where(ALPHAS < 0, int(Sign.NEG), np.where(ALPHAS > 0, int(Sign.POS), int(Sign.ZERO)))

# (plane, alpha_q3) -> (reconstruction SSE, residual rate in 1/512 bit)
ResidualEvaluator = Callable[[int, int], Tuple[int, int]]


class ChromaMode(str, Enum):
    DC = "dc"
    CFL = "cfl"


class SearchSpace(str, Enum):
    FULL = "full"
    PRUNED = "pruned"


class RateModel(str, Enum):
    PARAM_ONLY = "param-only"
    FULL = "full"


@dataclass(frozen=True)
class RdConfig:
    """Search settings; lambda is kept as an exact rational."""
    lambda_: Fraction
    search_space: SearchSpace = SearchSpace.PRUNED
    rate_model: RateModel = RateModel.PARAM_ONLY
    code_mode_flag: bool = True

    def __post_init__(self):
        value = Fraction(self.lambda_).limit_denominator(LAMBDA_MAX_DENOMINATOR)
        if value < 0:
            raise ValidationError("lambda must be non-negative", details={"lambda": float(value)})
        object.__setattr__(self, "lambda_", value)
        object.__setattr__(self, "search_space", SearchSpace(self.search_space))
        object.__setattr__(self, "rate_model", RateModel(self.rate_model))

    def scaled_cost(self, distortion, rate_units):
        """Cost times 512 * denominator(lambda): exact integer comparison key."""
        return distortion * RATE_SCALE * self.lambda_.denominator + self.lambda_.numerator * rate_units


@dataclass(frozen=True)
class RdDecision:
    mode: ChromaMode
    params: Optional[CflParams]
    distortion: int
    rate_units: int
    cost: Fraction

    @property
    def rate_bits(self) -> float:
        return self.rate_units / RATE_SCALE

    @property
    def alphas(self) -> Tuple[int, int]:
        return self.params.alphas if self.params is not None else (0, 0)

    def sort_key(self):
        """Total order used for every comparison: cost, DC first, then small alphas."""
        a_cb, a_cr = self.alphas
        return self.cost, int(self.mode == ChromaMode.CFL), abs(a_cb) + abs(a_cr), a_cb, a_cr


def sse(a: np.ndarray, b: np.ndarray) -> int:
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        raise DimensionMismatch(a.shape, b.shape)
    diff = a.astype(np.int64) - b.astype(np.int64)
    return int(np.sum(diff * diff))


def distortion_in_q3_domain(ac: Q3AcBlock, alpha_q3: int, ref_minus_dc: np.ndarray) -> int:
    """SSE of the scaled AC against (reference - DC), ignoring clipping."""
    ref_minus_dc = np.asarray(ref_minus_dc, dtype=np.int64)
    if ref_minus_dc.shape != ac.values.shape:
        raise DimensionMismatch(ac.values.shape, ref_minus_dc.shape)
    diff = round_half_away_q6(int(alpha_q3) * ac.values.astype(np.int64)) - ref_minus_dc
    return int(np.sum(diff * diff))


def plane_distortions(ac: Q3AcBlock, ref: np.ndarray, dc: DcPrediction, depth: BitDepth) -> np.ndarray:
    """Exact prediction SSE for every alpha in -16..16.

    The Q3-domain shortcut is used where no sample clips; clipping alphas are
    recomputed on materialised predictions.
    """
    ref = np.asarray(ref, dtype=np.int64)
    if ref.shape != ac.values.shape:
        raise DimensionMismatch(ac.values.shape, ref.shape)
    offsets = round_half_away_q6(ALPHAS[:, None] * ac.values.astype(np.int64).reshape(1, -1))
    diff = offsets - (ref - dc.value).reshape(1, -1)
    distortions = np.sum(diff * diff, axis=1)

    predicted = dc.value + offsets
    clipped = np.any((predicted < 0) | (predicted > BitDepth(depth).max_value), axis=1)
    for index in np.flatnonzero(clipped):
        distortions[index] = sse(cfl_predict(ac, int(ALPHAS[index]), dc, depth), ref)
    return distortions


@dataclass
class _PlaneTable:
    """Per-alpha distortion and rate terms of one chroma plane."""
    distortion: np.ndarray
    magnitude_units: np.ndarray
    residual_units: np.ndarray


def _magnitude_rates(contexts: ChromaContexts, plane: int) -> np.ndarray:
    rates = np.zeros(ALPHAS.size, dtype=np.int64)
    for index, alpha in enumerate(ALPHAS):
        if alpha != 0:
            cdf = contexts.magnitude_cdf(plane, Sign.of(int(alpha)))
            rates[index] = estimate_rate_bits(cdf, abs(int(alpha)) - 1)
    return rates


def _decision(cfg: RdConfig, a_cb: int, a_cr: int, distortion: int, rate_units: int) -> RdDecision:
    if a_cb == 0 and a_cr == 0:
        mode, params = ChromaMode.DC, None
    else:
        mode, params = ChromaMode.CFL, CflParams.from_alphas(a_cb, a_cr)
    cost = distortion + cfg.lambda_ * Fraction(rate_units, RATE_SCALE)
    return RdDecision(mode, params, int(distortion), int(rate_units), cost)


class _Search:
    """Exact argmin over the candidate grid for fixed per-plane tables."""

    def __init__(self, cfg: RdConfig, contexts: ChromaContexts, tables: List[_PlaneTable]):
        self.cfg = cfg
        self.tables = tables
        self.joint_units = np.array(
            [estimate_rate_bits(contexts.joint_sign, j) for j in range(JOINT_SIGNS)], dtype=np.int64
        )
        if cfg.code_mode_flag:
            self.flag_dc = mode_flag_rate(contexts, cfl=False)
            self.flag_cfl = mode_flag_rate(contexts, cfl=True)
        else:
            self.flag_dc = self.flag_cfl = 0

    def totals(self, a_cb: int, a_cr: int) -> Tuple[int, int]:
        """(distortion, rate units) of one candidate."""
        cb, cr = self.tables
        i, j = a_cb + _ZERO, a_cr + _ZERO
        distortion = int(cb.distortion[i] + cr.distortion[j])
        rate = int(cb.residual_units[i] + cr.residual_units[j])
        if a_cb == 0 and a_cr == 0:
            return distortion, rate + self.flag_dc
        joint = 3 * int(_SIGN_INDEX[i]) + int(_SIGN_INDEX[j]) - 1
        rate += self.flag_cfl + int(self.joint_units[joint])
        rate += int(cb.magnitude_units[i] + cr.magnitude_units[j])
        return distortion, rate

    def full(self, include_dc: bool) -> Tuple[int, int]:
        cb, cr = self.tables
        distortion = cb.distortion[:, None] + cr.distortion[None, :]
        rate = cb.residual_units[:, None] + cr.residual_units[None, :]
        rate = rate + cb.magnitude_units[:, None] + cr.magnitude_units[None, :]
        joint = 3 * _SIGN_INDEX[:, None] + _SIGN_INDEX[None, :] - 1
        rate = rate + self.flag_cfl + self.joint_units[np.clip(joint, 0, None)]
        rate[_ZERO, _ZERO] = cb.residual_units[_ZERO] + cr.residual_units[_ZERO] + self.flag_dc

        cost = self.cfg.scaled_cost(distortion.astype(object), rate.astype(object))
        a_cb, a_cr = np.meshgrid(ALPHAS, ALPHAS, indexing="ij")
        keys = [
            (cost[i, j], int(i != _ZERO or j != _ZERO), abs(int(a_cb[i, j])) + abs(int(a_cr[i, j])),
             int(a_cb[i, j]), int(a_cr[i, j]))
            for i in range(ALPHAS.size) for j in range(ALPHAS.size)
            if include_dc or i != _ZERO or j != _ZERO
        ]
        best = min(keys)
        return best[3], best[4]

    def pruned(self, include_dc: bool) -> Tuple[int, int]:
        # Once the joint sign is fixed, cost separates by plane.
        best_alpha = []
        best_cost = []
        for table in self.tables:
            per_sign = {}
            for sign in Sign:
                candidates = [i for i in range(ALPHAS.size) if _SIGN_INDEX[i] == int(sign)]
                scored = [
                    (self.cfg.scaled_cost(int(table.distortion[i]),
                                          int(table.magnitude_units[i] + table.residual_units[i])),
                     abs(int(ALPHAS[i])), int(ALPHAS[i]))
                    for i in candidates
                ]
                per_sign[sign] = min(scored)
            best_cost.append({s: v[0] for s, v in per_sign.items()})
            best_alpha.append({s: v[2] for s, v in per_sign.items()})

        keys = []
        if include_dc:
            distortion, rate = self.totals(0, 0)
            keys.append((self.cfg.scaled_cost(distortion, rate), 0, 0, 0, 0))
        for joint in range(JOINT_SIGNS):
            s_cb, s_cr = Sign((joint + 1) // 3), Sign((joint + 1) % 3)
            a_cb, a_cr = best_alpha[0][s_cb], best_alpha[1][s_cr]
            cost = (best_cost[0][s_cb] + best_cost[1][s_cr]
                    + self.cfg.scaled_cost(0, self.flag_cfl + int(self.joint_units[joint])))
            keys.append((cost, 1, abs(a_cb) + abs(a_cr), a_cb, a_cr))
        best = min(keys)
        return best[3], best[4]

    def select(self, include_dc: bool = True) -> RdDecision:
        if self.cfg.search_space == SearchSpace.FULL:
            a_cb, a_cr = self.full(include_dc)
        else:
            a_cb, a_cr = self.pruned(include_dc)
        distortion, rate = self.totals(a_cb, a_cr)
        return _decision(self.cfg, a_cb, a_cr, distortion, rate)


def rd_select(
    ac_cb: Q3AcBlock,
    ac_cr: Q3AcBlock,
    ref_cb: np.ndarray,
    ref_cr: np.ndarray,
    dc_cb: DcPrediction,
    dc_cr: DcPrediction,
    cfg: RdConfig,
    rate_model: ChromaContexts,
    depth: BitDepth = BitDepth.EIGHT,
    residual: Optional[ResidualEvaluator] = None,
) -> RdDecision:
    """Minimum-cost chroma prediction for one prediction unit.

    Contexts in `rate_model` are read, never updated. Without a residual
    evaluator the rate is parameter-only. With one, the default model ranks
    CfL candidates on parameter rate and then settles DC against the best CfL
    candidate on full rate; `RateModel.FULL` ranks every candidate on full rate.
    """
    for ac, ref in ((ac_cb, ref_cb), (ac_cr, ref_cr)):
        if np.shape(ref) != ac.values.shape:
            raise DimensionMismatch(ac.values.shape, np.shape(ref))

    tables = []
    for plane, (ac, ref, dc) in enumerate(((ac_cb, ref_cb, dc_cb), (ac_cr, ref_cr, dc_cr))):
        tables.append(_PlaneTable(
            distortion=plane_distortions(ac, ref, dc, depth),
            magnitude_units=_magnitude_rates(rate_model, plane),
            residual_units=np.zeros(ALPHAS.size, dtype=np.int64),
        ))

    if cfg.rate_model == RateModel.FULL:
        if residual is None:
            raise ValidationError("full-rate ranking needs a residual evaluator")
        for plane, table in enumerate(tables):
            for index, alpha in enumerate(ALPHAS):
                table.distortion[index], table.residual_units[index] = residual(plane, int(alpha))
        return _Search(cfg, rate_model, tables).select()

    search = _Search(cfg, rate_model, tables)
    if residual is None:
        return search.select()

    # Parameter-rate ranking of CfL, then a full-rate DC-versus-CfL decision.
    best_cfl = search.select(include_dc=False)
    full_tables = [
        _PlaneTable(t.distortion.copy(), t.magnitude_units, t.residual_units.copy()) for t in tables
    ]
    finalists = {(0, 0), best_cfl.alphas}
    for plane, table in enumerate(full_tables):
        for alpha in {a[plane] for a in finalists}:
            table.distortion[alpha + _ZERO], table.residual_units[alpha + _ZERO] = residual(plane, alpha)
    full_search = _Search(cfg, rate_model, full_tables)
    decisions = [_decision(cfg, a_cb, a_cr, *full_search.totals(a_cb, a_cr)) for a_cb, a_cr in finalists]
    return min(decisions, key=RdDecision.sort_key)


def make_rd_config(
    lambda_value: Union[float, Fraction],
    search_space: Union[str, SearchSpace] = SearchSpace.PRUNED,
    rate_model: Union[str, RateModel] = RateModel.PARAM_ONLY,
    code_mode_flag: bool = True,
) -> RdConfig:
    return RdConfig(Fraction(lambda_value), SearchSpace(search_space), RateModel(rate_model), code_mode_flag)
