"""Signalling of CfL parameters: joint sign symbol then per-plane magnitudes."""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Iterator, List, Tuple

from codec.range_coder import CdfTable, RangeDecoder, RateEstimator, SymbolWriter, estimate_rate_bits
from exceptions import InvalidParams
from models.fitting import MAX_MAGNITUDE


class Sign(IntEnum):
    """Per-plane sign codes of the joint sign symbol."""
    ZERO = 0
    NEG = 1
    POS = 2

    @classmethod
    def of(cls, alpha_q3: int) -> "Sign":
        if alpha_q3 == 0:
            return cls.ZERO
        return cls.POS if alpha_q3 > 0 else cls.NEG

    @property
    def factor(self) -> int:
        return {Sign.ZERO: 0, Sign.NEG: -1, Sign.POS: 1}[self]


JOINT_SIGNS = 8


def joint_sign_of(sign_cb: Sign, sign_cr: Sign) -> int:
    """Index 0..7 of a sign pair; (ZERO, ZERO) has no index."""
    if sign_cb == Sign.ZERO and sign_cr == Sign.ZERO:
        raise InvalidParams("joint sign (zero, zero) is DC prediction, not CfL")
    return 3 * int(sign_cb) + int(sign_cr) - 1


def signs_of_joint(joint_sign: int) -> Tuple[Sign, Sign]:
    if not 0 <= joint_sign < JOINT_SIGNS:
        raise InvalidParams(f"joint sign {joint_sign} outside 0..7", details={"joint_sign": joint_sign})
    return Sign((joint_sign + 1) // 3), Sign((joint_sign + 1) % 3)


@dataclass(frozen=True)
class CflParams:
    """Coded CfL parameters for one prediction unit."""
    sign_cb: Sign
    sign_cr: Sign
    mag_cb: int = 0
    mag_cr: int = 0

    def __post_init__(self):
        if self.sign_cb == Sign.ZERO and self.sign_cr == Sign.ZERO:
            raise InvalidParams("CfL parameters need at least one non-zero alpha")
        for name, sign, mag in (("cb", self.sign_cb, self.mag_cb), ("cr", self.sign_cr, self.mag_cr)):
            if not 0 <= mag < MAX_MAGNITUDE:
                raise InvalidParams(f"{name} magnitude {mag} outside 0..15", details={"plane": name, "mag": mag})
            if sign == Sign.ZERO and mag != 0:
                raise InvalidParams(f"{name} magnitude given for a zero sign", details={"plane": name})

    @classmethod
    def from_alphas(cls, alpha_cb_q3: int, alpha_cr_q3: int) -> "CflParams":
        for alpha in (alpha_cb_q3, alpha_cr_q3):
            if not -MAX_MAGNITUDE <= alpha <= MAX_MAGNITUDE:
                raise InvalidParams(f"alpha_q3 {alpha} outside [-16, 16]", details={"alpha_q3": alpha})
        return cls(
            sign_cb=Sign.of(alpha_cb_q3),
            sign_cr=Sign.of(alpha_cr_q3),
            mag_cb=max(abs(alpha_cb_q3) - 1, 0),
            mag_cr=max(abs(alpha_cr_q3) - 1, 0),
        )

    @property
    def joint_sign(self) -> int:
        return joint_sign_of(self.sign_cb, self.sign_cr)

    @property
    def alpha_cb_q3(self) -> int:
        return self.sign_cb.factor * (self.mag_cb + 1)

    @property
    def alpha_cr_q3(self) -> int:
        return self.sign_cr.factor * (self.mag_cr + 1)

    @property
    def alphas(self) -> Tuple[int, int]:
        return self.alpha_cb_q3, self.alpha_cr_q3


def all_cfl_params() -> Iterator[CflParams]:
    """Every signallable parameter set (1088 of them)."""
    for joint in range(JOINT_SIGNS):
        sign_cb, sign_cr = signs_of_joint(joint)
        mags_cb = range(MAX_MAGNITUDE) if sign_cb != Sign.ZERO else (0,)
        mags_cr = range(MAX_MAGNITUDE) if sign_cr != Sign.ZERO else (0,)
        for mag_cb in mags_cb:
            for mag_cr in mags_cr:
                yield CflParams(sign_cb, sign_cr, mag_cb, mag_cr)


class ChromaContexts:
    """CDFs for the chroma mode flag and CfL parameters.

    Magnitudes use one CDF per plane per non-zero sign.
    """

    def __init__(self):
        self.mode_flag = CdfTable(2)
        self.joint_sign = CdfTable(JOINT_SIGNS)
        self.magnitude: List[List[CdfTable]] = [
            [CdfTable(MAX_MAGNITUDE) for _ in (Sign.NEG, Sign.POS)] for _ in ("cb", "cr")
        ]

    def magnitude_cdf(self, plane: int, sign: Sign) -> CdfTable:
        return self.magnitude[plane][int(sign) - 1]

    def copy(self) -> "ChromaContexts":
        clone = ChromaContexts.__new__(ChromaContexts)
        clone.mode_flag = self.mode_flag.copy()
        clone.joint_sign = self.joint_sign.copy()
        clone.magnitude = [[cdf.copy() for cdf in plane] for plane in self.magnitude]
        return clone


def code_cfl_params(writer: SymbolWriter, params: CflParams, contexts: ChromaContexts) -> None:
    """Joint sign, then the magnitude of each plane whose sign is non-zero."""
    writer.encode_symbol(contexts.joint_sign, params.joint_sign)
    if params.sign_cb != Sign.ZERO:
        writer.encode_symbol(contexts.magnitude_cdf(0, params.sign_cb), params.mag_cb)
    if params.sign_cr != Sign.ZERO:
        writer.encode_symbol(contexts.magnitude_cdf(1, params.sign_cr), params.mag_cr)


def decode_cfl_params(decoder: RangeDecoder, contexts: ChromaContexts) -> CflParams:
    sign_cb, sign_cr = signs_of_joint(decoder.decode_symbol(contexts.joint_sign))
    mag_cb = decoder.decode_symbol(contexts.magnitude_cdf(0, sign_cb)) if sign_cb != Sign.ZERO else 0
    mag_cr = decoder.decode_symbol(contexts.magnitude_cdf(1, sign_cr)) if sign_cr != Sign.ZERO else 0
    return CflParams(sign_cb, sign_cr, mag_cb, mag_cr)


def cfl_params_rate(params: CflParams, contexts: ChromaContexts) -> int:
    """Parameter cost in 1/512 bit under the current (unchanged) contexts."""
    estimator = RateEstimator()
    code_cfl_params(estimator, params, contexts)
    return estimator.units


def mode_flag_rate(contexts: ChromaContexts, cfl: bool) -> int:
    return estimate_rate_bits(contexts.mode_flag, int(cfl))
