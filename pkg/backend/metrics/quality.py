"""Objective quality metrics: PSNR and CIEDE2000."""

from __future__ import annotations

import math
from typing import Union

import numpy as np

from exceptions import DimensionMismatch
from media.color import ycbcr_to_rgb
from models.frame import BitDepth, Frame, Plane

PSNR_CAP = 100.0
SCORE_CAP = 100.0

# sRGB primaries, D65 white.
_RGB_TO_XYZ = np.array([
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
])
_D65_WHITE = np.array([0.95047, 1.0, 1.08883])
_LAB_EPSILON = (6.0 / 29.0) ** 3
_POW25_7 = 25.0 ** 7

PlaneLike = Union[Plane, np.ndarray]


def _samples(plane: PlaneLike) -> np.ndarray:
    return plane.array if isinstance(plane, Plane) else np.asarray(plane)


def psnr(a: PlaneLike, b: PlaneLike, depth: BitDepth = BitDepth.EIGHT) -> float:
    """Peak signal-to-noise ratio in dB; identical planes report the 100 dB cap."""
    a, b = _samples(a), _samples(b)
    if a.shape != b.shape:
        raise DimensionMismatch(a.shape, b.shape, "plane")
    diff = a.astype(np.float64) - b.astype(np.float64)
    mse = float(np.mean(diff * diff))
    if mse == 0:
        return PSNR_CAP
    peak = float(BitDepth(depth).max_value)
    return min(PSNR_CAP, 10.0 * math.log10(peak * peak / mse))


def rgb_to_lab(rgb: np.ndarray) -> np.ndarray:
    """Float sRGB in [0, 1] (last axis RGB) to CIE 1976 L*a*b* under D65."""
    rgb = np.asarray(rgb, dtype=np.float64)
    linear = np.where(rgb <= 0.04045, rgb / 12.92, ((rgb + 0.055) / 1.055) ** 2.4)
    xyz = (linear @ _RGB_TO_XYZ.T) / _D65_WHITE
    f = np.where(xyz > _LAB_EPSILON, np.cbrt(xyz), xyz / (3 * (6.0 / 29.0) ** 2) + 4.0 / 29.0)
    lab = np.empty_like(f)
    lab[..., 0] = 116.0 * f[..., 1] - 16.0
    lab[..., 1] = 500.0 * (f[..., 0] - f[..., 1])
    lab[..., 2] = 200.0 * (f[..., 1] - f[..., 2])
    return lab


def delta_e_2000(
    lab1: np.ndarray,
    lab2: np.ndarray,
    k_l: float = 1.0,
    k_c: float = 1.0,
    k_h: float = 1.0,
) -> np.ndarray:
    """CIEDE2000 colour difference, vectorised over leading axes."""
    lab1 = np.asarray(lab1, dtype=np.float64)
    lab2 = np.asarray(lab2, dtype=np.float64)
    if lab1.shape != lab2.shape:
        raise DimensionMismatch(lab1.shape, lab2.shape, "Lab array")
    l1, a1, b1 = lab1[..., 0], lab1[..., 1], lab1[..., 2]
    l2, a2, b2 = lab2[..., 0], lab2[..., 1], lab2[..., 2]

    c_mean = (np.hypot(a1, b1) + np.hypot(a2, b2)) / 2.0
    c_mean7 = c_mean ** 7
    g = 0.5 * (1.0 - np.sqrt(c_mean7 / (c_mean7 + _POW25_7)))
    a1p, a2p = a1 * (1.0 + g), a2 * (1.0 + g)
    c1p, c2p = np.hypot(a1p, b1), np.hypot(a2p, b2)

    h1p = np.degrees(np.arctan2(b1, a1p)) % 360.0
    h2p = np.degrees(np.arctan2(b2, a2p)) % 360.0
    h1p = np.where((b1 == 0) & (a1p == 0), 0.0, h1p)
    h2p = np.where((b2 == 0) & (a2p == 0), 0.0, h2p)

    chroma_product = c1p * c2p
    dh = h2p - h1p
    dh = np.where(dh > 180.0, dh - 360.0, np.where(dh < -180.0, dh + 360.0, dh))
    dh = np.where(chroma_product == 0, 0.0, dh)

    d_l = l2 - l1
    d_c = c2p - c1p
    d_h = 2.0 * np.sqrt(chroma_product) * np.sin(np.radians(dh) / 2.0)

    l_mean = (l1 + l2) / 2.0
    cp_mean = (c1p + c2p) / 2.0
    h_sum = h1p + h2p
    h_mean = np.where(
        np.abs(h1p - h2p) <= 180.0,
        h_sum / 2.0,
        np.where(h_sum < 360.0, (h_sum + 360.0) / 2.0, (h_sum - 360.0) / 2.0),
    )
    h_mean = np.where(chroma_product == 0, h_sum, h_mean)

    t = (1.0
         - 0.17 * np.cos(np.radians(h_mean - 30.0))
         + 0.24 * np.cos(np.radians(2.0 * h_mean))
         + 0.32 * np.cos(np.radians(3.0 * h_mean + 6.0))
         - 0.20 * np.cos(np.radians(4.0 * h_mean - 63.0)))
    d_theta = 30.0 * np.exp(-(((h_mean - 275.0) / 25.0) ** 2))
    cp_mean7 = cp_mean ** 7
    r_c = 2.0 * np.sqrt(cp_mean7 / (cp_mean7 + _POW25_7))
    s_l = 1.0 + (0.015 * (l_mean - 50.0) ** 2) / np.sqrt(20.0 + (l_mean - 50.0) ** 2)
    s_c = 1.0 + 0.045 * cp_mean
    s_h = 1.0 + 0.015 * cp_mean * t
    r_t = -np.sin(np.radians(2.0 * d_theta)) * r_c

    term_l = d_l / (k_l * s_l)
    term_c = d_c / (k_c * s_c)
    term_h = d_h / (k_h * s_h)
    return np.sqrt(term_l ** 2 + term_c ** 2 + term_h ** 2 + r_t * term_c * term_h)


def frame_to_lab(frame: Frame) -> np.ndarray:
    return rgb_to_lab(ycbcr_to_rgb(frame))


def ciede2000(ref: Frame, test: Frame) -> float:
    """Mean CIEDE2000 over all pixels after chroma replication to 4:4:4."""
    if (ref.width, ref.height, ref.format) != (test.width, test.height, test.format):
        raise DimensionMismatch(
            (ref.width, ref.height, ref.format.tag), (test.width, test.height, test.format.tag), "frame"
        )
    return float(np.mean(delta_e_2000(frame_to_lab(ref), frame_to_lab(test))))


def ciede2000_score(mean_delta_e: float) -> float:
    """Higher-is-better form used on RD curves: 45 - 20*log10(dE)."""
    if mean_delta_e <= 0:
        return SCORE_CAP
    return min(SCORE_CAP, 45.0 - 20.0 * math.log10(mean_delta_e))
