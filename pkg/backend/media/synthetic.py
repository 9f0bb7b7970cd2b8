"""Deterministic synthetic test content.

Kodak-class photographs are not redistributable with the repo, so sweeps and
tests can fall back to generated images with similar statistics: muted,
slowly varying chroma, hard-edged objects and achromatic grain.
"""

from __future__ import annotations

from typing import Tuple

import numpy as np

from media.color import chroma_downsample, rgb_to_ycbcr
from models.frame import ChromaFormat, Frame


def _smooth_field(
    rng: np.random.Generator, height: int, width: int, terms: int = 4, max_freq: float = 2.0
) -> np.ndarray:
    """Sum of a few low-frequency cosines, scaled to roughly [-1, 1]."""
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    field = np.zeros((height, width))
    for _ in range(terms):
        fx, fy = rng.uniform(0.2, max_freq, size=2)
        phase = rng.uniform(0, 2 * np.pi)
        field += np.cos(2 * np.pi * (fx * xx / width + fy * yy / height) + phase)
    return field / terms


def _texture(rng: np.random.Generator, height: int, width: int, amplitude: float) -> np.ndarray:
    """Mildly correlated noise: white noise averaged with its shifted copies."""
    noise = rng.normal(0.0, 1.0, size=(height + 1, width + 1))
    smooth = (noise[:-1, :-1] + noise[1:, :-1] + noise[:-1, 1:] + noise[1:, 1:]) / 2.0
    return smooth * amplitude


def natural_image(
    seed: int,
    width: int = 128,
    height: int = 128,
    fmt: ChromaFormat = ChromaFormat.YUV420,
) -> Frame:
    """Photograph-like RGB content converted to YCbCr at the requested geometry.

    Colour comes from surface albedo times a shared illumination field, so
    chroma stays smooth and low-energy away from object boundaries while
    shading and surface detail move luma and chroma together.
    """
    rng = np.random.default_rng(seed)
    illumination = 1.0 + 0.15 * _smooth_field(rng, height, width, max_freq=0.8)

    # Muted background colour: halfway between a random colour and its grey.
    base = rng.uniform(60, 190, size=3)
    base = 0.5 * (base + base.mean())
    rgb = base[None, None, :] * illumination[..., None]

    # Hard-edged objects: luma and chroma edges coincide, as in real scenes.
    yy, xx = np.mgrid[0:height, 0:width]
    for _ in range(int(rng.integers(1, 4))):
        colour = rng.uniform(30, 180, size=3)
        cx, cy = rng.uniform(0, width), rng.uniform(0, height)
        if rng.random() < 0.5:
            radius = rng.uniform(0.08, 0.18) * min(width, height)
            mask = (xx - cx) ** 2 + (yy - cy) ** 2 <= radius ** 2
        else:
            half_w = rng.uniform(0.05, 0.14) * width
            half_h = rng.uniform(0.05, 0.14) * height
            mask = (np.abs(xx - cx) <= half_w) & (np.abs(yy - cy) <= half_h)
        shading = (
            1.0
            + 0.2 * _smooth_field(rng, height, width, terms=2)
            + _texture(rng, height, width, amplitude=0.05)
        )
        rgb[mask] = colour[None, :] * (shading * illumination)[mask][:, None]

    # Sensor-like grain is achromatic.
    texture = _texture(rng, height, width, amplitude=4.0)
    rgb += texture[..., None]
    rgb = np.clip(np.floor(rgb + 0.5), 0, 255).astype(np.uint8)

    frame = rgb_to_ycbcr(rgb[..., 0], rgb[..., 1], rgb[..., 2])
    return chroma_downsample(frame, fmt)


def affine_chroma_image(
    seed: int,
    width: int = 128,
    height: int = 128,
    block: int = 8,
    fmt: ChromaFormat = ChromaFormat.YUV420,
) -> Frame:
    """Textured luma whose chroma is an exact per-block affine map of it.

    Each chroma block of `block`x`block` samples uses its own slope per plane,
    applied to the co-located luma average around a shared offset.
    """
    rng = np.random.default_rng(seed)
    luma = 128.0 + 50.0 * _smooth_field(rng, height, width) + _texture(rng, height, width, 18.0)
    luma = np.clip(np.floor(luma + 0.5), 16, 239)

    chroma_w, chroma_h = fmt.chroma_dims(width, height)
    padded = np.pad(
        luma, ((0, chroma_h * fmt.s_y - height), (0, chroma_w * fmt.s_x - width)), mode="edge"
    )
    luma_avg = padded.reshape(chroma_h, fmt.s_y, chroma_w, fmt.s_x).mean(axis=(1, 3))

    blocks_y = -(-chroma_h // block)
    blocks_x = -(-chroma_w // block)
    slopes = np.array([-1.5, -1.0, -0.5, 0.5, 1.0, 1.5])

    def plane(offset: float) -> np.ndarray:
        alpha = rng.choice(slopes, size=(blocks_y, blocks_x))
        alpha_map = np.repeat(np.repeat(alpha, block, axis=0), block, axis=1)[:chroma_h, :chroma_w]
        values = offset + alpha_map * (luma_avg - 128.0)
        return np.clip(np.floor(values + 0.5), 0, 255)

    cb = plane(128.0 + rng.uniform(-20, 20))
    cr = plane(128.0 + rng.uniform(-20, 20))
    return Frame.from_arrays(luma.astype(np.uint16), cb.astype(np.uint16), cr.astype(np.uint16), fmt)


def corpus_dims(index: int) -> Tuple[int, int]:
    """Image size for the i-th synthetic corpus member (kept small and varied)."""
    return (128, 96) if index % 2 else (96, 128)
