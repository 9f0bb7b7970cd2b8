"""Shared fixtures: deterministic frames and run configurations."""

import numpy as np
import pytest

from media.synthetic import affine_chroma_image, natural_image
from models.frame import BitDepth, ChromaFormat, Frame
from models.schemas import RunConfig


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_frame():
    """48x40 photograph-like 4:2:0 frame."""
    return natural_image(7, width=48, height=40, fmt=ChromaFormat.YUV420)


@pytest.fixture
def affine_frame():
    return affine_chroma_image(3, width=64, height=64, block=8, fmt=ChromaFormat.YUV420)


@pytest.fixture
def constant_frame():
    y = np.full((32, 32), 90, dtype=np.uint16)
    cb = np.full((16, 16), 140, dtype=np.uint16)
    cr = np.full((16, 16), 100, dtype=np.uint16)
    return Frame.from_arrays(y, cb, cr, ChromaFormat.YUV420, BitDepth.EIGHT)


@pytest.fixture
def run_config(tmp_path):
    return RunConfig(quantizers=[20, 32, 43, 55], jobs=1, out_dir=str(tmp_path / "out"))
