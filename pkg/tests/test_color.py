import numpy as np
import pytest

from exceptions import DimensionMismatch, SampleOutOfRange, ValidationError
from media.color import (
    chroma_downsample,
    chroma_upsample,
    rgb_planes_from_frame,
    rgb_to_ycbcr,
    to_depth,
    ycbcr_to_rgb,
)
from models.frame import BitDepth, ChromaFormat, Frame, Plane


def _pixel(r, g, b):
    frame = rgb_to_ycbcr(*(np.array([[v]], dtype=np.uint8) for v in (r, g, b)))
    return int(frame.y.array[0, 0]), int(frame.cb.array[0, 0]), int(frame.cr.array[0, 0])


@pytest.mark.parametrize("rgb, ycc", [
    ((0, 0, 0), (0, 128, 128)),
    ((255, 255, 255), (255, 128, 128)),
    ((128, 128, 128), (128, 128, 128)),
])
def test_rgb_to_ycbcr_examples(rgb, ycc):
    assert _pixel(*rgb) == ycc


def test_achromatic_inputs_have_neutral_chroma():
    values = np.arange(256, dtype=np.uint8).reshape(16, 16)
    frame = rgb_to_ycbcr(values, values, values)
    assert np.array_equal(frame.y.array, values)
    assert np.all(frame.cb.array == 128) and np.all(frame.cr.array == 128)


def test_rgb_to_ycbcr_shape_mismatch():
    with pytest.raises(DimensionMismatch):
        rgb_to_ycbcr(np.zeros((2, 2)), np.zeros((2, 3)), np.zeros((2, 2)))


def _frame444(cb, cr=None):
    cb = np.asarray(cb, dtype=np.uint16)
    cr = cb if cr is None else np.asarray(cr, dtype=np.uint16)
    return Frame.from_arrays(np.zeros_like(cb), cb, cr, ChromaFormat.YUV444)


def test_downsample_constant_plane():
    frame = chroma_downsample(_frame444(np.full((6, 6), 77)), ChromaFormat.YUV420)
    assert frame.cb.shape == (3, 3)
    assert np.all(frame.cb.array == 77)


def test_downsample_rounds_to_nearest():
    frame = chroma_downsample(_frame444([[10, 12], [14, 16]]), ChromaFormat.YUV420)
    assert frame.cb.array.tolist() == [[13]]


def test_downsample_to_444_is_identity():
    source = _frame444([[1, 2], [3, 4]], [[5, 6], [7, 8]])
    assert chroma_downsample(source, ChromaFormat.YUV444).equals(source)


@pytest.mark.parametrize("fmt, shape", [
    (ChromaFormat.YUV420, (2, 3)),
    (ChromaFormat.YUV422, (3, 3)),
    (ChromaFormat.YUV440, (2, 5)),
])
def test_downsample_odd_dimensions(fmt, shape):
    frame = chroma_downsample(_frame444(np.full((3, 5), 9)), fmt)
    assert frame.cb.shape == shape
    assert np.all(frame.cb.array == 9)


def test_downsample_requires_444_source(small_frame):
    with pytest.raises(ValidationError):
        chroma_downsample(small_frame, ChromaFormat.YUV420)


def test_upsample_replicates(small_frame):
    full = chroma_upsample(small_frame)
    assert full.cb.shape == small_frame.y.shape
    assert full.cb.array[1, 1] == small_frame.cb.array[0, 0]
    assert full.cr.array[3, 2] == small_frame.cr.array[1, 1]


def test_rgb_roundtrip_is_close(rng):
    r, g, b = (rng.integers(30, 220, size=(8, 8)).astype(np.uint8) for _ in range(3))
    rgb = ycbcr_to_rgb(rgb_to_ycbcr(r, g, b))
    assert rgb.shape == (8, 8, 3)
    assert np.max(np.abs(rgb * 255 - np.stack([r, g, b], axis=-1))) < 2.0

    rr, gg, bb = rgb_planes_from_frame(rgb_to_ycbcr(r, g, b))
    assert np.max(np.abs(rr.astype(int) - r)) <= 2


def test_to_depth_shifts_samples(small_frame):
    deep = to_depth(small_frame, BitDepth.TEN)
    assert deep.depth == BitDepth.TEN
    assert np.array_equal(deep.cb.array, small_frame.cb.array.astype(np.uint16) << 2)
    with pytest.raises(ValidationError):
        to_depth(deep, BitDepth.EIGHT)


def test_frame_geometry_invariant():
    with pytest.raises(DimensionMismatch):
        Frame.from_arrays(np.zeros((4, 4)), np.zeros((2, 3)), np.zeros((2, 2)), ChromaFormat.YUV420)


def test_samples_above_depth_are_rejected():
    with pytest.raises(SampleOutOfRange):
        Frame.from_arrays(np.full((2, 2), 300), np.zeros((2, 2)), np.zeros((2, 2)), ChromaFormat.YUV444)


def test_plane_with_stride():
    samples = np.arange(12, dtype=np.uint16)
    plane = Plane(width=3, height=3, stride=4, samples=samples)
    assert plane.array.tolist() == [[0, 1, 2], [4, 5, 6], [8, 9, 10]]
    with pytest.raises(ValidationError):
        Plane(width=5, height=3, stride=4, samples=samples)
