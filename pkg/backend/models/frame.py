"""YCbCr sample containers with chroma geometry."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Tuple

import numpy as np

from exceptions import DimensionMismatch, SampleOutOfRange, ValidationError


class BitDepth(IntEnum):
    """Supported sample precisions."""
    EIGHT = 8
    TEN = 10
    TWELVE = 12

    @property
    def max_value(self) -> int:
        return (1 << int(self)) - 1

    @property
    def midpoint(self) -> int:
        return 1 << (int(self) - 1)

    @property
    def bytes_per_sample(self) -> int:
        return 1 if self == BitDepth.EIGHT else 2


class ChromaFormat(Enum):
    """Chroma subsampling steps (s_x, s_y)."""
    YUV420 = (2, 2)
    YUV422 = (2, 1)
    YUV440 = (1, 2)
    YUV444 = (1, 1)

    @property
    def s_x(self) -> int:
        return self.value[0]

    @property
    def s_y(self) -> int:
        return self.value[1]

    @property
    def area(self) -> int:
        return self.s_x * self.s_y

    @property
    def log2_area(self) -> int:
        return self.area.bit_length() - 1

    @property
    def tag(self) -> str:
        return {
            ChromaFormat.YUV420: "420",
            ChromaFormat.YUV422: "422",
            ChromaFormat.YUV440: "440",
            ChromaFormat.YUV444: "444",
        }[self]

    @classmethod
    def from_tag(cls, tag: str) -> "ChromaFormat":
        for fmt in cls:
            if fmt.tag == tag:
                return fmt
        raise ValidationError(f"unknown chroma format {tag!r}", details={"tag": tag})

    @classmethod
    def from_steps(cls, s_x: int, s_y: int) -> "ChromaFormat":
        return cls((s_x, s_y))

    def chroma_dims(self, width: int, height: int) -> Tuple[int, int]:
        """Chroma plane (width, height) for a luma plane of the given size."""
        return -(-width // self.s_x), -(-height // self.s_y)


@dataclass(frozen=True)
class Plane:
    """One sample plane stored row-major with an explicit stride."""
    width: int
    height: int
    stride: int
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.stride < self.width:
            raise ValidationError(
                "stride must be at least the plane width",
                details={"stride": self.stride, "width": self.width}
            )
        if self.samples.ndim != 1 or self.samples.size != self.stride * self.height:
            raise DimensionMismatch(self.stride * self.height, self.samples.size, "plane buffer")

    @classmethod
    def from_array(cls, array: np.ndarray) -> "Plane":
        array = np.ascontiguousarray(array, dtype=np.uint16)
        height, width = array.shape
        return cls(width=width, height=height, stride=width, samples=array.reshape(-1))

    @property
    def array(self) -> np.ndarray:
        """(height, width) view of the visible samples."""
        return self.samples.reshape(self.height, self.stride)[:, :self.width]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.height, self.width

    def check_depth(self, depth: BitDepth) -> None:
        if self.samples.size and int(self.array.max()) > depth.max_value:
            raise SampleOutOfRange(depth.max_value, int(self.array.max()))

    def equals(self, other: "Plane") -> bool:
        return self.shape == other.shape and np.array_equal(self.array, other.array)


@dataclass(frozen=True)
class Frame:
    """A YCbCr picture: three planes, their geometry and precision."""
    y: Plane
    cb: Plane
    cr: Plane
    format: ChromaFormat
    depth: BitDepth

    def __post_init__(self):
        chroma_w, chroma_h = self.format.chroma_dims(self.y.width, self.y.height)
        for plane in (self.cb, self.cr):
            if (plane.width, plane.height) != (chroma_w, chroma_h):
                raise DimensionMismatch(
                    (chroma_w, chroma_h), (plane.width, plane.height), "chroma plane"
                )

    @classmethod
    def from_arrays(
        cls,
        y: np.ndarray,
        cb: np.ndarray,
        cr: np.ndarray,
        fmt: ChromaFormat,
        depth: BitDepth = BitDepth.EIGHT,
    ) -> "Frame":
        frame = cls(
            y=Plane.from_array(y),
            cb=Plane.from_array(cb),
            cr=Plane.from_array(cr),
            format=fmt,
            depth=BitDepth(depth),
        )
        for plane in frame.planes:
            plane.check_depth(frame.depth)
        return frame

    @property
    def width(self) -> int:
        return self.y.width

    @property
    def height(self) -> int:
        return self.y.height

    @property
    def planes(self) -> Tuple[Plane, Plane, Plane]:
        return self.y, self.cb, self.cr

    def equals(self, other: "Frame") -> bool:
        """Bit-exact comparison of geometry and samples."""
        return (
            self.format == other.format
            and self.depth == other.depth
            and all(a.equals(b) for a, b in zip(self.planes, other.planes))
        )
