"""YUV4MPEG2 and binary PPM stream I/O."""

from __future__ import annotations

import io
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import BinaryIO, Iterable, List, Optional, Tuple, Union

import numpy as np

from exceptions import (
    MalformedHeader,
    MissingFrameMarker,
    MissingMagic,
    TruncatedFrame,
    UnsupportedColorspace,
)
from logging_config import get_logger
from models.frame import BitDepth, ChromaFormat, Frame, Plane

logger = get_logger(__name__)

Y4M_MAGIC = b"YUV4MPEG2"
FRAME_MAGIC = b"FRAME"
PPM_MAGIC = b"P6"

# Header lines are short; anything longer is not a Y4M header.
_MAX_LINE = 4096

_COLORSPACES = {
    "420": (ChromaFormat.YUV420, BitDepth.EIGHT),
    "420jpeg": (ChromaFormat.YUV420, BitDepth.EIGHT),
    "420paldv": (ChromaFormat.YUV420, BitDepth.EIGHT),
    "420mpeg2": (ChromaFormat.YUV420, BitDepth.EIGHT),
    "420p10": (ChromaFormat.YUV420, BitDepth.TEN),
    "420p12": (ChromaFormat.YUV420, BitDepth.TWELVE),
    "422": (ChromaFormat.YUV422, BitDepth.EIGHT),
    "422p10": (ChromaFormat.YUV422, BitDepth.TEN),
    "422p12": (ChromaFormat.YUV422, BitDepth.TWELVE),
    "440": (ChromaFormat.YUV440, BitDepth.EIGHT),
    "444": (ChromaFormat.YUV444, BitDepth.EIGHT),
    "444p10": (ChromaFormat.YUV444, BitDepth.TEN),
    "444p12": (ChromaFormat.YUV444, BitDepth.TWELVE),
}

StreamSource = Union[str, Path, bytes, BinaryIO]


@dataclass(frozen=True)
class Y4MHeader:
    """Parsed stream parameters plus the raw tokens for verbatim rewriting.

    `frame_params` holds the parameter tokens of each FRAME marker as read;
    it stays empty when no marker carried any.
    """
    width: int
    height: int
    framerate: Fraction
    format: ChromaFormat
    depth: BitDepth
    tokens: Tuple[str, ...] = field(default=())
    frame_params: Tuple[Tuple[str, ...], ...] = field(default=())

    @classmethod
    def build(
        cls,
        width: int,
        height: int,
        fmt: ChromaFormat,
        depth: BitDepth = BitDepth.EIGHT,
        framerate: Fraction = Fraction(30, 1),
    ) -> "Y4MHeader":
        tag = fmt.tag if depth == BitDepth.EIGHT else f"{fmt.tag}p{int(depth)}"
        tokens = (
            f"W{width}",
            f"H{height}",
            f"F{framerate.numerator}:{framerate.denominator}",
            "Ip",
            "A1:1",
            f"C{tag}",
        )
        return cls(width, height, framerate, fmt, depth, tokens)

    def header_line(self) -> bytes:
        return b" ".join([Y4M_MAGIC] + [t.encode("ascii") for t in self.tokens]) + b"\n"

    def plane_sizes(self) -> List[Tuple[int, int]]:
        chroma_w, chroma_h = self.format.chroma_dims(self.width, self.height)
        return [(self.width, self.height), (chroma_w, chroma_h), (chroma_w, chroma_h)]

    def frame_bytes(self) -> int:
        return sum(w * h for w, h in self.plane_sizes()) * self.depth.bytes_per_sample


def _read_line(stream: BinaryIO) -> bytes:
    """Read up to and excluding the next newline; b'' at end of stream."""
    chunks = []
    while True:
        byte = stream.read(1)
        if not byte:
            break
        if byte == b"\n":
            chunks.append(byte)
            break
        chunks.append(byte)
        if len(chunks) > _MAX_LINE:
            raise MalformedHeader("header line too long")
    line = b"".join(chunks)
    return line[:-1] if line.endswith(b"\n") else line


def _open(source: StreamSource) -> BinaryIO:
    if isinstance(source, (bytes, bytearray)):
        return io.BytesIO(bytes(source))
    if isinstance(source, (str, Path)):
        return open(source, "rb")
    return source


def parse_y4m_header(stream: Union[bytes, BinaryIO]) -> Y4MHeader:
    """Parse the stream header and leave the stream at the first FRAME marker."""
    stream = _open(stream)
    line = _read_line(stream)
    if not line.startswith(Y4M_MAGIC + b" ") and line != Y4M_MAGIC:
        raise MissingMagic("YUV4MPEG2", line)

    tokens = tuple(t for t in line[len(Y4M_MAGIC):].decode("ascii", "replace").split(" ") if t)
    width = height = None
    framerate = None
    tag = "420"
    for token in tokens:
        key, value = token[0], token[1:]
        try:
            if key == "W":
                width = int(value)
            elif key == "H":
                height = int(value)
            elif key == "F":
                num, den = value.split(":")
                framerate = Fraction(int(num), int(den))
            elif key == "I" and value not in ("p", "?"):
                raise MalformedHeader(
                    "interlaced streams are not supported", details={"interlace": value}
                )
            elif key == "C":
                tag = value
        except (ValueError, ZeroDivisionError):
            raise MalformedHeader(f"bad header token {token!r}", details={"token": token})

    if width is None or height is None or framerate is None:
        raise MalformedHeader("header lacks W, H or F", details={"tokens": list(tokens)})
    if width <= 0 or height <= 0:
        raise MalformedHeader("non-positive dimensions", details={"width": width, "height": height})
    if tag not in _COLORSPACES:
        raise UnsupportedColorspace(tag)

    fmt, depth = _COLORSPACES[tag]
    return Y4MHeader(width, height, framerate, fmt, depth, tokens)


def _read_plane(stream: BinaryIO, width: int, height: int, depth: BitDepth) -> Plane:
    count = width * height * depth.bytes_per_sample
    data = stream.read(count)
    if len(data) != count:
        raise TruncatedFrame(count, len(data))
    dtype = np.uint8 if depth == BitDepth.EIGHT else np.dtype("<u2")
    samples = np.frombuffer(data, dtype=dtype).astype(np.uint16)
    plane = Plane(width=width, height=height, stride=width, samples=samples)
    plane.check_depth(depth)
    return plane


def _read_frame(stream: BinaryIO, header: Y4MHeader) -> Optional[Tuple[Frame, Tuple[str, ...]]]:
    marker = _read_line(stream)
    if not marker:
        return None
    if marker != FRAME_MAGIC and not marker.startswith(FRAME_MAGIC + b" "):
        raise MissingFrameMarker(marker)
    params = tuple(t for t in marker[len(FRAME_MAGIC):].decode("ascii", "replace").split(" ") if t)

    planes = [_read_plane(stream, w, h, header.depth) for w, h in header.plane_sizes()]
    frame = Frame(y=planes[0], cb=planes[1], cr=planes[2], format=header.format, depth=header.depth)
    return frame, params


def read_y4m_frame(stream: BinaryIO, header: Y4MHeader) -> Optional[Frame]:
    """Read one frame; returns None at a clean end of stream."""
    read = _read_frame(stream, header)
    return read[0] if read is not None else None


def read_y4m(source: StreamSource) -> Tuple[Y4MHeader, List[Frame]]:
    stream = _open(source)
    try:
        header = parse_y4m_header(stream)
        frames, params = [], []
        while (read := _read_frame(stream, header)) is not None:
            frames.append(read[0])
            params.append(read[1])
        if any(params):
            header = replace(header, frame_params=tuple(params))
    finally:
        if isinstance(source, (str, Path)):
            stream.close()
    logger.debug(f"Read {len(frames)} frame(s) of {header.width}x{header.height} {header.format.tag}")
    return header, frames


def _plane_bytes(plane: Plane, depth: BitDepth) -> bytes:
    dtype = np.uint8 if depth == BitDepth.EIGHT else np.dtype("<u2")
    return np.ascontiguousarray(plane.array).astype(dtype).tobytes()


def write_y4m(target: Union[str, Path, BinaryIO], header: Y4MHeader, frames: Iterable[Frame]) -> None:
    """Write a stream; header tokens are emitted exactly as stored.

    Frame i gets the FRAME parameters recorded in `header.frame_params[i]`;
    frames past the recorded ones get a bare marker.
    """
    stream = open(target, "wb") if isinstance(target, (str, Path)) else target
    try:
        stream.write(header.header_line())
        for index, frame in enumerate(frames):
            params = header.frame_params[index] if index < len(header.frame_params) else ()
            stream.write(b" ".join([FRAME_MAGIC] + [p.encode("ascii") for p in params]) + b"\n")
            for plane in frame.planes:
                stream.write(_plane_bytes(plane, header.depth))
    finally:
        if isinstance(target, (str, Path)):
            stream.close()


def _ppm_tokens(stream: BinaryIO, count: int) -> List[bytes]:
    """Whitespace-separated header tokens, skipping '#' comments."""
    tokens: List[bytes] = []
    current = b""
    while len(tokens) < count:
        byte = stream.read(1)
        if not byte:
            raise MalformedHeader("PPM header ended early")
        if byte == b"#" and not current:
            while byte not in (b"\n", b""):
                byte = stream.read(1)
            continue
        if byte.isspace():
            if current:
                tokens.append(current)
                current = b""
        else:
            current += byte
    return tokens


def read_ppm(source: StreamSource) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Read a binary P6 image into three uint8 planes (r, g, b)."""
    stream = _open(source)
    try:
        magic = stream.read(2)
        if magic != PPM_MAGIC:
            raise MissingMagic("PPM (P6)", magic)
        try:
            width, height, maxval = (int(t) for t in _ppm_tokens(stream, 3))
        except ValueError:
            raise MalformedHeader("PPM dimensions are not integers")
        if maxval != 255:
            raise MalformedHeader("only 8-bit PPM is supported", details={"maxval": maxval})
        count = width * height * 3
        data = stream.read(count)
        if len(data) != count:
            raise TruncatedFrame(count, len(data))
    finally:
        if isinstance(source, (str, Path)):
            stream.close()

    rgb = np.frombuffer(data, dtype=np.uint8).reshape(height, width, 3)
    return rgb[:, :, 0].copy(), rgb[:, :, 1].copy(), rgb[:, :, 2].copy()


def write_ppm(target: Union[str, Path, BinaryIO], r: np.ndarray, g: np.ndarray, b: np.ndarray) -> None:
    height, width = r.shape
    payload = np.stack([r, g, b], axis=-1).astype(np.uint8).tobytes()
    stream = open(target, "wb") if isinstance(target, (str, Path)) else target
    try:
        stream.write(b"P6\n%d %d\n255\n" % (width, height))
        stream.write(payload)
    finally:
        if isinstance(target, (str, Path)):
            stream.close()
