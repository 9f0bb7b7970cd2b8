"""Custom exceptions for the CfL codec toolkit."""

from typing import Any, Dict, Optional


class CflCodecError(Exception):
    """Base exception for all codec toolkit errors."""

    def __init__(
        self,
        message: str,
        exit_code: int = 1,
        details: Optional[Dict[str, Any]] = None
    ):
        self.message = message
        self.exit_code = exit_code
        self.details = details or {}
        super().__init__(self.message)


class InputError(CflCodecError):
    """Raised for bad user input; maps to the usage exit status."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message, exit_code=2, details=details)


class ValidationError(InputError):
    """Raised when input validation fails."""


class DimensionMismatch(ValidationError):
    """Raised when two planes, blocks or frames disagree on geometry."""

    def __init__(self, expected: Any, actual: Any, what: str = "block"):
        super().__init__(
            f"{what} dimensions differ: expected {expected}, got {actual}",
            details={"expected": str(expected), "actual": str(actual), "what": what}
        )


class InputNotFoundError(InputError):
    """Raised when an input path does not exist."""

    def __init__(self, path: str):
        super().__init__(f"input not found: {path}", details={"path": path})


class EmptyCorpus(InputError):
    """Raised when an analysis or sweep receives no frames."""

    def __init__(self, message: str = "corpus is empty"):
        super().__init__(message)


class MissingMagic(InputError):
    """Raised when a stream does not start with the expected magic."""

    def __init__(self, expected: str, found: bytes):
        super().__init__(
            f"not a {expected} stream",
            details={"expected": expected, "found": found[:16].hex()}
        )


class UnsupportedColorspace(InputError):
    """Raised for Y4M colorspace tags outside the supported set."""

    def __init__(self, tag: str):
        super().__init__(f"unsupported colorspace: {tag}", details={"tag": tag})


class MalformedHeader(InputError):
    """Raised when a Y4M or PPM header cannot be parsed."""


class TruncatedFrame(InputError):
    """Raised when a stream ends in the middle of a frame."""

    def __init__(self, expected: int, actual: int):
        super().__init__(
            f"frame truncated: expected {expected} bytes, got {actual}",
            details={"expected": expected, "actual": actual}
        )


class MissingFrameMarker(InputError):
    """Raised when frame data is not preceded by a FRAME line."""

    def __init__(self, found: bytes):
        super().__init__("missing FRAME marker", details={"found": found[:16].hex()})


class SampleOutOfRange(InputError):
    """Raised when a sample exceeds the maximum of its bit depth."""

    def __init__(self, maximum: int, found: int):
        super().__init__(
            f"sample value {found} exceeds bit-depth maximum {maximum}",
            details={"maximum": maximum, "found": found}
        )


class OutOfBounds(CflCodecError):
    """Raised when a chroma index lies outside the block."""

    def __init__(self, u: int, v: int, width: int, height: int):
        super().__init__(
            f"chroma position ({u}, {v}) outside {width}x{height} grid",
            details={"u": u, "v": v, "width": width, "height": height}
        )


class InvalidBlockSize(CflCodecError):
    """Raised when a CfL block dimension is not a supported power of two."""

    def __init__(self, width: int, height: int):
        super().__init__(
            f"invalid CfL block size {width}x{height}",
            details={"width": width, "height": height}
        )


class UnsupportedBlockSize(CflCodecError):
    """Raised when the transform is asked for a size it does not implement."""

    def __init__(self, shape: Any):
        super().__init__(f"unsupported transform size {shape}", details={"shape": str(shape)})


class AlphaOutOfRange(CflCodecError):
    """Raised when a Q3 scaling factor is outside [-16, 16]."""

    def __init__(self, alpha_q3: int):
        super().__init__(
            f"alpha_q3 {alpha_q3} outside [-16, 16]", details={"alpha_q3": alpha_q3}
        )


class InsufficientNeighbors(CflCodecError):
    """Raised when an implicit fit has fewer than two neighbour pairs."""

    def __init__(self, count: int):
        super().__init__(
            f"implicit fit needs at least 2 neighbour pairs, got {count}",
            details={"count": count}
        )


class SymbolOutOfRange(CflCodecError):
    """Raised when a symbol does not belong to the CDF alphabet."""

    def __init__(self, symbol: int, size: int):
        super().__init__(
            f"symbol {symbol} outside alphabet of size {size}",
            details={"symbol": symbol, "size": size}
        )


class TruncatedStream(CflCodecError):
    """Raised when the range decoder runs out of payload bytes."""

    def __init__(self, position: int):
        super().__init__("range-coded stream truncated", details={"position": position})


class InvalidParams(CflCodecError):
    """Raised for CfL parameters that cannot be signalled."""


class InvalidPayload(CflCodecError):
    """Raised when a payload container header is not understood."""


class NoOverlap(CflCodecError):
    """Raised when two RD curves share no quality interval."""

    def __init__(self, low: float, high: float):
        super().__init__(
            "RD curves do not overlap in quality",
            details={"low": low, "high": high}
        )


class InvalidCurve(CflCodecError):
    """Raised when an RD curve violates its ordering invariants."""


class CodecMismatchError(CflCodecError):
    """Raised when decoder replay differs from the encoder reconstruction."""
