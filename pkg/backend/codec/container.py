"""Self-framed payload header."""

from __future__ import annotations

import struct
from dataclasses import dataclass

from exceptions import InvalidPayload
from models.frame import BitDepth, ChromaFormat

MAGIC = b"CFLC"
VERSION = 1
FLAG_CFL = 0x01

_LAYOUT = struct.Struct("<4sBIIBBBBBBdd")
HEADER_SIZE = _LAYOUT.size


@dataclass(frozen=True)
class PayloadHeader:
    width: int
    height: int
    format: ChromaFormat
    depth: BitDepth
    q_index: int
    block_size: int
    cfl_enabled: bool
    luma_step: float
    chroma_step: float

    def pack(self) -> bytes:
        return _LAYOUT.pack(
            MAGIC, VERSION, self.width, self.height,
            self.format.s_x, self.format.s_y, int(self.depth),
            self.q_index, self.block_size,
            FLAG_CFL if self.cfl_enabled else 0,
            self.luma_step, self.chroma_step,
        )

    @classmethod
    def unpack(cls, payload: bytes) -> "PayloadHeader":
        if len(payload) < HEADER_SIZE:
            raise InvalidPayload("payload shorter than its header", details={"length": len(payload)})
        (magic, version, width, height, s_x, s_y, depth, q_index, block_size,
         flags, luma_step, chroma_step) = _LAYOUT.unpack_from(payload)
        if magic != MAGIC:
            raise InvalidPayload("bad payload magic", details={"magic": magic.hex()})
        if version != VERSION:
            raise InvalidPayload(f"unsupported payload version {version}", details={"version": version})
        try:
            fmt = ChromaFormat.from_steps(s_x, s_y)
            depth = BitDepth(depth)
        except ValueError as e:
            raise InvalidPayload(f"bad payload geometry: {e}")
        return cls(width, height, fmt, depth, q_index, block_size, bool(flags & FLAG_CFL), luma_step, chroma_step)
