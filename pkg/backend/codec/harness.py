"""Still-image coder built around the CfL predictor.

Every prediction unit covers a BxB chroma block and its (B*s_x)x(B*s_y) luma
footprint. Luma is coded first as s_x*s_y DC-predicted transform blocks, then
chroma chooses DC or CfL from the reconstructed luma. Units are visited in
raster order and the decoder replays exactly the same steps.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy as np

from codec.cfl_signaling import ChromaContexts, CflParams, code_cfl_params, decode_cfl_params
from codec.container import HEADER_SIZE, PayloadHeader
from codec.range_coder import RATE_SCALE, RangeDecoder, RangeEncoder
from codec.rd_search import ChromaMode, RdConfig, RdDecision, RateModel, SearchSpace, rd_select, sse
from codec.transform import (
    CHROMA,
    DEFAULT_DEADZONE,
    LUMA,
    TRANSFORM_SIZES,
    CoefficientContexts,
    decode_levels,
    reconstruct_residual,
    transform_quantize_block,
)
from exceptions import CodecMismatchError, ValidationError
from logging_config import get_logger
from models.cfl_model import DcPrediction, Q3AcBlock, cfl_predict, dc_predict, luma_to_q3_ac
from models.frame import BitDepth, ChromaFormat, Frame
from models.schemas import BlockTrace, CodedFrameStats, QuantizerConfig

logger = get_logger(__name__)

PLANES = ("cb", "cr")


@dataclass(frozen=True)
class FrameGeometry:
    """Block grid of a frame; planes are padded to whole prediction units."""
    width: int
    height: int
    format: ChromaFormat
    block_size: int

    @property
    def chroma_dims(self) -> Tuple[int, int]:
        return self.format.chroma_dims(self.width, self.height)

    @property
    def units(self) -> Tuple[int, int]:
        """(columns, rows) of prediction units."""
        chroma_w, chroma_h = self.chroma_dims
        return -(-chroma_w // self.block_size), -(-chroma_h // self.block_size)

    @property
    def padded_chroma(self) -> Tuple[int, int]:
        cols, rows = self.units
        return cols * self.block_size, rows * self.block_size

    @property
    def padded_luma(self) -> Tuple[int, int]:
        chroma_w, chroma_h = self.padded_chroma
        return chroma_w * self.format.s_x, chroma_h * self.format.s_y


def _pad(plane: np.ndarray, width: int, height: int) -> np.ndarray:
    plane = plane.astype(np.int64)
    return np.pad(plane, ((0, height - plane.shape[0]), (0, width - plane.shape[1])), mode="edge")


def _neighbours(recon: np.ndarray, x0: int, y0: int, size: int):
    above = recon[y0 - 1, x0:x0 + size] if y0 > 0 else None
    left = recon[y0:y0 + size, x0 - 1] if x0 > 0 else None
    return above, left


class _CodingState:
    """Reconstruction buffers and adaptive contexts shared by encoder and decoder."""

    def __init__(self, geometry: FrameGeometry, depth: BitDepth):
        self.geometry = geometry
        self.depth = depth
        luma_w, luma_h = geometry.padded_luma
        chroma_w, chroma_h = geometry.padded_chroma
        self.recon_y = np.zeros((luma_h, luma_w), dtype=np.int64)
        self.recon_c = [np.zeros((chroma_h, chroma_w), dtype=np.int64) for _ in PLANES]
        self.coefficients = CoefficientContexts()
        self.chroma = ChromaContexts()

    def luma_blocks(self, col: int, row: int):
        """Origins of the transform blocks of one unit's luma footprint, raster order."""
        fmt, size = self.geometry.format, self.geometry.block_size
        for ty in range(fmt.s_y):
            for tx in range(fmt.s_x):
                yield (col * fmt.s_x + tx) * size, (row * fmt.s_y + ty) * size

    def luma_dc(self, x0: int, y0: int) -> DcPrediction:
        return dc_predict(*_neighbours(self.recon_y, x0, y0, self.geometry.block_size), self.depth)

    def chroma_dc(self, plane: int, x0: int, y0: int) -> DcPrediction:
        return dc_predict(*_neighbours(self.recon_c[plane], x0, y0, self.geometry.block_size), self.depth)

    def chroma_ac(self, col: int, row: int) -> Q3AcBlock:
        fmt, size = self.geometry.format, self.geometry.block_size
        footprint = self.recon_y[
            row * size * fmt.s_y:(row + 1) * size * fmt.s_y,
            col * size * fmt.s_x:(col + 1) * size * fmt.s_x,
        ]
        return luma_to_q3_ac(footprint, fmt, size, size)

    def store(self, target: np.ndarray, x0: int, y0: int, prediction, recon_residual: np.ndarray) -> np.ndarray:
        size = self.geometry.block_size
        block = np.clip(prediction + recon_residual, 0, self.depth.max_value)
        target[y0:y0 + size, x0:x0 + size] = block
        return block

    def reconstruction(self) -> Frame:
        width, height = self.geometry.width, self.geometry.height
        chroma_w, chroma_h = self.geometry.chroma_dims
        return Frame.from_arrays(
            self.recon_y[:height, :width],
            self.recon_c[0][:chroma_h, :chroma_w],
            self.recon_c[1][:chroma_h, :chroma_w],
            self.geometry.format,
            self.depth,
        )


@dataclass
class EncodeResult:
    payload: bytes
    stats: CodedFrameStats
    reconstruction: Frame
    traces: List[BlockTrace] = field(default_factory=list)


def quantizer_for(q_index: int, depth: BitDepth, step_scale: float = 1.0, lambda_const: float = 0.057) -> QuantizerConfig:
    return QuantizerConfig.from_index(q_index, depth, step_scale, lambda_const)


def encode_frame(
    frame: Frame,
    quantizer: QuantizerConfig,
    cfl_enabled: bool = True,
    block_size: int = 8,
    rate_model: RateModel = RateModel.PARAM_ONLY,
    search_space: SearchSpace = SearchSpace.PRUNED,
    deadzone: float = DEFAULT_DEADZONE,
    image: str = "",
    collect_traces: bool = False,
) -> EncodeResult:
    """Code one frame; returns the payload, statistics and the decoder-side reconstruction."""
    if block_size not in TRANSFORM_SIZES:
        raise ValidationError("block size must be 4, 8, 16 or 32", details={"block_size": block_size})

    geometry = FrameGeometry(frame.width, frame.height, frame.format, block_size)
    state = _CodingState(geometry, frame.depth)
    luma_w, luma_h = geometry.padded_luma
    chroma_w, chroma_h = geometry.padded_chroma
    source_y = _pad(frame.y.array, luma_w, luma_h)
    source_c = [_pad(frame.cb.array, chroma_w, chroma_h), _pad(frame.cr.array, chroma_w, chroma_h)]

    header = PayloadHeader(
        width=frame.width,
        height=frame.height,
        format=frame.format,
        depth=frame.depth,
        q_index=quantizer.q_index,
        block_size=block_size,
        cfl_enabled=cfl_enabled,
        luma_step=quantizer.luma_step,
        chroma_step=quantizer.chroma_step,
    )
    cfg = RdConfig(
        Fraction(quantizer.lambda_),
        search_space=search_space,
        rate_model=rate_model,
        code_mode_flag=cfl_enabled,
    )
    encoder = RangeEncoder()
    mode_counts = {ChromaMode.DC.value: 0, ChromaMode.CFL.value: 0}
    traces: List[BlockTrace] = []
    cols, rows = geometry.units

    for row in range(rows):
        for col in range(cols):
            for x0, y0 in state.luma_blocks(col, row):
                dc = state.luma_dc(x0, y0)
                residual = source_y[y0:y0 + block_size, x0:x0 + block_size] - dc.value
                result = transform_quantize_block(
                    residual, quantizer.luma_step, state.coefficients, LUMA, writer=encoder, deadzone=deadzone
                )
                state.store(state.recon_y, x0, y0, dc.value, result.recon_residual)

            decision = _code_chroma_unit(
                state, encoder, source_c, col, row, quantizer, cfg, cfl_enabled, deadzone
            )
            mode_counts[decision.mode.value] += 1
            if collect_traces:
                traces.append(_trace(state, source_c, col, row, decision, cfg, image, quantizer.q_index))

    payload = header.pack() + encoder.finish()
    reconstruction = state.reconstruction()
    stats = CodedFrameStats(
        total_bits=8 * len(payload),
        distortion_y=sse(reconstruction.y.array, frame.y.array),
        distortion_cb=sse(reconstruction.cb.array, frame.cb.array),
        distortion_cr=sse(reconstruction.cr.array, frame.cr.array),
        mode_counts=mode_counts,
        blocks=cols * rows,
    )
    logger.debug(
        f"Encoded {frame.width}x{frame.height} q={quantizer.q_index} cfl={cfl_enabled}: "
        f"{stats.total_bits} bits, modes {mode_counts}"
    )
    return EncodeResult(payload, stats, reconstruction, traces)


def _code_chroma_unit(
    state: _CodingState,
    encoder: RangeEncoder,
    source_c: List[np.ndarray],
    col: int,
    row: int,
    quantizer: QuantizerConfig,
    cfg: RdConfig,
    cfl_enabled: bool,
    deadzone: float,
) -> RdDecision:
    size = state.geometry.block_size
    x0, y0 = col * size, row * size
    refs = [source[y0:y0 + size, x0:x0 + size] for source in source_c]
    dcs = [state.chroma_dc(plane, x0, y0) for plane in range(len(PLANES))]
    ac = state.chroma_ac(col, row)

    cache: Dict[Tuple[int, int], Tuple[int, int]] = {}

    def residual(plane: int, alpha_q3: int) -> Tuple[int, int]:
        key = (plane, alpha_q3)
        if key not in cache:
            prediction = cfl_predict(ac, alpha_q3, dcs[plane], state.depth)
            result = transform_quantize_block(
                refs[plane] - prediction, quantizer.chroma_step, state.coefficients, CHROMA, deadzone=deadzone
            )
            recon = np.clip(prediction + result.recon_residual, 0, state.depth.max_value)
            cache[key] = (sse(recon, refs[plane]), result.rate_units)
        return cache[key]

    if cfl_enabled:
        decision = rd_select(ac, ac, refs[0], refs[1], dcs[0], dcs[1], cfg, state.chroma, state.depth, residual)
        encoder.encode_symbol(state.chroma.mode_flag, int(decision.mode == ChromaMode.CFL))
        if decision.params is not None:
            code_cfl_params(encoder, decision.params, state.chroma)
    else:
        distortion = rate = 0
        for plane in range(len(PLANES)):
            plane_distortion, plane_rate = residual(plane, 0)
            distortion += plane_distortion
            rate += plane_rate
        decision = RdDecision(
            ChromaMode.DC, None, distortion, rate, distortion + cfg.lambda_ * Fraction(rate, RATE_SCALE)
        )

    for plane, alpha_q3 in enumerate(decision.alphas):
        prediction = cfl_predict(ac, alpha_q3, dcs[plane], state.depth)
        result = transform_quantize_block(
            refs[plane] - prediction, quantizer.chroma_step, state.coefficients, CHROMA,
            writer=encoder, deadzone=deadzone,
        )
        state.store(state.recon_c[plane], x0, y0, prediction, result.recon_residual)
    return decision


def _trace(
    state: _CodingState,
    source_c: List[np.ndarray],
    col: int,
    row: int,
    decision: RdDecision,
    cfg: RdConfig,
    image: str,
    q_index: int,
) -> BlockTrace:
    """Decision record with distortion counted over in-frame samples only."""
    size = state.geometry.block_size
    chroma_w, chroma_h = state.geometry.chroma_dims
    x0, y0 = col * size, row * size
    x1, y1 = min(x0 + size, chroma_w), min(y0 + size, chroma_h)
    distortion = sum(
        sse(state.recon_c[plane][y0:y1, x0:x1], source_c[plane][y0:y1, x0:x1]) for plane in range(len(PLANES))
    )
    alpha_cb, alpha_cr = decision.alphas
    cost = distortion + cfg.lambda_ * Fraction(decision.rate_units, RATE_SCALE)
    return BlockTrace(
        image=image,
        q_index=q_index,
        x=x0,
        y=y0,
        mode=decision.mode.value,
        alpha_cb=alpha_cb / 8,
        alpha_cr=alpha_cr / 8,
        distortion=distortion,
        rate_bits=decision.rate_bits,
        cost=float(cost),
    )


def decode_frame(payload: bytes) -> Frame:
    """Replay a payload and return its reconstruction."""
    header = PayloadHeader.unpack(payload)
    if header.block_size not in TRANSFORM_SIZES:
        raise ValidationError("payload block size unsupported", details={"block_size": header.block_size})
    geometry = FrameGeometry(header.width, header.height, header.format, header.block_size)
    state = _CodingState(geometry, header.depth)
    decoder = RangeDecoder(payload, offset=HEADER_SIZE)
    size = header.block_size
    cols, rows = geometry.units

    for row in range(rows):
        for col in range(cols):
            for x0, y0 in state.luma_blocks(col, row):
                dc = state.luma_dc(x0, y0)
                levels = decode_levels(decoder, state.coefficients, LUMA, size)
                state.store(state.recon_y, x0, y0, dc.value, reconstruct_residual(levels, header.luma_step))

            x0, y0 = col * size, row * size
            dcs = [state.chroma_dc(plane, x0, y0) for plane in range(len(PLANES))]
            ac = state.chroma_ac(col, row)
            params: Optional[CflParams] = None
            if header.cfl_enabled and decoder.decode_symbol(state.chroma.mode_flag):
                params = decode_cfl_params(decoder, state.chroma)
            alphas = params.alphas if params is not None else (0, 0)
            for plane, alpha_q3 in enumerate(alphas):
                prediction = cfl_predict(ac, alpha_q3, dcs[plane], state.depth)
                levels = decode_levels(decoder, state.coefficients, CHROMA, size)
                state.store(state.recon_c[plane], x0, y0, prediction, reconstruct_residual(levels, header.chroma_step))

    return state.reconstruction()


def verify_closure(result: EncodeResult) -> Frame:
    """Decode a payload and insist it matches the encoder's reconstruction."""
    decoded = decode_frame(result.payload)
    if not decoded.equals(result.reconstruction):
        mismatched = [
            name for name, a, b in zip(("y", "cb", "cr"), decoded.planes, result.reconstruction.planes)
            if not a.equals(b)
        ]
        raise CodecMismatchError(
            "decoder replay differs from encoder reconstruction",
            details={"planes": mismatched},
        )
    return decoded
