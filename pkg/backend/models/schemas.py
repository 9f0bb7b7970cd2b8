"""Pydantic models for run configuration and result rows."""

from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, Field, field_validator

from models.frame import BitDepth


class CflMode(str, Enum):
    """Which chroma tool configurations a run evaluates."""
    ON = "on"
    OFF = "off"
    BOTH = "both"

    def configurations(self) -> List[bool]:
        return {CflMode.ON: [True], CflMode.OFF: [False], CflMode.BOTH: [False, True]}[self]


class RunConfig(BaseModel):
    """One fully resolved CLI run."""
    inputs: List[str] = Field(default_factory=list, description="Y4M or PPM input paths")
    synthetic: int = Field(0, ge=0, description="Number of generated images added to the corpus")
    affine: bool = Field(False, description="Generate affine-chroma content instead of natural-like images")
    quantizers: List[int] = Field(default_factory=lambda: [20, 32, 43, 55])
    cfl: CflMode = CflMode.BOTH
    rate_model: str = Field("param-only", description="param-only or full")
    search_space: str = Field("pruned", description="full or pruned candidate search")
    lambda_const: float = Field(0.057, ge=0)
    block_size: int = 8
    chroma_format: str = "420"
    step_scale: float = Field(1.0, gt=0)
    deadzone: float = Field(1.0 / 3.0, ge=0, lt=1)
    jobs: int = Field(1, ge=1)
    seed: int = 0
    out_dir: str = "out"

    @field_validator("quantizers")
    @classmethod
    def validate_quantizers(cls, v):
        """Validate the quantizer sweep."""
        if not v:
            raise ValueError("quantizer list must not be empty")
        if len(set(v)) != len(v):
            raise ValueError("quantizers must be unique")
        if any(not 0 <= q <= 255 for q in v):
            raise ValueError("quantizers must lie in [0, 255]")
        return sorted(v)

    @field_validator("block_size")
    @classmethod
    def validate_block_size(cls, v):
        if v not in (4, 8, 16, 32):
            raise ValueError("block size must be 4, 8, 16 or 32")
        return v

    @field_validator("rate_model")
    @classmethod
    def validate_rate_model(cls, v):
        if v not in ("param-only", "full"):
            raise ValueError("rate model must be 'param-only' or 'full'")
        return v

    @field_validator("search_space")
    @classmethod
    def validate_search_space(cls, v):
        if v not in ("full", "pruned"):
            raise ValueError("search space must be 'full' or 'pruned'")
        return v

    @field_validator("chroma_format")
    @classmethod
    def validate_chroma_format(cls, v):
        if v not in ("420", "422", "440", "444"):
            raise ValueError("chroma format must be one of 420, 422, 440, 444")
        return v


class QuantizerConfig(BaseModel):
    """Step sizes and Lagrangian weight derived from one quantizer index."""
    q_index: int = Field(..., ge=0, le=255)
    luma_step: float = Field(..., gt=0)
    chroma_step: float = Field(..., gt=0)
    lambda_: float = Field(..., ge=0)

    @classmethod
    def from_index(
        cls,
        q_index: int,
        depth: BitDepth = BitDepth.EIGHT,
        step_scale: float = 1.0,
        lambda_const: float = 0.057,
    ) -> "QuantizerConfig":
        step = 2.0 ** (q_index / 12.0) * 2.0 ** (int(depth) - 8) * step_scale
        return cls(q_index=q_index, luma_step=step, chroma_step=step, lambda_=lambda_const * step * step)


class CodedFrameStats(BaseModel):
    """Per-frame coding outcome."""
    total_bits: int
    distortion_y: int
    distortion_cb: int
    distortion_cr: int
    mode_counts: Dict[str, int]
    blocks: int


class RdPoint(BaseModel):
    """One (configuration, quantizer) point of an image's RD curve."""
    image: str
    config: str
    q_index: int
    bits: int
    psnr_y: float
    psnr_cb: float
    psnr_cr: float
    ciede2000: float
    ciede2000_score: float


class BdRateRow(BaseModel):
    metric: str
    bd_rate_percent: float
    images: Optional[int] = None


class DcErrorSummary(BaseModel):
    size: int
    q1: float
    median: float
    q3: float
    lo_whisker: float
    hi_whisker: float


class BlockTrace(BaseModel):
    """RD decision of one chroma prediction unit."""
    image: str
    q_index: int
    x: int
    y: int
    mode: str
    alpha_cb: float
    alpha_cr: float
    distortion: int
    rate_bits: float
    cost: float


class FitComparisonRow(BaseModel):
    size: int
    blocks: int
    mse_implicit: float
    mse_explicit_ls: float
    mse_cfl: float


RD_POINT_COLUMNS = list(RdPoint.model_fields)
BD_RATE_COLUMNS = ["metric", "bd_rate_percent"]
DC_ERROR_COLUMNS = list(DcErrorSummary.model_fields)
BLOCK_COLUMNS = list(BlockTrace.model_fields)
FIT_COLUMNS = list(FitComparisonRow.model_fields)
