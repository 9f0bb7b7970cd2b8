"""DC error analysis, block decision traces and fitting comparisons."""

from collections import defaultdict
from typing import Dict, List, Optional, Sequence

import numpy as np

from codec.harness import encode_frame, quantizer_for
from codec.rd_search import RateModel, SearchSpace, sse
from exceptions import EmptyCorpus
from logging_config import get_logger
from models.cfl_model import (
    ANALYSIS_SIZES,
    cfl_predict,
    dc_error_analysis,
    dc_predict,
    luma_to_q3_ac,
    subsample_sums,
)
from models.fitting import fit_ls, fit_ls_zero_mean, implicit_fit, implicit_neighbors, quantize_alpha
from models.frame import Frame
from models.schemas import BlockTrace, DcErrorSummary, FitComparisonRow, RunConfig
from services.corpus_service import NamedFrame

logger = get_logger(__name__)


def reconstructions(corpus: Sequence[NamedFrame], config: RunConfig, q_index: int) -> List[Frame]:
    """Decoder-side frames at one quantizer, CfL enabled."""
    recon = []
    for name, frame in corpus:
        quantizer = quantizer_for(q_index, frame.depth, config.step_scale, config.lambda_const)
        recon.append(encode_frame(
            frame, quantizer, cfl_enabled=True, block_size=config.block_size,
            rate_model=RateModel(config.rate_model), search_space=SearchSpace(config.search_space),
            deadzone=config.deadzone, image=name,
        ).reconstruction)
    return recon


def analyze_dc(
    corpus: Sequence[NamedFrame],
    config: RunConfig,
    sizes: Sequence[int] = ANALYSIS_SIZES,
    recon_q: Optional[int] = None,
) -> List[DcErrorSummary]:
    """Squared DC error distribution per block size.

    With `recon_q` the neighbours come from reconstructions at that quantizer.
    """
    frames = [frame for _, frame in corpus]
    recon = reconstructions(corpus, config, recon_q) if recon_q is not None else None
    stats = dc_error_analysis(frames, sizes, recon)
    return [DcErrorSummary(**s.as_row()) for s in stats]


def dump_blocks(corpus: Sequence[NamedFrame], config: RunConfig) -> List[BlockTrace]:
    """Per-unit RD decisions for every image and quantizer, CfL enabled."""
    if not corpus:
        raise EmptyCorpus("dump-blocks needs at least one image")
    traces: List[BlockTrace] = []
    for name, frame in corpus:
        for q_index in config.quantizers:
            quantizer = quantizer_for(q_index, frame.depth, config.step_scale, config.lambda_const)
            result = encode_frame(
                frame, quantizer, cfl_enabled=True, block_size=config.block_size,
                rate_model=RateModel(config.rate_model), search_space=SearchSpace(config.search_space),
                deadzone=config.deadzone, image=name, collect_traces=True,
            )
            traces.extend(result.traces)
    return traces


def block_summary(traces: Sequence[BlockTrace]) -> Dict[str, object]:
    """Mode shares per quantizer for the JSON side file."""
    per_q: Dict[int, Dict[str, int]] = defaultdict(lambda: {"dc": 0, "cfl": 0})
    for trace in traces:
        per_q[trace.q_index][trace.mode] += 1
    return {
        "blocks": len(traces),
        "cfl_fraction": (sum(1 for t in traces if t.mode == "cfl") / len(traces)) if traces else 0.0,
        "by_quantizer": {str(q): counts for q, counts in sorted(per_q.items())},
    }


def _plane_fit_errors(frame: Frame, luma_q3: np.ndarray, chroma: np.ndarray, size: int) -> np.ndarray:
    """Squared-error sums (implicit, explicit LS, signalled CfL) over one plane's blocks."""
    fmt = frame.format
    luma = frame.y.array
    totals = np.zeros(3)
    rows, cols = chroma.shape[0] // size, chroma.shape[1] // size
    for by in range(rows):
        for bx in range(cols):
            if bx == 0 and by == 0:
                continue
            x, y = bx * size, by * size
            block_c = chroma[y:y + size, x:x + size].astype(np.int64)
            block_l = luma_q3[y:y + size, x:x + size]

            neighbour_l, neighbour_c = implicit_neighbors(luma_q3, chroma, x, y, size, size)
            implicit = implicit_fit(neighbour_l, neighbour_c).predict(block_l)
            explicit = fit_ls(block_l, block_c).predict(block_l)

            footprint = luma[y * fmt.s_y:(y + size) * fmt.s_y, x * fmt.s_x:(x + size) * fmt.s_x]
            ac = luma_to_q3_ac(footprint, fmt, size, size)
            alpha = quantize_alpha(fit_ls_zero_mean(ac.values, block_c).alpha * 8)
            above = chroma[y - 1, x:x + size] if y > 0 else None
            left = chroma[y:y + size, x - 1] if x > 0 else None
            signalled = cfl_predict(ac, alpha.alpha_q3, dc_predict(above, left, frame.depth), frame.depth)

            totals[0] += float(np.sum((implicit - block_c) ** 2))
            totals[1] += float(np.sum((explicit - block_c) ** 2))
            totals[2] += sse(signalled, block_c)
    return totals


def compare_fitting(
    corpus: Sequence[NamedFrame],
    sizes: Sequence[int] = ANALYSIS_SIZES,
) -> List[FitComparisonRow]:
    """Per-size MSE of implicit, unquantised explicit and signalled CfL models.

    Source luma stands in for the reconstruction; the top-left block of each
    plane has no neighbours and is skipped by every model.
    """
    if not corpus:
        raise EmptyCorpus("compare-fit needs at least one image")
    rows = []
    for size in sizes:
        totals = np.zeros(3)
        samples = 0
        for _, frame in corpus:
            chroma_w, chroma_h = frame.format.chroma_dims(frame.width, frame.height)
            sums = subsample_sums(frame.y.array, frame.format, chroma_w, chroma_h)
            luma_q3 = sums << (3 - frame.format.log2_area)
            for plane in (frame.cb, frame.cr):
                chroma = plane.array
                blocks = (chroma.shape[0] // size) * (chroma.shape[1] // size)
                if blocks < 2:
                    continue
                totals += _plane_fit_errors(frame, luma_q3, chroma, size)
                samples += (blocks - 1) * size * size
        if samples == 0:
            logger.warning(f"No {size}x{size} blocks to compare; skipping")
            continue
        mse = totals / samples
        rows.append(FitComparisonRow(
            size=size,
            blocks=samples // (size * size),
            mse_implicit=float(mse[0]),
            mse_explicit_ls=float(mse[1]),
            mse_cfl=float(mse[2]),
        ))
        logger.info(f"Fit comparison {size}x{size}: implicit {mse[0]:.2f}, LS {mse[1]:.2f}, CfL {mse[2]:.2f}")
    return rows
