"""Quantizer sweeps, RD curves and BD-rate tables."""

import json
import math
import time
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import pandas as pd
from joblib import Parallel, delayed

from codec.harness import encode_frame, quantizer_for, verify_closure
from codec.rd_search import RateModel, SearchSpace
from exceptions import EmptyCorpus, InvalidCurve, ValidationError
from logging_config import get_logger
from metrics.bd_rate import MeanBdRate, RdCurve, mean_bd_rate
from metrics.quality import ciede2000, ciede2000_score, psnr
from models.frame import Frame
from models.schemas import BD_RATE_COLUMNS, RD_POINT_COLUMNS, BdRateRow, RdPoint, RunConfig
from services.corpus_service import NamedFrame

logger = get_logger(__name__)

CONFIG_LABELS = {False: "cfl-off", True: "cfl-on"}
BASELINE, CANDIDATE = CONFIG_LABELS[False], CONFIG_LABELS[True]

# Table rows: label -> RdPoint field used as quality.
BD_METRICS = (
    ("PSNR", "psnr_y"),
    ("PSNR-Cb", "psnr_cb"),
    ("PSNR-Cr", "psnr_cr"),
    ("CIEDE2000", "ciede2000_score"),
)


def run_point(name: str, frame: Frame, q_index: int, cfl_enabled: bool, config: RunConfig) -> RdPoint:
    """Encode, check decoder closure and measure one RD point."""
    quantizer = quantizer_for(q_index, frame.depth, config.step_scale, config.lambda_const)
    result = encode_frame(
        frame,
        quantizer,
        cfl_enabled=cfl_enabled,
        block_size=config.block_size,
        rate_model=RateModel(config.rate_model),
        search_space=SearchSpace(config.search_space),
        deadzone=config.deadzone,
        image=name,
    )
    recon = verify_closure(result)
    delta_e = ciede2000(frame, recon)
    return RdPoint(
        image=name,
        config=CONFIG_LABELS[cfl_enabled],
        q_index=q_index,
        bits=result.stats.total_bits,
        psnr_y=psnr(frame.y, recon.y, frame.depth),
        psnr_cb=psnr(frame.cb, recon.cb, frame.depth),
        psnr_cr=psnr(frame.cr, recon.cr, frame.depth),
        ciede2000=delta_e,
        ciede2000_score=ciede2000_score(delta_e),
    )


class SweepService:
    """Runs (image, configuration, quantizer) jobs and reduces them to tables."""

    def __init__(self, config: RunConfig, backend: Optional[str] = None):
        self.config = config
        self.backend = backend

    def sweep(self, corpus: Sequence[NamedFrame], configurations: Optional[Sequence[bool]] = None) -> List[RdPoint]:
        if not corpus:
            raise EmptyCorpus("sweep needs at least one image")
        configurations = configurations or self.config.cfl.configurations()
        jobs = [
            (name, frame, q_index, cfl)
            for name, frame in corpus
            for cfl in configurations
            for q_index in self.config.quantizers
        ]
        logger.info(f"Sweeping {len(jobs)} job(s) on {self.config.jobs} worker(s)")
        start = time.time()
        points = Parallel(n_jobs=self.config.jobs, backend=self.backend)(
            delayed(run_point)(name, frame, q_index, cfl, self.config) for name, frame, q_index, cfl in jobs
        )
        logger.info(f"Sweep finished in {time.time() - start:.1f}s")
        return sorted(points, key=lambda p: (p.image, p.config, p.q_index))

    @staticmethod
    def curves(points: Sequence[RdPoint], field: str) -> Dict[Tuple[str, str], RdCurve]:
        grouped: Dict[Tuple[str, str], List[Tuple[float, float]]] = {}
        for point in points:
            grouped.setdefault((point.image, point.config), []).append((point.bits, getattr(point, field)))
        return {key: RdCurve.from_points(values) for key, values in grouped.items()}

    def bd_rate_table(self, points: Sequence[RdPoint]) -> List[BdRateRow]:
        """Per-image BD-rate of cfl-on against cfl-off, averaged over images."""
        images = sorted({p.image for p in points})
        rows = []
        for label, field in BD_METRICS:
            pairs = {}
            for image in images:
                try:
                    curves = self.curves([p for p in points if p.image == image], field)
                    pairs[image] = (curves[(image, BASELINE)], curves[(image, CANDIDATE)])
                except KeyError:
                    raise ValidationError("BD-rate needs both cfl-on and cfl-off points", details={"image": image})
                except InvalidCurve as e:
                    logger.warning(f"{label}: skipping {image}: {e.message}")
            if pairs:
                mean = mean_bd_rate(pairs, skip_invalid=True)
            else:
                mean = MeanBdRate(math.nan, 0)
            rows.append(BdRateRow(metric=label, bd_rate_percent=mean.percent, images=mean.images))
        return rows


def write_table(
    rows: Sequence,
    columns: List[str],
    out_dir: Path,
    stem: str,
    summary: Optional[Dict[str, object]] = None,
) -> Tuple[Path, Path]:
    """Write `stem`.csv and `stem`.json with a fixed column order.

    When `summary` is given the JSON file holds it instead of the rows.
    """
    out_dir.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame([row.model_dump() for row in rows])
    frame = frame.reindex(columns=columns) if len(frame) else pd.DataFrame(columns=columns)
    csv_path = out_dir / f"{stem}.csv"
    json_path = out_dir / f"{stem}.json"
    frame.to_csv(csv_path, index=False, float_format="%.6f")
    payload = summary if summary is not None else [row.model_dump(mode="json") for row in rows]
    json_path.write_text(json.dumps(payload, indent=2) + "\n")
    return csv_path, json_path


def format_bd_table(rows: Sequence[BdRateRow]) -> str:
    frame = pd.DataFrame([{"Metric": r.metric, "BD-rate (%)": round(r.bd_rate_percent, 3)} for r in rows])
    return frame.to_string(index=False)


def write_rd_points(points: Sequence[RdPoint], out_dir: Path) -> Tuple[Path, Path]:
    return write_table(points, RD_POINT_COLUMNS, out_dir, "rd_points")


def write_bd_rate(rows: Sequence[BdRateRow], out_dir: Path) -> Tuple[Path, Path]:
    return write_table(rows, BD_RATE_COLUMNS, out_dir, "bd_rate")
