"""Corpus assembly from input files and generated content."""

from pathlib import Path
from typing import List, Tuple

from exceptions import EmptyCorpus, InputNotFoundError
from logging_config import get_logger
from media.loader import SUPPORTED_SUFFIXES, load_image
from media.synthetic import affine_chroma_image, corpus_dims, natural_image
from models.frame import ChromaFormat, Frame
from models.schemas import RunConfig

logger = get_logger(__name__)

NamedFrame = Tuple[str, Frame]


def expand_inputs(inputs: List[str]) -> List[Path]:
    """Files as given; directories contribute their .y4m/.ppm files in name order."""
    paths: List[Path] = []
    for raw in inputs:
        path = Path(raw)
        if not path.exists():
            raise InputNotFoundError(raw)
        if path.is_dir():
            paths.extend(sorted(p for p in path.iterdir() if p.suffix.lower() in SUPPORTED_SUFFIXES))
        else:
            paths.append(path)
    return paths


def synthetic_corpus(count: int, seed: int, fmt: ChromaFormat, affine: bool = False, block: int = 8) -> List[NamedFrame]:
    frames = []
    for index in range(count):
        width, height = corpus_dims(index)
        if affine:
            frame = affine_chroma_image(seed + index, width, height, block=block, fmt=fmt)
            name = f"affine-{seed + index:04d}"
        else:
            frame = natural_image(seed + index, width, height, fmt=fmt)
            name = f"synthetic-{seed + index:04d}"
        frames.append((name, frame))
    return frames


def load_corpus(config: RunConfig) -> List[NamedFrame]:
    """All frames of a run, named for result tables; raises EmptyCorpus when nothing is left."""
    fmt = ChromaFormat.from_tag(config.chroma_format)
    corpus: List[NamedFrame] = []
    for path in expand_inputs(config.inputs):
        corpus.append((path.stem, load_image(path, fmt)))
    corpus.extend(synthetic_corpus(config.synthetic, config.seed, fmt, config.affine, config.block_size))

    if not corpus:
        raise EmptyCorpus("no input images; pass --input or --synthetic N")
    names = [name for name, _ in corpus]
    if len(set(names)) != len(names):
        # Same stem from two directories: disambiguate by position.
        corpus = [(f"{i:03d}-{name}", frame) for i, (name, frame) in enumerate(corpus)]
    logger.info(f"Corpus ready: {len(corpus)} image(s)")
    return corpus
