"""Image loading for the evaluation corpus."""

from pathlib import Path
from typing import Union

from exceptions import InputNotFoundError, ValidationError
from logging_config import get_logger
from media.color import chroma_downsample, rgb_to_ycbcr
from media.y4m import read_y4m, read_ppm
from models.frame import ChromaFormat, Frame

logger = get_logger(__name__)

SUPPORTED_SUFFIXES = (".y4m", ".ppm")


def load_image(path: Union[str, Path], target_format: ChromaFormat = ChromaFormat.YUV420) -> Frame:
    """Load the first frame of a Y4M stream, or a PPM converted to `target_format`.

    Y4M inputs keep their own chroma geometry and bit depth.
    """
    path = Path(path)
    if not path.exists():
        raise InputNotFoundError(str(path))

    suffix = path.suffix.lower()
    if suffix == ".y4m":
        header, frames = read_y4m(path)
        if not frames:
            raise ValidationError(f"{path} holds no frames", details={"path": str(path)})
        if len(frames) > 1:
            logger.info(f"{path.name}: using the first of {len(frames)} frames")
        return frames[0]
    if suffix == ".ppm":
        r, g, b = read_ppm(path)
        return chroma_downsample(rgb_to_ycbcr(r, g, b), target_format)

    raise ValidationError(
        f"unsupported input type {suffix!r}; convert to .y4m or .ppm",
        details={"path": str(path)}
    )
