"""Write the synthetic test corpus to disk as Y4M streams and PPM previews.

    python scripts/make_corpus.py --count 8 --out data/corpus
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "backend"))

from media.color import rgb_planes_from_frame, to_depth  # noqa: E402
from media.y4m import Y4MHeader, write_ppm, write_y4m  # noqa: E402
from models.frame import BitDepth, ChromaFormat  # noqa: E402
from services.corpus_service import synthetic_corpus  # noqa: E402


def parse_args():
    parser = argparse.ArgumentParser(description=__doc__.strip().splitlines()[0])
    parser.add_argument("--count", type=int, default=8)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--format", default="420", choices=["420", "422", "440", "444"])
    parser.add_argument("--depth", type=int, default=8, choices=[8, 10, 12])
    parser.add_argument("--affine", action="store_true")
    parser.add_argument("--out", default="data/corpus")
    return parser.parse_args()


def main():
    args = parse_args()
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    fmt = ChromaFormat.from_tag(args.format)
    depth = BitDepth(args.depth)

    for name, frame in synthetic_corpus(args.count, args.seed, fmt, affine=args.affine):
        # Previews come from the 8-bit frame; the stream carries the requested depth.
        write_ppm(out_dir / f"{name}.ppm", *rgb_planes_from_frame(frame))
        frame = to_depth(frame, depth)
        header = Y4MHeader.build(frame.width, frame.height, fmt, depth)
        write_y4m(out_dir / f"{name}.y4m", header, [frame])
        print(f"Wrote {name} ({frame.width}x{frame.height}, {fmt.tag}, {int(depth)}-bit)")

    print(f"Corpus saved to {out_dir}")


if __name__ == "__main__":
    main()
