"""Command-line entry point: ladfex --manifest m.csv --model dir --out f.ladf"""

from __future__ import annotations

import argparse
import sys

from .encoder import Encoder
from .errors import ExtractorError
from .extract import extract
from .manifest import DEFAULT_EMOTIONS, load_manifest


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ladfex",
        description="Pool pretrained speech-encoder layers into an LADF file",
    )
    parser.add_argument("--manifest", required=True,
                        help="CSV: audio_path,utt_id,split,emotion,alignment_path")
    parser.add_argument("--model", required=True,
                        help="pretrained model directory or identifier")
    parser.add_argument("--out", required=True, help="output LADF path")
    parser.add_argument("--corpus-name", default="extracted")
    parser.add_argument("--expect-layers", type=int, required=True)
    parser.add_argument("--expect-dim", type=int, required=True)
    parser.add_argument("--emotions", default=",".join(DEFAULT_EMOTIONS),
                        help="comma-separated class list defining label indices")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        manifest = load_manifest(
            args.manifest, emotions=args.emotions.split(",")
        )
        encoder = Encoder(args.model)
        written, skips = extract(
            manifest, encoder, args.out,
            corpus_name=args.corpus_name,
            expected_layers=args.expect_layers,
            expected_dim=args.expect_dim,
        )
    except ExtractorError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    for utt_id, reason in skips.skipped:
        print(f"skipped {utt_id}: {reason}", file=sys.stderr)
    print(f"{args.out}: {written} record(s), {len(skips.skipped)} skipped")
    return 0


if __name__ == "__main__":
    sys.exit(main())
