"""CLI: export SSL layer features or the prosody stream to DQF1 files."""

import argparse
import sys
from pathlib import Path

from .errors import FeatexportError
from .export import ExportSpec, export_layer, export_prosody


def _build_parser():
    parser = argparse.ArgumentParser(prog="featexport",
                                     description="export speech features to DQF1")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("export", help="export features for 16 kHz mono WAVs")
    p.add_argument("wavs", nargs="+", help="input WAV files")
    p.add_argument("--layer", type=int, choices=(6, 12), default=6,
                   help="SSL layer to export (6 phonetic, 12 prosodic)")
    p.add_argument("--prosody", action="store_true",
                   help="export the 1026-dim prosody stream "
                        "(layer 12 + loudness + z-normed log-F0)")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--model-path", default=None,
                   help="local model directory (default: transformers cache)")
    p.add_argument("--backend", choices=("wavlm", "fbank"), default="wavlm",
                   help="fbank is a deterministic stand-in for dry runs "
                        "without model weights")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    out_dir = Path(args.out_dir)
    try:
        if args.prosody:
            from .backends import make_backend
            backend = make_backend(args.backend, args.model_path)
            out_dir.mkdir(parents=True, exist_ok=True)
            for wav in args.wavs:
                path = export_prosody(wav, out_dir / (Path(wav).stem + ".dqf"),
                                      backend=backend)
                print(f"wrote {path}")
        else:
            spec = ExportSpec(wav_paths=args.wavs, layer=args.layer,
                              out_dir=out_dir, backend_name=args.backend,
                              model_path=args.model_path)
            for path in export_layer(spec):
                print(f"wrote {path}")
        return 0
    except FeatexportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
