"""Command-line pipeline: pool building, conversion, metric analysis, loss eval.

Exit codes: 0 success, 2 file/format problems, 3 dimension/content problems,
4 numeric failures. Every command is deterministic given its inputs and flags
(noise seed defaults to 0). Directory arguments switch analyze/eval/convert
into batch mode; batch rows keep input order and match single-file runs.
"""

import argparse
import sys
import time
from pathlib import Path

from . import formats, fusion, losses, mapper, metrics, synth
from .audio_io import read_wav, require_rate, write_wav
from .errors import (
    ContentError,
    DimMismatchError,
    FileFormatError,
    NumericError,
)

EXIT_OK = 0
EXIT_FORMAT = 2
EXIT_CONTENT = 3
EXIT_NUMERIC = 4


def _fmt(value) -> str:
    if value is None:
        return "NA"
    return format(float(value), ".12g")


def _warn(message: str) -> None:
    print(f"warning: {message}", file=sys.stderr)


def _safe(label: str, fn):
    """Run a metric; degrade to NA (None) on content-level failure."""
    try:
        return fn()
    except ContentError as exc:
        _warn(f"{label}: {exc}")
        return None


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="noise seed (default 0)")
    common.add_argument("--hop", type=int, default=metrics.DEFAULT_HOP,
                        help="analysis hop in samples (default 320)")
    common.add_argument("--m", type=int, default=4, help="mapper candidate count")
    common.add_argument("--lambda-s", dest="lambda_s", type=float, default=1.0)
    common.add_argument("--lambda-jit", dest="lambda_jit", type=float, default=10.0)
    common.add_argument("--lambda-shim", dest="lambda_shim", type=float, default=0.1)
    common.add_argument("--lambda-pro", dest="lambda_pro", type=float, default=0.1)
    common.add_argument("--lambda-f0", dest="lambda_f0", type=float, default=1.0)
    common.add_argument("--fft-filter", dest="fft_filter", type=int, default=1024,
                        help="filter FFT size (power of two)")

    parser = argparse.ArgumentParser(prog="voicemorph",
                                     description="speech anonymisation pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pool-build", parents=[common],
                       help="concatenate feature files into a phone pool")
    p.add_argument("features", nargs="+", help="input feature files (DQF1)")
    p.add_argument("--id", default="target", help="target speaker label")
    p.add_argument("--out", required=True, help="output pool file (DQP1)")
    p.set_defaults(func=cmd_pool_build)

    p = sub.add_parser("convert", parents=[common],
                       help="map, predict parameters, and synthesize")
    p.add_argument("--phon", required=True, help="source phonetic features (DQF1) or dir")
    p.add_argument("--pro", required=True, help="source prosodic features (DQF1) or dir")
    p.add_argument("--pool", required=True, help="target phone pool (DQP1)")
    p.add_argument("--weights", required=True, help="fusion weights (DQW1)")
    p.add_argument("--out", required=True, help="output WAV path or dir")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("analyze", parents=[common],
                       help="clinical voice metrics for a WAV pair")
    p.add_argument("wav_a", help="first WAV or dir")
    p.add_argument("wav_b", help="second WAV or dir")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("eval", parents=[common],
                       help="training-objective losses for a source/conversion pair")
    p.add_argument("wav_src", help="source WAV or dir")
    p.add_argument("wav_conv", help="converted WAV or dir")
    p.add_argument("--f0-pred", dest="f0_pred", default=None,
                   help="optional DQS1 file carrying predicted F0")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", parents=[common],
                       help="render a parameter file to WAV")
    p.add_argument("params", help="parameter file (DQS1)")
    p.add_argument("out_wav", help="output WAV path")
    p.set_defaults(func=cmd_synth)

    return parser


def cmd_pool_build(args) -> int:
    sequences = []
    dim = None
    for path in args.features:
        seq = formats.read_features(path)
        if dim is None:
            dim = seq.dim
        elif seq.dim != dim:
            # dimension clashes between input files are a format-level problem
            print(f"error: {path}: dimension {seq.dim} != {dim} of earlier inputs",
                  file=sys.stderr)
            return EXIT_FORMAT
        sequences.append(seq)
    pool, dropped = mapper.build_pool(sequences, args.id)
    formats.write_pool(args.out, pool)
    print(f"pool {args.out}: P={pool.size} D={pool.dim} dropped={dropped}")
    return EXIT_OK


def _infer_fusion_config(bundle: formats.WeightBundle) -> fusion.FusionConfig:
    """Recover architecture dims from bundle shapes; heads/groups use defaults."""
    shapes = {name: shape for name, shape, _ in bundle.tensors}
    try:
        d_model, d_phon_in, kernel = shapes["enc_phon.conv1.weight"]
        _, d_pro_in, _ = shapes["enc_pro.conv1.weight"]
    except KeyError as exc:
        raise ContentError(f"weight bundle lacks encoder tensors: {exc}") from exc
    n_attn = sum(1 for name in shapes if name.endswith(".ln.scale"))
    return fusion.FusionConfig(d_phon_in=int(d_phon_in), d_pro_in=int(d_pro_in),
                               d_model=int(d_model), kernel_size=int(kernel),
                               n_attn_layers=max(n_attn, 1))


def _convert_one(phon_path, pro_path, pool, net, args, out_path) -> None:
    t0 = time.perf_counter()
    phon = formats.read_features(phon_path)
    pro = formats.read_features(pro_path)
    if phon.n_frames != pro.n_frames:
        raise DimMismatchError(
            f"frame counts differ: phon {phon.n_frames} vs pro {pro.n_frames}"
        )
    if phon.hop_samples != pro.hop_samples:
        raise DimMismatchError(
            f"hops differ: phon {phon.hop_samples} vs pro {pro.hop_samples}"
        )

    t1 = time.perf_counter()
    mapped = mapper.map_sequence(phon, pool, mapper.MapperConfig(n_candidates=args.m))
    t2 = time.perf_counter()
    params = fusion.forward(net, mapped, pro)
    t3 = time.perf_counter()
    cfg = synth.SynthConfig(frame_hop=params.hop_samples,
                            fft_size_filter=args.fft_filter, noise_seed=args.seed)
    audio = synth.synthesize(params, cfg)
    t4 = time.perf_counter()
    write_wav(out_path, audio)

    print(f"wrote {out_path}: {len(audio)} samples ({audio.duration:.3f} s) | "
          f"load {t1 - t0:.3f}s map {t2 - t1:.3f}s fusion {t3 - t2:.3f}s "
          f"synth {t4 - t3:.3f}s")


def cmd_convert(args) -> int:
    pool = formats.read_pool(args.pool)
    bundle = formats.read_weights(args.weights)
    net = fusion.load_weights(bundle, _infer_fusion_config(bundle))

    phon_path = Path(args.phon)
    if phon_path.is_dir():
        pro_dir, out_dir = Path(args.pro), Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        for phon_file in sorted(phon_path.iterdir()):
            if not phon_file.is_file():
                continue
            pro_file = pro_dir / phon_file.name
            if not pro_file.exists():
                raise FileFormatError(f"no prosody features for {phon_file.name}")
            _convert_one(phon_file, pro_file, pool, net, args,
                         out_dir / (phon_file.stem + ".wav"))
    else:
        _convert_one(args.phon, args.pro, pool, net, args, args.out)
    return EXIT_OK


def _analysis_bundle(buf, hop: int):
    """Contour and periods for one buffer, each degrading to None."""
    contour = _safe("f0 extraction", lambda: metrics.extract_f0(
        buf, metrics.DEFAULT_FRAME_LEN, hop))
    periods = None
    if contour is not None:
        periods = _safe("period extraction", lambda: metrics.extract_periods(buf, contour))
    return contour, periods


def _analyze_row(wav_a, wav_b, hop: int) -> list:
    buf_a = require_rate(read_wav(wav_a), 16000)
    buf_b = require_rate(read_wav(wav_b), 16000)
    contour_a, periods_a = _analysis_bundle(buf_a, hop)
    contour_b, periods_b = _analysis_bundle(buf_b, hop)

    ppq5_a = _safe("ppq5(a)", lambda: metrics.jitter_ppq5(periods_a)) \
        if periods_a is not None else None
    ppq5_b = _safe("ppq5(b)", lambda: metrics.jitter_ppq5(periods_b)) \
        if periods_b is not None else None
    shim_a = _safe("shimmer(a)", lambda: metrics.shimmer_local(periods_a)) \
        if periods_a is not None else None
    shim_b = _safe("shimmer(b)", lambda: metrics.shimmer_local(periods_b)) \
        if periods_b is not None else None

    correlation = None
    if contour_a is not None and contour_b is not None:
        t = min(len(contour_a), len(contour_b))
        correlation = _safe("pcc", lambda: metrics.pcc(
            metrics.F0Contour(contour_a.values[:t], hop, buf_a.sample_rate),
            metrics.F0Contour(contour_b.values[:t], hop, buf_b.sample_rate),
        ))

    jit_loss = abs(ppq5_a - ppq5_b) if (ppq5_a is not None and ppq5_b is not None) else None
    shim_loss = abs(shim_a - shim_b) if (shim_a is not None and shim_b is not None) else None
    return [ppq5_a, ppq5_b, shim_a, shim_b, correlation, jit_loss, shim_loss]


ANALYZE_HEADER = "ppq5_a,ppq5_b,shim_a,shim_b,pcc,jitter_loss,shimmer_loss"


def _pair_inputs(a, b):
    """Yield (path_a, path_b, stem) pairs; directories pair by file name."""
    path_a, path_b = Path(a), Path(b)
    if path_a.is_dir():
        for file_a in sorted(path_a.iterdir()):
            if not file_a.is_file():
                continue
            file_b = path_b / file_a.name
            if not file_b.exists():
                raise FileFormatError(f"no counterpart for {file_a.name}")
            yield file_a, file_b, file_a.name
    else:
        yield path_a, path_b, None


def cmd_analyze(args) -> int:
    rows = []
    batch = Path(args.wav_a).is_dir()
    for file_a, file_b, name in _pair_inputs(args.wav_a, args.wav_b):
        row = _analyze_row(file_a, file_b, args.hop)
        rows.append(([name] if batch else []) + [_fmt(v) for v in row])
    with open(args.out, "w") as fh:
        fh.write(("file," if batch else "") + ANALYZE_HEADER + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")
    return EXIT_OK


EVAL_HEADER = "ls,lf0,ljit,lshim,total"


def _eval_row(wav_src, wav_conv, args) -> list:
    buf_src = require_rate(read_wav(wav_src), 16000)
    buf_conv = require_rate(read_wav(wav_conv), 16000)
    n = min(len(buf_src), len(buf_conv))
    if len(buf_src) != len(buf_conv):
        _warn(f"lengths differ ({len(buf_src)} vs {len(buf_conv)}); truncating to {n}")
        buf_src = type(buf_src)(buf_src.samples[:n], buf_src.sample_rate)
        buf_conv = type(buf_conv)(buf_conv.samples[:n], buf_conv.sample_rate)

    ls = _safe("spectral loss", lambda: losses.spectral_loss(
        buf_src.samples, buf_conv.samples))

    src_contour = _safe("f0(src)", lambda: metrics.extract_f0(
        buf_src, metrics.DEFAULT_FRAME_LEN, args.hop))
    if args.f0_pred is not None:
        params = formats.read_params(args.f0_pred)
        if src_contour is not None and params.hop_samples != args.hop:
            _warn(f"--f0-pred hop {params.hop_samples} != analysis hop {args.hop}")
        pred_contour = metrics.F0Contour(params.f0_hz, params.hop_samples, 16000)
    else:
        pred_contour = _safe("f0(conv)", lambda: metrics.extract_f0(
            buf_conv, metrics.DEFAULT_FRAME_LEN, args.hop))

    lf0 = None
    if src_contour is not None and pred_contour is not None:
        t = min(len(src_contour), len(pred_contour))
        lf0 = _safe("f0 loss", lambda: losses.f0_loss(
            metrics.F0Contour(pred_contour.values[:t], pred_contour.hop_samples, 16000),
            metrics.F0Contour(src_contour.values[:t], src_contour.hop_samples, 16000),
        ))

    ljit = _safe("jitter loss", lambda: losses.jitter_loss(buf_src, buf_conv))
    lshim = _safe("shimmer loss", lambda: losses.shimmer_loss(buf_src, buf_conv))

    total = None
    if None not in (ls, lf0, ljit, lshim):
        weights = losses.LossWeights(
            lambda_s=args.lambda_s, lambda_jit=args.lambda_jit,
            lambda_shim=args.lambda_shim, lambda_pro=args.lambda_pro,
            lambda_f0=args.lambda_f0,
        )
        total = losses.total_loss(ls, ljit, lshim, 0.0, lf0, weights)
    return [ls, lf0, ljit, lshim, total]


def cmd_eval(args) -> int:
    rows = []
    batch = Path(args.wav_src).is_dir()
    for file_src, file_conv, name in _pair_inputs(args.wav_src, args.wav_conv):
        row = _eval_row(file_src, file_conv, args)
        rows.append(([name] if batch else []) + [_fmt(v) for v in row])
    with open(args.out, "w") as fh:
        fh.write(f"# lambda_s={args.lambda_s} lambda_jit={args.lambda_jit} "
                 f"lambda_shim={args.lambda_shim} lambda_pro={args.lambda_pro} "
                 f"lambda_f0={args.lambda_f0}\n")
        fh.write(("file," if batch else "") + EVAL_HEADER + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")
    return EXIT_OK


def cmd_synth(args) -> int:
    params = formats.read_params(args.params)
    cfg = synth.SynthConfig(frame_hop=params.hop_samples,
                            fft_size_filter=args.fft_filter, noise_seed=args.seed)
    audio = synth.synthesize(params, cfg)
    write_wav(args.out_wav, audio)
    print(f"wrote {args.out_wav}: {len(audio)} samples")
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except (ContentError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONTENT
    except (NumericError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
