"""Command line entry point: ``iqrquant {bench,verify,gen-weights,gen-input,eval}``.

Exit codes: 0 success, 1 usage error, 2 I/O or file-format error,
3 verification failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from contextlib import contextmanager

from ..ffn import Activation, FfnMode
from ..tmiqr import TUKEY_SCALE
from .bench import OUTLIER_SITES, BenchConfig, evaluate, run_bench, write_csv
from .fileio import FormatError, load_activations, load_weights, save_activations, save_weights
from .synthetic import SyntheticSpec, gen_synthetic, random_weights
from .verify import verify

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_VERIFY = 3

DEFAULT_HIDDEN = 1024

log = logging.getLogger("iqrquant")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _modes(text: str) -> tuple[FfnMode, ...]:
    try:
        modes = tuple(FfnMode(m.strip().lower()) for m in text.split(",") if m.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid modes {text!r}; choose from fp32,i8,tmiqr")
    if not modes:
        raise argparse.ArgumentTypeError("at least one mode is required")
    return modes


def _activation(text: str) -> Activation:
    try:
        return Activation[text.upper()]
    except KeyError:
        raise argparse.ArgumentTypeError(f"invalid activation {text!r}; choose relu or gelu")


def _quant_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--modes", type=_modes, default=(FfnMode.FP32, FfnMode.I8, FfnMode.TMIQR),
                   help="comma separated subset of fp32,i8,tmiqr")
    p.add_argument("--bits", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--iqr-scale", type=float, default=TUKEY_SCALE)
    p.add_argument("--rounding", choices=("nearest", "floor"), default="nearest")
    p.add_argument("--clip-ff1", action="store_true", help="also clip the FF1 input in tmiqr mode")
    p.add_argument("--warmup", type=int, default=3)
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--report", help="CSV output path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="iqrquant", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    bench = sub.add_parser("bench", help="time and score FFN modes on synthetic inputs")
    bench.add_argument("--seq-len", type=int, default=512)
    bench.add_argument("--hidden", type=int, default=None, help=f"H (default {DEFAULT_HIDDEN})")
    bench.add_argument("--seeds", type=int, default=5)
    bench.add_argument("--outlier-frac", type=float, default=0.02)
    bench.add_argument("--outlier-mag", type=float, default=50.0)
    bench.add_argument("--outlier-site", choices=OUTLIER_SITES, default="hidden")
    bench.add_argument("--weights", help="load weights instead of generating them per seed")
    bench.add_argument("--threads", type=int, default=1)
    _quant_flags(bench)

    ver = sub.add_parser("verify", help="check tm_iqr_clip against the naive reference")
    ver.add_argument("--count", type=int, default=1000)
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--iqr-scale", type=float, default=TUKEY_SCALE)

    gw = sub.add_parser("gen-weights", help="write random FFN weights")
    gw.add_argument("--hidden", type=int, default=DEFAULT_HIDDEN)
    gw.add_argument("--seed", type=int, default=0)
    gw.add_argument("--activation", type=_activation, default=Activation.GELU)
    gw.add_argument("--weights", required=True, help="output path")

    gi = sub.add_parser("gen-input", help="write a synthetic activation dump")
    gi.add_argument("--seq-len", type=int, default=512)
    gi.add_argument("--hidden", type=int, default=DEFAULT_HIDDEN)
    gi.add_argument("--seed", type=int, default=0)
    gi.add_argument("--outlier-frac", type=float, default=0.0)
    gi.add_argument("--outlier-mag", type=float, default=1.0)
    gi.add_argument("--input", required=True, help="output path")

    ev = sub.add_parser("eval", help="score FFN modes on a saved input and weight file")
    ev.add_argument("--weights", required=True)
    ev.add_argument("--input", required=True)
    _quant_flags(ev)
    return parser


@contextmanager
def _report_stream(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="") as f:
            yield f


def _config(args, **extra) -> BenchConfig:
    return BenchConfig(
        modes=args.modes,
        bits=args.bits,
        seed=args.seed,
        iqr_scale=args.iqr_scale,
        rounding=args.rounding,
        clip_ff1=args.clip_ff1,
        warmup=args.warmup,
        reps=args.reps,
        **extra,
    )


def _cmd_bench(args) -> int:
    weights = load_weights(args.weights) if args.weights else None
    hidden = args.hidden
    if weights is not None:
        if hidden is not None and hidden != weights.hidden:
            raise UsageError(f"--hidden {hidden} conflicts with H={weights.hidden} in {args.weights}")
        hidden = weights.hidden
    config = _config(
        args,
        seq_len=args.seq_len,
        hidden=hidden or DEFAULT_HIDDEN,
        seeds=args.seeds,
        outlier_frac=args.outlier_frac,
        outlier_mag=args.outlier_mag,
        outlier_site=args.outlier_site,
        threads=args.threads,
        weights=weights,
    )
    try:
        config.validate()
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    reports = run_bench(config)
    with _report_stream(args.report) as out:
        write_csv(reports, out)
    for r in reports:
        if r.mode == FfnMode.TMIQR.value:
            log.info("seed %d: clip overhead %.2f%%", r.seed, 100 * r.clip_overhead)
    return EXIT_OK


def _cmd_eval(args) -> int:
    weights = load_weights(args.weights)
    x = load_activations(args.input)
    if x.cols != weights.hidden:
        raise UsageError(f"input has H={x.cols} but weights have H={weights.hidden}")
    config = _config(args, seq_len=x.rows, hidden=weights.hidden, seeds=1, weights=weights)
    try:
        config.validate()
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    reports = evaluate(x, weights, config)
    with _report_stream(args.report) as out:
        write_csv(reports, out)
    return EXIT_OK


def _cmd_verify(args) -> int:
    if args.count < 1:
        raise UsageError("--count must be >= 1")
    result = verify(args.count, args.seed, args.iqr_scale)
    for line in result.failures[:20]:
        print(line, file=sys.stderr)
    status = "ok" if result.ok else "FAILED"
    print(f"verify: {result.checked} tensors, {len(result.failures)} mismatches: {status}")
    return EXIT_OK if result.ok else EXIT_VERIFY


def _cmd_gen_weights(args) -> int:
    if args.hidden < 1:
        raise UsageError("--hidden must be positive")
    save_weights(args.weights, random_weights(args.hidden, args.seed, args.activation))
    return EXIT_OK


def _cmd_gen_input(args) -> int:
    try:
        spec = SyntheticSpec(args.seq_len, args.hidden, args.seed, args.outlier_frac, args.outlier_mag)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    save_activations(args.input, gen_synthetic(spec))
    return EXIT_OK


COMMANDS = {
    "bench": _cmd_bench,
    "eval": _cmd_eval,
    "verify": _cmd_verify,
    "gen-weights": _cmd_gen_weights,
    "gen-input": _cmd_gen_input,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"iqrquant: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, FormatError) as exc:
        print(f"iqrquant: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
