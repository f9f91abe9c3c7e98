"""Command-line interface: ``linext {generate,estimate,exact,rv,experiment,plot}``.

Exit codes: 0 success, 1 usage or input error, 2 exact computation too large.
"""

import argparse
import logging
import sys
from pathlib import Path

from . import oracle, variance
from .errors import CycleError, PosetParseError, SizeLimitError
from .experiment import ExperimentConfig, read_summary, write_experiment
from .poset import format_poset, load_poset, random_poset
from .sis import ImportanceSpec, log_of, lower_bound_exact, run_batch

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_SIZE = 2

SPEC_CHOICES = ["uniform", "desc", "descendants", "asq"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(x):
    if isinstance(x, int):
        return str(x)
    return f"{x:.17g}"


def _n_values(text):
    try:
        values = [int(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of sizes, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of sizes, got {text!r}")
    return values


def _n_range(text):
    # accepts "10,15,20" or "10:40:5" (inclusive stop)
    if ":" in text:
        parts = [int(v) for v in text.split(":")]
        if len(parts) != 3 or parts[2] < 1:
            raise argparse.ArgumentTypeError(f"expected START:STOP:STEP, got {text!r}")
        start, stop, step = parts
        return list(range(start, stop + 1, step))
    return _n_values(text)


def cmd_generate(args, out):
    p = random_poset(args.n, args.edge_prob, args.seed)
    text = format_poset(p)
    if args.out:
        try:
            Path(args.out).write_text(text)
        except OSError as exc:
            raise OSError(f"cannot write {args.out}: {exc.strerror}") from exc
    else:
        out.write(text)
    return EXIT_OK


def cmd_estimate(args, out):
    p = load_poset(args.poset)
    spec = ImportanceSpec(args.spec)
    if args.samples < 1:
        raise UsageError("--samples must be at least 1")
    stats = run_batch(
        p, spec, args.samples, args.seed,
        recursive=args.recursive, workers=args.workers,
        track_forest=spec.kind == "descendants",
    )
    lines = [
        ("algorithm", "recursive" if args.recursive else "single"),
        ("spec", spec.kind),
        ("samples", stats.samples),
        ("mean_estimate", stats.mean_estimate),
        ("log_mean_estimate", stats.mean_log_estimate),
        ("relative_variance", stats.relative_variance),
        ("std_error", stats.std_error),
    ]
    if spec.kind == "descendants":
        low = lower_bound_exact(p)
        lines.append(("lower_bound", float(low)))
        lines.append(("log_lower_bound", log_of(low)))
        if stats.best_upper_bound is not None:
            lines.append(("log_best_upper_bound", stats.best_upper_bound))
    for key, value in lines:
        out.write(f"{key}: {_fmt(value) if not isinstance(value, str) else value}\n")
    return EXIT_OK


def cmd_exact(args, out):
    p = load_poset(args.poset)
    out.write(f"{oracle.exact_count(p, limit=args.limit)}\n")
    return EXIT_OK


def cmd_rv(args, out):
    p = load_poset(args.poset)
    spec = ImportanceSpec(args.spec)
    explicit = variance.rv_explicit(p, spec)
    recursive = variance.rv_recursive(p, spec)
    out.write(f"spec: {spec.kind}\n")
    out.write(f"rv_explicit: {_fmt(explicit)}\n")
    out.write(f"rv_recursive: {_fmt(recursive)}\n")
    out.write(f"difference: {_fmt(explicit - recursive)}\n")
    return EXIT_OK


def _experiment_config(args):
    specs = args.spec or ["uniform", "descendants", "asq"]
    modes = {"plain": (False,), "recursive": (True,), "both": (False, True)}
    mode = "recursive" if args.recursive else args.mode
    common = dict(
        edge_prob=args.edge_prob,
        specs=tuple(specs),
        recursive=modes[mode],
        master_seed=args.seed,
        output=args.out,
    )
    if args.paper_scale:
        if args.n_values:
            common["n_values"] = args.n_values
        return ExperimentConfig.paper(**common)
    return ExperimentConfig(
        n_values=args.n_values or list(range(10, 45, 5)),
        posets_per_n=args.posets_per_n,
        samples_per_poset=args.samples,
        **common,
    )


def cmd_experiment(args, out):
    try:
        config = _experiment_config(args)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if config.paper_scale:
        logging.getLogger(__name__).warning(
            "paper scale runs n^2 posets x n^2 samples up to n=%d; expect hours of compute",
            max(config.n_values),
        )
    rows, summary = write_experiment(config, workers=args.workers)
    out.write(f"rows: {len(rows)} -> {config.output}\n")
    out.write(f"summary: {len(summary)} -> {config.summary_path()}\n")
    if args.plot:
        from .plotting import render_report

        target = Path(config.output)
        for path in render_report(summary, target.parent, stem=target.stem):
            out.write(f"figure: {path}\n")
    return EXIT_OK


def cmd_plot(args, out):
    from .plotting import render_report

    summary = read_summary(args.summary)
    out_dir = args.out or Path(args.summary).parent
    stem = Path(args.summary).stem.removesuffix("_summary")
    for path in render_report(summary, out_dir, stem=stem):
        out.write(f"figure: {path}\n")
    return EXIT_OK


def build_parser():
    parser = _Parser(prog="linext", description="Estimate and count linear extensions of posets.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write a random .poset file")
    g.add_argument("n", type=int)
    g.add_argument("--edge-prob", type=float, default=0.2)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", help="output path (default: stdout)")
    g.set_defaults(func=cmd_generate)

    e = sub.add_parser("estimate", help="sampling estimate of the extension count")
    e.add_argument("poset")
    e.add_argument("--spec", choices=SPEC_CHOICES, default="uniform")
    e.add_argument("--samples", type=int, default=1000)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--recursive", action="store_true", help="use the connected-components recursion")
    e.add_argument("--workers", type=int, default=1)
    e.set_defaults(func=cmd_estimate)

    x = sub.add_parser("exact", help="exact extension count (small posets)")
    x.add_argument("poset")
    x.add_argument("--limit", type=int, default=oracle.DEFAULT_SIZE_LIMIT)
    x.set_defaults(func=cmd_exact)

    r = sub.add_parser("rv", help="exact relative variance of the single-path estimator")
    r.add_argument("poset")
    r.add_argument("--spec", choices=SPEC_CHOICES, default="uniform")
    r.set_defaults(func=cmd_rv)

    m = sub.add_parser("experiment", help="random-poset relative variance experiment")
    m.add_argument("--n-values", type=_n_range, default=None,
                   help="sizes as 10,15,20 or START:STOP:STEP (default 10:40:5)")
    m.add_argument("--edge-prob", type=float, default=0.2)
    m.add_argument("--posets-per-n", type=int, default=64)
    m.add_argument("--samples", type=int, default=256)
    m.add_argument("--spec", choices=SPEC_CHOICES, action="append",
                   help="importance kind (repeatable; default all three)")
    m.add_argument("--mode", choices=["plain", "recursive", "both"], default="both")
    m.add_argument("--recursive", action="store_true", help="shorthand for --mode recursive")
    m.add_argument("--paper-scale", action="store_true",
                   help="n = 10..150 step 5 with n^2 posets and n^2 samples (hours)")
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--workers", type=int, default=1)
    m.add_argument("--out", default="experiment.csv")
    m.add_argument("--plot", action="store_true", help="also render log-log figures next to the CSV")
    m.set_defaults(func=cmd_experiment)

    pl = sub.add_parser("plot", help="render figures from a summary CSV")
    pl.add_argument("summary")
    pl.add_argument("--out", help="directory for the figures (default: next to the CSV)")
    pl.set_defaults(func=cmd_plot)
    return parser


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
    )
    try:
        return args.func(args, out)
    except SizeLimitError as exc:
        print(f"linext: {exc}; try `linext estimate` instead", file=sys.stderr)
        return EXIT_SIZE
    except (PosetParseError, CycleError, UsageError, ValueError) as exc:
        print(f"linext: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"linext: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
