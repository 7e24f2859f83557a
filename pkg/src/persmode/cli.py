"""Command-line entry point.

Exit codes: 0 on success, 1 for usage errors, 2 when a command fails at run time.
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings

from . import formats
from .densities import PRESETS, make_density, oracle_diagram, oracle_modes, sample
from .experiments import default_config, rate_summary, sweep
from .metrics import bottleneck
from .modes import CalibrationWarning, EstimatorConfig, estimate_modes, grid_for
from .persistence import estimate_diagram

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _param(text: str) -> tuple[str, object]:
    key, sep, raw = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    for cast in (int, float):
        try:
            return key, cast(raw)
        except ValueError:
            pass
    return key, raw


def parse_n_list(text: str) -> list[int]:
    """Comma list of sample sizes; ``a,...,b`` fills the gap by doubling."""
    tokens = [t.strip() for t in text.split(",") if t.strip()]
    out: list[int] = []
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if tok in ("...", "…"):
            if not out or i + 1 >= len(tokens):
                raise argparse.ArgumentTypeError("'...' needs a value on each side")
            stop = int(tokens[i + 1])
            n = out[-1] * 2
            while n < stop:
                out.append(n)
                n *= 2
            i += 1
            continue
        out.append(int(tok))
        i += 1
    if not out or any(n < 1 for n in out):
        raise argparse.ArgumentTypeError(f"bad sample-size list {text!r}")
    return out


def _add_density(p, required=False):
    p.add_argument("--density", choices=sorted(PRESETS), required=required)
    p.add_argument("--param", action="append", type=_param, default=[], metavar="KEY=VALUE",
                   help="density parameter, repeatable")


def _add_estimator(p, with_l=True):
    p.add_argument("--in", dest="infile", metavar="FILE", help="samples CSV")
    _add_density(p)
    p.add_argument("--n", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=float)
    p.add_argument("--mu", type=float)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--h", type=float, help="grid step, rounded to 1/m")
    group.add_argument("--h-const", type=float, help="c in h = c (log n / n)^(1/(d+2 alpha))")
    if with_l:
        p.add_argument("--l", type=float, help="known lifetime threshold; adaptive when omitted")
    p.add_argument("--dilation", type=int, help="thickening radius in cells, overrides ceil(sqrt(d)/mu)")
    p.add_argument("--out", required=True)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="persmode", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sample", help="draw samples from a reference density")
    _add_density(p, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)

    _add_estimator(sub.add_parser("estimate", help="estimate modes, written as JSON"))
    _add_estimator(sub.add_parser("diagram", help="estimated persistence diagram, written as CSV"), with_l=False)

    p = sub.add_parser("bottleneck", help="bottleneck distance between two diagrams")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)

    p = sub.add_parser("oracle", help="fine-grid diagram and modes of a reference density")
    _add_density(p, required=True)
    p.add_argument("--fine-m", type=int)
    p.add_argument("--out", required=True)

    p = sub.add_parser("sweep", help="Monte Carlo error sweep over sample sizes")
    _add_density(p, required=True)
    p.add_argument("--n-list", type=parse_n_list, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=float)
    p.add_argument("--mu", type=float)
    p.add_argument("--h-const", type=float)
    p.add_argument("--l", type=float)
    p.add_argument("--dilation", type=int)
    p.add_argument("--fine-m", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True)

    p = sub.add_parser("plot", help="SVG scatter of diagrams and modes")
    p.add_argument("--in", dest="infiles", nargs="+", required=True, metavar="FILE")
    p.add_argument("--out", required=True)
    return parser


def _config(args, n: int, with_l: bool = True) -> EstimatorConfig:
    base = dict(PRESETS[args.density].__dict__) if args.density else {}
    alpha = args.alpha if args.alpha is not None else base.get("alpha")
    mu = args.mu if args.mu is not None else base.get("mu")
    if alpha is None or mu is None:
        raise UsageError("--alpha and --mu are required unless --density supplies defaults")
    h_const = args.h_const if args.h_const is not None else base.get("h_const", 1.0)
    return EstimatorConfig(
        alpha=alpha, mu=mu, h_const=h_const, h_override=args.h,
        l_known=args.l if with_l else None, dilation=args.dilation,
    )


def _samples(args):
    if args.infile and args.density:
        raise UsageError("give either --in or --density, not both")
    if args.infile:
        return formats.read_samples(args.infile)
    if not args.density or args.n is None:
        raise UsageError("need --in FILE, or --density with --n")
    return sample(make_density(args.density, **dict(args.param)), args.n, args.seed)


def cmd_sample(args):
    if args.n < 1:
        raise UsageError("--n must be positive")
    formats.write_samples(args.out, sample(make_density(args.density, **dict(args.param)), args.n, args.seed))


def cmd_estimate(args):
    x = _samples(args)
    config = _config(args, len(x))
    est = estimate_modes(x, config)
    doc = formats.estimate_to_json(
        est, n=len(x), alpha=config.alpha, mu=config.mu, h_const=config.h_const,
        dilation=config.dilation, density=args.density, seed=args.seed if args.density else None,
    )
    formats.write_json(args.out, doc)


def cmd_diagram(args):
    x = _samples(args)
    config = _config(args, len(x), with_l=False)
    grid = grid_for(len(x), x.shape[1], config)
    formats.write_diagram_csv(args.out, estimate_diagram(x, grid, config.mu, config.dilation))


def cmd_bottleneck(args):
    d = bottleneck(formats.read_any_diagram(args.a), formats.read_any_diagram(args.b))
    print(repr(d))


def cmd_oracle(args):
    spec = make_density(args.density, **dict(args.param))
    fine_m = args.fine_m or PRESETS[args.density].fine_m
    oracle = oracle_diagram(spec, fine_m)
    modes, values = oracle_modes(spec)
    grid = oracle.diagram.grid
    formats.write_json(args.out, {
        "schema_version": formats.SCHEMA_VERSION,
        "kind": "oracle",
        "density": args.density,
        "params": dict(args.param),
        "dim": grid.dim,
        "cells_per_axis": grid.cells_per_axis,
        "normalizer": spec.normalizer,
        "lipschitz": oracle.lipschitz,
        "diagram": formats.diagram_to_json(oracle.diagram),
        "unstable": list(oracle.unstable),
        "modes": [[float(c) for c in m] for m in modes],
        "values": [float(v) for v in values],
    })


def cmd_sweep(args):
    if args.trials < 1 or args.workers < 1:
        raise UsageError("--trials and --workers must be positive")
    config = default_config(args.density, alpha=args.alpha, mu=args.mu, h_const=args.h_const,
                            l_known=args.l, dilation=args.dilation)
    results = sweep(args.density, args.n_list, args.trials, args.seed, config=config,
                    params=dict(args.param), fine_m=args.fine_m, workers=args.workers)
    formats.write_results_csv(args.out, results)
    summary = {"schema_version": formats.SCHEMA_VERSION, "kind": "rate_summary",
               "density": args.density, **rate_summary(results)}
    formats.write_json(f"{args.out}.summary.json", summary)
    print(json.dumps(summary, indent=2))


def _plot_inputs(paths):
    diagrams, modes = {}, {}
    for path in paths:
        label = str(path).rsplit("/", 1)[-1]
        diagrams[label] = formats.read_any_diagram(path)
        if str(path).endswith(".json"):
            doc = formats.read_json(path)
            if doc.get("kind") == "mode_estimate":
                modes[label] = ([m["location"] for m in doc["modes"]], [m["value"] for m in doc["modes"]])
            elif doc.get("kind") == "oracle":
                modes[label] = (doc["modes"], doc["values"])
    return diagrams, modes


def cmd_plot(args):
    from .plotting import plot_diagrams

    diagrams, modes = _plot_inputs(args.infiles)
    plot_diagrams(diagrams, args.out, modes or None)


COMMANDS = {
    "sample": cmd_sample,
    "estimate": cmd_estimate,
    "diagram": cmd_diagram,
    "bottleneck": cmd_bottleneck,
    "oracle": cmd_oracle,
    "sweep": cmd_sweep,
    "plot": cmd_plot,
}


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always", CalibrationWarning)
            warnings.showwarning = _show_warning
            COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"persmode {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, TypeError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"persmode {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def _show_warning(message, category, filename, lineno, file=None, line=None):
    print(f"warning: {message}", file=sys.stderr)


def main() -> None:
    sys.exit(run_cli())
