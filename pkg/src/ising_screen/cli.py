"""Command line interface: ``ising-screen {generate,sample,fit,experiment,report}``.

Exit codes: 0 success, 1 usage error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import estimators, experiments, report
from .model import ConnectivityMatrix, SampleSet, lattice_topology, random_regular_topology
from .sampler import exact_sample, gibbs_sample

log = logging.getLogger("ising_screen")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ising-screen", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write a connectivity matrix as JSON")
    g.add_argument("--topology", choices=("lattice", "random-regular"), required=True)
    g.add_argument("--side", type=int, help="lattice side length")
    g.add_argument("--coupling", type=float, default=0.5)
    g.add_argument("--p", type=int, help="node count (random-regular)")
    g.add_argument("--degree", type=int, default=3)
    g.add_argument("--weight-low", type=float, default=0.7)
    g.add_argument("--weight-high", type=float, default=0.9)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)

    s = sub.add_parser("sample", help="draw samples from a model")
    s.add_argument("--model", required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--method", choices=("exact", "gibbs"), default="exact")
    s.add_argument("--sweeps", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--header", action="store_true", help="add a z0..z{p-1} header row")
    s.add_argument("--out", required=True)

    f = sub.add_parser("fit", help="estimate the graph from samples")
    f.add_argument("--data", required=True)
    f.add_argument("--validation")
    f.add_argument("--method", choices=estimators.METHODS, required=True)
    f.add_argument("--eta", type=float,
                   help="minimum edge weight; L1 estimates are thresholded at eta/2")
    f.add_argument("--out", required=True)

    e = sub.add_parser("experiment", help="run a Monte-Carlo recovery grid")
    e.add_argument("--config", required=True)
    e.add_argument("--out-dir", required=True)
    e.add_argument("--workers", type=int)
    e.add_argument("--no-plots", action="store_true")

    r = sub.add_parser("report", help="rebuild tables and figures from records.csv")
    r.add_argument("--records", required=True)
    r.add_argument("--out-dir", required=True)
    r.add_argument("--no-plots", action="store_true")
    return parser


def _generate(args) -> None:
    if args.topology == "lattice":
        if args.side is None:
            raise UsageError("--side is required for the lattice topology")
        W = lattice_topology(args.side, args.coupling)
    else:
        if args.p is None:
            raise UsageError("--p is required for the random-regular topology")
        W = random_regular_topology(args.p, args.degree, args.weight_low, args.weight_high, args.seed)
    W.save(args.out)


def _sample(args) -> None:
    W = ConnectivityMatrix.load(args.model)
    if args.method == "exact":
        samples = exact_sample(W, args.n, args.seed)
    else:
        samples = gibbs_sample(W, args.n, args.sweeps, args.seed)
    samples.save_csv(args.out, header=args.header)


def _fit(args) -> None:
    spec = estimators.MethodSpec(args.method)
    if spec.tuning == estimators.VALIDATION and not args.validation:
        raise UsageError(f"--validation is required for {args.method}")
    train = SampleSet.load_csv(args.data)
    val = SampleSet.load_csv(args.validation) if args.validation else None
    est = estimators.fit_graph(train, spec, val, eta=args.eta)
    est.save(args.out)


def _experiment(args) -> None:
    cfg = json.loads(Path(args.config).read_text())
    if args.workers:
        cfg["workers"] = args.workers
    config = experiments.ExperimentConfig.from_dict(cfg)
    records = experiments.run_grid(config, progress=args.verbose)
    out = Path(args.out_dir)
    report.emit_report(records, out, plots=not args.no_plots)
    report.write_timings(records, out / "timings.csv")


def _report(args) -> None:
    records = report.load_records(args.records)
    report.emit_report(records, args.out_dir, plots=not args.no_plots)


COMMANDS = {"generate": _generate, "sample": _sample, "fit": _fit,
            "experiment": _experiment, "report": _report}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except UsageError as err:
        parser.print_usage(sys.stderr)
        print(f"ising-screen: error: {err}", file=sys.stderr)
        return 1
    except (TypeError, KeyError) as err:
        if args.command == "experiment":
            print(f"ising-screen: bad config: {err}", file=sys.stderr)
            return 1
        print(f"ising-screen: {type(err).__name__}: {err}", file=sys.stderr)
        return 2
    except Exception as err:  # noqa: BLE001
        print(f"ising-screen: {type(err).__name__}: {err}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
