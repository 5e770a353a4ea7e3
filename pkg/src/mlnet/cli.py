"""Command-line entry point.

Subcommands::

    mlnet simulate   --n 400 --layers 15 --ks 3 --kr 5 --rho 0.2 --out net.edges
    mlnet estimate   --in net.edges [--min-weight 100] [--k-cand 10] --out traces/
    mlnet stat       --in net.edges --ks 3 --kr 5
    mlnet experiment --config exp.cfg --out results/

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
The seed defaults to ``$MLNET_SEED`` and then to 0.
"""
import argparse
import logging
import math
import os
import sys
from pathlib import Path

from mlnet import harness
from mlnet.exceptions import MLNetError, NumericalFailureError
from mlnet.gof import StatisticEvaluator
from mlnet.io import (
    format_float,
    load_config,
    read_multiplex_edgelist,
    write_multiplex_edgelist,
    write_table_csv,
    write_trace_csv,
)
from mlnet.model import GeneratorConfig, simulate
from mlnet.selection import (
    SelectionConfig,
    candidate_sequence,
    level_scan,
    ratio_scan,
)

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _seed(args):
    if args.seed is not None:
        return args.seed
    env = os.environ.get("MLNET_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"MLNET_SEED must be an integer, got {env!r}") from None
    return 0


def build_parser():
    p = _Parser(prog="mlnet", description="Community-number selection for multi-layer directed networks")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def common(sp):
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--out", default=None)
        sp.add_argument("-v", "--verbose", action="store_true")

    sp = sub.add_parser("simulate", help="sample a planted network and write it as an edge list")
    common(sp)
    sp.add_argument("--config", help="key=value file with gen.* entries")
    sp.add_argument("--n", type=int)
    sp.add_argument("--layers", type=int)
    sp.add_argument("--ks", type=int)
    sp.add_argument("--kr", type=int)
    sp.add_argument("--rho", type=float)
    sp.add_argument("--labels", help="also write true labels to this CSV")

    for name, helptext in (("estimate", "run both selectors on an edge list"),
                           ("stat", "compute the statistic for one candidate pair")):
        sp = sub.add_parser(name, help=helptext)
        common(sp)
        sp.add_argument("--in", dest="input", required=True)
        sp.add_argument("--min-weight", type=float, default=0.0)
        if name == "stat":
            sp.add_argument("--ks", type=int, required=True)
            sp.add_argument("--kr", type=int, required=True)
        else:
            sp.add_argument("--k-cand", type=int)
            sp.add_argument("--t-exponent", type=float)
            tau = sp.add_mutually_exclusive_group()
            tau.add_argument("--tau-scale", type=float)
            tau.add_argument("--tau-const", type=float)
            sp.add_argument("--full-scan", action="store_true",
                            help="also evaluate every candidate and write scan.csv")

    sp = sub.add_parser("experiment", help="run a Monte Carlo experiment")
    common(sp)
    sp.add_argument("--config", help="key=value file with exp.* entries")
    sp.add_argument("--id", choices=harness.EXPERIMENTS)
    sp.add_argument("--reps", type=int)
    sp.add_argument("--full", action="store_true", help="full-size grids, 200 replications (slow)")
    sp.add_argument("--jobs", type=int, default=1)
    return p


def _cmd_simulate(args):
    section = load_config(args.config).get("gen", {}) if args.config else {}
    values = {}
    for key, flag in (("n", "n"), ("L", "layers"), ("K_s", "ks"), ("K_r", "kr"), ("rho", "rho")):
        raw = getattr(args, flag)
        if raw is None:
            raw = section.get(key, section.get(flag))
        if raw is None:
            raise UsageError(f"simulate: missing --{flag}")
        values[key] = float(raw) if key == "rho" else int(raw)
    seed = args.seed if args.seed is not None else int(section.get("seed", _seed(args)))
    planted = simulate(GeneratorConfig(seed=seed, **values))
    if args.out is None:
        raise UsageError("simulate: --out is required")
    write_multiplex_edgelist(planted.network, args.out)
    if args.labels:
        rows = [{"node": i, "sender": int(s), "receiver": int(r)}
                for i, (s, r) in enumerate(zip(planted.sender.labels, planted.receiver.labels))]
        write_table_csv(rows, args.labels, ("node", "sender", "receiver"))
    print(f"wrote n={planted.network.n} L={planted.network.L} to {args.out}")
    return EXIT_OK


def _cmd_stat(args):
    net, _ = read_multiplex_edgelist(args.input, args.min_weight)
    stat = StatisticEvaluator(net, _seed(args)).evaluate(args.ks, args.kr)
    print(format_float(stat.t_hat))
    return EXIT_OK


def _cmd_estimate(args):
    net, report = read_multiplex_edgelist(args.input, args.min_weight)
    seed = _seed(args)
    cfg = SelectionConfig.from_parameters(
        net.n, t_exponent=args.t_exponent, tau_scale=args.tau_scale,
        tau_const=args.tau_const, k_cand=args.k_cand, seed=seed,
    )
    ev = StatisticEvaluator(net, seed)
    level_pair, level_trace = level_scan(ev, cfg.t_n, cfg.k_cand)
    ratio_pair, ratio_trace = ratio_scan(ev, cfg.t_n, cfg.tau_n, cfg.k_cand)
    print(f"n={net.n} L={net.L} edges={report.n_edges} self_loops_dropped={report.n_self_loops}")
    print(f"t_n={format_float(cfg.t_n)} tau_n={format_float(cfg.tau_n)} K_cand={cfg.k_cand}")
    print(f"mldigof {level_pair.k_s} {level_pair.k_r} ({level_trace.stop_reason})")
    print(f"mlrdigof {ratio_pair.k_s} {ratio_pair.k_r} ({ratio_trace.stop_reason})")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_trace_csv(level_trace, out / "mldigof_trace.csv")
        write_trace_csv(ratio_trace, out / "mlrdigof_trace.csv")
    if args.full_scan:
        pairs = candidate_sequence(cfg.k_cand)
        for pair in pairs:
            ev.evaluate(*pair)
        # a ratio scan that can never trigger records every candidate
        _, scan = ratio_scan(ev, -math.inf, math.inf, cfg.k_cand)
        finite = [e for e in scan.entries[1:] if e.ratio is not None]
        peak = max(finite, key=lambda e: e.ratio)
        print(f"ratio peak m={peak.m} pair=({peak.pair.k_s},{peak.pair.k_r}) r={format_float(peak.ratio)}")
        if args.out:
            write_trace_csv(scan, Path(args.out) / "scan.csv")
    return EXIT_OK


def _cmd_experiment(args):
    if args.config:
        section = dict(load_config(args.config).get("exp", {}))
    else:
        section = {}
    if args.id:
        section["id"] = args.id
    if args.reps is not None:
        section["reps"] = args.reps
    if args.seed is not None or "seed" not in section:
        section["seed"] = _seed(args)
    if "id" not in section:
        raise UsageError("experiment: give --id or a config with exp.id")
    spec = harness.spec_from_mapping(section, full=args.full)
    result = harness.run_experiment(spec, n_jobs=args.jobs)
    out = Path(args.out or ".")
    paths = harness.write_experiment(result, out)
    print(f"wrote {paths['table']}")
    return EXIT_OK


_COMMANDS = {
    "simulate": _cmd_simulate,
    "stat": _cmd_stat,
    "estimate": _cmd_estimate,
    "experiment": _cmd_experiment,
}


def cli_dispatch(argv=None):
    """Run the CLI and return the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(message)s")
        return _COMMANDS[args.command](args)
    except SystemExit as exc:
        return exc.code or EXIT_OK
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except NumericalFailureError as exc:
        print(f"mlnet: numerical failure: {exc} {exc.diagnostics}", file=sys.stderr)
        return EXIT_NUMERIC
    except (MLNetError, OSError, ValueError) as exc:
        print(f"mlnet: {exc}", file=sys.stderr)
        return EXIT_DATA


def main():
    sys.exit(cli_dispatch())


if __name__ == "__main__":
    main()
