"""Command-line entry point.

Subcommands: ``gen-instances``, ``tune``, ``train``, ``evaluate`` and
``plot-data``.  Global flags (accepted before or after the subcommand):
``--config <file>``, ``--seed <u64>``, ``--out <dir>``, ``--threads <n>``.

On failure a single line ``error kind=<kind> message=<json string>`` goes to
stderr and the exit status is nonzero (2 for invalid arguments, 3 for missing
files, 1 otherwise).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .exceptions import InvalidArgumentError
from .harness.config import ExperimentConfig, format_config, read_config
from .harness.evaluation import evaluate, tune_baseline
from .harness.experiment import emit_plotdata, eval_seed, experiment_metric_files, instance_sets, run_experiment
from .net.checkpoint import load_params
from .problems import PROBLEM_CLASSES, load_instance, make_instance_set, save_instance

EXIT_INVALID, EXIT_MISSING, EXIT_OTHER = 2, 3, 1


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InvalidArgumentError(message)


def _global_flags(parser, suppress):
    d = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", default=d, help="flat key = value config file")
    parser.add_argument("--seed", type=int, default=d, help="master seed (u64)")
    parser.add_argument("--out", default=d, help="output directory")
    parser.add_argument("--threads", type=int, default=d, help="worker threads")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="learnevo", description="Learned parameter control for evolutionary algorithms.")
    _global_flags(p, suppress=False)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen-instances", help="generate problem instances as text files")
    _global_flags(g, suppress=True)
    g.add_argument("--class", dest="problem_class", choices=PROBLEM_CLASSES)
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--n", type=int, default=None, help="items or nodes")
    g.add_argument("--w-max", type=float, default=10.0)

    t = sub.add_parser("tune", help="grid-search the static baseline parameters")
    _global_flags(t, suppress=True)
    t.add_argument("--instances", default=None, help="directory of instance files (default: training set)")

    tr = sub.add_parser("train", help="train and evaluate agents; writes an experiment directory")
    _global_flags(tr, suppress=True)

    e = sub.add_parser("evaluate", help="evaluate a checkpoint or the baseline")
    _global_flags(e, suppress=True)
    e.add_argument("--checkpoint", default=None, help="checkpoint file (omit for the baseline)")
    e.add_argument("--instances", default=None, help="directory of instance files (default: validation set)")
    e.add_argument("--sample", action="store_true", help="sample actions instead of taking distribution means")

    pd = sub.add_parser("plot-data", help="long-format CSV for plotting")
    _global_flags(pd, suppress=True)
    pd.add_argument("--experiment", default=None, help="experiment directory (default: --out)")
    pd.add_argument("--metrics", nargs="*", default=None, help="explicit metrics files")
    return p


def _experiment_config(args, **extra) -> ExperimentConfig:
    values = read_config(args.config) if args.config else {}
    return ExperimentConfig.from_mapping(values, seed=args.seed, threads=args.threads, **extra)


def _load_dir(path):
    files = sorted(Path(path).glob("*.txt"))
    if not files:
        raise FileNotFoundError(f"no instance files in {path}")
    return [load_instance(f) for f in files]


def _out(args, default):
    return Path(args.out if args.out else default)


def cmd_gen_instances(args):
    values = read_config(args.config) if args.config else {}
    kind = args.problem_class or values.get("problem_class")
    if kind is None:
        raise InvalidArgumentError("--class (or problem_class in the config) is required")
    out = _out(args, "instances")
    out.mkdir(parents=True, exist_ok=True)
    seed = args.seed if args.seed is not None else int(values.get("seed", 0))
    insts = make_instance_set(kind, args.count, seed, n=args.n, w_max=args.w_max)
    for k, inst in enumerate(insts):
        save_instance(inst, out / f"instance_{k}.txt")
    print(f"wrote {len(insts)} instances to {out}")


def cmd_tune(args):
    cfg = _experiment_config(args)
    problems = _load_dir(args.instances) if args.instances else instance_sets(cfg)[0]
    res = tune_baseline(problems, cfg.grid or None, cfg.evolution, cfg.eval_runs, cfg.seed, cfg.threads)
    out = _out(args, "tune")
    res.to_csv(out / "grid.csv")
    best = {f"ea.{k}": (repr(v) if isinstance(v, float) else v) for k, v in res.best.as_dict().items()}
    (out / "best.cfg").write_text(format_config(best), encoding="utf-8")
    print(" ".join(f"{k}={best['ea.' + k]}" for k in res.keys))


def cmd_train(args):
    cfg = _experiment_config(args)
    if cfg.method == "baseline":
        raise InvalidArgumentError("train needs an adaptation method (set 'method' in the config)")
    out = run_experiment(cfg, _out(args, "experiment"))
    print(f"wrote {out}")


def cmd_evaluate(args):
    cfg = _experiment_config(args)
    problems = _load_dir(args.instances) if args.instances else instance_sets(cfg)[1]
    policy = load_params(args.checkpoint) if args.checkpoint else None
    m = evaluate(policy, problems, cfg.eval_runs, cfg.evolution, eval_seed(cfg), not args.sample, cfg.threads)
    out = _out(args, "evaluation")
    m.to_csv(out / "metrics.csv")
    print(f"{m.metric}={m.terminal!r}")


def cmd_plot_data(args):
    if args.metrics:
        files = args.metrics
    else:
        files = experiment_metric_files(args.experiment or args.out or ".")
    out = _out(args, ".")
    target = out / "plotdata.csv"
    emit_plotdata(files, target)
    print(f"wrote {target}")


COMMANDS = {
    "gen-instances": cmd_gen_instances,
    "tune": cmd_tune,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "plot-data": cmd_plot_data,
}


def _fail(kind, exc, code):
    print(f"error kind={kind} message={json.dumps(str(exc))}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.seed is not None and not 0 <= args.seed < 2**64:
            raise InvalidArgumentError("--seed must be an unsigned 64-bit integer")
        if args.threads is not None and args.threads < 1:
            raise InvalidArgumentError("--threads must be >= 1")
        COMMANDS[args.command](args)
    except InvalidArgumentError as exc:
        return _fail(getattr(exc, "kind", "invalid-argument"), exc, EXIT_INVALID)
    except FileNotFoundError as exc:
        return _fail("missing-file", exc, EXIT_MISSING)
    except Exception as exc:  # one machine-readable line, never a traceback
        return _fail(getattr(exc, "kind", type(exc).__name__), exc, EXIT_OTHER)
    return 0


if __name__ == "__main__":
    sys.exit(main())
