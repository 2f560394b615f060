"""Multi-agent experiments and their on-disk layout.

An experiment directory holds::

    config.snapshot            every effective setting, ``key = value``
    checkpoints/agent_<k>.bin  trained network of agent k
    logs/agent_<k>.csv         training progress of agent k
    metrics/agent_<k>.csv      validation curve of agent k
    metrics/baseline.csv       validation curve of the static-parameter EA
    summary.csv                agent, terminal, rank, status

Seeds: the training and validation sets come from ``instance_seed``
(coordinates 0 and 1); agent ``k`` trains with ``derive_seed(seed, 3, k)``
and every evaluation uses ``derive_seed(seed, 2)``.
"""
from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from ..net.checkpoint import save_params
from ..ppo.trainer import train
from ..problems import make_instance_set
from ..validation import derive_seed
from .config import ExperimentConfig, format_config
from .evaluation import evaluate


def instance_sets(cfg: ExperimentConfig):
    """``(training, validation)`` instance lists of the experiment."""
    if cfg.problem_class == "continuous":
        return (
            make_instance_set("continuous", len(cfg.train_functions), 0, functions=cfg.train_functions),
            make_instance_set("continuous", len(cfg.validation_functions), 0, functions=cfg.validation_functions),
        )
    kw = dict(n=cfg.genome_size, w_max=cfg.w_max)
    return (
        make_instance_set(cfg.problem_class, cfg.train_instances, derive_seed(cfg.instance_seed, 0), **kw),
        make_instance_set(cfg.problem_class, cfg.validation_instances, derive_seed(cfg.instance_seed, 1), **kw),
    )


def eval_seed(cfg: ExperimentConfig) -> int:
    return derive_seed(cfg.seed, 2)


def train_agent(cfg: ExperimentConfig, k: int, training, validation, out: Path):
    params = train(
        cfg.method,
        training,
        cfg.ppo,
        cfg.evolution,
        seed=derive_seed(cfg.seed, 3, k),
        log_path=out / "logs" / f"agent_{k}.csv",
        checkpoint_dir=out / "checkpoints" / f"agent_{k}" if cfg.checkpoint_every else None,
        checkpoint_every=cfg.checkpoint_every,
    ).params
    save_params(params, out / "checkpoints" / f"agent_{k}.bin")
    metrics = evaluate(params, validation, cfg.eval_runs, cfg.evolution, eval_seed(cfg), cfg.deterministic)
    metrics.to_csv(out / "metrics" / f"agent_{k}.csv")
    return metrics


def rank_agents(terminals: dict, higher_is_better: bool) -> dict:
    """Rank 1 = best terminal metric; ties share the order of agent ids."""
    order = sorted(terminals, key=lambda k: (-terminals[k] if higher_is_better else terminals[k], k))
    return {k: i + 1 for i, k in enumerate(order)}


def run_experiment(cfg: ExperimentConfig, out_dir) -> Path:
    """Train ``cfg.agents`` agents, evaluate them and the baseline, write the directory."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.snapshot").write_text(format_config(cfg.snapshot()), encoding="utf-8")
    training, validation = instance_sets(cfg)
    base = evaluate(None, validation, cfg.eval_runs, cfg.evolution, eval_seed(cfg), threads=cfg.threads)
    base.to_csv(out / "metrics" / "baseline.csv")

    results, status = {}, {}
    if cfg.method != "baseline":
        def job(k):
            try:
                return k, train_agent(cfg, k, training, validation, out), "ok"
            except Exception as exc:  # a failed agent must not stop the others
                return k, None, f"failed: {type(exc).__name__}: {exc}".replace("\n", " ")

        agents = range(cfg.agents)
        if cfg.threads > 1:
            with ThreadPoolExecutor(cfg.threads) as pool:
                done = list(pool.map(job, agents))
        else:
            done = [job(k) for k in agents]
        for k, metrics, st in done:
            status[k] = st
            if metrics is not None:
                results[k] = metrics.terminal

    ranks = rank_agents(results, base.higher_is_better)
    with open(out / "summary.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["agent", base.metric, "rank", "status"])
        w.writerow(["baseline", repr(base.terminal), "", "ok"])
        for k in sorted(status):
            w.writerow([f"agent_{k}", repr(results[k]) if k in results else "", ranks.get(k, ""), status[k]])
    return out


def emit_plotdata(metric_files, out_path) -> Path:
    """Long-format ``label, generation, value`` CSV from metrics files.

    ``metric_files`` maps series labels to files, or is a list of paths
    labelled by file stem (``baseline.csv`` becomes ``baseline``).  Values are
    copied as text, so they match the sources byte for byte.
    """
    if not isinstance(metric_files, dict):
        metric_files = {Path(p).stem: p for p in metric_files}
    rows = []
    for label, path in metric_files.items():
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"metrics file {path} does not exist")
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            for rec in reader:
                rows.append((label, rec["generation"], rec["value"]))
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["label", "generation", "value"])
        w.writerows(rows)
    return out_path


def experiment_metric_files(exp_dir) -> dict:
    """Series label -> metrics file for an experiment directory (baseline first)."""
    mdir = Path(exp_dir) / "metrics"
    if not mdir.is_dir():
        raise FileNotFoundError(f"{mdir} does not exist")
    files = {}
    if (mdir / "baseline.csv").exists():
        files["baseline"] = mdir / "baseline.csv"
    agents = sorted(mdir.glob("agent_*.csv"), key=lambda p: int(p.stem.split("_")[1]))
    files.update({p.stem: p for p in agents})
    return files
