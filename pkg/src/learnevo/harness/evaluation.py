"""Mean-best-fitness evaluation and baseline grid-search tuning.

Run ``r`` on instance ``i`` always draws from ``derive_rng(seed, i, r)``, so a
policy and the baseline evaluated with the same seed face the same initial
populations and the same variation noise until their decisions diverge.
"""
from __future__ import annotations

import csv
import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..adaptation import AdaptationController, get_method, initial_population
from ..evo.algorithms import init_population, problem_class_of, run_ea
from ..evo.config import EvolutionConfig
from ..exceptions import InvalidArgumentError
from ..net.encoding import n_channels
from ..net.network import NetworkParams
from ..validation import derive_rng


@dataclass
class RunMetrics:
    """Per-run curves and their averages.

    ``runs`` has shape ``(instances, runs, T + 1)`` and holds best fitness
    (combinatorial classes, metric ``mbf``) or best normalised objective value
    (continuous class, metric ``mbfv``).  ``instance_curves`` averages over
    runs; ``curve`` additionally averages over instances.
    """

    metric: str
    runs: np.ndarray

    @property
    def instance_curves(self) -> np.ndarray:
        return self.runs.mean(axis=1)

    @property
    def curve(self) -> np.ndarray:
        return self.instance_curves.mean(axis=0)

    @property
    def terminal(self) -> float:
        """tMBF or tMBFv."""
        return float(self.curve[-1])

    @property
    def terminal_values(self) -> np.ndarray:
        """Final-generation value of every run, instances concatenated."""
        return self.runs[:, :, -1].reshape(-1)

    @property
    def higher_is_better(self) -> bool:
        return self.metric == "mbf"

    def to_csv(self, path) -> Path:
        """``generation, value, instance_0, ...``; floats written with ``repr``."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        inst = self.instance_curves
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["generation", "value", *[f"instance_{i}" for i in range(inst.shape[0])]])
            for t in range(self.curve.shape[0]):
                w.writerow([t, repr(float(self.curve[t])), *[repr(float(v)) for v in inst[:, t]]])
        return path


def _metric_for(problem) -> str:
    return "mbfv" if problem_class_of(problem) == "continuous" else "mbf"


def check_policy(params: NetworkParams, problem):
    """Raise if a checkpoint cannot drive ``problem``."""
    m = get_method(params.head.head_id)
    if params.head != m.head:
        raise InvalidArgumentError(f"checkpoint head does not match method {m.method_id!r}")
    m.check_problem(problem)
    if params.in_channels != n_channels(problem):
        raise InvalidArgumentError(
            f"checkpoint expects {params.in_channels} input channels, the instance encodes {n_channels(problem)}"
        )
    return m


def run_once(problem, cfg: EvolutionConfig, rng, params: NetworkParams | None = None, deterministic=True):
    """One EA run (baseline when ``params`` is None); returns the per-generation curve."""
    if params is None:
        trace = run_ea(problem, cfg, rng, pop=init_population(problem, cfg, rng))
    else:
        m = check_policy(params, problem)
        ctl = AdaptationController(m, params, cfg.episode_length, rng=rng, deterministic=deterministic, record=False)
        trace = run_ea(problem, cfg, rng, hooks=ctl, pop=initial_population(m, problem, cfg, rng))
    vals = trace.best_objective if problem_class_of(problem) == "continuous" else trace.best_fitness
    return np.asarray(vals, dtype=np.float64)


def evaluate(policy, problems, runs: int, cfg: EvolutionConfig | None = None, seed=0, deterministic=True, threads=1) -> RunMetrics:
    """Run the EA ``runs`` times per instance under ``policy`` (or the baseline if None)."""
    problems = list(problems)
    if runs < 1:
        raise InvalidArgumentError("runs must be >= 1")
    if not problems:
        raise InvalidArgumentError("no instances to evaluate on")
    metric = _metric_for(problems[0])
    cfg = EvolutionConfig.defaults(problem_class_of(problems[0])) if cfg is None else cfg
    if policy is not None:
        for p in problems:
            check_policy(policy, p)
    jobs = [(i, r) for i in range(len(problems)) for r in range(runs)]

    def job(ir):
        i, r = ir
        return run_once(problems[i], cfg, derive_rng(seed, i, r), policy, deterministic)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            curves = list(pool.map(job, jobs))
    else:
        curves = [job(j) for j in jobs]
    arr = np.stack(curves).reshape(len(problems), runs, -1)
    return RunMetrics(metric, arr)


def default_grid(problem_class: str) -> dict:
    """Default tuning grids per problem class."""
    if problem_class == "knapsack":
        return {"mutation_rate": [round(0.005 + 0.0001 * i, 4) for i in range(81)]}
    if problem_class == "continuous":
        return {"strategy_parameter": [round(0.01 * i, 2) for i in range(101)]}
    if problem_class == "tsp":
        from ..evo.config import CROSSOVER_OPERATORS

        return {"crossover_operator": list(CROSSOVER_OPERATORS)}
    raise InvalidArgumentError(f"unknown problem class {problem_class!r}")


def _grid_value(cfg_field, value):
    kinds = {"population_size": int, "elite_size": int, "episode_length": int, "crossover_operator": str}
    return kinds.get(cfg_field, float)(value)


@dataclass
class TuneResult:
    best: EvolutionConfig
    table: list  # dicts: grid point values + "terminal"
    keys: tuple

    def to_csv(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow([*self.keys, "terminal"])
            for row in self.table:
                w.writerow([*(repr(row[k]) if isinstance(row[k], float) else row[k] for k in self.keys), repr(row["terminal"])])
        return path


def tune_baseline(problems, grid: dict | None = None, cfg: EvolutionConfig | None = None, runs=100, seed=0, threads=1) -> TuneResult:
    """Exhaustive grid search over evolution parameters.

    Every grid point is evaluated with the same run seeds.  The best point
    maximises tMBF (or minimises tMBFv); ties go to the first point in
    enumeration order (``itertools.product`` over the grid's key order).
    """
    problems = list(problems)
    kind = problem_class_of(problems[0])
    grid = default_grid(kind) if grid is None else grid
    if not grid or any(len(v) == 0 for v in grid.values()):
        raise InvalidArgumentError("empty tuning grid")
    cfg = EvolutionConfig.defaults(kind) if cfg is None else cfg
    keys = tuple(grid)
    for k in keys:
        if k not in EvolutionConfig.field_names():
            raise InvalidArgumentError(f"cannot tune unknown parameter {k!r}")
    table, best, best_val = [], None, None
    for point in itertools.product(*(grid[k] for k in keys)):
        values = {k: _grid_value(k, v) for k, v in zip(keys, point)}
        c = cfg.replace(**values)
        m = evaluate(None, problems, runs, c, seed, threads=threads)
        table.append({**values, "terminal": m.terminal})
        better = best_val is None or (m.terminal > best_val if m.higher_is_better else m.terminal < best_val)
        if better:
            best, best_val = c, m.terminal
    return TuneResult(best, table, keys)
