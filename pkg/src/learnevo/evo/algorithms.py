"""The three baseline generation pipelines and a run driver.

A generation is split into stages (parent selection, recombination, mutation,
survivor selection).  :class:`GenerationHooks` exposes one method per
decision point; the baseline uses the no-op hooks, and adaptation controllers
override exactly the stage they control.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..exceptions import InvalidArgumentError
from ..problems.functions import ObjectiveFunction
from ..problems.knapsack import KnapsackInstance, repair_population
from ..problems.tsp import TspInstance
from ..validation import check_random_state
from .config import EvolutionConfig
from .operators import (
    bitflip_mutation,
    elitism_survivor_selection,
    inversion_mutation_batch,
    self_adaptive_mutation_batch,
    tournament_select,
    truncation_select_parents,
    uniform_crossover_batch,
)
from .permutation import operator_name, tsp_crossover
from .population import Population


class GenerationHooks:
    """Decision points of one generation.  Returning ``None`` means "baseline"."""

    def begin(self, pop: Population, problem, cfg: EvolutionConfig, rng) -> None:
        """Called once at the start of every generation."""

    def parent_fitness(self, pop):
        return None

    def parent_candidates(self, pop):
        return None

    def crossover_operator(self, pop, pairs):
        return None

    def mutation_rates(self, pop, children):
        return None

    def flip_mask(self, pop, children):
        return None

    def strategy_parameters(self, pop):
        return None

    def step_multipliers(self, pop):
        return None

    def survivors(self, parents: Population, offspring: Population):
        return None

    def active_parameters(self) -> dict:
        """Evolution-parameter values used in the last generation (for traces)."""
        return {}


BASELINE_HOOKS = GenerationHooks()


def problem_class_of(problem) -> str:
    if isinstance(problem, KnapsackInstance):
        return "knapsack"
    if isinstance(problem, TspInstance):
        return "tsp"
    if isinstance(problem, ObjectiveFunction):
        return "continuous"
    raise InvalidArgumentError(f"unsupported problem instance {type(problem).__name__}")


def evaluate_genomes(problem, genomes, generation=0, step_sizes=None) -> Population:
    if isinstance(problem, ObjectiveFunction):
        g = problem(genomes)
        return Population(genomes, problem.evaluate(genomes), generation, step_sizes, g)
    return Population(genomes, problem.evaluate(genomes), generation, step_sizes)


def init_population(problem, cfg: EvolutionConfig, rng=None, per_gene_steps=False) -> Population:
    """Random initial population for the problem's class.

    Knapsack: fair-coin bits, then random repair.  TSP: uniform random
    permutations.  Continuous: uniform points with ``initial_step_size``.
    """
    rng = check_random_state(rng)
    p = cfg.population_size
    kind = problem_class_of(problem)
    if kind == "knapsack":
        bits = (rng.random((p, problem.n_items)) < 0.5).astype(np.int8)
        return evaluate_genomes(problem, repair_population(bits, problem, rng))
    if kind == "tsp":
        perms = np.stack([rng.permutation(problem.n) for _ in range(p)])
        return evaluate_genomes(problem, perms)
    x = rng.uniform(-1.0, 1.0, size=(p, 2))
    shape = (p, 2) if per_gene_steps else (p,)
    return evaluate_genomes(problem, x, step_sizes=np.full(shape, cfg.initial_step_size))


def _survive(pop, offspring, cfg, hooks):
    chosen = hooks.survivors(pop, offspring)
    if chosen is None:
        chosen = elitism_survivor_selection(pop, offspring, cfg.elite_size)
    chosen.generation = pop.generation + 1
    return chosen


def _candidates(pop, hooks, minimum):
    cand = hooks.parent_candidates(pop)
    if cand is not None and len(cand) < minimum:
        raise InvalidArgumentError("parent candidate set too small")
    return cand


def knapsack_generation(pop, problem, cfg, rng, hooks=BASELINE_HOOKS) -> Population:
    if cfg.population_size % 2:
        raise InvalidArgumentError("the knapsack EA needs an even population_size")
    fitness = hooks.parent_fitness(pop)
    pairs = tournament_select(
        pop.fitness if fitness is None else fitness, cfg.population_size // 2, rng, _candidates(pop, hooks, 2)
    )
    c1, c2 = uniform_crossover_batch(pop.genomes[pairs[:, 0]], pop.genomes[pairs[:, 1]], cfg.crossover_rate, rng)
    children = np.empty_like(pop.genomes)
    children[0::2], children[1::2] = c1, c2
    mask = hooks.flip_mask(pop, children)
    if mask is None:
        rates = hooks.mutation_rates(pop, children)
        children = bitflip_mutation(children, cfg.mutation_rate if rates is None else rates, rng)
    else:
        children = np.where(np.asarray(mask, dtype=bool), 1 - children, children).astype(children.dtype)
    children = repair_population(children, problem, rng)
    return _survive(pop, evaluate_genomes(problem, children, pop.generation), cfg, hooks)


def tsp_generation(pop, problem, cfg, rng, hooks=BASELINE_HOOKS) -> Population:
    p = cfg.population_size
    pairs = tournament_select(pop.fitness, p, rng, _candidates(pop, hooks, 2))
    op = hooks.crossover_operator(pop, pairs)
    op = operator_name(cfg.crossover_operator if op is None else op)
    recombine = rng.random(p) < cfg.crossover_rate
    children = np.empty_like(pop.genomes)
    for k, (i, j) in enumerate(pairs):
        if recombine[k]:
            children[k] = tsp_crossover(op, pop.genomes[i], pop.genomes[j], rng)
        else:
            children[k] = pop.genomes[i]
    rates = hooks.mutation_rates(pop, children)
    children = inversion_mutation_batch(children, cfg.mutation_rate if rates is None else rates, rng)
    return _survive(pop, evaluate_genomes(problem, children, pop.generation), cfg, hooks)


def continuous_generation(pop, problem, cfg, rng, hooks=BASELINE_HOOKS) -> Population:
    p = cfg.population_size
    parents = _candidates(pop, hooks, 1)
    if parents is None:
        fitness = hooks.parent_fitness(pop)
        parents = truncation_select_parents(pop.fitness if fitness is None else fitness, cfg.parent_percentage)
    parents = np.asarray(parents, dtype=np.int64)
    choice = parents[rng.integers(parents.shape[0], size=p)]

    tau = hooks.strategy_parameters(pop)
    tau = cfg.strategy_parameter if tau is None else np.asarray(tau)[choice]
    mult = hooks.step_multipliers(pop)
    if mult is not None:
        mult = np.asarray(mult)[choice]
    x, steps = self_adaptive_mutation_batch(
        pop.genomes[choice],
        pop.step_sizes[choice],
        tau,
        cfg.initial_step_size,
        cfg.min_step_size,
        rng,
        step_multiplier=mult,
    )
    return _survive(pop, evaluate_genomes(problem, x, pop.generation, steps), cfg, hooks)


_PIPELINES = {"knapsack": knapsack_generation, "tsp": tsp_generation, "continuous": continuous_generation}


def run_generation(pop, problem, cfg, rng=None, hooks=None) -> Population:
    """Advance ``pop`` by one generation of the problem class's pipeline."""
    rng = check_random_state(rng)
    kind = problem_class_of(problem)
    if pop.genome_size != problem.genome_size:
        raise InvalidArgumentError("population does not match the problem instance")
    hooks = hooks or BASELINE_HOOKS
    hooks.begin(pop, problem, cfg, rng)
    return _PIPELINES[kind](pop, problem, cfg, rng, hooks)


def run_baseline_generation(state, problem, cfg, rng=None) -> Population:
    return run_generation(state, problem, cfg, rng)


@dataclass
class RunTrace:
    """Per-generation record of one EA run (``T + 1`` rows, initial population included)."""

    best_fitness: list = field(default_factory=list)
    mean_fitness: list = field(default_factory=list)
    best_objective: list = field(default_factory=list)
    parameters: list = field(default_factory=list)
    final: Population | None = None

    def record(self, pop: Population, params: dict):
        self.best_fitness.append(pop.best_fitness)
        self.mean_fitness.append(float(pop.fitness.mean()))
        self.best_objective.append(pop.best_objective)
        self.parameters.append(dict(params))

    def to_csv(self, path):
        keys = sorted({k for row in self.parameters for k in row})
        with open(Path(path), "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["generation", "best_fitness", "mean_fitness", "best_objective", *keys])
            for t, (b, m, o, prm) in enumerate(
                zip(self.best_fitness, self.mean_fitness, self.best_objective, self.parameters)
            ):
                w.writerow([t, repr(b), repr(m), "" if o is None else repr(o), *[prm.get(k, "") for k in keys]])


def _static_parameters(kind, cfg):
    if kind == "knapsack":
        return {"mutation_rate": cfg.mutation_rate, "crossover_rate": cfg.crossover_rate, "elite_size": cfg.elite_size}
    if kind == "tsp":
        return {"mutation_rate": cfg.mutation_rate, "crossover_operator": cfg.crossover_operator, "elite_size": cfg.elite_size}
    return {
        "strategy_parameter": cfg.strategy_parameter,
        "parent_percentage": cfg.parent_percentage,
        "elite_size": cfg.elite_size,
    }


def run_ea(problem, cfg: EvolutionConfig, rng=None, hooks=None, generations=None, pop=None) -> RunTrace:
    """Run ``generations`` (default ``cfg.episode_length``) generations and trace them."""
    rng = check_random_state(rng)
    kind = problem_class_of(problem)
    generations = cfg.episode_length if generations is None else generations
    pop = init_population(problem, cfg, rng) if pop is None else pop
    trace = RunTrace()
    static = _static_parameters(kind, cfg)
    trace.record(pop, static)
    for _ in range(generations):
        pop = run_generation(pop, problem, cfg, rng, hooks)
        trace.record(pop, {**static, **(hooks.active_parameters() if hooks else {})})
    trace.final = pop
    return trace
