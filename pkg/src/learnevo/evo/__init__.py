"""Genome representations, variation/selection operators and the baseline EAs."""
from .algorithms import (
    GenerationHooks,
    RunTrace,
    continuous_generation,
    evaluate_genomes,
    init_population,
    knapsack_generation,
    problem_class_of,
    run_baseline_generation,
    run_ea,
    run_generation,
    tsp_generation,
)
from .config import CROSSOVER_OPERATORS, EvolutionConfig
from .operators import (
    bitflip_mutation,
    elitism_survivor_selection,
    inversion_mutation,
    score_survivor_selection,
    self_adaptive_mutation,
    tournament_select,
    truncation_select_parents,
    uniform_crossover,
)
from .permutation import tsp_crossover
from .population import Population, RealGenome

__all__ = [
    "CROSSOVER_OPERATORS",
    "EvolutionConfig",
    "GenerationHooks",
    "Population",
    "RealGenome",
    "RunTrace",
    "bitflip_mutation",
    "continuous_generation",
    "elitism_survivor_selection",
    "evaluate_genomes",
    "init_population",
    "inversion_mutation",
    "knapsack_generation",
    "problem_class_of",
    "run_baseline_generation",
    "run_ea",
    "run_generation",
    "score_survivor_selection",
    "self_adaptive_mutation",
    "tournament_select",
    "truncation_select_parents",
    "tsp_crossover",
    "tsp_generation",
    "uniform_crossover",
]
