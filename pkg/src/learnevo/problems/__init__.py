"""Benchmark problem classes: 0-1 knapsack, maximum-weight TSP, 2-D continuous objectives."""
from ..exceptions import InvalidArgumentError
from ..validation import derive_seed
from .functions import (
    FUNCTION_TABLE,
    TRAINING_FUNCTIONS,
    VALIDATION_FUNCTIONS,
    ObjectiveFunction,
    continuous_fitness,
    eval_objective,
)
from .io import dumps_instance, load_instance, loads_instance, save_instance
from .knapsack import (
    KnapsackInstance,
    generate_knapsack_instance,
    knapsack_fitness,
    repair_knapsack,
    repair_population,
)
from .tsp import TspInstance, generate_tsp_instance, tsp_fitness

PROBLEM_CLASSES = ("knapsack", "tsp", "continuous")


def make_instance_set(problem_class, count, seed, *, n=None, w_max=10.0, functions=None):
    """Generate ``count`` instances; instance ``k`` is built from ``derive_seed(seed, k)``.

    The derived seed is stored on the instance, so regenerating it later only
    needs that one integer.  The continuous class returns the named functions.
    """
    if problem_class == "knapsack":
        n = 100 if n is None else n
        return [generate_knapsack_instance(n, w_max, derive_seed(seed, k)) for k in range(count)]
    if problem_class == "tsp":
        n = 30 if n is None else n
        return [generate_tsp_instance(n, derive_seed(seed, k)) for k in range(count)]
    if problem_class == "continuous":
        names = list(functions or TRAINING_FUNCTIONS)
        if count > len(names):
            raise InvalidArgumentError(f"only {len(names)} functions available, {count} requested")
        return [ObjectiveFunction(f) for f in names[:count]]
    raise InvalidArgumentError(f"unknown problem class {problem_class!r}")


__all__ = [
    "FUNCTION_TABLE",
    "KnapsackInstance",
    "ObjectiveFunction",
    "PROBLEM_CLASSES",
    "TRAINING_FUNCTIONS",
    "TspInstance",
    "VALIDATION_FUNCTIONS",
    "continuous_fitness",
    "dumps_instance",
    "eval_objective",
    "generate_knapsack_instance",
    "generate_tsp_instance",
    "knapsack_fitness",
    "load_instance",
    "loads_instance",
    "make_instance_set",
    "repair_knapsack",
    "repair_population",
    "save_instance",
    "tsp_fitness",
]
