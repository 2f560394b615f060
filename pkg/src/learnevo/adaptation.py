"""The eleven adaptation methods and the controller that runs them.

Each method controls one decision of the baseline EA by sampling from a
distribution parameterised by the actor-critic network:

=========================== ============ =========== ======================
method id                   level        kind        problem classes
=========================== ============ =========== ======================
fitness-shaping             environment  normal      knapsack, continuous
survivor-selection          environment  normal      knapsack, continuous
pop-mutation-rate           population   beta        knapsack
pop-strategy-param          population   normal      continuous
operator-selection          population   categorical tsp
ind-mutation-rate           individual   beta        knapsack
ind-strategy-param          individual   normal      continuous
ind-step-size               individual   normal      continuous
parent-selection            individual   bernoulli   knapsack, continuous
component-binary-mutation   component    bernoulli   knapsack
component-step-size         component    normal      continuous
=========================== ============ =========== ======================

Log-probabilities always refer to the raw sample; transforms such as
``softplus`` or ``exp`` are part of executing the action.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .distributions import apply_output_nonlinearity, n_channels_for
from .evo.algorithms import GenerationHooks, init_population, problem_class_of
from .evo.config import CROSSOVER_OPERATORS, EvolutionConfig
from .evo.operators import score_survivor_selection
from .evo.population import Population
from .exceptions import InvalidArgumentError
from .net.encoding import encode_state, n_channels
from .net.network import HeadSpec, NetworkParams, forward, init_params
from .validation import check_random_state

LEVELS = ("environment", "population", "individual", "component")
_REDUCTION = {"environment": "individual", "population": "population", "individual": "individual", "component": "gene"}


@dataclass(frozen=True)
class AdaptationMethod:
    method_id: str
    name: str
    level: str
    kind: str
    problem_classes: tuple
    stage: str  # the GenerationHooks decision point it takes over

    @property
    def reduction(self) -> str:
        return _REDUCTION[self.level]

    @property
    def channels(self) -> int:
        return n_channels_for(self.kind, len(CROSSOVER_OPERATORS))

    @property
    def head(self) -> HeadSpec:
        return HeadSpec(self.method_id, self.kind, self.channels, self.reduction)

    @property
    def event_ndim(self) -> int:
        """Action axes per decision: 0 population, 1 individual, 2 component."""
        return {"population": 0, "individual": 1, "gene": 2}[self.reduction]

    def check_problem(self, problem):
        kind = problem if isinstance(problem, str) else problem_class_of(problem)
        if kind not in self.problem_classes:
            raise InvalidArgumentError(f"{self.method_id} does not apply to the {kind} problem class")
        return kind


METHODS = {
    m.method_id: m
    for m in (
        AdaptationMethod("fitness-shaping", "FitnessShaping", "environment", "normal", ("knapsack", "continuous"), "parent_fitness"),
        AdaptationMethod("survivor-selection", "SurvivorSelection", "environment", "normal", ("knapsack", "continuous"), "survivors"),
        AdaptationMethod("pop-mutation-rate", "PopMutationRate", "population", "beta", ("knapsack",), "mutation_rates"),
        AdaptationMethod("pop-strategy-param", "PopStrategyParam", "population", "normal", ("continuous",), "strategy_parameters"),
        AdaptationMethod("operator-selection", "OperatorSelection", "population", "categorical", ("tsp",), "crossover_operator"),
        AdaptationMethod("ind-mutation-rate", "IndMutationRate", "individual", "beta", ("knapsack",), "mutation_rates"),
        AdaptationMethod("ind-strategy-param", "IndStrategyParam", "individual", "normal", ("continuous",), "strategy_parameters"),
        AdaptationMethod("ind-step-size", "IndStepSize", "individual", "normal", ("continuous",), "step_multipliers"),
        AdaptationMethod("parent-selection", "ParentSelection", "individual", "bernoulli", ("knapsack", "continuous"), "parent_candidates"),
        AdaptationMethod("component-binary-mutation", "ComponentBinaryMutation", "component", "bernoulli", ("knapsack",), "flip_mask"),
        AdaptationMethod("component-step-size", "ComponentStepSize", "component", "normal", ("continuous",), "step_multipliers"),
    )
}
METHOD_IDS = tuple(METHODS)


def get_method(method) -> AdaptationMethod:
    if isinstance(method, AdaptationMethod):
        return method
    if method in METHODS:
        return METHODS[method]
    for m in METHODS.values():
        if m.name == method:
            return m
    raise InvalidArgumentError(f"unknown adaptation method {method!r}")


def init_policy(method, problem, filters=64, depth=3, rng=None, dtype=np.float64) -> NetworkParams:
    """Fresh network parameters sized for ``method`` on ``problem``."""
    m = get_method(method)
    m.check_problem(problem)
    return init_params(n_channels(problem), m.head, filters, depth, rng, dtype)


def initial_population(method, problem, cfg: EvolutionConfig, rng=None) -> Population:
    """Initial population; component-level step-size control needs per-gene step-sizes."""
    m = get_method(method) if method is not None else None
    per_gene = m is not None and m.method_id == "component-step-size"
    return init_population(problem, cfg, rng, per_gene_steps=per_gene)


def _softplus(x):
    return np.logaddexp(0.0, np.asarray(x, dtype=np.float64))


def _check_shape(action, shape, what):
    a = np.asarray(action)
    if a.shape != tuple(shape):
        raise InvalidArgumentError(f"{what}: action shape {a.shape} != expected {tuple(shape)}")
    return a


# ------------------------------------------------------------------ action semantics


def apply_environment_action(method, action, stage: dict):
    """Environment-level actions.

    ``fitness-shaping``: ``stage = {"fitness", "problem_class"}``; returns the
    shaped fitness vector.  ``survivor-selection``: ``stage = {"parents",
    "offspring"}``; returns the surviving population.
    """
    m = get_method(method)
    if m.method_id == "fitness-shaping":
        f = np.asarray(stage["fitness"], dtype=np.float64)
        eps = _check_shape(action, f.shape, m.method_id).astype(np.float64)
        if stage["problem_class"] == "continuous":
            return f * np.exp(eps)
        return f * eps
    if m.method_id == "survivor-selection":
        parents, offspring = stage["parents"], stage["offspring"]
        scores = _check_shape(action, (parents.size + offspring.size,), m.method_id)
        return score_survivor_selection(parents, offspring, scores)
    raise InvalidArgumentError(f"{m.method_id} is not an environment-level method")


def apply_population_action(method, action, cfg: EvolutionConfig | None = None) -> dict:
    """Population-level actions, returned as this generation's parameter overrides."""
    m = get_method(method)
    a = np.asarray(action, dtype=np.float64)
    if a.size != 1:
        raise InvalidArgumentError(f"{m.method_id}: expected a scalar action, got shape {a.shape}")
    a = float(a.reshape(()))
    if m.method_id == "pop-mutation-rate":
        if not 0.0 <= a <= 1.0:
            raise InvalidArgumentError(f"mutation rate {a} outside [0, 1]")
        return {"mutation_rate": a}
    if m.method_id == "pop-strategy-param":
        return {"strategy_parameter": float(_softplus(a))}
    if m.method_id == "operator-selection":
        k = int(round(a))
        if k != a or not 0 <= k < len(CROSSOVER_OPERATORS):
            raise InvalidArgumentError(f"unknown crossover operator index {action!r}")
        return {"crossover_operator": CROSSOVER_OPERATORS[k]}
    raise InvalidArgumentError(f"{m.method_id} is not a population-level method")


def apply_individual_action(method, action, pop: Population, diagnostics: dict | None = None):
    """Individual-level actions (one entry per individual of ``pop``).

    Returns per-individual mutation rates, strategy parameters or step-size
    multipliers, or the parent candidate indices for ``parent-selection``.
    An all-zero parent mask (or a single knapsack candidate, too few for a
    tournament pair) falls back to the whole population and increments
    ``diagnostics["empty_parent_mask"]``.
    """
    m = get_method(method)
    a = _check_shape(action, (pop.size,), m.method_id)
    if m.method_id == "ind-mutation-rate":
        a = a.astype(np.float64)
        if np.any((a < 0) | (a > 1)):
            raise InvalidArgumentError("mutation rates must lie in [0, 1]")
        return a
    if m.method_id in ("ind-strategy-param", "ind-step-size"):
        return _softplus(a)
    if m.method_id == "parent-selection":
        cand = np.flatnonzero(np.asarray(a) != 0)
        minimum = 2 if _genome_family(pop) == "binary" else 1
        if cand.size < minimum:
            if diagnostics is not None:
                diagnostics["empty_parent_mask"] = diagnostics.get("empty_parent_mask", 0) + 1
            cand = np.arange(pop.size)
        return cand
    raise InvalidArgumentError(f"{m.method_id} is not an individual-level method")


def _genome_family(pop: Population) -> str:
    """Genome family of a population: ``binary``, ``real`` or ``permutation``."""
    if pop.step_sizes is not None or np.issubdtype(pop.genomes.dtype, np.floating):
        return "real"
    if pop.genomes.dtype == np.int8:
        return "binary"
    return "permutation"


def apply_component_action(method, action, genomes, step_sizes=None):
    """Component-level actions on a ``P x G`` block.

    ``component-binary-mutation`` returns ``genomes`` with bit ``(i, j)``
    inverted where the mask is 1.  ``component-step-size`` returns the
    per-gene multipliers ``softplus(xi)`` (the caller scales the step-sizes),
    or, when ``step_sizes`` is given, the scaled step-sizes themselves.
    """
    m = get_method(method)
    genomes = np.asarray(genomes)
    a = _check_shape(action, genomes.shape, m.method_id)
    if m.method_id == "component-binary-mutation":
        return np.where(a != 0, 1 - genomes, genomes).astype(genomes.dtype)
    if m.method_id == "component-step-size":
        mult = _softplus(a)
        return mult if step_sizes is None else mult * np.asarray(step_sizes, dtype=np.float64)
    raise InvalidArgumentError(f"{m.method_id} is not a component-level method")


# ------------------------------------------------------------------ controller


@dataclass
class Decision:
    """One policy query: encoded state, raw action, its log-prob and the critic value."""

    state: np.ndarray
    action: np.ndarray
    log_prob: float
    value: float


@dataclass
class AdaptationController(GenerationHooks):
    """Runs one adaptation method inside the baseline EA.

    At each generation it encodes the relevant population, queries the
    network once, samples an action (or takes the distribution mean when
    ``deterministic`` and the kind is Beta or Normal) and executes it at the
    method's decision point.  Every query is appended to ``decisions``.
    """

    method: AdaptationMethod
    params: NetworkParams
    episode_length: int
    rng: np.random.Generator | None = None
    deterministic: bool = False
    record: bool = True
    decisions: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        self.method = get_method(self.method)
        if self.params.head != self.method.head:
            raise InvalidArgumentError(
                f"parameters were built for head {self.params.head.head_id!r}, not {self.method.method_id!r}"
            )
        self.rng = check_random_state(self.rng)
        self._problem = None
        self._kind = None
        self._active = {}

    # -- querying

    def begin(self, pop, problem, cfg, rng):
        if self._problem is not problem:
            self.method.check_problem(problem)
            self._problem, self._kind = problem, problem_class_of(problem)
        self._t = pop.generation
        self._cfg = cfg
        self._active = {}

    def query(self, pop, pairs=None, fitness=None):
        state = encode_state(pop, self._problem, self._t, self.episode_length, pairs=pairs, fitness=fitness)
        out = forward(state, self.params, record=False)
        dist = apply_output_nonlinearity(out.actor[0], self.method.kind)
        if self.deterministic and self.method.kind in ("beta", "normal"):
            action = dist.mean_action()
        else:
            action = dist.sample(self.rng)
        logp = float(np.sum(dist.log_prob(action)))
        value = float(out.value[0])
        if self.record:
            self.decisions.append(Decision(state.astype(self.params.dtype), np.asarray(action), logp, value))
        return action

    def _mine(self, stage):
        return self.method.stage == stage

    # -- decision points

    def parent_fitness(self, pop):
        if not self._mine("parent_fitness"):
            return None
        eps = self.query(pop)
        self._active["shaping_mean"] = float(np.mean(eps))
        return apply_environment_action(self.method, eps, {"fitness": pop.fitness, "problem_class": self._kind})

    def survivors(self, parents, offspring):
        if not self._mine("survivors"):
            return None
        joint = Population.concat(parents, offspring)
        scores = self.query(joint)
        return apply_environment_action(self.method, scores, {"parents": parents, "offspring": offspring})

    def parent_candidates(self, pop):
        if not self._mine("parent_candidates"):
            return None
        cand = apply_individual_action(self.method, self.query(pop), pop, self.diagnostics)
        self._active["parent_count"] = int(cand.size)
        return cand

    def crossover_operator(self, pop, pairs):
        if not self._mine("crossover_operator"):
            return None
        op = apply_population_action(self.method, self.query(pop, pairs=pairs))["crossover_operator"]
        self._active["crossover_operator"] = op
        return op

    def mutation_rates(self, pop, children):
        if not self._mine("mutation_rates"):
            return None
        if self.method.level == "population":
            rate = apply_population_action(self.method, self.query(pop))["mutation_rate"]
            self._active["mutation_rate"] = rate
            return rate
        offspring = Population(children, self._problem.value(children), pop.generation)
        rates = apply_individual_action(self.method, self.query(offspring), offspring)
        self._active["mutation_rate"] = float(np.mean(rates))
        return rates

    def flip_mask(self, pop, children):
        if not self._mine("flip_mask"):
            return None
        offspring = Population(children, self._problem.value(children), pop.generation)
        mask = self.query(offspring)
        self._active["mutation_rate"] = float(np.mean(mask))
        return mask

    def strategy_parameters(self, pop):
        if not self._mine("strategy_parameters"):
            return None
        a = self.query(pop)
        if self.method.level == "population":
            tau = apply_population_action(self.method, a)["strategy_parameter"]
            taus = np.full(pop.size, tau)
        else:
            taus = apply_individual_action(self.method, a, pop)
        self._active["strategy_parameter"] = float(np.mean(taus))
        return taus

    def step_multipliers(self, pop):
        if not self._mine("step_multipliers"):
            return None
        a = self.query(pop)
        if self.method.level == "component":
            mult = apply_component_action(self.method, a, pop.genomes)
        else:
            mult = apply_individual_action(self.method, a, pop)
        self._active["step_multiplier"] = float(np.mean(mult))
        return mult

    def active_parameters(self):
        return dict(self._active)
