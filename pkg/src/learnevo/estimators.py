"""scikit-learn style wrappers around the baseline EA and the learned controllers.

The "data" here is a list of problem instances rather than a feature
matrix, so only the parts of the estimator protocol that carry over are
used: constructor-only hyperparameters, ``get_params``/``set_params`` (and so
``sklearn.base.clone``), ``fit`` returning ``self``, fitted attributes with a
trailing underscore and ``check_is_fitted``.

``predict`` returns the best genome found by one EA run per instance and
``score`` the terminal mean best fitness (negated tMBFv on the continuous
class, so that higher is better everywhere).
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .adaptation import AdaptationController, get_method, initial_population
from .evo.algorithms import problem_class_of, run_ea
from .evo.config import EvolutionConfig
from .exceptions import InvalidArgumentError
from .harness.evaluation import evaluate, tune_baseline
from .ppo.hyperparams import PpoHyperParams
from .ppo.trainer import train
from .validation import derive_rng


def _check_problems(problems):
    problems = list(problems) if isinstance(problems, (list, tuple)) else [problems]
    if not problems:
        raise InvalidArgumentError("need at least one problem instance")
    kinds = {problem_class_of(p) for p in problems}
    if len(kinds) != 1:
        raise InvalidArgumentError("all instances must belong to one problem class")
    return problems, kinds.pop()


def _best_genomes(problems, cfg, seed, hooks_for):
    out = []
    for i, p in enumerate(problems):
        rng = derive_rng(seed, i, 0)
        hooks = hooks_for(rng)
        pop = initial_population(hooks.method if hooks else None, p, cfg, rng)
        final = run_ea(p, cfg, rng, hooks=hooks, pop=pop).final
        out.append(final.genomes[int(np.argmax(final.fitness))].copy())
    return out


def _score(metrics):
    return metrics.terminal if metrics.higher_is_better else -metrics.terminal


class BaselineEvolver(BaseEstimator):
    """Static-parameter EA.  ``fit`` grid-searches ``param_grid`` when one is given."""

    def __init__(self, generations=100, param_grid=None, tune_runs=20, eval_runs=100, seed=0):
        self.generations = generations
        self.param_grid = param_grid
        self.tune_runs = tune_runs
        self.eval_runs = eval_runs
        self.seed = seed

    def fit(self, problems, y=None):
        problems, kind = _check_problems(problems)
        cfg = EvolutionConfig.defaults(kind, episode_length=self.generations)
        if self.param_grid:
            res = tune_baseline(problems, dict(self.param_grid), cfg, self.tune_runs, self.seed)
            cfg, self.grid_table_ = res.best, res.table
        self.problem_class_ = kind
        self.config_ = cfg
        return self

    def predict(self, problems):
        check_is_fitted(self, "config_")
        problems, _ = _check_problems(problems)
        return _best_genomes(problems, self.config_, self.seed, lambda rng: None)

    def score(self, problems, y=None):
        check_is_fitted(self, "config_")
        problems, _ = _check_problems(problems)
        return _score(evaluate(None, problems, self.eval_runs, self.config_, self.seed))


class LearnedEvolver(BaseEstimator):
    """EA driven by a PPO-trained adaptation controller."""

    def __init__(self, method="pop-mutation-rate", generations=100, iterations=50, filters=64, eval_runs=100,
                 deterministic=True, seed=0):
        self.method = method
        self.generations = generations
        self.iterations = iterations
        self.filters = filters
        self.eval_runs = eval_runs
        self.deterministic = deterministic
        self.seed = seed

    def fit(self, problems, y=None):
        problems, kind = _check_problems(problems)
        m = get_method(self.method)
        m.check_problem(kind)
        cfg = EvolutionConfig.defaults(kind, episode_length=self.generations)
        hp = PpoHyperParams.for_method(
            m.method_id, kind, instances=len(problems), episode_length=self.generations,
            iterations=self.iterations, filters=self.filters,
        )
        res = train(m, problems, hp, cfg, seed=self.seed)
        self.params_, self.training_log_, self.config_ = res.params, res.log, cfg
        return self

    def predict(self, problems):
        check_is_fitted(self, "params_")
        problems, _ = _check_problems(problems)
        m = get_method(self.method)

        def hooks_for(rng):
            return AdaptationController(m, self.params_, self.generations, rng=rng,
                                        deterministic=self.deterministic, record=False)

        return _best_genomes(problems, self.config_, self.seed, hooks_for)

    def score(self, problems, y=None):
        check_is_fitted(self, "params_")
        problems, _ = _check_problems(problems)
        return _score(evaluate(self.params_, problems, self.eval_runs, self.config_, self.seed, self.deterministic))
