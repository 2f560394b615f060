"""Flat ``key = value`` experiment configuration.

The file is UTF-8 text with one ``key = value`` pair per line.  Blank lines
and lines starting with ``#`` are ignored, and so is everything after a ``#``
that follows whitespace.  Keys:

======================== ======================================================
key                      meaning
======================== ======================================================
problem_class            ``knapsack``, ``tsp`` or ``continuous``
method                   adaptation method id or ``baseline``
seed                     master seed (non-negative integer)
instance_seed            seed of the generated instance sets
train_instances          number of training instances ``K``
validation_instances     number of validation instances
genome_size              items (knapsack) or nodes (TSP)
w_max                    knapsack weight-limit parameter
train_functions          comma-separated objective ids (continuous)
validation_functions     comma-separated objective ids (continuous)
agents                   number of independently trained agents
eval_runs                EA runs per validation instance
deterministic            ``true``/``false``: mean actions at evaluation
threads                  worker threads
checkpoint_every         periodic training checkpoints (0 = off)
ea.<field>               any :class:`~learnevo.evo.config.EvolutionConfig` field
ppo.<field>              any :class:`~learnevo.ppo.hyperparams.PpoHyperParams` field
grid.<field>             tuning grid: ``v1, v2, ...`` or ``start:stop:step``
======================== ======================================================
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields
from decimal import Decimal
from pathlib import Path

from ..adaptation import METHOD_IDS
from ..evo.config import EvolutionConfig
from ..exceptions import InvalidArgumentError
from ..ppo.hyperparams import PpoHyperParams
from ..problems import PROBLEM_CLASSES, TRAINING_FUNCTIONS, VALIDATION_FUNCTIONS


def parse_config(text: str) -> dict:
    """Parse the flat format into an ordered ``{key: raw string}`` dict."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split(" #", 1)[0].split("\t#", 1)[0].strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise InvalidArgumentError(f"config line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise InvalidArgumentError(f"config line {lineno}: empty key")
        if key in out:
            raise InvalidArgumentError(f"config line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def read_config(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"config file {path} does not exist")
    return parse_config(path.read_text(encoding="utf-8"))


def format_config(values: dict) -> str:
    return "".join(f"{k} = {v}\n" for k, v in values.items())


def _coerce(value: str, kind):
    try:
        if kind is bool:
            low = value.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(value)
            return low in ("true", "1", "yes")
        if kind is int:
            return int(value)
        if kind is float:
            return float(value)
    except ValueError as exc:
        raise InvalidArgumentError(f"cannot read {value!r} as {kind.__name__}") from exc
    return value


def _typed_overrides(values: dict, prefix: str, cls) -> dict:
    types = {f.name: f.type for f in fields(cls)}
    kinds = {"int": int, "float": float, "bool": bool, "str": str}
    out = {}
    for key, raw in values.items():
        if not key.startswith(prefix):
            continue
        name = key[len(prefix) :]
        if name not in types:
            raise InvalidArgumentError(f"unknown config key {key!r}")
        out[name] = _coerce(raw, kinds.get(str(types[name]), str))
    return out


def parse_grid_values(raw: str) -> list:
    """``"a, b, c"`` or an inclusive decimal range ``"start:stop:step"``."""
    raw = raw.strip()
    if ":" in raw:
        parts = raw.split(":")
        if len(parts) != 3:
            raise InvalidArgumentError(f"grid range {raw!r} must be start:stop:step")
        start, stop, step = (Decimal(p.strip()) for p in parts)
        if step <= 0 or stop < start:
            raise InvalidArgumentError(f"grid range {raw!r} is empty")
        n = int((stop - start) / step) + 1
        return [float(start + i * step) for i in range(n)]
    items = [v.strip() for v in raw.split(",") if v.strip()]
    if not items:
        raise InvalidArgumentError("empty grid")
    return items


_TOP_LEVEL = {
    "problem_class": str,
    "method": str,
    "seed": int,
    "instance_seed": int,
    "train_instances": int,
    "validation_instances": int,
    "genome_size": int,
    "w_max": float,
    "train_functions": str,
    "validation_functions": str,
    "agents": int,
    "eval_runs": int,
    "deterministic": bool,
    "threads": int,
    "checkpoint_every": int,
}


@dataclass
class ExperimentConfig:
    problem_class: str = "knapsack"
    method: str = "baseline"
    seed: int = 0
    instance_seed: int = 0
    train_instances: int = 5
    validation_instances: int = 2
    genome_size: int | None = None
    w_max: float = 10.0
    train_functions: tuple = TRAINING_FUNCTIONS
    validation_functions: tuple = VALIDATION_FUNCTIONS
    agents: int = 3
    eval_runs: int | None = None
    deterministic: bool = True
    threads: int = 1
    checkpoint_every: int = 0
    evolution: EvolutionConfig | None = None
    ppo: PpoHyperParams | None = None
    grid: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.problem_class not in PROBLEM_CLASSES:
            raise InvalidArgumentError(f"unknown problem class {self.problem_class!r}")
        if self.method != "baseline" and self.method not in METHOD_IDS:
            raise InvalidArgumentError(f"unknown method {self.method!r}")
        if self.agents < 1:
            raise InvalidArgumentError("agents must be >= 1")
        if self.eval_runs is None:
            self.eval_runs = 500 if self.problem_class == "continuous" else 100
        if self.eval_runs < 1:
            raise InvalidArgumentError("eval_runs must be >= 1")
        if self.seed < 0 or self.instance_seed < 0:
            raise InvalidArgumentError("seeds must be non-negative")
        if self.problem_class == "continuous":
            self.train_instances = len(self.train_functions)
            self.validation_instances = len(self.validation_functions)
        if self.evolution is None:
            self.evolution = EvolutionConfig.defaults(self.problem_class)
        if self.ppo is None and self.method != "baseline":
            self.ppo = PpoHyperParams.for_method(
                self.method, self.problem_class, instances=self.train_instances,
                episode_length=self.evolution.episode_length,
            )

    @classmethod
    def from_mapping(cls, values: dict, **overrides) -> "ExperimentConfig":
        """Build from parsed ``key = value`` pairs; ``overrides`` (e.g. CLI flags) win."""
        values = dict(values)
        kw = {}
        for key, raw in values.items():
            if key in _TOP_LEVEL:
                kind = _TOP_LEVEL[key]
                if raw.lower() == "none" and key in ("genome_size", "eval_runs"):
                    kw[key] = None
                elif key.endswith("_functions"):
                    kw[key] = tuple(v.strip() for v in raw.split(",") if v.strip())
                else:
                    kw[key] = _coerce(raw, kind)
            elif not key.startswith(("ea.", "ppo.", "grid.")):
                raise InvalidArgumentError(f"unknown config key {key!r}")
        kw.update({k: v for k, v in overrides.items() if v is not None})
        problem_class = kw.get("problem_class", cls.problem_class)
        if problem_class not in PROBLEM_CLASSES:
            raise InvalidArgumentError(f"unknown problem class {problem_class!r}")
        evo = EvolutionConfig.defaults(problem_class, **_typed_overrides(values, "ea.", EvolutionConfig))
        kw["evolution"] = evo
        method = kw.get("method", "baseline")
        if method != "baseline":
            if method not in METHOD_IDS:
                raise InvalidArgumentError(f"unknown method {method!r}")
            ppo_over = _typed_overrides(values, "ppo.", PpoHyperParams)
            k = len(kw.get("train_functions", TRAINING_FUNCTIONS)) if problem_class == "continuous" else kw.get(
                "train_instances", cls.train_instances
            )
            ppo_over.setdefault("instances", k)
            ppo_over.setdefault("episode_length", evo.episode_length)
            kw["ppo"] = PpoHyperParams.for_method(method, problem_class, **ppo_over)
        kw["grid"] = {k[5:]: parse_grid_values(v) for k, v in values.items() if k.startswith("grid.")}
        return cls(**kw)

    def snapshot(self) -> dict:
        """Every effective setting as ``key -> string`` (what ``config.snapshot`` holds)."""
        out = {}
        for key in _TOP_LEVEL:
            v = getattr(self, key)
            out[key] = ", ".join(v) if isinstance(v, tuple) else ("none" if v is None else str(v).lower() if isinstance(v, bool) else str(v))
        for k, v in self.evolution.as_dict().items():
            out[f"ea.{k}"] = repr(v) if isinstance(v, float) else str(v)
        if self.ppo is not None:
            for k, v in self.ppo.as_dict().items():
                out[f"ppo.{k}"] = repr(v) if isinstance(v, float) else str(v).lower() if isinstance(v, bool) else str(v)
        for k, vals in self.grid.items():
            out[f"grid.{k}"] = ", ".join(repr(v) if isinstance(v, float) else str(v) for v in vals)
        return out
