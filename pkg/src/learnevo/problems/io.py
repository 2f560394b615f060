"""Plain-text instance files.

Layout (UTF-8, one record per line, ``#`` starts a comment)::

    format = learnevo-instance/1
    class = knapsack | tsp | continuous
    seed = <int> | none
    ...class-specific header keys...
    <numeric rows>

knapsack
    header ``weight_limit`` and ``n``, then ``n`` rows ``<weight> <value>``.
tsp
    header ``n``, then ``n`` rows of ``n`` weights.
continuous
    header ``function = <id>``; no rows.

Floats are written with ``repr``, which round-trips IEEE doubles exactly.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from ..exceptions import InvalidArgumentError
from .functions import ObjectiveFunction
from .knapsack import KnapsackInstance
from .tsp import TspInstance

FORMAT_TAG = "learnevo-instance/1"


def dumps_instance(inst, seed=None) -> str:
    seed = getattr(inst, "seed", None) if seed is None else seed
    lines = [f"format = {FORMAT_TAG}", f"class = {inst.problem_class}", f"seed = {'none' if seed is None else int(seed)}"]
    if isinstance(inst, KnapsackInstance):
        lines += [f"weight_limit = {inst.weight_limit!r}", f"n = {inst.n_items}", "# weight value"]
        lines += [f"{float(w)!r} {float(v)!r}" for w, v in zip(inst.weights, inst.values)]
    elif isinstance(inst, TspInstance):
        lines.append(f"n = {inst.n}")
        lines += [" ".join(repr(float(x)) for x in row) for row in inst.weights]
    elif isinstance(inst, ObjectiveFunction):
        lines.append(f"function = {inst.function_id}")
    else:
        raise InvalidArgumentError(f"cannot serialise {type(inst).__name__}")
    return "\n".join(lines) + "\n"


def loads_instance(text: str):
    header: dict[str, str] = {}
    rows: list[list[float]] = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" in line:
            key, value = (part.strip() for part in line.split("=", 1))
            header[key] = value
        else:
            rows.append([float(tok) for tok in line.split()])
    if header.get("format") != FORMAT_TAG:
        raise InvalidArgumentError(f"not a {FORMAT_TAG} file (format = {header.get('format')!r})")
    seed = None if header.get("seed", "none") == "none" else int(header["seed"])
    kind = header.get("class")
    if kind == "knapsack":
        n = int(header["n"])
        table = np.array(rows, dtype=np.float64).reshape(n, 2)
        return KnapsackInstance(table[:, 0].copy(), table[:, 1].copy(), float(header["weight_limit"]), seed=seed)
    if kind == "tsp":
        n = int(header["n"])
        return TspInstance(np.array(rows, dtype=np.float64).reshape(n, n), seed=seed)
    if kind == "continuous":
        return ObjectiveFunction(header["function"])
    raise InvalidArgumentError(f"unknown problem class {kind!r}")


def save_instance(inst, path, seed=None) -> Path:
    path = Path(path)
    path.write_text(dumps_instance(inst, seed), encoding="utf-8")
    return path


def load_instance(path):
    return loads_instance(Path(path).read_text(encoding="utf-8"))
