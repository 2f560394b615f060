"""Two-dimensional benchmark objectives on the normalised square [-1, 1]^2.

Each objective is evaluated after an affine map of [-1, 1]^2 onto its usual
search box, and its global minimum value is subtracted, so every normalised
objective is non-negative with minimum 0.

The minimisers below are the published ones, refined to double precision where
the published digits are truncated (Cross-in-Tray, Eggholder, Holder table,
McCormick, Schaffer #4, Styblinski-Tang).  The subtracted minimum is the raw
objective evaluated at the mapped minimiser, which makes the normalised value
exactly zero there.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..exceptions import InvalidArgumentError

PROBLEM_CLASS = "continuous"
_PI = np.pi


def _ackley(x, y):
    r = np.sqrt(0.5 * (x * x + y * y))
    c = 0.5 * (np.cos(2 * _PI * x) + np.cos(2 * _PI * y))
    return -20.0 * np.exp(-0.2 * r) - np.exp(c) + 20.0 + np.e


def _beale(x, y):
    return (1.5 - x + x * y) ** 2 + (2.25 - x + x * y**2) ** 2 + (2.625 - x + x * y**3) ** 2


def _levy13(x, y):
    return (
        np.sin(3 * _PI * x) ** 2
        + (x - 1) ** 2 * (1 + np.sin(3 * _PI * y) ** 2)
        + (y - 1) ** 2 * (1 + np.sin(2 * _PI * y) ** 2)
    )


def _rastrigin(x, y):
    return 20.0 + x * x - 10 * np.cos(2 * _PI * x) + y * y - 10 * np.cos(2 * _PI * y)


def _rosenbrock(x, y):
    return 100.0 * (y - x * x) ** 2 + (x - 1) ** 2


def _goldstein_price(x, y):
    a = 1 + (x + y + 1) ** 2 * (19 - 14 * x + 3 * x * x - 14 * y + 6 * x * y + 3 * y * y)
    b = 30 + (2 * x - 3 * y) ** 2 * (18 - 32 * x + 12 * x * x + 48 * y - 36 * x * y + 27 * y * y)
    return a * b


def _bukin6(x, y):
    return 100.0 * np.sqrt(np.abs(y - 0.01 * x * x)) + 0.01 * np.abs(x + 10)


def _matyas(x, y):
    return 0.26 * (x * x + y * y) - 0.48 * x * y


def _cross_in_tray(x, y):
    e = np.exp(np.abs(100 - np.sqrt(x * x + y * y) / _PI))
    return -0.0001 * (np.abs(np.sin(x) * np.sin(y) * e) + 1) ** 0.1


def _eggholder(x, y):
    return -(y + 47) * np.sin(np.sqrt(np.abs(y + x / 2 + 47))) - x * np.sin(np.sqrt(np.abs(x - (y + 47))))


def _holder_table(x, y):
    return -np.abs(np.sin(x) * np.cos(y) * np.exp(np.abs(1 - np.sqrt(x * x + y * y) / _PI)))


def _mccormick(x, y):
    return np.sin(x + y) + (x - y) ** 2 - 1.5 * x + 2.5 * y + 1


def _schaffer2(x, y):
    num = np.sin(x * x - y * y) ** 2 - 0.5
    return 0.5 + num / (1 + 0.001 * (x * x + y * y)) ** 2


def _schaffer4(x, y):
    num = np.cos(np.sin(np.abs(x * x - y * y))) ** 2 - 0.5
    return 0.5 + num / (1 + 0.001 * (x * x + y * y)) ** 2


def _styblinski_tang(x, y):
    return 0.5 * (x**4 - 16 * x * x + 5 * x + y**4 - 16 * y * y + 5 * y)


def _sphere(x, y):
    return x * x + y * y


def _himmelblau(x, y):
    return (x * x + y - 11) ** 2 + (x + y * y - 7) ** 2


def _booth(x, y):
    return (x + 2 * y - 7) ** 2 + (2 * x + y - 5) ** 2


def _three_hump_camel(x, y):
    return 2 * x * x - 1.05 * x**4 + x**6 / 6 + x * y + y * y


# name -> (raw function, (x_lo, x_hi), (y_lo, y_hi), raw minimiser)
FUNCTION_TABLE = {
    "ackley": (_ackley, (-32.768, 32.768), (-32.768, 32.768), (0.0, 0.0)),
    "beale": (_beale, (-4.5, 4.5), (-4.5, 4.5), (3.0, 0.5)),
    "levy13": (_levy13, (-10.0, 10.0), (-10.0, 10.0), (1.0, 1.0)),
    "rastrigin": (_rastrigin, (-5.12, 5.12), (-5.12, 5.12), (0.0, 0.0)),
    "rosenbrock": (_rosenbrock, (-5.0, 10.0), (-5.0, 10.0), (1.0, 1.0)),
    "goldstein_price": (_goldstein_price, (-2.0, 2.0), (-2.0, 2.0), (0.0, -1.0)),
    "bukin6": (_bukin6, (-15.0, -5.0), (-3.0, 3.0), (-10.0, 1.0)),
    "matyas": (_matyas, (-10.0, 10.0), (-10.0, 10.0), (0.0, 0.0)),
    "cross_in_tray": (_cross_in_tray, (-10.0, 10.0), (-10.0, 10.0), (1.349406608602084, 1.349406608602084)),
    "eggholder": (_eggholder, (-512.0, 512.0), (-512.0, 512.0), (512.0, 404.23180528783035)),
    "holder_table": (_holder_table, (-10.0, 10.0), (-10.0, 10.0), (8.055023490672568, 9.664590015390548)),
    "mccormick": (_mccormick, (-1.5, 4.0), (-3.0, 4.0), (-0.5471975511965976, -1.5471975511965976)),
    "schaffer2": (_schaffer2, (-100.0, 100.0), (-100.0, 100.0), (0.0, 0.0)),
    "schaffer4": (_schaffer4, (-100.0, 100.0), (-100.0, 100.0), (0.0, 1.2531318314762414)),
    "styblinski_tang": (_styblinski_tang, (-5.0, 5.0), (-5.0, 5.0), (-2.903534027771177, -2.903534027771177)),
    "sphere": (_sphere, (-5.12, 5.12), (-5.12, 5.12), (0.0, 0.0)),
    "himmelblau": (_himmelblau, (-5.0, 5.0), (-5.0, 5.0), (3.0, 2.0)),
    "booth": (_booth, (-10.0, 10.0), (-10.0, 10.0), (1.0, 3.0)),
    "three_hump_camel": (_three_hump_camel, (-5.0, 5.0), (-5.0, 5.0), (0.0, 0.0)),
}

VALIDATION_FUNCTIONS = ("ackley", "beale", "levy13")
TRAINING_FUNCTIONS = tuple(f for f in FUNCTION_TABLE if f not in VALIDATION_FUNCTIONS)


_MINIMA: dict[str, float] = {}


def _to_raw(u, lo, hi):
    return lo + (np.asarray(u, dtype=np.float64) + 1.0) * (0.5 * (hi - lo))


def _to_unit(x, lo, hi):
    return 2.0 * (x - lo) / (hi - lo) - 1.0


@dataclass(frozen=True)
class ObjectiveFunction:
    """A named benchmark objective on the normalised domain [-1, 1]^2."""

    function_id: str

    problem_class = PROBLEM_CLASS
    genome_size = 2

    def __post_init__(self):
        if self.function_id not in FUNCTION_TABLE:
            raise InvalidArgumentError(f"unknown objective function {self.function_id!r}")

    @property
    def minimizer(self) -> np.ndarray:
        """The global minimiser in normalised coordinates."""
        _, xb, yb, (mx, my) = FUNCTION_TABLE[self.function_id]
        return np.array([_to_unit(mx, *xb), _to_unit(my, *yb)])

    @property
    def minimum(self) -> float:
        """Raw objective value at the minimiser (the offset that gets subtracted)."""
        if self.function_id not in _MINIMA:
            f, xb, yb, _ = FUNCTION_TABLE[self.function_id]
            u = self.minimizer
            _MINIMA[self.function_id] = float(f(_to_raw(u[0], *xb), _to_raw(u[1], *yb)))
        return _MINIMA[self.function_id]

    def __call__(self, points) -> np.ndarray:
        """Normalised objective values for points of shape ``(..., 2)``; no domain check."""
        f, xb, yb, _ = FUNCTION_TABLE[self.function_id]
        p = np.asarray(points, dtype=np.float64)
        return f(_to_raw(p[..., 0], *xb), _to_raw(p[..., 1], *yb)) - self.minimum

    def evaluate(self, genomes) -> np.ndarray:
        """Fitness (reciprocal clipped objective) of a ``(P, 2)`` block of points."""
        return continuous_fitness(self(genomes))


def eval_objective(f, x) -> float:
    """Normalised objective value of a single point inside [-1, 1]^2."""
    if isinstance(f, str):
        f = ObjectiveFunction(f)
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (2,):
        raise InvalidArgumentError(f"expected a 2-D point, got shape {x.shape}")
    if not np.all(np.abs(x) <= 1.0):
        raise InvalidArgumentError(f"point {x.tolist()} lies outside [-1, 1]^2")
    return float(f(x))


FITNESS_FLOOR = 1e-20


def continuous_fitness(g_value):
    """``1 / max(g, 1e-20)``; works element-wise on arrays."""
    g = np.asarray(g_value, dtype=np.float64)
    if np.any(np.isnan(g)):
        raise InvalidArgumentError("objective value is NaN")
    out = 1.0 / np.maximum(g, FITNESS_FLOOR)
    return float(out) if out.ndim == 0 else out
