"""Single-child crossover operators for permutation genomes.

All operators take two parent permutations of ``0..n-1`` and return one child
that is again a permutation.  Conventions follow the usual textbook
definitions:

one-point
    Prefix of parent 1 up to a cut, then the missing genes in parent-2 order.
two-point
    Parent 1 outside a random segment; the segment is refilled with its own
    genes in the order they appear in parent 2.
linear-order (LOX)
    Parent-1 segment kept in place; the other positions are filled left to
    right with the remaining genes in parent-2 order.
cycle (CX)
    Alternate cycles come from parent 1 and parent 2, so every gene keeps the
    position it had in one of the parents.
position-based (PBX)
    Genes at a random position subset come from parent 1; the rest are filled
    in parent-2 order.
order-based (OBX)
    Copy of parent 1 in which the genes found at a random position subset of
    parent 2 are re-ordered to match parent 2.
partially-mapped (PMX)
    Parent-1 segment kept in place; outside it parent-2 genes are used,
    following the segment mapping to resolve duplicates.
"""
from __future__ import annotations

import numpy as np

from ..exceptions import InvalidArgumentError
from ..validation import check_permutation, check_random_state
from .config import CROSSOVER_OPERATORS


def _cut_pair(n, rng):
    a, b = rng.integers(n + 1, size=2)
    return min(a, b), max(a, b)


def _fill(child, free_positions, donor, used):
    genes = donor[~used[donor]]
    child[free_positions] = genes
    return child


def one_point(p1, p2, rng):
    n = p1.shape[0]
    cut = rng.integers(1, n) if n > 1 else 1
    child = np.empty(n, dtype=np.int64)
    child[:cut] = p1[:cut]
    used = np.zeros(n, dtype=bool)
    used[p1[:cut]] = True
    return _fill(child, np.arange(cut, n), p2, used)


def two_point(p1, p2, rng):
    n = p1.shape[0]
    a, b = _cut_pair(n, rng)
    child = p1.copy()
    seg = np.zeros(n, dtype=bool)
    seg[p1[a:b]] = True
    # the segment's genes, in the order parent 2 visits them
    child[a:b] = p2[seg[p2]]
    return child


def linear_order(p1, p2, rng):
    n = p1.shape[0]
    a, b = _cut_pair(n, rng)
    child = np.empty(n, dtype=np.int64)
    child[a:b] = p1[a:b]
    used = np.zeros(n, dtype=bool)
    used[p1[a:b]] = True
    free = np.r_[np.arange(0, a), np.arange(b, n)]
    return _fill(child, free, p2, used)


def cycle(p1, p2, rng):
    n = p1.shape[0]
    pos_in_p1 = np.empty(n, dtype=np.int64)
    pos_in_p1[p1] = np.arange(n)
    child = np.empty(n, dtype=np.int64)
    assigned = np.zeros(n, dtype=bool)
    from_first = True
    for start in range(n):
        if assigned[start]:
            continue
        i = start
        while not assigned[i]:
            assigned[i] = True
            child[i] = p1[i] if from_first else p2[i]
            i = pos_in_p1[p2[i]]
        from_first = not from_first
    return child


def position_based(p1, p2, rng):
    n = p1.shape[0]
    keep = rng.random(n) < 0.5
    child = np.empty(n, dtype=np.int64)
    child[keep] = p1[keep]
    used = np.zeros(n, dtype=bool)
    used[p1[keep]] = True
    return _fill(child, np.flatnonzero(~keep), p2, used)


def order_based(p1, p2, rng):
    n = p1.shape[0]
    picked = rng.random(n) < 0.5
    chosen = np.zeros(n, dtype=bool)
    chosen[p2[picked]] = True
    child = p1.copy()
    slots = np.flatnonzero(chosen[p1])
    child[slots] = p2[picked]
    return child


def partially_mapped(p1, p2, rng):
    n = p1.shape[0]
    a, b = _cut_pair(n, rng)
    child = p2.copy()
    child[a:b] = p1[a:b]
    in_seg = np.zeros(n, dtype=bool)
    in_seg[p1[a:b]] = True
    pos_in_p1 = np.empty(n, dtype=np.int64)
    pos_in_p1[p1] = np.arange(n)
    for i in np.r_[np.arange(0, a), np.arange(b, n)]:
        g = p2[i]
        while in_seg[g]:
            g = p2[pos_in_p1[g]]
        child[i] = g
    return child


_OPERATORS = {
    "one-point": one_point,
    "two-point": two_point,
    "linear-order": linear_order,
    "cycle": cycle,
    "position-based": position_based,
    "order-based": order_based,
    "partially-mapped": partially_mapped,
}
assert tuple(_OPERATORS) == CROSSOVER_OPERATORS


def operator_name(operator_id) -> str:
    if isinstance(operator_id, str):
        if operator_id not in _OPERATORS:
            raise InvalidArgumentError(f"unknown crossover operator {operator_id!r}")
        return operator_id
    k = int(operator_id)
    if not 0 <= k < len(CROSSOVER_OPERATORS):
        raise InvalidArgumentError(f"crossover operator index {k} out of range")
    return CROSSOVER_OPERATORS[k]


def tsp_crossover(operator_id, p1, p2, rng=None) -> np.ndarray:
    """Apply the named (or 0-based indexed) crossover operator to two parents."""
    name = operator_name(operator_id)
    p1 = check_permutation(p1)
    p2 = check_permutation(p2, p1.shape[0])
    return _OPERATORS[name](p1, p2, check_random_state(rng))
