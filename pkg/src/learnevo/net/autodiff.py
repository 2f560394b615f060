"""A small reverse-mode differentiation tape over numpy arrays.

Only the operations the actor-critic network, the policy distributions and
the PPO loss need are implemented.  Every function in this module accepts
plain arrays as well as :class:`Var` objects; with no ``Var`` among its
arguments it simply returns the numpy result, so the same formula serves the
sampling path and the differentiable path.

Recorded nodes keep a forward closure, so :meth:`Tape.replay` can recompute
the whole graph from its leaves and check it against the stored values.
"""
from __future__ import annotations

import numpy as np
from scipy import special

from ..exceptions import ContractViolation


class Var:
    __slots__ = ("tape", "idx", "value")

    def __init__(self, tape, idx, value):
        self.tape, self.idx, self.value = tape, idx, value

    shape = property(lambda self: self.value.shape)
    ndim = property(lambda self: self.value.ndim)
    dtype = property(lambda self: self.value.dtype)

    def __add__(self, o):
        return add(self, o)

    __radd__ = __add__

    def __sub__(self, o):
        return sub(self, o)

    def __rsub__(self, o):
        return sub(o, self)

    def __mul__(self, o):
        return mul(self, o)

    __rmul__ = __mul__

    def __truediv__(self, o):
        return div(self, o)

    def __rtruediv__(self, o):
        return div(o, self)

    def __neg__(self):
        return mul(self, -1.0)

    def __getitem__(self, key):
        return getitem(self, key)

    def __repr__(self):
        return f"Var(#{self.idx}, shape={self.value.shape})"


class _Node:
    __slots__ = ("value", "parents", "vjp", "fwd", "name")

    def __init__(self, value, parents, vjp, fwd, name=None):
        self.value, self.parents, self.vjp, self.fwd, self.name = value, parents, vjp, fwd, name


class Tape:
    """Records operations for one forward pass.

    ``owner`` may be any object with a ``version`` attribute (typically the
    :class:`~learnevo.net.network.NetworkParams` the pass read).  Calling
    :meth:`backward` after the owner's version moved on is a contract
    violation: the recorded values no longer describe the current weights.
    """

    def __init__(self, owner=None):
        self.nodes: list[_Node] = []
        self.owner = owner
        self.version = getattr(owner, "version", None)

    def leaf(self, value, name=None) -> Var:
        value = np.asarray(value)
        self.nodes.append(_Node(value, (), None, None, name))
        return Var(self, len(self.nodes) - 1, value)

    def record(self, value, parents, vjp, fwd) -> Var:
        self.nodes.append(_Node(value, tuple(p.idx for p in parents), vjp, fwd))
        return Var(self, len(self.nodes) - 1, value)

    @property
    def stale(self) -> bool:
        return self.owner is not None and getattr(self.owner, "version", None) != self.version

    def backward(self, output: Var, seed=1.0) -> dict:
        """Gradients of ``sum(seed * output)`` with respect to every named leaf."""
        if self.stale:
            raise ContractViolation("tape was recorded against an older parameter version")
        if output.tape is not self:
            raise ContractViolation("output variable belongs to a different tape")
        grads: list = [None] * len(self.nodes)
        grads[output.idx] = np.broadcast_to(np.asarray(seed, dtype=output.value.dtype), output.value.shape).copy()
        for i in range(output.idx, -1, -1):
            g = grads[i]
            node = self.nodes[i]
            if g is None or node.vjp is None:
                continue
            for p, gp in zip(node.parents, node.vjp(g)):
                if gp is None:
                    continue
                grads[p] = gp if grads[p] is None else grads[p] + gp
        out = {}
        for i, node in enumerate(self.nodes):
            if node.name is not None:
                out[node.name] = np.zeros_like(node.value) if grads[i] is None else grads[i]
        return out

    def replay(self) -> list:
        """Recompute every node from the leaves; returns the recomputed values."""
        values = []
        for node in self.nodes:
            if node.fwd is None:
                values.append(node.value)
            else:
                values.append(node.fwd(*[values[p] for p in node.parents]))
        return values


def _tape_of(*args):
    for a in args:
        if isinstance(a, Var):
            return a.tape
    return None


def value(x):
    return x.value if isinstance(x, Var) else x


def _unbroadcast(g, shape):
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g


def _lift(tape, fwd, vjp_factory, *args):
    """Apply ``fwd`` to values; if any arg is a Var record it on ``tape``."""
    vals = [value(a) for a in args]
    out = fwd(*vals)
    if tape is None:
        return out
    var_args = [a for a in args if isinstance(a, Var)]
    var_pos = [i for i, a in enumerate(args) if isinstance(a, Var)]
    consts = {i: vals[i] for i in range(len(args)) if i not in var_pos}

    def fwd_vars(*vv):
        full = list(vals)
        for i, v in zip(var_pos, vv):
            full[i] = v
        for i, c in consts.items():
            full[i] = c
        return fwd(*full)

    vjp_all = vjp_factory(vals, out)

    def vjp(g):
        gs = vjp_all(g)
        return [gs[i] for i in var_pos]

    return tape.record(out, var_args, vjp, fwd_vars)


# ---------------------------------------------------------------- elementwise


def add(a, b):
    return _lift(
        _tape_of(a, b),
        np.add,
        lambda v, o: lambda g: [_unbroadcast(g, np.shape(v[0])), _unbroadcast(g, np.shape(v[1]))],
        a,
        b,
    )


def sub(a, b):
    return _lift(
        _tape_of(a, b),
        np.subtract,
        lambda v, o: lambda g: [_unbroadcast(g, np.shape(v[0])), _unbroadcast(-g, np.shape(v[1]))],
        a,
        b,
    )


def mul(a, b):
    return _lift(
        _tape_of(a, b),
        np.multiply,
        lambda v, o: lambda g: [_unbroadcast(g * v[1], np.shape(v[0])), _unbroadcast(g * v[0], np.shape(v[1]))],
        a,
        b,
    )


def div(a, b):
    return _lift(
        _tape_of(a, b),
        np.divide,
        lambda v, o: lambda g: [
            _unbroadcast(g / v[1], np.shape(v[0])),
            _unbroadcast(-g * v[0] / (v[1] * v[1]), np.shape(v[1])),
        ],
        a,
        b,
    )


def _unary(fwd, dfdx):
    """Elementwise op whose derivative is ``dfdx(x, out)``."""

    def op(x):
        return _lift(_tape_of(x), fwd, lambda v, o: lambda g: [g * dfdx(v[0], o)], x)

    return op


exp = _unary(np.exp, lambda x, o: o)
log = _unary(np.log, lambda x, o: 1.0 / x)
square = _unary(np.square, lambda x, o: 2.0 * x)
sqrt = _unary(np.sqrt, lambda x, o: 0.5 / o)


def _softplus(x):
    return np.logaddexp(0.0, x)


def _sigmoid(x):
    return special.expit(x)


softplus = _unary(_softplus, lambda x, o: _sigmoid(x))
sigmoid = _unary(_sigmoid, lambda x, o: o * (1.0 - o))
log_sigmoid = _unary(lambda x: -_softplus(-x), lambda x, o: _sigmoid(-x))
elu = _unary(lambda x: np.where(x > 0, x, np.expm1(np.minimum(x, 0.0))), lambda x, o: np.where(x > 0, 1.0, o + 1.0))
gammaln = _unary(special.gammaln, lambda x, o: special.digamma(x))
digamma = _unary(special.digamma, lambda x, o: special.polygamma(1, x))


def maximum(x, floor):
    """``max(x, floor)`` against a constant floor; gradient is zero where the floor wins."""
    return _lift(_tape_of(x), lambda a: np.maximum(a, floor), lambda v, o: lambda g: [g * (v[0] >= floor)], x)


def clip(x, lo, hi):
    return _lift(
        _tape_of(x),
        lambda a: np.clip(a, lo, hi),
        lambda v, o: lambda g: [g * ((v[0] >= lo) & (v[0] <= hi))],
        x,
    )


def minimum(a, b):
    """Elementwise minimum; on ties the gradient goes to ``a``."""

    def vjp_factory(v, o):
        pick_a = v[0] <= v[1]
        return lambda g: [
            _unbroadcast(np.where(pick_a, g, 0.0), np.shape(v[0])),
            _unbroadcast(np.where(pick_a, 0.0, g), np.shape(v[1])),
        ]

    return _lift(_tape_of(a, b), np.minimum, vjp_factory, a, b)


# ---------------------------------------------------------------- reductions


def sum(x, axis=None, keepdims=False):  # noqa: A001 - mirrors numpy
    def vjp_factory(v, o):
        shape = np.shape(v[0])

        def vjp(g):
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            return [np.broadcast_to(g, shape).copy()]

        return vjp

    return _lift(_tape_of(x), lambda a: np.sum(a, axis=axis, keepdims=keepdims), vjp_factory, x)


def mean(x, axis=None):
    n = np.size(value(x)) if axis is None else np.shape(value(x))[axis]
    return mul(sum(x, axis=axis), 1.0 / n)


def first_argmax(x, axis):
    """Index of the first maximal element along ``axis`` (kept as a size-1 axis).

    A running maximum over the slices is much cheaper than ``np.argmax``
    along a non-trailing axis and gives the same lowest-index tie-break.
    """
    xs = np.moveaxis(x, axis, 0)
    best = xs[0].copy()
    idx = np.zeros(best.shape, dtype=np.intp)
    for i in range(1, xs.shape[0]):
        better = xs[i] > best
        idx[better] = i
        np.maximum(best, xs[i], out=best)
    return np.expand_dims(idx, axis)


def max(x, axis, keepdims=True):  # noqa: A001
    """Maximum along ``axis``; the gradient goes to the first maximal element."""

    def vjp_factory(v, o):
        def vjp(g):
            if not keepdims:
                g = np.expand_dims(g, axis)
            out = np.zeros_like(v[0])
            idx = first_argmax(v[0], axis)
            np.put_along_axis(out, idx, g, axis=axis)
            return [out]

        return vjp

    return _lift(_tape_of(x), lambda a: np.max(a, axis=axis, keepdims=keepdims), vjp_factory, x)


def logsumexp(x, axis=-1, keepdims=True):
    def vjp_factory(v, o):
        def vjp(g):
            oo = o if keepdims else np.expand_dims(o, axis)
            gg = g if keepdims else np.expand_dims(g, axis)
            return [gg * np.exp(v[0] - oo)]

        return vjp

    return _lift(_tape_of(x), lambda a: special.logsumexp(a, axis=axis, keepdims=keepdims), vjp_factory, x)


def log_softmax(x, axis=-1):
    return sub(x, logsumexp(x, axis=axis, keepdims=True))


def softmax(x, axis=-1):
    return exp(log_softmax(x, axis=axis))


# ---------------------------------------------------------------- structure


def matmul(x, w):
    """Contract the last axis of ``x`` with the first axis of a 2-D ``w``."""

    def vjp_factory(v, o):
        xv, wv = v

        def vjp(g):
            gx = g @ wv.T
            gw = xv.reshape(-1, xv.shape[-1]).T @ g.reshape(-1, g.shape[-1])
            return [gx, gw]

        return vjp

    return _lift(_tape_of(x, w), np.matmul, vjp_factory, x, w)


def getitem(x, key):
    def vjp_factory(v, o):
        def vjp(g):
            out = np.zeros_like(v[0])
            out[key] += g  # basic indexing only: no repeated targets
            return [out]

        return vjp

    return _lift(_tape_of(x), lambda a: a[key], vjp_factory, x)


def reshape(x, shape):
    return _lift(_tape_of(x), lambda a: np.reshape(a, shape), lambda v, o: lambda g: [g.reshape(np.shape(v[0]))], x)


def concat(xs, axis=-1):
    tape = _tape_of(*xs)
    sizes = [np.shape(value(x))[axis] for x in xs]
    splits = np.cumsum(sizes)[:-1]

    def fwd(*vals):
        return np.concatenate(vals, axis=axis)

    return _lift(tape, fwd, lambda v, o: lambda g: np.split(g, splits, axis=axis), *xs)


def broadcast_to(x, shape):
    return _lift(
        _tape_of(x),
        lambda a: np.broadcast_to(a, shape),
        lambda v, o: lambda g: [_unbroadcast(g, np.shape(v[0]))],
        x,
    )
