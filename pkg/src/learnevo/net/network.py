"""Permutation-equivariant actor-critic network.

Input states are ``(B, P, G, C)`` tensors (batch, individuals, genes,
channels).  The building block is *pool-replicate-conv*: per channel, the
maximum over the population axis and the maximum over the gene axis are
replicated back to full size, concatenated with the local features, and a
1x1 convolution (a position-wise affine map) is applied.  Concatenation
followed by a 1x1 convolution equals the sum of three affine maps, which is
how it is computed here; the pooled terms are mapped before broadcasting.

Trunk: ``depth`` pool-replicate-conv layers with ``filters`` channels and ELU.
Critic: max over genes, pool-replicate along the population, one linear 1x1
filter, summed over individuals.  Actor: one more pool-replicate-conv to the
distribution's raw channels, then max-pooled over genes (per-individual
heads) or over genes and individuals (population heads).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..exceptions import InvalidArgumentError
from ..validation import check_random_state
from . import autodiff as ad

REDUCTIONS = ("gene", "individual", "population")


@dataclass(frozen=True)
class HeadSpec:
    """What the actor emits: distribution kind, raw channel count and output level."""

    head_id: str
    kind: str
    channels: int
    reduction: str

    def __post_init__(self):
        if self.reduction not in REDUCTIONS:
            raise InvalidArgumentError(f"unknown head reduction {self.reduction!r}")


class NetworkParams:
    """Named weight arrays plus a version tag bumped on every in-place update."""

    def __init__(self, arrays: dict, head: HeadSpec, in_channels: int, filters: int, depth: int, version: int = 0):
        self.arrays = dict(arrays)
        self.head = head
        self.in_channels = int(in_channels)
        self.filters = int(filters)
        self.depth = int(depth)
        self.version = int(version)
        self._check()

    def _check(self):
        for name, shape in _shapes(self.in_channels, self.filters, self.depth, self.head.channels).items():
            if name not in self.arrays or self.arrays[name].shape != shape:
                raise InvalidArgumentError(f"parameter {name} missing or not shaped {shape}")
            if not np.all(np.isfinite(self.arrays[name])):
                raise InvalidArgumentError(f"parameter {name} has non-finite entries")

    @property
    def dtype(self):
        return next(iter(self.arrays.values())).dtype

    def names(self):
        return list(self.arrays)

    def __getitem__(self, name):
        return self.arrays[name]

    def copy(self) -> "NetworkParams":
        return NetworkParams(
            {k: v.copy() for k, v in self.arrays.items()}, self.head, self.in_channels, self.filters, self.depth, self.version
        )

    def astype(self, dtype) -> "NetworkParams":
        out = self.copy()
        out.arrays = {k: v.astype(dtype) for k, v in out.arrays.items()}
        return out

    def update(self, deltas: dict):
        """Add ``deltas`` in place and bump the version (invalidates older tapes)."""
        for k, d in deltas.items():
            self.arrays[k] += d.astype(self.arrays[k].dtype, copy=False)
        self.version += 1

    def equals(self, other: "NetworkParams") -> bool:
        return (
            self.head == other.head
            and (self.in_channels, self.filters, self.depth) == (other.in_channels, other.filters, other.depth)
            and self.arrays.keys() == other.arrays.keys()
            and all(np.array_equal(self.arrays[k], other.arrays[k]) for k in self.arrays)
        )

    @property
    def size(self) -> int:
        return int(sum(v.size for v in self.arrays.values()))


def _prc_shapes(prefix, cin, cout):
    return {f"{prefix}.local": (cin, cout), f"{prefix}.pop": (cin, cout), f"{prefix}.gene": (cin, cout), f"{prefix}.bias": (cout,)}


def _shapes(in_channels, filters, depth, out_channels):
    shapes = {}
    cin = in_channels
    for layer in range(depth):
        shapes.update(_prc_shapes(f"trunk{layer}", cin, filters))
        cin = filters
    shapes.update(_prc_shapes("actor", cin, out_channels))
    shapes.update({"critic.local": (cin, 1), "critic.pop": (cin, 1), "critic.bias": (1,)})
    return shapes


def init_params(in_channels, head: HeadSpec, filters=64, depth=3, rng=None, dtype=np.float64) -> NetworkParams:
    """Fan-in scaled uniform initialisation, ``U(-1/sqrt(fan_in), 1/sqrt(fan_in))``.

    Parameters are drawn in a fixed name order from ``rng``, so the same seed
    always yields the same network.
    """
    rng = check_random_state(rng)
    arrays = {}
    trunk_out = filters if depth else in_channels
    for name, shape in _shapes(in_channels, filters, depth, head.channels).items():
        layer = name.split(".")[0]
        if layer == "critic":
            fan_in = 2 * trunk_out
        else:
            fan_in = 3 * (in_channels if layer == "trunk0" or (layer == "actor" and not depth) else filters)
        bound = 1.0 / np.sqrt(fan_in)
        arrays[name] = rng.uniform(-bound, bound, size=shape).astype(dtype)
    return NetworkParams(arrays, head, in_channels, filters, depth)


def _elu(z):
    # max(z, expm1(min(z, 0))) equals ELU(alpha=1) and needs one transcendental pass
    h = np.minimum(z, 0)
    np.expm1(h, out=h)
    np.maximum(z, h, out=h)
    return h


def _scatter_add(out, idx, g, axis):
    np.put_along_axis(out, idx, np.take_along_axis(out, idx, axis) + g, axis)


def _prc_forward(x, wl, wp, wg, b, activation):
    z = np.matmul(x, wl)
    z += np.matmul(x.max(axis=1, keepdims=True), wp)
    z += np.matmul(x.max(axis=2, keepdims=True), wg)
    z += b
    return _elu(z) if activation else z


def pool_replicate_conv(x, weights: dict, prefix: str, activation=True):
    """One pool-replicate-conv block on a ``(B, P, G, C_in)`` tensor.

    ``weights`` maps ``prefix.local/pop/gene/bias`` to arrays or tape
    variables.  The block is recorded as a single tape node with a
    hand-written vector-Jacobian product; pooled gradients go to the first
    maximal element.
    """
    keys = [f"{prefix}.{n}" for n in ("local", "pop", "gene", "bias")]
    args = [x] + [weights[k] for k in keys]
    vals = [ad.value(a) for a in args]
    xv = vals[0]
    if xv.ndim != 4 or xv.shape[-1] != np.shape(vals[1])[0]:
        raise InvalidArgumentError(f"{prefix}: input shape {xv.shape} does not match the layer")
    out = _prc_forward(*vals, activation)
    tape = next((a.tape for a in args if isinstance(a, ad.Var)), None)
    if tape is None:
        return out
    var_pos = [i for i, a in enumerate(args) if isinstance(a, ad.Var)]
    x_is_var = 0 in var_pos

    def vjp(g):
        x_, wl, wp, wg, _ = vals
        if activation:
            # ELU'(z) = 1 for z > 0 and out + 1 otherwise, i.e. min(out + 1, 1)
            dz = out + 1
            np.minimum(dz, 1, out=dz)
            dz *= g
        else:
            dz = g
        cin, cout = x_.shape[-1], dz.shape[-1]
        pp = x_.max(axis=1, keepdims=True)
        gp = x_.max(axis=2, keepdims=True)
        dz_p = dz.sum(axis=1, keepdims=True)
        dz_g = dz.sum(axis=2, keepdims=True)
        grads = [None] * 5
        grads[1] = x_.reshape(-1, cin).T @ dz.reshape(-1, cout)
        grads[2] = pp.reshape(-1, cin).T @ dz_p.reshape(-1, cout)
        grads[3] = gp.reshape(-1, cin).T @ dz_g.reshape(-1, cout)
        grads[4] = dz_g.sum(axis=(0, 1, 2))
        if x_is_var:
            gx = dz @ wl.T
            _scatter_add(gx, ad.first_argmax(x_, 1), dz_p @ wp.T, 1)
            _scatter_add(gx, ad.first_argmax(x_, 2), dz_g @ wg.T, 2)
            grads[0] = gx
        return [grads[i] for i in var_pos]

    def fwd(*vv):
        full = list(vals)
        for i, v in zip(var_pos, vv):
            full[i] = v
        return _prc_forward(*full, activation)

    return tape.record(out, [args[i] for i in var_pos], vjp, fwd)


@dataclass
class ForwardResult:
    actor: object  # raw actor output, Var or array
    value: object  # V-hat per batch element, Var or array
    tape: ad.Tape | None
    weights: dict


def forward(state, params: NetworkParams, head: HeadSpec | None = None, record=True) -> ForwardResult:
    """Run the network on ``(P, G, C)`` or ``(B, P, G, C)`` states.

    Returns the raw actor output (``(B, P, G, k)``, ``(B, P, k)`` or ``(B, k)``
    by head level), the value estimate ``(B,)`` and, with ``record=True``, the
    tape holding the computation.
    """
    head = params.head if head is None else head
    if head != params.head:
        raise InvalidArgumentError(f"head {head.head_id!r} does not match the parameters' head {params.head.head_id!r}")
    x = np.asarray(state, dtype=params.dtype)
    if x.ndim == 3:
        x = x[None]
    if x.ndim != 4 or x.shape[-1] != params.in_channels:
        raise InvalidArgumentError(f"state shape {x.shape} does not match {params.in_channels} input channels")
    tape = ad.Tape(params) if record else None
    w = {k: tape.leaf(v, k) for k, v in params.arrays.items()} if record else params.arrays

    h = x
    for layer in range(params.depth):
        h = pool_replicate_conv(h, w, f"trunk{layer}")

    a = pool_replicate_conv(h, w, "actor", activation=False)
    if head.reduction == "individual":
        a = ad.max(a, axis=2, keepdims=False)
    elif head.reduction == "population":
        a = ad.max(ad.max(a, axis=2, keepdims=False), axis=1, keepdims=False)

    c = ad.max(h, axis=2, keepdims=False)
    v = ad.add(ad.matmul(c, w["critic.local"]), ad.matmul(ad.max(c, axis=1, keepdims=True), w["critic.pop"]))
    v = ad.add(v, w["critic.bias"])
    v = ad.sum(ad.sum(v, axis=-1), axis=-1)
    return ForwardResult(a, v, tape, w)


def backward(tape: ad.Tape, output, seed=1.0) -> dict:
    """Parameter gradients of ``sum(seed * output)`` recorded on ``tape``."""
    return tape.backward(output, seed)
