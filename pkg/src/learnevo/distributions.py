"""Policy distributions: Bernoulli, Beta, Categorical and Normal.

Each distribution holds a tensor of independent elements.  Parameters may be
plain arrays or tape variables (:class:`~learnevo.net.autodiff.Var`); the
densities and entropies are written once against :mod:`.net.autodiff`, so
they are differentiable whenever the parameters are.  Sampling and the
deterministic mean always work on plain values.

Network outputs are mapped to parameters by :func:`apply_output_nonlinearity`
with the raw channels on the last axis:

=========== ======== =============================================
kind        channels parameters
=========== ======== =============================================
bernoulli   1        ``p = sigmoid(z)``
beta        2        ``alpha = softplus(z0) + 1``, ``beta = softplus(z1) + 1``
categorical k        ``p = softmax(z)``
normal      2        ``mu = z0``, ``sigma = softplus(z1)``
=========== ======== =============================================
"""
from __future__ import annotations

import math

import numpy as np
from scipy import special

from .exceptions import InvalidArgumentError
from .net import autodiff as ad
from .validation import check_random_state

SIGMA_FLOOR = 1e-6
# Beta samples are kept strictly inside (0, 1) so their log-density stays finite.
BETA_EPS = 1e-12
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)

KINDS = ("bernoulli", "beta", "categorical", "normal")


def _v(x):
    return np.asarray(ad.value(x))


def _event_sum(x, event_ndim):
    """Sum the trailing ``event_ndim`` axes (joint quantity of independent elements)."""
    for _ in range(event_ndim):
        x = ad.sum(x, axis=-1)
    return x


class Distribution:
    kind: str
    n_channels: int

    @property
    def shape(self):
        raise NotImplementedError

    def log_prob(self, action):
        raise NotImplementedError

    def entropy(self):
        raise NotImplementedError

    def sample(self, rng=None):
        raise NotImplementedError

    def mean_action(self):
        raise InvalidArgumentError(f"{self.kind} actions have no deterministic mean; they are always sampled")

    def joint_log_prob(self, action, event_ndim):
        return _event_sum(self.log_prob(action), event_ndim)

    def joint_entropy(self, event_ndim):
        return _event_sum(self.entropy(), event_ndim)


class Bernoulli(Distribution):
    kind = "bernoulli"
    n_channels = 1

    def __init__(self, p=None, logits=None):
        if (p is None) == (logits is None):
            raise InvalidArgumentError("give exactly one of p or logits")
        self.logits = logits
        self.p = ad.sigmoid(logits) if p is None else p
        pv = _v(self.p)
        if np.any(pv < 0) or np.any(pv > 1):
            raise InvalidArgumentError("Bernoulli p must lie in [0, 1]")

    @property
    def shape(self):
        return _v(self.p).shape

    def _logs(self):
        if self.logits is not None:
            return ad.log_sigmoid(self.logits), ad.log_sigmoid(-1.0 * self.logits)
        return ad.log(self.p), ad.log(1.0 - self.p)

    def log_prob(self, action):
        a = np.asarray(action, dtype=np.float64)
        if np.any((a != 0) & (a != 1)):
            raise InvalidArgumentError("Bernoulli actions must be 0 or 1")
        lp, lq = self._logs()
        if self.logits is None:
            # avoid 0 * -inf for deterministic p
            return ad.add(ad.mul(a, ad.maximum(lp, -1e300)), ad.mul(1.0 - a, ad.maximum(lq, -1e300)))
        return ad.add(ad.mul(a, lp), ad.mul(1.0 - a, lq))

    def entropy(self):
        lp, lq = self._logs()
        q = ad.sub(1.0, self.p)
        if self.logits is None:
            lp, lq = ad.maximum(lp, -1e300), ad.maximum(lq, -1e300)
        return ad.mul(-1.0, ad.add(ad.mul(self.p, lp), ad.mul(q, lq)))

    def sample(self, rng=None):
        rng = check_random_state(rng)
        return (rng.random(self.shape) < _v(self.p)).astype(np.int8)


class Beta(Distribution):
    kind = "beta"
    n_channels = 2

    def __init__(self, alpha, beta):
        av, bv = _v(alpha), _v(beta)
        if av.shape != bv.shape:
            raise InvalidArgumentError("alpha and beta must have the same shape")
        if np.any(av <= 0) or np.any(bv <= 0):
            raise InvalidArgumentError("Beta parameters must be positive")
        self.alpha, self.beta = alpha, beta

    @property
    def shape(self):
        return _v(self.alpha).shape

    def _log_norm(self):
        return ad.sub(ad.add(ad.gammaln(self.alpha), ad.gammaln(self.beta)), ad.gammaln(ad.add(self.alpha, self.beta)))

    def log_prob(self, action):
        a = np.asarray(action, dtype=np.float64)
        if np.any(a <= 0) or np.any(a >= 1):
            raise InvalidArgumentError("Beta actions must lie strictly inside (0, 1)")
        a = a.astype(_v(self.alpha).dtype)
        term = ad.add(ad.mul(ad.sub(self.alpha, 1.0), np.log(a)), ad.mul(ad.sub(self.beta, 1.0), np.log1p(-a)))
        return ad.sub(term, self._log_norm())

    def entropy(self):
        ab = ad.add(self.alpha, self.beta)
        h = ad.sub(self._log_norm(), ad.mul(ad.sub(self.alpha, 1.0), ad.digamma(self.alpha)))
        h = ad.sub(h, ad.mul(ad.sub(self.beta, 1.0), ad.digamma(self.beta)))
        return ad.add(h, ad.mul(ad.sub(ab, 2.0), ad.digamma(ab)))

    def sample(self, rng=None):
        """Inverse-CDF sampling: one uniform per element, no rejection loop."""
        rng = check_random_state(rng)
        u = rng.random(self.shape)
        x = special.betaincinv(_v(self.alpha).astype(np.float64), _v(self.beta).astype(np.float64), u)
        return np.clip(x, BETA_EPS, 1.0 - BETA_EPS)

    def mean_action(self):
        a, b = _v(self.alpha).astype(np.float64), _v(self.beta).astype(np.float64)
        return a / (a + b)


class Categorical(Distribution):
    """Independent categorical distributions over the last axis of ``logits``/``probs``."""

    kind = "categorical"

    def __init__(self, probs=None, logits=None):
        if (probs is None) == (logits is None):
            raise InvalidArgumentError("give exactly one of probs or logits")
        if logits is not None:
            self.log_p = ad.log_softmax(logits, axis=-1)
        else:
            pv = _v(probs)
            if np.any(pv < 0) or np.any(np.abs(pv.sum(axis=-1) - 1.0) > 1e-9):
                raise InvalidArgumentError("categorical probabilities must be >= 0 and sum to 1")
            self.log_p = ad.log(ad.maximum(probs, 1e-300))
        self.probs = ad.exp(self.log_p)

    @property
    def n_channels(self):
        return _v(self.probs).shape[-1]

    @property
    def shape(self):
        return _v(self.probs).shape[:-1]

    def log_prob(self, action):
        a = np.asarray(action)
        k = self.n_channels
        if np.any(a < 0) or np.any(a >= k) or np.any(a != np.round(a)):
            raise InvalidArgumentError(f"categorical actions must be integers in [0, {k})")
        onehot = np.eye(k, dtype=_v(self.probs).dtype)[a.astype(np.int64)]
        return ad.sum(ad.mul(self.log_p, onehot), axis=-1)

    def entropy(self):
        return ad.mul(-1.0, ad.sum(ad.mul(self.probs, self.log_p), axis=-1))

    def sample(self, rng=None):
        rng = check_random_state(rng)
        cdf = np.cumsum(_v(self.probs).astype(np.float64), axis=-1)
        u = rng.random(self.shape)[..., None] * cdf[..., -1:]
        return np.minimum((u >= cdf).sum(axis=-1), self.n_channels - 1).astype(np.int64)


class Normal(Distribution):
    kind = "normal"
    n_channels = 2

    def __init__(self, mu, sigma):
        if np.any(_v(sigma) < 0):
            raise InvalidArgumentError("Normal sigma must be non-negative")
        self.mu = mu
        self.sigma = sigma
        self._sigma = ad.maximum(sigma, SIGMA_FLOOR)

    @property
    def shape(self):
        return _v(self.mu).shape

    def log_prob(self, action):
        a = np.asarray(action, dtype=_v(self.mu).dtype)
        if not np.all(np.isfinite(a)):
            raise InvalidArgumentError("Normal actions must be finite")
        z = ad.div(ad.sub(a, self.mu), self._sigma)
        return ad.sub(ad.mul(-0.5, ad.square(z)), ad.add(ad.log(self._sigma), _HALF_LOG_2PI))

    def entropy(self):
        return ad.add(ad.log(self._sigma), 0.5 + _HALF_LOG_2PI)

    def sample(self, rng=None):
        rng = check_random_state(rng)
        return _v(self.mu) + _v(self.sigma) * rng.standard_normal(self.shape)

    def mean_action(self):
        return np.array(_v(self.mu), dtype=np.float64)


def n_channels_for(kind: str, categories: int = 7) -> int:
    if kind == "categorical":
        return categories
    if kind not in KINDS:
        raise InvalidArgumentError(f"unknown distribution kind {kind!r}")
    return {"bernoulli": 1, "beta": 2, "normal": 2}[kind]


def apply_output_nonlinearity(raw, kind: str, categories: int | None = None) -> Distribution:
    """Map raw network outputs (channels on the last axis) to distribution parameters."""
    c = np.shape(ad.value(raw))[-1]
    expected = c if kind == "categorical" and categories is None else n_channels_for(kind, categories or 7)
    if kind not in KINDS:
        raise InvalidArgumentError(f"unknown distribution kind {kind!r}")
    if c != expected:
        raise InvalidArgumentError(f"{kind} head needs {expected} channels, got {c}")
    if kind == "bernoulli":
        return Bernoulli(logits=ad.getitem(raw, (..., 0)))
    if kind == "beta":
        return Beta(ad.add(ad.softplus(ad.getitem(raw, (..., 0))), 1.0), ad.add(ad.softplus(ad.getitem(raw, (..., 1))), 1.0))
    if kind == "normal":
        return Normal(ad.getitem(raw, (..., 0)), ad.softplus(ad.getitem(raw, (..., 1))))
    return Categorical(logits=raw)


def sample(params: Distribution, rng=None):
    return params.sample(rng)


def log_prob(params: Distribution, action):
    return params.log_prob(action)


def entropy(params: Distribution):
    return params.entropy()


def mean_action(params: Distribution):
    return params.mean_action()
