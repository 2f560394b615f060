"""The multi-instance PPO training loop.

Every iteration collects ``actors`` trajectories on each of the ``K``
training instances with the frozen collecting policy, then runs ``epochs``
passes of shuffled minibatch Adam steps over the ``K * actors * T`` samples
and discards them.

Random streams are derived from the master seed by coordinates:
``(0,)`` network initialisation, ``(1, it, k, n)`` the trajectory of actor
``n`` on instance ``k`` in iteration ``it`` and ``(2, it, epoch)`` the
minibatch shuffle.  Trajectories may be collected on a thread pool; results
are reassembled in ``(k, n)`` order, so the thread count never changes the
outcome.
"""
from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..adaptation import get_method, init_policy
from ..evo.config import EvolutionConfig
from ..exceptions import InvalidArgumentError, TrainingDivergence
from ..net.checkpoint import save_params
from ..net.network import NetworkParams
from ..validation import derive_rng
from .hyperparams import PpoHyperParams
from .objectives import Adam, ppo_gradients
from .rollout import collect_trajectory, concat_batches

LOG_FIELDS = ("iteration", "samples", "mean_return", "loss", "policy_loss", "value_loss", "entropy")


@dataclass
class TrainResult:
    params: NetworkParams
    log: list = field(default_factory=list)


def _fmt(v):
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def train(
    method,
    problems,
    hp: PpoHyperParams,
    cfg: EvolutionConfig | None = None,
    seed: int = 0,
    params: NetworkParams | None = None,
    dtype=np.float32,
    log_path=None,
    checkpoint_dir=None,
    checkpoint_every: int = 0,
    threads: int = 1,
    chunk_size: int = 64,
) -> TrainResult:
    """Train a policy for ``method`` on the instance list ``problems``.

    ``hp.episode_length`` overrides ``cfg.episode_length``.  With
    ``checkpoint_every > 0`` a checkpoint ``iter_<i>.bin`` is written every
    that many iterations; the progress log is a CSV with one row per
    iteration.
    """
    m = get_method(method)
    problems = list(problems)
    if not problems:
        raise InvalidArgumentError("training needs at least one instance")
    kind = m.check_problem(problems[0])
    for p in problems:
        m.check_problem(p)
    if len(problems) != hp.instances:
        hp = hp.replace(instances=len(problems))
    cfg = EvolutionConfig.defaults(kind) if cfg is None else cfg
    cfg = cfg.replace(episode_length=hp.episode_length)
    if params is None:
        params = init_policy(m, problems[0], hp.filters, hp.depth, derive_rng(seed, 0), dtype)
    else:
        params = params.copy()
    opt = Adam(hp.learning_rate)
    result = TrainResult(params)

    fh = writer = None
    if log_path is not None:
        Path(log_path).parent.mkdir(parents=True, exist_ok=True)
        fh = open(log_path, "w", newline="", encoding="utf-8")
        writer = csv.writer(fh)
        writer.writerow(LOG_FIELDS)
    pool = ThreadPoolExecutor(threads) if threads > 1 else None
    try:
        for it in range(hp.iterations):
            frozen = params.copy()
            jobs = [(k, n) for k in range(len(problems)) for n in range(hp.actors)]

            def collect(job, frozen=frozen, it=it):
                k, n = job
                return collect_trajectory(m, frozen, problems[k], cfg, derive_rng(seed, 1, it, k, n), hp)

            trajs = list(pool.map(collect, jobs)) if pool else [collect(j) for j in jobs]
            batch = concat_batches(trajs)
            if hp.normalize_advantages:
                a = batch.advantages
                batch.advantages = (a - a.mean()) / (a.std() + 1e-8)

            terms_acc, steps = {}, 0
            for epoch in range(hp.epochs):
                order = derive_rng(seed, 2, it, epoch).permutation(len(batch))
                for start in range(0, len(batch), hp.minibatch_size):
                    mb = batch.take(order[start : start + hp.minibatch_size])
                    try:
                        grads, terms = ppo_gradients(mb, params, hp, chunk_size)
                    except TrainingDivergence as exc:
                        raise TrainingDivergence(
                            f"PPO loss diverged in iteration {it}", iteration=it, diagnostics=exc.diagnostics
                        ) from exc
                    opt.step(params, grads)
                    for k, v in terms.items():
                        terms_acc[k] = terms_acc.get(k, 0.0) + v
                    steps += 1

            row = {
                "iteration": it,
                "samples": len(batch),
                "mean_return": float(np.mean([t.episode_return for t in trajs])),
                **{k: terms_acc.get(k, 0.0) / max(steps, 1) for k in ("loss", "policy_loss", "value_loss", "entropy")},
            }
            result.log.append(row)
            if writer is not None:
                writer.writerow([_fmt(row[k]) for k in LOG_FIELDS])
                fh.flush()
            if checkpoint_dir is not None and checkpoint_every > 0 and (it + 1) % checkpoint_every == 0:
                save_params(params, Path(checkpoint_dir) / f"iter_{it + 1}.bin")
    finally:
        if fh is not None:
            fh.close()
        if pool is not None:
            pool.shutdown()
    return result
