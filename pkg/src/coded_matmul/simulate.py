"""Monte Carlo simulation of the encode / parallel / decode phases.

Trial ``i`` draws from its own Philox stream keyed by ``(seed, i)``, so a
run is reproducible bit for bit whatever the number of worker processes.

Per trial:

* encode and decode: the phase's work is split evenly over the ``p``
  master processors.  Under the default ``"scaled"`` master model each
  processor's share takes ``share * Exp(c mu)`` (a scaled exponential,
  same as a cluster processor doing several dot products) and the phase
  ends with the slowest processor.  ``"per_unit"`` instead sums one
  ``Exp(c mu)`` per work unit.
* parallel: cluster processor times are ``units * Exp(mu)``.  Order
  statistics are sampled directly from their exact distributions (a Beta
  variate for the l-th of N exponentials, inverse-CDF for the maximum of a
  node's processors) instead of drawing all N times.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .latency import LatencyParams, PhaseTimes, closed_form_phases, scheme_work

MASTER_MODELS = ("scaled", "per_unit")


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=[seed & 0xFFFFFFFFFFFFFFFF, trial]))


def _master_phase(rng: np.random.Generator, work: float, params: LatencyParams, model: str) -> float:
    if work <= 0:
        return 0.0
    rate = params.c * params.mu
    if model == "scaled":
        share = work / params.p
        return share * float(rng.exponential(1.0, size=params.p).max()) / rate
    units = int(round(work))
    base, extra = divmod(units, params.p)
    counts = np.full(params.p, base)
    counts[:extra] += 1
    counts = counts[counts > 0]
    if counts.size == 0:
        return 0.0
    return float(rng.gamma(counts, 1.0).max()) / rate


def _order_stat_exp(rng: np.random.Generator, l: int, N: int) -> float:
    """l-th smallest of N unit exponentials: ``-log(1 - U_(l))`` with ``1 - U_(l) ~ Beta(N - l + 1, l)``."""
    return -math.log(rng.beta(N - l + 1, l))


def _node_maxima(rng: np.random.Generator, node_b: np.ndarray, node_sigma: np.ndarray, mu: float) -> np.ndarray:
    """Slowest processor per node: node i runs ``node_b[i]`` processors of ``node_sigma[i] * Exp(mu)``."""
    u = rng.random(node_b.size)
    # P(max <= t) = (1 - e^-t)^b  =>  t = -log(1 - u^(1/b))
    return -np.log(-np.expm1(np.log(u) / node_b)) * node_sigma / mu


def _parallel_phase(rng: np.random.Generator, scheme: str, params: LatencyParams, work) -> float:
    mu = params.mu
    if work.rule in ("max", "order"):
        return _order_stat_exp(rng, work.order, work.pool) / mu
    if scheme == "amds":
        node_b = np.full(params.n, float(params.b))
        node_sigma = np.full(params.n, float(params.sigma))
    else:
        node_b, node_sigma = params.node_profile()
        node_b = np.round(node_b)
    times = _node_maxima(rng, node_b, node_sigma, mu)
    return float(np.partition(times, work.order - 1)[work.order - 1])


def simulate_trials(
    scheme: str, params: LatencyParams, seed: int, start: int, stop: int, master_model: str = "scaled"
) -> np.ndarray:
    """Phase times for trials ``start..stop-1``, shape ``(stop - start, 3)``."""
    if master_model not in MASTER_MODELS:
        raise ValueError(f"master_model must be one of {MASTER_MODELS}")
    work = scheme_work(scheme, params)
    out = np.empty((stop - start, 3))
    for row, trial in enumerate(range(start, stop)):
        rng = trial_rng(seed, trial)
        par = _parallel_phase(rng, scheme, params, work)
        enc = _master_phase(rng, work.encode_work, params, master_model)
        dec = _master_phase(rng, work.decode_work, params, master_model)
        out[row] = (enc, par, dec)
    return out


def _chunk(args):
    return simulate_trials(*args)


@dataclass(frozen=True)
class SimOutcome:
    scheme: str
    params: LatencyParams
    trials: int
    seed: int
    mean: PhaseTimes
    var: PhaseTimes
    total_mean: float
    total_var: float
    closed_natural: PhaseTimes
    closed_harmonic: PhaseTimes

    @property
    def stderr(self) -> float:
        return math.sqrt(self.total_var / self.trials)


def mc_simulate(
    scheme: str,
    params: LatencyParams,
    trials: int = 10_000,
    seed: int = 0,
    workers: int = 1,
    master_model: str = "scaled",
    variant: str = "corrected",
) -> SimOutcome:
    """Estimate ``E[T]`` and its phase breakdown by simulation.

    ``workers > 1`` fans contiguous trial ranges out to processes; results
    are concatenated in trial order so the outcome does not depend on it.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    scheme_work(scheme, params)  # fail fast on invalid parameters
    if workers <= 1:
        samples = simulate_trials(scheme, params, seed, 0, trials, master_model)
    else:
        workers = min(workers, trials, os.cpu_count() or 1)
        edges = np.linspace(0, trials, workers + 1).astype(int)
        jobs = [(scheme, params, seed, int(a), int(b), master_model) for a, b in zip(edges[:-1], edges[1:]) if b > a]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            samples = np.concatenate(list(pool.map(_chunk, jobs)))
    totals = samples.sum(axis=1)
    ddof = 1 if trials > 1 else 0
    means = samples.mean(axis=0)
    variances = samples.var(axis=0, ddof=ddof)
    return SimOutcome(
        scheme=scheme,
        params=params,
        trials=trials,
        seed=seed,
        mean=PhaseTimes(*map(float, means)),
        var=PhaseTimes(*map(float, variances)),
        total_mean=float(totals.mean()),
        total_var=float(totals.var(ddof=ddof)),
        closed_natural=closed_form_phases(scheme, params, "natural", variant),
        closed_harmonic=closed_form_phases(scheme, params, "harmonic", variant),
    )


def sample_order_stat(l: int, b: int, mu: float = 1.0, trials: int = 100_000, seed: int = 0, sigma_scale: float = 1.0) -> np.ndarray:
    """Brute force: draw all b exponentials per trial and take the l-th smallest."""
    if not 1 <= l <= b:
        raise ValueError(f"need 1 <= l <= b, got l={l}, b={b}")
    rng = np.random.default_rng(seed)
    draws = rng.exponential(sigma_scale / mu, size=(trials, b))
    return np.partition(draws, l - 1, axis=1)[:, l - 1]
