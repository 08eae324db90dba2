"""Closed-form end-to-end latency of the coded schemes.

Task times are exponential: one dot product on a cluster processor takes
``Exp(mu)`` and a processor doing ``w`` of them takes ``w * Exp(mu)``.
Master processors run ``c`` times faster.  The total is
``T = T_encode + T_parallel + T_decode``; transmission is only counted in
symbols (see :mod:`coded_matmul.comm`).

Two log conventions are available everywhere:

``natural``
    the asymptotic forms with natural logarithms.  ``log(p)`` at ``p = 1``
    is taken as 1 so the master term reduces to the plain expectation.
``harmonic``
    logarithms that stand for exponential order statistics are replaced by
    their exact harmonic-number values (``log p -> H_p``, ``log b -> H_b``,
    ``log(n/(n-k)) -> H_nb - H_(n-k)b`` and so on).  Work counts such as
    ``kb log^2(kb)`` keep natural logs in both modes.

The dispersion term of the array-code formulas comes in two variants.
``printed`` uses ``b^(sigma-1)/mu``, derived from the unscaled exponential
density; ``corrected`` uses the density of a sigma-scaled exponential,
which gives ``sigma/mu``.  The printed variant is ~1e12 at b=100, sigma=7,
so ``corrected`` is the default.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.special import digamma

from .arraycode import max_blocklength

SCHEMES = ("uncoded", "poly", "matdot", "amds", "asym")
MODES = ("natural", "harmonic")
VARIANTS = ("corrected", "printed")
ROYSTON_ALPHA = 0.375


def harmonic(b: float) -> float:
    """``H_b = sum_{j<=b} 1/j``; real ``b`` via ``psi(b + 1) + gamma``."""
    if b < 0:
        raise ValueError("harmonic number needs b >= 0")
    if b == int(b) and b <= 64:
        return math.fsum(1.0 / j for j in range(1, int(b) + 1))
    return float(digamma(b + 1.0) + np.euler_gamma)


def exp_order_stat_mean(l: int, b: int, mu: float = 1.0, sigma_scale: float = 1.0) -> float:
    """Mean of the l-th smallest of b i.i.d. ``sigma_scale * Exp(mu)`` times."""
    if not 1 <= l <= b:
        raise ValueError(f"need 1 <= l <= b, got l={l}, b={b}")
    return sigma_scale * (harmonic(b) - harmonic(b - l)) / mu


def phi_inv_approx(y: float) -> float:
    """Tail approximation of the standard normal quantile, ``sqrt(2 log(1/(1-y)))``.

    Asymptotic in ``y -> 1``: the relative error against the exact quantile
    is about 30% at y = 0.99, 15% at 1 - 1e-4 and 10% at 1 - 1e-6.
    """
    if not 0 < y < 1:
        raise ValueError("y must lie in (0, 1)")
    return math.sqrt(-2.0 * math.log1p(-y))


def royston_position(i: int, n: int, alpha: float = ROYSTON_ALPHA) -> float:
    """Plotting position ``(i - alpha)/(n - 2 alpha + 1)`` for the i-th of n."""
    return (i - alpha) / (n - 2 * alpha + 1)


def _log(x: float, mode: str) -> float:
    return harmonic(x) if mode == "harmonic" else math.log(x)


def master_factor(p: int, mode: str = "natural") -> float:
    """Expected max of p parallel master shares, in units of one share."""
    if p < 1:
        raise ValueError("p must be >= 1")
    if mode == "harmonic":
        return harmonic(p)
    return math.log(p) if p > 1 else 1.0


@dataclass(frozen=True)
class LatencyParams:
    """Cluster and code parameters shared by every latency formula.

    ``node_b``/``node_sigma`` describe an asymptotically-MDS cluster with
    unequal nodes; when absent every node has ``(1 + epsilon) b`` processors
    doing ``sigma`` dot products each.
    """

    k: int
    n: int
    b: int = 20
    sigma: int = 7
    mu: float = 1.0
    c: float = 50.0
    p: int = 50
    epsilon: float = 0.0
    delta: float | None = None
    node_b: tuple[float, ...] | None = field(default=None)
    node_sigma: tuple[int, ...] | None = field(default=None)

    def __post_init__(self):
        if self.mu <= 0:
            raise ValueError("mu must be positive")
        if self.c < 1:
            raise ValueError("compute factor c must be >= 1")
        if self.p < 1:
            raise ValueError("p must be >= 1")
        if self.k < 1 or self.b < 1 or self.sigma < 1:
            raise ValueError("k, b, sigma must be positive")
        if self.n < self.k:
            raise ValueError(f"n={self.n} < k={self.k}")
        if self.epsilon < 0:
            raise ValueError("epsilon must be non-negative")
        for name in ("node_b", "node_sigma"):
            val = getattr(self, name)
            if val is not None:
                val = tuple(val)
                if len(val) != self.n:
                    raise ValueError(f"{name} needs one entry per node ({self.n})")
                object.__setattr__(self, name, val)

    @property
    def t(self) -> int:
        return self.n - self.k

    @property
    def b_prime(self) -> float:
        if self.node_b is not None:
            return float(np.mean(self.node_b))
        return (1 + self.epsilon) * self.b

    @property
    def straggler_fraction(self) -> float:
        if self.delta is not None:
            return self.delta
        return (self.n - self.k) / self.k

    def node_profile(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-node processor counts and degrees for the asymptotic scheme."""
        bs = np.full(self.n, self.b_prime) if self.node_b is None else np.asarray(self.node_b, dtype=float)
        ss = np.full(self.n, self.sigma) if self.node_sigma is None else np.asarray(self.node_sigma, dtype=float)
        return bs, ss

    def with_(self, **changes) -> LatencyParams:
        return replace(self, **changes)


def table1_params(k: int, n: int | None = None, **overrides) -> LatencyParams:
    """Simulation defaults b=20, c=50, sigma=7, p=50, mu=1; n from the array-code bound."""
    base = dict(b=20, c=50.0, sigma=7, p=50, mu=1.0)
    base.update(overrides)
    if n is None:
        n = max_blocklength(k, base["b"], base["sigma"])
    return LatencyParams(k=k, n=n, **base)


def _require_stragglers(params: LatencyParams) -> None:
    if params.n <= params.k:
        raise ValueError(f"need n > k (n={params.n}, k={params.k}); log(n/(n-k)) is undefined")


@dataclass(frozen=True)
class PhaseTimes:
    t_encode: float
    t_parallel: float
    t_decode: float

    @property
    def total(self) -> float:
        return self.t_encode + self.t_parallel + self.t_decode


@dataclass(frozen=True)
class SchemeWork:
    """Master work (in dot-product units) and the cluster completion rule."""

    encode_work: float
    decode_work: float
    rule: str  # "max", "order", "nodes"
    order: int = 0
    pool: int = 0


def scheme_work(scheme: str, params: LatencyParams) -> SchemeWork:
    """Work accounting shared by the closed forms and the simulator."""
    k, n, b, s = params.k, params.n, params.b, params.sigma
    if scheme == "uncoded":
        return SchemeWork(0.0, 0.0, "max", k * b, k * b)
    if scheme == "poly":
        _require_stragglers(params)
        return SchemeWork(2.0 * n * b * b, k * b * math.log(k * b) ** 2, "order", k * b, n * b)
    if scheme == "matdot":
        if not n * b > k + b - 1:
            raise ValueError(f"MatDot needs nb > k + b - 1 (nb={n * b}, k+b-1={k + b - 1})")
        return SchemeWork(2.0 * n * b * b, k * k * b * math.log(k) ** 2, "order", k + b - 1, n * b)
    if scheme == "amds":
        _require_stragglers(params)
        return SchemeWork(0.0, float(s * k * b), "nodes", k, n)
    if scheme == "asym":
        _require_stragglers(params)
        _, sigmas = params.node_profile()
        return SchemeWork(0.0, float(sigmas.max()) * k * params.b_prime, "nodes", k, n)
    raise ValueError(f"unknown scheme {scheme!r}; choose from {SCHEMES}")


def _master_time(work: float, params: LatencyParams, mode: str) -> float:
    if work == 0:
        return 0.0
    return work / (params.c * params.p * params.mu) * master_factor(params.p, mode)


def _check(mode: str, variant: str = "corrected") -> None:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")


def expected_T_uncoded(k: int, b: int, mu: float = 1.0, mode: str = "harmonic") -> float:
    """Slowest of kb single-dot-product processors: ``H_kb/mu`` (or ``log(kb)/mu``)."""
    _check(mode)
    if k * b < 1:
        raise ValueError("kb must be >= 1")
    return _log(k * b, mode) / mu


def poly_phases(params: LatencyParams, mode: str = "natural") -> PhaseTimes:
    _check(mode)
    w = scheme_work("poly", params)
    k, n, b, mu = params.k, params.n, params.b, params.mu
    if mode == "harmonic":
        par = (harmonic(n * b) - harmonic((n - k) * b)) / mu
    else:
        par = math.log(n / (n - k)) / mu
    return PhaseTimes(_master_time(w.encode_work, params, mode), par, _master_time(w.decode_work, params, mode))


def expected_T_poly(params: LatencyParams, mode: str = "natural") -> float:
    """``(2nb^2 + kb log^2(kb))/(c p mu) log(p) + log(n/(n-k))/mu``."""
    return poly_phases(params, mode).total


def matdot_phases(params: LatencyParams, mode: str = "natural") -> PhaseTimes:
    _check(mode)
    w = scheme_work("matdot", params)
    k, n, b, mu = params.k, params.n, params.b, params.mu
    if mode == "harmonic":
        par = (harmonic(n * b) - harmonic(n * b - (k + b - 1))) / mu
    else:
        par = math.log(n / (n - k / b)) / mu
    return PhaseTimes(_master_time(w.encode_work, params, mode), par, _master_time(w.decode_work, params, mode))


def expected_T_matdot(params: LatencyParams, mode: str = "natural") -> float:
    """``(2nb^2 + k^2 b log^2 k)/(c p mu) log(p) + log(n/(n - k/b))/mu``."""
    return matdot_phases(params, mode).total


def amds_dispersion(params: LatencyParams, variant: str = "corrected") -> float:
    """Spread of one node's completion time around its mean."""
    if variant == "printed":
        return params.b ** (params.sigma - 1) / params.mu
    return params.sigma / params.mu


def amds_phases(params: LatencyParams, mode: str = "natural", variant: str = "corrected") -> PhaseTimes:
    _check(mode, variant)
    _require_stragglers(params)
    if params.b < 2:
        raise ValueError("array-code latency needs b >= 2")
    w = scheme_work("amds", params)
    sig, mu = params.sigma, params.mu
    quantile = math.sqrt(2 * math.log(params.n / (params.n - params.k)))
    par = sig / mu * _log(params.b, mode) + amds_dispersion(params, variant) * quantile
    return PhaseTimes(0.0, par, _master_time(w.decode_work, params, mode))


def expected_T_amds(params: LatencyParams, mode: str = "natural", variant: str = "corrected") -> float:
    """``sigma k b/(c p mu) log(p) + (sigma/mu) log(b) + V sqrt(2 log(n/(n-k)))``."""
    return amds_phases(params, mode, variant).total


def asym_node_moments(
    node_b: Sequence[float], node_sigma: Sequence[float], mu: float = 1.0, mode: str = "natural", variant: str = "corrected"
) -> tuple[float, float]:
    """Mean and spread ``(mu_b, sigma_b)`` of the per-node completion times.

    ``mu_b = (1/(n mu)) sum sigma_i log b_i`` and ``sigma_b^2`` averages the
    within-node variance term plus the squared deviation of each node's
    mean from ``mu_b``.
    """
    bs = np.asarray(node_b, dtype=float)
    ss = np.asarray(node_sigma, dtype=float)
    logs = np.array([_log(x, mode) for x in bs])
    means = ss * logs / mu
    mu_b = float(means.mean())
    if variant == "printed":
        within = bs ** (2 * (ss - 1)) / mu**2
    else:
        within = ss**2 / mu**2
    sigma_b = math.sqrt(float(np.mean(within + (means - mu_b) ** 2)))
    return mu_b, sigma_b


def asym_spread_bound(node_b: Sequence[float], node_sigma: Sequence[float], mu: float = 1.0, variant: str = "corrected") -> float:
    """Upper bound on ``sigma_b``: ``(1/mu) sqrt(n (x_max - x_min)^2/4 + mean within-node term)``
    with ``x_i = sigma_i log b_i``."""
    bs = np.asarray(node_b, dtype=float)
    ss = np.asarray(node_sigma, dtype=float)
    x = ss * np.log(bs)
    if variant == "printed":
        within = float(np.mean(bs ** (2 * (ss - 1))))
    else:
        within = float(np.mean(ss**2))
    return math.sqrt(len(bs) * (x.max() - x.min()) ** 2 / 4 + within) / mu


def asym_phases(params: LatencyParams, mode: str = "natural", variant: str = "corrected") -> PhaseTimes:
    _check(mode, variant)
    _require_stragglers(params)
    delta = params.straggler_fraction
    if delta <= 0:
        raise ValueError("asymptotic scheme needs delta > 0")
    bs, ss = params.node_profile()
    if bs.min() < 2:
        raise ValueError("asymptotic latency needs b_i >= 2")
    w = scheme_work("asym", params)
    sig = float(ss.max())
    spread = asym_spread_bound(bs, ss, params.mu, variant)
    par = sig / params.mu * _log(params.b_prime, mode) + spread * math.sqrt(2 * math.log((1 + delta) / delta))
    return PhaseTimes(0.0, par, _master_time(w.decode_work, params, mode))


def expected_T_asym(params: LatencyParams, mode: str = "natural", variant: str = "corrected") -> float:
    """Upper bound ``sigma k b'/(c p mu) log(p) + (sigma/mu) log(b') + sigma_b_bar sqrt(2 log((1+delta)/delta))``.

    ``sigma_b_bar`` already carries its ``1/mu``; with equal nodes the bound
    coincides with :func:`expected_T_amds` at ``delta = (n - k)/k``.
    """
    return asym_phases(params, mode, variant).total


def closed_form_phases(scheme: str, params: LatencyParams, mode: str = "natural", variant: str = "corrected") -> PhaseTimes:
    if scheme == "uncoded":
        return PhaseTimes(0.0, expected_T_uncoded(params.k, params.b, params.mu, mode), 0.0)
    if scheme == "poly":
        return poly_phases(params, mode)
    if scheme == "matdot":
        return matdot_phases(params, mode)
    if scheme == "amds":
        return amds_phases(params, mode, variant)
    if scheme == "asym":
        return asym_phases(params, mode, variant)
    raise ValueError(f"unknown scheme {scheme!r}; choose from {SCHEMES}")


def expected_T(scheme: str, params: LatencyParams, mode: str = "natural", variant: str = "corrected") -> float:
    return closed_form_phases(scheme, params, mode, variant).total
