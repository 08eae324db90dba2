"""Symbol counts on the master-to-cluster and cluster-to-master links.

Master-to-slave traffic scales with the inner dimension ``s`` and is kept
as ``coefficient * s``.  Each link is normalized by its uncoded counterpart
(``2 s k b`` and ``k b`` symbols) minus one, and the total overhead is the
sum of the two, so ``s`` cancels.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

COMM_SCHEMES = ("uncoded", "poly", "matdot", "amds", "asym")


@dataclass(frozen=True)
class CommCost:
    scheme: str
    master_slave_per_s: Fraction
    slave_master_symbols: Fraction
    normalized_overhead_ms: float
    normalized_overhead_sm: float
    total_overhead: float
    s: int = 1

    @property
    def master_slave_symbols(self) -> Fraction:
        return self.master_slave_per_s * self.s


def _int_if_whole(x: Fraction):
    return int(x) if x.denominator == 1 else x


def comm_symbols(scheme: str, k: int, n: int, b: int, sigma: int = 7, epsilon: float = 0.0, s: int = 1) -> CommCost:
    """Per-scheme traffic:

    ========  ===============  =================
    scheme    master -> slave  slave -> master
    ========  ===============  =================
    uncoded   2 s k b          k b
    poly      2 s n b          k b
    matdot    2 s n b          k b (k + b - 1)
    amds      2 sigma s n b    k b
    asym      2 sigma s n b'   k b'
    ========  ===============  =================

    with ``b' = (1 + epsilon) b``.
    """
    if s < 1:
        raise ValueError("s must be >= 1")
    if n < k:
        raise ValueError(f"n={n} < k={k}")
    eps = Fraction(epsilon)
    b_prime = (1 + eps) * b
    if scheme == "uncoded":
        ms, sm = Fraction(2 * k * b), Fraction(k * b)
    elif scheme == "poly":
        ms, sm = Fraction(2 * n * b), Fraction(k * b)
    elif scheme == "matdot":
        ms, sm = Fraction(2 * n * b), Fraction(k * b * (k + b - 1))
    elif scheme == "amds":
        ms, sm = Fraction(2 * sigma * n * b), Fraction(k * b)
    elif scheme == "asym":
        ms, sm = 2 * sigma * n * b_prime, k * b_prime
    else:
        raise ValueError(f"unknown scheme {scheme!r}; choose from {COMM_SCHEMES}")
    return CommCost(
        scheme=scheme,
        master_slave_per_s=_int_if_whole(ms),
        slave_master_symbols=_int_if_whole(sm),
        normalized_overhead_ms=float(ms / (2 * k * b) - 1),
        normalized_overhead_sm=float(sm / (k * b) - 1),
        total_overhead=float(ms / (2 * k * b) + sm / (k * b) - 2),
        s=s,
    )


class AsymOverhead(NamedTuple):
    # n/k + (n/k + 1) eps - 1; the x axis of the cost/latency trade-off plot
    total: float
    # sigma n (1 + eps)/k - 1, the master-to-slave link alone
    master_slave: float


def normalized_overhead_asym(n: int, k: int, epsilon: float, sigma: int = 7) -> AsymOverhead:
    if n < k:
        raise ValueError(f"n={n} < k={k}")
    r = Fraction(n, k)
    eps = Fraction(epsilon)
    return AsymOverhead(float(r + (r + 1) * eps - 1), float(sigma * r * (1 + eps) - 1))


def extra_symbols_asym(n: int, k: int, b: int, sigma: int, s: int, epsilon: float) -> tuple:
    """Surplus traffic of the asymptotic code over the rectangular one,
    ``(2 sigma s n eps b, k eps b)`` symbols on the two links."""
    eps = Fraction(epsilon)
    return _int_if_whole(2 * sigma * s * n * eps * b), _int_if_whole(k * eps * b)
