"""Competing schemes: uncoded distribution, polynomial codes and MatDot codes.

Each scheme has an encoder producing per-worker tasks, the worker
computation, and an exact decoder.  Work counters use one dot product (or
one block addition) as the unit.  Decoder counters follow the complexity
charged by the latency model, t log^2 t for interpolating t points, not the
cubic Vandermonde solve actually run here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, NamedTuple, Sequence

from .interpolate import coefficient_determined, interpolate_blocks
from .linalg import DEFAULT_PRIME, BlockTask, DenseMatrix, PartitionPlan, assemble, grid_tasks


class InsufficientResults(ValueError):
    pass


class SchemeContract(NamedTuple):
    """What the latency and communication models need from any scheme."""

    encode_work: float
    task_work: int
    output_symbols: int
    recovery_threshold: int
    recovery_rule: str


def _results_list(results) -> list[tuple[int, DenseMatrix]]:
    items = list(results.items()) if isinstance(results, Mapping) else list(results)
    return [(int(x), v) for x, v in items]


def _check_points(points: Sequence[int], modulus: int | None) -> None:
    normed = [x % modulus if modulus else x for x in points]
    if len(set(normed)) != len(normed):
        raise ValueError("evaluation points must be pairwise distinct")
    if any(x == 0 for x in normed):
        raise ValueError("evaluation points must be nonzero")


# -- polynomial codes --------------------------------------------------------


@dataclass(frozen=True)
class PolyCodeSpec:
    """Polynomial code with an m-way split of both operands over ``workers`` processors."""

    m: int
    workers: int
    points: tuple[int, ...] | None = None
    modulus: int | None = DEFAULT_PRIME

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be positive")
        pts = tuple(range(1, self.workers + 1)) if self.points is None else tuple(self.points)
        if len(pts) != self.workers:
            raise ValueError("need one evaluation point per worker")
        _check_points(pts, self.modulus)
        if self.m * self.m > self.workers:
            raise ValueError(f"recovery threshold m^2={self.m ** 2} exceeds {self.workers} workers")
        object.__setattr__(self, "points", pts)

    @property
    def recovery_threshold(self) -> int:
        return self.m * self.m

    @property
    def encode_work(self) -> int:
        # m - 1 additions per encoded operand, two operands, all workers but one
        return 2 * (self.m - 1) * (self.workers - 1)

    @property
    def decode_work(self) -> float:
        t = self.recovery_threshold
        return t * math.log(t) ** 2

    def contract(self, k: int, b: int) -> SchemeContract:
        return SchemeContract(self.encode_work, 1, (k // self.m) * (b // self.m), self.recovery_threshold, "any m^2 workers")


@dataclass(frozen=True)
class PolyTask:
    worker: int
    point: int
    a: DenseMatrix
    b: DenseMatrix

    def compute(self) -> DenseMatrix:
        return self.a.T @ self.b


def _split_cols(M: DenseMatrix, parts: int) -> list[DenseMatrix]:
    if M.cols % parts:
        raise ValueError(f"{parts} does not divide {M.cols} columns")
    w = M.cols // parts
    return [M[:, i * w : (i + 1) * w] for i in range(parts)]


def _split_rows(M: DenseMatrix, parts: int) -> list[DenseMatrix]:
    if M.rows % parts:
        raise ValueError(f"{parts} does not divide {M.rows} rows")
    h = M.rows // parts
    return [M[i * h : (i + 1) * h, :] for i in range(parts)]


def _poly_eval(parts: Sequence[DenseMatrix], x: int, exps: Sequence[int]) -> DenseMatrix:
    out = parts[0] * pow(x, exps[0])
    for part, e in zip(parts[1:], exps[1:]):
        out = out + part * pow(x, e)
    return out


def poly_encode(A: DenseMatrix, B: DenseMatrix, spec: PolyCodeSpec) -> list[PolyTask]:
    """Worker j gets ``a_j = sum_i A_i x_j^i`` and ``b_j = sum_i B_i x_j^(i m)``."""
    if A.rows != B.rows:
        raise ValueError("A and B must share the inner dimension")
    if A.modulus != spec.modulus or B.modulus != spec.modulus:
        raise ValueError("operands and code must use the same ring")
    A_parts, B_parts = _split_cols(A, spec.m), _split_cols(B, spec.m)
    a_exps = list(range(spec.m))
    b_exps = [i * spec.m for i in range(spec.m)]
    return [
        PolyTask(j, x, _poly_eval(A_parts, x, a_exps), _poly_eval(B_parts, x, b_exps))
        for j, x in enumerate(spec.points)
    ]


def poly_decode(results, spec: PolyCodeSpec) -> dict[int, DenseMatrix]:
    """Recover the m^2 source blocks from any m^2 ``(point, value)`` pairs.

    The product polynomial's coefficient of ``x^(i + j m)`` is ``A_i^T B_j``,
    returned under row-major source index ``i m + j + 1``.
    """
    items = _results_list(results)
    t = spec.recovery_threshold
    if len({x for x, _ in items}) != len(items):
        raise ValueError("repeated evaluation points")
    if len(items) < t:
        raise InsufficientResults(f"need {t} results, got {len(items)}")
    items = items[:t]
    coeffs = interpolate_blocks([x for x, _ in items], [v for _, v in items], spec.modulus)
    m = spec.m
    return {i * m + j + 1: coeffs[i + j * m] for i in range(m) for j in range(m)}


def poly_layout(A: DenseMatrix, B: DenseMatrix, spec: PolyCodeSpec) -> PartitionPlan:
    m = spec.m
    return PartitionPlan("square", m, A.rows, A.cols, B.cols, (m, m), (A.rows, A.cols // m), (B.rows, B.cols // m))


# -- MatDot codes ----------------------------------------------------------------


@dataclass(frozen=True)
class MatDotSpec:
    """MatDot code splitting the inner dimension into ``m`` parts."""

    m: int
    workers: int
    points: tuple[int, ...] | None = None
    modulus: int | None = DEFAULT_PRIME

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be positive")
        pts = tuple(range(1, self.workers + 1)) if self.points is None else tuple(self.points)
        if len(pts) != self.workers:
            raise ValueError("need one evaluation point per worker")
        _check_points(pts, self.modulus)
        if 2 * self.m - 1 > self.workers:
            raise ValueError(f"recovery threshold 2m-1={2 * self.m - 1} exceeds {self.workers} workers")
        object.__setattr__(self, "points", pts)

    @property
    def recovery_threshold(self) -> int:
        return 2 * self.m - 1

    @staticmethod
    def latency_threshold(k: int, b: int) -> int:
        """Threshold ``k + b - 1`` used by the latency accounting."""
        return k + b - 1

    @property
    def encode_work(self) -> int:
        return 2 * (self.m - 1) * (self.workers - 1)

    @staticmethod
    def decode_work(k: int, b: int) -> float:
        return k * k * b * math.log(k) ** 2

    def contract(self, k: int, b: int) -> SchemeContract:
        return SchemeContract(self.encode_work, 1, k * b, self.recovery_threshold, "any 2m-1 workers")


@dataclass(frozen=True)
class MatDotTask:
    worker: int
    point: int
    a: DenseMatrix
    b: DenseMatrix

    def compute(self) -> DenseMatrix:
        return self.a.T @ self.b


def matdot_encode(A: DenseMatrix, B: DenseMatrix, spec: MatDotSpec) -> list[MatDotTask]:
    """``p_A(x) = sum_i A_i x^i``, ``p_B(x) = sum_i B_i x^(m-1-i)`` over row blocks of A and B."""
    if A.rows != B.rows:
        raise ValueError("A and B must share the inner dimension")
    if A.modulus != spec.modulus or B.modulus != spec.modulus:
        raise ValueError("operands and code must use the same ring")
    A_parts, B_parts = _split_rows(A, spec.m), _split_rows(B, spec.m)
    a_exps = list(range(spec.m))
    b_exps = [spec.m - 1 - i for i in range(spec.m)]
    return [
        MatDotTask(j, x, _poly_eval(A_parts, x, a_exps), _poly_eval(B_parts, x, b_exps))
        for j, x in enumerate(spec.points)
    ]


def matdot_decodable(points: Sequence[int], spec: MatDotSpec) -> bool:
    """Rank check: do these points determine the ``x^(m-1)`` coefficient?"""
    return coefficient_determined(list(points), 2 * spec.m - 1, spec.m - 1, spec.modulus)


def matdot_decode(results, spec: MatDotSpec) -> DenseMatrix:
    items = _results_list(results)
    if len({x for x, _ in items}) != len(items):
        raise ValueError("repeated evaluation points")
    t = spec.recovery_threshold
    if len(items) < t or not matdot_decodable([x for x, _ in items], spec):
        raise InsufficientResults(f"{len(items)} results do not determine the product (need {t})")
    items = items[:t]
    coeffs = interpolate_blocks([x for x, _ in items], [v for _, v in items], spec.modulus)
    return coeffs[spec.m - 1]


# -- uncoded -----------------------------------------------------------------------


def uncoded_plan(A: DenseMatrix, B: DenseMatrix) -> tuple[PartitionPlan, list[BlockTask]]:
    """One task per dot product ``a_i . b_j``; all kb are needed."""
    if A.rows != B.rows:
        raise ValueError("A and B must share the inner dimension")
    k, b = A.cols, B.cols
    plan = PartitionPlan("entrywise", 1, A.rows, k, b, (k, b), (A.rows, 1), (B.rows, 1))
    return plan, grid_tasks(k, b, k, b)


def uncoded_contract(k: int, b: int) -> SchemeContract:
    return SchemeContract(0, 1, 1, k * b, "all kb tasks")


def uncoded_decode(results: Mapping[int, DenseMatrix], plan: PartitionPlan) -> DenseMatrix:
    missing = sorted(set(range(1, plan.task_count + 1)) - set(results))
    if missing:
        raise InsufficientResults(f"uncoded product missing tasks {missing}")
    return assemble(results, plan)
