"""MDS array BP-XOR codes and their asymptotically-MDS relatives.

An ``[n, k, b, sigma]`` array code spreads ``kb`` source blocks over an
``n x b`` grid; every cell is the ring sum of at most ``sigma`` sources and
any ``k`` complete columns must peel back to all sources.  Columns map to
cluster nodes and cells to the processors of a node.

Source indices are 1-based (``v_1 .. v_kb``); node and processor indices
are 0-based in the Python API and 1-based in the catalog text format.
"""

from __future__ import annotations

import itertools
import math
import random
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .linalg import BlockTask, DenseMatrix, PartitionPlan, assemble
from .peeling import PeelResult, peel_decode, peels

Cell = frozenset  # frozenset[int] of 1-based source indices


class CodeNotFound(RuntimeError):
    """Backtracking budget exhausted.  Not a proof that no code exists."""


class AsymConstructionError(RuntimeError):
    """Randomized construction failed validation within its retry budget."""


class ThresholdSearchTooLarge(RuntimeError):
    """Exhaustive enumeration would exceed the configured limit."""


def _freeze_columns(columns: Iterable[Iterable[Iterable[int]]]) -> tuple[tuple[Cell, ...], ...]:
    return tuple(tuple(Cell(int(s) for s in cell) for cell in col) for col in columns)


def _check_cells(columns, kb: int, sigma: int | None) -> None:
    covered: set[int] = set()
    for i, col in enumerate(columns):
        for j, cell in enumerate(col):
            if not cell:
                raise ValueError(f"cell (node {i}, proc {j}) is empty")
            if sigma is not None and len(cell) > sigma:
                raise ValueError(f"cell (node {i}, proc {j}) has degree {len(cell)} > sigma={sigma}")
            bad = [s for s in cell if not 1 <= s <= kb]
            if bad:
                raise ValueError(f"cell (node {i}, proc {j}) references sources {bad} outside 1..{kb}")
            covered |= cell
    missing = sorted(set(range(1, kb + 1)) - covered)
    if missing:
        raise ValueError(f"sources {missing} appear in no cell")


@dataclass(frozen=True)
class ArrayCode:
    """An ``[n, k, b, sigma]`` array code; ``grid[node][proc]`` is a cell."""

    n: int
    k: int
    b: int
    sigma: int
    grid: tuple[tuple[Cell, ...], ...]

    def __post_init__(self):
        grid = _freeze_columns(self.grid)
        object.__setattr__(self, "grid", grid)
        if not 1 <= self.k <= self.n:
            raise ValueError(f"need 1 <= k <= n, got k={self.k}, n={self.n}")
        if self.b < 1 or self.sigma < 1:
            raise ValueError("b and sigma must be positive")
        if len(grid) != self.n or any(len(col) != self.b for col in grid):
            raise ValueError(f"grid must be {self.n} columns of {self.b} cells")
        _check_cells(grid, self.k * self.b, self.sigma)

    @classmethod
    def from_lists(cls, grid: Sequence[Sequence[Iterable[int]]], k: int, sigma: int | None = None) -> ArrayCode:
        cols = _freeze_columns(grid)
        sigma = max(len(c) for col in cols for c in col) if sigma is None else sigma
        return cls(n=len(cols), k=k, b=len(cols[0]), sigma=sigma, grid=cols)

    @property
    def columns(self) -> tuple[tuple[Cell, ...], ...]:
        return self.grid

    @property
    def num_sources(self) -> int:
        return self.k * self.b

    @property
    def column_sizes(self) -> tuple[int, ...]:
        return (self.b,) * self.n

    def cells(self) -> list[Cell]:
        """All cells, node-major; position in this list is the cell index."""
        return [cell for col in self.grid for cell in col]

    def cell_position(self, index: int) -> tuple[int, int]:
        return divmod(index, self.b)

    def degrees(self) -> list[list[int]]:
        return [[len(c) for c in col] for col in self.grid]

    def column_equations(self, nodes: Iterable[int]) -> list[Cell]:
        return [cell for i in sorted(nodes) for cell in self.grid[i]]


def builtin_5222() -> ArrayCode:
    """The [5,2,2,2] code: any two of five nodes recover ``v1..v4``."""
    return ArrayCode(
        n=5,
        k=2,
        b=2,
        sigma=2,
        grid=(
            ({1}, {2, 3}),
            ({2}, {1, 4}),
            ({3}, {2, 4}),
            ({4}, {1, 3}),
            ({1, 2}, {3, 4}),
        ),
    )


def systematic_code(k: int, b: int = 1) -> ArrayCode:
    """Trivial ``n = k`` code, every cell a single distinct source."""
    grid = [[{i * b + j + 1} for j in range(b)] for i in range(k)]
    return ArrayCode(n=k, k=k, b=b, sigma=1, grid=grid)


# -- blocklength bounds -------------------------------------------------------


def max_blocklength(k: int, b: int, sigma: int) -> int:
    """Largest ``n`` an ``[n, k, b, sigma]`` MDS array BP-XOR code can have.

    Valid when ``sigma < k + (k - 1)/(b - 1)``.
    """
    if k < 1 or b < 1 or sigma < 1:
        raise ValueError("k, b and sigma must be positive")
    if b > 1 and not Fraction(sigma) < k + Fraction(k - 1, b - 1):
        raise ValueError(f"degree condition sigma < k + (k-1)/(b-1) violated (sigma={sigma}, k={k}, b={b})")
    if sigma == 1:
        return k
    denom = (k - sigma) * b + sigma - 1
    if denom <= 0:
        raise ValueError(f"degree condition violated: (k - sigma) b + sigma - 1 = {denom} <= 0")
    return k + sigma - 1 + (sigma * (sigma - 1) * (b - 1)) // denom


def max_blocklength_asym(k: int, b: int, sigma: int, epsilon: float | Fraction) -> int:
    """Blocklength bound for an asymptotically-MDS code with overhead ``epsilon``.

    Needs ``2 < sigma < (bk - 1)/(b' - 1)`` with ``b' = (1 + epsilon) b`` and
    ``sigma' = sigma (1 + epsilon) < k``.
    """
    eps = Fraction(epsilon)
    if eps < 0:
        raise ValueError("epsilon must be non-negative")
    if not sigma > 2:
        raise ValueError(f"requires sigma > 2 (sigma={sigma})")
    b_prime = (1 + eps) * b
    if b_prime > 1 and not sigma < Fraction(b * k - 1) / (b_prime - 1):
        raise ValueError(f"requires sigma < (bk - 1)/(b' - 1) = {float((b * k - 1) / (b_prime - 1)):.4g}")
    sigma_p = sigma * (1 + eps)
    if not sigma_p < k:
        raise ValueError(f"requires sigma' = sigma (1 + epsilon) = {float(sigma_p):.4g} < k = {k}")
    num = b * (k * (sigma_p - sigma) + (sigma - 1) * sigma_p) - (sigma - 1) * (Fraction(3 * sigma, 2) - 1)
    denom = b * (k - sigma_p) + sigma - 1
    return k + sigma - 1 + math.floor(num / denom)


# -- decodability ---------------------------------------------------------------


def validate_mds(code: ArrayCode) -> tuple[bool, tuple[int, ...] | None]:
    """Check that every k-subset of columns peels; returns ``(ok, failing_subset)``."""
    for subset in itertools.combinations(range(code.n), code.k):
        if not peels(code.column_equations(subset), code.num_sources):
            return False, subset
    return True, None


def undecodable_cell_subsets(code: ArrayCode, size: int):
    """Yield every ``size``-subset of cell indices that does not peel."""
    cells = code.cells()
    for subset in itertools.combinations(range(len(cells)), size):
        if not peels([cells[i] for i in subset], code.num_sources):
            yield subset


def recovery_threshold(code: ArrayCode, limit: int = 2_000_000) -> int:
    """Smallest r such that every r-subset of the ``nb`` cells peels.

    Exhaustive; raises :class:`ThresholdSearchTooLarge` once more than
    ``limit`` subsets would have to be peeled.
    """
    cells = code.cells()
    kb, total = code.num_sources, len(cells)
    runs = 0
    for r in range(kb, total + 1):
        failed = False
        for subset in itertools.combinations(range(total), r):
            runs += 1
            if runs > limit:
                raise ThresholdSearchTooLarge(
                    f"more than {limit} peeling runs needed; use sampled validation instead"
                )
            if not peels([cells[i] for i in subset], kb):
                failed = True
                break
        if not failed:
            return r
    raise RuntimeError("code does not decode even from all of its cells")


# -- search-based construction -------------------------------------------------


def search_code(n: int, k: int, b: int, sigma: int, seed: int = 0, budget: int = 500_000) -> ArrayCode:
    """Backtracking search for an ``[n, k, b, sigma]`` code.

    Columns are filled cell by cell with cells in non-decreasing candidate
    order and columns in non-decreasing order (node and processor
    relabellings are symmetries).  A column is accepted only if every
    k-subset it completes peels.  ``budget`` caps the number of cell
    placements.
    """
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    if n > k:
        bound = max_blocklength(k, b, sigma)
        if n > bound:
            raise ValueError(f"n={n} exceeds the blocklength bound {bound} for (k={k}, b={b}, sigma={sigma})")
    kb = k * b
    rng = random.Random(seed)
    candidates: list[Cell] = []
    for d in range(1, min(sigma, kb) + 1):
        group = [Cell(c) for c in itertools.combinations(range(1, kb + 1), d)]
        rng.shuffle(group)
        candidates.extend(group)

    columns: list[tuple[int, ...]] = []
    placements = 0

    def uncovered(cols: Sequence[tuple[int, ...]]) -> int:
        cov: set[int] = set()
        for col in cols:
            for ci in col:
                cov |= candidates[ci]
        return kb - len(cov)

    def column_ok() -> bool:
        c = len(columns) - 1
        remaining = n - len(columns)
        for size in range(max(1, k - remaining), k):
            for rest in itertools.combinations(range(c), size - 1):
                chosen = [columns[i] for i in rest] + [columns[c]]
                if uncovered(chosen) > (k - size) * b * sigma:
                    return False
        if c + 1 >= k:
            for rest in itertools.combinations(range(c), k - 1):
                eqs = [candidates[ci] for i in (*rest, c) for ci in columns[i]]
                if not peels(eqs, kb):
                    return False
        return True

    def fill(current: list[int]) -> bool:
        nonlocal placements
        if len(current) == b:
            col = tuple(current)
            if columns and col < columns[-1]:
                return False
            columns.append(col)
            if column_ok() and (len(columns) == n or fill([])):
                return True
            columns.pop()
            return False
        start = current[-1] if current else (columns[-1][0] if columns else 0)
        for ci in range(start, len(candidates)):
            placements += 1
            if placements > budget:
                raise CodeNotFound(f"no [{n},{k},{b},{sigma}] code found within {budget} placements")
            current.append(ci)
            if fill(current):
                return True
            current.pop()
        return False

    if not fill([]):
        raise CodeNotFound(f"search space for [{n},{k},{b},{sigma}] exhausted without a code")
    grid = [[candidates[ci] for ci in col] for col in columns]
    code = ArrayCode(n=n, k=k, b=b, sigma=sigma, grid=grid)
    ok, witness = validate_mds(code)
    assert ok, witness
    return code


# -- asymptotically MDS codes --------------------------------------------------------


@dataclass(frozen=True)
class AsymArrayCode:
    """Column ``i`` holds ``b_i`` cells, i.e. a ``kb x b_i`` binary generator ``G_i``."""

    n: int
    k: int
    b: int
    columns: tuple[tuple[Cell, ...], ...]

    def __post_init__(self):
        cols = _freeze_columns(self.columns)
        object.__setattr__(self, "columns", cols)
        if not 1 <= self.k <= self.n:
            raise ValueError(f"need 1 <= k <= n, got k={self.k}, n={self.n}")
        if len(cols) != self.n:
            raise ValueError(f"expected {self.n} columns, got {len(cols)}")
        if any(len(col) == 0 for col in cols):
            raise ValueError("every column needs at least one cell")
        _check_cells(cols, self.k * self.b, None)
        if self.b_prime < self.b:
            raise ValueError(f"mean column size {self.b_prime} is below b={self.b}")

    @classmethod
    def from_array_code(cls, code: ArrayCode) -> AsymArrayCode:
        return cls(n=code.n, k=code.k, b=code.b, columns=code.grid)

    @property
    def num_sources(self) -> int:
        return self.k * self.b

    @property
    def column_sizes(self) -> tuple[int, ...]:
        return tuple(len(col) for col in self.columns)

    @property
    def b_prime(self) -> float:
        return sum(self.column_sizes) / self.n

    @property
    def epsilon(self) -> float:
        return self.b_prime / self.b - 1

    @property
    def sigma(self) -> int:
        return max(len(c) for col in self.columns for c in col)

    @property
    def t(self) -> int:
        # Straggler count n - k; the asym signature's t is read this way.
        return self.n - self.k

    def column_equations(self, nodes: Iterable[int]) -> list[Cell]:
        return [cell for i in sorted(nodes) for cell in self.columns[i]]

    def generator_column(self, i: int) -> np.ndarray:
        col = self.columns[i]
        G = np.zeros((self.num_sources, len(col)), dtype=np.uint8)
        for j, cell in enumerate(col):
            G[[s - 1 for s in cell], j] = 1
        return G

    def generator(self) -> np.ndarray:
        """Full generator ``[G_1 | ... | G_n]`` of shape ``kb x sum(b_i)``."""
        return np.hstack([self.generator_column(i) for i in range(self.n)])

    def to_array_code(self) -> ArrayCode:
        if any(size != self.b for size in self.column_sizes):
            raise ValueError("column sizes differ from b; not a rectangular array code")
        return ArrayCode(n=self.n, k=self.k, b=self.b, sigma=self.sigma, grid=self.columns)


def coding_overhead(code: AsymArrayCode) -> float:
    """``b'/b - 1`` with ``b'`` the mean column size."""
    return code.b_prime / code.b - 1


@dataclass(frozen=True)
class SampledValidation:
    checked: int
    failures: int
    exhaustive: bool
    witness: tuple[int, ...] | None = None

    @property
    def ok(self) -> bool:
        return self.failures == 0


def _sample_subsets(n: int, k: int, samples: int, rng: random.Random):
    if math.comb(n, k) <= samples:
        yield from itertools.combinations(range(n), k)
        return
    for _ in range(samples):
        yield tuple(sorted(rng.sample(range(n), k)))


def validate_sampled(code: AsymArrayCode | ArrayCode, samples: int = 1000, seed: int = 0) -> SampledValidation:
    """Peel ``samples`` random k-subsets of columns (all of them if there are fewer)."""
    rng = random.Random(seed)
    exhaustive = math.comb(code.n, code.k) <= samples
    checked = failures = 0
    witness = None
    for subset in _sample_subsets(code.n, code.k, samples, rng):
        checked += 1
        if not peels(code.column_equations(subset), code.num_sources):
            failures += 1
            witness = witness or subset
    return SampledValidation(checked, failures, exhaustive, witness)


def _soliton_weights(kb: int, max_degree: int, c: float = 0.1, delta: float = 0.5) -> np.ndarray:
    """Robust soliton over degrees ``1..kb``, truncated at ``max_degree`` and renormalized."""
    d = np.arange(1, kb + 1, dtype=float)
    rho = 1.0 / (d * np.maximum(d - 1, 1))
    rho[0] = 1.0 / kb
    R = c * math.log(kb / delta) * math.sqrt(kb) if kb > 1 else 1.0
    spike = max(1, min(kb, int(round(kb / R))))
    tau = np.zeros(kb)
    tau[: spike - 1] = R / (d[: spike - 1] * kb)
    tau[spike - 1] = R * math.log(R / delta) / kb if R > delta else 0.0
    w = (rho + np.clip(tau, 0, None))[:max_degree]
    return w / w.sum()


def asym_column_sizes(n: int, b: int, epsilon: float, rng: random.Random | None = None, jitter: float = 0.0) -> list[int]:
    """Column sizes with mean as close to ``(1 + epsilon) b`` as integers allow.

    ``jitter`` > 0 moves cells between random column pairs (each column
    keeps at least ``b`` cells) without changing the total.
    """
    total = round(n * b * (1 + epsilon))
    base, extra = divmod(total, n)
    sizes = [base + (1 if i < extra else 0) for i in range(n)]
    if jitter > 0:
        rng = rng or random.Random(0)
        for _ in range(n):
            i, j = rng.randrange(n), rng.randrange(n)
            move = rng.randint(0, int(jitter * base))
            move = min(move, sizes[i] - b)
            sizes[i] -= move
            sizes[j] += move
    return sizes


def build_asym_code(
    n: int,
    k: int,
    b: int,
    epsilon_target: float,
    seed: int = 0,
    sigma: int = 7,
    samples: int = 1000,
    retries: int = 10,
    jitter: float = 0.0,
) -> AsymArrayCode:
    """Randomized asymptotically-MDS code.

    Column ``i`` gets ``b_i`` cells (mean ``(1 + epsilon_target) b``), each a
    uniformly drawn source set whose degree follows a truncated robust
    soliton capped at ``ceil(sigma (1 + epsilon_target))``.  Repair passes
    then force coverage and patch sampled k-subsets that get stuck by
    swapping a degree-1 cell for a stuck source into one of their columns.
    """
    if min(n, k, b) < 1 or k > n:
        raise ValueError("need n >= k >= 1 and b >= 1")
    if epsilon_target < 0:
        raise ValueError("epsilon_target must be non-negative")
    kb = k * b
    max_deg = max(1, min(kb, math.ceil(sigma * (1 + epsilon_target))))
    weights = _soliton_weights(kb, max_deg)
    degrees = np.arange(1, max_deg + 1)

    for attempt in range(retries):
        rng = random.Random(seed * 1_000_003 + attempt)
        nrng = np.random.default_rng([seed, attempt])
        sizes = asym_column_sizes(n, b, epsilon_target, rng, jitter)
        cols: list[list[set[int]]] = []
        for size in sizes:
            degs = nrng.choice(degrees, size=size, p=weights)
            cols.append([set(rng.sample(range(1, kb + 1), int(d))) for d in degs])

        counts = Counter(src for col in cols for cell in col for src in cell)
        covered = all(counts[src] or _swap_in(cols, range(n), src, counts, rng) for src in range(1, kb + 1))

        for _ in range(4 * n if covered else 0):
            code = AsymArrayCode(n=n, k=k, b=b, columns=cols)
            report_rng = random.Random(rng.random())
            stuck_subset = None
            for subset in _sample_subsets(n, k, samples, report_rng):
                res = peel_decode(code.column_equations(subset), kb)
                if not res.complete:
                    stuck_subset = (subset, res.unresolved)
                    break
            if stuck_subset is None:
                return code
            subset, unresolved = stuck_subset
            if not _swap_in(cols, subset, min(unresolved), counts, rng):
                break
    raise AsymConstructionError(
        f"no decodable [{n},{k},b={b}] asym code with epsilon={epsilon_target} after {retries} attempts"
    )


def _swap_in(cols: list[list[set[int]]], candidates, src: int, counts: Counter, rng: random.Random) -> bool:
    """Overwrite one cell in a column from ``candidates`` with ``{src}``.

    Only cells whose sources all stay covered elsewhere are eligible; the
    highest-degree one wins.  Returns False when no cell qualifies.
    """
    order = list(candidates)
    rng.shuffle(order)
    best = None
    for i in order:
        for j, cell in enumerate(cols[i]):
            if all(counts[x] > 1 for x in cell) and (best is None or len(cell) > len(cols[best[0]][best[1]])):
                best = (i, j)
    if best is None:
        return False
    i, j = best
    for x in cols[i][j]:
        counts[x] -= 1
    cols[i][j] = {src}
    counts[src] += 1
    return True


# -- mapping codes onto the cluster --------------------------------------------------


@dataclass(frozen=True)
class ClusterPlan:
    """Per node, per processor: the block tasks whose products that processor sums."""

    k: int
    b: int
    assignments: tuple[tuple[tuple[BlockTask, ...], ...], ...]

    @property
    def n(self) -> int:
        return len(self.assignments)

    @property
    def node_degrees(self) -> list[list[int]]:
        return [[len(tasks) for tasks in node] for node in self.assignments]

    @property
    def node_work(self) -> list[int]:
        return [sum(len(tasks) for tasks in node) for node in self.assignments]

    @property
    def total_dot_products(self) -> int:
        return sum(self.node_work)

    @property
    def master_dot_products(self) -> int:
        # Encoding happens on the processors; the master only ships operands.
        return 0

    def processor_output(self, node: int, proc: int, A: DenseMatrix, B: DenseMatrix) -> DenseMatrix:
        tasks = self.assignments[node][proc]
        out = tasks[0].compute(A, B)
        for task in tasks[1:]:
            out = out + task.compute(A, B)
        return out

    def execute(self, A: DenseMatrix, B: DenseMatrix, nodes: Iterable[int] | None = None) -> dict[tuple[int, int], DenseMatrix]:
        nodes = range(self.n) if nodes is None else nodes
        return {
            (i, j): self.processor_output(i, j, A, B)
            for i in nodes
            for j in range(len(self.assignments[i]))
        }


def encode_tasks(code: ArrayCode | AsymArrayCode, tasks: Sequence[BlockTask]) -> ClusterPlan:
    """Give processor ``(i, j)`` the block tasks named by cell ``columns[i][j]``."""
    by_index = {t.index: t for t in tasks}
    if len(by_index) != len(tasks):
        raise ValueError("duplicate task indices")
    if set(by_index) != set(range(1, code.num_sources + 1)):
        raise ValueError(
            f"code covers {code.num_sources} sources but {len(tasks)} block tasks were supplied"
        )
    assignments = tuple(
        tuple(tuple(by_index[s] for s in sorted(cell)) for cell in col) for col in code.columns
    )
    return ClusterPlan(k=code.k, b=code.b, assignments=assignments)


def decode_nodes(
    code: ArrayCode | AsymArrayCode,
    outputs: Mapping[tuple[int, int], Any],
    nodes: Iterable[int],
) -> PeelResult:
    """Peel the sources from the complete outputs of ``nodes``."""
    nodes = sorted(nodes)
    eqs = [cell for i in nodes for cell in code.columns[i]]
    known = [outputs[(i, j)] for i in nodes for j in range(len(code.columns[i]))]
    return peel_decode(eqs, code.num_sources, known)


def decode_product(
    code: ArrayCode | AsymArrayCode,
    outputs: Mapping[tuple[int, int], DenseMatrix],
    nodes: Iterable[int],
    layout: PartitionPlan,
) -> DenseMatrix:
    res = decode_nodes(code, outputs, nodes)
    if not res.complete:
        raise ValueError(f"peeling stuck with sources {sorted(res.unresolved)} unresolved")
    return assemble(res.values, layout)
