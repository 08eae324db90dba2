"""Exact matrix arithmetic, operand partitioning and the ground-truth product.

Everything here works over one of two exact rings: the integers
(``modulus=None``) or the prime field Z_q.  Entries are held in numpy
``object`` arrays of Python ints, so nothing overflows and equality checks
are literal.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

# Mersenne prime 2^31 - 1.
DEFAULT_PRIME = 2_147_483_647


def _as_object_array(values) -> np.ndarray:
    arr = np.asarray(values, dtype=object)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D array, got shape {arr.shape}")
    return np.vectorize(int, otypes=[object])(arr) if arr.size else arr.reshape(arr.shape)


@dataclass(frozen=True, eq=False)
class DenseMatrix:
    """Matrix of exact ring scalars.

    ``modulus`` is ``None`` for the integers or a prime q for Z_q; entries
    are kept reduced to ``[0, q)`` in the latter case.
    """

    data: np.ndarray
    modulus: int | None = None

    def __post_init__(self):
        arr = _as_object_array(self.data)
        if self.modulus is not None:
            if self.modulus < 2:
                raise ValueError("modulus must be a prime >= 2")
            arr = arr % self.modulus
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[int]], modulus: int | None = None) -> DenseMatrix:
        return cls(np.array([list(r) for r in rows], dtype=object), modulus)

    @classmethod
    def zeros(cls, rows: int, cols: int, modulus: int | None = None) -> DenseMatrix:
        return cls(np.zeros((rows, cols), dtype=object), modulus)

    @classmethod
    def identity(cls, n: int, modulus: int | None = None) -> DenseMatrix:
        return cls(np.eye(n, dtype=int).astype(object), modulus)

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    @property
    def entries(self) -> tuple[int, ...]:
        """Row-major entries."""
        return tuple(self.data.ravel())

    @property
    def T(self) -> DenseMatrix:
        return DenseMatrix(self.data.T, self.modulus)

    def tolist(self) -> list[list[int]]:
        return self.data.tolist()

    def _check_ring(self, other: DenseMatrix) -> None:
        if self.modulus != other.modulus:
            raise ValueError(f"ring mismatch: Z_{self.modulus} vs Z_{other.modulus}")

    def __add__(self, other: DenseMatrix) -> DenseMatrix:
        self._check_ring(other)
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")
        return DenseMatrix(self.data + other.data, self.modulus)

    def __sub__(self, other: DenseMatrix) -> DenseMatrix:
        self._check_ring(other)
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")
        return DenseMatrix(self.data - other.data, self.modulus)

    def __neg__(self) -> DenseMatrix:
        return DenseMatrix(-self.data, self.modulus)

    def __mul__(self, scalar: int) -> DenseMatrix:
        return DenseMatrix(self.data * int(scalar), self.modulus)

    __rmul__ = __mul__

    def __matmul__(self, other: DenseMatrix) -> DenseMatrix:
        self._check_ring(other)
        if self.cols != other.rows:
            raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
        if self.cols == 0:
            return DenseMatrix.zeros(self.rows, other.cols, self.modulus)
        return DenseMatrix(self.data.dot(other.data), self.modulus)

    def __getitem__(self, key) -> DenseMatrix:
        sub = self.data[key]
        if sub.ndim != 2:
            raise IndexError("indexing must keep both dimensions (use slices)")
        return DenseMatrix(sub, self.modulus)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DenseMatrix):
            return NotImplemented
        return (
            self.modulus == other.modulus
            and self.shape == other.shape
            and bool(np.all(self.data == other.data))
        )

    def __hash__(self):
        return hash((self.modulus, self.shape, self.entries))

    def __repr__(self) -> str:
        ring = "Z" if self.modulus is None else f"Z_{self.modulus}"
        return f"DenseMatrix({self.rows}x{self.cols} over {ring}, {self.tolist()})"


def random_matrix(
    rows: int,
    cols: int,
    modulus: int | None = DEFAULT_PRIME,
    rng: np.random.Generator | int | None = None,
) -> DenseMatrix:
    """Uniform matrix over Z_q, or small signed integers when ``modulus`` is None."""
    rng = np.random.default_rng(rng)
    if modulus is None:
        data = rng.integers(-9, 10, size=(rows, cols))
    else:
        data = rng.integers(0, modulus, size=(rows, cols), dtype=np.int64)
    return DenseMatrix(data.astype(object), modulus)


def matmul_oracle(A: DenseMatrix, B: DenseMatrix) -> DenseMatrix:
    """Ground truth ``A^T B`` for ``A`` (s x k) and ``B`` (s x b)."""
    if A.rows != B.rows:
        raise ValueError(f"inner dimension mismatch: A has {A.rows} rows, B has {B.rows}")
    return A.T @ B


@dataclass(frozen=True)
class SourceBlock:
    """One block of the product ``A^T B``; ``index`` is 1-based, row-major."""

    index: int
    value: DenseMatrix


@dataclass(frozen=True)
class BlockTask:
    """Compute ``A[:, a_cols]^T B[:, b_cols]``, the source block ``index``."""

    index: int
    a_cols: slice
    b_cols: slice

    def compute(self, A: DenseMatrix, B: DenseMatrix) -> DenseMatrix:
        return matmul_oracle(A[:, self.a_cols], B[:, self.b_cols])


@dataclass(frozen=True)
class PartitionPlan:
    scheme: str
    m: int
    s: int
    k: int
    b: int
    grid: tuple[int, int]
    block_a: tuple[int, int]
    block_b: tuple[int, int]

    @property
    def task_count(self) -> int:
        return self.grid[0] * self.grid[1]

    @property
    def block_shape(self) -> tuple[int, int]:
        return (self.block_a[1], self.block_b[1])


def grid_tasks(k: int, b: int, row_groups: int, col_groups: int) -> list[BlockTask]:
    """Tile the k x b product into a row_groups x col_groups grid of tasks."""
    wa, wb = k // row_groups, b // col_groups
    return [
        BlockTask(r * col_groups + c + 1, slice(r * wa, (r + 1) * wa), slice(c * wb, (c + 1) * wb))
        for r in range(row_groups)
        for c in range(col_groups)
    ]


def partition(
    A: DenseMatrix, B: DenseMatrix, scheme: str = "square", m: int = 1
) -> tuple[PartitionPlan, list[BlockTask]]:
    """Split ``A^T B`` into independent block products.

    ``square`` cuts A and B into m column groups each (m^2 tasks of size
    (k/m x s)(s x b/m)).  ``b_tasks`` yields exactly b tasks whose outputs
    are (mk/b x b/m) blocks; it needs m | b and b | k.
    """
    if A.rows != B.rows:
        raise ValueError(f"inner dimension mismatch: A has {A.rows} rows, B has {B.rows}")
    if m < 1:
        raise ValueError("m must be positive")
    s, k, b = A.rows, A.cols, B.cols
    scheme = scheme.lower()
    if scheme == "square":
        if k % m:
            raise ValueError(f"square requires m | k (m={m}, k={k})")
        if b % m:
            raise ValueError(f"square requires m | b (m={m}, b={b})")
        grid = (m, m)
    elif scheme == "b_tasks":
        if b % m:
            raise ValueError(f"b_tasks requires m | b (m={m}, b={b})")
        if k % b:
            raise ValueError(f"b_tasks requires b | k (b={b}, k={k})")
        grid = (b // m, m)
    else:
        raise ValueError(f"unknown partition scheme {scheme!r}")
    plan = PartitionPlan(
        scheme=scheme,
        m=m,
        s=s,
        k=k,
        b=b,
        grid=grid,
        block_a=(s, k // grid[0]),
        block_b=(s, b // grid[1]),
    )
    return plan, grid_tasks(k, b, *grid)


def compute_blocks(A: DenseMatrix, B: DenseMatrix, tasks: Sequence[BlockTask]) -> dict[int, DenseMatrix]:
    return {t.index: t.compute(A, B) for t in tasks}


def assemble(
    blocks: Mapping[int, DenseMatrix] | Sequence[SourceBlock], layout: PartitionPlan
) -> DenseMatrix:
    """Stitch source blocks back into the full product, row-major by index."""
    if isinstance(blocks, Mapping):
        items = list(blocks.items())
    else:
        items = [(blk.index, blk.value) for blk in blocks]
    by_index: dict[int, DenseMatrix] = {}
    for idx, value in items:
        if idx in by_index:
            raise ValueError(f"duplicate source block {idx}")
        by_index[idx] = value
    expected = set(range(1, layout.task_count + 1))
    missing = sorted(expected - by_index.keys())
    extra = sorted(by_index.keys() - expected)
    if missing:
        raise ValueError(f"missing source blocks {missing}")
    if extra:
        raise ValueError(f"unexpected source block indices {extra}")
    rows, cols = layout.grid
    moduli = {v.modulus for v in by_index.values()}
    if len(moduli) != 1:
        raise ValueError("blocks belong to different rings")
    data = np.block([[by_index[r * cols + c + 1].data for c in range(cols)] for r in range(rows)])
    return DenseMatrix(data, moduli.pop())
