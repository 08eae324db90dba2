import itertools
import math

import pytest
from hypothesis import given, strategies as st

from coded_matmul.baselines import (
    InsufficientResults,
    MatDotSpec,
    PolyCodeSpec,
    matdot_decodable,
    matdot_decode,
    matdot_encode,
    poly_decode,
    poly_encode,
    poly_layout,
    uncoded_contract,
    uncoded_decode,
    uncoded_plan,
)
from coded_matmul.interpolate import coefficient_determined, interpolate_blocks, invert, rank, vandermonde
from coded_matmul.linalg import DEFAULT_PRIME, DenseMatrix, assemble, matmul_oracle, random_matrix
from oracles import naive_product


def _poly_results(A, B, spec, workers):
    tasks = poly_encode(A, B, spec)
    return [(tasks[w].point, tasks[w].compute()) for w in workers]


def test_vandermonde_inverse():
    V = vandermonde([1, 2, 3], 3, DEFAULT_PRIME)
    Vi = invert(V, DEFAULT_PRIME)
    prod = [[sum(V[i][t] * Vi[t][j] for t in range(3)) % DEFAULT_PRIME for j in range(3)] for i in range(3)]
    assert prod == [[1, 0, 0], [0, 1, 0], [0, 0, 1]]


def test_rank_over_rationals():
    assert rank([[1, 2], [2, 4]]) == 1
    assert rank(vandermonde([1, 2, 5], 3)) == 3


def test_interpolation_in_integer_ring():
    # p(x) = C0 + C1 x with integer blocks
    C0, C1 = DenseMatrix.from_rows([[3, -1]], None), DenseMatrix.from_rows([[2, 7]], None)
    pts = [2, 5]
    vals = [C0 + C1 * x for x in pts]
    assert interpolate_blocks(pts, vals, None) == [C0, C1]


def test_poly_contract_table_instance():
    spec = PolyCodeSpec(m=2, workers=10)
    assert spec.recovery_threshold == 4
    assert spec.encode_work == 18
    assert spec.decode_work == pytest.approx(4 * math.log(4) ** 2)
    assert spec.contract(4, 4).output_symbols == 4


@pytest.mark.parametrize("ring", [DEFAULT_PRIME, None])
def test_poly_every_sufficient_subset(ring):
    spec = PolyCodeSpec(m=2, workers=6, modulus=ring)
    A, B = random_matrix(3, 4, ring, 1), random_matrix(3, 2, ring, 2)
    truth = matmul_oracle(A, B)
    layout = poly_layout(A, B, spec)
    for workers in itertools.combinations(range(6), 4):
        assert assemble(poly_decode(_poly_results(A, B, spec, workers), spec), layout) == truth


def test_poly_block_index_mapping():
    spec = PolyCodeSpec(m=2, workers=4)
    A, B = random_matrix(2, 4, DEFAULT_PRIME, 3), random_matrix(2, 4, DEFAULT_PRIME, 4)
    blocks = poly_decode(_poly_results(A, B, spec, range(4)), spec)
    truth = naive_product(A.tolist(), B.tolist(), DEFAULT_PRIME)
    # block 2 is A_0^T B_1: rows 0-1, columns 2-3
    assert blocks[2].tolist() == [row[2:] for row in truth[:2]]


def test_poly_tightness():
    spec = PolyCodeSpec(m=3, workers=12)
    A, B = random_matrix(2, 3, DEFAULT_PRIME, 5), random_matrix(2, 3, DEFAULT_PRIME, 6)
    with pytest.raises(InsufficientResults):
        poly_decode(_poly_results(A, B, spec, range(8)), spec)


def test_poly_rejects_repeated_points():
    with pytest.raises(ValueError):
        PolyCodeSpec(m=1, workers=2, points=(3, 3))
    with pytest.raises(ValueError):
        PolyCodeSpec(m=3, workers=8)


@given(m=st.integers(1, 3), extra=st.integers(0, 3), seed=st.integers(0, 1000), data=st.data())
def test_poly_any_threshold_subset(m, extra, seed, data):
    workers = m * m + extra
    spec = PolyCodeSpec(m=m, workers=workers)
    A, B = random_matrix(2, m, DEFAULT_PRIME, seed), random_matrix(2, 2 * m, DEFAULT_PRIME, seed + 1)
    chosen = data.draw(st.lists(st.integers(0, workers - 1), min_size=m * m, max_size=m * m, unique=True))
    got = assemble(poly_decode(_poly_results(A, B, spec, chosen), spec), poly_layout(A, B, spec))
    assert got == matmul_oracle(A, B)


def _matdot_results(A, B, spec, workers):
    tasks = matdot_encode(A, B, spec)
    return [(tasks[w].point, tasks[w].compute()) for w in workers]


@pytest.mark.parametrize("m,workers", [(2, 5), (3, 6)])
def test_matdot_every_sufficient_subset(m, workers):
    spec = MatDotSpec(m=m, workers=workers)
    A, B = random_matrix(2 * m, 3, DEFAULT_PRIME, 7), random_matrix(2 * m, 2, DEFAULT_PRIME, 8)
    truth = matmul_oracle(A, B)
    for chosen in itertools.combinations(range(workers), 2 * m - 1):
        assert matdot_decode(_matdot_results(A, B, spec, chosen), spec) == truth


def test_matdot_tightness():
    spec = MatDotSpec(m=3, workers=6)
    for pts in itertools.combinations(spec.points, 4):
        assert not matdot_decodable(pts, spec)
    A, B = random_matrix(3, 2, DEFAULT_PRIME, 1), random_matrix(3, 2, DEFAULT_PRIME, 2)
    with pytest.raises(InsufficientResults):
        matdot_decode(_matdot_results(A, B, spec, range(4)), spec)


def test_matdot_contract():
    spec = MatDotSpec(m=2, workers=5)
    assert spec.recovery_threshold == 3
    assert MatDotSpec.latency_threshold(100, 20) == 119
    assert spec.contract(4, 3).output_symbols == 12


def test_middle_coefficient_needs_full_rank():
    assert coefficient_determined([1, 2, 3], 3, 1, DEFAULT_PRIME)
    assert not coefficient_determined([1, 2], 3, 1, DEFAULT_PRIME)


def test_uncoded():
    A, B = random_matrix(2, 2, DEFAULT_PRIME, 0), random_matrix(2, 3, DEFAULT_PRIME, 1)
    plan, tasks = uncoded_plan(A, B)
    results = {t.index: t.compute(A, B) for t in tasks}
    assert uncoded_decode(results, plan) == matmul_oracle(A, B)
    del results[6]
    with pytest.raises(InsufficientResults, match=r"\[6\]"):
        uncoded_decode(results, plan)
    assert uncoded_contract(2, 3).recovery_threshold == 6
