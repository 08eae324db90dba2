import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from coded_matmul.arraycode import (
    ArrayCode,
    AsymArrayCode,
    CodeNotFound,
    builtin_5222,
    build_asym_code,
    coding_overhead,
    decode_nodes,
    decode_product,
    encode_tasks,
    max_blocklength,
    max_blocklength_asym,
    recovery_threshold,
    search_code,
    systematic_code,
    undecodable_cell_subsets,
    validate_mds,
    validate_sampled,
)
from coded_matmul.baselines import uncoded_plan
from coded_matmul.linalg import DEFAULT_PRIME, matmul_oracle, partition, random_matrix
from oracles import blocklength_asym_search, blocklength_search


def test_builtin_table():
    code = builtin_5222()
    assert (code.n, code.k, code.b, code.sigma) == (5, 2, 2, 2)
    assert code.column_sizes == (2,) * 5
    assert max(max(col) for col in code.degrees()) == 2


def test_builtin_is_mds():
    assert validate_mds(builtin_5222()) == (True, None)


def test_six_cells_can_fail():
    assert next(undecodable_cell_subsets(builtin_5222(), 6), None) is not None


def test_code_validation_rejects_bad_shapes():
    with pytest.raises(ValueError):
        ArrayCode.from_lists([[[1]], [[3]]], k=1)
    with pytest.raises(ValueError):
        ArrayCode.from_lists([[[1], [1, 2]], [[1], [2]]], k=1, sigma=1)


@pytest.mark.parametrize(
    "k,b,sigma,expected",
    [(2, 2, 2, 5), (100, 100, 7, 106), (1000, 20, 7, 1006), (100, 20, 7, 106)],
)
def test_blocklength_values(k, b, sigma, expected):
    assert max_blocklength(k, b, sigma) == expected == blocklength_search(k, b, sigma)


@pytest.mark.parametrize(
    "k,b,sigma,eps,expected",
    [(100, 100, 7, 3, 137), (1000, 100, 7, 3, 1027), (100, 20, 7, 3, 137), (50, 50, 7, 5, 302)],
)
def test_asym_blocklength_values(k, b, sigma, eps, expected):
    assert max_blocklength_asym(k, b, sigma, eps) == expected == blocklength_asym_search(k, b, sigma, eps)


@given(k=st.integers(8, 400), b=st.integers(2, 120), sigma=st.integers(2, 7))
def test_blocklength_matches_linear_search(k, b, sigma):
    assert max_blocklength(k, b, sigma) == blocklength_search(k, b, sigma)


@given(k=st.integers(30, 400), b=st.integers(2, 120), sigma=st.integers(3, 7), eps=st.fractions(0, 3, max_denominator=4))
def test_asym_blocklength_matches_linear_search(k, b, sigma, eps):
    try:
        n = max_blocklength_asym(k, b, sigma, eps)
    except ValueError:
        return
    assert n == blocklength_asym_search(k, b, sigma, eps)


def test_asym_bound_at_zero_overhead_is_close_to_rectangular():
    for k, b in [(100, 20), (500, 50)]:
        assert abs(max_blocklength_asym(k, b, 7, 0) - max_blocklength(k, b, 7)) <= 1


def test_degree_condition_violation():
    with pytest.raises(ValueError):
        max_blocklength(3, 2, 6)
    with pytest.raises(ValueError):
        max_blocklength_asym(10, 10, 2, 1)
    with pytest.raises(ValueError):
        max_blocklength_asym(10, 10, 7, 1)


def test_threshold_of_builtin():
    assert recovery_threshold(builtin_5222()) == 7


def test_threshold_sandwich_on_found_codes():
    for code in (builtin_5222(), systematic_code(3, 2), search_code(5, 2, 2, 2, seed=3)):
        kb, slack = code.k * code.b, (code.n - code.k) * code.b
        assert kb <= recovery_threshold(code) <= kb + slack


@pytest.mark.parametrize("seed", range(4))
def test_search_finds_5222(seed):
    code = search_code(5, 2, 2, 2, seed=seed)
    assert validate_mds(code)[0]
    assert code.n <= max_blocklength(2, 2, 2)


def test_search_refuses_beyond_bound():
    with pytest.raises(ValueError):
        search_code(6, 2, 2, 2)


def test_search_budget():
    with pytest.raises(CodeNotFound):
        search_code(5, 4, 2, 2, budget=2_000)


def _exact_roundtrip(code, A, B, alive):
    plan, tasks = uncoded_plan(A, B)
    cluster = encode_tasks(code, tasks)
    outputs = cluster.execute(A, B, alive)
    return decode_product(code, outputs, alive, plan)


@pytest.mark.parametrize("ring", [DEFAULT_PRIME, None])
def test_every_survivor_pair_recovers(ring):
    code = builtin_5222()
    A, B = random_matrix(8, 2, ring, 5), random_matrix(8, 2, ring, 6)
    truth = matmul_oracle(A, B)
    for alive in itertools.combinations(range(5), 2):
        assert _exact_roundtrip(code, A, B, list(alive)) == truth


def test_block_sources_with_partition():
    code = builtin_5222()
    A, B = random_matrix(3, 4, DEFAULT_PRIME, 1), random_matrix(3, 4, DEFAULT_PRIME, 2)
    plan, tasks = partition(A, B, "square", 2)
    cluster = encode_tasks(code, tasks)
    outputs = cluster.execute(A, B, [1, 4])
    assert decode_product(code, outputs, [1, 4], plan) == matmul_oracle(A, B)


def test_cluster_plan_work():
    cluster = encode_tasks(builtin_5222(), uncoded_plan(random_matrix(2, 2), random_matrix(2, 2))[1])
    assert cluster.node_degrees[0] == [1, 2]
    assert cluster.total_dot_products == 16
    assert cluster.master_dot_products == 0


def test_peeling_work_counter_on_builtin():
    code = builtin_5222()
    res = decode_nodes(code, {(i, j): 1 for i in range(5) for j in range(2)}, [0, 1])
    assert res.complete
    assert res.work == 2


def test_systematic_code_roundtrip():
    code = systematic_code(3, 2)
    assert code.n == 3 and validate_mds(code)[0]


# -- asymptotic codes -------------------------------------------------------------


def test_asym_wraps_rectangular():
    asym = AsymArrayCode.from_array_code(builtin_5222())
    assert asym.b_prime == 2 and asym.epsilon == 0
    assert coding_overhead(asym) == 0
    assert asym.to_array_code().columns == builtin_5222().columns


def test_generator_matrix_shape_and_rows():
    asym = AsymArrayCode.from_array_code(builtin_5222())
    G = asym.generator()
    assert G.shape == (4, 10) and G.dtype == np.uint8
    assert list(G[:, 1]) == [0, 1, 1, 0]


def test_asym_build_decodes():
    code = build_asym_code(12, 10, 4, 0.5, seed=0, samples=300)
    assert code.b_prime >= code.b
    assert abs(code.epsilon - 0.5) < 1e-9
    check = validate_sampled(code, 300)
    assert check.exhaustive and check.ok


def test_asym_build_exact_decode():
    code = build_asym_code(12, 10, 4, 0.5, seed=0, samples=300)
    A, B = random_matrix(5, 10, DEFAULT_PRIME, 3), random_matrix(5, 4, DEFAULT_PRIME, 4)
    alive = [0, 1, 2, 4, 5, 6, 8, 9, 10, 11]
    assert _exact_roundtrip(code, A, B, alive) == matmul_oracle(A, B)


def test_asym_build_deterministic():
    a = build_asym_code(12, 10, 4, 0.5, seed=0, samples=100)
    b = build_asym_code(12, 10, 4, 0.5, seed=0, samples=100)
    assert a.columns == b.columns


def test_asym_needs_enough_cells():
    with pytest.raises(ValueError):
        AsymArrayCode(3, 2, 2, [[{1}], [{2}, {3}], [{4}, {1}]])
