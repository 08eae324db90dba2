import random

import pytest
from hypothesis import given, strategies as st

from coded_matmul.peeling import PeelingIntegrityError, peel_decode, peels


def test_chain_peels_in_index_order():
    eqs = [{1}, {1, 2}, {2, 3}]
    res = peel_decode(eqs, 3, [5, 12, 10])
    assert res.values == {1: 5, 2: 7, 3: 3}
    assert res.trace == [(0, 1), (1, 2), (2, 3)]
    assert res.work == 2


def test_stuck_without_degree_one():
    res = peel_decode([{1, 2}, {2, 3}, {1, 3}], 3)
    assert not res.complete
    assert res.unresolved == {1, 2, 3}


def test_lowest_index_tie_break():
    res = peel_decode([{2}, {1}, {1, 2}], 2)
    assert res.trace[0] == (0, 2)


def test_inconsistent_redundant_equation():
    with pytest.raises(PeelingIntegrityError):
        peel_decode([{1}, {2}, {1, 2}], 2, [1, 2, 4])


def test_source_out_of_range():
    with pytest.raises(ValueError):
        peel_decode([{0}], 1)


@st.composite
def peelable_system(draw):
    n = draw(st.integers(1, 8))
    order = draw(st.permutations(list(range(1, n + 1))))
    eqs = []
    for pos, src in enumerate(order):
        earlier = order[:pos]
        extra = draw(st.lists(st.sampled_from(earlier), max_size=3, unique=True)) if earlier else []
        eqs.append(frozenset([src, *extra]))
    values = draw(st.lists(st.integers(-100, 100), min_size=n, max_size=n))
    shuffle = draw(st.randoms(use_true_random=False))
    shuffle.shuffle(eqs)
    return n, eqs, dict(zip(range(1, n + 1), values))


@given(peelable_system(), st.randoms(use_true_random=False))
def test_solution_independent_of_equation_order(system, rnd):
    n, eqs, truth = system
    known = [sum(truth[s] for s in eq) for eq in eqs]
    first = peel_decode(eqs, n, known)
    perm = list(range(len(eqs)))
    rnd.shuffle(perm)
    second = peel_decode([eqs[i] for i in perm], n, [known[i] for i in perm])
    assert first.complete and second.complete
    assert first.values == second.values == truth
    assert first.work == second.work == sum(len(e) - 1 for e in eqs)


@given(peelable_system())
def test_symbolic_and_valued_agree(system):
    n, eqs, truth = system
    known = [sum(truth[s] for s in eq) for eq in eqs]
    assert peels(eqs, n)
    assert peel_decode(eqs, n).work == peel_decode(eqs, n, known).work
