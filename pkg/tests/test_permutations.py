import itertools
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from colp.permutations import (
    Permutation,
    PermutationError,
    canonicalize,
    enumerate_all,
    inversions,
    kendall_tau,
    ordering_tau,
    permutation_at_tau,
    transposition_neighbors,
)

perms = st.integers(2, 8).flatmap(lambda n: st.permutations(range(1, n + 1))).map(lambda m: Permutation(tuple(m)))


@pytest.mark.parametrize(
    "given_map, expected",
    [((1, 2, 3), (1, 2, 3)), ((3, 1, 2), (1, 3, 2)), ((2, 1), (1, 2))],
)
def test_canonicalize_examples(given_map, expected):
    assert canonicalize(Permutation(given_map)).map == expected


def test_invalid_bijection_rejected():
    with pytest.raises(PermutationError):
        Permutation((1, 1, 3))
    with pytest.raises(PermutationError):
        Permutation((0, 1, 2))


def test_from_order_and_order_are_inverse():
    p = Permutation.from_order([1, 3, 2])
    assert p.map == (1, 3, 2)
    assert Permutation((2, 3, 1)).order() == (3, 1, 2)


def test_neighbors_l3():
    got = {q.map for q in transposition_neighbors(Permutation((1, 2, 3)))}
    assert got == {(2, 1, 3), (3, 2, 1), (1, 3, 2)}


@pytest.mark.parametrize("L", [2, 3, 5, 8])
def test_neighbor_count(L):
    nb = transposition_neighbors(Permutation.identity(L))
    assert len(nb) == L * (L - 1) // 2
    assert Permutation.identity(L) not in nb


def test_adjacent_only_neighborhood():
    nb = transposition_neighbors(Permutation((3, 1, 4, 2)), adjacent_only=True)
    assert len(nb) == 3
    for q in nb:
        assert abs(kendall_tau(q, Permutation((3, 1, 4, 2))) - (1 - 2 / 6)) < 1e-12


@pytest.mark.parametrize("L, count", [(2, 2), (3, 6), (5, 120)])
def test_enumerate_all_counts(L, count):
    items = list(enumerate_all(L))
    assert len(items) == count == math.factorial(L)
    assert len(set(items)) == count


def test_enumerate_l2_and_canonical_forms():
    assert [p.map for p in enumerate_all(2)] == [(1, 2), (2, 1)]
    canon = {canonicalize(p) for p in enumerate_all(5)}
    assert len(canon) == 60
    assert set(enumerate_all(5, canonical_only=True)) == canon


def test_kendall_examples():
    a = Permutation((1, 2, 3))
    assert kendall_tau(a, a) == 1.0
    assert kendall_tau(a, a.reversed()) == -1.0
    # pairs (1,2) and (1,3) concordant, (2,3) discordant
    assert kendall_tau(a, Permutation((1, 3, 2))) == pytest.approx(1 / 3)


def test_kendall_matches_scipy():
    from scipy.stats import kendalltau

    for m in itertools.islice(itertools.permutations(range(1, 7)), 0, 720, 37):
        assert kendall_tau(m, range(1, 7)) == pytest.approx(kendalltau(m, range(1, 7)).statistic)


def test_kendall_length_mismatch():
    with pytest.raises(PermutationError):
        kendall_tau((1, 2, 3), (1, 2))


@given(perms)
def test_canonicalize_idempotent_and_canonical(p):
    c = canonicalize(p)
    assert c.is_canonical
    assert canonicalize(c) == c
    assert c in (p, p.reversed())


@given(perms)
def test_kendall_self_and_symmetry(p):
    c = canonicalize(p)
    assert kendall_tau(c, c) == 1.0
    q = Permutation.identity(p.size)
    assert kendall_tau(p, q) == kendall_tau(q, p)


@given(perms)
def test_neighbor_relation_symmetric(p):
    for q in transposition_neighbors(p):
        assert p in transposition_neighbors(q)


@pytest.mark.parametrize("target", [1.0, 0.8, 0.6, 0.4, 0.2, 0.0])
def test_permutation_at_tau_l5(target):
    p = permutation_at_tau(5, target)
    assert p.is_canonical
    assert kendall_tau(p, Permutation.identity(5)) == pytest.approx(target)
    assert ordering_tau(p, Permutation.identity(5)) == pytest.approx(target)
    assert inversions(p) == round((1 - target) * 5)


def test_permutation_at_tau_unreachable_returns_nearest():
    p = permutation_at_tau(5, -1.0)
    # canonical walk gets stuck before the full reversal
    assert p.is_canonical
    assert kendall_tau(p, Permutation.identity(5)) > -1.0


def test_ordering_tau_best_orientation():
    p = Permutation((5, 4, 3, 2, 1))
    assert ordering_tau(p, Permutation.identity(5), "best") == 1.0
