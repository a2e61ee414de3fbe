import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from njcones.distvec import DistVector, num_pairs, pair_to_index
from njcones.nj import (
    nj_run,
    pick_cherries,
    q_criterion,
    q_criterion_matrix,
    q_matrix,
    reduce,
    reduce_with_labels,
    reduction_matrix,
)
from njcones.symmetry import LeafPermutation, permute_vector, shift_vector
from njcones.topology import ConeId, Topology, topology_from_newick

from oracles import make_rng, random_rational, random_tree

A = DistVector(5, (0, 1, 1, 1, 1, 0, 1, 1, 0, 0))
B = DistVector(5, (0, 0, 0, 1, 1, 1, 1, 1, 1, 0))
G_A = DistVector(5, (-3, 5, -3, -1, 5, -3, -1, 1, 1, -1))


def brute_q(d):
    """Q-criterion straight from the double-sum definition."""
    n = d.n
    q = []
    for a in range(1, n):
        for b in range(a):
            ra = sum(d.get(a, k) for k in range(n))
            rb = sum(d.get(k, b) for k in range(n))
            q.append((n - 2) * d.get(a, b) - ra - rb)
    return tuple(q)


def test_q_matrix_structure():
    for n in range(3, 8):
        A_n = q_matrix(n)
        assert (A_n == A_n.T).all()
        assert (np.diag(A_n) == n - 4).all()
    assert (np.diag(q_matrix(4)) == 0).all()
    assert q_matrix(5)[pair_to_index(1, 0), pair_to_index(3, 2)] == 0
    with pytest.raises(ValueError):
        q_matrix(2)


def test_q_of_shift_and_zero():
    s0 = shift_vector(0, 5)
    assert q_criterion(s0).entries == (-2,) * 10
    assert q_criterion(DistVector.zeros(5)).entries == (0,) * 10


def test_q_of_tree_metric_minimized_at_two_cherries():
    q = q_criterion(A + B)
    assert q.entries == brute_q(A + B)
    assert pick_cherries(q) == {0, 9}
    assert pick_cherries(q_criterion(shift_vector(0, 5))) == set(range(10))


def test_pick_unique_minimum_and_float_ties():
    q = q_criterion(DistVector(5, [5, 5, 5, 5, 5, 5, 5, 5, 5, 0]))
    assert pick_cherries(q) == {9}
    d = (A + B).to_float()
    noisy = DistVector(5, [x + (1e-13 if i == 9 else 0) for i, x in enumerate(d.entries)])
    assert pick_cherries(q_criterion(noisy)) == {0, 9}
    assert pick_cherries(q_criterion(noisy), tol=0) == {0}


@pytest.mark.parametrize("n", range(4, 9))
def test_row_sum_and_matrix_forms_agree(n):
    rng = make_rng(n)
    for _ in range(50):
        d = DistVector(n, random_rational(rng, n, spread=30, den=7))
        assert q_criterion(d) == q_criterion_matrix(d)
        assert q_criterion(d).entries == brute_q(d)


@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.fractions(-20, 20, max_denominator=9), min_size=10, max_size=10),
    st.lists(st.fractions(-20, 20, max_denominator=9), min_size=10, max_size=10),
    st.fractions(-5, 5, max_denominator=5),
    st.fractions(-5, 5, max_denominator=5),
)
def test_q_is_linear(x, y, lam, mu):
    d, e = DistVector(5, x), DistVector(5, y)
    lhs = q_criterion(d * lam + e * mu).entries
    rhs = tuple(lam * u + mu * v for u, v in zip(q_criterion(d).entries, q_criterion(e).entries))
    assert lhs == rhs


def test_reduction_matrix_shape():
    for n in range(4, 8):
        R = reduction_matrix(n)
        m = num_pairs(n)
        keep = num_pairs(n - 2)
        assert len(R) == m - n + 1 and all(len(r) == m for r in R)
        for i in range(keep):
            assert R[i] == [Fraction(int(j == i)) for j in range(m)]
        for i in range(keep, len(R)):
            nz = {j: x for j, x in enumerate(R[i]) if x}
            assert nz == {i: Fraction(1, 2), i + n - 2: Fraction(1, 2), m - 1: Fraction(-1, 2)}


def test_reduce_tree_metric_joining_3_4():
    r = reduce(A + B, 9)
    # the printed formula gives (0,1,1,2,2,1); this is (0,1,1,1,1,0) plus s_3
    assert r.entries == (0, 1, 1, 2, 2, 1)
    assert (r - shift_vector(3, 4)).entries == (0, 1, 1, 1, 1, 0)


def test_reduce_matches_matrix_on_last_pick():
    rng = make_rng(7)
    for n in (4, 5, 6):
        R = reduction_matrix(n)
        d = DistVector(n, random_rational(rng, n, den=5))
        expected = tuple(sum(r * x for r, x in zip(row, d.entries)) for row in R)
        assert reduce(d, num_pairs(n) - 1).entries == expected


def test_reduce_other_picks_is_join_formula():
    # for the joined node u: d'(u, k) = (d(a,k) + d(b,k) - d(a,b)) / 2
    rng = make_rng(11)
    n = 6
    d = DistVector(n, random_rational(rng, n, den=3))
    for pick in range(num_pairs(n)):
        r, labels = reduce_with_labels(d, pick)
        b, a = [x for x in range(n) if labels[x] == n - 2]
        assert pair_to_index(a, b) == pick
        for k in range(n):
            if k in (a, b):
                continue
            assert r.get(labels[k], n - 2) == (d.get(a, k) + d.get(b, k) - d.get(a, b)) / 2
            for l in range(k):
                if l not in (a, b):
                    assert r.get(labels[k], labels[l]) == d.get(k, l)


def test_reduce_of_shift_is_shift():
    for a in range(5):
        for pick in range(10):
            r = reduce(shift_vector(a, 5) * 3 - shift_vector((a + 2) % 5, 5), pick)
            assert len(set(q_criterion(r).entries)) == 1


def test_reduce_sizes_and_errors():
    assert reduce(DistVector(4, range(6)), 5).m == 3
    with pytest.raises(IndexError):
        reduce(DistVector(4, range(6)), 6)
    with pytest.raises(ValueError):
        reduce(DistVector(3, range(3)), 0)


def test_nj_tree_metric_is_tied_between_both_pick_orders():
    res = nj_run(A + B)
    assert res.tied
    assert res.cone_ids == {ConeId((1, 0), 2), ConeId((4, 3), 2)}
    assert {o.topology.newick() for o in res.outcomes} == {"((0,1),2,(3,4));"}
    assert [o.describe_picks() for o in res.outcomes] == ["(0,1) (3,4)", "(3,4) (0,1)"]


def test_nj_second_step_tie():
    res = nj_run(B)
    assert res.cone_ids == {ConeId((4, 3), c) for c in (0, 1, 2)}
    assert len(res.outcomes) == 3


def test_nj_string_ray_lies_in_five_cones():
    res = nj_run(G_A)
    expected = {ConeId((1, 0), 4), ConeId((2, 1), 0), ConeId((2, 1), 3), ConeId((2, 1), 4), ConeId((3, 2), 4)}
    assert res.cone_ids == expected
    assert ConeId((3, 0), 4) not in res.cone_ids


def test_nj_four_taxa_has_no_cone():
    res = nj_run(DistVector(4, [1, 4, 4, 4, 4, 1]))
    assert not res.tied
    assert res.cone_ids == frozenset()
    assert [o.topology.newick() for o in res.outcomes] == ["(0,1,(2,3));"]
    with pytest.raises(ValueError):
        nj_run(DistVector(3, [1, 1, 1]))


def test_nj_zero_vector_gives_every_trajectory():
    res = nj_run(DistVector.zeros(5))
    assert len(res.cone_ids) == 30
    assert len(res.topologies) == 15


def test_nj_larger_n_recovers_caterpillar():
    # path lengths on the caterpillar 0-1-(2)-...-(n-2)-(n-1) with unit edges
    for n in (6, 7, 8):
        spine = {0: 0, 1: 0}
        for k in range(2, n - 2):
            spine[k] = k - 1
        spine[n - 2] = spine[n - 1] = n - 3

        def dist(x, y):
            return abs(spine[x] - spine[y]) + 2

        d = DistVector(n, [dist(a, b) for a in range(1, n) for b in range(a)])
        res = nj_run(d)
        expected = {frozenset(range(k + 1, n)) for k in range(1, n - 2)}
        assert res.topologies == {Topology(n, frozenset(expected))}


def test_consistency_random_trees_small():
    rng = make_rng(3)
    for _ in range(100):
        (c1, lone, c2), metric = random_tree(rng)
        res = nj_run(DistVector(5, metric))
        newick = "((%d,%d),%d,(%d,%d));" % (*c1, lone, *c2)
        assert res.topologies == {topology_from_newick(newick)}


def test_shift_and_relabel_equivariance_small():
    rng = make_rng(5)
    perms = list(itertools.permutations(range(5)))
    for _ in range(100):
        d = DistVector(5, random_rational(rng, spread=4))
        res = nj_run(d)
        s = sum((shift_vector(a, 5) * rng.randint(-5, 5) for a in range(5)), DistVector.zeros(5))
        assert nj_run(d + s) == res
        sigma = LeafPermutation(rng.choice(perms))
        assert nj_run(permute_vector(sigma, d)) == res.relabel(sigma.images)
