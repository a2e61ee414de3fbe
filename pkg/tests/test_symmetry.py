import itertools
from fractions import Fraction

import pytest
import sympy

from njcones.distvec import DistVector
from njcones.nj import q_criterion
from njcones.symmetry import (
    PRINTED_T,
    LeafPermutation,
    action_matrix,
    cycle_matrix,
    from_w_coordinates,
    generated_group,
    in_kernel_A,
    in_shift_space,
    is_constant,
    permute_vector,
    project_to_S,
    project_to_W,
    shift_basis,
    shift_vector,
    transposition_matrix,
    w_basis,
    w_coordinates,
)

from oracles import make_rng, random_rational

G_A = DistVector(5, (-3, 5, -3, -1, 5, -3, -1, 1, 1, -1))


def rank(vectors):
    return sympy.Matrix([list(v.entries) for v in vectors]).rank()


def test_permute_vector_examples():
    d = DistVector(5, range(10))
    swap = LeafPermutation.transposition(5, 0, 1)
    assert permute_vector(swap, d).entries == (0, 2, 1, 4, 3, 5, 7, 6, 8, 9)
    assert permute_vector(LeafPermutation.identity(5), d) == d
    cyc = LeafPermutation.cycle(5, 0, 1, 2, 3, 4)
    w = w_basis()
    for i in range(5):
        assert permute_vector(cyc, w[i]) == w[(i + 1) % 5]
    with pytest.raises(ValueError):
        permute_vector(LeafPermutation.identity(4), d)


def test_permute_definition_and_composition():
    rng = make_rng(2)
    perms = [LeafPermutation(p) for p in itertools.permutations(range(5))]
    for _ in range(50):
        d = DistVector(5, random_rational(rng))
        s, t = rng.choice(perms), rng.choice(perms)
        sd = permute_vector(s, d)
        for a in range(5):
            for b in range(5):
                assert sd.get(s(a), s(b)) == d.get(a, b)
        assert permute_vector(s * t, d) == permute_vector(s, permute_vector(t, d))
        assert permute_vector(s.inverse(), sd) == d
        P = s.induced_matrix()
        assert all(sum(row) == 1 for row in P) and all(sum(col) == 1 for col in zip(*P))
        assert tuple(sum(p * x for p, x in zip(row, d.entries)) for row in P) == sd.entries


def test_shift_vector_and_kernel():
    assert [i for i, x in enumerate(shift_vector(0, 5).entries) if x] == [0, 1, 3, 6]
    for n in (4, 5, 6):
        for a in range(n):
            assert set(q_criterion(shift_vector(a, n)).entries) == {-2}
    s = shift_basis(5)
    for a, b in itertools.permutations(range(5), 2):
        assert in_kernel_A(s[a] - s[b])
    assert not in_kernel_A(s[0])
    with pytest.raises(ValueError):
        shift_vector(5, 5)


def test_shift_space_dimensions():
    s = shift_basis(5)
    assert rank(s) == 5
    assert rank([s[0] - s[b] for b in range(1, 5)]) == 4
    total = sum(s[1:], s[0])
    assert total.entries == (2,) * 10
    assert is_constant(total)
    w = w_basis()
    assert rank(w) == 5
    assert rank(s + w) == 10
    assert all(x.dot(y) == 0 for x in s for y in w)
    assert all(set(v.entries) <= {-1, 0, 1} for v in w)


def test_projection_properties():
    rng = make_rng(4)
    s = shift_basis(5)
    for _ in range(30):
        d = DistVector(5, random_rational(rng, den=6))
        p = project_to_W(d)
        assert all(p.dot(x) == 0 for x in s)
        assert in_shift_space(d - p)
        assert project_to_W(p) == p
        assert project_to_S(d) + p == d
        assert from_w_coordinates(w_coordinates(d)) == p


def test_projection_examples():
    assert project_to_W(shift_vector(2, 5) * 7).entries == (0,) * 10
    w1 = w_basis()[0]
    assert project_to_W(w1) == w1
    assert all(G_A.dot(x) == 0 for x in shift_basis(5))
    assert project_to_W(G_A) == G_A
    assert w_coordinates(w_basis()[2]) == (0, 0, 1, 0, 0)
    with pytest.raises(ValueError):
        project_to_W(DistVector.zeros(4))


def test_cycle_matrix_is_coordinate_shift():
    C = cycle_matrix()
    for j in range(5):
        col = [C[i][j] for i in range(5)]
        assert col == [int(i == (j + 1) % 5) for i in range(5)]


def test_transposition_matrix_is_involution():
    T = sympy.Matrix(transposition_matrix())
    assert T * T == sympy.eye(5)
    # column j is the image of w_j: check against direct relabeling
    swap = LeafPermutation.transposition(5, 0, 1)
    for j, w in enumerate(w_basis()):
        image = from_w_coordinates([transposition_matrix()[i][j] for i in range(5)])
        assert image == permute_vector(swap, w)


def test_generated_group_is_full_symmetric_group():
    group = generated_group([transposition_matrix(), cycle_matrix()])
    assert len(group) == 120


def test_printed_T_is_the_action_of_03_14():
    double = LeafPermutation.transposition(5, 0, 3) * LeafPermutation.transposition(5, 1, 4)
    assert action_matrix(double) == PRINTED_T
    matches = [
        p for p in itertools.permutations(range(5)) if action_matrix(LeafPermutation(p)) == PRINTED_T
    ]
    assert matches == [double.images]
    assert len(generated_group([PRINTED_T, cycle_matrix()])) == 60


def test_transposition_action_matches_printed_T():
    # the printed matrix is stated to be the action of (01) on w1..w5
    assert transposition_matrix() == PRINTED_T


def test_action_is_a_representation():
    perms = [LeafPermutation(p) for p in itertools.permutations(range(5))]
    rng = make_rng(9)
    for _ in range(20):
        s, t = rng.choice(perms), rng.choice(perms)
        lhs = sympy.Matrix(action_matrix(s * t))
        rhs = sympy.Matrix(action_matrix(s)) * sympy.Matrix(action_matrix(t))
        assert lhs == rhs


def test_permutations_preserve_the_split():
    rng = make_rng(10)
    s = shift_basis(5)
    for p in itertools.permutations(range(5)):
        sigma = LeafPermutation(p)
        for v in s:
            assert in_shift_space(permute_vector(sigma, v))
        w = w_basis()[rng.randrange(5)]
        assert all(permute_vector(sigma, w).dot(x) == 0 for x in s)


def test_constant_predicate():
    assert is_constant(DistVector(5, [Fraction(3)] * 10))
    assert not is_constant(shift_vector(0, 5))
