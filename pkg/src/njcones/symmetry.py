"""Leaf relabelings and the shift / complement decomposition of R^10.

Shift vectors ``s_a`` (1 on every pair containing ``a``) span the subspace
``S`` that never changes an NJ decision.  Its orthogonal complement ``W``
is five dimensional and carries all of the cone geometry for five taxa.
``W`` has the basis

    w1 = w(01,34), w2 = w(12,40), w3 = w(23,01), w4 = w(34,12), w5 = w(40,23)

where ``w(ab,cd)`` is +1 on pairs ab and cd, -1 on ac and bd, 0 elsewhere.
The 5-cycle (01234) permutes this basis cyclically.

Note on ``PRINTED_T``: the 5x5 matrix usually quoted as the action of the
transposition (01) on this basis is in fact the action of (03)(14); the
matrix of (01) itself is :func:`transposition_matrix`.  Both are kept so
the discrepancy stays testable.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from njcones import _exact
from njcones.distvec import DistVector, index_to_pair, num_pairs, pair_to_index


@dataclass(frozen=True)
class LeafPermutation:
    """A permutation of ``0..n-1``; ``images[a]`` is the new label of ``a``."""

    images: tuple

    def __post_init__(self):
        images = tuple(self.images)
        if sorted(images) != list(range(len(images))):
            raise ValueError(f"{images!r} is not a permutation")
        object.__setattr__(self, "images", images)

    @property
    def n(self):
        return len(self.images)

    @classmethod
    def identity(cls, n):
        return cls(range(n))

    @classmethod
    def transposition(cls, n, a, b):
        images = list(range(n))
        images[a], images[b] = b, a
        return cls(images)

    @classmethod
    def cycle(cls, n, *seq):
        images = list(range(n))
        for x, y in zip(seq, seq[1:] + seq[:1]):
            images[x] = y
        return cls(images)

    def __call__(self, a):
        return self.images[a]

    def __mul__(self, other):
        """Composition ``(self * other)(x) = self(other(x))``."""
        return LeafPermutation(self.images[x] for x in other.images)

    def inverse(self):
        inv = [0] * self.n
        for a, b in enumerate(self.images):
            inv[b] = a
        return LeafPermutation(inv)

    def induced_matrix(self):
        """0/1 matrix ``P`` with ``P d = sigma . d`` on flattened vectors."""
        m = num_pairs(self.n)
        P = [[0] * m for _ in range(m)]
        for i in range(m):
            a, b = index_to_pair(i)
            P[pair_to_index(self.images[a], self.images[b])][i] = 1
        return P


def permute_vector(sigma, d):
    if sigma.n != d.n:
        raise ValueError(f"permutation on {sigma.n} taxa applied to a vector on {d.n}")
    return d.relabel(sigma.images)


def shift_vector(a, n):
    if not 0 <= a < n:
        raise ValueError(f"taxon {a} out of range for n={n}")
    return DistVector(n, [int(a in index_to_pair(i)) for i in range(num_pairs(n))])


def shift_basis(n):
    return [shift_vector(a, n) for a in range(n)]


def w_vector(a, b, c, d):
    v = [0] * 10
    v[pair_to_index(a, b)] += 1
    v[pair_to_index(c, d)] += 1
    v[pair_to_index(a, c)] -= 1
    v[pair_to_index(b, d)] -= 1
    return DistVector(5, v)


W_LABELS = ((0, 1, 3, 4), (1, 2, 4, 0), (2, 3, 0, 1), (3, 4, 1, 2), (4, 0, 2, 3))


def w_basis():
    return [w_vector(*labels) for labels in W_LABELS]


PRINTED_T = tuple(
    tuple(Fraction(x, 2) for x in row)
    for row in (
        (2, 1, 1, 1, 1),
        (0, 1, -1, -1, -1),
        (0, -1, -1, 1, -1),
        (0, -1, 1, -1, -1),
        (0, -1, -1, -1, 1),
    )
)


@lru_cache(maxsize=None)
def _projectors():
    S = [list(s.entries) for s in shift_basis(5)]
    W = [list(w.entries) for w in w_basis()]
    gram_s_inv = _exact.inverse(_exact.matmul(S, _exact.transpose(S)))
    gram_w_inv = _exact.inverse(_exact.matmul(W, _exact.transpose(W)))
    # coefficients of the S-component and of the W-coordinates
    s_coef = _exact.matmul(gram_s_inv, S)
    w_coef = _exact.matmul(gram_w_inv, W)
    to_s = _exact.matmul(_exact.transpose(S), s_coef)
    return to_s, w_coef, W


def _require_five(d):
    if d.n != 5:
        raise ValueError(f"the S/W decomposition is implemented for n=5, got n={d.n}")


def project_to_S(d):
    _require_five(d)
    to_s, _, _ = _projectors()
    return DistVector(5, _exact.matvec(to_s, d.entries))


def project_to_W(d):
    """Orthogonal projection onto W, i.e. ``d`` minus its shift component."""
    return d - project_to_S(d)


def w_coordinates(d):
    """Coordinates of ``project_to_W(d)`` in the basis ``w1..w5``."""
    _require_five(d)
    _, w_coef, _ = _projectors()
    return tuple(_exact.matvec(w_coef, d.entries))


def from_w_coordinates(x):
    _, _, W = _projectors()
    return DistVector(5, [sum(c * w[i] for c, w in zip(x, W)) for i in range(10)])


def action_matrix(sigma):
    """Matrix of ``sigma`` on W-coordinates (column j = image of w_j)."""
    cols = [w_coordinates(permute_vector(sigma, w)) for w in w_basis()]
    return tuple(tuple(col[i] for col in cols) for i in range(5))


def transposition_matrix():
    return action_matrix(LeafPermutation.transposition(5, 0, 1))


def cycle_matrix():
    return action_matrix(LeafPermutation.cycle(5, 0, 1, 2, 3, 4))


def generated_group(generators):
    """All products of the given square matrices (as tuples of tuples)."""
    gens = [tuple(tuple(r) for r in g) for g in generators]
    n = len(gens[0])
    ident = tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))
    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for M in frontier:
            for g in gens:
                P = tuple(tuple(x) for x in _exact.matmul(M, g))
                if P not in seen:
                    seen.add(P)
                    nxt.append(P)
        frontier = nxt
    return seen


def is_constant(d):
    return len(set(d.entries)) <= 1


def in_kernel_A(d):
    from njcones.nj import q_criterion

    return all(x == 0 for x in q_criterion(d).entries)


def in_shift_space(d):
    return all(x == 0 for x in project_to_W(d.exact()).entries)
