"""Neighbor Joining with set-valued tie semantics.

The Q-criterion of a pair is

    q[a,b] = (n-2) d[a,b] - sum_k d[a,k] - sum_k d[k,b]

and NJ joins a pair of minimal ``q``.  Instead of breaking ties arbitrarily,
:func:`nj_run` branches on every minimizing pair and returns all resulting
pick trajectories.  Exact (Fraction) input is compared exactly; float input
uses a relative tie tolerance.

Reduction only ever needs the joined pair at labels ``{n-2, n-1}``: other
picks are first swapped into that position, and the joined node takes label
``n-2``.

At four taxa the pairs ``{a,b}`` and ``{c,d}`` always have equal ``q`` and
give the same split, so the final decision only looks at pairs avoiding
label 3 (the node joined most recently).  This keeps the n=4 step from
reporting a spurious tie.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from njcones.distvec import DistVector, index_to_pair, num_pairs, pair_to_index
from njcones.topology import ConeId, Topology

DEFAULT_TIE_TOL = 1e-9


@dataclass(frozen=True)
class QVector:
    n: int
    entries: tuple

    def __getitem__(self, i):
        return self.entries[i]

    def __len__(self):
        return len(self.entries)

    @property
    def is_exact(self):
        return isinstance(self.entries[0], Fraction)


def q_matrix(n):
    """The integer matrix ``A`` with ``q = A d``."""
    if n < 3:
        raise ValueError(f"Q-criterion needs at least 3 taxa, got n={n}")
    m = num_pairs(n)
    pairs = [set(index_to_pair(i)) for i in range(m)]
    A = np.zeros((m, m), dtype=np.int64)
    for i in range(m):
        for j in range(m):
            if i == j:
                A[i, j] = n - 4
            elif pairs[i] & pairs[j]:
                A[i, j] = -1
    return A


def q_criterion(d):
    if d.n < 3:
        raise ValueError(f"Q-criterion needs at least 3 taxa, got n={d.n}")
    r = d.row_sums()
    k = d.n - 2
    q = []
    i = 0
    for a in range(1, d.n):
        for b in range(a):
            q.append(k * d.entries[i] - r[a] - r[b])
            i += 1
    return QVector(d.n, tuple(q))


def q_criterion_matrix(d):
    """Same as :func:`q_criterion`, via the explicit matrix product."""
    A = q_matrix(d.n).tolist()
    return QVector(d.n, tuple(sum(a * x for a, x in zip(row, d.entries)) for row in A))


def pick_cherries(q, tol=DEFAULT_TIE_TOL, candidates=None):
    """Indices attaining the minimal Q-criterion.

    Exact input is compared exactly.  For floats an index ties with the
    minimum when ``q[i] - q_min <= tol * max(1, |q_min|)``.
    """
    if q.n < 4:
        raise ValueError(f"cherry picking needs at least 4 taxa, got n={q.n}")
    idx = range(len(q)) if candidates is None else candidates
    qmin = min(q[i] for i in idx)
    if q.is_exact:
        return frozenset(i for i in idx if q[i] == qmin)
    slack = tol * max(1.0, abs(qmin))
    return frozenset(i for i in idx if q[i] - qmin <= slack)


def reduction_matrix(n):
    """The matrix ``R`` with ``d' = R d`` for the pick ``{n-2, n-1}``."""
    m = num_pairs(n)
    keep = num_pairs(n - 2)
    R = [[Fraction(0)] * m for _ in range(m - n + 1)]
    for i in range(keep):
        R[i][i] = Fraction(1)
    half = Fraction(1, 2)
    for i in range(keep, num_pairs(n - 1)):
        R[i][i] = half
        R[i][i + n - 2] = half
        R[i][m - 1] = -half
    return R


def _canonical_swap(n, pick):
    """Permutation sending the picked pair to ``{n-2, n-1}`` by transpositions."""
    a, b = index_to_pair(pick, n)
    images = list(range(n))

    def swap(x, y):
        ix, iy = images.index(x), images.index(y)
        images[ix], images[iy] = y, x

    # larger label to n-1, then smaller to n-2
    swap(images[a], n - 1)
    swap(images[b], n - 2)
    return images


def _reduce_last(d):
    n, e = d.n, d.entries
    m = len(e)
    keep = num_pairs(n - 2)
    out = list(e[:keep])
    last = e[m - 1]
    for i in range(keep, num_pairs(n - 1)):
        out.append((e[i] + e[i + n - 2] - last) / 2)
    return DistVector(n - 1, out)


def reduce_with_labels(d, pick):
    """Join the picked pair; return the reduced vector and the relabeling.

    The second value maps every old label to its label in the reduced
    problem; both members of the picked pair map to ``n-2``.
    """
    if d.n < 4:
        raise ValueError(f"reduction needs at least 4 taxa, got n={d.n}")
    if not 0 <= pick < d.m:
        raise IndexError(f"pick {pick} out of range for n={d.n}")
    images = _canonical_swap(d.n, pick)
    reduced = _reduce_last(d.relabel(images))
    new_labels = [min(x, d.n - 2) for x in images]
    return reduced, new_labels


def reduce(d, pick):
    return reduce_with_labels(d, pick)[0]


@dataclass(frozen=True)
class PickOutcome:
    """One NJ trajectory: the ordered joins and the tree they produce.

    ``picks`` holds each join as a pair of leaf clusters (sorted tuples of
    original labels).  ``cone`` is set for five taxa.
    """

    picks: tuple
    topology: Topology
    cone: ConeId = None

    def relabel(self, images):
        picks = tuple(
            tuple(sorted(tuple(sorted(images[x] for x in c)) for c in pick))
            for pick in self.picks
        )
        cone = self.cone.relabel(images) if self.cone is not None else None
        return PickOutcome(picks, self.topology.relabel(images), cone)

    def describe_picks(self):
        def fmt(c):
            return str(c[0]) if len(c) == 1 else "(" + ",".join(map(str, c)) + ")"

        return " ".join("(" + ",".join(fmt(c) for c in pick) + ")" for pick in self.picks)


@dataclass(frozen=True)
class NJResult:
    outcomes: tuple

    @property
    def tied(self):
        return len(self.outcomes) > 1

    @property
    def topologies(self):
        return frozenset(o.topology for o in self.outcomes)

    @property
    def cone_ids(self):
        return frozenset(o.cone for o in self.outcomes if o.cone is not None)

    def relabel(self, images):
        return NJResult(_sorted_outcomes(o.relabel(images) for o in self.outcomes))


def _sorted_outcomes(outcomes):
    return tuple(sorted(set(outcomes), key=lambda o: o.picks))


def _cone_of(picks):
    (p, q) = picks
    first = [c[0] for c in p]
    second = [c[0] for c in q]
    lone = (set(range(5)) - set(first) - set(second)).pop()
    return ConeId(tuple(first), lone)


def nj_run(d, tol=DEFAULT_TIE_TOL):
    """Run NJ on ``d`` and return every optimal pick trajectory."""
    if d.n < 4:
        raise ValueError(f"NJ needs at least 4 taxa, got n={d.n}")
    n0 = d.n
    outcomes = set()

    def step(cur, clusters, picks):
        n = cur.n
        if n == 3:
            topo = Topology.from_clusters(n0, [sum(p, ()) for p in picks])
            cone = _cone_of(picks) if n0 == 5 else None
            outcomes.add(PickOutcome(tuple(picks), topo, cone))
            return
        candidates = None
        if n == 4:
            candidates = [pair_to_index(1, 0), pair_to_index(2, 0), pair_to_index(2, 1)]
        for pick in sorted(pick_cherries(q_criterion(cur), tol, candidates)):
            a, b = index_to_pair(pick)
            joined = tuple(sorted(clusters[a] + clusters[b]))
            join = tuple(sorted((clusters[a], clusters[b])))
            reduced, labels = reduce_with_labels(cur, pick)
            new_clusters = [None] * (n - 1)
            for old, new in enumerate(labels):
                new_clusters[new] = clusters[old]
            new_clusters[n - 2] = joined
            step(reduced, new_clusters, picks + [join])

    step(d, [(x,) for x in range(n0)], [])
    return NJResult(_sorted_outcomes(outcomes))
