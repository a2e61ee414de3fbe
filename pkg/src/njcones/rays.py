"""Catalog of the 82 extreme rays shared by the NJ cones.

Every ray lies in W and falls into one of three S5-orbits.  With leaf
labels ``a, b, c, d, e`` the integer representatives are:

type a (60 rays), a string ``a-b-c-d`` with ``e`` left over
    -3 on the string edges ab, bc, cd; 5 on ac and bd; -1 on ad;
    -1 on ea and ed; +1 on eb and ec.  Reversing the string gives the same
    vector, so labels are oriented with ``b < c``.

type b (12 rays), a 5-cycle ``a-b-c-d-e-a``
    -1 on the five cycle edges, +1 on the five chords.  Labels are any
    rotation or reflection of the cycle; the canonical form starts at 0
    with ``labels[1] < labels[4]``.

type c (10 rays), a pair ``{a, e}``
    3 on ae, +1 on the triangle of the remaining three leaves, -1 on the
    six pairs between the two groups.

The string 0-1-2-3 lies in exactly C_{10,4}, C_{21,0}, C_{21,3}, C_{21,4}
and C_{32,4}, and is an extreme ray only of the three C_{21,*}.
"""

import csv
import io
import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from njcones import _exact
from njcones.cones import all_cones, containing_cones, cone_for
from njcones.distvec import DistVector, pair_to_index
from njcones.symmetry import project_to_W

ORBIT_SIZES = {"a": 60, "b": 12, "c": 10}
EXTREME_COUNTS = {"a": 3, "b": 10, "c": 12}


def canonical_labels(kind, labels):
    labels = tuple(labels)
    if kind == "a":
        if len(labels) == 4:
            labels += tuple(set(range(5)) - set(labels))
        _check_perm(labels)
        a, b, c, d, e = labels
        return labels if b < c else (d, c, b, a, e)
    if kind == "b":
        _check_perm(labels)
        k = labels.index(0)
        rot = labels[k:] + labels[:k]
        return rot if rot[1] < rot[4] else (0,) + tuple(reversed(rot[1:]))
    if kind == "c":
        if len(labels) == 5:
            _check_perm(labels)
            labels = (labels[0], labels[4])
        if len(labels) != 2 or labels[0] == labels[1] or not all(0 <= x < 5 for x in labels):
            raise ValueError(f"type (c) needs two distinct leaves, got {labels!r}")
        return tuple(sorted(labels))
    raise ValueError(f"unknown ray type {kind!r}")


def _check_perm(labels):
    if sorted(labels) != list(range(5)):
        raise ValueError(f"labels must be a permutation of 0..4, got {labels!r}")


def ray_vector(kind, labels):
    """Integer coordinates of the catalogued ray of the given type."""
    labels = canonical_labels(kind, labels)
    v = [0] * 10

    def put(x, y, val):
        v[pair_to_index(x, y)] = val

    if kind == "a":
        a, b, c, d, e = labels
        for x, y in ((a, b), (b, c), (c, d)):
            put(x, y, -3)
        put(a, c, 5)
        put(b, d, 5)
        put(a, d, -1)
        put(e, a, -1)
        put(e, d, -1)
        put(e, b, 1)
        put(e, c, 1)
    elif kind == "b":
        v = [1] * 10
        for x, y in zip(labels, labels[1:] + labels[:1]):
            put(x, y, -1)
    else:
        a, e = labels
        rest = [x for x in range(5) if x not in labels]
        v = [-1] * 10
        put(a, e, 3)
        for x, y in itertools.combinations(rest, 2):
            put(x, y, 1)
    return tuple(v)


def identify(vector):
    """Recover ``(type, canonical labels)`` from a catalogued ray vector."""
    v = _exact.primitive(vector)
    values = set(v)
    M = [[None] * 5 for _ in range(5)]
    for x in range(5):
        for y in range(x):
            M[x][y] = M[y][x] = v[pair_to_index(x, y)]
    if values == {-3, -1, 1, 5}:
        edges = [(x, y) for x in range(5) for y in range(x) if M[x][y] == -3]
        deg = {x: sum(x in e for e in edges) for x in range(5)}
        e = next(x for x in range(5) if deg[x] == 0)
        a = min(x for x in range(5) if deg[x] == 1)
        path = [a]
        while len(path) < 4:
            nxt = next(y for y in range(5) if y not in path and M[path[-1]][y] == -3)
            path.append(nxt)
        labels = canonical_labels("a", tuple(path) + (e,))
        kind = "a"
    elif values == {-1, 1}:
        cyc = [0]
        while len(cyc) < 5:
            cyc.append(next(y for y in range(5) if y not in cyc and M[cyc[-1]][y] == -1))
        labels = canonical_labels("b", cyc)
        kind = "b"
    elif values == {-1, 1, 3}:
        x, y = next((x, y) for x in range(5) for y in range(x) if M[x][y] == 3)
        labels = canonical_labels("c", (x, y))
        kind = "c"
    else:
        raise ValueError(f"{tuple(vector)} is not a catalogued ray")
    if ray_vector(kind, labels) != v:
        raise ValueError(f"{tuple(vector)} does not match the {kind} pattern")
    return kind, labels


@dataclass(frozen=True)
class RayDescriptor:
    orbit_type: str
    labels: tuple
    vector: tuple
    member_of: frozenset
    extreme_ray_of: frozenset

    def label_text(self):
        return "".join(map(str, self.labels))


@lru_cache(maxsize=None)
def catalog():
    """All 82 rays, ordered by type, then labels."""
    cones = all_cones()
    extreme = {}
    for cid, cone in cones.items():
        for r in cone.rays:
            extreme.setdefault(r, set()).add(cid)
    out = []
    for r, ext in extreme.items():
        kind, labels = identify(r)
        member = containing_cones(DistVector(5, r))
        out.append(RayDescriptor(kind, labels, r, member, frozenset(ext)))
    return tuple(sorted(out, key=lambda x: (x.orbit_type, x.labels)))


def catalog_csv(descriptors=None):
    descriptors = catalog() if descriptors is None else descriptors
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["type", "labels"] + [f"d{i}" for i in range(10)] + ["member_of", "extreme_ray_of"])
    for r in descriptors:
        w.writerow(
            [r.orbit_type, r.label_text()]
            + list(r.vector)
            + [";".join(map(str, sorted(r.member_of))), ";".join(map(str, sorted(r.extreme_ray_of)))]
        )
    return buf.getvalue()


def stability_decomposition(d, cone=None):
    """Write ``d`` as a nonnegative combination of the cone's rays plus a shift.

    Returns ``(alphas, shift)`` with ``alphas`` aligned to ``cone.rays``.
    The support is taken inside the smallest face of the cone containing
    ``d``: subsets of the face's rays are tried in order and the first
    simplicial subcone containing ``d`` wins.
    """
    d = d.exact()
    if cone is None:
        ids = containing_cones(d)
        if not ids:
            raise ValueError("d lies in no cone")
        cone = cone_for(min(ids))
    if not cone.contains(d):
        raise ValueError(f"d is not in {cone.id}")
    p = project_to_W(d)
    shift = d - p
    alphas = [Fraction(0)] * len(cone.rays)
    if all(x == 0 for x in p.entries):
        return tuple(alphas), shift
    tight = [f for f in cone.facets if f.value(p) == 0]
    face = [i for i, r in enumerate(cone.rays) if all(f.value(r) == 0 for f in tight)]
    face_rank = _exact.rank([list(cone.rays[i]) for i in face])
    # a float screen makes the first pass cheap; the second pass is exact only
    for screen in (True, False):
        found = _simplicial_solve(cone.rays, face, face_rank, p.entries, screen)
        if found is not None:
            for i, c in found:
                alphas[i] = c
            return tuple(alphas), shift
    raise AssertionError("no simplicial subcone of the minimal face contains d")


def _simplicial_solve(rays, face, rank, target, screen):
    t = np.array([float(x) for x in target])
    slack = 1e-9 * (1.0 + np.abs(t).max())
    for subset in itertools.combinations(face, rank):
        cols = [list(rays[i]) for i in subset]
        if screen:
            M = np.array(cols, dtype=float).T
            x, _, rk, _ = np.linalg.lstsq(M, t, rcond=None)
            if rk < rank or x.min() < -slack or np.abs(M @ x - t).max() > slack:
                continue
        elif _exact.rank(cols) < rank:
            continue
        # normal equations; exact whenever the target is in the span
        G = [[_exact.dot(u, v) for v in cols] for u in cols]
        x = _exact.solve(G, [_exact.dot(u, target) for u in cols])
        if any(c < 0 for c in x):
            continue
        if [sum(c * col[i] for c, col in zip(x, cols)) for i in range(10)] != list(target):
            continue
        return list(zip(subset, x))
    return None


def support_cones(alphas, cone):
    """Cones containing every ray with a positive coefficient."""
    by_vector = {r.vector: r for r in catalog()}
    common = None
    for a, r in zip(alphas, cone.rays):
        if a > 0:
            ids = by_vector[r].member_of
            common = ids if common is None else common & ids
    return frozenset(all_cones()) if common is None else common
