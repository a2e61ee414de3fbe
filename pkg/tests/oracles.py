"""Independent reference implementations used only by the tests.

Nothing here calls into the package's geometry code: rays come from brute
force over tight-constraint subsets solved with sympy, nearest points from
Dykstra's alternating projections, and tree metrics from explicit path
sums.
"""

import itertools
import random
from fractions import Fraction

import numpy as np
import sympy

PAIRS = [(a, b) for a in range(1, 5) for b in range(a)]


def idx(a, b):
    a, b = max(a, b), min(a, b)
    return a * (a - 1) // 2 + b


def shift_rows():
    return [[1 if s in p else 0 for p in PAIRS] for s in range(5)]


def brute_force_rays(normals):
    """Extreme rays of {d : (h, d) >= 0} modulo the shift space.

    Every extreme ray of the quotient is cut out by four independent tight
    halfspaces together with orthogonality to the shifts.
    """
    S = shift_rows()
    found = set()
    for sub in itertools.combinations(range(len(normals)), 4):
        M = sympy.Matrix(S + [list(normals[i]) for i in sub])
        ns = M.nullspace()
        if len(ns) != 1:
            continue
        v = [sympy.Rational(x) for x in ns[0]]
        for sign in (1, -1):
            w = [sign * x for x in v]
            if all(sum(h[k] * w[k] for k in range(10)) >= 0 for h in normals):
                den = sympy.ilcm(*[x.q for x in w])
                ints = [int(x * den) for x in w]
                g = 0
                for x in ints:
                    g = sympy.igcd(g, x)
                found.add(tuple(x // g for x in ints))
    return found


def dykstra(X, H, iters=3000):
    """Project each row of X onto {x : H x >= 0} by Dykstra's method."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    H = np.asarray(H, dtype=float)
    x = X.copy()
    P = np.zeros((len(H),) + X.shape)
    nn = (H * H).sum(axis=1)
    for _ in range(iters):
        for k, h in enumerate(H):
            y = x + P[k]
            viol = np.minimum(y @ h, 0.0)
            z = y - np.outer(viol, h) / nn[k]
            P[k] = y - z
            x = z
    return x


def tree_metric(cherry1, lone, cherry2, pendant, inner1, inner2):
    """Path-length metric of ((a,b),c,(d,e)) with the given edge lengths."""
    def path(x):
        if x in cherry1:
            return {("p", x), ("i", 1)}
        if x in cherry2:
            return {("p", x), ("i", 2)}
        return {("p", x)}

    length = {("i", 1): inner1, ("i", 2): inner2}
    length.update({("p", x): pendant[x] for x in range(5)})
    out = []
    for a, b in PAIRS:
        out.append(sum(length[e] for e in path(a) ^ path(b)))
    return out


def random_tree(rng, exact=True, low=1, high=20):
    leaves = list(range(5))
    rng.shuffle(leaves)
    c1, lone, c2 = tuple(leaves[:2]), leaves[2], tuple(leaves[3:])
    draw = (lambda: Fraction(rng.randint(low, high))) if exact else (lambda: rng.uniform(low, high))
    pendant = [draw() for _ in range(5)]
    return (c1, lone, c2), tree_metric(c1, lone, c2, pendant, draw(), draw())


def random_rational(rng, n=5, spread=10, den=1):
    m = n * (n - 1) // 2
    return [Fraction(rng.randint(-spread, spread), rng.randint(1, den)) for _ in range(m)]


def make_rng(seed):
    return random.Random(seed)
