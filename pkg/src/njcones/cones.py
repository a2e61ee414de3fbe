"""The 30 NJ cones ``C_{ab,c}`` on five taxa.

Only ``C_{43,2}`` is built from scratch.  Its eleven defining halfspaces are

* ``h9,i`` for i = 0..8: the first pick {4,3} beats pair ``i``
  (``q[i] - q[9] >= 0``);
* ``r1-r2`` and ``r1-r3``: after joining 3 and 4, the second pick is
  {1,0} (leaving 2 alone) rather than {2,0} or {2,1}.  ``r1, r2, r3`` are
  the first three rows of ``-A4 R``.

All other cones are images of this one under leaf relabeling.  Every normal
is orthogonal to the shift space S, so each cone is ``S`` plus a pointed
cone in W; rays are enumerated in W-coordinates by the double description
method and lifted back to primitive integer vectors in R^10.

Cones are closed: a point on a shared boundary belongs to every incident
cone, which mirrors the set-valued NJ of :func:`njcones.nj.nj_run`.
"""

import itertools
import math
import os
import threading
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from njcones import _exact
from njcones.distvec import DistVector
from njcones.nj import q_matrix, reduction_matrix
from njcones.symmetry import LeafPermutation, permute_vector, shift_basis, w_basis
from njcones.topology import ConeId, all_cone_ids

BASE_ID = ConeId((4, 3), 2)
FEASIBILITY_TOL = 1e-10
CACHE_ENV = "NJ_CONES_CACHE"


class DegenerateConeError(ValueError):
    """The cone is not pointed after quotienting by the shift space."""


@dataclass(frozen=True)
class Halfspace:
    """``{d : (normal, d) >= 0}`` with a primitive integer normal."""

    normal: tuple
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "normal", _exact.primitive(self.normal))

    def value(self, d):
        return sum(h * x for h, x in zip(self.normal, d))

    def relabel(self, sigma):
        return Halfspace(permute_vector(sigma, DistVector(5, self.normal)).entries, self.label)


@dataclass(frozen=True)
class Cone:
    id: ConeId
    halfspaces: tuple
    facets: tuple
    rays: tuple
    perm: LeafPermutation  # carries C_{43,2} onto this cone

    @property
    def lineality(self):
        return shift_basis(5)

    def contains(self, d):
        return membership(d, self)

    def facet_normals(self):
        return [f.normal for f in self.facets]


# -- double description ---------------------------------------------------


def _w_matrix():
    return [list(w.entries) for w in w_basis()]


def _to_w_constraints(normals):
    shifts = [s.entries for s in shift_basis(5)]
    W = _w_matrix()
    rows = []
    for h in normals:
        if any(_exact.dot(h, s) != 0 for s in shifts):
            raise ValueError(f"normal {tuple(h)} is not orthogonal to the shift space")
        rows.append([_exact.dot(h, w) for w in W])
    return rows


def double_description(M):
    """Extreme rays of the pointed cone ``{x : M x >= 0}``.

    Standard incremental double description with the combinatorial
    adjacency test.  Returns primitive integer vectors, sorted.
    """
    if not M:
        raise DegenerateConeError("no constraints: the cone is the whole space")
    dim = len(M[0])
    if _exact.rank(M) < dim:
        raise DegenerateConeError(
            f"constraint matrix has rank {_exact.rank(M)} < {dim}; cone is not pointed"
        )
    basis = []
    for i, row in enumerate(M):
        if _exact.rank([M[j] for j in basis] + [row]) > len(basis):
            basis.append(i)
        if len(basis) == dim:
            break
    Binv = _exact.inverse([M[i] for i in basis])
    rays = [_exact.primitive(col) for col in zip(*Binv)]
    processed = list(basis)

    def zero_set(r):
        return frozenset(k for k in processed if _exact.dot(M[k], r) == 0)

    for k in range(len(M)):
        if k in basis:
            continue
        vals = [_exact.dot(M[k], r) for r in rays]
        pos = [r for r, v in zip(rays, vals) if v > 0]
        neg = [r for r, v in zip(rays, vals) if v < 0]
        new = [r for r, v in zip(rays, vals) if v >= 0]
        zs = {r: zero_set(r) for r in rays}
        for p in pos:
            vp = _exact.dot(M[k], p)
            for q in neg:
                common = zs[p] & zs[q]
                if len(common) < dim - 2:
                    continue
                if any(r != p and r != q and common <= zs[r] for r in rays):
                    continue
                vq = _exact.dot(M[k], q)
                new.append(_exact.primitive([vp * b - vq * a for a, b in zip(p, q)]))
        rays = sorted(set(new))
        processed.append(k)
    return sorted(rays)


def enumerate_rays(normals):
    """Extreme rays (mod the shift space) of ``{d : (h, d) >= 0 for h in normals}``.

    Normals must be orthogonal to S.  Rays are returned as primitive
    integer vectors of R^10 lying in W, sorted lexicographically.
    """
    M = _to_w_constraints(normals)
    W = _w_matrix()
    out = []
    for x in double_description(M):
        v = [sum(c * w[i] for c, w in zip(x, W)) for i in range(10)]
        out.append(_exact.primitive(v))
    return sorted(out)


def irredundant(normals, rays):
    """Indices of the normals that define facets (first copy of duplicates)."""
    M = _to_w_constraints(normals)
    dim = _exact.rank(M)
    seen = set()
    keep = []
    for k, h in enumerate(normals):
        key = _exact.primitive(h)
        tight = [r for r in rays if _exact.dot(h, r) == 0]
        if tight and _exact.rank([list(r) for r in tight]) == dim - 1 and key not in seen:
            keep.append(k)
            seen.add(key)
    return keep


# -- the base cone and its images -----------------------------------------


def _base_halfspaces():
    A5 = q_matrix(5).tolist()
    A4 = q_matrix(4).tolist()
    R = reduction_matrix(5)
    hs = []
    for i in range(9):
        # -A (e9 - ei) = A[:, i] - A[:, 9]; A is symmetric
        hs.append(Halfspace([A5[i][k] - A5[9][k] for k in range(10)], f"h9,{i}"))
    AR = _exact.matmul(A4, R)
    r1, r2, r3 = ([-x for x in AR[k]] for k in range(3))
    hs.append(Halfspace([x - y for x, y in zip(r1, r2)], "r1-r2"))
    hs.append(Halfspace([x - y for x, y in zip(r1, r3)], "r1-r3"))
    return hs


def build_C34_2():
    """Build ``C_{43,2}`` (first cherry {3,4}, then {0,1}, leaving 2)."""
    hs = _base_halfspaces()
    normals = [h.normal for h in hs]
    rays = enumerate_rays(normals)
    facets = [hs[k] for k in irredundant(normals, rays)]
    return Cone(BASE_ID, tuple(hs), tuple(facets), tuple(rays), LeafPermutation.identity(5))


def _carry(sigma, cone):
    def move(v):
        return permute_vector(sigma, DistVector(5, v)).entries

    rays = sorted(tuple(int(x) for x in move(r)) for r in cone.rays)
    return Cone(
        cone.id.relabel(sigma.images),
        tuple(h.relabel(sigma) for h in cone.halfspaces),
        tuple(h.relabel(sigma) for h in cone.facets),
        tuple(rays),
        sigma * cone.perm,
    )


def transform_cone(sigma, cone):
    """Image of ``cone`` under the leaf permutation ``sigma``."""
    return _carry(sigma, cone)


_lock = threading.Lock()
_cones = None


def _build_all():
    base = build_C34_2()
    cones = {}
    for images in itertools.permutations(range(5)):
        sigma = LeafPermutation(images)
        cid = BASE_ID.relabel(images)
        if cid not in cones:
            cones[cid] = _carry(sigma, base)
    return cones


def all_cones():
    """Mapping ConeId -> Cone for all 30 cones (built once per process)."""
    global _cones
    if _cones is None:
        with _lock:
            if _cones is None:
                cache = os.environ.get(CACHE_ENV)
                cones = _load_cache(Path(cache)) if cache else None
                if cones is None:
                    cones = _build_all()
                    if cache:
                        export_cones(cones.values(), Path(cache))
                _cones = cones
    return _cones


def cone_for(cid):
    if not isinstance(cid, ConeId):
        cid = ConeId.parse(str(cid))
    return all_cones()[cid]


# -- membership ------------------------------------------------------------


def _integer_direction(d):
    return _exact.integer_direction(d.exact().entries if isinstance(d, DistVector) else d)


def membership(d, cone):
    """True iff ``d`` satisfies every facet inequality (boundary included)."""
    D = _integer_direction(d)
    return all(sum(h * x for h, x in zip(f.normal, D)) >= 0 for f in cone.facets)


def containing_cones(d):
    """Set of ConeIds whose closed cone contains ``d``."""
    D = _integer_direction(d)
    return frozenset(
        cid
        for cid, cone in all_cones().items()
        if all(sum(h * x for h, x in zip(f.normal, D)) >= 0 for f in cone.facets)
    )


def shared_facets(c1, c2):
    """Facets of ``c1`` whose opposite halfspace is a facet of ``c2``."""
    other = {tuple(-x for x in f.normal) for f in c2.facets}
    return [f for f in c1.facets if f.normal in other]


def hyperplane_distance(d, normal):
    """Signed l2 distance from ``d`` to the hyperplane ``(normal, x) = 0``."""
    val = sum(h * float(x) for h, x in zip(normal, d))
    return val / math.sqrt(sum(h * h for h in normal))


# -- nearest point ---------------------------------------------------------


class _ActiveSetTable:
    """Precomputed projections onto every face hull of one cone.

    For each linearly independent subset ``J`` of facet normals we store
    ``K_J = (N_J N_J^T)^-1 N_J``; the projection of ``d`` onto
    ``{x : N_J x = 0}`` is ``d - N_J^T mu`` with ``mu = K_J d``.  A
    candidate is the true nearest point exactly when it is feasible and
    ``mu <= 0`` (KKT for ``N x >= 0``).
    """

    def __init__(self, normals):
        self.N = [list(n) for n in normals]
        k = len(self.N)
        self.G = [[_exact.dot(a, b) for b in self.N] for a in self.N]
        dim = _exact.rank(self.N)
        self.subsets = []
        self.K = []
        for size in range(dim + 1):
            for J in itertools.combinations(range(k), size):
                rows = [self.N[j] for j in J]
                if size and _exact.rank(rows) < size:
                    continue
                if size:
                    GJ = [[self.G[a][b] for b in J] for a in J]
                    K = _exact.matmul(_exact.inverse(GJ), rows)
                else:
                    K = []
                den = 1
                for row in K:
                    for x in row:
                        den = den * x.denominator // math.gcd(den, x.denominator)
                self.subsets.append(J)
                self.K.append(([[int(x * den) for x in row] for row in K], den))
        S = len(self.subsets)
        self.Kf = np.zeros((S, dim, 10))
        self.Gmix = np.zeros((S, k, dim))
        self.mask = np.zeros((S, dim), dtype=bool)
        for s, (J, (Kint, den)) in enumerate(zip(self.subsets, self.K)):
            for a, j in enumerate(J):
                self.Kf[s, a] = np.array(Kint[a], dtype=float) / den
                self.Gmix[s, :, a] = [self.G[i][j] for i in range(k)]
                self.mask[s, a] = True
        self.Nf = np.array(self.N, dtype=float)
        self.norm_scale = float(np.max(np.linalg.norm(self.Nf, axis=1)))

    def search(self, X):
        """Float pass: squared distances and KKT flags, shape (B, S)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        mu = np.einsum("sjk,bk->bsj", self.Kf, X)
        nd = X @ self.Nf.T
        slack = nd[:, None, :] - np.einsum("skj,bsj->bsk", self.Gmix, mu)
        tol = FEASIBILITY_TOL * np.maximum(1.0, np.linalg.norm(X, axis=1)) * self.norm_scale
        feasible = np.all(slack >= -tol[:, None, None], axis=2)
        signs = np.all((mu <= tol[:, None, None]) | ~self.mask[None], axis=2)
        # |d - u|^2 = |N_J^T mu|^2
        resid = np.einsum("sjk,bsj->bsk", self._NJ(), mu)
        dist2 = np.einsum("bsk,bsk->bs", resid, resid)
        return dist2, feasible & signs

    def _NJ(self):
        if not hasattr(self, "_nj"):
            NJ = np.zeros_like(self.Kf)
            for s, J in enumerate(self.subsets):
                for a, j in enumerate(J):
                    NJ[s, a] = self.Nf[j]
            self._nj = NJ
        return self._nj

    def certify(self, s, D):
        """Exact check of candidate ``s`` for the integer direction ``D``.

        Returns the exact multipliers (scaled) or ``None``.
        """
        J = self.subsets[s]
        Kint, den = self.K[s]
        mus = [_exact.dot(row, D) for row in Kint]
        if any(m > 0 for m in mus):
            return None
        for i, n in enumerate(self.N):
            lhs = _exact.dot(n, D) * den - sum(m * self.G[i][j] for m, j in zip(mus, J))
            if lhs < 0:
                return None
        return mus, den

    def nearest(self, d, X=None):
        """Exact nearest point of the exact vector ``d`` (a Fraction list)."""
        fr = [_exact.to_fraction(x) for x in d]
        scale = 1
        for x in fr:
            scale = scale * x.denominator // math.gcd(scale, x.denominator)
        D = [int(x * scale) for x in fr]
        if X is None:
            dist2, ok = self.search(np.array([float(x) for x in fr]))
            dist2, ok = dist2[0], ok[0]
        else:
            dist2, ok = X
        order = [s for s in np.argsort(dist2, kind="stable") if ok[s]]
        order += [s for s in np.argsort(dist2, kind="stable") if not ok[s]]
        for s in order:
            cert = self.certify(s, D)
            if cert is None:
                continue
            mus, den = cert
            J = self.subsets[s]
            mu = [Fraction(m, den * scale) for m in mus]
            u = list(fr)
            for m, j in zip(mu, J):
                for i in range(10):
                    u[i] -= m * self.N[j][i]
            gap = sum((a - b) ** 2 for a, b in zip(fr, u))
            return u, gap
        raise AssertionError("no active set satisfied the optimality conditions")


_tables = {}


def _table():
    base = all_cones()[BASE_ID]
    key = tuple(base.facet_normals())
    if key not in _tables:
        with _lock:
            if key not in _tables:
                _tables[key] = _ActiveSetTable(key)
    return _tables[key]


def _to_base(d, cone):
    return permute_vector(cone.perm.inverse(), d)


def nearest_point(d, cone):
    """Unique l2-nearest point of the closed cone to ``d`` and the distance.

    The point is exact (Fractions; float input is lifted losslessly).  The
    search runs over every linearly independent set of active facets, uses
    floats to rank candidates and accepts the first one that passes the
    exact optimality test.
    """
    d = d.exact()
    base_d = _to_base(d, cone)
    u, gap = _table().nearest(base_d.entries)
    point = permute_vector(cone.perm, DistVector(5, u))
    return point, math.sqrt(gap)


def squared_distance(d, cone):
    """Exact squared distance from ``d`` to ``cone`` as a Fraction."""
    d = d.exact()
    return _table().nearest(_to_base(d, cone).entries)[1]


def distances_to_cones(d, cones, exact=True):
    """Distances from ``d`` to each cone, vectorized over the cones.

    With ``exact=False`` the float search result is returned directly.
    """
    cones = list(cones)
    table = _table()
    dx = d.exact() if exact else d.to_float()
    base_vecs = [_to_base(dx, c) for c in cones]
    X = np.array([[float(x) for x in v.entries] for v in base_vecs])
    dist2, ok = table.search(X)
    out = {}
    for b, cone in enumerate(cones):
        if not exact:
            out[cone.id] = math.sqrt(max(0.0, float(np.min(np.where(ok[b], dist2[b], np.inf)))))
            continue
        _, gap = table.nearest(base_vecs[b].entries, (dist2[b], ok[b]))
        out[cone.id] = math.sqrt(gap)
    return out


def distance_to_misclassification(d, correct, outcome=None):
    """Robustness distance of ``d`` relative to the correct cone set.

    If ``d`` is correctly classified (its cone set is a subset of
    ``correct``) this is the distance to the nearest cone outside
    ``correct``; otherwise the distance to the nearest correct cone.
    ``outcome`` defaults to the exact membership set of ``d``.
    """
    correct = frozenset(correct)
    if outcome is None:
        outcome = containing_cones(d)
    if outcome and outcome <= correct:
        targets = [c for cid, c in all_cones().items() if cid not in correct]
    else:
        targets = [all_cones()[cid] for cid in correct]
    table = _table()
    dx = d.exact()
    base_vecs = [_to_base(dx, c) for c in targets]
    X = np.array([[float(x) for x in v.entries] for v in base_vecs])
    dist2, ok = table.search(X)
    best = np.where(ok, dist2, np.inf).min(axis=1)
    floor = float(best.min())
    best_gap = None
    for b in np.flatnonzero(best <= floor + 1e-9 * (1.0 + floor)):
        _, gap = table.nearest(base_vecs[b].entries, (dist2[b], ok[b]))
        if best_gap is None or gap < best_gap:
            best_gap = gap
    return math.sqrt(best_gap)


# -- export ----------------------------------------------------------------


def _ints(v):
    return " ".join(str(int(x)) for x in v)


def format_cone(cone):
    lines = [f"cone {cone.id}"]
    lines += [f"H: {_ints(h.normal)}  # {h.label}" for h in cone.halfspaces]
    lines += [f"F: {_ints(f.normal)}  # {f.label}" for f in cone.facets]
    lines += [f"R: {_ints(r)}" for r in cone.rays]
    return "\n".join(lines) + "\n"


def parse_cone(text):
    """Inverse of :func:`format_cone`; returns (ConeId, halfspaces, facets, rays)."""
    cid, hs, fs, rays = None, [], [], []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("cone "):
            cid = ConeId.parse(line[5:])
            continue
        body, _, label = line.partition("#")
        tag, _, nums = body.partition(":")
        vec = tuple(int(x) for x in nums.split())
        if len(vec) != 10:
            raise ValueError(f"expected 10 integers in line {line!r}")
        if tag == "H":
            hs.append(Halfspace(vec, label.strip()))
        elif tag == "F":
            fs.append(Halfspace(vec, label.strip()))
        elif tag == "R":
            rays.append(vec)
        else:
            raise ValueError(f"unknown line tag {tag!r}")
    if cid is None:
        raise ValueError("missing 'cone' header line")
    return cid, tuple(hs), tuple(fs), tuple(rays)


def export_cones(cones, directory):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for cone in sorted(cones, key=lambda c: c.id):
        path = directory / f"{cone.id.file_stem()}.txt"
        path.write_text(format_cone(cone))
        paths.append(path)
    return paths


def _load_cache(directory):
    ids = all_cone_ids()
    files = [directory / f"{cid.file_stem()}.txt" for cid in ids]
    if not all(f.exists() for f in files):
        return None
    cones = {}
    for images in itertools.permutations(range(5)):
        cid = BASE_ID.relabel(images)
        if cid in cones:
            continue
        parsed_id, hs, fs, rays = parse_cone((directory / f"{cid.file_stem()}.txt").read_text())
        if parsed_id != cid or len(fs) != 9 or len(rays) != 14:
            return None
        cones[cid] = Cone(cid, hs, fs, rays, LeafPermutation(images))
    return cones
