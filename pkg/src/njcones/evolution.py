"""Sequence simulation on five-taxon trees and closed-form ML distances.

Nucleotides are coded A=0, C=1, G=2, T=3, so a substitution ``x -> y`` is
a transition exactly when ``x ^ y == 2``.  Branch lengths are expected
substitutions per site.

Under K2P with transition/transversion rate ratio ``kappa`` the rates are
``alpha = kappa / (kappa + 2)`` (transition) and ``beta = 1 / (kappa + 2)``
(each transversion), so the total rate is one.  JC69 is the case
``kappa = 1``.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from njcones.distvec import DistVector, index_to_pair, pair_to_index
from njcones.topology import parse_newick

BASES = "ACGT"
DEFAULT_KAPPA = 2.0


class ConfigError(ValueError):
    """Invalid tree, model or run configuration."""


@dataclass(frozen=True)
class ModelSpec:
    kind: str = "JC69"
    kappa: float = DEFAULT_KAPPA

    def __post_init__(self):
        kind = self.kind.upper()
        if kind in ("JC", "JC69"):
            kind = "JC69"
        elif kind in ("K2P", "K80", "KIMURA", "KIMURA2"):
            kind = "K2P"
        else:
            raise ConfigError(f"unknown substitution model {self.kind!r}")
        if not self.kappa > 0:
            raise ConfigError(f"kappa must be positive, got {self.kappa}")
        object.__setattr__(self, "kind", kind)

    @property
    def rate_ratio(self):
        return 1.0 if self.kind == "JC69" else float(self.kappa)

    def __str__(self):
        return self.kind


def transition_matrix(model, t):
    """4x4 matrix ``exp(Q t)``."""
    k = model.rate_ratio
    alpha, beta = k / (k + 2), 1 / (k + 2)
    e4 = math.exp(-4 * beta * t)
    e2 = math.exp(-2 * (alpha + beta) * t)
    p_ts = 0.25 + 0.25 * e4 - 0.5 * e2
    p_tv = 0.25 - 0.25 * e4
    P = np.empty((4, 4))
    for x in range(4):
        for y in range(4):
            if x == y:
                P[x, y] = 0.25 + 0.25 * e4 + 0.5 * e2
            elif x ^ y == 2:
                P[x, y] = p_ts
            else:
                P[x, y] = p_tv
    return P


PENDANT = ("0", "1", "2", "3", "4")


@dataclass(frozen=True)
class TreeModel:
    """Five-taxon tree ``((a,b),c,(d,e))`` with seven edge lengths.

    Pendant edges are keyed by leaf label (``"0"`` .. ``"4"``); the two
    interior edges by their cherry, e.g. ``"01"`` and ``"34"``.
    """

    name: str
    topology: str
    edges: dict = field(hash=False)

    def __post_init__(self):
        tree = parse_newick(self.topology)
        if not (isinstance(tree, tuple) and len(tree) == 3):
            raise ConfigError(f"{self.topology!r} is not of the form ((a,b),c,(d,e))")
        cherries = [k for k in tree if isinstance(k, tuple)]
        lone = [k for k in tree if isinstance(k, int)]
        if len(cherries) != 2 or len(lone) != 1 or not all(
            len(c) == 2 and all(isinstance(x, int) for x in c) for c in cherries
        ):
            raise ConfigError(f"{self.topology!r} is not of the form ((a,b),c,(d,e))")
        if sorted(lone + [x for c in cherries for x in c]) != list(range(5)):
            raise ConfigError(f"{self.topology!r} must use leaves 0..4 once each")
        cherries = [tuple(sorted(c)) for c in cherries]
        expected = set(PENDANT) | {f"{a}{b}" for a, b in cherries}
        edges = {str(k): float(v) for k, v in self.edges.items()}
        if set(edges) != expected:
            raise ConfigError(f"edge names must be {sorted(expected)}, got {sorted(edges)}")
        if any(not math.isfinite(v) or v < 0 for v in edges.values()):
            raise ConfigError(f"edge lengths must be finite and nonnegative: {edges}")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "_cherries", tuple(cherries))
        object.__setattr__(self, "_lone", lone[0])

    @property
    def cherries(self):
        return self._cherries

    @property
    def lone(self):
        return self._lone

    def _path(self, x):
        """Edges from leaf x up to the central node."""
        for c in self.cherries:
            if x in c:
                return [str(x), f"{c[0]}{c[1]}"]
        return [str(x)]

    def path_length(self, x, y):
        if x == y:
            return 0.0
        px, py = self._path(x), self._path(y)
        shared = set(px) & set(py)
        return sum(self.edges[e] for e in px + py if e not in shared)

    def tree_metric(self):
        return DistVector(5, [self.path_length(*index_to_pair(i)) for i in range(10)])

    def to_json(self):
        return json.dumps({"name": self.name, "topology": self.topology, "edges": self.edges}, indent=2)


def preset_tree(name, a=0.03, b=0.42):
    """Reconstructed T1/T2 shapes with interior/pendant ratio ``a/b``.

    Both have all pendant edges ``b``.  T1 has interior edges ``(a, a)``;
    T2 has ``(a, 2a)`` so that no quartet of T1 has a longer internal edge
    than the matching quartet of T2.
    """
    interior = {"T1": (a, a), "T2": (a, 2 * a)}
    if name not in interior:
        raise ConfigError(f"unknown preset tree {name!r}; choose T1 or T2")
    x, y = interior[name]
    edges = {leaf: b for leaf in PENDANT}
    edges.update({"01": x, "34": y})
    return TreeModel(name, "((0,1),2,(3,4));", edges)


def load_tree_config(text):
    """Tree from JSON text ``{"name", "topology", "edges"}``."""
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"tree config is not valid JSON: {exc}") from None
    try:
        return TreeModel(cfg.get("name", "custom"), cfg["topology"], cfg["edges"])
    except KeyError as exc:
        raise ConfigError(f"tree config missing key {exc}") from None
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


@dataclass(frozen=True)
class Alignment:
    sequences: tuple

    @property
    def length(self):
        return len(self.sequences[0])

    def codes(self):
        table = np.full(256, 255, dtype=np.uint8)
        for i, ch in enumerate(BASES):
            table[ord(ch)] = i
        return np.stack([table[np.frombuffer(s.encode(), dtype=np.uint8)] for s in self.sequences])

    def to_fasta(self):
        out = []
        for i, s in enumerate(self.sequences):
            out.append(f">{i}")
            out += [s[k : k + 60] for k in range(0, len(s), 60)]
        return "\n".join(out) + "\n"


def replicate_rng(seed, replicate):
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(replicate)]))


def _evolve(parent, P, rng):
    cum = np.cumsum(P, axis=1)
    u = rng.random(parent.shape[0])
    child = (u[:, None] > cum[parent]).sum(axis=1)
    return np.minimum(child, 3).astype(np.uint8)


def simulate_codes(tree, model, length, rng):
    """Simulate a (5, length) array of nucleotide codes."""
    if length <= 0:
        raise ConfigError(f"alignment length must be positive, got {length}")
    center = rng.integers(0, 4, size=length, dtype=np.uint8)
    out = [None] * 5
    out[tree.lone] = _evolve(center, transition_matrix(model, tree.edges[str(tree.lone)]), rng)
    for a, b in tree.cherries:
        inner = _evolve(center, transition_matrix(model, tree.edges[f"{a}{b}"]), rng)
        for leaf in (a, b):
            out[leaf] = _evolve(inner, transition_matrix(model, tree.edges[str(leaf)]), rng)
    return np.stack(out)


def simulate_alignment(tree, model, length=500, seed=0, replicate=0):
    """Simulate five sequences; deterministic for a given (seed, replicate)."""
    codes = simulate_codes(tree, model, length, replicate_rng(seed, replicate))
    return Alignment(tuple("".join(BASES[c] for c in row) for row in codes))


@dataclass(frozen=True)
class DistanceEstimate:
    distances: DistVector  # None when any pair saturated
    saturated: tuple  # flat indices of saturated pairs

    @property
    def valid(self):
        return not self.saturated


def jc69_distance(p):
    arg = 1 - 4 * p / 3
    return 0.0 - 0.75 * math.log(arg) if arg > 0 else None


def k2p_distance(P, Q):
    a1 = 1 - 2 * P - Q
    a2 = 1 - 2 * Q
    if a1 <= 0 or a2 <= 0:
        return None
    return 0.0 - 0.5 * math.log(a1) - 0.25 * math.log(a2)


def estimate_from_codes(codes, model):
    codes = np.asarray(codes)
    L = codes.shape[1]
    values, saturated = [], []
    for x in range(1, 5):
        for y in range(x):
            diff = codes[x] ^ codes[y]
            if model.kind == "JC69":
                dist = jc69_distance(np.count_nonzero(diff) / L)
            else:
                P = np.count_nonzero(diff == 2) / L
                Q = np.count_nonzero((diff == 1) | (diff == 3)) / L
                dist = k2p_distance(P, Q)
            if dist is None:
                saturated.append(pair_to_index(x, y))
                dist = math.inf
            values.append(float(dist))
    if saturated:
        return DistanceEstimate(None, tuple(saturated))
    return DistanceEstimate(DistVector(5, values), ())


def estimate_distances(aln, model):
    """Pairwise ML distances under JC69 or K2P (closed form)."""
    codes = aln.codes() if isinstance(aln, Alignment) else aln
    if np.any(codes > 3):
        raise ConfigError("alignment contains characters other than A, C, G, T")
    return estimate_from_codes(codes, model)
