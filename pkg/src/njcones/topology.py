"""Labeled unrooted topologies, cone identifiers and a small Newick codec."""

import re
from dataclasses import dataclass
from itertools import permutations


@dataclass(frozen=True, order=True)
class ConeId:
    """Names the cone ``C_{ab,c}``: cherry ``{a, b}`` is picked first and
    ``c`` is left as the lone leaf after the second pick (five taxa)."""

    cherry: tuple
    lone: int

    def __post_init__(self):
        a, b = self.cherry
        if len({a, b, self.lone}) != 3 or not all(0 <= x < 5 for x in (a, b, self.lone)):
            raise ValueError(f"invalid cone id: cherry {self.cherry}, lone leaf {self.lone}")
        object.__setattr__(self, "cherry", (max(a, b), min(a, b)))

    def __str__(self):
        a, b = self.cherry
        return f"C_{{{a}{b},{self.lone}}}"

    @classmethod
    def parse(cls, text):
        m = re.fullmatch(r"\s*C_?\{?(\d)(\d),(\d)\}?\s*", text)
        if not m:
            raise ValueError(f"cannot parse cone id {text!r}")
        a, b, c = map(int, m.groups())
        return cls((a, b), c)

    def relabel(self, images):
        a, b = self.cherry
        return ConeId((images[a], images[b]), images[self.lone])

    def file_stem(self):
        a, b = self.cherry
        return f"C_{a}{b}_{self.lone}"


def all_cone_ids():
    ids = set()
    for a, b, c, _, _ in permutations(range(5)):
        ids.add(ConeId((a, b), c))
    return sorted(ids)


@dataclass(frozen=True)
class Topology:
    """Unrooted binary leaf-labeled tree, stored as its nontrivial splits.

    Each split is kept as the side that does not contain leaf 0.
    """

    n: int
    splits: frozenset

    @classmethod
    def from_clusters(cls, n, clusters):
        leaves = frozenset(range(n))
        splits = set()
        for c in clusters:
            c = frozenset(c)
            side = leaves - c if 0 in c else c
            if 1 < len(side) < n - 1:
                splits.add(side)
        return cls(n, frozenset(splits))

    def relabel(self, images):
        return Topology(
            self.n,
            frozenset(frozenset(images[x] for x in s) for s in self.splits),
        ).normalized()

    def normalized(self):
        return Topology.from_clusters(self.n, self.splits)

    def cherries(self):
        leaves = frozenset(range(self.n))
        out = set()
        for s in self.splits:
            for side in (s, leaves - s):
                if len(side) == 2:
                    out.add(tuple(sorted(side)))
        return sorted(out)

    def cone_ids(self):
        """The two cones ``C_{ab,c}`` and ``C_{de,c}`` realising this tree."""
        if self.n != 5:
            raise ValueError("cones are only defined for five taxa")
        (p, q) = self.cherries()
        lone = (set(range(5)) - set(p) - set(q)).pop()
        return frozenset({ConeId(p, lone), ConeId(q, lone)})

    def newick(self):
        """Canonical Newick text.

        Five taxa use the form ``((a,b),c,(d,e));`` with ``a<b``, ``d<e`` and
        the cherry with the smaller leaf first.  Other sizes are rooted at the
        neighbour of leaf 0 with children ordered by smallest leaf.
        """
        if self.n == 5 and len(self.splits) == 2:
            (a, b), (d, e) = self.cherries()
            c = (set(range(5)) - {a, b, d, e}).pop()
            return f"(({a},{b}),{c},({d},{e}));"
        clusters = sorted(self.splits, key=len, reverse=True)

        def render(members):
            inner = [c for c in clusters if c < members]
            maximal = [c for c in inner if not any(c < o for o in inner)]
            covered = set().union(*maximal) if maximal else set()
            parts = [(min(c), render(c)) for c in maximal]
            parts += [(x, str(x)) for x in members if x not in covered]
            return "(" + ",".join(p for _, p in sorted(parts)) + ")"

        body = render(frozenset(range(self.n)))
        return body + ";"

    def __str__(self):
        return self.newick()


def parse_newick(text):
    """Parse a leaf-labeled Newick string with integer labels.

    Branch lengths and internal labels are accepted and ignored.  Returns
    the nested structure as tuples of ints.
    """
    s = re.sub(r"\s+", "", text).rstrip(";")
    pos = 0

    def node():
        nonlocal pos
        if pos < len(s) and s[pos] == "(":
            pos += 1
            kids = [node()]
            while pos < len(s) and s[pos] == ",":
                pos += 1
                kids.append(node())
            if pos >= len(s) or s[pos] != ")":
                raise ValueError(f"unbalanced parentheses in {text!r}")
            pos += 1
            _skip_label()
            return tuple(kids)
        m = re.match(r"\d+", s[pos:])
        if not m:
            raise ValueError(f"expected a leaf label at position {pos} of {text!r}")
        pos += m.end()
        _skip_label()
        return int(m.group())

    def _skip_label():
        nonlocal pos
        m = re.match(r"[^,():;]*(:[-+0-9.eE]+)?", s[pos:])
        pos += m.end()

    tree = node()
    if pos != len(s):
        raise ValueError(f"trailing text in Newick string {text!r}")
    return tree


def _leaves(node):
    if isinstance(node, int):
        return [node]
    return [x for k in node for x in _leaves(k)]


def topology_from_newick(text):
    tree = parse_newick(text)
    leaves = _leaves(tree)
    n = len(leaves)
    if sorted(leaves) != list(range(n)):
        raise ValueError(f"leaves must be exactly 0..{n - 1}, got {sorted(leaves)}")
    clusters = []

    def walk(node):
        if isinstance(node, int):
            return
        clusters.append(_leaves(node))
        for k in node:
            walk(k)

    walk(tree)
    topo = Topology.from_clusters(n, clusters)
    if len(topo.splits) != n - 3:
        raise ValueError(f"{text!r} is not a fully resolved unrooted tree")
    return topo
