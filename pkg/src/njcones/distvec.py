"""Distance matrices as flattened vectors.

A symmetric ``n x n`` matrix with zero diagonal is stored as the row-wise
lower triangle, so ``d[i]`` is ``d_{a,b}`` with ``a > b`` and
``i = a(a-1)/2 + b``.  For ``n = 4``::

    0   d0  d1  d3
    d0  0   d2  d4
    d1  d2  0   d5
    d3  d4  d5  0

Two text formats are supported:

square
    First non-blank line holds ``n``; the next ``n`` lines hold the matrix
    rows, whitespace separated, optionally preceded by a taxon name.

flat
    A header line ``n=<k>`` followed by the ``C(k,2)`` entries, comma
    separated (line breaks allowed).

Integers and ``p/q`` tokens are read as exact rationals; anything else is
parsed as a binary float.
"""

import re
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt

from njcones._exact import to_fraction

SYMMETRY_TOL = 1e-12

_RATIONAL = re.compile(r"^[+-]?\d+(/\d+)?$")


class ParseError(ValueError):
    """Malformed or inconsistent distance-matrix text."""


def num_pairs(n):
    return n * (n - 1) // 2


def index_to_pair(i, n=None):
    """Map a flat index to the pair ``(a, b)`` with ``a > b``.

    >>> index_to_pair(0)
    (1, 0)
    >>> index_to_pair(9, 5)
    (4, 3)
    """
    if i < 0 or (n is not None and i >= num_pairs(n)):
        raise IndexError(f"flat index {i} out of range for n={n}")
    # floor(1/2 + sqrt(1/4 + 2i)) == floor((1 + sqrt(1 + 8i)) / 2)
    a = (1 + isqrt(1 + 8 * i)) // 2
    return a, i - a * (a - 1) // 2


def pair_to_index(a, b, n=None):
    if a == b:
        raise ValueError(f"invalid pair ({a}, {b}): labels must differ")
    a, b = max(a, b), min(a, b)
    if b < 0 or (n is not None and a >= n):
        raise IndexError(f"pair ({a}, {b}) out of range for n={n}")
    return a * (a - 1) // 2 + b


def _normalize(values):
    values = list(values)
    if any(isinstance(v, float) for v in values):
        return tuple(float(v) for v in values)
    return tuple(to_fraction(v) for v in values)


@dataclass(frozen=True)
class DistVector:
    """Flattened symmetric distance matrix over taxa ``0..n-1``.

    Entries are either all exact ``Fraction`` values or all floats: ints
    and Fractions are promoted to Fraction, and a single float in the input
    turns the whole vector into floats.  Use :meth:`exact` for the lossless
    float-to-rational lift.
    """

    n: int
    entries: tuple

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"need at least two taxa, got n={self.n}")
        entries = _normalize(self.entries)
        if len(entries) != num_pairs(self.n):
            raise ValueError(
                f"n={self.n} needs {num_pairs(self.n)} entries, got {len(entries)}"
            )
        object.__setattr__(self, "entries", entries)

    @classmethod
    def from_entries(cls, entries):
        entries = list(entries)
        n = (1 + isqrt(1 + 8 * len(entries))) // 2
        if num_pairs(n) != len(entries):
            raise ValueError(f"{len(entries)} is not a triangular number")
        return cls(n, entries)

    @classmethod
    def from_matrix(cls, matrix, tol=SYMMETRY_TOL):
        rows = [list(r) for r in matrix]
        n = len(rows)
        for a, row in enumerate(rows):
            if len(row) != n:
                raise ParseError(f"row {a} has {len(row)} entries, expected {n}")
        for a in range(n):
            x = rows[a][a]
            if (x != 0) if not isinstance(x, float) else abs(x) > tol:
                raise ParseError(f"nonzero diagonal entry d[{a}][{a}] = {x}")
        entries = []
        for a in range(n):
            for b in range(a):
                x, y = rows[a][b], rows[b][a]
                exact = not (isinstance(x, float) or isinstance(y, float))
                if (x != y) if exact else abs(x - y) > tol:
                    raise ParseError(f"asymmetric entry: d[{a}][{b}] = {x} but d[{b}][{a}] = {y}")
                entries.append(x)
        return cls(n, entries)

    @classmethod
    def zeros(cls, n):
        return cls(n, [0] * num_pairs(n))

    @property
    def m(self):
        return len(self.entries)

    @property
    def is_exact(self):
        return not self.entries or isinstance(self.entries[0], Fraction)

    def exact(self):
        if self.is_exact:
            return self
        return DistVector(self.n, [Fraction(x) for x in self.entries])

    def to_float(self):
        return DistVector(self.n, [float(x) for x in self.entries])

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    @property
    def _zero(self):
        return Fraction(0) if self.is_exact else 0.0

    def get(self, a, b):
        if a == b:
            return self._zero
        return self.entries[pair_to_index(a, b)]

    def to_matrix(self):
        return [[self.get(a, b) for b in range(self.n)] for a in range(self.n)]

    def row_sums(self):
        sums = [self._zero] * self.n
        i = 0
        for a in range(1, self.n):
            for b in range(a):
                x = self.entries[i]
                sums[a] += x
                sums[b] += x
                i += 1
        return sums

    def relabel(self, images):
        """Rename taxon ``a`` to ``images[a]``: result[σa, σb] = self[a, b]."""
        if len(images) != self.n or sorted(images) != list(range(self.n)):
            raise ValueError(f"{images!r} is not a permutation of 0..{self.n - 1}")
        out = [None] * self.m
        i = 0
        for a in range(1, self.n):
            for b in range(a):
                out[pair_to_index(images[a], images[b])] = self.entries[i]
                i += 1
        return DistVector(self.n, out)

    def _check_compatible(self, other):
        if not isinstance(other, DistVector) or other.n != self.n:
            raise ValueError("distance vectors must have the same number of taxa")

    def __add__(self, other):
        self._check_compatible(other)
        return DistVector(self.n, [x + y for x, y in zip(self.entries, other.entries)])

    def __sub__(self, other):
        self._check_compatible(other)
        return DistVector(self.n, [x - y for x, y in zip(self.entries, other.entries)])

    def __neg__(self):
        return DistVector(self.n, [-x for x in self.entries])

    def __mul__(self, scalar):
        return DistVector(self.n, [scalar * x for x in self.entries])

    __rmul__ = __mul__

    def dot(self, other):
        return sum(x * y for x, y in zip(self.entries, other))


def _parse_token(tok, where):
    if _RATIONAL.match(tok):
        try:
            return Fraction(tok)
        except ZeroDivisionError:
            raise ParseError(f"zero denominator in {tok!r} at {where}") from None
    try:
        return float(tok)
    except ValueError:
        raise ParseError(f"cannot parse {tok!r} at {where}") from None


def _parse_n(tok, where):
    try:
        n = int(tok)
    except ValueError:
        raise ParseError(f"expected taxon count at {where}, got {tok!r}") from None
    if n < 2:
        raise ParseError(f"taxon count must be at least 2, got {n}")
    return n


def read_distance_matrix(text, n=None, return_names=False):
    """Parse square (PHYLIP-like) or flat CSV text into a :class:`DistVector`.

    ``n`` may be passed for a bare flat vector without an ``n=`` header.
    With ``return_names=True`` the optional row names of the square format
    are returned as well (``None`` when absent).
    """
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise ParseError("empty input")
    names = None
    head = lines[0].replace(" ", "")
    if head.lower().startswith("n="):
        n = _parse_n(head[2:], "header")
        d = _read_flat(",".join(lines[1:]), n)
    elif "," in lines[0] or (n is not None and len(lines[0].split()) != 1):
        if n is None:
            raise ParseError("flat vector needs a header 'n=<k>' or an explicit n")
        d = _read_flat(",".join(lines), n)
    else:
        d, names = _read_square(lines)
    return (d, names) if return_names else d


def _read_flat(body, n):
    toks = [t.strip() for t in body.split(",") if t.strip()]
    if len(toks) != num_pairs(n):
        raise ParseError(f"n={n} needs {num_pairs(n)} entries, got {len(toks)}")
    return DistVector(n, [_parse_token(t, f"entry {i}") for i, t in enumerate(toks)])


def _read_square(lines):
    n = _parse_n(lines[0].split()[0], "line 1")
    rows = lines[1:]
    if len(rows) != n:
        raise ParseError(f"expected {n} matrix rows, got {len(rows)}")
    matrix, names = [], []
    for a, line in enumerate(rows):
        toks = line.split()
        if len(toks) == n + 1:
            names.append(toks[0])
            toks = toks[1:]
        elif len(toks) != n:
            raise ParseError(f"row {a} has {len(toks)} entries, expected {n}")
        matrix.append([_parse_token(t, f"row {a}, column {b}") for b, t in enumerate(toks)])
    if names and len(names) != n:
        raise ParseError("taxon names must be given on every row or on none")
    return DistVector.from_matrix(matrix), (tuple(names) if names else None)


def format_value(x):
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return repr(float(x))


def format_square(d, names=None):
    cells = [[format_value(x) for x in row] for row in d.to_matrix()]
    out = [str(d.n)]
    for a, row in enumerate(cells):
        prefix = [names[a]] if names else []
        out.append(" ".join(prefix + row))
    return "\n".join(out) + "\n"


def format_flat(d):
    return f"n={d.n}\n" + ",".join(format_value(x) for x in d.entries) + "\n"
