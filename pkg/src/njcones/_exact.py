"""Small exact linear-algebra kernel over the rationals.

Everything here works on plain Python lists of ``Fraction`` (or ``int``)
values.  The matrices that show up in this package are tiny (at most
10 x 10), so clarity wins over speed.
"""

from fractions import Fraction
from math import gcd
from numbers import Rational


def to_fraction(x):
    """Lossless conversion of an int, float, Fraction or rational string."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, float):
        # Fraction(float) is exact: it recovers the binary value bit for bit
        return Fraction(x)
    return Fraction(str(x))


def dot(u, v):
    return sum(a * b for a, b in zip(u, v))


def matvec(M, v):
    return [dot(row, v) for row in M]


def matmul(A, B):
    cols = list(zip(*B))
    return [[dot(row, col) for col in cols] for row in A]


def transpose(M):
    return [list(col) for col in zip(*M)]


def rref(rows):
    """Reduced row echelon form.

    Returns ``(R, pivots)`` where ``R`` is a new list of Fraction rows and
    ``pivots`` lists the pivot column of each nonzero row.
    """
    R = [[Fraction(x) for x in row] for row in rows]
    if not R:
        return R, []
    nrows, ncols = len(R), len(R[0])
    pivots = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        p = next((i for i in range(r, nrows) if R[i][c] != 0), None)
        if p is None:
            continue
        R[r], R[p] = R[p], R[r]
        inv = 1 / R[r][c]
        R[r] = [x * inv for x in R[r]]
        for i in range(nrows):
            if i != r and R[i][c] != 0:
                f = R[i][c]
                R[i] = [x - f * y for x, y in zip(R[i], R[r])]
        pivots.append(c)
        r += 1
    return R[:r], pivots


def rank(rows):
    return len(rref(rows)[1])


def nullspace(rows, ncols=None):
    """Basis of ``{x : rows @ x = 0}`` as a list of Fraction vectors."""
    if not rows:
        if ncols is None:
            raise ValueError("ncols required for an empty matrix")
        return [[Fraction(int(i == j)) for j in range(ncols)] for i in range(ncols)]
    ncols = len(rows[0])
    R, pivots = rref(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for row, p in zip(R, pivots):
            x[p] = -row[f]
        basis.append(x)
    return basis


def inverse(M):
    n = len(M)
    aug = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(M)]
    R, pivots = rref(aug)
    if pivots[:n] != list(range(n)) or len(pivots) < n:
        raise ZeroDivisionError("matrix is singular")
    return [row[n:] for row in R]


def solve(A, b):
    """Solve the square system ``A x = b`` exactly."""
    n = len(A)
    aug = [list(row) + [bi] for row, bi in zip(A, b)]
    R, pivots = rref(aug)
    if pivots != list(range(n)):
        raise ZeroDivisionError("matrix is singular")
    return [row[n] for row in R]


def primitive(vec):
    """Scale a rational vector by a positive factor to coprime integers."""
    fr = [to_fraction(x) for x in vec]
    den = 1
    for x in fr:
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(x * den) for x in fr]
    g = 0
    for x in ints:
        g = gcd(g, x)
    if g == 0:
        raise ValueError("zero vector has no primitive representative")
    return tuple(x // g for x in ints)


def integer_direction(vec):
    """Positive integer multiple of a rational vector (not reduced)."""
    fr = [to_fraction(x) for x in vec]
    den = 1
    for x in fr:
        den = den * x.denominator // gcd(den, x.denominator)
    return [int(x * den) for x in fr]
