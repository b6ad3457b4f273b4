"""Exact rational helpers: square-root lengths and small dense linear algebra.

Everything here works on ``fractions.Fraction`` so predicates never depend
on floating point rounding.
"""

from __future__ import annotations

import math
from decimal import Decimal, localcontext
from fractions import Fraction
from functools import total_ordering
from typing import Iterable, Sequence

Q = Fraction
Vector = tuple
Matrix = tuple

ZERO = Fraction(0)
ONE = Fraction(1)


def frac(x) -> Fraction:
    """Coerce ints, Fractions and strings like ``"1/2"`` to a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("floats are not accepted as exact coordinates")
    return Fraction(x)


def vec(xs) -> tuple:
    return tuple(frac(x) for x in xs)


def is_perfect_square(q: Fraction) -> bool:
    if q < 0:
        return False
    n, d = q.numerator, q.denominator
    return math.isqrt(n) ** 2 == n and math.isqrt(d) ** 2 == d


def exact_sqrt(q: Fraction) -> Fraction | None:
    if not is_perfect_square(q):
        return None
    return Fraction(math.isqrt(q.numerator), math.isqrt(q.denominator))


@total_ordering
class Length:
    """The non-negative real ``sqrt(sq)`` for a rational ``sq``.

    Comparisons against other lengths and against rationals are exact.
    """

    __slots__ = ("sq",)

    def __init__(self, sq):
        sq = frac(sq)
        if sq < 0:
            raise ValueError("squared length must be non-negative")
        self.sq = sq

    @classmethod
    def of(cls, q) -> "Length":
        q = frac(q)
        if q < 0:
            raise ValueError("length must be non-negative")
        return cls(q * q)

    def _other_sq(self, other):
        if isinstance(other, Length):
            return other.sq
        if isinstance(other, float) and math.isinf(other):
            return None
        other = frac(other)
        if other < 0:
            return -1
        return other * other

    def __eq__(self, other):
        if isinstance(other, float) and math.isinf(other):
            return False
        try:
            o = self._other_sq(other)
        except TypeError:
            return NotImplemented
        return o == self.sq

    def __lt__(self, other):
        o = self._other_sq(other)
        if o is None:
            return True
        return self.sq < o

    def __hash__(self):
        e = exact_sqrt(self.sq)
        return hash(e) if e is not None else hash(("sqrt", self.sq))

    def __float__(self):
        return math.sqrt(self.sq)

    def exact(self) -> Fraction | None:
        """The rational value when ``sq`` is a perfect square, else None."""
        return exact_sqrt(self.sq)

    def is_zero(self) -> bool:
        return self.sq == 0

    def decimal(self, places: int = 15) -> str:
        with localcontext() as ctx:
            ctx.prec = places + 10
            d = (Decimal(self.sq.numerator) / Decimal(self.sq.denominator)).sqrt()
            return str(round(d, places))

    def __repr__(self):
        e = self.exact()
        if e is not None:
            return f"Length({e})"
        return f"Length(sqrt({self.sq}))"


def sqrt_sum_lt(a_sq: Fraction, b_sq: Fraction, r: Fraction) -> bool:
    """Decide ``sqrt(a_sq) + sqrt(b_sq) < r`` exactly."""
    if r <= 0:
        return False
    rhs = r * r - a_sq - b_sq
    if rhs <= 0:
        return False
    return 4 * a_sq * b_sq < rhs * rhs


def sqrt_le_sum(a_sq: Fraction, r: Fraction, b_sq: Fraction) -> bool:
    """Decide ``sqrt(a_sq) <= r + sqrt(b_sq)`` exactly (r >= 0)."""
    # a <= r + b  <=>  a - b <= r
    if a_sq <= b_sq:
        return True
    # a > b >= 0; (a - b) <= r <=> a <= r + b <=> a_sq <= r^2 + b_sq + 2 r b
    lhs = a_sq - r * r - b_sq
    if lhs <= 0:
        return True
    return lhs * lhs <= 4 * r * r * b_sq


def sqrt_lt_sum(c_sq: Fraction, a_sq: Fraction, b_sq: Fraction, allow_equal: bool = False) -> bool:
    """Decide ``sqrt(c_sq) < sqrt(a_sq) + sqrt(b_sq)`` (``<=`` if ``allow_equal``)."""
    lhs = c_sq - a_sq - b_sq
    if lhs < 0:
        return True
    sq, rhs = lhs * lhs, 4 * a_sq * b_sq
    return sq <= rhs if allow_equal else sq < rhs


def length_sum_le(a: Length, b: Length, c: Length) -> bool:
    """Decide ``c <= a + b`` exactly (triangle inequality test)."""
    rhs = c.sq - a.sq - b.sq
    if rhs <= 0:
        return True
    return rhs * rhs <= 4 * a.sq * b.sq


# ---------------------------------------------------------------------------
# linear algebra on tuples of Fractions


def dot(u, v) -> Fraction:
    return sum((a * b for a, b in zip(u, v)), ZERO)


def vadd(u, v):
    return tuple(a + b for a, b in zip(u, v))


def vsub(u, v):
    return tuple(a - b for a, b in zip(u, v))


def vscale(c, u):
    return tuple(c * a for a in u)


def identity(n: int):
    return tuple(tuple(ONE if i == j else ZERO for j in range(n)) for i in range(n))


def matmul(a, b):
    bt = tuple(zip(*b))
    return tuple(tuple(dot(row, col) for col in bt) for row in a)


def matvec(a, v):
    return tuple(dot(row, v) for row in a)


def transpose(a):
    return tuple(tuple(col) for col in zip(*a))


def to_matrix(rows) -> tuple:
    return tuple(tuple(frac(x) for x in row) for row in rows)


def gram_dot(g, u, v) -> Fraction:
    """Inner product ``u^T G v``."""
    return dot(u, matvec(g, v))


def rref(rows: Sequence[Sequence[Fraction]]):
    """Reduced row echelon form; returns (matrix as lists, pivot columns)."""
    m = [list(r) for r in rows]
    if not m:
        return m, []
    ncols = len(m[0])
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        pv = m[r][c]
        m[r] = [x / pv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots


def rank(rows) -> int:
    return len(rref(rows)[1])


def solve_affine(a, b):
    """Solution set of ``a x = b``: (particular solution, nullspace basis) or None."""
    a = [list(r) for r in a]
    if not a:
        raise ValueError("empty system")
    n = len(a[0])
    aug = [r + [bi] for r, bi in zip(a, b)]
    m, pivots = rref(aug)
    if n in pivots:
        return None
    x = [ZERO] * n
    for i, c in enumerate(pivots):
        x[c] = m[i][n]
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        v = [ZERO] * n
        v[f] = ONE
        for i, c in enumerate(pivots):
            v[c] = -m[i][f]
        basis.append(tuple(v))
    return tuple(x), basis


def solve(a, b):
    """Unique solution of a square system, or None if singular."""
    res = solve_affine(a, b)
    if res is None or res[1]:
        return None
    return res[0]


def inverse(a):
    n = len(a)
    m, pivots = rref([list(r) + list(e) for r, e in zip(a, identity(n))])
    if pivots[:n] != list(range(n)):
        raise ValueError("singular matrix")
    return tuple(tuple(row[n:]) for row in m)


def nullspace(a, ncols: int | None = None):
    if not a:
        n = ncols or 0
        return [tuple(ONE if i == j else ZERO for j in range(n)) for i in range(n)]
    return solve_affine(a, [ZERO] * len(a))[1]


def lcm_denominators(v) -> int:
    out = 1
    for x in v:
        out = out * x.denominator // math.gcd(out, x.denominator)
    return out


def primitive_integer(v) -> tuple:
    """Scale a nonzero rational vector to a primitive integer vector (same sign)."""
    if all(x == 0 for x in v):
        raise ValueError("zero vector has no primitive form")
    m = lcm_denominators(v)
    ints = [int(x * m) for x in v]
    g = 0
    for x in ints:
        g = math.gcd(g, abs(x))
    return tuple(Fraction(x // g) for x in ints)


def integer_row_basis(rows) -> list:
    """Basis of the Z-span of rational row vectors (Hermite-style reduction)."""
    rows = [tuple(frac(x) for x in r) for r in rows]
    if not rows:
        return []
    den = 1
    for r in rows:
        den = den * lcm_denominators(r) // math.gcd(den, lcm_denominators(r))
    m = [[int(x * den) for x in r] for r in rows]
    ncols = len(m[0])
    basis = []
    col = 0
    while m and col < ncols:
        nz = [r for r in m if r[col] != 0]
        if not nz:
            col += 1
            continue
        rest = [r for r in m if r[col] == 0]
        # Euclid on the column
        while len(nz) > 1:
            nz.sort(key=lambda r: abs(r[col]))
            piv = nz[0]
            new = [piv]
            for r in nz[1:]:
                q = r[col] // piv[col]
                r2 = [a - q * b for a, b in zip(r, piv)]
                if r2[col] != 0:
                    new.append(r2)
                elif any(r2):
                    rest.append(r2)
            nz = new
        basis.append(nz[0])
        m = rest
        col += 1
    return [tuple(Fraction(x, den) for x in r) for r in basis]


class IntFrame:
    """Rational points scaled to integers by a common denominator.

    ``dist2(X, Y)`` returns the squared distance times ``scale**2 * gram_den``
    as an integer, so comparisons against rational thresholds stay exact.
    """

    def __init__(self, gram, denominators: Iterable[int]):
        den = 1
        for d in denominators:
            den = den * d // math.gcd(den, d)
        self.scale = den
        gd = 1
        for row in gram:
            gd = gd * lcm_denominators(row) // math.gcd(gd, lcm_denominators(row))
        self.gram_den = gd
        self.gram = tuple(tuple(int(x * gd) for x in row) for row in gram)
        self.unit = all(self.gram[i][j] == (gd if i == j else 0) for i in range(len(gram)) for j in range(len(gram)))
        self.factor = den * den * gd

    def point(self, p) -> tuple:
        out = tuple(x * self.scale for x in p)
        if any(x.denominator != 1 for x in out):
            raise ValueError("point is not on the frame's grid")
        return tuple(int(x) for x in out)

    def dist2(self, a, b) -> int:
        d = [x - y for x, y in zip(a, b)]
        if self.unit:
            return self.gram_den * sum(x * x for x in d)
        g = self.gram
        n = len(d)
        return sum(d[i] * g[i][j] * d[j] for i in range(n) for j in range(n))

    def below(self, value: int, q: Fraction, allow_equal: bool = False) -> bool:
        """``value / factor < q`` exactly."""
        lhs = value * q.denominator
        rhs = q.numerator * self.factor
        return lhs <= rhs if allow_equal else lhs < rhs
