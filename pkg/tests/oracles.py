"""Independent oracles used to freeze expected values in the test suite.

Each routine recomputes a quantity along a different code path than the
library: ranks by minor expansion, roots by brute scan, jets by building
derivative polynomials symbolically.  Nothing here imports library
elimination or jet internals.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations

from terracini.algebra import FieldSpec, MultiPoly, Scalar


def det_cofactor(rows):
    """Determinant by recursive cofactor expansion (exact, any field kind)."""
    n = len(rows)
    if n == 1:
        return rows[0][0]
    total = None
    for j in range(n):
        if rows[0][j] == 0:
            continue
        minor = [[row[k] for k in range(n) if k != j] for row in rows[1:]]
        term = rows[0][j] * det_cofactor(minor)
        if j % 2:
            term = -term
        total = term if total is None else total + term
    if total is None:
        return rows[0][0] - rows[0][0]  # a zero of the right type
    return total


def rank_by_minors(rows) -> int:
    """Largest size of a nonvanishing square minor.  Exponential, tiny inputs only."""
    nrows = len(rows)
    ncols = len(rows[0]) if nrows else 0
    for size in range(min(nrows, ncols), 0, -1):
        for ris in combinations(range(nrows), size):
            for cis in combinations(range(ncols), size):
                sub = [[rows[i][j] for j in cis] for i in ris]
                if det_cofactor(sub) != 0:
                    return size
    return 0


def rank_by_reverse_echelon(rows: list[list[int]], p: int) -> int:
    """Row echelon rank mod p, pivoting from the last column backwards.

    A deliberately different pivot order from the library's elimination so
    the two implementations cannot share a bug through copied structure.
    """
    m = [[x % p for x in row] for row in rows]
    nrows = len(m)
    ncols = len(m[0]) if nrows else 0
    rank = 0
    for c in range(ncols - 1, -1, -1):
        pivot = None
        for i in range(nrows - 1, rank - 1, -1):
            if m[i][c]:
                pivot = i
                break
        if pivot is None:
            continue
        m[pivot], m[rank] = m[rank], m[pivot]
        inv = pow(m[rank][c], p - 2, p)
        m[rank] = [(x * inv) % p for x in m[rank]]
        for i in range(nrows):
            if i != rank and m[i][c]:
                f = m[i][c]
                m[i] = [(a - f * b) % p for a, b in zip(m[i], m[rank])]
        rank += 1
        if rank == nrows:
            break
    return rank


def roots_by_scan(f: MultiPoly, field: FieldSpec) -> frozenset[Scalar]:
    """Every root of a univariate polynomial by testing all p field elements."""
    assert f.nvars == 1
    out = set()
    for v in range(field.modulus):
        x = field.scalar(v)
        if f.evaluate((x,)).value == 0:
            out.add(x)
    return frozenset(out)


def jet_by_symbolic_diff(f: MultiPoly, point):
    """(value, gradient, hessian) via explicit derivative polynomials."""
    n = f.nvars
    value = f.evaluate(point)
    firsts = [f.diff(i) for i in range(n)]
    grad = tuple(g.evaluate(point) for g in firsts)
    hess = tuple(
        tuple(firsts[i].diff(j).evaluate(point) for j in range(n)) for i in range(n)
    )
    return value, grad, hess


def random_fraction_matrix(rng, rows: int, cols: int, rank_target: int | None = None):
    """Plain random Fraction matrix; optionally a product forcing low rank."""
    if rank_target is None:
        return [
            [Fraction(rng.randrange(-9, 10), rng.randrange(1, 7)) for _ in range(cols)]
            for _ in range(rows)
        ]
    left = [[Fraction(rng.randrange(-9, 10)) for _ in range(rank_target)] for _ in range(rows)]
    right = [[Fraction(rng.randrange(-9, 10)) for _ in range(cols)] for _ in range(rank_target)]
    return [
        [sum(left[i][k] * right[k][j] for k in range(rank_target)) for j in range(cols)]
        for i in range(rows)
    ]


def fermat_cubic_points(p: int) -> set[tuple[int, int, int]]:
    """All projective points of u^3 + v^3 + w^3 = 0 over F_p by brute scan.

    Points come back normalized: last nonzero coordinate equals 1.
    """
    pts: set[tuple[int, int, int]] = set()
    for u in range(p):
        cu = pow(u, 3, p)
        for v in range(p):
            if (cu + pow(v, 3, p) + 1) % p == 0:
                pts.add((u, v, 1))
    for u in range(p):
        if (pow(u, 3, p) + 1) % p == 0:
            pts.add((u, 1, 0))
    if (1 + 0 + 0) % p == 0:  # pragma: no cover - impossible for p > 1
        pts.add((1, 0, 0))
    return pts


def double_point_condition_nullity(d: int, points, p: int) -> int:
    """Dimension of degree-d plane forms singular at all given points.

    Built straight from partial-derivative conditions on raw coefficients,
    one row per point per variable, nothing shared with the library's jet
    machinery.
    """
    import itertools

    monos = [e for e in itertools.product(range(d + 1), repeat=3) if sum(e) == d]
    rows = []
    for a, b, c in points:
        for var in range(3):
            row = []
            for e in monos:
                if e[var] == 0:
                    row.append(0)
                    continue
                ee = list(e)
                ee[var] -= 1
                row.append(
                    e[var]
                    * pow(a, ee[0], p)
                    * pow(b, ee[1], p)
                    * pow(c, ee[2], p)
                    % p
                )
            rows.append(row)
    return len(monos) - rank_by_reverse_echelon(rows, p)
