"""Exact arithmetic substrate: fields, matrices, sparse polynomials, 2-jets.

Everything in this module is exact.  Prime-field scalars are Python ints in
``[0, p)``, rational scalars are ``fractions.Fraction``; no floating point
appears anywhere.  Matrices are dense row-major and small (ambient dimensions
stay below ~125), so elimination costs are negligible and clarity wins over
cleverness.

Rank computation is the one place the two field kinds diverge: prime fields
use plain Gaussian elimination, rationals use fraction-free Bareiss
elimination on a denominator-cleared integer matrix to avoid coefficient
blowup inside the loop.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import FieldMismatchError, ConstructionError

__all__ = [
    "FieldSpec",
    "Scalar",
    "Matrix",
    "MultiPoly",
    "Jet2",
    "exact_rank",
    "subspace_intersect",
    "jet2_eval",
    "uni_roots_mod_p",
    "is_prime",
    "dot",
    "normalize_point",
    "RATIONALS",
    "PRIME",
]

RATIONALS = "rationals"
PRIME = "prime"

# Witness set is deterministic for every n < 3.3 * 10^24, far above any
# modulus this package accepts.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)

_MIN_MODULUS = 257


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin for the modulus range used here."""
    if n < 2:
        return False
    for small in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n == small:
            return True
        if n % small == 0:
            return False
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class FieldSpec:
    """Selects the working field: exact rationals or a prime field F_p.

    The modulus must be a verified prime of at least 257; small
    characteristics would collide with the degrees (up to 6) handled by the
    geometry layers.
    """

    kind: str
    modulus: int | None = None

    def __post_init__(self) -> None:
        if self.kind == RATIONALS:
            if self.modulus is not None:
                raise ConstructionError("rationals take no modulus")
        elif self.kind == PRIME:
            if not isinstance(self.modulus, int) or self.modulus < _MIN_MODULUS:
                raise ConstructionError(
                    f"modulus must be an int >= {_MIN_MODULUS}, got {self.modulus!r}"
                )
            if not is_prime(self.modulus):
                raise ConstructionError(f"modulus {self.modulus} is not prime")
        else:
            raise ConstructionError(f"unknown field kind {self.kind!r}")

    @staticmethod
    def rationals() -> "FieldSpec":
        return FieldSpec(RATIONALS)

    @staticmethod
    def prime(p: int) -> "FieldSpec":
        return FieldSpec(PRIME, p)

    def scalar(self, value) -> "Scalar":
        """Coerce an int (or Fraction over the rationals) into this field."""
        if self.kind == PRIME:
            if isinstance(value, Scalar):
                value = value.lift()
            if not isinstance(value, int):
                raise ConstructionError(f"prime field wants ints, got {value!r}")
            return Scalar(self, value % self.modulus)
        if isinstance(value, Scalar):
            value = value.value
        return Scalar(self, Fraction(value))

    @property
    def zero(self) -> "Scalar":
        return self.scalar(0)

    @property
    def one(self) -> "Scalar":
        return self.scalar(1)

    def random_scalar(self, rng: random.Random) -> "Scalar":
        if self.kind == PRIME:
            return Scalar(self, rng.randrange(self.modulus))
        return Scalar(self, Fraction(rng.randrange(-999, 1000), rng.randrange(1, 50)))

    def random_nonzero(self, rng: random.Random) -> "Scalar":
        while True:
            s = self.random_scalar(rng)
            if s.value != 0:
                return s


class Scalar:
    """One field element.  Immutable; arithmetic checks field compatibility."""

    __slots__ = ("field", "value")

    def __init__(self, field: FieldSpec, value) -> None:
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "value", value)

    def __setattr__(self, name, val):  # pragma: no cover - guard
        raise AttributeError("Scalar is immutable")

    def _coerce(self, other) -> "Scalar":
        if isinstance(other, Scalar):
            if other.field != self.field:
                raise FieldMismatchError(f"{self.field} vs {other.field}")
            return other
        if isinstance(other, int):
            return self.field.scalar(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.field.kind == PRIME:
            return Scalar(self.field, (self.value + other.value) % self.field.modulus)
        return Scalar(self.field, self.value + other.value)

    __radd__ = __add__

    def __neg__(self):
        if self.field.kind == PRIME:
            return Scalar(self.field, (-self.value) % self.field.modulus)
        return Scalar(self.field, -self.value)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.field.kind == PRIME:
            return Scalar(self.field, (self.value * other.value) % self.field.modulus)
        return Scalar(self.field, self.value * other.value)

    __rmul__ = __mul__

    def inverse(self) -> "Scalar":
        if self.value == 0:
            raise ZeroDivisionError("inverse of zero")
        if self.field.kind == PRIME:
            return Scalar(self.field, pow(self.value, self.field.modulus - 2, self.field.modulus))
        return Scalar(self.field, 1 / self.value)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other * self.inverse()

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.field.scalar(other)
        if not isinstance(other, Scalar):
            return NotImplemented
        return self.field == other.field and self.value == other.value

    def __hash__(self):
        return hash((self.field, self.value))

    def __bool__(self):
        return self.value != 0

    def lift(self) -> int:
        """Canonical integer representative (prime fields only)."""
        if self.field.kind != PRIME:
            raise ConstructionError("lift is defined over prime fields")
        return self.value

    def __repr__(self):
        return f"Scalar({self.value!r})"


def dot(u: Sequence[Scalar], v: Sequence[Scalar]) -> Scalar:
    """Exact inner product of two equal-length scalar vectors."""
    if len(u) != len(v):
        raise ConstructionError(f"length mismatch {len(u)} vs {len(v)}")
    acc = u[0].field.zero
    for a, b in zip(u, v):
        acc = acc + a * b
    return acc


def normalize_point(vec: Sequence[Scalar]) -> tuple[Scalar, ...]:
    """Scale a nonzero vector so its last nonzero coordinate is 1.

    This is the canonical representative used for projective point identity
    everywhere in the package (witness dedup, fiber counting).
    """
    last = None
    for i in range(len(vec) - 1, -1, -1):
        if vec[i].value != 0:
            last = i
            break
    if last is None:
        raise ConstructionError("cannot normalize the zero vector")
    inv = vec[last].inverse()
    return tuple(x * inv for x in vec)


class Matrix:
    """Dense exact matrix, row-major, immutable after construction."""

    __slots__ = ("field", "entries", "_rank")

    def __init__(self, field: FieldSpec, entries: Sequence[Sequence[Scalar]]) -> None:
        rows = tuple(tuple(row) for row in entries)
        width = len(rows[0]) if rows else 0
        for row in rows:
            if len(row) != width:
                raise ConstructionError("ragged rows")
            for x in row:
                if x.field != field:
                    raise FieldMismatchError("entry field differs from matrix field")
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "entries", rows)
        object.__setattr__(self, "_rank", None)

    def __setattr__(self, name, val):  # pragma: no cover - guard
        raise AttributeError("Matrix is immutable")

    # -- constructors -------------------------------------------------

    @classmethod
    def from_rows(cls, field: FieldSpec, rows: Sequence[Sequence]) -> "Matrix":
        return cls(field, [[field.scalar(x) for x in row] for row in rows])

    @classmethod
    def from_columns(cls, field: FieldSpec, cols: Sequence[Sequence[Scalar]]) -> "Matrix":
        if not cols:
            return cls(field, [])
        height = len(cols[0])
        return cls(field, [[cols[j][i] for j in range(len(cols))] for i in range(height)])

    @classmethod
    def identity(cls, field: FieldSpec, n: int) -> "Matrix":
        one, zero = field.one, field.zero
        return cls(field, [[one if i == j else zero for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, field: FieldSpec, rows: int, cols: int) -> "Matrix":
        zero = field.zero
        return cls(field, [[zero] * cols for _ in range(rows)])

    @classmethod
    def hstack(cls, mats: Sequence["Matrix"]) -> "Matrix":
        mats = [m for m in mats if m.cols > 0]
        if not mats:
            raise ConstructionError("hstack of nothing")
        field = mats[0].field
        height = mats[0].rows
        for m in mats:
            if m.field != field:
                raise FieldMismatchError("hstack across fields")
            if m.rows != height:
                raise ConstructionError("hstack height mismatch")
        return cls(field, [sum((list(m.entries[i]) for m in mats), []) for i in range(height)])

    # -- shape ---------------------------------------------------------

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0]) if self.entries else 0

    def __getitem__(self, ij) -> Scalar:
        i, j = ij
        return self.entries[i][j]

    def row(self, i: int) -> tuple[Scalar, ...]:
        return self.entries[i]

    def column(self, j: int) -> tuple[Scalar, ...]:
        return tuple(row[j] for row in self.entries)

    def columns(self) -> list[tuple[Scalar, ...]]:
        return [self.column(j) for j in range(self.cols)]

    def transpose(self) -> "Matrix":
        return Matrix(self.field, [self.column(j) for j in range(self.cols)])

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.field == other.field and self.entries == other.entries

    def __hash__(self):
        return hash((self.field, self.entries))

    def __repr__(self):
        return f"Matrix({self.rows}x{self.cols})"

    # -- arithmetic ----------------------------------------------------

    def matvec(self, v: Sequence[Scalar]) -> tuple[Scalar, ...]:
        if len(v) != self.cols:
            raise ConstructionError("matvec shape mismatch")
        return tuple(dot(row, v) for row in self.entries)

    def matmul(self, other: "Matrix") -> "Matrix":
        if self.field != other.field:
            raise FieldMismatchError("matmul across fields")
        if self.cols != other.rows:
            raise ConstructionError("matmul shape mismatch")
        cols = other.columns()
        return Matrix(self.field, [[dot(row, c) for c in cols] for row in self.entries])

    # -- elimination ---------------------------------------------------

    def rref(self) -> tuple[list[list[Scalar]], list[int]]:
        """Reduced row echelon form and pivot column indices.

        Runs over either field with exact division; used for kernels and
        pivot bookkeeping, not for rank over the rationals (see rank()).
        """
        m = [list(row) for row in self.entries]
        nrows, ncols = self.rows, self.cols
        pivots: list[int] = []
        r = 0
        for c in range(ncols):
            pivot_row = None
            for i in range(r, nrows):
                if m[i][c].value != 0:
                    pivot_row = i
                    break
            if pivot_row is None:
                continue
            m[r], m[pivot_row] = m[pivot_row], m[r]
            inv = m[r][c].inverse()
            m[r] = [x * inv for x in m[r]]
            for i in range(nrows):
                if i != r and m[i][c].value != 0:
                    f = m[i][c]
                    m[i] = [a - f * b for a, b in zip(m[i], m[r])]
            pivots.append(c)
            r += 1
            if r == nrows:
                break
        return m, pivots

    def rank(self) -> int:
        """Exact rank.  Bareiss over the rationals, Gauss over prime fields."""
        if self._rank is not None:
            return self._rank
        if self.rows == 0 or self.cols == 0:
            rk = 0
        elif self.field.kind == PRIME:
            rk = _rank_mod_p(
                [[x.value for x in row] for row in self.entries], self.field.modulus
            )
        else:
            rk = _rank_bareiss([[x.value for x in row] for row in self.entries])
        object.__setattr__(self, "_rank", rk)
        return rk

    def null_space(self) -> "Matrix":
        """Matrix whose columns are a basis of the right kernel.

        A trivial kernel yields a matrix with zero columns (rows x 0).
        """
        if self.cols == 0:
            return Matrix(self.field, [[] for _ in range(0)])
        rref, pivots = self.rref()
        free = [c for c in range(self.cols) if c not in pivots]
        zero, one = self.field.zero, self.field.one
        cols = []
        for f in free:
            v = [zero] * self.cols
            v[f] = one
            for r, p in enumerate(pivots):
                v[p] = -rref[r][f]
            cols.append(tuple(v))
        if not cols:
            return Matrix(self.field, [[] for _ in range(self.cols)])
        return Matrix.from_columns(self.field, cols)

    def column_basis(self) -> "Matrix":
        """Submatrix keeping one column per pivot, spanning the column space."""
        _, pivots = self.rref()
        if not pivots:
            return Matrix(self.field, [[] for _ in range(self.rows)])
        return Matrix.from_columns(self.field, [self.column(j) for j in pivots])


def _rank_mod_p(rows: list[list[int]], p: int) -> int:
    """Gaussian elimination on raw int rows, mod p."""
    nrows, ncols = len(rows), len(rows[0])
    rank = 0
    for c in range(ncols):
        pivot = None
        for i in range(rank, nrows):
            if rows[i][c] % p != 0:
                pivot = i
                break
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        inv = pow(rows[rank][c], p - 2, p)
        rows[rank] = [(x * inv) % p for x in rows[rank]]
        for i in range(nrows):
            if i != rank and rows[i][c] % p != 0:
                f = rows[i][c]
                rows[i] = [(a - f * b) % p for a, b in zip(rows[i], rows[rank])]
        rank += 1
        if rank == nrows:
            break
    return rank


def _rank_bareiss(rows: list[list]) -> int:
    """Fraction-free Bareiss elimination after clearing denominators.

    Each input row is scaled by the lcm of its denominators (row scaling
    preserves rank), then the classic two-step Bareiss update keeps every
    intermediate value an integer.
    """
    cleared: list[list[int]] = []
    for row in rows:
        denom_lcm = 1
        for x in row:
            if isinstance(x, Fraction):
                d = x.denominator
                g = _gcd(denom_lcm, d)
                denom_lcm = denom_lcm // g * d
        cleared.append([int(x * denom_lcm) for x in row])
    m = cleared
    nrows, ncols = len(m), len(m[0])
    rank = 0
    prev = 1
    for c in range(ncols):
        pivot = None
        for i in range(rank, nrows):
            if m[i][c] != 0:
                pivot = i
                break
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        pv = m[rank][c]
        for i in range(rank + 1, nrows):
            f = m[i][c]
            m[i] = [(pv * a - f * b) // prev for a, b in zip(m[i], m[rank])]
        prev = pv
        rank += 1
        if rank == nrows:
            break
    return rank


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return abs(a)


def exact_rank(m: Matrix) -> int:
    """Rank of an exact matrix.  Thin wrapper kept as the public entry point."""
    return m.rank()


def subspace_intersect(a: Matrix, b: Matrix) -> Matrix:
    """Basis matrix for the intersection of two column spans.

    Columns of the result are independent and satisfy the rank identity
    rank(result) = rank(a) + rank(b) - rank([a | b]).
    """
    if a.field != b.field:
        raise FieldMismatchError("subspace_intersect across fields")
    if a.rows != b.rows:
        raise ConstructionError("ambient dimension mismatch")
    a = a.column_basis()
    b = b.column_basis()
    if a.cols == 0 or b.cols == 0:
        return Matrix(a.field, [[] for _ in range(a.rows)])
    stacked = Matrix.hstack([a, b])
    kernel = stacked.null_space()
    if kernel.cols == 0:
        return Matrix(a.field, [[] for _ in range(a.rows)])
    cols = []
    for j in range(kernel.cols):
        coeffs = kernel.column(j)[: a.cols]
        cols.append(a.matvec(coeffs))
    return Matrix.from_columns(a.field, cols)


# ---------------------------------------------------------------------------
# sparse multivariate polynomials
# ---------------------------------------------------------------------------


def _grlex_key(expo: tuple[int, ...]) -> tuple:
    # graded order first, then lexicographic on exponents
    return (sum(expo), expo)


class MultiPoly:
    """Sparse multivariate polynomial over one FieldSpec.

    Terms map exponent tuples to nonzero coefficients; zero coefficients are
    never stored, so structural equality is semantic equality.  Printing and
    serialization iterate terms in graded-lex order for determinism.
    """

    __slots__ = ("field", "nvars", "terms")

    def __init__(self, field: FieldSpec, nvars: int, terms: dict[tuple[int, ...], Scalar]) -> None:
        clean: dict[tuple[int, ...], Scalar] = {}
        for expo, coef in terms.items():
            if len(expo) != nvars:
                raise ConstructionError(f"exponent arity {len(expo)} != nvars {nvars}")
            if any(e < 0 for e in expo):
                raise ConstructionError("negative exponent")
            if coef.field != field:
                raise FieldMismatchError("coefficient field differs")
            if coef.value != 0:
                clean[tuple(expo)] = coef
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "nvars", nvars)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, val):  # pragma: no cover - guard
        raise AttributeError("MultiPoly is immutable")

    # -- constructors ---------------------------------------------------

    @classmethod
    def zero(cls, field: FieldSpec, nvars: int) -> "MultiPoly":
        return cls(field, nvars, {})

    @classmethod
    def constant(cls, field: FieldSpec, nvars: int, value) -> "MultiPoly":
        return cls(field, nvars, {(0,) * nvars: field.scalar(value)})

    @classmethod
    def variable(cls, field: FieldSpec, nvars: int, index: int) -> "MultiPoly":
        expo = [0] * nvars
        expo[index] = 1
        return cls(field, nvars, {tuple(expo): field.one})

    @classmethod
    def monomial(cls, field: FieldSpec, expo: Sequence[int], coef=1) -> "MultiPoly":
        return cls(field, len(expo), {tuple(expo): field.scalar(coef)})

    @classmethod
    def from_int_terms(cls, field: FieldSpec, nvars: int, terms: Iterable[tuple[int, Sequence[int]]]) -> "MultiPoly":
        """Build from (coefficient, exponents) pairs with integer data."""
        out = cls.zero(field, nvars)
        for coef, expo in terms:
            out = out + cls.monomial(field, tuple(expo), coef)
        return out

    # -- predicates -----------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def total_degree(self) -> int:
        """Degree of the zero polynomial is -1 by convention here."""
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def is_homogeneous(self) -> bool:
        degs = {sum(e) for e in self.terms}
        return len(degs) <= 1

    def support(self) -> frozenset[int]:
        """Variable indices that actually occur."""
        used = set()
        for expo in self.terms:
            for i, e in enumerate(expo):
                if e:
                    used.add(i)
        return frozenset(used)

    # -- ring operations --------------------------------------------------

    def _check(self, other: "MultiPoly") -> None:
        if self.field != other.field:
            raise FieldMismatchError("mixed fields")
        if self.nvars != other.nvars:
            raise ConstructionError("mixed variable counts")

    def __add__(self, other) -> "MultiPoly":
        if isinstance(other, (Scalar, int)):
            other = MultiPoly.constant(self.field, self.nvars, other)
        self._check(other)
        acc = dict(self.terms)
        for expo, coef in other.terms.items():
            cur = acc.get(expo)
            acc[expo] = coef if cur is None else cur + coef
        return MultiPoly(self.field, self.nvars, acc)

    def __neg__(self) -> "MultiPoly":
        return MultiPoly(self.field, self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "MultiPoly":
        if isinstance(other, (Scalar, int)):
            other = MultiPoly.constant(self.field, self.nvars, other)
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (Scalar, int)):
            s = self.field.scalar(other) if isinstance(other, int) else other
            if s.field != self.field:
                raise FieldMismatchError("scalar field differs")
            return MultiPoly(self.field, self.nvars, {e: c * s for e, c in self.terms.items()})
        self._check(other)
        acc: dict[tuple[int, ...], Scalar] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                expo = tuple(a + b for a, b in zip(e1, e2))
                prod = c1 * c2
                cur = acc.get(expo)
                acc[expo] = prod if cur is None else cur + prod
        return MultiPoly(self.field, self.nvars, acc)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "MultiPoly":
        if n < 0:
            raise ConstructionError("negative power")
        out = MultiPoly.constant(self.field, self.nvars, 1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return (
            self.field == other.field
            and self.nvars == other.nvars
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.field, self.nvars, tuple(sorted(self.terms.items(), key=lambda t: _grlex_key(t[0])))))

    # -- calculus ---------------------------------------------------------

    def diff(self, index: int) -> "MultiPoly":
        acc: dict[tuple[int, ...], Scalar] = {}
        for expo, coef in self.terms.items():
            e = expo[index]
            if e == 0:
                continue
            reduced = list(expo)
            reduced[index] = e - 1
            key = tuple(reduced)
            contrib = coef * e
            cur = acc.get(key)
            acc[key] = contrib if cur is None else cur + contrib
        return MultiPoly(self.field, self.nvars, acc)

    def evaluate(self, point: Sequence[Scalar]) -> Scalar:
        if len(point) != self.nvars:
            raise ConstructionError("point arity mismatch")
        powers = _power_table(point, self.terms)
        acc = self.field.zero
        for expo, coef in self.terms.items():
            term = coef
            for i, e in enumerate(expo):
                if e:
                    term = term * powers[i][e]
            acc = acc + term
        return acc

    def compose(self, args: Sequence["MultiPoly"]) -> "MultiPoly":
        """Substitute args[i] for variable i.  All args share one arity."""
        if len(args) != self.nvars:
            raise ConstructionError("compose arity mismatch")
        if not args:
            raise ConstructionError("compose needs at least one variable")
        target_nvars = args[0].nvars
        for g in args:
            if g.nvars != target_nvars or g.field != self.field:
                raise ConstructionError("compose arguments disagree")
        pow_cache: list[dict[int, MultiPoly]] = [
            {0: MultiPoly.constant(self.field, target_nvars, 1)} for _ in args
        ]

        def arg_power(i: int, e: int) -> MultiPoly:
            cache = pow_cache[i]
            if e not in cache:
                cache[e] = arg_power(i, e - 1) * args[i]
            return cache[e]

        out = MultiPoly.zero(self.field, target_nvars)
        for expo, coef in self.terms.items():
            term = MultiPoly.constant(self.field, target_nvars, 1) * coef
            for i, e in enumerate(expo):
                if e:
                    term = term * arg_power(i, e)
            out = out + term
        return out

    def sorted_terms(self) -> list[tuple[tuple[int, ...], Scalar]]:
        return sorted(self.terms.items(), key=lambda t: _grlex_key(t[0]), reverse=True)

    def __repr__(self):
        if not self.terms:
            return "MultiPoly(0)"
        bits = []
        for expo, coef in self.sorted_terms():
            mono = "*".join(
                f"x{i}^{e}" if e > 1 else f"x{i}" for i, e in enumerate(expo) if e
            )
            bits.append(f"{coef.value}{'*' + mono if mono else ''}")
        return "MultiPoly(" + " + ".join(bits) + ")"


def _power_table(point: Sequence[Scalar], terms: dict) -> list[list[Scalar]]:
    """powers[i][e] = point[i]**e, built once per evaluation."""
    if not terms:
        return []
    nvars = len(point)
    max_e = [0] * nvars
    for expo in terms:
        for i, e in enumerate(expo):
            if e > max_e[i]:
                max_e[i] = e
    table = []
    for i in range(nvars):
        row = [point[i].field.one]
        for _ in range(max_e[i]):
            row.append(row[-1] * point[i])
        table.append(row)
    return table


# ---------------------------------------------------------------------------
# 2-jets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Jet2:
    """Value, gradient, and symmetric Hessian of a function at one point."""

    value: Scalar
    gradient: tuple[Scalar, ...]
    hessian: tuple[tuple[Scalar, ...], ...]

    def __post_init__(self) -> None:
        n = len(self.gradient)
        if len(self.hessian) != n or any(len(row) != n for row in self.hessian):
            raise ConstructionError("hessian shape mismatch")
        for i in range(n):
            for j in range(i + 1, n):
                if self.hessian[i][j] != self.hessian[j][i]:
                    raise ConstructionError("hessian not symmetric")

    @property
    def dim(self) -> int:
        return len(self.gradient)

    def gradient_is_zero(self) -> bool:
        return all(g.value == 0 for g in self.gradient)

    def hessian_matrix(self, field: FieldSpec) -> Matrix:
        return Matrix(field, self.hessian)


def jet2_eval(f: MultiPoly, point: Sequence[Scalar]) -> Jet2:
    """Exact 2-jet of f at point by term-wise exponent bookkeeping.

    The Hessian of any polynomial of total degree <= 1 comes out identically
    zero, and mixed partials land in both (i, j) and (j, i) slots so the
    result is exactly symmetric by construction.
    """
    if len(point) != f.nvars:
        raise ConstructionError("point arity mismatch")
    field = f.field
    n = f.nvars
    powers = _power_table(point, f.terms)

    def mono(expo: Sequence[int]) -> Scalar:
        acc = field.one
        for i, e in enumerate(expo):
            if e:
                acc = acc * powers[i][e]
        return acc

    value = field.zero
    grad = [field.zero] * n
    hess = [[field.zero] * n for _ in range(n)]
    for expo, coef in f.terms.items():
        value = value + coef * mono(expo)
        for i, ei in enumerate(expo):
            if ei == 0:
                continue
            red = list(expo)
            red[i] = ei - 1
            grad[i] = grad[i] + coef * ei * mono(red)
            if ei >= 2:
                red2 = list(expo)
                red2[i] = ei - 2
                hess[i][i] = hess[i][i] + coef * (ei * (ei - 1)) * mono(red2)
            for j in range(i + 1, n):
                ej = expo[j]
                if ej == 0:
                    continue
                red2 = list(expo)
                red2[i] = ei - 1
                red2[j] = ej - 1
                cross = coef * (ei * ej) * mono(red2)
                hess[i][j] = hess[i][j] + cross
                hess[j][i] = hess[j][i] + cross
    return Jet2(value, tuple(grad), tuple(tuple(row) for row in hess))


# ---------------------------------------------------------------------------
# univariate roots over F_p
# ---------------------------------------------------------------------------


def uni_roots_mod_p(f: MultiPoly, field: FieldSpec, rng: random.Random | None = None) -> frozenset[Scalar]:
    """All roots in F_p of a nonzero univariate polynomial.

    Splits off the product of linear factors with gcd(f, x^p - x), where x^p
    is computed by square-and-multiply mod f, then isolates single roots by
    randomized equal-degree splitting.  The random shifts only steer the
    recursion; the returned set is a deterministic function of f.
    """
    if field.kind != PRIME:
        raise ConstructionError("root finding needs a prime field")
    if f.field != field:
        raise FieldMismatchError("polynomial field differs")
    if f.nvars != 1:
        raise ConstructionError("univariate polynomial required")
    if f.is_zero():
        raise ConstructionError("zero polynomial has every root")
    if rng is None:
        rng = random.Random(0xC0FFEE)
    p = field.modulus
    coeffs = [0] * (f.total_degree() + 1)
    for expo, coef in f.terms.items():
        coeffs[expo[0]] = coef.value
    roots = _roots_int(coeffs, p, rng)
    return frozenset(Scalar(field, r) for r in roots)


def _poly_trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mod(a: list[int], m: list[int], p: int) -> list[int]:
    a = a[:]
    inv_lead = pow(m[-1], p - 2, p)
    while len(a) >= len(m):
        factor = a[-1] * inv_lead % p
        if factor:
            shift = len(a) - len(m)
            for i, c in enumerate(m):
                a[shift + i] = (a[shift + i] - factor * c) % p
        a.pop()
    return _poly_trim(a)

def _poly_mulmod(a: list[int], b: list[int], m: list[int], p: int) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        if ca:
            for j, cb in enumerate(b):
                out[i + j] = (out[i + j] + ca * cb) % p
    return _poly_mod(out, m, p)


def _poly_powmod(base: list[int], e: int, m: list[int], p: int) -> list[int]:
    result = [1]
    base = _poly_mod(base, m, p)
    while e:
        if e & 1:
            result = _poly_mulmod(result, base, m, p)
        base = _poly_mulmod(base, base, m, p)
        e >>= 1
    return result


def _poly_gcd(a: list[int], b: list[int], p: int) -> list[int]:
    a, b = _poly_trim(a[:]), _poly_trim(b[:])
    while b:
        a, b = b, _poly_mod(a, b, p)
    if a:
        inv = pow(a[-1], p - 2, p)
        a = [c * inv % p for c in a]
    return a


def _roots_int(coeffs: list[int], p: int, rng: random.Random) -> set[int]:
    coeffs = _poly_trim([c % p for c in coeffs])
    if not coeffs:
        raise ConstructionError("zero polynomial")
    if len(coeffs) == 1:
        return set()
    # product of distinct linear factors: gcd(f, x^p - x)
    xp = _poly_powmod([0, 1], p, coeffs, p)
    xp_minus_x = xp[:]
    while len(xp_minus_x) < 2:
        xp_minus_x.append(0)
    xp_minus_x[1] = (xp_minus_x[1] - 1) % p
    g = _poly_gcd(coeffs, _poly_trim(xp_minus_x), p)
    out: set[int] = set()
    _split_linear(g, p, rng, out)
    return out


def _split_linear(g: list[int], p: int, rng: random.Random, out: set[int]) -> None:
    """g is monic and splits into distinct linear factors; collect its roots."""
    deg = len(g) - 1
    if deg <= 0:
        return
    if deg == 1:
        out.add((-g[0]) % p)
        return
    if deg == 2:
        # roots of x^2 + bx + c via the quadratic formula, p odd
        b, c = g[1], g[0]
        disc = (b * b - 4 * c) % p
        r = _sqrt_mod(disc, p)
        inv2 = pow(2, p - 2, p)
        out.add(((-b + r) * inv2) % p)
        out.add(((-b - r) * inv2) % p)
        return
    half = (p - 1) // 2
    while True:
        a = rng.randrange(p)
        probe = _poly_powmod([a, 1], half, g, p)
        probe = probe[:]
        if probe:
            probe[0] = (probe[0] - 1) % p
        else:
            probe = [(p - 1) % p]
        h = _poly_gcd(_poly_trim(probe), g, p)
        if 0 < len(h) - 1 < deg:
            _split_linear(h, p, rng, out)
            _split_linear(_poly_divide_exact(g, h, p), p, rng, out)
            return


def _poly_divide_exact(a: list[int], b: list[int], p: int) -> list[int]:
    """Quotient a / b when the division is exact (b monic divides a)."""
    a = a[:]
    out = [0] * (len(a) - len(b) + 1)
    inv_lead = pow(b[-1], p - 2, p)
    while len(a) >= len(b):
        factor = a[-1] * inv_lead % p
        out[len(a) - len(b)] = factor
        shift = len(a) - len(b)
        for i, c in enumerate(b):
            a[shift + i] = (a[shift + i] - factor * c) % p
        a.pop()
        _poly_trim(a)
        if not a:
            break
    return _poly_trim(out)


def _sqrt_mod(n: int, p: int) -> int:
    """Tonelli-Shanks; callers guarantee n is a quadratic residue."""
    n %= p
    if n == 0:
        return 0
    if p % 4 == 3:
        return pow(n, (p + 1) // 4, p)
    # general case
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(n, q, p), pow(n, (q + 1) // 2, p)
    while t != 1:
        t2 = t
        i = 0
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t, r = t * c % p, r * b % p
    return r
