"""Variety handles: sampleable projective varieties with exact local 2-jets.

A handle is a capability object, not an equation set.  It knows how to draw
generic witnesses, how to produce the affine-cone tangent frame at a witness,
and how to pull an ambient polynomial back to a second-order jet on a local
chart.  Every concrete kind reduces those three capabilities to one shared
primitive, the chart 2-jet: an exact local parameterization

    x(u) = P + sum_a u_a D_a + 1/2 sum_ab u_a u_b S_ab + O(3)

around the witness.  Pullbacks are then a single contraction and composite
handles (images, cones, sections, projections) chain by the chain rule, so
linear projections commute with jets by construction.

Charts are affine and a draw that lands off-chart is resampled; misses are
measure zero over the large analysis primes.  The resample cap is 64
everywhere.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field as dc_field
from typing import Optional, Sequence

from .algebra import (
    FieldSpec,
    Jet2,
    Matrix,
    MultiPoly,
    PRIME,
    Scalar,
    dot,
    exact_rank,
    jet2_eval,
    normalize_point,
    subspace_intersect,
    uni_roots_mod_p,
)
from .errors import (
    ConstructionError,
    DegenerateWitness,
    FieldMismatchError,
    SamplingExhausted,
)

__all__ = [
    "Witness",
    "ChartJet",
    "VarietyHandle",
    "ParametricHandle",
    "ImplicitPlaneCurveHandle",
    "MapImageHandle",
    "ConeHandle",
    "SectionHandle",
    "ProjectionHandle",
    "veronese",
    "rational_normal_curve",
    "implicit_plane_curve",
    "map_image",
    "cone",
    "hypersurface_section",
    "generic_hyperplane_section",
    "sample_distinct",
    "build",
    "MAX_RESAMPLE",
    "AMBIENT_CAP",
]

MAX_RESAMPLE = 64
AMBIENT_CAP = 120

# integer range for construction-time random draws; below every analysis
# prime, so one drawn integer model reduces consistently into each field
_DRAW_RANGE = 2**30


@dataclass(frozen=True)
class Witness:
    """One sampled point: chart coordinates plus the normalized ambient point.

    ``params`` are the handle's own chart coordinates, including any solved
    ruling parameter.  ``point`` is scaled so its last nonzero coordinate is
    one, which is the identity used for dedup everywhere.  ``base`` chains to
    the witness of the underlying handle for composite kinds.
    """

    params: tuple[Scalar, ...]
    point: tuple[Scalar, ...]
    base: Optional["Witness"] = None


@dataclass(frozen=True)
class ChartJet:
    """Exact 2-jet of a local parameterization at a witness.

    ``first[a]`` and ``second[a][b]`` are ambient vectors; ``second`` is
    symmetric in its two chart indices.
    """

    point: tuple[Scalar, ...]
    first: tuple[tuple[Scalar, ...], ...]
    second: tuple[tuple[tuple[Scalar, ...], ...], ...]

    @property
    def dim(self) -> int:
        return len(self.first)


def _contract_ambient_jet(ambient: Jet2, chart: ChartJet) -> Jet2:
    """Pull an ambient 2-jet back through a chart 2-jet (chain rule)."""
    n = chart.dim
    grad = tuple(dot(ambient.gradient, chart.first[a]) for a in range(n))
    hess = [[None] * n for _ in range(n)]
    for a in range(n):
        for b in range(a, n):
            acc = dot(ambient.gradient, chart.second[a][b])
            da, db = chart.first[a], chart.first[b]
            for i, hrow in enumerate(ambient.hessian):
                if da[i].value == 0:
                    continue
                acc = acc + da[i] * dot(hrow, db)
            hess[a][b] = acc
            hess[b][a] = acc
    return Jet2(ambient.value, grad, tuple(tuple(row) for row in hess))


class VarietyHandle:
    """Common capability surface; concrete kinds fill in the chart 2-jet."""

    kind = "abstract"

    def __init__(self, field: FieldSpec, ambient_r: int, label: str, blueprint: dict) -> None:
        self.field = field
        self.ambient_r = ambient_r
        self.label = label
        self.blueprint = blueprint
        self._dim_cache: int | None = None

    # -- to be provided by concrete kinds --------------------------------

    @property
    def chart_dim(self) -> int:
        raise NotImplementedError

    def sample(self, rng: random.Random) -> Witness:
        raise NotImplementedError

    def chart_jet2(self, w: Witness) -> ChartJet:
        raise NotImplementedError

    def reevaluate(self, w: Witness) -> tuple[Scalar, ...]:
        """Raw (unnormalized) ambient representative recomputed from params."""
        raise NotImplementedError

    @property
    def coord_support(self) -> frozenset[int]:
        return frozenset(range(self.ambient_r + 1))

    def span_dim(self) -> int:
        """Projective dimension of the linear span (declared or measured)."""
        return self.ambient_r

    def assumptions(self) -> tuple[str, ...]:
        return ()

    # -- shared capabilities ----------------------------------------------

    def tangent_frame(self, w: Witness) -> Matrix:
        """Columns spanning the affine cone over the embedded tangent space.

        The witness point itself is always among the columns, so the frame
        has chart_dim + 1 columns and generically full column rank.
        """
        jet = self.chart_jet2(w)
        return Matrix.from_columns(self.field, [jet.point] + list(jet.first))

    def pullback_jet2(self, coeffs: Sequence[Scalar], w: Witness) -> Jet2:
        """2-jet on the local chart of the linear form with these coefficients.

        For a form vanishing at the witness, the gradient vanishes exactly
        when the form's hyperplane contains the embedded tangent space.
        """
        if len(coeffs) != self.ambient_r + 1:
            raise ConstructionError("linear form arity mismatch")
        chart = self.chart_jet2(w)
        n = chart.dim
        value = dot(coeffs, chart.point)
        grad = tuple(dot(coeffs, chart.first[a]) for a in range(n))
        hess = tuple(
            tuple(dot(coeffs, chart.second[a][b]) for b in range(n)) for a in range(n)
        )
        return Jet2(value, grad, hess)

    def pullback_poly_jet2(self, g: MultiPoly, w: Witness) -> Jet2:
        """Chart 2-jet of an arbitrary ambient polynomial at the witness."""
        if g.nvars != self.ambient_r + 1:
            raise ConstructionError("ambient polynomial arity mismatch")
        chart = self.chart_jet2(w)
        return _contract_ambient_jet(jet2_eval(g, chart.point), chart)

    def intrinsic_dim(self, rng: random.Random) -> int:
        """Tangent-frame rank minus one, checked constant over three draws."""
        if self._dim_cache is not None:
            return self._dim_cache
        dims = []
        for _ in range(3):
            w = self.sample(rng)
            dims.append(exact_rank(self.tangent_frame(w)) - 1)
        if len(set(dims)) != 1:
            raise ConstructionError(
                f"handle {self.label!r} is ill-formed: unstable dimension {dims}"
            )
        self._dim_cache = dims[0]
        return dims[0]

    def __repr__(self):
        return f"{type(self).__name__}({self.label!r}, r={self.ambient_r})"


def _resample_loop(fn, what: str):
    for _ in range(MAX_RESAMPLE):
        out = fn()
        if out is not None:
            return out
    raise SamplingExhausted(f"resample cap hit while sampling {what}")


def sample_distinct(handle: VarietyHandle, count: int, rng: random.Random) -> list[Witness]:
    """Draw witnesses with pairwise distinct normalized points."""
    seen: set[tuple] = set()
    out: list[Witness] = []

    def one():
        w = handle.sample(rng)
        key = tuple(s.value for s in w.point)
        if key in seen:
            return None
        seen.add(key)
        return w

    for _ in range(count):
        out.append(_resample_loop(one, f"distinct witnesses on {handle.label}"))
    return out


# ---------------------------------------------------------------------------
# parametric handles
# ---------------------------------------------------------------------------


class ParametricHandle(VarietyHandle):
    """Image of an affine chart K^n under a tuple of coordinate polynomials."""

    kind = "parametric"

    def __init__(self, field: FieldSpec, polys: Sequence[MultiPoly], n: int, label: str, blueprint: dict) -> None:
        if not polys:
            raise ConstructionError("parametric handle needs coordinates")
        for p in polys:
            if p.field != field:
                raise FieldMismatchError("coordinate polynomial field differs")
            if p.nvars != n:
                raise ConstructionError("coordinate polynomial arity differs")
        super().__init__(field, len(polys) - 1, label, blueprint)
        self.polys = tuple(polys)
        self.n = n
        self._d1 = tuple(tuple(p.diff(a) for p in self.polys) for a in range(n))
        self._d2 = tuple(
            tuple(tuple(p.diff(a).diff(b) for p in self.polys) for b in range(n))
            for a in range(n)
        )

    @property
    def chart_dim(self) -> int:
        return self.n

    @property
    def coord_support(self) -> frozenset[int]:
        return frozenset(i for i, p in enumerate(self.polys) if not p.is_zero())

    def _eval_map(self, u: Sequence[Scalar]) -> tuple[Scalar, ...]:
        return tuple(p.evaluate(u) for p in self.polys)

    def sample(self, rng: random.Random) -> Witness:
        def one():
            u = tuple(self.field.random_scalar(rng) for _ in range(self.n))
            pt = self._eval_map(u)
            if all(x.value == 0 for x in pt):
                return None
            return Witness(u, normalize_point(pt))

        return _resample_loop(one, self.label)

    def reevaluate(self, w: Witness) -> tuple[Scalar, ...]:
        return self._eval_map(w.params)

    def chart_jet2(self, w: Witness) -> ChartJet:
        u = w.params
        point = self._eval_map(u)
        first = tuple(tuple(p.evaluate(u) for p in self._d1[a]) for a in range(self.n))
        second = tuple(
            tuple(tuple(p.evaluate(u) for p in self._d2[a][b]) for b in range(self.n))
            for a in range(self.n)
        )
        return ChartJet(point, first, second)


def _monomial_exponents(n: int, d: int) -> list[tuple[int, ...]]:
    """All exponent tuples of total degree <= d in n variables, graded-lex."""
    out = [e for e in itertools.product(range(d + 1), repeat=n) if sum(e) <= d]
    out.sort(key=lambda e: (sum(e), e))
    return out


def veronese(field: FieldSpec, n: int, d: int, label: str | None = None) -> ParametricHandle:
    """Degree-d embedding of P^n on an affine chart, one coordinate per
    dehomogenized monomial of degree at most d."""
    if n < 1 or d < 1:
        raise ConstructionError("veronese needs n >= 1 and d >= 1")
    expos = _monomial_exponents(n, d)
    if len(expos) - 1 > AMBIENT_CAP:
        raise ConstructionError(
            f"veronese({n},{d}) ambient dimension {len(expos) - 1} exceeds cap {AMBIENT_CAP}"
        )
    polys = [MultiPoly.monomial(field, e) for e in expos]
    label = label or f"veronese-{n}-{d}"
    return ParametricHandle(
        field, polys, n, label, {"constructor": "veronese", "n": n, "d": d}
    )


def rational_normal_curve(field: FieldSpec, d: int, label: str | None = None) -> ParametricHandle:
    handle = veronese(field, 1, d, label=label or f"rnc-{d}")
    handle.blueprint = {"constructor": "rnc", "d": d}
    return handle


# ---------------------------------------------------------------------------
# implicit plane curves
# ---------------------------------------------------------------------------


class ImplicitPlaneCurveHandle(VarietyHandle):
    """Smooth points of a plane curve {f = 0} in P^2, sampled by cutting the
    curve with random lines and solving the restricted univariate."""

    kind = "implicit_plane_curve"

    def __init__(self, field: FieldSpec, f: MultiPoly, genus_hint: int, label: str, blueprint: dict) -> None:
        super().__init__(field, 2, label, blueprint)
        self.f = f
        self.genus_hint = genus_hint
        # affine equation on the chart {x2 = 1}
        u = MultiPoly.variable(field, 2, 0)
        v = MultiPoly.variable(field, 2, 1)
        one = MultiPoly.constant(field, 2, 1)
        self.f_affine = f.compose([u, v, one])

    @property
    def chart_dim(self) -> int:
        return 1

    def span_dim(self) -> int:
        return 2

    def assumptions(self) -> tuple[str, ...]:
        return (f"curve {self.label}: genus_hint={self.genus_hint} asserted, not verified",)

    def sample(self, rng: random.Random) -> Witness:
        f, field = self.f, self.field

        def one():
            a = [field.random_scalar(rng) for _ in range(3)]
            b = [field.random_scalar(rng) for _ in range(3)]
            if all(x.value == 0 for x in b):
                return None
            s = MultiPoly.variable(field, 1, 0)
            line = [_scalar_const(field, 1, ai) + s * bi for ai, bi in zip(a, b)]
            restricted = f.compose(line)
            if restricted.total_degree() < 1:
                return None
            roots = sorted(uni_roots_mod_p(restricted, field, rng), key=lambda r: r.value)
            if not roots:
                return None
            s0 = rng.choice(roots)
            pt = tuple(ai + s0 * bi for ai, bi in zip(a, b))
            if pt[2].value == 0:
                return None  # off the working chart
            pt = normalize_point(pt)
            params = (pt[0], pt[1])
            jet = jet2_eval(self.f_affine, params)
            if all(g.value == 0 for g in jet.gradient):
                return None  # singular point, resample
            return Witness(params, pt)

        return _resample_loop(one, self.label)

    def reevaluate(self, w: Witness) -> tuple[Scalar, ...]:
        return (w.params[0], w.params[1], self.field.one)

    def chart_jet2(self, w: Witness) -> ChartJet:
        field = self.field
        jet = jet2_eval(self.f_affine, w.params)
        if jet.value.value != 0:
            raise DegenerateWitness("witness is not on the curve")
        gu, gv = jet.gradient
        if gu.value == 0 and gv.value == 0:
            raise DegenerateWitness("singular curve point")
        t = (-gv, gu)
        tht = (
            t[0] * t[0] * jet.hessian[0][0]
            + 2 * t[0] * t[1] * jet.hessian[0][1]
            + t[1] * t[1] * jet.hessian[1][1]
        )
        # second-order correction along a direction transverse to the curve
        if gu.value != 0:
            corr = ((-tht) / gu, field.zero)
        else:
            corr = (field.zero, (-tht) / gv)
        zero = field.zero
        point = (w.params[0], w.params[1], field.one)
        first = ((t[0], t[1], zero),)
        second = (((corr[0], corr[1], zero),),)
        return ChartJet(point, first, second)


def _scalar_to_bp(x: Scalar):
    """Portable JSON form: a lifted int mod p, a [num, den] pair over Q."""
    if x.field.kind == PRIME:
        return x.lift()
    return [x.value.numerator, x.value.denominator]


def _scalar_from_bp(field: FieldSpec, x) -> Scalar:
    if isinstance(x, list):
        num, den = x
        return field.scalar(num) / field.scalar(den)
    return field.scalar(x)


def _poly_to_int_coeffs(g: MultiPoly) -> list:
    return [[_scalar_to_bp(c), list(e)] for e, c in g.sorted_terms()]


def _squarefree_by_line_restriction(f: MultiPoly, field: FieldSpec, rng: random.Random) -> bool:
    """A non-squarefree form restricts non-squarefree to every line, so one
    squarefree line restriction certifies squarefreeness."""
    from .algebra import _poly_gcd  # univariate gcd on raw coefficient lists

    p = field.modulus
    for _ in range(6):
        a = [field.random_scalar(rng) for _ in range(3)]
        b = [field.random_scalar(rng) for _ in range(3)]
        s = MultiPoly.variable(field, 1, 0)
        line = [_scalar_const(field, 1, ai) + s * bi for ai, bi in zip(a, b)]
        g = f.compose(line)
        if g.total_degree() != f.total_degree():
            continue
        coeffs = [0] * (g.total_degree() + 1)
        for e, c in g.terms.items():
            coeffs[e[0]] = c.lift()
        deriv = [(i * coeffs[i]) % p for i in range(1, len(coeffs))]
        if _poly_gcd(coeffs, deriv, p) == [1]:
            return True
    return False


def implicit_plane_curve(
    field: FieldSpec, f: MultiPoly, genus_hint: int, rng: random.Random, label: str | None = None
) -> ImplicitPlaneCurveHandle:
    if field.kind != PRIME:
        raise ConstructionError("implicit plane curves are supported over prime fields only")
    if f.field != field:
        raise FieldMismatchError("curve equation field differs")
    if f.nvars != 3 or not f.is_homogeneous() or f.total_degree() < 1:
        raise ConstructionError("curve equation must be homogeneous in 3 variables")
    if not _squarefree_by_line_restriction(f, field, rng):
        raise ConstructionError("curve equation is not squarefree")
    label = label or "plane-curve"
    bp = {
        "constructor": "implicit_plane_curve",
        "terms": [[c.lift(), list(e)] for e, c in f.sorted_terms()],
        "genus_hint": genus_hint,
    }
    return ImplicitPlaneCurveHandle(field, f, genus_hint, label, bp)


# ---------------------------------------------------------------------------
# polynomial images
# ---------------------------------------------------------------------------


class MapImageHandle(VarietyHandle):
    kind = "map_image"

    def __init__(self, base: VarietyHandle, polys: Sequence[MultiPoly], label: str, blueprint: dict, span_r: int) -> None:
        super().__init__(base.field, len(polys) - 1, label, blueprint)
        self.base = base
        self.polys = tuple(polys)
        self._span_r = span_r

    @property
    def chart_dim(self) -> int:
        return self.base.chart_dim

    @property
    def coord_support(self) -> frozenset[int]:
        return frozenset(i for i, p in enumerate(self.polys) if not p.is_zero())

    def span_dim(self) -> int:
        return self._span_r

    def assumptions(self) -> tuple[str, ...]:
        return self.base.assumptions()

    def _apply(self, x: Sequence[Scalar]) -> tuple[Scalar, ...]:
        return tuple(p.evaluate(x) for p in self.polys)

    def sample(self, rng: random.Random) -> Witness:
        def one():
            bw = self.base.sample(rng)
            pt = self._apply(self.base.reevaluate(bw))
            if all(x.value == 0 for x in pt):
                return None  # base-locus hit
            return Witness(bw.params, normalize_point(pt), base=bw)

        return _resample_loop(one, self.label)

    def reevaluate(self, w: Witness) -> tuple[Scalar, ...]:
        return self._apply(self.base.reevaluate(w.base))

    def chart_jet2(self, w: Witness) -> ChartJet:
        base_chart = self.base.chart_jet2(w.base)
        n = base_chart.dim
        values, grads, hesses = [], [], []
        for p in self.polys:
            pulled = _contract_ambient_jet(jet2_eval(p, base_chart.point), base_chart)
            values.append(pulled.value)
            grads.append(pulled.gradient)
            hesses.append(pulled.hessian)
        point = tuple(values)
        first = tuple(tuple(g[a] for g in grads) for a in range(n))
        second = tuple(
            tuple(tuple(h[a][b] for h in hesses) for b in range(n)) for a in range(n)
        )
        return ChartJet(point, first, second)


def map_image(
    base: VarietyHandle, polys: Sequence[MultiPoly], rng: random.Random, label: str | None = None
) -> MapImageHandle:
    """Image of a handle under a homogeneous polynomial map.

    The linear span of the image is measured from 20 samples at construction
    so downstream expected-dimension formulas see the span, not the raw
    coordinate count.
    """
    arity = base.ambient_r + 1
    degs = set()
    for p in polys:
        if p.field != base.field:
            raise FieldMismatchError("map component field differs")
        if p.nvars != arity:
            raise ConstructionError("map components must live on the base ambient coordinates")
        if not p.is_zero():
            if not p.is_homogeneous():
                raise ConstructionError("map components must be homogeneous")
            degs.add(p.total_degree())
    if len(degs) != 1:
        raise ConstructionError("map components must share one common degree")
    label = label or f"image-of-{base.label}"
    bp = {
        "constructor": "map_image",
        "base": base.blueprint,
        "components": [_poly_to_int_coeffs(p) for p in polys],
        "arity": arity,
    }
    handle = MapImageHandle(base, polys, label, bp, span_r=len(polys) - 1)
    pts = []
    for _ in range(20):
        pts.append(list(handle.sample(rng).point))
    handle._span_r = exact_rank(Matrix(base.field, pts)) - 1
    return handle


# ---------------------------------------------------------------------------
# cones
# ---------------------------------------------------------------------------


class ConeHandle(VarietyHandle):
    """Cone over a base handle with a block-disjoint linear vertex.

    Chart coordinates are the base chart followed by one ruling coefficient
    per vertex column; the chart map x = y(t) + V mu is affine in mu, so the
    second derivatives are the base block padded with zeros.
    """

    kind = "cone"

    def __init__(self, base: VarietyHandle, vertex: Matrix, label: str, blueprint: dict) -> None:
        super().__init__(base.field, base.ambient_r, label, blueprint)
        self.base = base
        self.vertex = vertex
        self.m = vertex.cols

    @property
    def chart_dim(self) -> int:
        return self.base.chart_dim + self.m

    @property
    def coord_support(self) -> frozenset[int]:
        vsupp = frozenset(
            i for i in range(self.vertex.rows) if any(x.value != 0 for x in self.vertex.row(i))
        )
        return self.base.coord_support | vsupp

    def span_dim(self) -> int:
        return self.base.span_dim() + self.m

    def assumptions(self) -> tuple[str, ...]:
        return self.base.assumptions()

    def _point(self, y: Sequence[Scalar], mu: Sequence[Scalar]) -> tuple[Scalar, ...]:
        shift = self.vertex.matvec(mu) if self.m else tuple(self.field.zero for _ in y)
        return tuple(a + b for a, b in zip(y, shift))

    def sample(self, rng: random.Random) -> Witness:
        bw = self.base.sample(rng)
        y = self.base.reevaluate(bw)
        mu = tuple(self.field.random_scalar(rng) for _ in range(self.m))
        pt = self._point(y, mu)
        return Witness(bw.params + mu, normalize_point(pt), base=bw)

    def reevaluate(self, w: Witness) -> tuple[Scalar, ...]:
        mu = w.params[len(w.params) - self.m :] if self.m else ()
        return self._point(self.base.reevaluate(w.base), mu)

    def chart_jet2(self, w: Witness) -> ChartJet:
        base_chart = self.base.chart_jet2(w.base)
        nb = base_chart.dim
        mu = w.params[len(w.params) - self.m :] if self.m else ()
        point = self._point(base_chart.point, mu)
        first = tuple(base_chart.first) + tuple(self.vertex.column(j) for j in range(self.m))
        n = nb + self.m
        zero_vec = tuple(self.field.zero for _ in range(self.ambient_r + 1))
        second = tuple(
            tuple(
                base_chart.second[a][b] if a < nb and b < nb else zero_vec
                for b in range(n)
            )
            for a in range(n)
        )
        return ChartJet(point, first, second)


def cone(base: VarietyHandle, vertex: Matrix, label: str | None = None) -> ConeHandle:
    if vertex.field != base.field:
        raise FieldMismatchError("vertex field differs")
    if vertex.rows != base.ambient_r + 1:
        raise ConstructionError("vertex lives in a different ambient space")
    if vertex.cols == 0:
        raise ConstructionError("cone needs at least one vertex column")
    if exact_rank(vertex) != vertex.cols:
        raise ConstructionError("vertex columns are dependent")
    for i in base.coord_support:
        if any(x.value != 0 for x in vertex.row(i)):
            raise ConstructionError(
                "vertex support overlaps the base coordinate block"
            )
    label = label or f"cone-over-{base.label}"
    bp = {
        "constructor": "cone",
        "base": base.blueprint,
        "vertex": [
            [_scalar_to_bp(x) for x in vertex.column(j)] for j in range(vertex.cols)
        ],
    }
    return ConeHandle(base, vertex, label, bp)


# ---------------------------------------------------------------------------
# sections (hypersurface and hyperplane cuts share one mechanism)
# ---------------------------------------------------------------------------


class SectionHandle(VarietyHandle):
    """Base handle cut by ambient homogeneous constraints.

    At most one constraint may be nonlinear on the base chart.  Sampling
    solves the linear constraints exactly, restricts the nonlinear one to a
    random line inside the solved subspace, and root-finds; this is the only
    place the package solves equations, and it only ever solves univariates.
    """

    kind = "section"

    def __init__(self, base: VarietyHandle, constraints: Sequence[MultiPoly], label: str, blueprint: dict) -> None:
        if not isinstance(base, (ParametricHandle, ConeHandle)):
            raise ConstructionError(
                f"sections are supported over parametric or cone handles, not {base.kind}"
            )
        super().__init__(base.field, base.ambient_r, label, blueprint)
        self.base = base
        self.constraints = tuple(constraints)
        if len(self.constraints) >= base.chart_dim + 1:
            raise ConstructionError("too many constraints for the base chart")
        if isinstance(base, ParametricHandle):
            if len(self.constraints) != 1:
                raise ConstructionError(
                    "parametric bases support exactly one section constraint"
                )
        else:
            nonlinear = [g for g in self.constraints if g.total_degree() > 1]
            if len(nonlinear) > 1:
                raise ConstructionError(
                    "at most one constraint may be nonlinear on a cone ruling"
                )

    @property
    def chart_dim(self) -> int:
        return self.base.chart_dim - len(self.constraints)

    @property
    def coord_support(self) -> frozenset[int]:
        return self.base.coord_support

    def span_dim(self) -> int:
        linear_cuts = sum(1 for g in self.constraints if g.total_degree() == 1)
        return self.base.span_dim() - linear_cuts

    def assumptions(self) -> tuple[str, ...]:
        extra = (
            f"section {self.label}: smoothness of the cutting hypersurface is taken on faith",
        )
        return self.base.assumptions() + extra

    # -- sampling ---------------------------------------------------------

    def sample(self, rng: random.Random) -> Witness:
        if isinstance(self.base, ParametricHandle):
            return _resample_loop(lambda: self._sample_parametric(rng), self.label)
        return _resample_loop(lambda: self._sample_cone(rng), self.label)

    def _sample_parametric(self, rng: random.Random) -> Witness | None:
        base: ParametricHandle = self.base
        field = self.field
        n = base.n
        a = [field.random_scalar(rng) for _ in range(n)]
        b = [field.random_scalar(rng) for _ in range(n)]
        if all(x.value == 0 for x in b):
            return None
        s = MultiPoly.variable(field, 1, 0)
        line = [_scalar_const(field, 1, ai) + s * bi for ai, bi in zip(a, b)]
        phi_line = [p.compose(line) for p in base.polys]
        restricted = self.constraints[0].compose(phi_line)
        if restricted.total_degree() < 1:
            return None
        roots = sorted(uni_roots_mod_p(restricted, field, rng), key=lambda r: r.value)
        if not roots:
            return None
        s0 = rng.choice(roots)
        u = tuple(ai + s0 * bi for ai, bi in zip(a, b))
        pt = base._eval_map(u)
        if all(x.value == 0 for x in pt):
            return None
        bw = Witness(u, normalize_point(pt))
        return Witness(u, bw.point, base=bw)

    def _sample_cone(self, rng: random.Random) -> Witness | None:
        base: ConeHandle = self.base
        field = self.field
        m = base.m
        bw = base.base.sample(rng)
        y = base.base.reevaluate(bw)
        # restrict every constraint to the ruling x = y + V mu
        mu_vars = [MultiPoly.variable(field, m, j) for j in range(m)]
        coords = []
        for i in range(self.ambient_r + 1):
            c = _scalar_const(field, m, y[i])
            for j in range(m):
                c = c + mu_vars[j] * base.vertex[i, j]
            coords.append(c)
        lin_rows, lin_rhs, nonlinear = [], [], []
        for g in self.constraints:
            restricted = g.compose(coords)
            if restricted.total_degree() <= 1:
                row = [restricted.terms.get(_unit(m, j), field.zero) for j in range(m)]
                const = restricted.terms.get((0,) * m, field.zero)
                lin_rows.append(row)
                lin_rhs.append(-const)
            else:
                nonlinear.append(restricted)
        solved = _affine_solve(field, lin_rows, lin_rhs, m)
        if solved is None:
            return None
        mu_part, basis = solved
        nfree = len(basis)
        if len(nonlinear) > 1:
            raise ConstructionError("multiple nonlinear constraints on one ruling")
        if nonlinear:
            if nfree == 0:
                return None
            t0 = [field.random_scalar(rng) for _ in range(nfree)]
            d = [field.random_scalar(rng) for _ in range(nfree)]
            if all(x.value == 0 for x in d):
                return None
            s = MultiPoly.variable(field, 1, 0)
            mu_line = []
            for j in range(m):
                start = mu_part[j] + sum(
                    (basis[k][j] * t0[k] for k in range(nfree)), field.zero
                )
                slope = sum((basis[k][j] * d[k] for k in range(nfree)), field.zero)
                mu_line.append(_scalar_const(field, 1, start) + s * slope)
            restricted = nonlinear[0].compose(mu_line)
            if restricted.total_degree() < 1:
                return None
            roots = sorted(uni_roots_mod_p(restricted, field, rng), key=lambda r: r.value)
            if not roots:
                return None
            s0 = rng.choice(roots)
            mu = tuple(ml.evaluate((s0,)) for ml in mu_line)
        else:
            t = [field.random_scalar(rng) for _ in range(nfree)]
            mu = tuple(
                mu_part[j] + sum((basis[k][j] * t[k] for k in range(nfree)), field.zero)
                for j in range(m)
            )
        pt = base._point(y, mu)
        for g in self.constraints:
            if g.evaluate(pt).value != 0:
                raise ConstructionError("internal: constraint not satisfied at sample")
        cone_w = Witness(bw.params + mu, normalize_point(pt), base=bw)
        return Witness(cone_w.params, cone_w.point, base=cone_w)

    def reevaluate(self, w: Witness) -> tuple[Scalar, ...]:
        return self.base.reevaluate(w.base)

    # -- jets ---------------------------------------------------------------

    def chart_jet2(self, w: Witness) -> ChartJet:
        base_chart = self.base.chart_jet2(w.base)
        nb = base_chart.dim
        field = self.field
        grads, hesses = [], []
        for g in self.constraints:
            pulled = _contract_ambient_jet(jet2_eval(g, base_chart.point), base_chart)
            if pulled.value.value != 0:
                raise DegenerateWitness("witness is off the section")
            grads.append(list(pulled.gradient))
            hesses.append(pulled.hessian)
        gmat = Matrix(field, grads)
        if exact_rank(gmat) != len(self.constraints):
            raise DegenerateWitness("constraint gradients are dependent at the witness")
        kernel = gmat.null_space()
        ns = kernel.cols
        kcols = [kernel.column(a) for a in range(ns)]
        first = []
        for a in range(ns):
            vec = _linear_combo(base_chart.first, kcols[a], field, self.ambient_r + 1)
            first.append(vec)
        second = [[None] * ns for _ in range(ns)]
        for a in range(ns):
            for b in range(a, ns):
                rhs = []
                for h in hesses:
                    acc = field.zero
                    for i in range(nb):
                        if kcols[a][i].value == 0:
                            continue
                        acc = acc + kcols[a][i] * dot(h[i], kcols[b])
                    rhs.append(-acc)
                solved = _affine_solve(field, grads, rhs, nb)
                if solved is None:
                    raise DegenerateWitness("no second-order correction at the witness")
                corr, _ = solved
                vec = [field.zero] * (self.ambient_r + 1)
                for i in range(nb):
                    for j in range(nb):
                        cij = kcols[a][i] * kcols[b][j]
                        if cij.value == 0:
                            continue
                        svec = base_chart.second[i][j]
                        for c in range(len(vec)):
                            vec[c] = vec[c] + cij * svec[c]
                for i in range(nb):
                    if corr[i].value == 0:
                        continue
                    dvec = base_chart.first[i]
                    for c in range(len(vec)):
                        vec[c] = vec[c] + corr[i] * dvec[c]
                second[a][b] = tuple(vec)
                second[b][a] = tuple(vec)
        return ChartJet(
            base_chart.point, tuple(first), tuple(tuple(row) for row in second)
        )


def _unit(m: int, j: int) -> tuple[int, ...]:
    e = [0] * m
    e[j] = 1
    return tuple(e)


def _scalar_const(field: FieldSpec, nvars: int, s: Scalar) -> MultiPoly:
    return MultiPoly(field, nvars, {(0,) * nvars: s}) if s.value != 0 else MultiPoly.zero(field, nvars)


def _linear_combo(vectors, coeffs, field, length) -> tuple[Scalar, ...]:
    out = [field.zero] * length
    for vec, c in zip(vectors, coeffs):
        if c.value == 0:
            continue
        for i in range(length):
            out[i] = out[i] + c * vec[i]
    return tuple(out)


def _affine_solve(field: FieldSpec, rows, rhs, nvars: int):
    """Solve A x = rhs exactly.  Returns (particular, kernel basis) or None.

    With no equations the whole space comes back (particular 0, full basis).
    """
    if not rows:
        zero = field.zero
        one = field.one
        basis = [
            tuple(one if i == j else zero for j in range(nvars)) for i in range(nvars)
        ]
        return [zero] * nvars, basis
    aug = Matrix(field, [list(r) + [b] for r, b in zip(rows, rhs)])
    rref, pivots = aug.rref()
    if nvars in pivots:
        return None  # inconsistent
    particular = [field.zero] * nvars
    for r, p in enumerate(pivots):
        particular[p] = rref[r][nvars]
    amat = Matrix(field, rows)
    kernel = amat.null_space()
    basis = [kernel.column(j) for j in range(kernel.cols)]
    return particular, basis


def _check_not_identically_zero(base: VarietyHandle, g: MultiPoly, rng: random.Random) -> None:
    hits = 0
    for _ in range(5):
        w = base.sample(rng)
        if g.evaluate(base.reevaluate(w)).value != 0:
            hits += 1
    if hits == 0:
        raise ConstructionError("constraint vanishes identically on the base (5 samples)")


def hypersurface_section(
    base: VarietyHandle, h: MultiPoly, rng: random.Random, label: str | None = None
) -> SectionHandle:
    """Cut a parametric or cone handle by one homogeneous hypersurface."""
    if h.field != base.field:
        raise FieldMismatchError("hypersurface field differs")
    if h.nvars != base.ambient_r + 1 or not h.is_homogeneous() or h.total_degree() < 1:
        raise ConstructionError("hypersurface must be homogeneous on the ambient coordinates")
    if base.field.kind != PRIME:
        raise ConstructionError("section sampling solves univariates and needs a prime field")
    _check_not_identically_zero(base, h, rng)
    label = label or f"section-of-{base.label}"
    bp = {
        "constructor": "hypersurface_section",
        "base": base.blueprint,
        "h": _poly_to_int_coeffs(h),
    }
    return SectionHandle(base, [h], label, bp)


def generic_hyperplane_section(
    x: VarietyHandle, rng: random.Random, label: str | None = None
) -> SectionHandle:
    """Cut by a fresh random hyperplane; dimension drops by exactly one.

    Applied to a section handle this extends its constraint list, keeping the
    one-nonlinear-constraint sampling discipline intact.
    """
    if x.field.kind != PRIME:
        raise ConstructionError("section sampling needs a prime field")
    coeffs = [rng.randrange(1, _DRAW_RANGE) for _ in range(x.ambient_r + 1)]
    lam = MultiPoly.from_int_terms(
        x.field, x.ambient_r + 1, [(c, _unit(x.ambient_r + 1, i)) for i, c in enumerate(coeffs)]
    )
    if isinstance(x, SectionHandle):
        base, constraints, parent_bp = x.base, list(x.constraints) + [lam], x.blueprint
    elif isinstance(x, (ParametricHandle, ConeHandle)):
        base, constraints, parent_bp = x, [lam], x.blueprint
    else:
        raise ConstructionError(
            f"generic hyperplane sections are not supported over {x.kind} handles"
        )
    probe_dim = x.intrinsic_dim(rng)
    if probe_dim < 2:
        raise ConstructionError("hyperplane sections need dim >= 2")
    _check_not_identically_zero(x, lam, rng)
    label = label or f"hyperplane-cut-{x.label}"
    bp = {"constructor": "hyperplane_section", "base": parent_bp, "hyperplane": coeffs}
    return SectionHandle(base, constraints, label, bp)


# ---------------------------------------------------------------------------
# linear projections
# ---------------------------------------------------------------------------


class ProjectionHandle(VarietyHandle):
    """Image of a handle under an explicit linear map (chart jets compose
    linearly, so frames and pullbacks stay exact through the projection)."""

    kind = "projection"

    def __init__(
        self,
        base: VarietyHandle,
        proj: Matrix,
        label: str,
        blueprint: dict,
        span_r: int | None = None,
    ) -> None:
        if proj.field != base.field:
            raise FieldMismatchError("projection field differs")
        if proj.cols != base.ambient_r + 1:
            raise ConstructionError("projection domain mismatch")
        super().__init__(base.field, proj.rows - 1, label, blueprint)
        self.base = base
        self.proj = proj
        self._span_r = span_r if span_r is not None else proj.rows - 1

    @property
    def chart_dim(self) -> int:
        return self.base.chart_dim

    def span_dim(self) -> int:
        return self._span_r

    def assumptions(self) -> tuple[str, ...]:
        return self.base.assumptions()

    def sample(self, rng: random.Random) -> Witness:
        def one():
            bw = self.base.sample(rng)
            img = self.proj.matvec(self.base.reevaluate(bw))
            if all(x.value == 0 for x in img):
                return None  # witness in the projection center
            return Witness(bw.params, normalize_point(img), base=bw)

        return _resample_loop(one, self.label)

    def reevaluate(self, w: Witness) -> tuple[Scalar, ...]:
        return self.proj.matvec(self.base.reevaluate(w.base))

    def chart_jet2(self, w: Witness) -> ChartJet:
        base_chart = self.base.chart_jet2(w.base)
        n = base_chart.dim
        point = self.proj.matvec(base_chart.point)
        first = tuple(self.proj.matvec(v) for v in base_chart.first)
        second = tuple(
            tuple(self.proj.matvec(base_chart.second[a][b]) for b in range(n))
            for a in range(n)
        )
        return ChartJet(point, first, second)


# ---------------------------------------------------------------------------
# blueprint interpreter
# ---------------------------------------------------------------------------


def _poly_from_blueprint(field: FieldSpec, nvars: int, terms) -> MultiPoly:
    out = MultiPoly.zero(field, nvars)
    for coef, expo in terms:
        s = _scalar_from_bp(field, coef)
        out = out + MultiPoly(field, nvars, {tuple(expo): s})
    return out


def build(blueprint: dict, field: FieldSpec, rng: random.Random, label: str | None = None) -> VarietyHandle:
    """Instantiate a handle over a field from its integer-model blueprint.

    The same blueprint reduces consistently into every working prime, which
    is what makes small-prime enumeration and cross-prime dimension checks
    talk about the same variety.
    """
    kind = blueprint.get("constructor")
    if kind == "veronese":
        return veronese(field, blueprint["n"], blueprint["d"], label=label)
    if kind == "rnc":
        return rational_normal_curve(field, blueprint["d"], label=label)
    if kind == "implicit_plane_curve":
        f = _poly_from_blueprint(field, 3, blueprint["terms"])
        return implicit_plane_curve(field, f, blueprint["genus_hint"], rng, label=label)
    if kind == "map_image":
        base = build(blueprint["base"], field, rng)
        polys = [
            _poly_from_blueprint(field, blueprint["arity"], t)
            for t in blueprint["components"]
        ]
        return map_image(base, polys, rng, label=label)
    if kind == "cone":
        base = build(blueprint["base"], field, rng)
        cols = blueprint["vertex"]
        vertex = Matrix.from_columns(
            field, [[_scalar_from_bp(field, x) for x in col] for col in cols]
        )
        return cone(base, vertex, label=label)
    if kind == "hypersurface_section":
        base = build(blueprint["base"], field, rng)
        h = _poly_from_blueprint(field, base.ambient_r + 1, blueprint["h"])
        return hypersurface_section(base, h, rng, label=label)
    if kind == "hyperplane_section":
        inner = build(blueprint["base"], field, rng)
        lam = MultiPoly.from_int_terms(
            field,
            inner.ambient_r + 1,
            [
                (c, _unit(inner.ambient_r + 1, i))
                for i, c in enumerate(blueprint["hyperplane"])
            ],
        )
        _check_not_identically_zero(inner, lam, rng)
        if isinstance(inner, SectionHandle):
            handle = SectionHandle(
                inner.base,
                list(inner.constraints) + [lam],
                label or f"hyperplane-cut-{inner.label}",
                blueprint,
            )
        else:
            handle = SectionHandle(
                inner, [lam], label or f"hyperplane-cut-{inner.label}", blueprint
            )
        return handle
    raise ConstructionError(f"unknown constructor {kind!r}")
