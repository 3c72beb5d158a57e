"""Handles: sampling, chart jets, composition, blueprints."""

import itertools
import json
import random

import pytest

from terracini.algebra import FieldSpec, Matrix, MultiPoly, exact_rank
from terracini.errors import ConstructionError, DegenerateWitness
from terracini.varieties import (
    build,
    cone,
    generic_hyperplane_section,
    hypersurface_section,
    implicit_plane_curve,
    map_image,
    rational_normal_curve,
    sample_distinct,
    veronese,
)

from oracles import fermat_cubic_points, rank_by_reverse_echelon

F = FieldSpec.prime(2147483647)
F257 = FieldSpec.prime(257)


def fermat_cubic(field):
    x, y, z = (MultiPoly.variable(field, 3, i) for i in range(3))
    return x**3 + y**3 + z**3


def embed_with_padding(curve, pad, rng):
    field = curve.field
    comps = [MultiPoly.variable(field, 3, i) for i in range(3)]
    comps += [MultiPoly.zero(field, 3)] * pad
    return map_image(curve, comps, rng)


def cone_over_embedded_curve(rng, field=F):
    """Fermat cubic in the first 3 of 5 coordinates, vertex line e3^e4."""
    curve = implicit_plane_curve(field, fermat_cubic(field), 1, rng)
    emb = embed_with_padding(curve, 2, rng)
    vertex = Matrix.from_columns(
        field,
        [
            [field.scalar(1 if i == 3 else 0) for i in range(5)],
            [field.scalar(1 if i == 4 else 0) for i in range(5)],
        ],
    )
    return cone(emb, vertex)


def random_cubic_form(field, nvars, seed):
    rng = random.Random(seed)
    terms = [
        (rng.randrange(1, 2**30), e)
        for e in itertools.product(range(4), repeat=nvars)
        if sum(e) == 3
    ]
    return MultiPoly.from_int_terms(field, nvars, terms)


# -- two independent routes to the same conic --------------------------------


def test_conic_two_routes_share_tangent_lines():
    """The parametric conic and its implicit equation agree pointwise and
    to first order, checked by stacking frames at a shared point."""
    from terracini.algebra import normalize_point
    from terracini.varieties import Witness

    rng = random.Random(31)
    par = veronese(F, 1, 2)  # [1 : u : u^2]
    x0, x1, x2 = (MultiPoly.variable(F, 3, i) for i in range(3))
    imp = implicit_plane_curve(F, x0 * x2 - x1 * x1, 0, rng)

    eqn = x0 * x2 - x1 * x1
    for _ in range(5):
        w = par.sample(rng)
        assert eqn.evaluate(par.reevaluate(w)).value == 0

    # shared point: [1 : u : u^2] ~ (1/u^2, 1/u, 1)
    u = F.scalar(87123)
    wp = Witness((u,), normalize_point(par.reevaluate(Witness((u,), (F.one,) * 3))))
    inv = u.inverse()
    affine = (inv * inv, inv)
    wi = Witness(affine, (affine[0], affine[1], F.one))

    frame_p = par.tangent_frame(wp)
    frame_i = imp.tangent_frame(wi)
    assert exact_rank(frame_p) == 2
    assert exact_rank(frame_i) == 2
    # the affine cones over the two tangent lines coincide as subspaces
    stacked = Matrix.from_columns(F, frame_p.columns() + frame_i.columns())
    assert exact_rank(stacked) == 2


# -- curve sampling against the exhaustive point list ------------------------


def test_curve_samples_live_on_the_exhaustive_point_set():
    # 257 = 2 mod 3, so cubing is a bijection and the count is exactly p + 1
    pts = fermat_cubic_points(257)
    assert len(pts) == 258

    rng = random.Random(5)
    curve = implicit_plane_curve(F257, fermat_cubic(F257), 1, rng)
    seen = set()
    for _ in range(30):
        w = curve.sample(rng)
        key = tuple(s.value for s in w.point)
        assert key in pts
        seen.add(key)
    assert len(seen) >= 10  # line cuts spread over the curve


# -- frame ranks against an independent elimination -------------------------


def test_frame_rank_matches_reverse_echelon_oracle():
    rng = random.Random(12)
    ver = veronese(F, 2, 2)
    w = ver.sample(rng)
    frame = ver.tangent_frame(w)
    lifted = [[x.lift() for x in frame.row(i)] for i in range(frame.rows)]
    assert exact_rank(frame) == rank_by_reverse_echelon(lifted, F.modulus) == 3


def test_intrinsic_dim_agrees_with_chart_dim_on_honest_handles():
    rng = random.Random(40)
    assert veronese(F, 2, 3).intrinsic_dim(rng) == 2
    assert rational_normal_curve(F, 4).intrinsic_dim(rng) == 1
    K = cone_over_embedded_curve(rng)
    assert K.intrinsic_dim(rng) == K.chart_dim == 3


# -- jets --------------------------------------------------------------------


def test_quadratic_map_taylor_is_exact():
    """For a degree-2 map the chart 2-jet reproduces the map exactly at any
    offset, not just infinitesimally."""
    rng = random.Random(64)
    ver = veronese(F, 2, 2)
    half = F.scalar(2).inverse()
    for _ in range(3):
        w = ver.sample(rng)
        jet = ver.chart_jet2(w)
        for _ in range(4):
            h = [F.random_scalar(rng) for _ in range(2)]
            direct = ver._eval_map(tuple(p + d for p, d in zip(w.params, h)))
            pred = list(jet.point)
            for a in range(2):
                for i, v in enumerate(jet.first[a]):
                    pred[i] = pred[i] + h[a] * v
            for a in range(2):
                for b in range(2):
                    c = half * h[a] * h[b]
                    for i, v in enumerate(jet.second[a][b]):
                        pred[i] = pred[i] + c * v
            assert tuple(pred) == direct


def test_curve_jet_kills_its_own_equation_to_second_order():
    rng = random.Random(88)
    f = fermat_cubic(F)
    curve = implicit_plane_curve(F, f, 1, rng)
    for _ in range(4):
        jet = curve.pullback_poly_jet2(f, curve.sample(rng))
        assert jet.value.value == 0
        assert all(g.value == 0 for g in jet.gradient)
        assert all(x.value == 0 for row in jet.hessian for x in row)


def test_section_chart_kills_constraints_to_second_order():
    rng = random.Random(5150)
    K = cone_over_embedded_curve(rng)
    H = random_cubic_form(F, 5, seed=17)
    S = hypersurface_section(K, H, rng)
    assert S.chart_dim == 2

    for _ in range(3):
        jet = S.pullback_poly_jet2(H, S.sample(rng))
        assert jet.value.value == 0
        assert all(g.value == 0 for g in jet.gradient)
        assert all(x.value == 0 for row in jet.hessian for x in row)

    Sh = generic_hyperplane_section(S, rng)
    assert Sh.chart_dim == 1
    w = Sh.sample(rng)
    for g in Sh.constraints:
        jet = Sh.pullback_poly_jet2(g, w)
        assert jet.value.value == 0
        assert all(s.value == 0 for s in jet.gradient)
        assert all(x.value == 0 for row in jet.hessian for x in row)
    assert Sh.intrinsic_dim(rng) == 1


def test_section_over_parametric_solves_one_constraint():
    rng = random.Random(321)
    ver = veronese(F, 2, 2)
    g = random_cubic_form(F, 6, seed=9)
    S = hypersurface_section(ver, g, rng)
    assert S.chart_dim == 1
    for _ in range(3):
        w = S.sample(rng)
        assert g.evaluate(S.reevaluate(w)).value == 0
        jet = S.pullback_poly_jet2(g, w)
        assert all(s.value == 0 for s in jet.gradient)
        assert all(x.value == 0 for row in jet.hessian for x in row)


def test_off_section_witness_is_rejected():
    rng = random.Random(5150)
    K = cone_over_embedded_curve(rng)
    H = random_cubic_form(F, 5, seed=17)
    S = hypersurface_section(K, H, rng)
    stray = K.sample(rng)  # generic cone point misses the cubic
    assert H.evaluate(K.reevaluate(stray)).value != 0
    with pytest.raises(DegenerateWitness):
        S.chart_jet2(type(stray)(stray.params, stray.point, base=stray))


# -- bookkeeping --------------------------------------------------------------


def test_cone_rejects_overlapping_vertex():
    rng = random.Random(2)
    curve = implicit_plane_curve(F, fermat_cubic(F), 1, rng)
    emb = embed_with_padding(curve, 2, rng)
    bad = Matrix.from_columns(F, [[F.scalar(1 if i == 0 else 0) for i in range(5)]])
    with pytest.raises(ConstructionError):
        cone(emb, bad)


def test_map_image_measures_its_span():
    rng = random.Random(77)
    base = veronese(F, 1, 2)
    x0, x1, x2 = (MultiPoly.variable(F, 3, i) for i in range(3))
    comps = [x0, x1, x2, x0 + 2 * x2, MultiPoly.zero(F, 3)]
    img = map_image(base, comps, rng)
    assert img.ambient_r == 4
    assert img.span_dim() == 2  # one dependent and one zero coordinate
    assert sorted(img.coord_support) == [0, 1, 2, 3]


def test_veronese_respects_ambient_cap():
    with pytest.raises(ConstructionError):
        veronese(F, 2, 15)  # 135 coordinates


def test_cone_and_section_span_bookkeeping():
    rng = random.Random(303)
    K = cone_over_embedded_curve(rng)
    assert K.span_dim() == 4
    S = hypersurface_section(K, random_cubic_form(F, 5, seed=23), rng)
    assert S.span_dim() == 4  # nonlinear cuts do not shrink the span
    Sh = generic_hyperplane_section(S, rng)
    assert Sh.span_dim() == 3


def test_witness_reevaluation_matches_its_point():
    from terracini.algebra import normalize_point

    rng = random.Random(404)
    zoo = [
        veronese(F, 2, 2),
        implicit_plane_curve(F, fermat_cubic(F), 1, rng),
        cone_over_embedded_curve(rng),
    ]
    zoo.append(hypersurface_section(zoo[2], random_cubic_form(F, 5, seed=61), rng))
    for handle in zoo:
        for _ in range(3):
            w = handle.sample(rng)
            assert normalize_point(handle.reevaluate(w)) == w.point


def test_distinct_sampling_never_repeats():
    rng = random.Random(9)
    ws = sample_distinct(veronese(F, 1, 3), 8, rng)
    keys = {w.point for w in ws}
    assert len(keys) == 8


def test_blueprint_rebuild_across_primes():
    rng = random.Random(1212)
    K = cone_over_embedded_curve(rng)
    S = hypersurface_section(K, random_cubic_form(F, 5, seed=41), rng)
    Sh = generic_hyperplane_section(S, rng)

    wire = json.dumps(Sh.blueprint, sort_keys=True)
    bp = json.loads(wire)
    for p in (1009, 2003):
        rebuilt = build(bp, FieldSpec.prime(p), random.Random(6))
        assert rebuilt.kind == "section"
        assert rebuilt.chart_dim == Sh.chart_dim
        assert rebuilt.ambient_r == Sh.ambient_r
        w = rebuilt.sample(random.Random(8))
        for g in rebuilt.constraints:
            assert g.evaluate(rebuilt.reevaluate(w)).value == 0
