"""Secant variety dimensions, defects, and tangential projections.

The workhorse identity: the affine cone over the span of tangent spaces at
k+1 general points has the dimension of the k-th secant variety plus one, so
stacking exact tangent frames and taking a rank settles dim S^k.  Ranks can
only drop on special draws, hence every dimension here is a max over a few
independent trials and degenerate witness tuples are redrawn.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional

from .algebra import Matrix, exact_rank
from .errors import CenterFillsAmbient, ConfigError, DegenerateWitness
from .varieties import (
    MAX_RESAMPLE,
    ProjectionHandle,
    VarietyHandle,
    Witness,
    sample_distinct,
)

__all__ = [
    "DEFAULT_TRIALS",
    "DefectProfile",
    "TowerReport",
    "expected_secant_dim",
    "terracini_dim",
    "defect",
    "min_defective_k",
    "tangential_projection",
    "check_delta_tower",
]

DEFAULT_TRIALS = 3


def expected_secant_dim(x: VarietyHandle, k: int, rng: random.Random) -> int:
    """Parameter-count bound min(span, n(k+1) + k) with the measured span."""
    if k < 0:
        raise ConfigError("secant index must be nonnegative")
    n = x.intrinsic_dim(rng)
    return min(x.span_dim(), n * (k + 1) + k)


def _nondegenerate_tuple(x: VarietyHandle, count: int, n: int, rng: random.Random) -> list[Witness]:
    for _ in range(MAX_RESAMPLE):
        ws = sample_distinct(x, count, rng)
        if all(exact_rank(x.tangent_frame(w)) == n + 1 for w in ws):
            return ws
    raise DegenerateWitness(
        f"could not draw {count} witnesses with full frames on {x.label}"
    )


def terracini_dim(
    x: VarietyHandle, k: int, rng: random.Random, trials: int = DEFAULT_TRIALS
) -> tuple[int, tuple[Witness, ...]]:
    """dim S^k as the max over trials of a stacked-frame rank minus one."""
    if k < 0:
        raise ConfigError("secant index must be nonnegative")
    if trials < 1:
        raise ConfigError("trials must be positive")
    n = x.intrinsic_dim(rng)
    best, best_ws = -1, ()
    for _ in range(trials):
        ws = _nondegenerate_tuple(x, k + 1, n, rng)
        stacked = Matrix.hstack([x.tangent_frame(w) for w in ws])
        dim = exact_rank(stacked) - 1
        if dim > best:
            best, best_ws = dim, tuple(ws)
    return best, best_ws


@dataclass(frozen=True)
class DefectProfile:
    k: int
    dim_x: int
    expected: int
    actual: int
    delta: int

    @property
    def defective(self) -> bool:
        return self.delta > 0


def defect(
    x: VarietyHandle, k: int, rng: random.Random, trials: int = DEFAULT_TRIALS
) -> DefectProfile:
    n = x.intrinsic_dim(rng)
    expected = expected_secant_dim(x, k, rng)
    actual, _ = terracini_dim(x, k, rng, trials=trials)
    if actual > expected:
        raise DegenerateWitness(
            f"measured dim {actual} above the parameter count {expected}; "
            "the handle is lying about its span or dimension"
        )
    return DefectProfile(k=k, dim_x=n, expected=expected, actual=actual, delta=expected - actual)


def min_defective_k(
    x: VarietyHandle, kmax: int, rng: random.Random, trials: int = DEFAULT_TRIALS
) -> Optional[int]:
    """Smallest defective k in 1..kmax, or None.

    Stops early once a secant fills the span: every later secant fills too,
    so no later defect can appear.
    """
    for k in range(1, kmax + 1):
        profile = defect(x, k, rng, trials=trials)
        if profile.defective:
            return k
        if profile.actual == x.span_dim():
            return None
    return None


def tangential_projection(
    x: VarietyHandle, h: int, rng: random.Random
) -> tuple[ProjectionHandle, tuple[Witness, ...]]:
    """Project from the span of tangent spaces at h general points.

    The projection matrix annihilates the center exactly: rows are indexed by
    the non-pivot coordinates of the center's column space, with the pivot
    block eliminated.  So rank(proj . frame) equals
    rank([center | frame]) - rank(center) on the nose, no genericity needed.
    """
    if h < 1:
        raise ConfigError("need at least one tangent space to project from")
    field = x.field
    n = x.intrinsic_dim(rng)
    ws = _nondegenerate_tuple(x, h, n, rng)
    center = Matrix.hstack([x.tangent_frame(w) for w in ws])
    echelon, pivots = center.transpose().rref()
    c = len(pivots)
    r1 = x.ambient_r + 1
    if c >= r1:
        raise CenterFillsAmbient(
            f"{h} tangent spaces of {x.label} already span the ambient space"
        )
    pivot_set = set(pivots)
    rows = []
    for j in range(r1):
        if j in pivot_set:
            continue
        row = [field.zero] * r1
        row[j] = field.one
        for a, pc in enumerate(pivots):
            row[pc] = -echelon[a][j]
        rows.append(row)
    proj = Matrix(field, rows)
    handle = ProjectionHandle(
        x,
        proj,
        label=f"tangential-{h}-{x.label}",
        blueprint={"constructor": "tangential_projection", "base": x.blueprint, "points": h},
        span_r=x.span_dim() - c,
    )
    return handle, tuple(ws)


@dataclass(frozen=True)
class TowerReport:
    k: int
    delta_k: int
    delta_one_projected: int
    center_rank: int

    @property
    def consistent(self) -> bool:
        return self.delta_k == self.delta_one_projected


def check_delta_tower(
    x: VarietyHandle, k: int, rng: random.Random, trials: int = DEFAULT_TRIALS
) -> TowerReport:
    """Compare the k-defect of x against the 1-defect of its (k-1)-st
    tangential projection; the two agree for well-behaved handles."""
    if k < 1:
        raise ConfigError("tower check needs k >= 1")
    top = defect(x, k, rng, trials=trials)
    if k == 1:
        return TowerReport(k=1, delta_k=top.delta, delta_one_projected=top.delta, center_rank=0)
    projected, ws = tangential_projection(x, k - 1, rng)
    center_rank = x.span_dim() + 1 - (projected.span_dim() + 1)
    low = defect(projected, 1, rng, trials=trials)
    return TowerReport(
        k=k,
        delta_k=top.delta,
        delta_one_projected=low.delta,
        center_rank=center_rank,
    )
