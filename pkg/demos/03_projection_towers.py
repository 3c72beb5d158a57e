#!/usr/bin/env python
"""Tangential projections turn higher secant questions into first secant ones."""

# Projecting a variety away from the span of its tangent spaces at k-1
# general points drops both invariants down a level: the k-th defect of the
# source equals the first defect of the image, and likewise for the contact
# dimension.  A hyperplane section moves the other way, lowering both by one.

from terracini import (
    analysis_field,
    builtin,
    check_delta_tower,
    check_nu_tower,
    defect,
    derive_rng,
    generic_hyperplane_section,
    nu_estimate,
)

field = analysis_field()
x = builtin("counter2", field, derive_rng(2, "demo"))

# both towers, evaluated independently on each side
dt = check_delta_tower(x, 2, derive_rng(2, "demo", "dt"))
nt = check_nu_tower(x, 2, derive_rng(2, "demo", "nt"))
print(f"{x.label}: delta_2 = {dt.delta_k}, delta_1 of projection = "
      f"{dt.delta_one_projected}, consistent: {dt.consistent}")
print(f"{x.label}: nu_2 = {nt.nu_k}, nu_1 of projection = "
      f"{nt.nu_one_projected}, consistent: {nt.consistent}")

# cutting with a generic hyperplane decrements delta and nu together
y = builtin("counter3-n3", field, derive_rng(2, "demo", "cut-src"))
before_d = defect(y, 1, derive_rng(2, "demo", "before-d")).delta
before_n = nu_estimate(y, 1, derive_rng(2, "demo", "before-n")).nu
h = generic_hyperplane_section(y, derive_rng(2, "demo", "cut"))
after_d = defect(h, 1, derive_rng(2, "demo", "after-d")).delta
after_n = nu_estimate(h, 1, derive_rng(2, "demo", "after-n")).nu
print(f"{y.label}: delta_1 {before_d} -> {after_d}, nu_1 {before_n} -> {after_n} "
      "after one hyperplane section")
