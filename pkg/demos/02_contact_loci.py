"""
Contact loci and weak defectivity
=================================

A hyperplane tangent to a variety at k+1 general points is singular along a
contact locus through those points.  Its dimension nu_k can exceed the secant
defect delta_k, and a cone is the standard way to make that happen: the
ruling forces every tangent hyperplane to be tangent along entire lines while
the secants stay as large as expected.
"""

from terracini import (
    analysis_field,
    builtin,
    check_nu_ge_delta,
    defect,
    derive_rng,
    nu_estimate,
)

field = analysis_field()

# for the quadratic Veronese surface the two invariants agree: nu = delta = 1
x = builtin("veronese-2-2", field, derive_rng(1, "demo"))
est = nu_estimate(x, 1, derive_rng(1, "demo", "nu"))
prof = defect(x, 1, derive_rng(1, "demo", "delta"))
print(f"{x.label}: nu_1 = {est.nu}, delta_1 = {prof.delta}")

# the cone over a sextic curve is weakly defective without being defective
x = builtin("counter1", field, derive_rng(1, "demo", "cone"))
est = nu_estimate(x, 1, derive_rng(1, "demo", "cone-nu"))
prof = defect(x, 1, derive_rng(1, "demo", "cone-delta"))
print(f"{x.label}: nu_1 = {est.nu}, delta_1 = {prof.delta} "
      f"(weakly defective: {est.weakly_defective})")

# a threefold cone pushes the gap wider: nu = 2 against delta = 1
x = builtin("counter3-n3", field, derive_rng(1, "demo", "three"))
est = nu_estimate(x, 1, derive_rng(1, "demo", "three-nu"))
prof = defect(x, 1, derive_rng(1, "demo", "three-delta"))
print(f"{x.label}: nu_1 = {est.nu}, delta_1 = {prof.delta}")

# whenever some secant is defective, the contact dimension at the first
# defective index is at least the defect
cmp = check_nu_ge_delta(x, 3, derive_rng(1, "demo", "cmp"))
print(f"{x.label}: at k = {cmp.min_defective_k}: "
      f"nu {cmp.nu} >= delta {cmp.delta} holds: {cmp.holds}")
