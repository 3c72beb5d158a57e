#!/usr/bin/env python
# Secant dimensions by stacked tangent frames.
#
# The first secant variety of a surface should have dimension 5 when the
# ambient space allows it.  For the quadratic Veronese surface it does not:
# every chord lies in too small a span, and the rank computation sees that.

from terracini import builtin, analysis_field, defect, min_defective_k, derive_rng

field = analysis_field()

x = builtin("veronese-2-2", field, derive_rng(0, "demo", "build"))
prof = defect(x, 1, derive_rng(0, "demo", "defect"))
print(f"{x.label}: dim S^1 = {prof.actual}, expected {prof.expected}, "
      f"defect {prof.delta}")

# rational normal curves are never defective; the ladder of secants climbs
# by 2 each step until it fills the ambient space
for d in range(3, 8):
    x = builtin(f"rnc-{d}", field, derive_rng(0, "demo", "build", d))
    k = 1
    while 2 * k + 1 <= d:
        prof = defect(x, k, derive_rng(0, "demo", "rnc", d, k))
        flag = "DEFECTIVE" if prof.defective else "ok"
        print(f"rnc-{d}  k={k}  dim {prof.actual} / expected {prof.expected}  {flag}")
        k += 1

# scan upward for the first defective index of a pinned surface that only
# becomes defective at the second secant
x = builtin("counter2", field, derive_rng(0, "demo", "build2"))
k = min_defective_k(x, 4, derive_rng(0, "demo", "mindef"))
print(f"{x.label}: first defective secant index = {k}")
