#!/usr/bin/env python
# Is the tangential projection one-to-one?  Count fibers over small primes.
#
# Over a prime small enough to enumerate every chart point, the preimages of
# a random image point can be listed exhaustively.  A projection that is
# birational shows exactly one preimage in every trial at every prime; the
# cone below shows three, because each image point pulls back to a full line
# through the vertex which meets the surface three times.

from terracini import (
    analysis_field,
    builtin,
    derive_rng,
    fiber_probe,
    tangent_functoriality_check,
)

field = analysis_field()

x = builtin("veronese-2-3", field, derive_rng(3, "demo"))
rep = fiber_probe(x, 1, derive_rng(3, "demo", "fiber"))
print(f"{x.label}: verdict {rep.verdict}, consensus degree {rep.consensus_d}")
for p, counts in sorted(rep.cardinalities.items()):
    print(f"  prime {p}: per-trial fiber sizes {list(counts)}")

x = builtin("counter1", field, derive_rng(3, "demo", "cone"))
rep = fiber_probe(x, 1, derive_rng(3, "demo", "cone-fiber"))
print(f"{x.label}: verdict {rep.verdict}, consensus degree {rep.consensus_d}")
for p, counts in sorted(rep.cardinalities.items()):
    hits = rep.center_hits[p]
    print(f"  prime {p}: per-trial fiber sizes {list(counts)} "
          f"({hits} samples hit the projection center)")

# tangent frames pushed through the projection span the image tangent frames
x = builtin("veronese-2-3", field, derive_rng(3, "demo", "tf"))
rep = tangent_functoriality_check(x, 1, derive_rng(3, "demo", "tf-rng"))
print(f"{x.label}: generically finite {rep.generically_finite}, "
      f"pushed/image/joint ranks {rep.frame_ranks}, "
      f"spans agree at {rep.witnesses} witnesses: {rep.span_consistent}")
