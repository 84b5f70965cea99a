"""
Channel surgery: flagged mixtures and the compression-cost identity
===================================================================

"""

# Two structural facts carry most of the proofs in this package.  First:
# mixing two channels behind an orthogonal flag splits every mutual
# information into the lambda-weighted average of its branches.
import numpy as np

from bottleneck_lab import (
    equivalence_check,
    flagged_mix,
    isometry_from_params,
    mutual_information,
    purify,
    random_channel_params,
    stinespring_extend,
)
from bottleneck_lab.sources import random_density, rho3

psi = purify(rho3(0.4), ref_label="R")
n0 = isometry_from_params(random_channel_params(0, 2, 2, 2), 2, 2, 2)
n1 = isometry_from_params(random_channel_params(1, 2, 2, 2), 2, 2, 2)

for lam in (0.25, 0.5, 0.75):
    out = flagged_mix(n0, n1, lam).apply(psi, "X")
    mixed = mutual_information(out, ["Y"], ["W", "W'"])
    branch0 = mutual_information(stinespring_extend(n0, psi, "X"), ["Y"], ["W"])
    branch1 = mutual_information(stinespring_extend(n1, psi, "X"), ["Y"], ["W"])
    avg = lam * branch0 + (1 - lam) * branch1
    print(f"lambda {lam}: flagged {mixed:.6f}  averaged {avg:.6f}  gap {abs(mixed - avg):.1e}")

# Second: the compression cost of a channel can be read off two very
# different extensions, one over a purification of the input marginal
# alone and one over a purification of the whole joint source.  The two
# routes agree for every channel, which is what lets curve constraints
# be measured on whichever form is cheaper.
print("\ncompression-cost identity on random channels:")
for seed in range(4):
    rho = random_density(seed, (2, 2))
    theta = random_channel_params(seed + 10, 2, 3, 4)
    report = equivalence_check(theta, rho, 3, 4)
    print(f"  seed {seed}: lhs {report.lhs:.6f}  rhs {report.rhs:.6f}  gap {report.gap:.1e}")
