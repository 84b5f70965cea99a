"""
The helper/primary rate region and its additivity probe
=======================================================

"""

# A helper holding the X side of a bipartite source can trade its own
# quantum rate Q_X against the primary rate Q_Y needed to ship Y.  The
# boundary of the achievable region comes out of the same bottleneck
# hull as the curves, inverted: cap the leak at 2 Q_X, read off the best
# relevance, and convert.
import numpy as np

from bottleneck_lab import (
    SolverConfig,
    additivity_check,
    purity_complement_check,
    wak_boundary,
)
from bottleneck_lab.channels import params_from_isometry
from bottleneck_lab.sources import rho3

rho = rho3(0.4)
cfg = SolverConfig(restarts=6, max_iters=60, tol=1e-7, seed=11,
                   d_W=3, d_V=4, beta_grid=(0.0, 0.9, 2.4, 6.0, 16.0))

boundary = wak_boundary(rho, [0.2, 0.35, 0.5, 0.65], cfg)
print("boundary points (Q_X, Q_Y):")
for pair in boundary:
    print(f"  ({pair.q_x:.3f}, {pair.q_y:.4f})")

# Every boundary point is certified by a witness isometry.  The primary
# rate it reports can be recomputed a second way, through the complement
# of the witness's environment; the two routes agree to machine
# precision.
witness = boundary.witnesses[1]
gap = purity_complement_check(
    np.asarray(witness.witness_params), rho,
    witness.witness_d_w, witness.witness_d_v,
)
print(f"\ncomplement-route gap at the second point: {gap:.2e}")

# Whether two copies of the source can beat twice the single-copy
# boundary is the regularization question.  At desk scale the answer is
# probed directly: solve the doubled source, mix in exhaustive products
# of single-copy witnesses, and compare per-copy rates.
report = additivity_check(rho, [0.25, 0.45], cfg)
print("\ntwo-copy minus single-copy primary rates:")
for q, d in zip(report.probes, report.differences):
    print(f"  Q_X = {q:.2f}: {d:+.2e}")
print("within band:", report.passed)
