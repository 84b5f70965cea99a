"""
Named subsystems, purification, and information measures
========================================================

"""

# States carry their subsystem names with them, so information
# quantities read like the formulas they implement.  No index
# bookkeeping: partial traces, purifications, and tensor products all
# work on labels.
import numpy as np

from bottleneck_lab import (
    conditional_mutual_information,
    embed_classical_joint,
    mutual_information,
    partial_trace,
    purify,
    tensor_product,
    von_neumann_entropy,
)
from bottleneck_lab.sources import bsc_table, rho3

rho = rho3(0.4)
print("subsystems:", rho.labels, "dims:", rho.dims)
print("S(XY) =", round(von_neumann_entropy(rho).value, 6))
print("S(X)  =", round(von_neumann_entropy(partial_trace(rho, {"X"})).value, 6))
print("I(X;Y) =", round(mutual_information(rho, ["X"], ["Y"]), 6))

# Purification adjoins a reference system that holds everything the
# mixture forgot; tracing it back out recovers the original state.
psi = purify(rho, ref_label="R")
print("\npurified labels:", psi.labels)
back = partial_trace(psi, {"X", "Y"})
print("round-trip error:", float(np.abs(back.matrix - rho.matrix).max()))

# Classical joints embed as diagonal states, and the quantum measures
# collapse to their Shannon counterparts on them.
emb = embed_classical_joint(bsc_table(0.2))
print("\nembedded BSC: I(X;Y) =", round(mutual_information(emb, ["X"], ["Y"]), 6))

# Conditional mutual information needs three labelled parts; product
# extensions make the conditioning system explicit.
joint = tensor_product(rho, partial_trace(rho, {"X"}), rename=("", "2"))
cmi = conditional_mutual_information(joint, ["X"], ["X2"], ["Y"])
print("I(X;X2|Y) for an independent extension:", round(cmi, 12))
