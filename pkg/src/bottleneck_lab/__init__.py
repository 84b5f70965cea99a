"""Desk-scale quantum and classical bottleneck curves, privacy funnels, and rate regions."""

import os as _os

__version__ = "0.1.0"


def _cap_thread_pools() -> None:
    # honored only if applied before the first numpy import in this process
    raw = _os.environ.get("BOTTLENECK_LAB_THREADS")
    try:
        cap = int(raw) if raw is not None else 0
    except ValueError:
        return
    if cap < 1:
        return
    pools = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
             "NUMEXPR_NUM_THREADS", "VECLIB_MAXIMUM_THREADS")
    for var in pools:
        try:
            current = int(_os.environ[var])
        except (KeyError, ValueError):
            current = None
        _os.environ[var] = str(cap if current is None else min(current, cap))


_cap_thread_pools()

from .channels import (
    ConditionalChannel,
    FlaggedChannel,
    StinespringIsometry,
    classical_to_quantum_channel,
    flagged_mix,
    isometry_from_params,
    params_from_isometry,
    random_channel_params,
    stinespring_extend,
)
from .classical_ib import (
    binary_entropy,
    binary_entropy_inverse,
    bsc_ib_oracle,
    classical_ib_curve,
    classical_pf_curve,
    multi_letter_pf_point,
    shannon_mutual_information,
)
from .curves import Curve, CurvePoint, SolverConfig, convexity_report
from .errors import InfeasibleError, ValidationError
from .rate_region import (
    AdditivityReport,
    RatePair,
    RegionBoundary,
    additivity_check,
    purity_complement_check,
    wak_boundary,
)
from .solver import (
    EquivalenceReport,
    QIBPoint,
    convexity_check,
    dimension_study,
    equivalence_check,
    ib_objective,
    normalize_curve,
    quantum_ib_curve,
    quantum_pf_curve,
    witness_information_pair,
)
from .states import (
    DensityOperator,
    EntropyReport,
    PureState,
    conditional_mutual_information,
    embed_classical_joint,
    mutual_information,
    partial_trace,
    purify,
    tensor_product,
    tensor_pure,
    von_neumann_entropy,
)
from .verify import CheckResult, run_suite, suite_names
from .cli import RunManifest, StateSpec, export_artifacts, run_command
