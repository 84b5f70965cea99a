"""Self-contained property suites, one per module, runnable from the CLI.

Each check re-derives an invariant on seeded examples and reports a
measured number; a raised exception counts as a failure rather than an
abort, so one broken module cannot hide the health of the others.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import sources
from .channels import (
    flagged_mix,
    isometry_from_params,
    params_from_isometry,
    random_channel_params,
    stinespring_extend,
)
from .classical_ib import (
    bsc_ib_rate,
    channel_information_pair,
    classical_ib_curve,
    classical_pf_curve,
    shannon_entropy,
    shannon_mutual_information,
)
from .curves import SolverConfig, convexity_report
from .errors import ValidationError
from .rate_region import additivity_check, purity_complement_check, wak_boundary
from .solver import (
    convexity_check,
    equivalence_check,
    ib_objective,
    normalize_curve,
    quantum_ib_curve,
    witness_information_pair,
    _problem_from_state,
)
from .states import (
    DensityOperator,
    conditional_mutual_information,
    embed_classical_joint,
    mutual_information,
    partial_trace,
    purify,
    tensor_product,
    von_neumann_entropy,
)

__all__ = ["CheckResult", "run_suite", "suite_names"]


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    passed: bool
    detail: str


def _ok(measured: float, budget: float, label: str = "gap") -> tuple:
    return measured <= budget, f"{label} {measured:.3e} (budget {budget:.0e})"


# ---------------------------------------------------------------------------
# per-module suites; each yields (name, callable) pairs


def _states_suite(seed: int):
    def entropy_additive():
        worst = 0.0
        for k in range(3):
            a = sources.random_density(seed + k, (2,), ("A",))
            b = sources.random_density(seed + 50 + k, (3,), ("B",))
            joint = tensor_product(a, b)
            gap = abs(
                von_neumann_entropy(joint).value
                - von_neumann_entropy(a).value
                - von_neumann_entropy(b).value
            )
            worst = max(worst, gap)
        return _ok(worst, 1e-9)

    yield "entropy additive on products", entropy_additive

    def purify_roundtrip():
        worst = 0.0
        for k in range(4):
            rho = sources.random_density(seed + k, (2, 2), ("X", "Y"))
            psi = purify(rho, ref_label="R")
            if psi.labels[0] != "R":
                return False, "reference subsystem is not first"
            back = partial_trace(psi.to_density(), ["X", "Y"])
            worst = max(worst, float(np.max(np.abs(back.matrix - rho.matrix))))
        return _ok(worst, 1e-9)

    yield "purification reduces back to the state", purify_roundtrip

    def cmi_chain():
        worst = 0.0
        for k in range(3):
            rho = sources.random_density(seed + k, (2, 2, 2), ("A", "B", "C"))
            lhs = mutual_information(rho, ["A"], ["B", "C"])
            rhs = mutual_information(rho, ["A"], ["B"]) + conditional_mutual_information(
                rho, ["A"], ["C"], ["B"]
            )
            worst = max(worst, abs(lhs - rhs))
        return _ok(worst, 1e-9)

    yield "mutual information chain rule", cmi_chain

    def classical_embedding():
        worst = 0.0
        for k in range(3):
            table = sources.random_classical_table(seed + k, (3, 2))
            rho = embed_classical_joint(table)
            gap = abs(
                mutual_information(rho, [rho.labels[0]], [rho.labels[1]])
                - shannon_mutual_information(table)
            )
            worst = max(worst, gap)
        return _ok(worst, 1e-12)

    yield "classical embedding preserves information", classical_embedding


def _channels_suite(seed: int):
    combos = [(2, 2, 2), (2, 3, 4), (3, 2, 6)]

    def isometry_columns():
        worst = 0.0
        for k, (d_in, d_w, d_v) in enumerate(combos):
            theta = random_channel_params(seed + k, d_in, d_w, d_v)
            mat = isometry_from_params(theta, d_in, d_w, d_v).matrix
            worst = max(worst, float(np.max(np.abs(mat.conj().T @ mat - np.eye(d_in)))))
        return _ok(worst, 1e-12)

    yield "parameterized isometries are isometries", isometry_columns

    def chart_roundtrip():
        worst = 0.0
        for k, (d_in, d_w, d_v) in enumerate(combos):
            theta = random_channel_params(seed + 7 + k, d_in, d_w, d_v)
            mat = isometry_from_params(theta, d_in, d_w, d_v).matrix
            back = isometry_from_params(
                params_from_isometry(mat, d_in, d_w, d_v), d_in, d_w, d_v
            ).matrix
            worst = max(worst, float(np.max(np.abs(back - mat))))
        return _ok(worst, 1e-9)

    yield "parameter chart reproduces matrices", chart_roundtrip

    def extension_is_pure():
        psi = purify(sources.rho3(0.4), ref_label="R")
        worst = 0.0
        for k in range(3):
            iso = isometry_from_params(random_channel_params(seed + k, 2, 2, 3), 2, 2, 3)
            sigma = stinespring_extend(iso, psi, "X")
            eigs = np.linalg.eigvalsh(sigma.to_density().matrix)
            worst = max(worst, abs(1.0 - float(eigs[-1])))
            kept = partial_trace(sigma.to_density(), ["Y", "R"])
            orig = partial_trace(psi.to_density(), ["Y", "R"])
            worst = max(worst, float(np.max(np.abs(kept.matrix - orig.matrix))))
        return _ok(worst, 1e-9)

    yield "channel extension stays pure and local", extension_is_pure

    def flag_decomposition():
        psi = purify(sources.rho3(0.4), ref_label="R")
        rng = np.random.default_rng(seed)
        worst = 0.0
        for k in range(5):
            n0 = isometry_from_params(random_channel_params(seed + 2 * k, 2, 2, 2), 2, 2, 2)
            n1 = isometry_from_params(random_channel_params(seed + 2 * k + 1, 2, 2, 2), 2, 2, 2)
            lam = float(rng.uniform())
            out = flagged_mix(n0, n1, lam).apply(psi, "X")
            s0 = stinespring_extend(n0, psi, "X")
            s1 = stinespring_extend(n1, psi, "X")
            for part in (["Y"], ["Y", "R"]):
                lhs = mutual_information(out, part, ["W", "W'"])
                rhs = lam * mutual_information(s0, part, ["W"]) + (1 - lam) * mutual_information(
                    s1, part, ["W"]
                )
                worst = max(worst, abs(lhs - rhs))
        return _ok(worst, 1e-9)

    yield "flagged mixtures split information", flag_decomposition


def _classical_suite(seed: int):
    light = SolverConfig(restarts=6, max_iters=2000, seed=seed)

    def bsc_oracle():
        delta = 0.3
        table = sources.bsc_table(delta)
        grid = np.linspace(0.0, shannon_mutual_information(table), 7)
        curve = classical_ib_curve(table, 4, grid)
        worst = max(abs(pt.value - bsc_ib_rate(pt.abscissa, delta)) for pt in curve.points)
        return _ok(worst, 2e-3)

    yield "symmetric binary channel matches its oracle", bsc_oracle

    def curve_shape_and_witnesses():
        table = sources.random_classical_table(seed, (3, 3))
        grid = np.linspace(0.0, 1.0, 5) * shannon_mutual_information(table)
        curve = classical_ib_curve(table, 4, grid, light)
        if np.any(np.diff(curve.values) < -1e-9):
            return False, "values decrease along the curve"
        if not convexity_report(curve.abscissae, curve.values, 1e-6).passed:
            return False, "curve is not convex"
        worst = 0.0
        for pt in curve.points:
            i_x, i_y = channel_information_pair(table, pt.witness.rows)
            worst = max(worst, abs(i_x - pt.value), abs(i_y - pt.achieved_constraint))
        return _ok(worst, 1e-9, "witness replay gap")

    yield "bottleneck curve shape and witnesses", curve_shape_and_witnesses

    def funnel_floor():
        table = sources.random_classical_table(seed + 1, (3, 3))
        h_x = shannon_entropy(table.sum(axis=1))
        h_x_given_y = shannon_entropy(table) - shannon_entropy(table.sum(axis=0))
        curve = classical_pf_curve(table, 5, np.linspace(0.0, h_x, 4), light)
        worst = 0.0
        for pt in curve.points:
            floor = max(0.0, pt.abscissa - h_x_given_y)
            worst = max(worst, floor - pt.value)
        return _ok(worst, 1e-6, "floor violation")

    yield "funnel respects its leak floor", funnel_floor

    def funnel_identity():
        curve = classical_pf_curve(
            sources.perfectly_correlated_table(2), 4, np.linspace(0.0, 1.0, 4), light
        )
        worst = max(abs(pt.value - pt.abscissa) for pt in curve.points)
        return _ok(worst, 1e-3)

    yield "correlated bits leak one for one", funnel_identity

    def determinism():
        table = sources.bsc_table(0.2)
        grid = np.array([0.3, 0.8]) * shannon_mutual_information(table)
        a = classical_ib_curve(table, 4, grid, light)
        b = classical_ib_curve(table, 4, grid, light)
        same = np.array_equal(a.values, b.values) and a.meta["cloud"] == b.meta["cloud"]
        return same, "identical reruns" if same else "reruns disagree"

    yield "seeded runs are reproducible", determinism


def _quantum_suite(seed: int):
    light = SolverConfig(
        restarts=4, max_iters=40, tol=1e-6, seed=seed, d_W=2, d_V=4, beta_grid=(0.0, 1.0, 2.0, 6.0)
    )

    def dual_route():
        rho = sources.rho3(0.4)
        prob = _problem_from_state(rho, 3, 4)
        psi = purify(rho, ref_label="R")
        worst = 0.0
        for k in range(4):
            theta = random_channel_params(seed + k, 2, 3, 4)
            fast_yw, fast_yrw = prob.mis(theta[None, :])
            _, slow_yw, slow_yrw = ib_objective(theta, psi, 1.0, d_w=3, d_v=4)
            worst = max(worst, abs(fast_yw[0] - slow_yw), abs(fast_yrw[0] - slow_yrw))
        return _ok(worst, 1e-10)

    yield "batched and object routes agree", dual_route

    def equivalence():
        rho = sources.rho3(0.4)
        worst = 0.0
        for k in range(10):
            theta = random_channel_params(seed + k, 2, 3, 4)
            worst = max(worst, equivalence_check(theta, rho, d_w=3, d_v=4).gap)
        return _ok(worst, 1e-8)

    yield "mirror and reference reads coincide", equivalence

    def pure_identity_line():
        psi = sources.random_pure2q(seed)
        curve = quantum_ib_curve(psi.to_density(), light, grid=None)
        unit = normalize_curve(curve, psi.to_density(), "ib")
        worst = max(abs(pt.value - pt.a) for pt in unit.points)
        return _ok(worst, 5e-3)

    yield "pure sources cost exactly their information", pure_identity_line

    def curve_properties():
        rho = sources.rho3(0.4)
        curve = quantum_ib_curve(rho, light, grid=np.linspace(0.0, 0.8, 5))
        if not convexity_check(curve).passed:
            return False, "envelope is not convex"
        worst = 0.0
        for pt in curve.points:
            i_yw, i_yrw = witness_information_pair(rho, pt)
            worst = max(worst, abs(i_yw - pt.achieved_constraint), abs(i_yrw - pt.value))
            if pt.converged and pt.achieved_constraint < pt.a - 1e-6:
                return False, f"converged point misses its target at a={pt.a:.3f}"
        return _ok(worst, 1e-9, "witness replay gap")

    yield "curve convexity and witness replay", curve_properties


def _rate_region_suite(seed: int):
    light = SolverConfig(
        restarts=4, max_iters=40, tol=1e-6, seed=seed, d_W=2, d_V=4, beta_grid=(0.0, 1.0, 2.0, 6.0)
    )

    def purity_identity():
        psi = purify(sources.rho3(0.4), ref_label="R")
        worst = 0.0
        for k in range(10):
            theta = random_channel_params(seed + k, 2, 3, 4)
            worst = max(worst, purity_complement_check(theta, psi, d_w=3, d_v=4))
        return _ok(worst, 1e-9)

    yield "complement identity on random channels", purity_identity

    def correlated_bits():
        rho = embed_classical_joint(sources.perfectly_correlated_table(2))
        boundary = wak_boundary(rho, [0.25, 0.5], light)
        worst = max(
            abs(boundary.points[0].q_y - 0.75), abs(boundary.points[1].q_y - 0.5)
        )
        return _ok(worst, 1e-2)

    yield "copying a bit costs half a qubit", correlated_bits

    def product_flat():
        a = sources.random_density(seed, (2,), ("X",))
        b = sources.random_density(seed + 1, (2,), ("Y",))
        prod = tensor_product(a, b)
        h_y = von_neumann_entropy(b).value
        boundary = wak_boundary(prod, [0.05, 0.2], light)
        worst = max(abs(pt.q_y - h_y) for pt in boundary)
        return _ok(worst, 1e-2)

    yield "product sources gain nothing from the helper", product_flat

    def additivity_band():
        report = additivity_check(sources.rho3(0.4), [0.25, 0.45], light)
        low = min(report.differences)
        high = max(report.differences)
        okay = report.passed and -2e-2 <= low and high <= 1e-6
        return okay, f"differences in [{low:.2e}, {high:.2e}] (band [-2e-2, 1e-6])"

    yield "two copies buy what one copy does", additivity_band


_REGISTRY = {
    "states": _states_suite,
    "channels": _channels_suite,
    "classical": _classical_suite,
    "quantum": _quantum_suite,
    "rate-region": _rate_region_suite,
}


def suite_names() -> tuple:
    return tuple(_REGISTRY)


def run_suite(which: str = "all", seed: int = 7) -> list:
    """Run one named suite, or all of them, and collect CheckResults."""
    if which == "all":
        selected = list(_REGISTRY)
    elif which in _REGISTRY:
        selected = [which]
    else:
        known = ", ".join(sorted(_REGISTRY) + ["all"])
        raise ValidationError(f"unknown suite {which!r}; choose one of: {known}")
    results = []
    for suite in selected:
        for name, fn in _REGISTRY[suite](int(seed)):
            try:
                passed, detail = fn()
            except Exception as exc:  # a crash is a failing check, not an abort
                passed, detail = False, f"{type(exc).__name__}: {exc}"
            results.append(CheckResult(suite=suite, name=name, passed=bool(passed), detail=str(detail)))
    return results
