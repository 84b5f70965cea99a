"""Quantum bottleneck and funnel solvers against identities and anchors."""

import dataclasses

import numpy as np
import pytest

from bottleneck_lab import sources
from bottleneck_lab.channels import isometry_from_params, params_from_isometry, random_channel_params
from bottleneck_lab.classical_ib import classical_ib_curve, shannon_mutual_information
from bottleneck_lab.curves import Curve, CurvePoint, SolverConfig
from bottleneck_lab.errors import InfeasibleError, ValidationError
from bottleneck_lab.solver import (
    QIBPoint,
    _anchor_isometries,
    _matrices_from_params,
    _mixture_isometry,
    _problem_from_state,
    convexity_check,
    dimension_study,
    equivalence_check,
    ib_objective,
    normalize_curve,
    quantum_ib_curve,
    quantum_pf_curve,
    witness_information_pair,
)

# finite-difference iterations are expensive; unit tests run skinny configs
# and leave production-quality budgets to the acceptance suite
LIGHT = SolverConfig(restarts=4, max_iters=40, tol=1e-6, seed=3, d_W=2, d_V=4,
                     beta_grid=(0.0, 1.0, 2.0, 6.0))


class TestBatchedIsometries:
    def test_matches_scalar_builder(self):
        for d_in, d_w, d_v in [(2, 3, 4), (2, 2, 2), (4, 4, 8), (2, 2, 1), (3, 2, 5)]:
            thetas = np.array([random_channel_params(s, d_in, d_w, d_v) for s in range(3)])
            mats = _matrices_from_params(thetas, d_in, d_w, d_v)
            for k in range(3):
                ref = isometry_from_params(thetas[k], d_in, d_w, d_v).matrix
                np.testing.assert_allclose(mats[k], ref, atol=1e-13)

    def test_columns_stay_orthonormal(self):
        thetas = np.array([random_channel_params(s, 3, 2, 5) for s in range(4)])
        mats = _matrices_from_params(thetas, 3, 2, 5)
        gram = mats.conj().transpose(0, 2, 1) @ mats
        np.testing.assert_allclose(gram, np.broadcast_to(np.eye(3), gram.shape), atol=1e-12)

    def test_rejects_wrong_length(self):
        with pytest.raises(ValidationError, match="length"):
            _matrices_from_params(np.zeros((1, 10)), 2, 3, 4)


class TestFastSlowAgreement:
    def test_mis_match_object_pipeline(self):
        rho = sources.rho3(0.4)
        prob = _problem_from_state(rho, 3, 6)
        for seed in range(5):
            theta = random_channel_params(seed, 2, 3, 6)
            i_yw, i_yrw = prob.mis(theta[None, :])
            loss, o_yw, o_yrw = ib_objective(theta, rho, 0.7, d_w=3, d_v=6)
            assert abs(i_yw[0] - o_yw) <= 1e-12
            assert abs(i_yrw[0] - o_yrw) <= 1e-12
            assert abs(loss - (o_yrw - 0.7 * o_yw)) <= 1e-12

    def test_gradient_step_is_converged(self):
        # central differences at the contract step agree with a 10x finer
        # recomputation to 1e-3 relative error
        rho = sources.rho3(0.4)
        prob = _problem_from_state(rho, 2, 4)
        theta = random_channel_params(9, 2, 2, 4)

        def grad(step):
            shift = np.eye(theta.size) * step
            yw_up, yrw_up = prob.mis(theta[None, :] + shift)
            yw_dn, yrw_dn = prob.mis(theta[None, :] - shift)
            loss_up = yrw_up - 0.5 * yw_up
            loss_dn = yrw_dn - 0.5 * yw_dn
            return (loss_up - loss_dn) / (2.0 * step)

        g_coarse = grad(1e-5)
        g_fine = grad(1e-6)
        rel = np.linalg.norm(g_coarse - g_fine) / np.linalg.norm(g_fine)
        assert rel <= 1e-3


class TestObjectiveExamples:
    def test_constant_channel_zero(self):
        rho = sources.rho3(0.4)
        loss, i_yw, i_yrw = ib_objective(np.zeros(4), rho, 0.0, d_w=1, d_v=2)
        assert abs(loss) <= 1e-12
        assert abs(i_yw) <= 1e-12 and abs(i_yrw) <= 1e-12

    def test_identity_channel_doubles_entropy(self):
        rho = sources.rho3(0.4)
        prob = _problem_from_state(rho, 2, 1)
        loss, _, i_yrw = ib_objective(np.zeros(4), rho, 0.0, d_w=2, d_v=1)
        assert abs(loss - 2.0 * prob.s_x) <= 1e-12
        assert abs(i_yrw - 2.0 * prob.s_x) <= 1e-12

    def test_random_channels_finite_nonnegative(self):
        rho = sources.rho3(0.4)
        for seed in range(8):
            theta = random_channel_params(seed, 2, 3, 6)
            loss, i_yw, i_yrw = ib_objective(theta, rho, 1.3, d_w=3, d_v=6)
            assert np.isfinite(loss)
            assert i_yw >= -1e-9 and i_yrw >= -1e-9
            assert i_yrw >= i_yw - 1e-9  # reference can only add correlation

    def test_needs_x_and_y_labels(self):
        with pytest.raises(ValidationError, match="label"):
            ib_objective(np.zeros(4), sources.bell_pair(), 0.0, d_w=1, d_v=2)


class TestAnchors:
    def test_anchor_values(self):
        rho = sources.rho3(0.4)
        prob = _problem_from_state(rho, 3, 6)
        anchors = _anchor_isometries(prob)
        assert len(anchors) == 3
        vals = []
        for mat, _ in anchors:
            theta = params_from_isometry(mat, 2, 3, 6)
            i_yw, i_yrw = prob.mis(theta[None, :])
            vals.append((i_yw[0], i_yrw[0]))
        assert vals[0] == pytest.approx((0.0, 0.0), abs=1e-12)
        assert vals[1] == pytest.approx((prob.i_xy, 2 * prob.s_x), abs=1e-10)

    def test_mixture_is_exactly_linear(self):
        rho = sources.rho3(0.3)
        prob = _problem_from_state(rho, 2, 4)
        rng = np.random.default_rng(17)
        sub = _problem_from_state(rho, 4, 8)
        for trial in range(10):
            t0 = random_channel_params(2 * trial, 2, 2, 4)
            t1 = random_channel_params(2 * trial + 1, 2, 2, 4)
            lam = float(rng.uniform())
            a0, b0 = prob.mis(t0[None, :])
            a1, b1 = prob.mis(t1[None, :])
            m0 = _matrices_from_params(t0[None, :], 2, 2, 4)[0]
            m1 = _matrices_from_params(t1[None, :], 2, 2, 4)[0]
            theta = params_from_isometry(_mixture_isometry(m0, m1, lam, 2, 4), 2, 4, 8)
            am, bm = sub.mis(theta[None, :])
            assert abs(am[0] - ((1 - lam) * a0[0] + lam * a1[0])) <= 1e-9
            assert abs(bm[0] - ((1 - lam) * b0[0] + lam * b1[0])) <= 1e-9


@pytest.fixture(scope="module")
def rho3_curve():
    rho = sources.rho3(0.4)
    return rho, quantum_ib_curve(rho, LIGHT, grid=np.linspace(0.0, 0.86, 7))


class TestBottleneckCurve:
    def test_zero_abscissa_is_free(self, rho3_curve):
        _, curve = rho3_curve
        assert curve.points[0].a == 0.0
        assert abs(curve.points[0].value) <= 1e-9

    def test_envelope_convex_and_nondecreasing(self, rho3_curve):
        _, curve = rho3_curve
        values = curve.values
        assert np.all(np.diff(values) >= -1e-9)
        assert convexity_check(curve, 1e-3).passed

    def test_witnesses_reproduce_points(self, rho3_curve):
        rho, curve = rho3_curve
        for pt in curve.points:
            i_yw, i_yrw = witness_information_pair(rho, pt)
            assert abs(i_yrw - pt.value) <= 1e-9
            assert abs(i_yw - pt.achieved_constraint) <= 1e-9
            if pt.converged:
                assert pt.achieved_constraint >= pt.a - 1e-6

    def test_value_dominates_constraint(self, rho3_curve):
        # I(YR;W) >= I(Y;W), so the curve can never dip below the diagonal
        _, curve = rho3_curve
        for pt in curve.points:
            assert pt.value >= pt.a - 1e-6

    def test_deterministic(self):
        rho = sources.rho3(0.4)
        grid = np.linspace(0.0, 0.8, 5)
        one = quantum_ib_curve(rho, LIGHT, grid=grid)
        two = quantum_ib_curve(rho, LIGHT, grid=grid)
        np.testing.assert_array_equal(one.values, two.values)
        assert one.meta["cloud"] == two.meta["cloud"]

    def test_grid_beyond_mutual_information(self):
        rho = sources.rho3(0.4)
        with pytest.raises(InfeasibleError, match="exceeds"):
            quantum_ib_curve(rho, LIGHT, grid=[0.0, 1.5])

    def test_pure_state_identity_line(self):
        rho = sources.random_pure2q(11).to_density()
        curve = quantum_ib_curve(rho, LIGHT, grid=None)
        normalized = normalize_curve(curve, rho, "ib")
        for pt in normalized.points:
            assert abs(pt.value - pt.a) <= 5e-3
        assert abs(normalized.points[-1].a - 1.0) <= 1e-9
        assert abs(normalized.points[-1].value - 1.0) <= 1e-9


class TestFunnelCurve:
    def test_zero_threshold_free(self):
        rho = sources.rho3(0.4)
        curve = quantum_pf_curve(rho, LIGHT, grid=[0.0, 0.4, 0.9])
        assert abs(curve.points[0].value) <= 1e-9
        assert curve.meta["kind"] == "quantum-pf"
        assert convexity_check(curve, 1e-3).passed

    def test_pure_state_dual_identity_line(self):
        rho = sources.random_pure2q(7).to_density()
        curve = quantum_pf_curve(rho, LIGHT, grid=None, dual=True)
        assert curve.meta["kind"] == "quantum-pf-dual"
        normalized = normalize_curve(curve, rho, "pf")
        for pt in normalized.points:
            assert abs(pt.value - pt.a) <= 5e-3

    def test_dual_cap_direction(self):
        rho = sources.rho3(0.4)
        curve = quantum_pf_curve(rho, LIGHT, grid=[0.0, 0.3, 0.7], dual=True)
        for pt in curve.points:
            if pt.converged:
                assert pt.achieved_constraint <= pt.a + 1e-6
        # attained maxima grow with the cap
        assert np.all(np.diff(curve.values) >= -1e-9)

    def test_funnel_threshold_beyond_reach(self):
        rho = sources.rho3(0.4)
        with pytest.raises(InfeasibleError, match="exceeds"):
            quantum_pf_curve(rho, LIGHT, grid=[0.0, 3.0])


class TestNormalization:
    def test_classical_endpoint_half(self):
        table = sources.random_classical_table(5)
        rho = sources.classical_joint_state(table)
        prob = _problem_from_state(rho, 3, 6)
        cfg = dataclasses.replace(LIGHT, d_W=3, d_V=6)
        curve = quantum_ib_curve(rho, cfg, grid=[0.0, 0.5 * prob.i_xy, prob.i_xy])
        normalized = normalize_curve(curve, rho, "ib")
        assert abs(normalized.points[-1].value - 0.5) <= 1e-2

    def test_classical_channels_stay_below_half(self):
        # bottleneck variables produced by classical channels cannot beat
        # H(X) of compression, i.e. 0.5 after normalization
        table = sources.random_classical_table(8)
        rho = sources.classical_joint_state(table)
        grid = np.linspace(0.0, 1.0, 7) * shannon_mutual_information(table)
        classical = classical_ib_curve(table, 4, grid, SolverConfig(restarts=6, seed=2))
        normalized = normalize_curve(classical, rho, "ib")
        assert all(pt.value <= 0.5 + 1e-6 for pt in normalized.points)

    def test_rejects_zero_mutual_information(self):
        table = np.outer([0.5, 0.5], [0.5, 0.5])
        rho = sources.classical_joint_state(table)
        curve = Curve(
            points=(CurvePoint(0.0, 0.0, None, 0.0, True), CurvePoint(1.0, 1.0, None, 1.0, True)),
            meta={"kind": "classical-ib"},
        )
        with pytest.raises(ValidationError, match="zero"):
            normalize_curve(curve, rho, "ib")

    def test_rejects_wrong_kind_for_mode(self):
        rho = sources.rho3(0.4)
        curve = quantum_pf_curve(rho, LIGHT, grid=[0.0, 0.4])
        with pytest.raises(ValidationError, match="cannot normalize"):
            normalize_curve(curve, rho, "pf")
        with pytest.raises(ValidationError, match="cannot normalize"):
            normalize_curve(curve, rho, "ib")
        with pytest.raises(ValidationError, match="mode"):
            normalize_curve(curve, rho, "sideways")


class TestEquivalence:
    def test_identity_channel(self):
        rho = sources.rho3(0.4)
        prob = _problem_from_state(rho, 2, 1)
        report = equivalence_check(np.zeros(4), rho, d_w=2, d_v=1)
        assert abs(report.lhs - 2.0 * prob.s_x) <= 1e-9
        assert abs(report.rhs - 2.0 * prob.s_x) <= 1e-9
        assert report.gap <= 1e-9

    def test_constant_channel(self):
        report = equivalence_check(np.zeros(4), sources.rho3(0.4), d_w=1, d_v=2)
        assert abs(report.lhs) <= 1e-9 and abs(report.rhs) <= 1e-9

    def test_random_channels(self):
        rho = sources.rho3(0.4)
        worst = 0.0
        for seed in range(20):
            theta = random_channel_params(seed, 2, 3, 6)
            worst = max(worst, equivalence_check(theta, rho, d_w=3, d_v=6).gap)
        assert worst <= 1e-8


class TestConvexityCheck:
    def _curve(self, triples):
        pts = tuple(CurvePoint(a, v, None, a, True) for a, v in triples)
        return Curve(points=pts, meta={})

    def test_convex_example_passes(self):
        report = convexity_check(self._curve([(0, 0), (0.5, 0.2), (1, 0.6)]))
        assert report.passed
        assert report.min_second_difference == pytest.approx(0.2, abs=1e-12)

    def test_concave_example_fails(self):
        report = convexity_check(self._curve([(0, 0), (0.5, 0.6), (1, 0.8)]))
        assert not report.passed
        assert report.min_second_difference == pytest.approx(-0.4, abs=1e-12)

    def test_needs_three_points(self):
        with pytest.raises(ValidationError, match="3 points"):
            convexity_check(self._curve([(0, 0), (1, 1)]))


class TestDimensionStudy:
    def test_monotone_in_bottleneck_dimension(self):
        rho = sources.rho3(0.2)
        cfg = SolverConfig(restarts=2, max_iters=8, tol=1e-6, seed=5, beta_grid=(0.0, 1.0, 4.0))
        curves = dimension_study(rho, [2, 3], cfg, grid=np.linspace(0.0, 0.5, 5), refine=False)
        assert [c.meta["d_w"] for c in curves] == [2, 3]
        assert np.all(curves[1].values <= curves[0].values + 1e-6)
        # study points are never time shared; the witness size is the stated size
        for c in curves:
            assert all(p.witness_d_w == c.meta["d_w"] for p in c.points)

    def test_saturates_on_solved_classical_state(self):
        # perfectly correlated bits: the copy anchor pins both endpoints, and
        # the embedded warm start makes the larger bottleneck exactly as good
        rho = sources.classical_joint_state(sources.perfectly_correlated_table(2))
        cfg = SolverConfig(restarts=1, max_iters=3, tol=1e-6, seed=1, beta_grid=(0.0, 1.0))
        curves = dimension_study(rho, [4, 5], cfg, grid=np.linspace(0.0, 1.0, 5), refine=False)
        gap = np.max(np.abs(curves[1].values - curves[0].values))
        assert gap <= 1e-3
        for c in curves:
            assert c.meta["restricted"] is True
            assert c.points[0].value == pytest.approx(0.0, abs=1e-9)
            assert c.points[-1].value == pytest.approx(1.0, abs=1e-9)
            # a single witness cannot beat data processing: I(YR;W) >= I(Y;W)
            assert np.all(c.values >= np.array([p.achieved_constraint for p in c.points]) - 1e-9)

    def test_rejects_unsorted_dims(self):
        with pytest.raises(ValidationError, match="increasing"):
            dimension_study(sources.rho3(0.4), [3, 2], LIGHT)


class TestPointContainer:
    def test_witness_params_read_only(self):
        pt = QIBPoint(0.1, 0.2, np.zeros(4), 0.1, True, 1, 2)
        assert pt.abscissa == pt.a
        with pytest.raises(ValueError):
            pt.witness_params[0] = 1.0
