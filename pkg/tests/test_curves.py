"""Curve container invariants and envelope geometry."""

import numpy as np
import pytest

from bottleneck_lab.curves import (
    Curve,
    CurvePoint,
    SolverConfig,
    convexity_report,
    fingerprint,
    lower_envelope,
    upper_envelope,
)
from bottleneck_lab.errors import ValidationError


def _pt(a, v):
    return CurvePoint(abscissa=a, value=v, witness=None, achieved_constraint=a, converged=True)


class TestCurve:
    def test_strictly_increasing_required(self):
        with pytest.raises(ValidationError, match="strictly increasing"):
            Curve((_pt(0.0, 0.0), _pt(0.0, 1.0)))

    def test_finite_required(self):
        with pytest.raises(ValidationError, match="finite"):
            Curve((_pt(0.0, 0.0), _pt(1.0, np.inf)))

    def test_arrays_round_trip(self):
        c = Curve((_pt(0.0, 0.0), _pt(0.5, 0.2), _pt(1.0, 0.9)))
        assert np.array_equal(c.abscissae, [0.0, 0.5, 1.0])
        assert np.array_equal(c.values, [0.0, 0.2, 0.9])
        assert len(c) == 3


class TestSolverConfig:
    def test_defaults_valid(self):
        cfg = SolverConfig()
        assert cfg.restarts == 20 and cfg.tol > 0

    def test_restarts_floor(self):
        with pytest.raises(ValidationError, match="restarts"):
            SolverConfig(restarts=0)

    def test_tol_positive(self):
        with pytest.raises(ValidationError, match="tol"):
            SolverConfig(tol=0.0)

    def test_dw_floor(self):
        with pytest.raises(ValidationError, match="d_W"):
            SolverConfig(d_W=0)

    def test_digest_stable_and_sensitive(self):
        assert SolverConfig(seed=1).digest() == SolverConfig(seed=1).digest()
        assert SolverConfig(seed=1).digest() != SolverConfig(seed=2).digest()


class TestEnvelope:
    def test_hull_drops_dominated_points(self):
        xs = [0.0, 0.5, 1.0]
        ys = [0.0, 0.9, 1.0]  # middle point lies above the chord
        env = lower_envelope(xs, ys)
        assert list(env.vertex_index) == [0, 2]

    def test_keeps_convex_points(self):
        xs = [0.0, 0.5, 1.0]
        ys = [0.0, 0.1, 1.0]
        env = lower_envelope(xs, ys)
        assert list(env.vertex_index) == [0, 1, 2]

    def test_duplicate_abscissa_keeps_lower(self):
        env = lower_envelope([0.0, 0.0, 1.0], [0.3, 0.1, 0.5])
        assert list(env.vertex_index) == [1, 2]

    def test_interpolation_weights(self):
        env = lower_envelope([0.0, 1.0], [0.0, 2.0])
        (ev,) = env.evaluate([0.25])
        assert ev.value == pytest.approx(0.5)
        assert ev.left == 0 and ev.right == 1
        assert ev.weight == pytest.approx(0.25)

    def test_clamps_outside_range(self):
        env = lower_envelope([0.2, 1.0], [0.1, 0.5])
        lo, hi = env.evaluate([0.0, 2.0])
        assert lo.value == pytest.approx(0.1) and lo.clamped
        assert hi.value == pytest.approx(0.5) and hi.clamped

    def test_upper_envelope_mirrors_lower(self):
        xs = [0.0, 0.5, 1.0]
        ys = [0.0, 0.9, 1.0]
        env = upper_envelope(xs, ys)
        assert list(env.vertex_index) == [0, 1, 2]
        (ev,) = env.evaluate([0.75])
        assert ev.value == pytest.approx(0.95)

    def test_random_clouds_envelope_below_cloud(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            xs = rng.uniform(0, 1, size=30)
            ys = rng.uniform(0, 1, size=30)
            env = lower_envelope(xs, ys)
            vals = [ev.value for ev in env.evaluate(xs)]
            assert np.all(np.asarray(vals) <= ys + 1e-12)
            rep = convexity_report(env.vertex_x, env.vertex_y, 1e-9) if len(env.vertex_x) >= 3 else None
            if rep is not None:
                assert rep.passed


class TestConvexityReport:
    def test_convex_example(self):
        rep = convexity_report([0.0, 0.5, 1.0], [0.0, 0.2, 0.6])
        assert rep.min_second_difference == pytest.approx(0.2)
        assert rep.passed

    def test_concave_example(self):
        rep = convexity_report([0.0, 0.5, 1.0], [0.0, 0.6, 0.8])
        assert rep.min_second_difference == pytest.approx(-0.4)
        assert not rep.passed

    def test_needs_three_points(self):
        with pytest.raises(ValidationError, match="3 points"):
            convexity_report([0.0, 1.0], [0.0, 1.0])


class TestFingerprint:
    def test_stable_across_equivalent_inputs(self):
        assert fingerprint({"a": 1, "b": [1.5, 2.0]}) == fingerprint({"b": [1.5, 2.0], "a": 1})

    def test_arrays_and_scalars_normalize(self):
        assert fingerprint({"g": np.array([1.0, 2.0])}) == fingerprint({"g": [1.0, 2.0]})

    def test_complex_arrays_serialize(self):
        # nested complex scalars come out of ndarray.tolist(); they must
        # be folded to [re, im] pairs before hashing
        blob = {"w": np.array([[1 + 2j, 0.5j], [0.0, 1.0]])}
        assert fingerprint(blob) == fingerprint({"w": [[[1.0, 2.0], [0.0, 0.5]], [[0.0, 0.0], [1.0, 0.0]]]})
