"""Stinespring parameterization, channel application, and special constructions."""

import numpy as np
import pytest

from bottleneck_lab import sources
from bottleneck_lab.channels import (
    ConditionalChannel,
    StinespringIsometry,
    antihermitian_from_params,
    apply_kraus,
    classical_to_quantum_channel,
    flagged_mix,
    isometry_from_params,
    pack_antihermitian,
    params_from_isometry,
    random_channel_params,
    stinespring_extend,
)
from bottleneck_lab.errors import ValidationError
from bottleneck_lab.states import (
    DensityOperator,
    mutual_information,
    partial_trace,
    purify,
    von_neumann_entropy,
)


def shannon_mi(joint):
    joint = np.asarray(joint, dtype=float)
    px = joint.sum(axis=1, keepdims=True)
    py = joint.sum(axis=0, keepdims=True)
    mask = joint > 0
    return float((joint[mask] * np.log2(joint[mask] / (px @ py)[mask])).sum())


class TestParameterization:
    def test_zero_theta_identity_channel(self):
        iso = isometry_from_params(np.zeros(4), 2, 2, 1)
        assert np.allclose(iso.matrix, np.eye(2), atol=1e-12)

    def test_columns_orthonormal(self):
        for seed in range(20):
            theta = random_channel_params(seed, 2, 3, 4)
            iso = isometry_from_params(theta, 2, 3, 4)
            defect = np.max(np.abs(iso.matrix.conj().T @ iso.matrix - np.eye(2)))
            assert defect <= 1e-10

    def test_channel_output_is_valid_state(self):
        rho = DensityOperator(np.eye(2) / 2, (2,), ("X",))
        for seed in range(10):
            iso = isometry_from_params(random_channel_params(seed, 2, 2, 2), 2, 2, 2)
            out = iso.apply_to_density(rho, "X")
            # re-validate through the constructor invariants
            DensityOperator(out.matrix, out.dims, out.labels)

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValidationError, match="length"):
            isometry_from_params(np.zeros(5), 2, 2, 1)

    def test_too_small_output_rejected(self):
        with pytest.raises(ValidationError, match="no isometry"):
            isometry_from_params(np.zeros(1), 2, 1, 1)

    def test_pack_unpack_roundtrip(self):
        rng = np.random.default_rng(0)
        theta = rng.normal(size=36)
        a = antihermitian_from_params(theta, 6)
        assert np.max(np.abs(a + a.conj().T)) <= 1e-15
        assert np.allclose(pack_antihermitian(a), theta)

    def test_params_from_isometry_roundtrip(self):
        for seed, (di, dw, dv) in enumerate([(2, 2, 2), (2, 3, 4), (3, 3, 3)]):
            iso = isometry_from_params(random_channel_params(seed, di, dw, dv), di, dw, dv)
            theta = params_from_isometry(iso.matrix, di, dw, dv)
            back = isometry_from_params(theta, di, dw, dv)
            assert np.max(np.abs(back.matrix - iso.matrix)) <= 1e-10


class TestStinespringExtend:
    def setup_method(self):
        self.psi = purify(sources.rho3(0.4), "R")

    def test_identity_isometry_relabels_only(self):
        iso = isometry_from_params(np.zeros(4), 2, 2, 1)
        out = stinespring_extend(iso, self.psi, "X")
        assert out.labels == ("R", "W", "V", "Y")
        assert np.allclose(out.vector, self.psi.vector)

    def test_output_pure_and_normalized(self):
        for seed in range(5):
            iso = isometry_from_params(random_channel_params(seed, 2, 3, 4), 2, 3, 4)
            out = stinespring_extend(iso, self.psi, "X")
            assert abs(np.linalg.norm(out.vector) - 1.0) <= 1e-12
            s = von_neumann_entropy(out.to_density())
            assert s.value <= 1e-9

    def test_matches_kraus_oracle(self):
        # independent path: K_i picks environment component i of the isometry
        for seed in range(10):
            iso = isometry_from_params(random_channel_params(seed, 2, 2, 3), 2, 2, 3)
            ext = partial_trace(stinespring_extend(iso, self.psi, "X"), ["W", "Y", "R"])
            kr = iso.kraus()
            assert kr.shape == (3, 2, 2)
            via_kraus = apply_kraus(sources.rho3(0.4), kr, "X", "W")
            # same subsystems, possibly different order: compare by name
            a = partial_trace(ext, ["W", "Y"]).matrix
            b = partial_trace(via_kraus, ["W", "Y"]).matrix
            assert np.max(np.abs(a - b)) <= 1e-10

    def test_dimension_mismatch_rejected(self):
        iso = isometry_from_params(np.zeros(9), 3, 3, 1)
        with pytest.raises(ValidationError, match="dimension"):
            stinespring_extend(iso, self.psi, "X")

    def test_unknown_subsystem_rejected(self):
        iso = isometry_from_params(np.zeros(4), 2, 2, 1)
        with pytest.raises(ValidationError, match="unknown"):
            stinespring_extend(iso, self.psi, "Q")

    def test_label_collision_rejected(self):
        iso = isometry_from_params(np.zeros(4), 2, 2, 1)
        with pytest.raises(ValidationError, match="already present"):
            stinespring_extend(iso, self.psi, "X", w_label="R")


class TestFlaggedMix:
    def setup_method(self):
        self.psi = purify(sources.rho3(0.4), "R")
        self.n0 = isometry_from_params(random_channel_params(11, 2, 2, 2), 2, 2, 2)
        self.n1 = isometry_from_params(random_channel_params(12, 2, 2, 2), 2, 2, 2)

    def test_extreme_lambdas(self):
        for lam, iso, flag in [(1.0, self.n0, 0), (0.0, self.n1, 1)]:
            out = flagged_mix(self.n0, self.n1, lam).apply(self.psi, "X")
            flag_red = partial_trace(out, ["W'"])
            expect = np.zeros((2, 2))
            expect[flag, flag] = 1.0
            assert np.allclose(flag_red.matrix, expect, atol=1e-12)
            wy = partial_trace(out, ["W", "Y"]).matrix
            branch = partial_trace(stinespring_extend(iso, self.psi, "X"), ["W", "Y"]).matrix
            assert np.max(np.abs(wy - branch)) <= 1e-10

    def test_mi_decomposition_both_forms(self):
        rng = np.random.default_rng(13)
        for _ in range(10):
            lam = float(rng.uniform())
            s0 = stinespring_extend(self.n0, self.psi, "X")
            s1 = stinespring_extend(self.n1, self.psi, "X")
            out = flagged_mix(self.n0, self.n1, lam).apply(self.psi, "X")
            for part in (["Y"], ["Y", "R"]):
                lhs = mutual_information(out, part, ["W", "W'"])
                rhs = lam * mutual_information(s0, part, ["W"]) \
                    + (1 - lam) * mutual_information(s1, part, ["W"])
                assert lhs == pytest.approx(rhs, abs=1e-9)

    def test_trace_preserved(self):
        out = flagged_mix(self.n0, self.n1, 0.42).apply(self.psi, "X")
        assert np.trace(out.matrix).real == pytest.approx(1.0, abs=1e-10)

    def test_lambda_out_of_range_rejected(self):
        with pytest.raises(ValidationError, match="lambda"):
            flagged_mix(self.n0, self.n1, 1.5)

    def test_mismatched_branches_rejected(self):
        other = isometry_from_params(random_channel_params(1, 2, 3, 2), 2, 3, 2)
        with pytest.raises(ValidationError, match="disagree"):
            flagged_mix(self.n0, other, 0.5)


class TestClassicalChannel:
    def test_identity_rows_dephase_only(self):
        rho = sources.bsc_state(0.1)
        iso = classical_to_quantum_channel(ConditionalChannel(np.eye(2)))
        out = iso.apply_to_density(rho, "X")
        assert np.max(np.abs(out.matrix - rho.matrix)) <= 1e-10

    def test_constant_rows_kill_information(self):
        rho = sources.bsc_state(0.1)
        iso = classical_to_quantum_channel(ConditionalChannel(np.array([[0.5, 0.5], [0.5, 0.5]])))
        out = iso.apply_to_density(rho, "X")
        assert mutual_information(out, ["Y"], ["W"]) <= 1e-9

    def test_bsc_row_channel_matches_shannon(self):
        delta, flip = 0.1, 0.25
        rho = sources.bsc_state(delta)
        rows = np.array([[1 - flip, flip], [flip, 1 - flip]])
        iso = classical_to_quantum_channel(ConditionalChannel(rows))
        out = iso.apply_to_density(rho, "X")
        joint_yw = sources.bsc_table(delta).T @ rows  # p(y, w)
        assert mutual_information(out, ["Y"], ["W"]) == pytest.approx(
            shannon_mi(joint_yw), abs=1e-10)

    def test_marginals_reproduced_exactly(self):
        table = sources.random_classical_table(9, (3, 2))
        rho = sources.classical_joint_state(table)
        rows = np.array([[0.7, 0.2, 0.1], [0.1, 0.8, 0.1], [0.3, 0.3, 0.4]])
        iso = classical_to_quantum_channel(ConditionalChannel(rows))
        out = iso.apply_to_density(rho, "X")
        w_marg = np.diag(partial_trace(out, ["W"]).matrix).real
        expect = table.sum(axis=1) @ rows
        assert np.max(np.abs(w_marg - expect)) <= 1e-10

    def test_invalid_rows_rejected(self):
        with pytest.raises(ValidationError, match="row sums"):
            ConditionalChannel(np.array([[0.5, 0.4], [0.5, 0.5]]))
        with pytest.raises(ValidationError, match="negative"):
            ConditionalChannel(np.array([[1.1, -0.1], [0.5, 0.5]]))


class TestRandomParams:
    def test_deterministic_and_distinct(self):
        a = random_channel_params(7, 2, 3, 4)
        b = random_channel_params(7, 2, 3, 4)
        c = random_channel_params(8, 2, 3, 4)
        assert np.array_equal(a, b)
        assert np.any(a != c)
        assert a.shape == (144,)
        assert np.all(np.abs(a) <= np.pi)

    def test_hundred_valid_isometries(self):
        for seed in range(100):
            theta = random_channel_params(seed, 2, 2, 2)
            iso = isometry_from_params(theta, 2, 2, 2)
            defect = np.max(np.abs(iso.matrix.conj().T @ iso.matrix - np.eye(2)))
            assert defect <= 1e-10


class TestChannelProperties:
    def test_data_processing_on_rho3(self):
        rho = sources.rho3(0.4)
        psi = purify(rho, "R")
        i_yx = mutual_information(rho, ["Y"], ["X"])
        for seed in range(100):
            iso = isometry_from_params(random_channel_params(seed, 2, 2, 2), 2, 2, 2)
            sig = stinespring_extend(iso, psi, "X")
            assert mutual_information(sig, ["Y"], ["W"]) <= i_yx + 1e-9

    def test_trace_preservation(self):
        rho = sources.rho3(0.3)
        for seed in range(20):
            iso = isometry_from_params(random_channel_params(seed, 2, 3, 2), 2, 3, 2)
            out = iso.apply_to_density(rho, "X")
            assert abs(np.trace(out.matrix).real - 1.0) <= 1e-10
