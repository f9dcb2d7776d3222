import math

import numpy as np
import pytest

from conftest import random_density
from qdiss.errors import DegenerateInputError, InvalidArgumentError
from qdiss.expsim import (
    NO_NOISE,
    NoiseModel,
    ShotConfig,
    aggregate_repetitions,
    apply_noise_step,
    reconstruct_and_project,
    run_shots,
    simulate_repetition,
    simulate_tomography,
    simulate_tpm_counts,
    state_fidelity,
    substream,
)
from qdiss.protocol import IDEAL, build_xy_quench, protocol_a, protocol_b
from qdiss.qmath import DensityMatrix, unitary_from_axis_angle
from qdiss.thermo import GibbsSpec, verify_relations

G1 = GibbsSpec()
PLUS = DensityMatrix.pure([1 / math.sqrt(2), 1 / math.sqrt(2)])


def kraus_oracle(rho, t1, t2, dt):
    """Amplitude damping then phase damping written as explicit Kraus sums."""
    gamma = 1 - math.exp(-dt / t1)
    ad = [np.array([[1, 0], [0, math.sqrt(1 - gamma)]]), np.array([[0, math.sqrt(gamma)], [0, 0]])]
    lam = math.exp(-dt * (1 / t2 - 1 / (2 * t1)))
    # phase damping with coherence factor lam
    pd = [np.diag([1, lam]), np.diag([0, math.sqrt(1 - lam ** 2)])]
    out = sum(k @ rho @ k.conj().T for k in ad)
    return sum(k @ out @ k.conj().T for k in pd)


class TestNoise:
    def test_disabled_is_identity(self):
        rho = DensityMatrix(random_density(np.random.default_rng(0)))
        assert apply_noise_step(rho, NO_NOISE, 500.0) is rho

    def test_excited_decay(self):
        m = NoiseModel(100.0, 150.0)
        out = apply_noise_step(DensityMatrix.pure([0, 1]), m, 100.0)
        assert out.matrix[1, 1].real == pytest.approx(math.exp(-1), abs=1e-15)

    def test_coherence_decay(self):
        m = NoiseModel(8327.0, 6813.0)
        out = apply_noise_step(PLUS, m, 300.0)
        assert abs(out.matrix[0, 1]) == pytest.approx(0.5 * math.exp(-300 / 6813), abs=1e-15)

    def test_matches_kraus_and_is_cptp(self):
        rng = np.random.default_rng(1)
        m = NoiseModel(50.0, 70.0)
        for _ in range(300):
            rho = random_density(rng)
            dt = rng.uniform(0, 200)
            out = apply_noise_step(DensityMatrix(rho), m, dt)
            assert np.max(np.abs(out.matrix - kraus_oracle(rho, 50.0, 70.0, dt))) <= 1e-14
            assert abs(np.trace(out.matrix) - 1) <= 1e-12

    def test_invalid(self):
        with pytest.raises(InvalidArgumentError):
            NoiseModel(100.0, 250.0)
        with pytest.raises(InvalidArgumentError):
            apply_noise_step(PLUS, NoiseModel(), -1.0)
        NoiseModel(100.0, 250.0, enabled=False)


class TestTomography:
    def test_deterministic_outcome(self):
        for shots in (1, 7, 3000):
            r = simulate_tomography(DensityMatrix.pure([1, 0]), shots, np.random.default_rng(0))
            assert r[2] == 1.0

    def test_same_seed_same_result(self):
        rho = DensityMatrix(random_density(np.random.default_rng(3)))
        a = simulate_tomography(rho, 1000, substream(5, 0, 1))
        b = simulate_tomography(rho, 1000, substream(5, 0, 1))
        assert np.array_equal(a, b)

    def test_standard_error_and_unbiasedness(self):
        rho = DensityMatrix.maximally_mixed()
        shots = 2000
        draws = np.array([simulate_tomography(rho, shots, substream(11, k)) for k in range(10000)])
        assert np.all(np.abs(draws.mean(axis=0)) <= 4 / math.sqrt(shots) / math.sqrt(len(draws)))
        assert np.allclose(draws.std(axis=0), 1 / math.sqrt(shots), rtol=0.03)

    def test_unbiased_for_generic_state(self):
        rho = DensityMatrix.from_bloch([0.3, -0.5, 0.6])
        shots = 500
        draws = np.array([simulate_tomography(rho, shots, substream(12, k)) for k in range(10000)])
        true = np.array([0.3, -0.5, 0.6])
        se = np.sqrt((1 - true ** 2) / shots / len(draws))
        assert np.all(np.abs(draws.mean(axis=0) - true) <= 4 * se)


class TestProjection:
    def test_unit_vector_unchanged(self):
        for mode in ("radial", "clip"):
            res = reconstruct_and_project([0, 0.6, 0.8], DensityMatrix.from_bloch([0, 0.6, 0.8]), mode)
            assert np.allclose(res.adjusted_state.bloch(), (0, 0.6, 0.8), atol=1e-12)
            assert res.fidelity_raw == pytest.approx(1, abs=1e-12)
            assert res.fidelity_adjusted == pytest.approx(1, abs=1e-12)

    def test_radial_long_vector(self):
        res = reconstruct_and_project([1.04, 0, 0], PLUS, "radial")
        assert np.allclose(res.adjusted_state.bloch(), (1, 0, 0), atol=1e-12)
        assert res.fidelity_raw == 1.0  # raw overlap 1.02 clipped

    def test_short_vector_fidelities(self):
        res = reconstruct_and_project([0.8, 0, 0], PLUS, "radial")
        assert res.fidelity_raw == pytest.approx(0.9, abs=1e-12)
        assert res.fidelity_adjusted == pytest.approx(1.0, abs=1e-12)
        clipped = reconstruct_and_project([0.8, 0, 0], PLUS, "clip")
        assert clipped.fidelity_adjusted == pytest.approx(0.9, abs=1e-12)

    def test_clip_long_vector(self):
        res = reconstruct_and_project([0.9, 0.6, 0.0], None, "clip")
        r = np.array(res.adjusted_state.bloch())
        assert np.linalg.norm(r) == pytest.approx(1, abs=1e-12)
        assert np.allclose(r / np.linalg.norm(r), np.array([0.9, 0.6, 0]) / np.linalg.norm([0.9, 0.6]))
        assert math.isnan(res.fidelity_raw)

    def test_zero_vector_radial(self):
        with pytest.raises(DegenerateInputError):
            reconstruct_and_project([0, 0, 0], None, "radial")

    def test_mixed_reference_uhlmann(self):
        rng = np.random.default_rng(4)
        from scipy.linalg import sqrtm

        for _ in range(100):
            a, b = random_density(rng, 0.05), random_density(rng, 0.05)
            s = sqrtm(b)
            oracle = float(np.trace(sqrtm(s @ a @ s)).real ** 2)
            assert state_fidelity(a, DensityMatrix(b)) == pytest.approx(oracle, abs=1e-9)

    def test_radial_never_worse_for_pure_truth(self):
        rng = np.random.default_rng(5)
        for _ in range(2000):
            truth = DensityMatrix(random_density(rng)).bloch().as_array()
            truth = truth / np.linalg.norm(truth)
            raw = truth * rng.uniform(1.0, 1.2) + rng.normal(scale=0.02, size=3)
            if np.linalg.norm(raw) <= 1:
                continue
            res = reconstruct_and_project(raw, DensityMatrix.from_bloch(truth), "radial")
            d_raw = np.linalg.norm(raw - truth)
            d_adj = np.linalg.norm(np.array(res.adjusted_state.bloch()) - truth)
            assert d_adj <= d_raw + 1e-12


class TestTpm:
    def test_identity_and_flip(self):
        t = simulate_tpm_counts(np.eye(2), 50, np.random.default_rng(0))
        assert np.array_equal(t.p, np.eye(2))
        t = simulate_tpm_counts(unitary_from_axis_angle([1, 0, 0], math.pi), 50, np.random.default_rng(0))
        assert np.array_equal(t.p, [[0, 1], [1, 0]])

    def test_half_flip_statistics(self):
        u = unitary_from_axis_angle([1, 0, 0], math.pi / 2)
        n = 10 ** 6
        t = simulate_tpm_counts(u, n, np.random.default_rng(42))
        assert abs(t.p[1, 0] - 0.5) <= 0.002 and abs(t.p[0, 1] - 0.5) <= 0.002
        assert np.allclose(t.p.sum(axis=0), 1, atol=1e-12)


class TestAggregate:
    def test_identical_reports(self):
        r = verify_relations(protocol_a(), G1, IDEAL, (0.5, 2.0))
        stats = aggregate_repetitions([r] * 25)
        assert stats.n_repetitions == 25
        assert all(np.all(v == 0) for v in stats.std.values())

    def test_two_reports(self):
        ra = verify_relations(protocol_a(), G1, IDEAL, (2.0,))
        rb = verify_relations(protocol_a(), GibbsSpec(1.0, 2.0, 2.0), IDEAL, (2.0,))
        stats = aggregate_repetitions([ra, rb])
        for key, a in ra.fields().items():
            b = rb.fields()[key]
            assert np.allclose(stats.mean[key], (a + b) / 2, atol=1e-15)
            assert np.allclose(stats.std[key], np.abs(a - b) / math.sqrt(2), atol=1e-15)

    def test_single_report_zero_std(self):
        r = verify_relations(protocol_a(), G1, IDEAL, ())
        assert np.all(aggregate_repetitions([r]).std[("entropy_lhs", None)] == 0)

    def test_mismatch(self):
        ra = verify_relations(protocol_a(), G1, IDEAL, (2.0,))
        rb = verify_relations(protocol_b(), G1, IDEAL, (2.0,))
        rc = verify_relations(protocol_a(), G1, IDEAL, (0.5,))
        for other in (rb, rc):
            with pytest.raises(InvalidArgumentError):
                aggregate_repetitions([ra, other])
        with pytest.raises(InvalidArgumentError):
            aggregate_repetitions([])

    def test_ideal_repetitions_have_no_spread(self):
        # noise off and huge shot counts: the sampled pipeline collapses onto the exact one
        shots = ShotConfig(10 ** 12, 10 ** 12, 3, 1)
        run = run_shots(protocol_a(), G1, IDEAL, (0.5, 2.0), shots)
        assert max(float(v.max()) for v in run.statistics.std.values()) <= 1e-5
        exact = verify_relations(protocol_a(), G1, IDEAL, (0.5, 2.0))
        assert aggregate_repetitions([exact] * 4).std[("entropy_lhs", None)].max() <= 1e-12


class TestPipeline:
    def test_converges_to_ideal(self):
        shots = ShotConfig(10 ** 7, 10 ** 7, 2, 3)
        for p in (protocol_a(), protocol_b()):
            exact = verify_relations(p, G1, IDEAL, (0.5, 2.0)).fields()
            run = run_shots(p, G1, IDEAL, (0.5, 2.0), shots)
            for key, values in exact.items():
                assert np.max(np.abs(run.statistics.mean[key] - values)) <= 5e-3

    def test_determinism_and_parallel_equivalence(self):
        p = build_xy_quench(0.3, 4, 16)
        shots = ShotConfig(200, 200, 4, 99)
        a = run_shots(p, G1, IDEAL, (2.0,), shots, NoiseModel())
        b = run_shots(p, G1, IDEAL, (2.0,), shots, NoiseModel())
        c = run_shots(p, G1, IDEAL, (2.0,), shots, NoiseModel(), max_workers=2)
        for other in (b, c):
            for key in a.statistics.mean:
                assert np.array_equal(a.statistics.mean[key], other.statistics.mean[key])
                assert np.array_equal(a.statistics.std[key], other.statistics.std[key])

    def test_repetition_independent_of_order(self):
        p = build_xy_quench(0.3, 3, 16)
        shots = ShotConfig(100, 100, 5, 7)
        direct = simulate_repetition(p, G1, IDEAL, (), shots, NO_NOISE, 3)
        run = run_shots(p, G1, IDEAL, (), shots)
        assert direct.report == run.repetitions[3].report

    def test_seed_changes_results(self):
        p = build_xy_quench(0.3, 3, 16)
        a = run_shots(p, G1, IDEAL, (), ShotConfig(100, 100, 2, 1))
        b = run_shots(p, G1, IDEAL, (), ShotConfig(100, 100, 2, 2))
        assert not np.array_equal(a.statistics.mean[("entropy_lhs", None)],
                                  b.statistics.mean[("entropy_lhs", None)])

    def test_shot_config_validation(self):
        with pytest.raises(InvalidArgumentError):
            ShotConfig(tomography_shots=0)
        with pytest.raises(InvalidArgumentError):
            ShotConfig(seed=-1)
