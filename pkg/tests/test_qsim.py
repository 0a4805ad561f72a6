import math

import numpy as np
import pytest

from src.bench import fit_slope
from src.exceptions import InputError, SpectralFilterError
from src.qsim import (
    NORM_TOLERANCE, DensityMatrix, IndexOracle, StateVector, amplitude_encode, density_commutator_step,
    evolution_time, exhausted_schedule_cost, fhat_factors, first_order_commutator, grover_amplitudes,
    grover_query_model, grover_search, inner_product_estimate, overlap_test, partial_trace, prepare_difference_state,
    qram_superposition, required_samples, spectral_invert, star_graph, swap_test, trotter_exp,
)


def random_state(rng, n_qubits):
    v = rng.standard_normal(1 << n_qubits) + 1j * rng.standard_normal(1 << n_qubits)
    return StateVector(amplitudes=v / np.linalg.norm(v))


def random_hermitian(rng, n):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    h = (a + a.conj().T) / 2.0
    return h / np.linalg.norm(h, 2)


class TestValueTypes:
    def test_state_length_must_be_power_of_two(self):
        with pytest.raises(InputError, match="power of two"):
            StateVector(amplitudes=np.ones(3) / math.sqrt(3))

    def test_state_must_be_normalized(self):
        with pytest.raises(InputError, match="not normalized"):
            StateVector(amplitudes=[1.0, 1.0])

    def test_density_must_be_hermitian(self):
        with pytest.raises(InputError, match="Hermitian"):
            DensityMatrix(entries=[[0.5, 0.5], [0.0, 0.5]])

    def test_density_trace(self):
        with pytest.raises(InputError, match="trace"):
            DensityMatrix(entries=np.eye(2))

    def test_index_oracle_out_of_range(self):
        oracle = IndexOracle(np.array([False, True]))
        assert oracle(1) and not oracle(0) and not oracle(7)


class TestEncoding:
    def test_amplitude_encode(self):
        state, norm = amplitude_encode([3.0, 4.0])
        np.testing.assert_allclose(state.amplitudes, [0.6, 0.8])
        assert norm == 5.0

    def test_amplitude_encode_pads(self):
        state, norm = amplitude_encode([1.0, 2.0, 2.0])
        np.testing.assert_allclose(state.amplitudes, [1 / 3, 2 / 3, 2 / 3, 0.0], atol=1e-12)
        assert norm == pytest.approx(3.0)

    def test_zero_vector(self):
        with pytest.raises(InputError, match="zero vector"):
            amplitude_encode([0.0, 0.0])

    def test_qram_single_cell(self):
        state = qram_superposition([[3.0, 4.0]], [1.0])
        np.testing.assert_allclose(state.amplitudes, [0.6, 0.8, 0.0, 0.0])

    def test_qram_orthogonal_cells_give_mixed_address(self):
        weights = np.ones(2) / math.sqrt(2.0)
        state = qram_superposition([[1.0, 0.0], [0.0, 2.0]], weights)
        np.testing.assert_allclose(partial_trace(state, 1).entries, np.eye(2) / 2.0, atol=1e-12)

    def test_qram_weights_normalized(self):
        with pytest.raises(InputError, match="norm"):
            qram_superposition([[1.0], [2.0]], [1.0, 1.0])


class TestSwapTest:
    def test_bounds_random(self):
        rng = np.random.default_rng(5)
        for _ in range(1000):
            n = int(rng.integers(1, 5))
            psi, phi = random_state(rng, n), random_state(rng, n)
            p0, overlap = swap_test(psi, phi)
            assert 0.5 <= p0 <= 1.0
            assert overlap == pytest.approx(abs(psi.inner(phi)) ** 2, abs=1e-12)

    def test_density_input_matches_pure(self):
        rng = np.random.default_rng(6)
        psi, phi = random_state(rng, 2), random_state(rng, 2)
        rho = DensityMatrix(entries=np.outer(psi.amplitudes, psi.amplitudes.conj()))
        assert swap_test(rho, phi)[1] == pytest.approx(swap_test(psi, phi)[1], abs=1e-12)

    def test_sampled_p0_is_a_shot_fraction(self):
        p0, _ = swap_test(StateVector([1.0, 0.0]), StateVector([0.0, 1.0]), shots=64, rng=3)
        assert (p0 * 64).is_integer()

    def test_overlap_test_keeps_sign(self):
        zero = StateVector([1.0, 0.0])
        assert overlap_test(zero, zero) == 1.0
        assert overlap_test(zero, StateVector([-1.0, 0.0])) == 0.0
        assert overlap_test(zero, StateVector([0.0, 1.0])) == 0.5


class TestInnerProduct:
    def test_exact_hand_value(self):
        dot, z = inner_product_estimate([3.0, 4.0], [4.0, 3.0])
        assert dot == pytest.approx(24.0, abs=1e-9)
        assert z == pytest.approx(50.0)

    def test_exact_matches_numpy(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            a, b = rng.standard_normal(5) * 3, rng.standard_normal(5)
            assert inner_product_estimate(a, b)[0] == pytest.approx(float(a @ b), abs=1e-9)

    def test_sampled_estimate_within_accuracy(self):
        rng = np.random.default_rng(8)
        hits = 0
        for _ in range(100):
            a, b = rng.standard_normal(4), rng.standard_normal(4)
            a, b = a / np.linalg.norm(a), b / np.linalg.norm(b)
            dot, _ = inner_product_estimate(a, b, shots=10_000, eps=0.02, rng=rng)
            hits += abs(dot - float(a @ b)) <= 0.02
        assert hits >= 95

    def test_dimension_mismatch(self):
        with pytest.raises(InputError, match="dimension mismatch"):
            inner_product_estimate([1.0, 2.0], [1.0, 2.0, 3.0])

    def test_required_samples(self):
        assert required_samples(1.0, 0.5, shots=10) == 36
        assert required_samples(1.0, 0.5, shots=100) == 100
        with pytest.raises(InputError):
            required_samples(1.0, 0.0)

    def test_difference_state(self):
        t = evolution_time(3.0, 4.0)
        assert t == pytest.approx(0.025)
        state, probability = prepare_difference_state(3.0, 4.0, t)
        expected = np.array([math.sin(3.0 * t), math.sin(4.0 * t)])
        np.testing.assert_allclose(np.abs(state.amplitudes), expected / np.linalg.norm(expected), atol=1e-12)
        assert (state.amplitudes[0] * state.amplitudes[1].conjugate()).real < 0
        assert probability == pytest.approx(np.sum(expected ** 2) / 2.0, abs=1e-12)


class TestGrover:
    def test_two_qubits_one_marked_is_certain(self):
        outcome = grover_search(IndexOracle(np.array([0, 0, 1, 0], dtype=bool)), 2, marked_count_hint=1, rng=0)
        assert outcome.found_index == 2
        assert outcome.iterations == 1
        assert outcome.oracle_queries == 2
        assert outcome.success_probability == pytest.approx(1.0)

    def test_three_qubits_success_probability(self):
        mask = np.zeros(8, dtype=bool)
        mask[5] = True
        outcome = grover_search(IndexOracle(mask), 3, marked_count_hint=1, rng=1)
        theta = math.asin(1 / math.sqrt(8))
        assert outcome.success_probability == pytest.approx(math.sin(5 * theta) ** 2, abs=1e-12)
        assert outcome.success_probability == pytest.approx(0.9453, abs=1e-4)
        assert abs(grover_amplitudes(mask, 2).amplitudes[5]) ** 2 == pytest.approx(outcome.success_probability)

    def test_amplitude_formula(self):
        rng = np.random.default_rng(12)
        for n in range(1, 11):
            size = 1 << n
            k = int(rng.integers(1, size + 1))
            mask = np.zeros(size, dtype=bool)
            mask[rng.choice(size, k, replace=False)] = True
            theta = math.asin(math.sqrt(k / size))
            r = int(rng.integers(0, 6))
            marked_probability = np.sum(np.abs(grover_amplitudes(mask, r).amplitudes[mask]) ** 2)
            assert marked_probability == pytest.approx(math.sin((2 * r + 1) * theta) ** 2, abs=1e-9)

    @pytest.mark.parametrize("hint", [4, None])
    def test_all_marked_costs_one_query(self, hint):
        outcome = grover_search(lambda i: True, 2, marked_count_hint=hint, rng=0)
        assert outcome.found_index is not None
        assert (outcome.iterations, outcome.oracle_queries) == (0, 1)

    def test_unknown_count_finds_marked(self):
        rng = np.random.default_rng(13)
        mask = np.zeros(64, dtype=bool)
        mask[[3, 40]] = True
        for _ in range(20):
            outcome = grover_search(IndexOracle(mask), 6, rng=rng)
            assert outcome.found_index is None or mask[outcome.found_index]
            assert outcome.oracle_queries >= outcome.iterations

    def test_unknown_count_without_marks_exhausts(self):
        outcome = grover_search(lambda i: False, 6, rng=2)
        assert outcome.found_index is None
        assert outcome.iterations <= exhausted_schedule_cost(64)[0]

    def test_register_limit(self):
        with pytest.raises(InputError):
            grover_search(lambda i: False, 21)

    def test_query_model(self):
        assert grover_query_model(4, 1) == 2
        assert grover_query_model(16, 1, k_known=False) == 9.0
        assert grover_query_model(16, 16) == 1
        with pytest.raises(InputError):
            grover_query_model(4, 0)

    def test_exhausted_schedule_cost(self):
        assert exhausted_schedule_cost(64) == (24, 37)


class TestSystemFactors:
    @pytest.mark.parametrize("m", [2, 4, 9, 16, 64])
    def test_star_graph_spectrum(self, m):
        eigenvalues = np.sort(np.linalg.eigvalsh(star_graph(m)))
        assert eigenvalues[0] == pytest.approx(-math.sqrt(m), abs=1e-9)
        assert eigenvalues[-1] == pytest.approx(math.sqrt(m), abs=1e-9)
        np.testing.assert_allclose(eigenvalues[1:-1], 0.0, atol=1e-9)

    def test_factors_sum_to_system(self):
        K = np.array([[2.0, 0.5], [0.5, 3.0]])
        np.testing.assert_allclose(sum(fhat_factors(K, 2.0)), [[0, 1, 1], [1, 2.5, 0.5], [1, 0.5, 3.5]])

    def test_trotter_error_is_second_order(self):
        rng = np.random.default_rng(14)
        steps = [0.1, 0.05, 0.025, 0.0125]
        for _ in range(10):
            dim = int(rng.integers(2, 17))
            factors = [random_hermitian(rng, dim) for _ in range(3)]
            errors = [trotter_exp(*factors, dt, 1.0)[2] for dt in steps]
            assert 1.8 <= fit_slope(steps, errors) <= 2.2

    def test_trotter_dimension_limit(self):
        big = np.eye(65)
        with pytest.raises(InputError, match="64"):
            trotter_exp(big, big, big, 0.1, 1.0)

    def test_density_step_close_to_first_order(self):
        rng = np.random.default_rng(15)
        for _ in range(50):
            psi = random_state(rng, 2)
            rho = DensityMatrix(entries=np.outer(psi.amplitudes, psi.amplitudes.conj()))
            K = random_hermitian(rng, 4) * rng.uniform(0.5, 4.0)
            dt = 0.1 / np.linalg.norm(K, 2) * rng.uniform(0.1, 1.0)
            stepped = density_commutator_step(rho, K, dt)
            gap = np.linalg.norm(stepped.entries - first_order_commutator(rho, K, dt), 2)
            assert gap <= 2 * dt ** 2 * np.linalg.norm(K, 2) ** 2

    def test_density_step_too_large(self):
        rho = DensityMatrix(entries=np.eye(2) / 2.0)
        with pytest.raises(InputError, match="step too large"):
            density_commutator_step(rho, np.eye(2), 0.5)


class TestSpectralInvert:
    def test_hand_inverse(self):
        state, scale = spectral_invert(np.diag([2.0, 0.5]), [1.0, 1.0], eig_floor=1e-9)
        np.testing.assert_allclose(state, np.array([0.5, 2.0]) / math.sqrt(4.25), atol=1e-12)
        assert scale == pytest.approx(math.sqrt(4.25))

    def test_floor_drops_small_eigenvalues(self):
        state, scale = spectral_invert(np.diag([2.0, 0.5]), [1.0, 1.0], eig_floor=1.0)
        np.testing.assert_allclose(state, [1.0, 0.0], atol=1e-12)
        assert scale == pytest.approx(0.5)

    def test_everything_filtered(self):
        with pytest.raises(SpectralFilterError):
            spectral_invert(np.diag([2.0, 0.5]), [1.0, 1.0], eig_floor=3.0)

    def test_no_component_in_kept_space(self):
        with pytest.raises(SpectralFilterError, match="no component"):
            spectral_invert(np.diag([2.0, 0.5]), [0.0, 1.0], eig_floor=1.0)

    def test_matches_solve_on_random_system(self):
        rng = np.random.default_rng(16)
        a = rng.standard_normal((5, 5))
        F = a + a.T + 6 * np.eye(5)
        y = rng.standard_normal(5)
        state, scale = spectral_invert(F, y, eig_floor=1e-9)
        np.testing.assert_allclose(state * scale, np.linalg.solve(F, y), atol=1e-10)

    def test_zero_rhs(self):
        with pytest.raises(InputError, match="zero vector"):
            spectral_invert(np.eye(2), [0.0, 0.0], eig_floor=1e-9)


def test_state_operations_preserve_normalization():
    rng = np.random.default_rng(17)
    for case in range(1000):
        kind = case % 5
        if kind == 0:
            state, _ = amplitude_encode(rng.standard_normal(int(rng.integers(1, 40))))
        elif kind == 1:
            cells = [rng.standard_normal(int(rng.integers(1, 9))) for _ in range(int(rng.integers(1, 6)))]
            weights = rng.standard_normal(len(cells)) + 1j * rng.standard_normal(len(cells))
            state = qram_superposition(cells, weights / np.linalg.norm(weights))
        elif kind == 2:
            norm_i, norm_j = rng.uniform(0.01, 10.0, size=2)
            state, _ = prepare_difference_state(norm_i, norm_j, evolution_time(norm_i, norm_j))
        elif kind == 3:
            size = 1 << int(rng.integers(1, 7))
            state = grover_amplitudes(rng.random(size) < 0.3, int(rng.integers(0, 12)))
        else:
            psi = random_state(rng, int(rng.integers(2, 6)))
            reduced = partial_trace(psi, int(rng.integers(1, psi.n_qubits + 1)))
            assert np.trace(reduced.entries).real == pytest.approx(1.0, abs=NORM_TOLERANCE)
            K = random_hermitian(rng, reduced.entries.shape[0])
            stepped = density_commutator_step(reduced, K, 0.05)
            assert np.trace(stepped.entries).real == pytest.approx(1.0, abs=NORM_TOLERANCE)
            continue
        assert np.linalg.norm(state.amplitudes) == pytest.approx(1.0, abs=NORM_TOLERANCE)
