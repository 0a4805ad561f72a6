"""
Desk-scale quantum emulation.

State vectors and density matrices are plain numpy arrays behind validated
value types. Circuits are emulated at the level their results are used:
amplitude encoding and QRAM superpositions are built explicitly, the swap
and overlap tests return analytic ancilla probabilities (optionally sampled),
Grover search is a genuine state-vector simulation, and phase estimation is
replaced by an exact eigendecomposition with an eigenvalue floor.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import expm

from .exceptions import InputError, SpectralFilterError
from .models import GroverOutcome
from .utils import get_logger, make_rng

logger = get_logger(__name__)

NORM_TOLERANCE = 1e-10
HERMITIAN_TOLERANCE = 1e-9
# z-score of the shot-count rule in required_samples
CONFIDENCE_Z = 3.0
# doubling-schedule growth factor for Grover search with unknown marked count
SCHEDULE_GROWTH = 6.0 / 5.0


@dataclass(frozen=True)
class StateVector:
    amplitudes: np.ndarray

    def __post_init__(self):
        amplitudes = np.array(self.amplitudes, dtype=complex).ravel()
        size = amplitudes.size
        if size < 2 or size & (size - 1):
            raise InputError(f"state length must be a power of two >= 2, got {size}")
        norm = np.linalg.norm(amplitudes)
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise InputError(f"state is not normalized: norm {norm:.12f}")
        amplitudes.setflags(write=False)
        object.__setattr__(self, 'amplitudes', amplitudes)

    @property
    def n_qubits(self) -> int:
        return self.amplitudes.size.bit_length() - 1

    def inner(self, other: "StateVector") -> complex:
        """⟨self|other⟩"""
        if other.n_qubits != self.n_qubits:
            raise InputError(f"qubit-count mismatch: {self.n_qubits} vs {other.n_qubits}")
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True)
class DensityMatrix:
    entries: np.ndarray

    def __post_init__(self):
        entries = np.array(self.entries, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise InputError(f"density matrix must be square, got shape {entries.shape}")
        if not np.allclose(entries, entries.conj().T, rtol=0.0, atol=NORM_TOLERANCE):
            raise InputError("density matrix is not Hermitian")
        if abs(np.trace(entries).real - 1.0) > NORM_TOLERANCE:
            raise InputError(f"density matrix trace is {np.trace(entries).real:.12f}, not 1")
        if np.linalg.eigvalsh(entries).min() < -HERMITIAN_TOLERANCE:
            raise InputError("density matrix has a negative eigenvalue")
        entries.setflags(write=False)
        object.__setattr__(self, 'entries', entries)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


class IndexOracle:
    """Membership predicate over {0..size-1} backed by a boolean mask"""

    def __init__(self, mask: np.ndarray):
        self.mask = np.asarray(mask, dtype=bool)

    def __call__(self, index: int) -> bool:
        return bool(index < self.mask.size and self.mask[index])


def _check_hermitian(matrix: np.ndarray, name: str) -> np.ndarray:
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise InputError(f"{name} must be square, got shape {matrix.shape}")
    if not np.allclose(matrix, matrix.conj().T, rtol=0.0, atol=HERMITIAN_TOLERANCE):
        raise InputError(f"{name} is not Hermitian")
    return matrix


def padded_length(n: int) -> int:
    """Next power of two, at least 2"""
    return max(2, 1 << (n - 1).bit_length())


def density_from_state(state: StateVector) -> DensityMatrix:
    return DensityMatrix(entries=np.outer(state.amplitudes, state.amplitudes.conj()))


def partial_trace(state: StateVector, keep_qubits: int) -> DensityMatrix:
    """Reduced density matrix of the leading `keep_qubits` qubits"""
    if not 1 <= keep_qubits <= state.n_qubits:
        raise InputError(f"keep_qubits must lie in [1, {state.n_qubits}], got {keep_qubits}")
    psi = state.amplitudes.reshape(1 << keep_qubits, -1)
    return DensityMatrix(entries=psi @ psi.conj().T)


def amplitude_encode(x, width: Optional[int] = None) -> Tuple[StateVector, float]:
    """|x⟩ = x/|x| padded with zeros to a power-of-two length; the norm is returned"""
    x = np.asarray(x, dtype=float).ravel()
    norm = float(np.linalg.norm(x))
    if norm == 0.0:
        raise InputError("zero vector cannot be amplitude-encoded")
    width = width or padded_length(x.size)
    if width < x.size or width & (width - 1):
        raise InputError(f"cannot encode {x.size} values in a register of length {width}")
    padded = np.zeros(width)
    padded[:x.size] = x / norm
    return StateVector(amplitudes=padded), norm


def qram_superposition(cells: Sequence, weights: Sequence[complex]) -> StateVector:
    """Σ_l ψ_l |l⟩_address |D_l⟩_data with every cell amplitude-encoded"""
    weights = np.asarray(weights, dtype=complex)
    if len(cells) != weights.size or weights.size == 0:
        raise InputError(f"{len(cells)} cells for {weights.size} weights")
    if abs(np.linalg.norm(weights) - 1.0) > NORM_TOLERANCE:
        raise InputError(f"address weights have norm {np.linalg.norm(weights):.12f}, not 1")

    width = padded_length(max(np.asarray(c).size for c in cells))
    address_length = padded_length(len(cells))
    amplitudes = np.zeros(address_length * width, dtype=complex)
    for address, cell in enumerate(cells):
        encoded, _ = amplitude_encode(cell, width)
        amplitudes[address * width:(address + 1) * width] = weights[address] * encoded.amplitudes
    return StateVector(amplitudes=amplitudes)


def _sample_probability(p: float, shots: Optional[int], rng) -> float:
    if shots is None:
        return p
    if shots < 1:
        raise InputError(f"shots must be at least 1, got {shots}")
    return make_rng(rng).binomial(shots, min(max(p, 0.0), 1.0)) / shots


def swap_test(psi: Union[StateVector, DensityMatrix], phi: StateVector,
              shots: Optional[int] = None, rng=None) -> Tuple[float, float]:
    """Ancilla-0 probability ½ + ½⟨φ|ρ|φ⟩ and the overlap estimate max(0, 2 p0 - 1).

    shots=None is exact mode. A pure psi gives ½ + ½|⟨ψ|φ⟩|².
    """
    if isinstance(psi, DensityMatrix):
        if psi.dim != phi.amplitudes.size:
            raise InputError(f"dimension mismatch: {psi.dim} vs {phi.amplitudes.size}")
        overlap_sq = float(np.vdot(phi.amplitudes, psi.entries @ phi.amplitudes).real)
    else:
        overlap_sq = abs(psi.inner(phi)) ** 2
    p0 = min(max(0.5 + 0.5 * overlap_sq, 0.5), 1.0)
    p0 = _sample_probability(p0, shots, rng)
    return p0, max(0.0, 2.0 * p0 - 1.0)


def overlap_test(psi: StateVector, phi: StateVector, shots: Optional[int] = None, rng=None) -> float:
    """Ancilla-0 probability ½(1 + Re⟨ψ|φ⟩) of the controlled-preparation test; keeps the overlap sign"""
    p0 = min(max(0.5 * (1.0 + psi.inner(phi).real), 0.0), 1.0)
    return _sample_probability(p0, shots, rng)


def required_samples(scale: float, eps: float, shots: Optional[int] = None) -> int:
    """Shots so that an estimate with standard deviation ≤ scale/√n is within eps at 3σ"""
    if eps <= 0:
        raise InputError(f"accuracy must be positive, got {eps}")
    needed = max(math.ceil(eps ** -2), math.ceil((CONFIDENCE_Z * scale / eps) ** 2))
    return int(max(shots or 0, needed))


def evolution_time(norm_i: float, norm_j: float) -> float:
    """Small evolution time with max(|x_i|, |x_j|) t = 0.1"""
    return 0.1 / np.maximum(norm_i, norm_j)


def prepare_difference_state(norm_i: float, norm_j: float, t: float) -> Tuple[StateVector, float]:
    """Evolve (|0⟩ - |1⟩)/√2 ⊗ |0⟩ under (|x_i||0⟩⟨0| + |x_j||1⟩⟨1|) ⊗ σ_x for time t.

    Returns the register state post-selected on the flag qubit reading 1,
    ∝ sin(|x_i|t)|0⟩ - sin(|x_j|t)|1⟩, and the probability of that outcome.
    """
    sigma_x = np.array([[0.0, 1.0], [1.0, 0.0]])
    hamiltonian = np.kron(np.diag([norm_i, norm_j]), sigma_x)
    initial = np.kron(np.array([1.0, -1.0]) / math.sqrt(2.0), np.array([1.0, 0.0]))
    evolved = expm(-1j * hamiltonian * t) @ initial

    flagged = evolved[1::2]
    probability = float(np.vdot(flagged, flagged).real)
    if probability == 0.0:
        raise InputError("evolution produced no flagged amplitude; both norms are zero")
    flagged = flagged / math.sqrt(probability)
    pivot = flagged[np.argmax(np.abs(flagged))]
    return StateVector(amplitudes=flagged * (abs(pivot) / pivot)), probability


def dot_from_overlap(norm_i, norm_j, weight_i, weight_j, overlap_sq):
    """Invert ⟨φ|ρ|φ⟩ = (w_i² + w_j² - 2 w_i w_j cos)/(2(w_i² + w_j²)) for |x_i||x_j| cos.

    With the ideal weights w = (|x_i|, |x_j|) this is (Z - |x_i - x_j|²)/2.
    Works elementwise on arrays.
    """
    weight_sq = weight_i ** 2 + weight_j ** 2
    return norm_i * norm_j * weight_sq * (1.0 - 2.0 * overlap_sq) / (2.0 * weight_i * weight_j)


def dot_sensitivity(norm_i, norm_j, weight_i, weight_j):
    """|∂dot/∂overlap|; the dot estimate has standard deviation at most this over √shots"""
    return norm_i * norm_j * (weight_i ** 2 + weight_j ** 2) / (weight_i * weight_j)


def inner_product_estimate(x_i, x_j, shots: Optional[int] = None, eps: float = 1e-3,
                           rng=None) -> Tuple[float, float]:
    """x_i·x_j from ancilla statistics; returns (dot, Z) with Z = |x_i|² + |x_j|².

    |ψ⟩ = (|0⟩|x_i⟩ + |1⟩|x_j⟩)/√2 is swap-tested on its ancilla against
    |φ⟩ ∝ |x_i||0⟩ - |x_j||1⟩, whose overlap is |x_i - x_j|²/(2Z), so
    x_i·x_j = (Z - |x_i - x_j|²)/2. Exact mode uses the ideal |φ⟩. Shots mode
    prepares |φ⟩ by the short Hamiltonian evolution, samples the swap test,
    and inverts the overlap with the weights of the state actually prepared.
    """
    if eps <= 0:
        raise InputError(f"accuracy must be positive, got {eps}")
    x_i = np.asarray(x_i, dtype=float).ravel()
    x_j = np.asarray(x_j, dtype=float).ravel()
    if x_i.shape != x_j.shape:
        raise InputError(f"dimension mismatch: {x_i.shape} vs {x_j.shape}")

    width = padded_length(x_i.size)
    state_i, norm_i = amplitude_encode(x_i, width)
    state_j, norm_j = amplitude_encode(x_j, width)
    psi = StateVector(amplitudes=np.concatenate((state_i.amplitudes, state_j.amplitudes)) / math.sqrt(2.0))
    ancilla = partial_trace(psi, keep_qubits=1)
    z = norm_i ** 2 + norm_j ** 2

    if shots is None:
        phi = StateVector(amplitudes=np.array([norm_i, -norm_j]) / math.sqrt(z))
        _, overlap_sq = swap_test(ancilla, phi)
        return z * (1.0 - 2.0 * overlap_sq) / 2.0, z

    phi, _ = prepare_difference_state(norm_i, norm_j, evolution_time(norm_i, norm_j))
    weight_i, weight_j = np.abs(phi.amplitudes)
    samples = required_samples(dot_sensitivity(norm_i, norm_j, weight_i, weight_j), eps, shots)
    _, overlap_sq = swap_test(ancilla, phi, shots=samples, rng=rng)
    return float(dot_from_overlap(norm_i, norm_j, weight_i, weight_j, overlap_sq)), z


def grover_amplitudes(mask: np.ndarray, iterations: int) -> StateVector:
    """Uniform superposition after `iterations` rounds of phase oracle + diffusion"""
    mask = np.asarray(mask, dtype=bool)
    amplitudes = np.full(mask.size, 1.0 / math.sqrt(mask.size))
    for _ in range(iterations):
        amplitudes[mask] *= -1.0
        amplitudes = 2.0 * amplitudes.mean() - amplitudes
    return StateVector(amplitudes=amplitudes)


def _measure(state: StateVector, rng: np.random.Generator) -> int:
    probabilities = np.abs(state.amplitudes) ** 2
    return int(rng.choice(probabilities.size, p=probabilities / probabilities.sum()))


def _oracle_mask(oracle: Callable[[int], bool], size: int) -> np.ndarray:
    if isinstance(oracle, IndexOracle):
        mask = np.zeros(size, dtype=bool)
        limit = min(size, oracle.mask.size)
        mask[:limit] = oracle.mask[:limit]
        return mask
    return np.fromiter((bool(oracle(i)) for i in range(size)), dtype=bool, count=size)


def exhausted_schedule_cost(space: int) -> Tuple[int, int]:
    """(iterations, oracle queries) of a doubling schedule that never finds a marked item"""
    root = math.sqrt(space)
    iterations = math.ceil(3.0 * root)
    rounds = math.ceil(math.log(root) / math.log(SCHEDULE_GROWTH)) + 1 if root > 1 else 1
    return iterations, iterations + rounds


def grover_query_model(m_space: int, k_marked: int, k_known: bool = True) -> float:
    """Analytic oracle-query count for a successful search.

    Known k: floor(π/4 √(M/k)) iterations plus one verification.
    Unknown k: the (9/4) √(M/k) bound of the doubling schedule.
    """
    if not 1 <= k_marked <= m_space:
        raise InputError(f"marked count must lie in [1, {m_space}], got {k_marked}")
    ratio = math.sqrt(m_space / k_marked)
    if k_known:
        return float(math.floor(math.pi / 4.0 * ratio) + 1)
    return 9.0 / 4.0 * ratio


def grover_search(oracle: Callable[[int], bool], n_qubits: int, marked_count_hint: Optional[int] = None,
                  rng=None, max_attempts: int = 8, max_qubits: int = 20) -> GroverOutcome:
    """State-vector Grover search over {0..2^n - 1}.

    Each Grover iteration applies the oracle once and each measured candidate
    is verified with one more oracle call, so oracle_queries counts both.
    Without a hint the doubling schedule runs until ⌈3√N⌉ iterations are spent.
    """
    if not 1 <= n_qubits <= max_qubits:
        raise InputError(f"state-vector Grover needs 1 <= n <= {max_qubits}, got {n_qubits}")
    rng = make_rng(rng)
    space = 1 << n_qubits
    mask = _oracle_mask(oracle, space)
    marked = int(mask.sum())
    theta_true = math.asin(math.sqrt(marked / space))

    if marked_count_hint is not None:
        k = marked_count_hint
        if not 1 <= k <= space:
            raise InputError(f"marked count hint must lie in [1, {space}], got {k}")
        theta = math.asin(math.sqrt(k / space))
        rounds = math.floor(math.pi / 4.0 * math.sqrt(space / k))
        probability = min(1.0, math.sin((2 * rounds + 1) * theta) ** 2)
        state = grover_amplitudes(mask, rounds)

        iterations = queries = 0
        for attempt in range(max_attempts):
            iterations += rounds
            queries += rounds + 1
            candidate = _measure(state, rng)
            if oracle(candidate):
                return GroverOutcome(found_index=candidate, iterations=iterations,
                                     oracle_queries=queries, success_probability=probability)
            logger.debug(f"Grover attempt {attempt + 1} measured unmarked index {candidate}")
        return GroverOutcome(found_index=None, iterations=iterations, oracle_queries=queries,
                             success_probability=probability)

    cap, _ = exhausted_schedule_cost(space)
    limit = 1.0 * math.sqrt(space)
    schedule = 1.0
    iterations = queries = 0
    probability = 0.0
    while iterations < cap:
        rounds = int(rng.integers(0, max(1, math.ceil(schedule))))
        if iterations + rounds > cap:
            break
        iterations += rounds
        queries += rounds + 1
        probability = math.sin((2 * rounds + 1) * theta_true) ** 2
        candidate = _measure(grover_amplitudes(mask, rounds), rng)
        if oracle(candidate):
            return GroverOutcome(found_index=candidate, iterations=iterations, oracle_queries=queries,
                                 success_probability=min(1.0, probability))
        schedule = min(SCHEDULE_GROWTH * schedule, limit)
    logger.debug(f"Doubling schedule exhausted after {iterations} iterations ({marked} marked)")
    return GroverOutcome(found_index=None, iterations=iterations, oracle_queries=queries,
                         success_probability=min(1.0, probability))


def star_graph(m: int) -> np.ndarray:
    """J = [[0, 1^T], [1, 0]] of size (M+1); nonzero eigenvalues ±√M"""
    if m < 1:
        raise InputError(f"star graph needs M >= 1, got {m}")
    graph = np.zeros((m + 1, m + 1))
    graph[0, 1:] = 1.0
    graph[1:, 0] = 1.0
    return graph


def fhat_factors(K: np.ndarray, gamma: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(J, K, I/γ) embedded at size M+1 so that their sum is the LS-SVM system F"""
    K = np.asarray(K, dtype=float)
    m = K.shape[0]
    embedded_kernel = np.zeros((m + 1, m + 1))
    embedded_kernel[1:, 1:] = K
    regularizer = np.zeros((m + 1, m + 1))
    regularizer[1:, 1:] = np.eye(m) / gamma
    return star_graph(m), embedded_kernel, regularizer


def trotter_exp(J: np.ndarray, K: np.ndarray, gamma_inv_I: np.ndarray, dt: float,
                tr_f: float) -> Tuple[np.ndarray, np.ndarray, float]:
    """First-order product e^{-iJΔt/trF} e^{-iKΔt/trF} e^{-iγ⁻¹IΔt/trF} against e^{-iFΔt/trF}"""
    factors = [_check_hermitian(h, name) for h, name in ((J, "J"), (K, "K"), (gamma_inv_I, "gamma_inv_I"))]
    if len({f.shape for f in factors}) != 1:
        raise InputError("Trotter factors must share one dimension")
    if factors[0].shape[0] > 64:
        raise InputError(f"Trotter check is limited to dimension 64, got {factors[0].shape[0]}")
    if tr_f == 0:
        raise InputError("trace normalization must be nonzero")

    step = dt / tr_f
    approx = np.eye(factors[0].shape[0], dtype=complex)
    for factor in factors:
        approx = approx @ expm(-1j * factor * step)
    exact = expm(-1j * sum(factors) * step)
    return approx, exact, float(np.linalg.norm(approx - exact, 2))


def first_order_commutator(rho: Union[DensityMatrix, np.ndarray], K_hat: np.ndarray, dt: float) -> np.ndarray:
    """ρ - iΔt[K̂, ρ]"""
    entries = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho)
    return entries - 1j * dt * (K_hat @ entries - entries @ K_hat)


def density_commutator_step(rho: DensityMatrix, K_hat: np.ndarray, dt: float) -> DensityMatrix:
    """e^{-iK̂Δt} ρ e^{iK̂Δt}, restricted to |Δt|·|K̂| ≤ 0.1"""
    K_hat = _check_hermitian(K_hat, "K_hat")
    if K_hat.shape[0] != rho.dim:
        raise InputError(f"dimension mismatch: {K_hat.shape[0]} vs {rho.dim}")
    if abs(dt) * np.linalg.norm(K_hat, 2) > 0.1:
        raise InputError(f"step too large: |dt|·|K| = {abs(dt) * np.linalg.norm(K_hat, 2):.3g} > 0.1")
    unitary = expm(-1j * K_hat * dt)
    evolved = unitary @ rho.entries @ unitary.conj().T
    return DensityMatrix(entries=(evolved + evolved.conj().T) / 2.0)


def spectral_invert(F_hat: np.ndarray, y, eig_floor: float,
                    t_bits: Optional[int] = None) -> Tuple[np.ndarray, float]:
    """Filtered pseudo-inverse Σ_{|λ_r| ≥ ε_K} (⟨E_r|y⟩/λ_r)|E_r⟩, normalized.

    t_bits rounds each eigenvalue to that many binary digits of the spectral
    radius, modelling a finite phase-estimation register. Returns
    (solution_state, scale) with scale the norm before normalization.
    """
    F_hat = _check_hermitian(F_hat, "F_hat")
    y = np.asarray(y)
    if y.shape != (F_hat.shape[0],):
        raise InputError(f"right-hand side has shape {y.shape}, expected ({F_hat.shape[0]},)")
    if not np.any(y):
        raise InputError("right-hand side is the zero vector")
    if eig_floor <= 0:
        raise InputError(f"eigenvalue floor must be positive, got {eig_floor}")

    eigenvalues, eigenvectors = np.linalg.eigh(F_hat)
    if t_bits is not None:
        radius = np.abs(eigenvalues).max()
        grid = float(1 << t_bits)
        eigenvalues = np.round(eigenvalues / radius * grid) / grid * radius

    keep = np.abs(eigenvalues) >= eig_floor
    if not keep.any():
        raise SpectralFilterError(f"all eigenvalues fall below the floor {eig_floor:.3e}")
    if not keep.all():
        logger.debug(f"Spectral filter dropped {int((~keep).sum())} of {keep.size} eigenvalues")

    basis = eigenvectors[:, keep]
    solution = basis @ ((basis.conj().T @ y) / eigenvalues[keep])
    if np.isrealobj(F_hat) and np.isrealobj(y):
        solution = solution.real
    scale = float(np.linalg.norm(solution))
    if scale == 0.0:
        raise SpectralFilterError("right-hand side has no component in the kept eigenspace")
    return solution / scale, scale
