"""Noisy density-matrix simulation of the alternating-layer ansatz.

States are full 2^n x 2^n density matrices; the cost layer is applied as
diagonal phases from a precomputed energy table, the mixer as n single
qubit X rotations, and the noise channel as one global Pauli map after
every unitary (and after state preparation).  Everything is deterministic
given the RNG passed in, so sweeps are reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DimensionCapError, InvalidNoiseError
from .hamiltonian import EnergyTable, bits_of_index

DENSITY_CAP = 12  # qubits; 2^12 x 2^12 complex entries

_PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
_PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True)
class QaoaParams:
    """Per-layer angle pairs; gammas drive the cost phase, betas the mixer."""

    betas: tuple
    gammas: tuple

    def __post_init__(self):
        if len(self.betas) != len(self.gammas):
            raise ValueError("betas and gammas must have equal length")

    @property
    def depth(self) -> int:
        return len(self.betas)

    @staticmethod
    def of(betas, gammas) -> "QaoaParams":
        return QaoaParams(tuple(float(b) for b in betas), tuple(float(g) for g in gammas))

    def extended(self, beta: float, gamma: float) -> "QaoaParams":
        return QaoaParams(self.betas + (float(beta),), self.gammas + (float(gamma),))


@dataclass(frozen=True)
class NoiseConfig:
    """Pauli error rate per unitary, sample count for cost estimates, seed."""

    epsilon: float = 0.0
    nu: int = 10000
    seed: int = 0

    def __post_init__(self):
        if self.epsilon < 0:
            raise InvalidNoiseError("error rate must be nonnegative")
        if self.nu < 1:
            raise InvalidNoiseError("sample count must be at least 1")


class DensityState:
    """Mutable density matrix over n qubits; single owner during evolution."""

    __slots__ = ("matrix", "n")

    def __init__(self, matrix: np.ndarray, n: int):
        self.matrix = matrix
        self.n = n

    def copy(self) -> "DensityState":
        return DensityState(self.matrix.copy(), self.n)

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def purity(self) -> float:
        return float(np.real(np.sum(self.matrix * self.matrix.T.conj())))

    def probabilities(self) -> np.ndarray:
        """Diagonal as a clipped, renormalized probability vector."""
        p = np.real(np.diag(self.matrix)).copy()
        p[p < 0] = 0.0
        total = p.sum()
        return p / total if total > 0 else np.full_like(p, 1.0 / len(p))


def prepare_plus(n: int, cap: int = DENSITY_CAP) -> DensityState:
    """Uniform superposition as a rank-1 density matrix."""
    if n > cap:
        raise DimensionCapError(f"n={n} exceeds density-matrix cap {cap}")
    dim = 1 << n
    return DensityState(np.full((dim, dim), 1.0 / dim, dtype=complex), n)


def apply_cost_layer(state: DensityState, gamma: float, energies: EnergyTable) -> DensityState:
    """Conjugate by exp(-i*gamma*H): pure phases on the off-diagonal."""
    if len(energies.values) != state.matrix.shape[0]:
        raise ValueError("energy table does not match state dimension")
    phases = np.exp(-1j * gamma * energies.values)
    state.matrix *= phases[:, None]
    state.matrix *= phases.conj()[None, :]
    return state


def _conjugate_single_qubit(rho: np.ndarray, u: np.ndarray, qubit: int, n: int) -> np.ndarray:
    """U_k rho U_k^dagger for a 2x2 u acting on one qubit."""
    t = rho.reshape((2,) * (2 * n))
    t = np.moveaxis(np.tensordot(u, t, axes=([1], [qubit])), 0, qubit)
    t = np.moveaxis(np.tensordot(t, u.conj().T, axes=([n + qubit], [0])), -1, n + qubit)
    return t.reshape(rho.shape)


def apply_mixer_layer(state: DensityState, beta: float) -> DensityState:
    """Conjugate by the product of single-qubit exp(-i*beta*X) rotations."""
    u = np.array([[np.cos(beta), -1j * np.sin(beta)],
                  [-1j * np.sin(beta), np.cos(beta)]], dtype=complex)
    rho = state.matrix
    for k in range(state.n):
        rho = _conjugate_single_qubit(rho, u, k, state.n)
    state.matrix = rho
    return state


def apply_noise(state: DensityState, epsilon: float) -> DensityState:
    """Global Pauli channel: (1 - n*eps) rho + (eps/3) sum_j,P P_j rho P_j."""
    n = state.n
    if epsilon < 0 or n * epsilon > 1:
        raise InvalidNoiseError(f"n*epsilon={n * epsilon} outside [0, 1]")
    if epsilon == 0:
        return state
    rho = state.matrix
    out = (1.0 - n * epsilon) * rho
    for k in range(n):
        for pauli in (_PAULI_X, _PAULI_Y, _PAULI_Z):
            out += (epsilon / 3.0) * _conjugate_single_qubit(rho, pauli, k, n)
    state.matrix = out
    return state


def run_ansatz(params: QaoaParams, energies: EnergyTable,
               noise: Optional[NoiseConfig] = None,
               cap: int = DENSITY_CAP) -> DensityState:
    """Evolve |+...+> through all layers, noise after every unitary."""
    epsilon = noise.epsilon if noise is not None else 0.0
    state = prepare_plus(energies.n, cap)
    apply_noise(state, epsilon)
    for beta, gamma in zip(params.betas, params.gammas):
        apply_cost_layer(state, gamma, energies)
        apply_noise(state, epsilon)
        apply_mixer_layer(state, beta)
        apply_noise(state, epsilon)
    return state


def exact_cost(state: DensityState, energies: EnergyTable) -> float:
    """Expectation of the diagonal Hamiltonian in the current state."""
    return float(np.real(np.diag(state.matrix)) @ energies.values)


def estimate_cost(state: DensityState, energies: EnergyTable, nu: int,
                  rng: np.random.Generator) -> float:
    """Finite-sample estimate: nu basis-state draws, empirical mean energy."""
    if nu < 1:
        raise ValueError("need at least one sample")
    counts = rng.multinomial(nu, state.probabilities())
    return float(counts @ energies.values) / nu


def sample_bitstrings(state: DensityState, nu: int, rng: np.random.Generator) -> np.ndarray:
    """Histogram of nu multinomial draws, indexed by basis state."""
    if nu < 1:
        raise ValueError("need at least one sample")
    return rng.multinomial(nu, state.probabilities())


def solution_mask(problem, m: Optional[int] = None) -> np.ndarray:
    """Basis states whose decoded factors multiply to m (carries ignored)."""
    target = m if m is not None else problem.instance.m
    dim = 1 << problem.n
    mask = np.zeros(dim, dtype=bool)
    for index in range(dim):
        p, q = problem.decode(bits_of_index(index, problem.n))
        mask[index] = p > 1 and q > 1 and p * q == target
    return mask


def success_probability(state: DensityState, problem, m: Optional[int] = None) -> float:
    """Population on the solution manifold of the reduced problem."""
    mask = solution_mask(problem, m)
    return float(np.real(np.diag(state.matrix))[mask].sum())
