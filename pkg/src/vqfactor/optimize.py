"""Parameter training: layerwise grid search plus quasi-Newton refinement.

Each new layer's angle pair is picked by brute-force grid search with all
earlier layers frozen, then a BFGS run over the full parameter vector
polishes the seed.  Gradients come from central finite differences; in
sampled-cost mode every stencil shares one RNG stream so the noise cancels
to first order.  All evaluation counts are tracked, since the number of
cost evaluations is itself a quantity of interest.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .clauses import factoring_instance, generate_clauses
from .curated import curated_problem, has_curated_reduction
from .errors import BudgetExhaustedError
from .hamiltonian import EnergyTable, bits_of_index, cost_hamiltonian, diagonal
from .simplify import SimplifiedProblem, simplify
from .simulator import (
    DensityState,
    NoiseConfig,
    QaoaParams,
    apply_cost_layer,
    apply_mixer_layer,
    apply_noise,
    estimate_cost,
    exact_cost,
    prepare_plus,
    run_ansatz,
    sample_bitstrings,
    solution_mask,
    success_probability,
)

# Grid edges used in the published benchmarks, keyed by modulus.
GRID_TABLE = {35: 6, 77: 24, 1207: 36, 33667: 9, 56153: 12, 291311: 24}

EXACT = "exact"
SAMPLED = "sampled"


@dataclass(frozen=True)
class TrainConfig:
    """Knobs for the training loop; defaults mirror the benchmark setup."""

    depth: int = 3
    grid_size: Optional[int] = None  # None -> default_grid_size
    gamma_period: float = 2.0 * np.pi
    beta_period: float = np.pi
    bfgs_tol: float = 1e-5
    fd_step: float = 1e-4
    max_evals: int = 1_000_000
    max_bfgs_iters: int = 200
    cost_mode: str = SAMPLED
    refine_each_layer: bool = False  # refine after every layer instead of once

    def __post_init__(self):
        if self.grid_size is not None and self.grid_size < 1:
            raise ValueError("grid size must be positive")
        if self.bfgs_tol <= 0 or self.fd_step <= 0:
            raise ValueError("tolerances must be positive")
        if self.cost_mode not in (EXACT, SAMPLED):
            raise ValueError(f"unknown cost mode {self.cost_mode!r}")


def default_grid_size(n_c: int, n: int, m: Optional[int] = None,
                      scale: int = 3, cap: int = 48) -> int:
    """Grid edge G for the per-layer search.

    Known benchmark moduli use their published sizes; otherwise an affine
    rule in the qubit count (3n by default), clamped to [1, cap].  The
    gradient-based sizing would call for a much denser grid in n_c and n,
    but the published runs show the coarse grid suffices.
    """
    if m is not None and m in GRID_TABLE:
        return GRID_TABLE[m]
    return max(1, min(scale * n, cap))


class CostSession:
    """Counts cost evaluations and derives per-evaluation RNG streams.

    Every evaluation gets an RNG seeded by (seed, key); by default the key
    is the running evaluation index, but callers may pin it (finite
    difference stencils reuse one key so sampling noise cancels).
    """

    def __init__(self, energies: EnergyTable, noise: NoiseConfig,
                 cost_mode: str = SAMPLED, max_evals: int = 1_000_000,
                 trace: Optional[list] = None):
        self.energies = energies
        self.noise = noise
        self.cost_mode = cost_mode
        self.max_evals = max_evals
        self.eval_count = 0
        self.trace = trace

    def _rng(self, key: int) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=self.noise.seed, spawn_key=(key,))
        return np.random.Generator(np.random.PCG64(seq))

    def measure(self, state: DensityState, rng_key: Optional[int] = None,
                label: str = "", params: Optional[QaoaParams] = None) -> float:
        if self.eval_count >= self.max_evals:
            raise BudgetExhaustedError("cost-evaluation budget exhausted",
                                       eval_count=self.eval_count)
        key = self.eval_count if rng_key is None else rng_key
        if self.cost_mode == EXACT:
            value = exact_cost(state, self.energies)
        else:
            value = estimate_cost(state, self.energies, self.noise.nu, self._rng(key))
        self.eval_count += 1
        if self.trace is not None:
            record = {"eval": self.eval_count, "cost": value, "stage": label}
            if params is not None:
                record["betas"] = list(params.betas)
                record["gammas"] = list(params.gammas)
            self.trace.append(record)
        return value

    def cost(self, params: QaoaParams, rng_key: Optional[int] = None,
             label: str = "") -> float:
        state = run_ansatz(params, self.energies, self.noise)
        return self.measure(state, rng_key, label, params)


def grid_search_layer(prefix: QaoaParams, session: CostSession, grid_size: int) -> tuple:
    """Best (gamma, beta) for one added layer over a G x G grid.

    The prefix state is evolved once and reused for every grid point.
    Ties break toward the lowest gamma index, then beta index; the (0, 0)
    point makes the new layer a no-op, so the incumbent cost is always in
    the running.  Returns (gamma, beta, best_cost).
    """
    prefix_state = run_ansatz(prefix, session.energies, session.noise)
    epsilon = session.noise.epsilon
    best = None
    try:
        for gi in range(grid_size):
            gamma = 2.0 * np.pi * gi / grid_size
            for bi in range(grid_size):
                beta = np.pi * bi / grid_size
                state = prefix_state.copy()
                apply_cost_layer(state, gamma, session.energies)
                apply_noise(state, epsilon)
                apply_mixer_layer(state, beta)
                apply_noise(state, epsilon)
                value = session.measure(state, label=f"grid[{prefix.depth + 1}]",
                                        params=prefix.extended(beta, gamma))
                if best is None or value < best[2]:
                    best = (gamma, beta, value)
    except BudgetExhaustedError as err:
        if best is not None:
            err.best_params = prefix.extended(best[1], best[0])
            err.best_cost = best[2]
        raise
    return best


def train_layerwise(depth: int, session: CostSession, grid_size: int) -> QaoaParams:
    """Seed all layers one at a time by grid search."""
    params = QaoaParams.of((), ())
    for _ in range(depth):
        gamma, beta, _ = grid_search_layer(params, session, grid_size)
        params = params.extended(beta, gamma)
    return params


def _pack(params: QaoaParams) -> np.ndarray:
    return np.array(list(params.gammas) + list(params.betas), dtype=float)


def _unpack(x: np.ndarray) -> QaoaParams:
    s = len(x) // 2
    return QaoaParams.of(x[s:], x[:s])


def bfgs_refine(seed_params: QaoaParams, cost_fn: Callable[[np.ndarray, Optional[int]], float],
                config: TrainConfig) -> tuple:
    """Quasi-Newton descent from the grid seed over all 2s parameters.

    BFGS inverse-Hessian updates with a backtracking Armijo line search;
    gradients by central differences with step ``config.fd_step``.  Stops
    on gradient norm, line-search failure, iteration cap, or an exhausted
    evaluation budget.  Returns (params, cost, eval_count, converged); the
    returned point is the best ever evaluated, so its cost never exceeds
    the seed's.
    """
    x = _pack(seed_params)
    dim = len(x)
    evals = 0
    stencil_counter = [0]

    def f(point: np.ndarray, key: Optional[int] = None) -> float:
        nonlocal evals
        value = cost_fn(point, key)
        evals += 1
        return value

    def gradient(point: np.ndarray) -> np.ndarray:
        key = 1_000_000_007 + stencil_counter[0]
        stencil_counter[0] += 1
        g = np.empty(dim)
        h = config.fd_step
        for i in range(dim):
            e = np.zeros(dim)
            e[i] = h
            g[i] = (f(point + e, key) - f(point - e, key)) / (2.0 * h)
        return g

    if dim == 0:
        return seed_params, f(x), evals, True

    try:
        fx = f(x)
        best_x, best_f = x.copy(), fx
        g = gradient(x)
        h_inv = np.eye(dim)
        converged = False
        for _ in range(config.max_bfgs_iters):
            if np.linalg.norm(g) <= config.bfgs_tol:
                converged = True
                break
            direction = -h_inv @ g
            slope = float(g @ direction)
            if slope >= 0:
                h_inv = np.eye(dim)
                direction = -g
                slope = float(g @ direction)
                if slope >= 0:
                    converged = True
                    break
            step = 1.0
            armijo = 1e-4
            fx_new = None
            while step > 1e-10:
                candidate = x + step * direction
                value = f(candidate)
                if value <= fx + armijo * step * slope:
                    fx_new = value
                    break
                step *= 0.5
            if fx_new is None:
                break  # line search failed; the seed region is flat or noisy
            x_new = x + step * direction
            g_new = gradient(x_new)
            s = x_new - x
            y = g_new - g
            sy = float(s @ y)
            if sy > 1e-12:
                rho = 1.0 / sy
                outer_sy = np.outer(s, y)
                h_inv = (np.eye(dim) - rho * outer_sy) @ h_inv @ (np.eye(dim) - rho * outer_sy.T)
                h_inv += rho * np.outer(s, s)
            x, fx, g = x_new, fx_new, g_new
            if fx < best_f:
                best_x, best_f = x.copy(), fx
    except BudgetExhaustedError:
        return _unpack(best_x), best_f, evals, False

    if fx < best_f:
        best_x, best_f = x.copy(), fx
    return _unpack(best_x), best_f, evals, converged


@dataclass
class VqfResult:
    """Everything a factoring run produces."""

    m: int
    n: int
    n_z: int
    params: QaoaParams
    final_cost: float
    success_prob: float
    distribution: np.ndarray
    factors: Optional[tuple]
    eval_count: int
    converged: bool = True
    likely_prime: bool = False
    problem: Optional[SimplifiedProblem] = None


def verify_factors(samples, problem: SimplifiedProblem, m: int) -> Optional[tuple]:
    """First sampled bitstring that decodes to a nontrivial factor pair."""
    for bits in samples:
        p, q = problem.decode(bits)
        if p > 1 and q > 1 and p * q == m:
            return p, q
    return None


def build_problem(m: int, n_p: Optional[int] = None, n_q: Optional[int] = None,
                  use_curated: bool = True, passes: int = 2) -> SimplifiedProblem:
    """Reduced clause system for m: curated table if available, else rules."""
    if use_curated and n_p is None and n_q is None and has_curated_reduction(m):
        return curated_problem(m)
    instance = factoring_instance(m, n_p, n_q)
    return simplify(generate_clauses(instance), instance, passes=passes)


def run_vqf(m: int, depth: int = 3, epsilon: float = 1e-3, nu: int = 10000,
            seed: int = 0, n_p: Optional[int] = None, n_q: Optional[int] = None,
            config: Optional[TrainConfig] = None, use_curated: bool = True,
            sample_budget: Optional[int] = None,
            trace: Optional[list] = None) -> VqfResult:
    """Full pipeline: clauses -> simplify -> Hamiltonian -> train -> sample.

    After training, the final state is sampled until a drawn bitstring
    decodes to verified factors or the sample budget runs out.  A fully
    classically solved instance skips the quantum stage.
    """
    config = config or TrainConfig(depth=depth)
    problem = build_problem(m, n_p, n_q, use_curated)
    noise = NoiseConfig(epsilon=epsilon, nu=nu, seed=seed)

    if problem.n == 0:
        p, q = problem.decode(())
        factors = (p, q) if (p > 1 and q > 1 and p * q == m) else None
        return VqfResult(
            m=m, n=0, n_z=0, params=QaoaParams.of((), ()), final_cost=0.0,
            success_prob=1.0 if factors else 0.0,
            distribution=np.array([1.0]), factors=factors, eval_count=0,
            likely_prime=factors is None, problem=problem,
        )

    energies = diagonal(cost_hamiltonian(problem), problem.n)
    session = CostSession(energies, noise, cost_mode=config.cost_mode,
                          max_evals=config.max_evals, trace=trace)
    grid = config.grid_size or default_grid_size(len(problem.clauses), problem.n, m)

    converged = True
    params = QaoaParams.of((), ())
    cost = session.cost(params, label="baseline")
    if config.refine_each_layer:
        for _ in range(depth):
            gamma, beta, _ = grid_search_layer(params, session, grid)
            seeded = params.extended(beta, gamma)
            params, cost, _, converged = bfgs_refine(
                seeded, lambda x, key: session.cost(_unpack(x), key, "refine"), config)
    else:
        seeded = train_layerwise(depth, session, grid)
        params, cost, _, converged = bfgs_refine(
            seeded, lambda x, key: session.cost(_unpack(x), key, "refine"), config)

    state = run_ansatz(params, energies, noise)
    success = success_probability(state, problem, m)
    distribution = state.probabilities()

    rng = np.random.Generator(np.random.PCG64(
        np.random.SeedSequence(entropy=seed, spawn_key=(0xFAC70,))))
    budget = sample_budget if sample_budget is not None else nu
    draws = rng.choice(len(distribution), size=budget, p=distribution)
    factors = verify_factors(
        (bits_of_index(int(i), problem.n) for i in draws), problem, m)

    likely_prime = False
    if factors is None:
        mask = solution_mask(problem, m)
        likely_prime = not mask.any()

    return VqfResult(
        m=m, n=problem.n, n_z=problem.n_z, params=params,
        final_cost=float(cost), success_prob=float(success),
        distribution=distribution, factors=factors,
        eval_count=session.eval_count, converged=converged,
        likely_prime=likely_prime, problem=problem,
    )
