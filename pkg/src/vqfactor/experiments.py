"""Reproducible experiment sweeps over depth, noise rate, and input size.

Every sweep cell derives its RNG seed from (base seed, cell index), so
results are bit-for-bit reproducible and cells can run in parallel
without coordination.  Worker count comes from the VQFACTOR_WORKERS
environment variable; the default of 1 keeps runs strictly serial.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Optional, Sequence

import numpy as np

from .clauses import factoring_instance
from .errors import VqfError
from .hamiltonian import cost_hamiltonian, diagonal
from .optimize import (
    CostSession,
    TrainConfig,
    VqfResult,
    _unpack,
    bfgs_refine,
    build_problem,
    default_grid_size,
    grid_search_layer,
    run_vqf,
)
from .simplify import count_qubits_unsimplified
from .simulator import NoiseConfig, QaoaParams, run_ansatz, success_probability


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("VQFACTOR_WORKERS", "1")))
    except ValueError:
        return 1


def derive_seed(base_seed: int, cell_index: int) -> int:
    """Stable per-cell seed from the base seed and the cell's index."""
    seq = np.random.SeedSequence(entropy=base_seed, spawn_key=(cell_index,))
    return int(seq.generate_state(1, dtype=np.uint64)[0] & 0x7FFFFFFF)


def _map_cells(fn, cells):
    workers = worker_count()
    if workers == 1 or len(cells) <= 1:
        return [fn(c) for c in cells]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, cells))


# --- depth sweep ------------------------------------------------------------

def _depth_rep(args) -> dict:
    (m, depths, epsilon, nu, seed, grid_size, cost_mode, use_curated,
     n_p, n_q, retrain) = args
    depths = sorted(depths)
    out = {}
    if retrain:
        for s in depths:
            result = run_vqf(m, depth=s, epsilon=epsilon, nu=nu, seed=seed,
                             n_p=n_p, n_q=n_q, use_curated=use_curated,
                             config=TrainConfig(depth=s, grid_size=grid_size,
                                                cost_mode=cost_mode))
            out[s] = result.success_prob
        return out

    problem = build_problem(m, n_p, n_q, use_curated)
    if problem.n == 0:
        return {s: 1.0 for s in depths}
    energies = diagonal(cost_hamiltonian(problem), problem.n)
    noise = NoiseConfig(epsilon=epsilon, nu=nu, seed=seed)
    config = TrainConfig(depth=max(depths), grid_size=grid_size, cost_mode=cost_mode)
    session = CostSession(energies, noise, cost_mode=cost_mode,
                          max_evals=config.max_evals)
    grid = grid_size or default_grid_size(len(problem.clauses), problem.n, m)

    params = QaoaParams.of((), ())
    for k in range(1, max(depths) + 1):
        gamma, beta, _ = grid_search_layer(params, session, grid)
        params = params.extended(beta, gamma)
        if k in depths:
            refined, _, _, _ = bfgs_refine(
                params, lambda x, key: session.cost(_unpack(x), key, "refine"), config)
            state = run_ansatz(refined, energies, noise)
            out[k] = success_probability(state, problem, m)
    return out


def depth_sweep(m: int, depths: Sequence[int], epsilon: float = 1e-3,
                nu: int = 10000, seed: int = 0, repetitions: int = 3,
                grid_size: Optional[int] = None, cost_mode: str = "sampled",
                use_curated: bool = True, n_p: Optional[int] = None,
                n_q: Optional[int] = None, retrain: bool = False) -> list:
    """Success probability vs circuit depth; one row per depth.

    Each repetition trains layer by layer up to the largest depth,
    refining and scoring at every requested depth along the way (pass
    ``retrain`` to retrain from scratch per depth instead).
    """
    if repetitions < 1:
        raise VqfError("repetitions must be at least 1")
    cells = [
        (m, tuple(depths), epsilon, nu, derive_seed(seed, rep), grid_size,
         cost_mode, use_curated, n_p, n_q, retrain)
        for rep in range(repetitions)
    ]
    reps = _map_cells(_depth_rep, cells)
    rows = []
    for s in sorted(set(depths)):
        values = np.array([rep[s] for rep in reps])
        rows.append({
            "m": m, "s": s, "epsilon": epsilon, "nu": nu,
            "success_mean": float(values.mean()),
            "success_std": float(values.std(ddof=1)) if len(values) > 1 else 0.0,
            "repetitions": repetitions,
        })
    return rows


# --- noise sweep ------------------------------------------------------------

def _noise_cell(args) -> tuple:
    m, s, epsilon, nu, seed, grid_size, cost_mode, use_curated, n_p, n_q = args
    result = run_vqf(m, depth=s, epsilon=epsilon, nu=nu, seed=seed,
                     n_p=n_p, n_q=n_q, use_curated=use_curated,
                     config=TrainConfig(depth=s, grid_size=grid_size,
                                        cost_mode=cost_mode))
    return epsilon, result.success_prob


def noise_sweep(m: int, epsilons: Sequence[float], depth: int = 3,
                nu: int = 10000, seed: int = 0, repetitions: int = 3,
                grid_size: Optional[int] = None, cost_mode: str = "sampled",
                use_curated: bool = True, n_p: Optional[int] = None,
                n_q: Optional[int] = None) -> list:
    """Success probability vs Pauli error rate at fixed depth."""
    if repetitions < 1:
        raise VqfError("repetitions must be at least 1")
    cells = []
    for ei, epsilon in enumerate(epsilons):
        for rep in range(repetitions):
            cells.append((m, depth, epsilon, nu,
                          derive_seed(seed, ei * repetitions + rep),
                          grid_size, cost_mode, use_curated, n_p, n_q))
    results = _map_cells(_noise_cell, cells)
    rows = []
    for epsilon in epsilons:
        values = np.array([s for e, s in results if e == epsilon])
        rows.append({
            "m": m, "epsilon": epsilon, "s": depth, "nu": nu,
            "success_mean": float(values.mean()),
            "success_std": float(values.std(ddof=1)) if len(values) > 1 else 0.0,
            "repetitions": repetitions,
        })
    return rows


# --- qubit scaling ----------------------------------------------------------

def _sieve(limit: int) -> list:
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for k in range(2, int(limit ** 0.5) + 1):
        if flags[k]:
            flags[k * k::k] = False
    return [int(v) for v in np.flatnonzero(flags)]


def random_odd_biprimes(count: int, max_bits: int, seed: int = 0) -> list:
    """Distinct odd biprimes with at most max_bits product bits."""
    if max_bits < 4:
        raise VqfError("need at least 4 product bits")
    primes = [p for p in _sieve(1 << (max_bits - 1)) if p % 2 == 1]
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    seen = set()
    out = []
    attempts = 0
    while len(out) < count and attempts < 100000:
        attempts += 1
        p = int(primes[rng.integers(len(primes))])
        q = int(primes[rng.integers(len(primes))])
        m = p * q
        if m.bit_length() > max_bits or m < 9 or m in seen:
            continue
        seen.add(m)
        out.append(m)
    if len(out) < count:
        raise VqfError("could not draw enough distinct biprimes")
    return out


def qubit_scaling(moduli: Sequence[int], passes: int = 2) -> list:
    """Raw vs simplified qubit counts per modulus, lengths unknown."""
    rows = []
    for m in sorted(moduli):
        instance = factoring_instance(m)
        raw = count_qubits_unsimplified(instance)
        problem = build_problem(m, use_curated=False, passes=passes)
        rows.append({
            "m": m, "n_m": instance.n_m,
            "qubits_raw": raw, "qubits_simplified": problem.n,
        })
    return rows


def growth_exponent(rows: Sequence[dict], field: str) -> float:
    """Least-squares slope of log(count) against log(n_m)."""
    x = np.log([r["n_m"] for r in rows])
    y = np.log([max(r[field], 1) for r in rows])
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)
