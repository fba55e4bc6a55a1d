"""Command-line frontend for factoring runs and experiment sweeps.

Subcommands
-----------
factor         train the ansatz for one modulus and recover its factors
oracle         print the reduced clause system and its exact ground states
sweep-depth    success probability vs circuit depth (CSV)
sweep-noise    success probability vs Pauli error rate (CSV)
qubit-scaling  raw vs simplified qubit counts over random biprimes (CSV)
report         aggregate result JSON files into mean/std tables

All commands are deterministic functions of their flags; sweep cells can
run in parallel via the VQFACTOR_WORKERS environment variable.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .curated import has_curated_reduction
from .errors import InfeasibleError, InvalidLengthsError, VqfError
from .experiments import (
    depth_sweep,
    growth_exponent,
    noise_sweep,
    qubit_scaling,
    random_odd_biprimes,
)
from .hamiltonian import bits_of_index, cost_hamiltonian, diagonal, energy
from .optimize import TrainConfig, build_problem, run_vqf
from .simplify import dump_problem

RESULT_SCHEMA = "vqfactor-result/1"


def _parse_int_list(text: str) -> list:
    """Comma lists and colon ranges: '1,3,5' or '1:8' (inclusive)."""
    out = []
    for chunk in text.split(","):
        if ":" in chunk:
            lo, hi = chunk.split(":")
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(chunk))
    return out


def _parse_float_list(text: str) -> list:
    return [float(chunk) for chunk in text.split(",")]


def _write_csv(path, rows, fields):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row[k] for k in fields})


def _write_distribution(path, result):
    problem = result.problem
    energies = None
    if problem is not None and problem.n > 0:
        energies = diagonal(cost_hamiltonian(problem), problem.n).values
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "bitstring", "probability", "energy"])
        for index, prob in enumerate(result.distribution):
            bits = "".join(str(b) for b in bits_of_index(index, result.n)) if result.n else ""
            e = energies[index] if energies is not None else 0.0
            writer.writerow([index, bits, f"{prob:.12g}", f"{e:.12g}"])


def _result_json(result, args) -> dict:
    return {
        "schema": RESULT_SCHEMA,
        "m": result.m,
        "n": result.n,
        "n_z": result.n_z,
        "s": result.params.depth,
        "epsilon": args.epsilon,
        "nu": args.nu,
        "seed": args.seed,
        "params": {"betas": list(result.params.betas),
                   "gammas": list(result.params.gammas)},
        "final_cost": result.final_cost,
        "success_prob": result.success_prob,
        "factors": list(result.factors) if result.factors else None,
        "eval_count": result.eval_count,
        "converged": result.converged,
        "likely_prime": result.likely_prime,
    }


def cmd_factor(args) -> int:
    trace = [] if args.trace else None
    config = TrainConfig(depth=args.depth, grid_size=args.grid,
                         cost_mode=args.cost_mode, max_evals=args.max_evals)
    try:
        result = run_vqf(
            args.m, depth=args.depth, epsilon=args.epsilon, nu=args.nu,
            seed=args.seed, n_p=args.np, n_q=args.nq, config=config,
            use_curated=not args.no_curated, trace=trace,
        )
    except (InfeasibleError, InvalidLengthsError) as err:
        print(f"infeasible: {err}", file=sys.stderr)
        return 2

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = f"m{args.m}_s{args.depth}_seed{args.seed}"
    result_path = out / f"result_{stem}.json"
    result_path.write_text(json.dumps(_result_json(result, args), indent=2))
    _write_distribution(out / f"distribution_{stem}.csv", result)
    if trace is not None:
        with open(out / f"trace_{stem}.jsonl", "w") as fh:
            for record in trace:
                fh.write(json.dumps(record) + "\n")

    print(f"m={result.m}  n={result.n} qubits ({result.n_z} carries)  "
          f"depth={result.params.depth}  success={result.success_prob:.4f}  "
          f"evals={result.eval_count}")
    if result.factors:
        p, q = result.factors
        print(f"factors: {result.m} = {p} x {q}")
        print(f"wrote {result_path}")
        return 0
    if result.likely_prime:
        print(f"no nontrivial factors exist in the search space; "
              f"{result.m} is likely prime", file=sys.stderr)
    else:
        print("no factors recovered within the sample budget", file=sys.stderr)
    return 1


def cmd_oracle(args) -> int:
    try:
        problem = build_problem(args.m, args.np, args.nq,
                                use_curated=not args.no_curated)
    except (InfeasibleError, InvalidLengthsError) as err:
        print(f"infeasible: {err}", file=sys.stderr)
        return 2

    curated = not args.no_curated and args.np is None and has_curated_reduction(args.m)
    print(f"m={args.m}  n_p={problem.instance.n_p}  n_q={problem.instance.n_q}  "
          f"mode={problem.instance.length_mode}{' (curated table)' if curated else ''}")
    print(f"qubits: n={problem.n}  carries: n_z={problem.n_z}  "
          f"pq-symmetric: {problem.is_pq_symmetric()}")
    print(f"qubit map: {[str(v) for v in problem.qubit_map]}")
    print("clauses:")
    for c in problem.clauses:
        print(f"  {c}")
    if args.json:
        print(dump_problem(problem))

    if problem.n == 0:
        p, q = problem.decode(())
        print(f"classically solved: {args.m} = {p} x {q}")
        return 0

    table = diagonal(cost_hamiltonian(problem), problem.n)
    vmin = float(table.values.min())
    zero_indices = np.flatnonzero(table.values == vmin)
    print(f"minimum energy: {vmin:g}  ({len(zero_indices)} ground states)")
    any_factor = False
    for index in zero_indices:
        bits = bits_of_index(int(index), problem.n)
        p, q = problem.decode(bits)
        good = p > 1 and q > 1 and p * q == args.m
        any_factor |= good
        mark = "factor pair" if good else "spurious"
        print(f"  |{''.join(str(b) for b in bits)}>  ->  p={p} q={q}  [{mark}]")
    if vmin != 0:
        print("no zero-energy state: instance infeasible at these lengths",
              file=sys.stderr)
        return 2
    if not any_factor:
        print(f"ground states decode to trivial divisors only; "
              f"{args.m} is likely prime", file=sys.stderr)
        return 1
    return 0


def cmd_sweep_depth(args) -> int:
    depths = _parse_int_list(args.depths)
    rows = depth_sweep(
        args.m, depths, epsilon=args.epsilon, nu=args.nu, seed=args.seed,
        repetitions=args.reps, grid_size=args.grid, cost_mode=args.cost_mode,
        use_curated=not args.no_curated, n_p=args.np, n_q=args.nq,
        retrain=args.retrain,
    )
    fields = ["m", "s", "epsilon", "nu", "success_mean", "success_std", "repetitions"]
    _write_csv(args.out, rows, fields)
    for row in rows:
        print(f"m={row['m']} s={row['s']}: success {row['success_mean']:.4f} "
              f"+- {row['success_std']:.4f}")
    print(f"wrote {args.out}")
    return 0


def cmd_sweep_noise(args) -> int:
    epsilons = _parse_float_list(args.epsilons)
    for epsilon in epsilons:
        if epsilon < 0:
            print("error rates must be nonnegative", file=sys.stderr)
            return 2
    rows = noise_sweep(
        args.m, epsilons, depth=args.depth, nu=args.nu, seed=args.seed,
        repetitions=args.reps, grid_size=args.grid, cost_mode=args.cost_mode,
        use_curated=not args.no_curated, n_p=args.np, n_q=args.nq,
    )
    fields = ["m", "epsilon", "s", "nu", "success_mean", "success_std", "repetitions"]
    _write_csv(args.out, rows, fields)
    for row in rows:
        print(f"m={row['m']} eps={row['epsilon']:g} s={row['s']}: "
              f"success {row['success_mean']:.4f} +- {row['success_std']:.4f}")
    print(f"wrote {args.out}")
    return 0


def cmd_qubit_scaling(args) -> int:
    if args.m_list:
        moduli = _parse_int_list(args.m_list)
    else:
        moduli = random_odd_biprimes(args.count, args.max_bits, args.seed)
    rows = qubit_scaling(moduli)
    fields = ["m", "n_m", "qubits_raw", "qubits_simplified"]
    _write_csv(args.out, rows, fields)
    raw_exp = growth_exponent(rows, "qubits_raw")
    simp_exp = growth_exponent(rows, "qubits_simplified")
    print(f"{len(rows)} instances; growth exponents: raw {raw_exp:.2f}, "
          f"simplified {simp_exp:.2f}")
    print(f"wrote {args.out}")
    return 0


def cmd_report(args) -> int:
    records = []
    for path in args.files:
        with open(path) as fh:
            doc = json.load(fh)
        if doc.get("schema") != RESULT_SCHEMA:
            print(f"{path}: not a result file", file=sys.stderr)
            return 2
        records.append(doc)
    if not records:
        print("no input files", file=sys.stderr)
        return 2

    groups = {}
    for doc in records:
        key = (doc["m"], doc["s"], doc["epsilon"])
        groups.setdefault(key, []).append(doc["success_prob"])
    rows = []
    for (m, s, epsilon) in sorted(groups):
        values = np.array(groups[(m, s, epsilon)])
        rows.append({
            "m": m, "s": s, "epsilon": epsilon, "runs": len(values),
            "success_mean": float(values.mean()),
            "success_std": float(values.std(ddof=1)) if len(values) > 1 else 0.0,
        })
    fields = ["m", "s", "epsilon", "runs", "success_mean", "success_std"]
    if args.out:
        _write_csv(args.out, rows, fields)
        print(f"wrote {args.out}")
    else:
        writer = csv.DictWriter(sys.stdout, fieldnames=fields)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    return 0


def _add_common(parser, with_depth=True):
    parser.add_argument("--m", type=int, required=True, help="odd modulus to factor")
    parser.add_argument("--np", type=int, default=None, help="known bit length of p")
    parser.add_argument("--nq", type=int, default=None, help="known bit length of q")
    if with_depth:
        parser.add_argument("--depth", type=int, default=3, help="ansatz layers")
    parser.add_argument("--epsilon", type=float, default=1e-3,
                        help="Pauli error rate per unitary")
    parser.add_argument("--nu", type=int, default=10000,
                        help="samples per cost estimate")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--grid", type=int, default=None,
                        help="override the per-layer grid edge")
    parser.add_argument("--cost-mode", choices=["sampled", "exact"],
                        default="sampled")
    parser.add_argument("--no-curated", action="store_true",
                        help="always use the rule engine, never curated tables")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vqfactor",
        description="Factor odd biprimes with a noisy simulated QAOA pipeline.",
        epilog="Set VQFACTOR_WORKERS to parallelize sweep cells.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("factor", help="run the full pipeline for one modulus")
    _add_common(p)
    p.add_argument("--out", default="results", help="output directory")
    p.add_argument("--max-evals", type=int, default=1_000_000)
    p.add_argument("--trace", action="store_true",
                   help="write a JSON-lines log of every cost evaluation")
    p.set_defaults(fn=cmd_factor)

    p = sub.add_parser("oracle", help="reduced system and exact ground states")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--np", type=int, default=None)
    p.add_argument("--nq", type=int, default=None)
    p.add_argument("--no-curated", action="store_true")
    p.add_argument("--json", action="store_true",
                   help="also print the problem document as JSON")
    p.set_defaults(fn=cmd_oracle)

    p = sub.add_parser("sweep-depth", help="success probability vs depth")
    _add_common(p, with_depth=False)
    p.add_argument("--depths", default="1:8",
                   help="comma list or lo:hi range, e.g. 1:8 or 2,4,6")
    p.add_argument("--reps", type=int, default=3)
    p.add_argument("--retrain", action="store_true",
                   help="retrain from scratch at every depth")
    p.add_argument("--out", default="sweep_depth.csv")
    p.set_defaults(fn=cmd_sweep_depth)

    p = sub.add_parser("sweep-noise", help="success probability vs error rate")
    _add_common(p)
    p.add_argument("--epsilons", default="0,1e-4,1e-3",
                   help="comma list of error rates")
    p.add_argument("--reps", type=int, default=3)
    p.add_argument("--out", default="sweep_noise.csv")
    p.set_defaults(fn=cmd_sweep_noise)

    p = sub.add_parser("qubit-scaling", help="raw vs simplified qubit counts")
    p.add_argument("--m-list", default=None,
                   help="explicit comma list of odd biprimes")
    p.add_argument("--count", type=int, default=30,
                   help="number of random biprimes when no list is given")
    p.add_argument("--max-bits", type=int, default=14)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="qubit_scaling.csv")
    p.set_defaults(fn=cmd_qubit_scaling)

    p = sub.add_parser("report", help="aggregate result JSON files")
    p.add_argument("files", nargs="*", help="result_*.json files")
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")
    p.set_defaults(fn=cmd_report)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except VqfError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
