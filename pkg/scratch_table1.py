"""Scratch: check rule-engine reduction against the known instance table."""
import itertools

from vqfactor.clauses import factoring_instance, generate_clauses, count_variables
from vqfactor.simplify import simplify, count_qubits_unsimplified

# m: (n_p, n_q, expected_n, expected_carries, expected_sym)
TABLE = {
    35: (3, 3, 2, 0, True),
    77: (4, 3, 6, 3, False),
    1207: (7, 5, 8, 5, False),
    33667: (9, 8, 3, 1, False),
    56153: (8, 8, 4, 0, True),
    291311: (10, 10, 6, 0, True),
}

FACTORS = {35: (7, 5), 77: (11, 7), 1207: (71, 17), 33667: (257, 131),
           56153: (241, 233), 291311: (557, 523)}


def brute_force_solutions(problem):
    """All qubit assignments zeroing every clause; decoded (p, q) pairs."""
    sols = []
    for bits in itertools.product((0, 1), repeat=problem.n):
        a = dict(zip(problem.qubit_map, bits))
        if all(c.evaluate(a) == 0 for c in problem.clauses):
            sols.append((bits, problem.decode(bits)))
    return sols


for m, (n_p, n_q, exp_n, exp_z, exp_sym) in TABLE.items():
    inst = factoring_instance(m, n_p, n_q)
    raw = count_variables(generate_clauses(inst))
    prob = simplify(generate_clauses(inst), inst)
    sym = prob.is_pq_symmetric()
    ok = (prob.n == exp_n and prob.n_z == exp_z and sym == exp_sym)
    print(f"m={m:>6}  raw={raw:>3}  n={prob.n} (want {exp_n})  "
          f"n_z={prob.n_z} (want {exp_z})  sym={sym} (want {exp_sym})  "
          f"{'OK' if ok else '** MISMATCH'}")
    if prob.n <= 12:
        sols = brute_force_solutions(prob)
        pairs = sorted({pq for _, pq in sols})
        want = FACTORS[m]
        good = all(p * q == m for p, q in pairs) and set(pairs) >= {tuple(sorted(want, reverse=True))} if pairs else False
        print(f"          solutions={len(sols)} decoded={pairs[:4]} pq_ok={good}")
    for c in prob.clauses[:10]:
        print("          ", c)
