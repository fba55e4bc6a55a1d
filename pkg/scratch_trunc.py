"""Scratch: truncation-bound variants x deduction-strength variants."""
import numpy as np
from itertools import combinations

from vqfactor import clauses as C
from vqfactor.clauses import Clause, factoring_instance, fixed_assignments, carry, monomial
from vqfactor.simplify import RelationStore, substitute
from vqfactor.errors import InfeasibleError
from scratch_strong import complete_deduce, strong_simplify

TABLE = {
    35: (3, 3, 2, 0),
    77: (4, 3, 6, 3),
    1207: (7, 5, 8, 5),
    33667: (9, 8, 3, 1),
    56153: (8, 8, 4, 0),
    291311: (10, 10, 6, 0),
}


def generate_tight(instance):
    """Generation with the carry bound reduced by the product bit."""
    out = []
    live = set()
    for i in range(instance.clause_count):
        raw = C.raw_clause(instance, i, incoming=live)
        # strip all outgoing, recompute with tighter bound
        kept = {m: c for m, c in raw.terms.items()
                if not (c < 0 and len(m) == 1 and m[0].family == "z" and m[0].i == i)}
        base = Clause(kept, raw.constant)
        bound = base.constant + sum(c for c in base.terms.values() if c > 0)
        terms = dict(base.terms)
        for j in range(1, instance.clause_count + 1):
            if 2 ** j <= bound:
                terms[monomial([carry(i, i + j)])] = -(2 ** j)
        c = Clause(terms, base.constant)
        for v in c.variables():
            if v.family == "z" and v.i == i:
                live.add(v)
        out.append(c)
    return out


for gen_name, gen in (("loose", C.generate_clauses), ("tight", generate_tight)):
    print(f"=== generation: {gen_name}")
    for m, (n_p, n_q, want_n, want_z) in TABLE.items():
        inst = factoring_instance(m, n_p, n_q)
        try:
            cl, vars, n_z, rel = strong_simplify(gen(inst), inst)
            tag = "OK" if (len(vars), n_z) == (want_n, want_z) else "** MISMATCH"
            print(f"  m={m:>6}  n={len(vars):>2} (want {want_n})  n_z={n_z} (want {want_z})  {tag}")
            if (len(vars), n_z) == (want_n, want_z) and len(vars) <= 10:
                print("     vars:", [str(v) for v in vars])
        except InfeasibleError as e:
            print(f"  m={m:>6}  INFEASIBLE: {e}")
