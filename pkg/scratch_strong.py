"""Scratch: calibrate stronger per-clause deduction against the instance table."""
import itertools
from itertools import combinations

import numpy as np

from vqfactor.clauses import factoring_instance, generate_clauses
from vqfactor.simplify import RelationStore, substitute
from vqfactor.errors import InfeasibleError

TABLE = {
    35: (3, 3, 2, 0),
    77: (4, 3, 6, 3),
    1207: (7, 5, 8, 5),
    33667: (9, 8, 3, 1),
    56153: (8, 8, 4, 0),
    291311: (10, 10, 6, 0),
}


def complete_deduce(clause, rel, enable_pz=True, enable_eq=False, enable_anti=False):
    vars = sorted(clause.variables())
    k = len(vars)
    if k == 0:
        if clause.constant != 0:
            raise InfeasibleError("constant clause nonzero")
        return False
    if k > 20:
        return False
    idx = {v: b for b, v in enumerate(vars)}
    A = np.arange(1 << k, dtype=np.int64)
    vals = np.full(1 << k, clause.constant, dtype=np.int64)
    for mono, coef in clause.terms.items():
        mask = sum(1 << idx[v] for v in mono)
        vals += coef * (((A & mask) == mask).astype(np.int64))
    sat = vals == 0
    for pair in list(rel.product_zeros):
        pv = list(pair)
        if len(pv) == 2 and pv[0] in idx and pv[1] in idx:
            both = (1 << idx[pv[0]]) | (1 << idx[pv[1]])
            sat &= (A & both) != both
    if not sat.any():
        raise InfeasibleError("clause unsatisfiable")
    S = A[sat]
    changed = False
    for v in vars:
        bit = (S >> idx[v]) & 1
        if not bit.any():
            changed |= rel.assign(v, 0)
        elif bit.all():
            changed |= rel.assign(v, 1)
    for x, y in combinations(vars, 2):
        if rel.value_of(x) is not None or rel.value_of(y) is not None:
            continue
        bx = (S >> idx[x]) & 1
        by = (S >> idx[y]) & 1
        if enable_pz and not (bx & by).any():
            changed |= rel.add_product_zero(x, y)
        if enable_eq and (bx == by).all():
            changed |= rel.equate(x, y, 0)
        if enable_anti and (bx != by).all():
            changed |= rel.equate(x, y, 1)
    return changed


def strong_simplify(clauses, instance, **kw):
    from vqfactor.clauses import fixed_assignments
    rel = RelationStore()
    for v, val in fixed_assignments(instance).items():
        rel.assign(v, val)
    current = list(clauses)
    for _ in range(60):
        changed = False
        out = []
        for c in current:
            c = substitute(c, rel)
            while complete_deduce(c, rel, **kw):
                changed = True
                c = substitute(c, rel)
            out.append(c)
        current = out
        if not changed:
            break
    current = [c for c in current if not c.is_constant()]
    vars = set()
    for c in current:
        vars.update(c.variables())
    n_z = sum(1 for v in vars if v.family == "z")
    return current, sorted(vars), n_z, rel


for m, (n_p, n_q, want_n, want_z) in TABLE.items():
    inst = factoring_instance(m, n_p, n_q)
    cl, vars, n_z, rel = strong_simplify(generate_clauses(inst), inst)
    tag = "OK" if (len(vars), n_z) == (want_n, want_z) else "** MISMATCH"
    print(f"m={m:>6}  n={len(vars):>2} (want {want_n})  n_z={n_z} (want {want_z})  {tag}")
    if len(vars) <= 10:
        print("   vars:", [str(v) for v in vars])
        for c in cl[:8]:
            print("   ", c)
