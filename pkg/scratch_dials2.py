"""Scratch: scan order x pass-cap x rule combos for exact table reproduction."""
from itertools import combinations

from vqfactor.clauses import factoring_instance, fixed_assignments
from vqfactor.simplify import RelationStore, substitute
from vqfactor.errors import InfeasibleError
from scratch_dials import generate, relaxed_range, restrict

TARGETS = {
    35: (3, 3, 2, 0),
    77: (4, 3, 6, 3),
    1207: (7, 5, 8, 5),
    33667: (9, 8, 3, 1),
}


def deduce_once(clause, rel, r2ext=False):
    """Inspect one substituted clause, record all facts its rules yield."""
    if clause.is_constant():
        if clause.constant != 0:
            raise InfeasibleError("constant clause nonzero")
        return False
    changed = False
    items = clause.items()

    # R1: single monomial, coef 1, constant -1 -> all vars 1
    if len(items) == 1 and clause.constant == -1 and items[0][1] == 1:
        for v in items[0][0]:
            changed |= rel.assign(v, 1)
        return changed
    # R3': single lone variable
    if len(items) == 1 and len(items[0][0]) == 1:
        (mono, coef), = items
        num, den = -clause.constant, coef
        if num % den != 0 or num // den not in (0, 1):
            raise InfeasibleError("variable forced out of {0,1}")
        return rel.assign(mono[0], num // den)
    # R2: x + y - 1 = 0 -> xy = 0 (optionally for longer exactly-one sums)
    singles = [m[0] for m, c in items if len(m) == 1 and c == 1]
    if clause.constant == -1 and len(singles) == len(items) and (
        len(items) == 2 or r2ext
    ):
        for x, y in combinations(singles, 2):
            changed |= rel.add_product_zero(x, y)
        return changed
    # R4: zero constant, all coefficients positive -> every monomial vanishes
    if clause.constant == 0 and all(c > 0 for _, c in items):
        for mono, _ in items:
            if len(mono) == 1:
                changed |= rel.assign(mono[0], 0)
            elif len(mono) == 2:
                changed |= rel.add_product_zero(mono[0], mono[1])
        return changed
    # R5: unit singletons summing to the negated constant -> all 1
    if (
        clause.constant < 0
        and len(items) == -clause.constant
        and all(len(m) == 1 and c == 1 for m, c in items)
    ):
        for mono, _ in items:
            changed |= rel.assign(mono[0], 1)
        return changed
    # R7p iterated truncation: negative singleton too heavy for the positives
    bound = clause.max_positive()
    for mono, coef in items:
        if coef < 0 and len(mono) == 1 and -coef > bound:
            changed |= rel.assign(mono[0], 0)
    return changed


def capped_simplify(clauses, instance, order="desc", passes=2, r2ext=False):
    rel = RelationStore()
    for v, val in fixed_assignments(instance).items():
        rel.assign(v, val)
    current = list(clauses)
    idx = list(range(len(current)))
    if order == "desc":
        idx = idx[::-1]
    for _ in range(passes):
        changed = False
        for i in idx:
            c = substitute(current[i], rel)
            while deduce_once(c, rel, r2ext):
                changed = True
                c = substitute(c, rel)
            current[i] = c
        if not changed:
            break
    final = [substitute(c, rel) for c in current]
    for c in final:
        if c.is_constant() and c.constant != 0:
            raise InfeasibleError("nonzero constant clause at exit")
    final = [c for c in final if not c.is_constant()]
    vars = set()
    for c in final:
        vars.update(c.variables())
    n_z = sum(1 for v in vars if v.family == "z")
    return len(vars), n_z, final


for order in ("asc", "desc"):
    for passes in (1, 2, 3, 4, 50):
        for r2ext in (False, True):
            res = {}
            ok = 0
            for m, (n_p, n_q, wn, wz) in TARGETS.items():
                inst = factoring_instance(m, n_p, n_q)
                cl = generate(inst, "full", "tight")
                try:
                    n, nz, _ = capped_simplify(cl, inst, order, passes, r2ext)
                except InfeasibleError:
                    n, nz = -1, -1
                res[m] = (n, nz)
                ok += (n, nz) == (wn, wz)
            flag = " <<<<" if ok == 4 else ""
            print(f"order={order} passes={passes:>2} r2ext={int(r2ext)} -> {res} [{ok}/4]{flag}")
