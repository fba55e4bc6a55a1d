"""Scratch: confirm the calibrated engine on all table instances + sanity set."""
import itertools
from itertools import combinations

from vqfactor.clauses import factoring_instance, fixed_assignments
from vqfactor.simplify import RelationStore, substitute
from vqfactor.errors import InfeasibleError
from scratch_dials import generate

TARGETS = {
    35: (3, 3, 2, 0, True),
    77: (4, 3, 6, 3, False),
    1207: (7, 5, 8, 5, False),
    33667: (9, 8, 3, 1, False),
}
FACTORS = {35: (7, 5), 77: (11, 7), 1207: (71, 17), 33667: (257, 131)}


def deduce_first_match(clause, rel):
    """Try rules in order; apply the first that matches, then stop."""
    if clause.is_constant():
        if clause.constant != 0:
            raise InfeasibleError("constant clause nonzero")
        return False
    items = clause.items()

    # R1
    if len(items) == 1 and clause.constant == -1 and items[0][1] == 1:
        ch = False
        for v in items[0][0]:
            ch |= rel.assign(v, 1)
        return ch
    # R3' single lone variable
    if len(items) == 1 and len(items[0][0]) == 1:
        (mono, coef), = items
        num, den = -clause.constant, coef
        if num % den != 0 or num // den not in (0, 1):
            raise InfeasibleError("variable forced out of {0,1}")
        return rel.assign(mono[0], num // den)
    # R2
    singles = [m[0] for m, c in items if len(m) == 1 and c == 1]
    if clause.constant == -1 and len(singles) == len(items) and len(items) == 2:
        return rel.add_product_zero(singles[0], singles[1])
    # R4
    if clause.constant == 0 and all(c > 0 for _, c in items):
        ch = False
        for mono, _ in items:
            if len(mono) == 1:
                ch |= rel.assign(mono[0], 0)
            elif len(mono) == 2:
                ch |= rel.add_product_zero(mono[0], mono[1])
        if ch:
            return True
    # R5
    if (clause.constant < 0 and len(items) == -clause.constant
            and all(len(m) == 1 and c == 1 for m, c in items)):
        ch = False
        for mono, _ in items:
            ch |= rel.assign(mono[0], 1)
        return ch
    # parity: odd constant, exactly one odd-coefficient singleton monomial
    if clause.constant % 2 != 0:
        odd = [(m, c) for m, c in items if c % 2 != 0]
        if len(odd) == 1 and len(odd[0][0]) == 1:
            return rel.assign(odd[0][0][0], 1)
    # iterated carry truncation
    bound = sum(c for _, c in items if c > 0) + max(clause.constant, 0)
    ch = False
    for mono, coef in items:
        if coef < 0 and len(mono) == 1 and -coef > bound:
            ch |= rel.assign(mono[0], 0)
    return ch


def engine(clauses, instance, passes=2):
    rel = RelationStore()
    for v, val in fixed_assignments(instance).items():
        rel.assign(v, val)
    current = list(clauses)
    for _ in range(passes):
        changed = False
        for i in reversed(range(len(current))):
            c = substitute(current[i], rel)
            if deduce_first_match(c, rel):
                changed = True
                c = substitute(c, rel)
            current[i] = c
        if not changed:
            break
    final = [substitute(c, rel) for c in current]
    for c in final:
        if c.is_constant() and c.constant != 0:
            raise InfeasibleError("nonzero constant at exit")
    final = [c for c in final if not c.is_constant()]
    vars = set()
    for c in final:
        vars.update(c.variables())
    nz = sum(1 for v in vars if v.family == "z")
    return sorted(vars), nz, final, rel


def decode(instance, rel, qmap, bits):
    a = dict(zip(qmap, bits))

    def val(fam, k):
        from vqfactor.clauses import Variable
        v = Variable(fam, k)
        got = rel.resolve(v)
        if got[0] == "const":
            return got[1]
        return a.get(got[1], 0) ^ got[2]

    p = sum(val("p", k) << k for k in range(instance.n_p))
    q = sum(val("q", k) << k for k in range(instance.n_q))
    return p, q


print("== table instances ==")
for m, (n_p, n_q, wn, wz, wsym) in TARGETS.items():
    inst = factoring_instance(m, n_p, n_q)
    cl = generate(inst, "full", "tight")
    vars, nz, final, rel = engine(cl, inst)
    n = len(vars)
    tag = "OK" if (n, nz) == (wn, wz) else "** MISMATCH"
    print(f"m={m:>6}: n={n} (want {wn})  n_z={nz} (want {wz})  {tag}")
    print("   vars:", [str(v) for v in vars])
    for c in final:
        print("   ", c)
    # solution check by brute force
    sols = []
    for bits in itertools.product((0, 1), repeat=n):
        aa = dict(zip(vars, bits))
        if all(c.evaluate(aa) == 0 for c in final):
            sols.append(decode(inst, rel, vars, bits))
    good = {pq for pq in sols if pq[0] * pq[1] == m}
    print(f"   solutions: {sols}  all-correct={len(good) == len(sols) and len(sols) > 0}")

print("== sanity: wlog + small knowns ==")
for m in (9, 15, 21, 25, 35, 49, 77, 91, 143, 187, 247):
    inst = factoring_instance(m)
    cl = generate(inst, "full", "tight")
    try:
        vars, nz, final, rel = engine(cl, inst)
        n = len(vars)
        sols = []
        if n <= 14:
            for bits in itertools.product((0, 1), repeat=n):
                aa = dict(zip(vars, bits))
                if all(c.evaluate(aa) == 0 for c in final):
                    sols.append(decode(inst, rel, vars, bits))
        good = [pq for pq in sols if pq[0] * pq[1] == m and pq[0] > 1 and pq[1] > 1]
        bad = [pq for pq in sols if pq[0] * pq[1] != m]
        print(f"m={m:>4} wlog: n={n:>2} n_z={nz:>2} sols={len(sols)} good={len(good)} bad={len(bad)}")
    except InfeasibleError as e:
        print(f"m={m:>4} wlog: INFEASIBLE ({e})")
