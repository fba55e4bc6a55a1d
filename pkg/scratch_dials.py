"""Scratch: search rule/generation dial combos that hit all four table targets."""
import itertools
from itertools import combinations

from vqfactor.clauses import (
    Clause, carry, factoring_instance, fixed_assignments, monomial, raw_clause,
)
from vqfactor.simplify import RelationStore, substitute
from vqfactor.errors import InfeasibleError

TARGETS = {
    35: (3, 3, 2, 0),
    77: (4, 3, 6, 3),
    1207: (7, 5, 8, 5),
    33667: (9, 8, 3, 1),
}


def generate(instance, coverage="nc", trunc="tight"):
    """coverage: nc -> positions 0..n_p+n_q-2 with free sinks beyond;
    full -> positions 0..n_p+n_q-1, carry targets capped at the top."""
    n_pos = instance.clause_count + (1 if coverage == "full" else 0)
    out = []
    live = set()
    fixed = fixed_assignments(instance)
    for i in range(n_pos):
        pairs = []
        for j in range(i + 1):
            if j >= instance.n_q or i - j >= instance.n_p:
                continue
            vars = []
            keep = True
            for v in (("q", j), ("p", i - j)):
                from vqfactor.clauses import Variable
                vv = Variable(v[0], v[1])
                val = fixed.get(vv)
                if val == 0:
                    keep = False
                    break
                if val is None:
                    vars.append(vv)
            if keep:
                pairs.append((vars, 1))
        for j in range(i):
            zv = carry(j, i)
            if zv in live:
                pairs.append(([zv], 1))
        base = Clause.build(pairs, constant=-instance.m_bit(i))
        if trunc == "tight":
            bound = base.constant + sum(c for c in base.terms.values() if c > 0)
        else:
            bound = base.max_positive()
        terms = dict(base.terms)
        j = 1
        while 2 ** j <= bound:
            if coverage != "full" or i + j <= n_pos - 1:
                zv = carry(i, i + j)
                terms[monomial([zv])] = -(2 ** j)
                live.add(zv)
            j += 1
        out.append(Clause(terms, base.constant))
    return out


def relaxed_range(clause):
    lo = hi = clause.constant
    for c in clause.terms.values():
        if c > 0:
            hi += c
        else:
            lo += c
    return lo, hi


def restrict(clause, var, value):
    acc = {}
    const = clause.constant
    for mono, coef in clause.terms.items():
        if var not in mono:
            acc[mono] = acc.get(mono, 0) + coef
        elif value == 1:
            rest = tuple(v for v in mono if v != var)
            if rest:
                acc[rest] = acc.get(rest, 0) + coef
            else:
                const += coef
    return Clause(acc, const)


def deduce(clause, rel, dials):
    """One deduction attempt on a substituted clause; True if new fact."""
    if clause.is_constant():
        if clause.constant != 0:
            raise InfeasibleError("constant clause nonzero")
        return False
    items = clause.items()
    # normalize sign so that most coefficients are positive
    npos = sum(1 for _, c in items if c > 0)
    if npos * 2 < len(items) or (npos * 2 == len(items) and clause.constant > 0):
        clause = Clause({m: -c for m, c in clause.terms.items()}, -clause.constant)
        items = clause.items()

    # R1: single monomial, coef 1, const -1
    if len(items) == 1 and clause.constant == -1 and items[0][1] == 1:
        ch = False
        for v in items[0][0]:
            ch |= rel.assign(v, 1)
        return ch
    # R3': single monomial of one var
    if len(items) == 1 and len(items[0][0]) == 1:
        (mono, coef), = items
        num, den = -clause.constant, coef
        if num % den != 0 or num // den not in (0, 1):
            raise InfeasibleError("single variable forced out of range")
        return rel.assign(mono[0], num // den)
    # R2 (+ extended pairwise exclusion when dial on)
    singles = [m[0] for m, c in items if len(m) == 1 and c == 1]
    if (
        clause.constant == -1
        and len(singles) == len(items)
        and (len(items) == 2 or dials.get("r2ext"))
    ):
        ch = False
        for x, y in combinations(singles, 2):
            ch |= rel.add_product_zero(x, y)
        return ch
    # R4: all same-sign, zero constant
    if clause.constant == 0 and all(c > 0 for _, c in items):
        ch = False
        for mono, _ in items:
            if len(mono) == 1:
                ch |= rel.assign(mono[0], 0)
            elif len(mono) == 2:
                ch |= rel.add_product_zero(mono[0], mono[1])
        return ch
    # R5: unit singletons summing to -constant
    if (
        clause.constant < 0
        and len(items) == -clause.constant
        and all(len(m) == 1 and c == 1 for m, c in items)
    ):
        ch = False
        for mono, _ in items:
            ch |= rel.assign(mono[0], 1)
        return ch
    # R6: bound forcing
    if dials.get("forcing"):
        for v in sorted(clause.variables()):
            lo0, hi0 = relaxed_range(restrict(clause, v, 0))
            lo1, hi1 = relaxed_range(restrict(clause, v, 1))
            f0 = lo0 <= 0 <= hi0
            f1 = lo1 <= 0 <= hi1
            if not f0 and not f1:
                raise InfeasibleError("clause cannot vanish")
            if f0 != f1:
                rel.assign(v, 1 if f1 else 0)
                return True
    return False


def run(m, dials):
    n_p, n_q, want_n, want_z = TARGETS[m]
    inst = factoring_instance(m, n_p, n_q)
    cl = generate(inst, dials["coverage"], dials["trunc"])
    rel = RelationStore()
    for v, val in fixed_assignments(inst).items():
        rel.assign(v, val)
    current = cl
    passes = dials.get("passes", 200)
    for _ in range(passes):
        changed = False
        out = []
        for c in current:
            c = substitute(c, rel)
            while deduce(c, rel, dials):
                changed = True
                c = substitute(c, rel)
            out.append(c)
        current = out
        if not changed:
            break
    vars = set()
    for c in current:
        if not c.is_constant():
            vars.update(c.variables())
    n_z = sum(1 for v in vars if v.family == "z")
    return len(vars), n_z, current


best = []
for coverage in ("nc", "full"):
    for trunc in ("tight", "loose"):
        for forcing in (False, True):
            for r2ext in (False, True):
                dials = {"coverage": coverage, "trunc": trunc,
                         "forcing": forcing, "r2ext": r2ext}
                res = {}
                ok = 0
                for m in TARGETS:
                    try:
                        n, nz, _ = run(m, dials)
                    except InfeasibleError:
                        n, nz = -1, -1
                    want = TARGETS[m][2:]
                    res[m] = (n, nz)
                    ok += (n, nz) == want
                print(f"cov={coverage:4} trunc={trunc:5} R6={int(forcing)} r2x={int(r2ext)}"
                      f" -> {res}  [{ok}/4]")
