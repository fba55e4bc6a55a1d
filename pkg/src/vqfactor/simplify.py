"""Classical elimination of clause variables before quantization.

The multiplication clauses are heavily redundant: many factor and carry
bits are forced by simple Boolean reasoning.  This module runs a small
deduction engine over the clause list, recording facts in a relation
store: constant assignments, variable (anti-)equalities, and pairs whose
product must vanish.  Surviving variables become qubits.

Per clause, after substituting known facts, the first matching rule is
applied:

* product form   x*y - 1 = 0      =>  every variable in the product is 1
* single var     c0 + c1*x = 0    =>  x = -c0/c1 (infeasible unless 0/1)
* sum form       x + y - 1 = 0    =>  x*y = 0
* zero sum       positives = 0    =>  each monomial vanishes
* full sum       x_1+..+x_a = a   =>  every x_i = 1
* parity         odd constant and a single odd-coefficient bit => bit = 1
* carry cut      carry weight exceeds the column's positive maximum => 0

Every rule only records facts that hold in all solutions, so the
reduction preserves the solution set exactly.  The engine deliberately
runs a fixed, small number of passes (two, scanning clauses from the top
product bit downward): the deeper fixed point would solve easy instances
outright in the classical stage, whereas stopping early leaves the
residual structure that the quantum stage is meant to handle, and it is
what reproduces the published register sizes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping, Optional, Sequence

from .clauses import (
    Clause,
    FactoringInstance,
    Monomial,
    Variable,
    factoring_instance,
    fixed_assignments,
    generate_clauses,
    monomial,
)
from .errors import InfeasibleError

PROBLEM_FORMAT = "vqfactor-problem/1"


class RelationStore:
    """Accumulated Boolean facts: assignments, equalities, product zeros.

    Equalities form a union-find with negation flags, so a variable can
    be recorded as equal to another or to its complement.  Assignments
    are kept on class roots; product-zero pairs are kept on plain roots
    and cascade into assignments as soon as one side becomes 1.
    """

    def __init__(self):
        self.assignments = {}
        self.product_zeros = set()
        self._parent = {}

    def copy(self) -> "RelationStore":
        out = RelationStore()
        out.assignments = dict(self.assignments)
        out.product_zeros = set(self.product_zeros)
        out._parent = dict(self._parent)
        return out

    def resolve(self, v: Variable):
        """('const', value) if v is determined, else ('var', root, flip)."""
        root, flip = self._find(v)
        if root in self.assignments:
            return ("const", self.assignments[root] ^ flip)
        return ("var", root, flip)

    def _find(self, v: Variable) -> tuple:
        """Class root of v and the flip relating them (v = root XOR flip)."""
        flip = 0
        root = v
        while root in self._parent:
            root, f = self._parent[root]
            flip ^= f
        return root, flip

    find = _find

    def value_of(self, v: Variable) -> Optional[int]:
        got = self.resolve(v)
        return got[1] if got[0] == "const" else None

    def assign(self, v: Variable, value: int) -> bool:
        """Record v = value; returns True if the fact is new."""
        root, flip = self._find(v)
        value ^= flip
        if root in self.assignments:
            if self.assignments[root] != value:
                raise InfeasibleError(f"{v} forced to both 0 and 1")
            return False
        self.assignments[root] = value
        self._cascade_product_zeros(root)
        return True

    def equate(self, x: Variable, y: Variable, flip: int = 0) -> bool:
        """Record x = y (flip=0) or x = 1 - y (flip=1)."""
        rx, fx = self._find(x)
        ry, fy = self._find(y)
        rel = fx ^ fy ^ flip
        if rx is ry or rx == ry:
            if rel != 0:
                raise InfeasibleError(f"{x} equated to its own complement")
            return False
        ax = self.assignments.get(rx)
        ay = self.assignments.get(ry)
        # keep the assigned root (or rx arbitrarily) as the class root
        if ax is None and ay is not None:
            rx, ry = ry, rx
            ax, ay = ay, ax
        self._parent[ry] = (rx, rel)
        if ax is not None and ay is not None and ay != ax ^ rel:
            raise InfeasibleError(f"equating {x} and {y} contradicts assignments")
        if ay is not None:
            del self.assignments[ry]
        self._rehome_product_zeros(ry)
        return True

    def add_product_zero(self, x: Variable, y: Variable) -> bool:
        """Record x*y = 0 (at most one of the pair can be 1)."""
        gx = self.resolve(x)
        gy = self.resolve(y)
        if gx[0] == "const":
            if gx[1] == 0:
                return False
            return self.assign(y, 0) if gy[0] == "var" else self._const_pair(gy)
        if gy[0] == "const":
            if gy[1] == 0:
                return False
            return self.assign(x, 0)
        _, rx, fx = gx
        _, ry, fy = gy
        if rx == ry:
            if fx == fy:  # x*x = x = 0
                return self.assign(x, 0)
            return False  # x * (1-x) = 0 always holds
        if fx or fy:
            # complement-literal pairs are sound to drop (never used to kill)
            return False
        pair = frozenset((rx, ry))
        if pair in self.product_zeros:
            return False
        self.product_zeros.add(pair)
        return True

    @staticmethod
    def _const_pair(got) -> bool:
        if got[1] == 1:
            raise InfeasibleError("product of two variables forced to 1 and 0")
        return False

    def _cascade_product_zeros(self, root: Variable):
        if self.assignments.get(root) != 1:
            self.product_zeros = {p for p in self.product_zeros if root not in p}
            return
        hit = [p for p in self.product_zeros if root in p]
        for pair in hit:
            self.product_zeros.discard(pair)
            (other,) = pair - {root}
            self.assign(other, 0)

    def _rehome_product_zeros(self, old_root: Variable):
        stale = [p for p in self.product_zeros if old_root in p]
        for pair in stale:
            self.product_zeros.discard(pair)
            a, b = tuple(pair) if len(pair) == 2 else (old_root, old_root)
            self.add_product_zero(a, b)

    def kills(self, vars: frozenset) -> bool:
        """True if some recorded product-zero pair lies inside the monomial."""
        if len(vars) < 2 or not self.product_zeros:
            return False
        for pair in combinations(sorted(vars), 2):
            if frozenset(pair) in self.product_zeros:
                return True
        return False


def substitute(clause: Clause, relations: RelationStore) -> Clause:
    """Rewrite a clause modulo the recorded facts.

    Assigned variables become constants, equated variables collapse to
    their class root (complements expand multiplicatively), monomials
    containing a product-zero pair are deleted, and like terms merge.
    """
    acc = {}
    const = clause.constant
    for mono, coef in clause.terms.items():
        plain = set()
        flipped = set()
        dead = False
        for v in mono:
            got = relations.resolve(v)
            if got[0] == "const":
                if got[1] == 0:
                    dead = True
                    break
                continue
            _, root, flip = got
            (flipped if flip else plain).add(root)
        if dead:
            continue
        stack = [(tuple(sorted(flipped)), frozenset(plain), 1)]
        expanded = []
        while stack:
            rest, vars, sign = stack.pop()
            if not rest:
                expanded.append((vars, sign))
                continue
            head, tail = rest[0], rest[1:]
            stack.append((tail, vars, sign))  # choose the 1 of (1 - head)
            stack.append((tail, vars | {head}, -sign))  # choose -head
        for vars, sign in expanded:
            if relations.kills(vars):
                continue
            if not vars:
                const += coef * sign
                continue
            key = monomial(vars)
            acc[key] = acc.get(key, 0) + coef * sign
    return Clause(acc, const)


def _deduce(clause: Clause, relations: RelationStore) -> bool:
    """Apply the first matching deduction rule to one substituted clause.

    Returns True if any new fact was recorded.  The clause itself is not
    rewritten here; callers re-substitute to pick up the new facts.
    """
    if clause.is_constant():
        if clause.constant != 0:
            raise InfeasibleError("clause reduced to a nonzero constant")
        return False

    items = clause.items()

    # product form: single monomial, coefficient 1, constant -1
    if len(items) == 1 and clause.constant == -1 and items[0][1] == 1:
        changed = False
        for v in items[0][0]:
            changed |= relations.assign(v, 1)
        return changed

    # single variable: c0 + c1*x = 0
    if len(items) == 1 and len(items[0][0]) == 1:
        (mono, coef), = items
        num, den = -clause.constant, coef
        if num % den != 0 or num // den not in (0, 1):
            raise InfeasibleError(f"{mono[0]} forced to {num}/{den}")
        return relations.assign(mono[0], num // den)

    # sum form: x + y - 1 = 0  =>  xy = 0 (both variables stay free)
    if (
        len(items) == 2
        and clause.constant == -1
        and all(len(m) == 1 and c == 1 for m, c in items)
    ):
        return relations.add_product_zero(items[0][0][0], items[1][0][0])

    # zero sum: all coefficients positive and constant 0 => every monomial is 0
    if clause.constant == 0 and all(c > 0 for _, c in items):
        changed = False
        for mono, _ in items:
            if len(mono) == 1:
                changed |= relations.assign(mono[0], 0)
            elif len(mono) == 2:
                changed |= relations.add_product_zero(mono[0], mono[1])
        return changed

    # full sum: unit-coefficient singletons summing to the constant's negation
    if (
        clause.constant < 0
        and len(items) == -clause.constant
        and all(len(m) == 1 and c == 1 for m, c in items)
    ):
        changed = False
        for mono, _ in items:
            changed |= relations.assign(mono[0], 1)
        return changed

    # parity: an odd constant must be paid by the unique odd-coefficient bit
    if clause.constant % 2 != 0:
        odd = [(m, c) for m, c in items if c % 2 != 0]
        if not odd:
            raise InfeasibleError("odd constant with no odd-coefficient term")
        if len(odd) == 1 and len(odd[0][0]) == 1:
            return relations.assign(odd[0][0][0], 1)

    # carry cut: a negative weight the positive side can never repay
    bound = sum(c for _, c in items if c > 0) + max(clause.constant, 0)
    changed = False
    for mono, coef in items:
        if coef < 0 and len(mono) == 1 and -coef > bound:
            changed |= relations.assign(mono[0], 0)
    return changed


def apply_rules(clauses: Sequence[Clause], relations: RelationStore) -> tuple:
    """One eager pass over all clauses, top product bit first.

    Deductions propagate downward along the carry chains, matching the
    direction in which the high zero columns of the product pin carries
    and leading factor bits.  Facts found early in the pass are visible
    to later clauses.  Returns (rewritten clauses, relations, changed).
    """
    out = list(clauses)
    changed = False
    for i in reversed(range(len(out))):
        c = substitute(out[i], relations)
        if _deduce(c, relations):
            changed = True
            c = substitute(c, relations)
        if c != out[i]:
            changed = True
        out[i] = c
    return out, relations, changed


@dataclass(frozen=True)
class SimplifiedProblem:
    """Reduced clause system plus everything needed to decode factors."""

    instance: FactoringInstance
    clauses: tuple
    qubit_map: tuple
    relations: RelationStore
    n: int
    n_z: int

    def index_of(self, v: Variable) -> int:
        return self.qubit_map.index(v)

    def decode(self, bits: Sequence[int]) -> tuple:
        """Recover (p, q) from qubit values, restoring eliminated bits."""
        assignment = dict(zip(self.qubit_map, bits))

        def bit_value(v: Variable) -> int:
            got = self.relations.resolve(v)
            if got[0] == "const":
                return got[1]
            _, root, flip = got
            return assignment.get(root, 0) ^ flip

        p = sum(bit_value(Variable("p", k)) << k for k in range(self.instance.n_p))
        q = sum(bit_value(Variable("q", k)) << k for k in range(self.instance.n_q))
        return p, q

    def is_pq_symmetric(self) -> bool:
        """Whether swapping the two factors maps the clause set to itself."""
        if self.instance.n_p != self.instance.n_q:
            return False

        def swap(v: Variable) -> Variable:
            if v.family == "p":
                return Variable("q", v.i)
            if v.family == "q":
                return Variable("p", v.i)
            return v

        def swap_clause(c: Clause) -> Clause:
            return Clause({monomial(swap(v) for v in m): k for m, k in c.terms.items()},
                          c.constant)

        original = sorted(repr(c) for c in self.clauses)
        swapped = sorted(repr(swap_clause(c)) for c in self.clauses)
        return original == swapped


DEFAULT_PASSES = 2


def simplify(clauses: Sequence[Clause], instance: FactoringInstance,
             relations: Optional[RelationStore] = None,
             passes: int = DEFAULT_PASSES) -> SimplifiedProblem:
    """Run a fixed number of rule passes and assemble the reduced problem.

    Two passes reproduce the published register sizes; raising ``passes``
    deduces more aggressively (easy instances then collapse entirely in
    the classical stage).
    """
    store = relations if relations is not None else RelationStore()
    for v, val in fixed_assignments(instance).items():
        store.assign(v, val)

    current = list(clauses)
    for _ in range(passes):
        current, store, changed = apply_rules(current, store)
        if not changed:
            break

    reduced = []
    for c in current:
        c = substitute(c, store)
        if c.is_constant():
            if c.constant != 0:
                raise InfeasibleError("clause reduced to a nonzero constant")
            continue
        reduced.append(c)

    survivors = set()
    for c in reduced:
        survivors.update(c.variables())
    qubit_map = tuple(sorted(survivors))
    n_z = sum(1 for v in qubit_map if v.family == "z")
    return SimplifiedProblem(
        instance=instance,
        clauses=tuple(reduced),
        qubit_map=qubit_map,
        relations=store,
        n=len(qubit_map),
        n_z=n_z,
    )


def simplify_modulus(m: int, n_p: Optional[int] = None, n_q: Optional[int] = None,
                     passes: int = DEFAULT_PASSES) -> SimplifiedProblem:
    """Generate and simplify the clause system for m in one call."""
    instance = factoring_instance(m, n_p, n_q)
    return simplify(generate_clauses(instance), instance, passes=passes)


def count_qubits_unsimplified(instance: FactoringInstance) -> int:
    """Distinct variables of the generated clauses before any rule pass."""
    seen = set()
    for c in generate_clauses(instance):
        seen.update(c.variables())
    return len(seen)


# --- JSON interchange -----------------------------------------------------

def clause_to_json(clause: Clause) -> dict:
    return {
        "terms": [
            {"vars": [str(v) for v in mono], "coef": coef}
            for mono, coef in clause.items()
        ],
        "const": clause.constant,
    }


def clause_from_json(doc: Mapping) -> Clause:
    terms = {}
    for t in doc["terms"]:
        terms[monomial(Variable.parse(s) for s in t["vars"])] = t["coef"]
    return Clause(terms, doc["const"])


def problem_to_json(problem: SimplifiedProblem) -> dict:
    rel = problem.relations
    assignments = {}
    for v in sorted(rel.assignments):
        assignments[str(v)] = rel.assignments[v]
    return {
        "format": PROBLEM_FORMAT,
        "m": problem.instance.m,
        "n_p": problem.instance.n_p,
        "n_q": problem.instance.n_q,
        "length_mode": problem.instance.length_mode,
        "n": problem.n,
        "n_z": problem.n_z,
        "qubit_map": [str(v) for v in problem.qubit_map],
        "clauses": [clause_to_json(c) for c in problem.clauses],
        "relations": {
            "assignments": assignments,
            "product_zeros": sorted(
                sorted(str(v) for v in pair) for pair in rel.product_zeros
            ),
        },
    }


def problem_from_json(doc: Mapping) -> SimplifiedProblem:
    if doc.get("format") != PROBLEM_FORMAT:
        raise ValueError(f"unsupported problem document format {doc.get('format')!r}")
    instance = factoring_instance(
        doc["m"],
        doc["n_p"] if doc["length_mode"] == "known" else None,
        doc["n_q"] if doc["length_mode"] == "known" else None,
    )
    store = RelationStore()
    for name, val in doc["relations"]["assignments"].items():
        store.assign(Variable.parse(name), val)
    for a, b in doc["relations"]["product_zeros"]:
        store.add_product_zero(Variable.parse(a), Variable.parse(b))
    clauses = tuple(clause_from_json(c) for c in doc["clauses"])
    qubit_map = tuple(Variable.parse(s) for s in doc["qubit_map"])
    return SimplifiedProblem(
        instance=instance,
        clauses=clauses,
        qubit_map=qubit_map,
        relations=store,
        n=doc["n"],
        n_z=doc["n_z"],
    )


def dump_problem(problem: SimplifiedProblem) -> str:
    return json.dumps(problem_to_json(problem), indent=2)


def load_problem(text: str) -> SimplifiedProblem:
    return problem_from_json(json.loads(text))
