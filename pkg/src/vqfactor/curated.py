"""Hand-reduced clause systems for two benchmark biprimes.

For 56153 = 233 x 241 and 291311 = 523 x 557 the factors share all but a
few bit positions, and the published reductions exploit that structure
far beyond what the generic rule passes reach.  This module ships those
reduced systems directly: the fixed bits live in the relation store, the
free bits appear in short symmetric clauses whose zero set is exactly
the two factor orderings.

Both systems are carry free and invariant under swapping p and q.
"""

from __future__ import annotations

from .clauses import Clause, factoring_instance, monomial, p_bit, q_bit
from .simplify import RelationStore, SimplifiedProblem

# m -> (n_p, n_q, free bit positions, clause builder)
_TABLES = {}


def _register(m, n_p, n_q, p_value, q_value, free_positions, clause_spec):
    _TABLES[m] = (n_p, n_q, p_value, q_value, tuple(free_positions), clause_spec)


# 56153 = 233 x 241; the factors differ only at bit positions 3 and 4.
_register(
    56153, 8, 8, 233, 241, (3, 4),
    [
        ([(("p", 3),), (("q", 3),)], -1),
        ([(("p", 4),), (("q", 4),)], -1),
        ([(("p", 4), ("q", 3)), (("p", 3), ("q", 4))], -1),
    ],
)

# 291311 = 523 x 557; the factors differ at bit positions 1, 2 and 5.
_register(
    291311, 10, 10, 523, 557, (1, 2, 5),
    [
        ([(("p", 1),), (("q", 1),)], -1),
        ([(("p", 2),), (("q", 2),)], -1),
        ([(("p", 5),), (("q", 5),)], -1),
        ([(("p", 2), ("q", 1)), (("p", 1), ("q", 2))], -1),
        ([(("p", 5), ("q", 1)), (("p", 1), ("q", 5))], -1),
    ],
)


def has_curated_reduction(m: int) -> bool:
    return m in _TABLES


def curated_moduli() -> tuple:
    return tuple(sorted(_TABLES))


def curated_problem(m: int) -> SimplifiedProblem:
    """The shipped reduced system for m; raises KeyError if none exists."""
    n_p, n_q, p_value, q_value, free, clause_spec = _TABLES[m]
    instance = factoring_instance(m, n_p, n_q)

    relations = RelationStore()
    for k in range(n_p):
        if k not in free:
            relations.assign(p_bit(k), (p_value >> k) & 1)
    for k in range(n_q):
        if k not in free:
            relations.assign(q_bit(k), (q_value >> k) & 1)

    clauses = []
    for monomials, const in clause_spec:
        terms = {}
        for vars in monomials:
            key = monomial(
                (p_bit(k) if fam == "p" else q_bit(k)) for fam, k in vars
            )
            terms[key] = terms.get(key, 0) + 1
        clauses.append(Clause(terms, const))

    qubit_map = tuple(sorted(
        [p_bit(k) for k in free] + [q_bit(k) for k in free]
    ))
    return SimplifiedProblem(
        instance=instance,
        clauses=tuple(clauses),
        qubit_map=qubit_map,
        relations=relations,
        n=len(qubit_map),
        n_z=0,
    )
