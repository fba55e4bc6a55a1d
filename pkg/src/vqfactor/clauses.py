"""Binary multiplication clauses for factoring an odd integer.

Long multiplication of two unknown integers p and q, column by column,
yields one integer equation per bit position of the product: the column's
partial products plus incoming carries must equal the product bit plus
the outgoing carries (weighted by powers of two).  Each equation's
left-hand side is kept as a *clause*, an integer-coefficient multilinear
polynomial over Boolean variables that vanishes exactly on assignments
consistent with p*q = m.  Zeroing all clauses simultaneously is
equivalent to factoring m.

Since m is odd, both factors are odd, so the position-0 bits are
substituted away at generation time.  Carries that could never fire
(their power-of-two weight exceeds what the column can possibly sum to)
are dropped immediately, which keeps every clause O(log m) in magnitude.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Optional

from .errors import InvalidLengthsError

WLOG = "wlog"
KNOWN = "known"

_FAMILY_ORDER = {"p": 0, "q": 1, "z": 2}


@dataclass(frozen=True, order=False)
class Variable:
    """A factor bit (p_k or q_k) or a carry bit (z from position i to j)."""

    family: str  # "p", "q" or "z"
    i: int
    j: int = -1  # target position, carries only

    def __post_init__(self):
        if self.family not in _FAMILY_ORDER:
            raise ValueError(f"unknown variable family {self.family!r}")
        if self.family == "z" and not 0 <= self.i < self.j:
            raise ValueError(f"carry must flow forward, got ({self.i}, {self.j})")

    @property
    def sort_key(self) -> tuple:
        return (_FAMILY_ORDER[self.family], self.i, self.j)

    def __lt__(self, other: "Variable") -> bool:
        return self.sort_key < other.sort_key

    def __str__(self) -> str:
        if self.family == "z":
            return f"z{self.i},{self.j}"
        return f"{self.family}{self.i}"

    @staticmethod
    def parse(text: str) -> "Variable":
        text = text.strip()
        if text.startswith("z"):
            a, b = text[1:].split(",")
            return carry(int(a), int(b))
        return Variable(text[0], int(text[1:]))


def p_bit(k: int) -> Variable:
    return Variable("p", k)


def q_bit(k: int) -> Variable:
    return Variable("q", k)


def carry(i: int, j: int) -> Variable:
    return Variable("z", i, j)


# A monomial is a sorted, duplicate-free tuple of variables; the empty
# tuple never appears (constants live in Clause.constant).
Monomial = tuple  # tuple[Variable, ...]


def monomial(vars: Iterable[Variable]) -> Monomial:
    return tuple(sorted(set(vars)))


class Clause:
    """Integer-coefficient multilinear polynomial over Boolean variables.

    Variables are idempotent (x*x = x), so monomials are variable sets.
    Instances are treated as immutable once built.
    """

    __slots__ = ("terms", "constant")

    def __init__(self, terms: Optional[Mapping[Monomial, int]] = None, constant: int = 0):
        clean = {}
        if terms:
            for mono, coef in terms.items():
                if coef == 0:
                    continue
                if not mono:
                    constant += coef
                    continue
                clean[monomial(mono)] = clean.get(monomial(mono), 0) + coef
        self.terms = {m: c for m, c in clean.items() if c != 0}
        self.constant = constant

    @staticmethod
    def build(pairs: Iterable[tuple], constant: int = 0) -> "Clause":
        """Accumulate (variables, coefficient) pairs into a clause."""
        acc: dict = {}
        const = constant
        for vars, coef in pairs:
            mono = monomial(vars)
            if not mono:
                const += coef
            else:
                acc[mono] = acc.get(mono, 0) + coef
        return Clause(acc, const)

    def items(self):
        """Deterministically ordered (monomial, coefficient) pairs."""
        return sorted(self.terms.items(), key=lambda kv: (len(kv[0]), kv[0]))

    def variables(self) -> set:
        out = set()
        for mono in self.terms:
            out.update(mono)
        return out

    def degree(self) -> int:
        return max((len(m) for m in self.terms), default=0)

    def is_constant(self) -> bool:
        return not self.terms

    def evaluate(self, assignment: Mapping[Variable, int]) -> int:
        total = self.constant
        for mono, coef in self.terms.items():
            prod = 1
            for v in mono:
                prod *= assignment[v]
                if prod == 0:
                    break
            total += coef * prod
        return total

    def max_positive(self) -> int:
        """Largest value the positively-signed part of the clause can take."""
        total = max(self.constant, 0)
        for coef in self.terms.values():
            if coef > 0:
                total += coef
        return total

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Clause)
            and self.constant == other.constant
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.constant, frozenset(self.terms.items())))

    def __repr__(self) -> str:
        if not self.terms:
            return f"Clause({self.constant})"
        bits = []
        for mono, coef in self.items():
            name = "*".join(str(v) for v in mono)
            bits.append(f"{coef:+d}*{name}")
        if self.constant:
            bits.append(f"{self.constant:+d}")
        return "Clause(" + " ".join(bits) + ")"


@dataclass(frozen=True)
class FactoringInstance:
    """An odd integer to factor together with assumed factor bit lengths."""

    m: int
    m_bits: tuple  # little-endian
    n_m: int
    n_p: int
    n_q: int
    length_mode: str  # WLOG or KNOWN

    @property
    def clause_count(self) -> int:
        """Number of generated column clauses (one per product bit)."""
        return self.n_p + self.n_q

    def m_bit(self, i: int) -> int:
        return self.m_bits[i] if i < self.n_m else 0


def decompose_bits(m: int) -> tuple:
    """Little-endian binary expansion of a positive integer."""
    if m < 1:
        raise ValueError("need a positive integer")
    bits = []
    while m:
        bits.append(m & 1)
        m >>= 1
    return tuple(bits), len(bits)


def infer_factor_lengths(n_m: int, mode: str = WLOG, known: Optional[tuple] = None) -> tuple:
    """Bit lengths (n_p, n_q) of the two factors, p the longer one.

    Without prior knowledge, p may be as long as m itself and q needs at
    most half of m's bits (p >= q for a two-factor product).  With prior
    knowledge, the supplied lengths are validated and echoed.
    """
    if n_m < 2:
        raise InvalidLengthsError(f"n_m={n_m} leaves no room for two factors")
    if mode == WLOG:
        return n_m, (n_m + 1) // 2
    if mode == KNOWN:
        if known is None:
            raise InvalidLengthsError("known mode requires explicit lengths")
        n_p, n_q = known
        if not (1 <= n_q <= n_p <= n_m):
            raise InvalidLengthsError(
                f"lengths (n_p={n_p}, n_q={n_q}) must satisfy 1 <= n_q <= n_p <= n_m={n_m}"
            )
        return n_p, n_q
    raise InvalidLengthsError(f"unknown length mode {mode!r}")


def factoring_instance(m: int, n_p: Optional[int] = None, n_q: Optional[int] = None) -> FactoringInstance:
    """Build a validated instance; lengths given means known mode."""
    if m < 9 or m % 2 == 0:
        raise ValueError(f"m={m} must be an odd integer >= 9")
    bits, n_m = decompose_bits(m)
    if n_p is None and n_q is None:
        mode = WLOG
        n_p, n_q = infer_factor_lengths(n_m, WLOG)
    elif n_p is not None and n_q is not None:
        mode = KNOWN
        n_p, n_q = infer_factor_lengths(n_m, KNOWN, (n_p, n_q))
    else:
        raise InvalidLengthsError("give both factor lengths or neither")
    return FactoringInstance(m, bits, n_m, n_p, n_q, mode)


def fixed_assignments(instance: FactoringInstance) -> dict:
    """Bits substituted away at generation time.

    m odd forces both low bits to 1.  With known lengths the leading bits
    are 1 by definition; without, the lengths are only upper bounds and
    the leading bits stay free.
    """
    fixed = {p_bit(0): 1, q_bit(0): 1}
    if instance.length_mode == KNOWN:
        if instance.n_p > 1:
            fixed[p_bit(instance.n_p - 1)] = 1
        if instance.n_q > 1:
            fixed[q_bit(instance.n_q - 1)] = 1
    return fixed


def _column_products(instance: FactoringInstance, i: int, fixed: Mapping[Variable, int]):
    """(monomial, coefficient) pairs for the partial products q_j * p_{i-j}."""
    for j in range(i + 1):
        if j >= instance.n_q or i - j >= instance.n_p:
            continue
        vars = []
        keep = True
        for v in (q_bit(j), p_bit(i - j)):
            val = fixed.get(v)
            if val == 0:
                keep = False
                break
            if val is None:
                vars.append(v)
        if keep:
            yield vars, 1


def raw_clause(instance: FactoringInstance, i: int, incoming: Optional[set] = None) -> Clause:
    """Column equation at bit position i before carry truncation.

    Contains the partial products, incoming carries z_{j,i} (restricted
    to ``incoming`` when given), the product bit, and outgoing carries
    z_{i,i+j} for every weight 2^j.  Carry targets never exceed the top
    product position: p*q < 2^(n_p+n_q), so a carry into that column or
    beyond could never be repaid.
    """
    fixed = fixed_assignments(instance)
    pairs = list(_column_products(instance, i, fixed))
    for j in range(i):
        zv = carry(j, i)
        if incoming is None or zv in incoming:
            pairs.append(([zv], 1))
    top = instance.n_p + instance.n_q - 1
    for j in range(1, top - i + 1):
        pairs.append(([carry(i, i + j)], -(2 ** j)))
    return Clause.build(pairs, constant=-instance.m_bit(i))


def column_bound(clause: Clause) -> int:
    """Largest value the column can reach net of the product bit.

    Sum of the positive coefficients plus the (signed) constant; the
    constant already carries the subtracted product bit, so the bound is
    what the outgoing carries could at most absorb.
    """
    return clause.constant + sum(c for c in clause.terms.values() if c > 0)


def truncate_carries(clause: Clause, position: int) -> Clause:
    """Drop outgoing carries whose weight the column sum can never reach.

    An outgoing carry of weight 2^j can only fire if the rest of the
    column can sum to at least 2^j; heavier carries would make the
    equation unsatisfiable, so they are fixed to 0 and removed.
    """
    bound = column_bound(clause)
    kept = {}
    for mono, coef in clause.terms.items():
        if coef < 0 and len(mono) == 1:
            v = mono[0]
            if v.family == "z" and v.i == position and 2 ** (v.j - v.i) > bound:
                continue
        kept[mono] = coef
    return Clause(kept, clause.constant)


def generate_clauses(instance: FactoringInstance) -> list:
    """One clause per product bit position, carries already truncated.

    The product p*q spans positions 0 .. n_p+n_q-1, so the list has
    n_p+n_q entries; the final column pins the top product bit, which
    closes the carry chain instead of leaving free sinks.  Positions are
    processed in ascending order so each column only sees incoming
    carries that survived truncation upstream.
    """
    clauses = []
    live = set()
    for i in range(instance.n_p + instance.n_q):
        c = truncate_carries(raw_clause(instance, i, incoming=live), i)
        for v in c.variables():
            if v.family == "z" and v.i == i:
                live.add(v)
        clauses.append(c)
    return clauses


def count_variables(clauses: Iterable[Clause]) -> int:
    """Distinct variables across a clause list."""
    seen = set()
    for c in clauses:
        seen.update(c.variables())
    return len(seen)
