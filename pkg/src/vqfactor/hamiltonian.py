"""Quantization of clauses into diagonal Z-polynomials.

Each Boolean variable maps to (1 - Z)/2 on its qubit, turning a clause
into a polynomial in commuting Pauli-Z operators.  The cost Hamiltonian
is the sum of squared clause polynomials: diagonal in the computational
basis, nonnegative, and zero exactly on bit assignments that satisfy
every clause.

Coefficients are kept as exact dyadic rationals so that the diagonal is
computed without rounding; clause energies are integers, which makes the
phase of the cost layer exactly 2*pi periodic in gamma.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionCapError

DIAGONAL_CAP = 24  # 2^24 table entries


def bits_of_index(index: int, n: int) -> tuple:
    """Basis index -> bit tuple; qubit 0 is the most significant bit."""
    return tuple((index >> (n - 1 - k)) & 1 for k in range(n))


def index_of_bits(bits: Sequence[int]) -> int:
    value = 0
    for b in bits:
        value = (value << 1) | int(b)
    return value


class SpinPolynomial:
    """Real combination of Z-monomials over qubit indices.

    A monomial is a sorted tuple of distinct qubit indices (Z squares to
    the identity); the empty tuple is the identity term.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean = {}
        if terms:
            for mono, coef in terms.items():
                coef = Fraction(coef)
                if coef:
                    key = tuple(sorted(mono))
                    clean[key] = clean.get(key, Fraction(0)) + coef
        self.terms = {m: c for m, c in clean.items() if c}

    def items(self):
        return sorted(self.terms.items(), key=lambda kv: (len(kv[0]), kv[0]))

    def degree(self) -> int:
        return max((len(m) for m in self.terms), default=0)

    def is_zero(self) -> bool:
        return not self.terms

    def constant(self) -> Fraction:
        return self.terms.get((), Fraction(0))

    def __eq__(self, other):
        return isinstance(other, SpinPolynomial) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __repr__(self):
        if not self.terms:
            return "SpinPolynomial(0)"
        bits = []
        for mono, coef in self.items():
            name = "".join(f"Z{k}" for k in mono) or "I"
            bits.append(f"{coef!s}*{name}")
        return "SpinPolynomial(" + " + ".join(bits) + ")"


def add(a: SpinPolynomial, b: SpinPolynomial) -> SpinPolynomial:
    terms = dict(a.terms)
    for mono, coef in b.terms.items():
        terms[mono] = terms.get(mono, Fraction(0)) + coef
    return SpinPolynomial(terms)


def multiply(a: SpinPolynomial, b: SpinPolynomial) -> SpinPolynomial:
    """Product with Z^2 = I, so monomials combine by symmetric difference."""
    terms = {}
    for ma, ca in a.terms.items():
        sa = set(ma)
        for mb, cb in b.terms.items():
            key = tuple(sorted(sa.symmetric_difference(mb)))
            terms[key] = terms.get(key, Fraction(0)) + ca * cb
    return SpinPolynomial(terms)


def quantize(clause, qubit_map) -> SpinPolynomial:
    """Map a clause to its Z-polynomial via b -> (1 - Z)/2 per variable."""
    index = {v: k for k, v in enumerate(qubit_map)}
    terms = {(): Fraction(clause.constant)}
    for mono, coef in clause.terms.items():
        try:
            qubits = [index[v] for v in mono]
        except KeyError as err:
            raise ValueError(f"clause variable {err.args[0]} not in qubit map") from None
        # expand prod_k (1 - Z_k)/2 over subsets
        d = len(qubits)
        scale = Fraction(coef, 2 ** d)
        for subset in range(1 << d):
            zs = tuple(sorted(qubits[t] for t in range(d) if subset >> t & 1))
            sign = -1 if bin(subset).count("1") % 2 else 1
            terms[zs] = terms.get(zs, Fraction(0)) + sign * scale
    return SpinPolynomial(terms)


def square_and_sum(polys: Iterable[SpinPolynomial]) -> SpinPolynomial:
    """Sum of squares of the given polynomials."""
    total = SpinPolynomial()
    for p in polys:
        total = add(total, multiply(p, p))
    return total


def cost_hamiltonian(problem) -> SpinPolynomial:
    """Quantize a reduced problem's clauses and sum their squares."""
    return square_and_sum(quantize(c, problem.qubit_map) for c in problem.clauses)


def energy(hamiltonian: SpinPolynomial, bits: Sequence[int]):
    """Diagonal matrix element at one computational basis state."""
    n = len(bits)
    total = Fraction(0)
    for mono, coef in hamiltonian.terms.items():
        if mono and max(mono) >= n:
            raise ValueError(f"bitstring of length {n} too short for {mono}")
        sign = 1
        for k in mono:
            if bits[k]:
                sign = -sign
        total += coef * sign
    return float(total)


@dataclass(frozen=True)
class EnergyTable:
    """Dense diagonal of a Z-polynomial over all 2^n basis states."""

    values: np.ndarray
    n: int

    def __len__(self):
        return len(self.values)


def diagonal(hamiltonian: SpinPolynomial, n: int, cap: int = DIAGONAL_CAP) -> EnergyTable:
    """Tabulate the diagonal by per-monomial parity accumulation.

    Each monomial contributes coef * (-1)^{popcount(index & mask)} to all
    entries at once; coefficients are scaled to a common (power of two)
    denominator so the accumulation stays in integers.
    """
    if n > cap:
        raise DimensionCapError(f"n={n} exceeds diagonal cap {cap}")
    dim = 1 << n
    denom = lcm(*(c.denominator for c in hamiltonian.terms.values())) if hamiltonian.terms else 1
    indices = np.arange(dim, dtype=np.uint64)
    acc = np.zeros(dim, dtype=np.int64)
    for mono, coef in hamiltonian.terms.items():
        scaled = int(coef * denom)
        if not mono:
            acc += scaled
            continue
        mask = np.uint64(sum(1 << (n - 1 - k) for k in mono))
        parity = (np.bitwise_count(indices & mask) & 1).astype(np.int64)
        acc += scaled * (1 - 2 * parity)
    return EnergyTable(values=acc / denom, n=n)


def ground_states_bruteforce(hamiltonian: SpinPolynomial, n: int,
                             cap: int = DIAGONAL_CAP) -> tuple:
    """Exhaustive minimum of the diagonal: (bit tuples, minimum energy).

    Entries are exact dyadic rationals stored in float64, so equality
    against the minimum is exact.
    """
    table = diagonal(hamiltonian, n, cap)
    vmin = table.values.min() if len(table.values) else 0.0
    states = [bits_of_index(int(i), n) for i in np.flatnonzero(table.values == vmin)]
    return states, float(vmin)
