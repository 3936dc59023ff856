"""GF(2) bit-matrix arithmetic and GF(2^c) field arithmetic.

Matrix rows are packed into Python integers (bit ``j`` of a row is column
``j``), so elimination works a whole row at a time with XOR.
"""

from __future__ import annotations

import functools
import logging
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .exceptions import FieldError, FieldRangeError, UnsupportedFieldError

logger = logging.getLogger(__name__)

ColumnLabel = Tuple[int, int]

MAX_FIELD_BITS = 16

# x^2+x+1, x^8+x^4+x^3+x+1, x^16+x^12+x^3+x+1
DEFAULT_IRREDUCIBLES = {
    2: 0b111,
    8: 0x11B,
    16: 0x1100B,
}


@dataclass(frozen=True)
class BitMatrix:
    """Dense GF(2) matrix with one packed integer per row."""
    n_rows: int
    n_cols: int
    rows: Tuple[int, ...]
    col_labels: Optional[Tuple[ColumnLabel, ...]] = None

    def __post_init__(self):
        if len(self.rows) != self.n_rows:
            raise ValueError(f"expected {self.n_rows} rows, got {len(self.rows)}")
        limit = 1 << self.n_cols
        for row in self.rows:
            if row < 0 or row >= limit:
                raise ValueError(f"row {row:#b} does not fit in {self.n_cols} columns")
        if self.col_labels is not None:
            if len(self.col_labels) != self.n_cols:
                raise ValueError("col_labels must have one label per column")
            if len(set(self.col_labels)) != self.n_cols:
                raise ValueError("col_labels must be distinct")

    @classmethod
    def from_lists(
        cls,
        bits: Sequence[Sequence[int]],
        col_labels: Optional[Sequence[ColumnLabel]] = None,
    ) -> 'BitMatrix':
        """Build a matrix from nested 0/1 lists (row-major)."""
        n_cols = len(bits[0]) if bits else (len(col_labels) if col_labels else 0)
        rows = []
        for line in bits:
            if len(line) != n_cols:
                raise ValueError("all rows must have the same length")
            value = 0
            for j, bit in enumerate(line):
                if bit & 1:
                    value |= 1 << j
            rows.append(value)
        labels = tuple(col_labels) if col_labels is not None else None
        return cls(len(rows), n_cols, tuple(rows), labels)

    @classmethod
    def from_strings(cls, lines: Sequence[str]) -> 'BitMatrix':
        """Build a matrix from rows written as strings like ``"1010100"``."""
        return cls.from_lists([[int(ch) for ch in line] for line in lines])

    def get(self, r: int, c: int) -> int:
        return (self.rows[r] >> c) & 1

    def to_lists(self) -> List[List[int]]:
        return [[(row >> j) & 1 for j in range(self.n_cols)] for row in self.rows]

    def xor_rows(self, indices: Iterable[int]) -> int:
        """XOR of the selected rows as a packed integer."""
        acc = 0
        for i in indices:
            acc ^= self.rows[i]
        return acc

    def column_weights(self) -> List[int]:
        return [sum((row >> j) & 1 for row in self.rows) for j in range(self.n_cols)]

    def all_columns_even(self) -> bool:
        return all(w % 2 == 0 for w in self.column_weights())

    def permuted(self, row_order: Sequence[int], col_order: Sequence[int]) -> 'BitMatrix':
        """Return the matrix with rows and columns reordered."""
        new_rows = []
        for r in row_order:
            value = 0
            for new_c, old_c in enumerate(col_order):
                if (self.rows[r] >> old_c) & 1:
                    value |= 1 << new_c
            new_rows.append(value)
        labels = None
        if self.col_labels is not None:
            labels = tuple(self.col_labels[c] for c in col_order)
        return BitMatrix(self.n_rows, self.n_cols, tuple(new_rows), labels)


def rank(m: BitMatrix) -> int:
    """Row rank over GF(2) by Gaussian elimination on a working copy."""
    work = list(m.rows)
    result = 0
    for col in range(m.n_cols):
        bit = 1 << col
        pivot = None
        for r in range(result, len(work)):
            if work[r] & bit:
                pivot = r
                break
        if pivot is None:
            continue
        work[result], work[pivot] = work[pivot], work[result]
        for r in range(len(work)):
            if r != result and work[r] & bit:
                work[r] ^= work[result]
        result += 1
        if result == len(work):
            break
    return result


def find_dependent_rows(m: BitMatrix) -> Optional[frozenset[int]]:
    """Return row indices summing to zero over GF(2), or None at full row rank.

    Each working row carries a mask of the original rows it is built from;
    the first row that eliminates to zero yields the witness.
    """
    work = [(row, 1 << i) for i, row in enumerate(m.rows)]
    pivots: List[Tuple[int, int, int]] = []  # (pivot bit, row, combination)
    for row, combo in work:
        for bit, prow, pcombo in pivots:
            if row & bit:
                row ^= prow
                combo ^= pcombo
        if row == 0:
            return frozenset(i for i in range(m.n_rows) if (combo >> i) & 1)
        pivots.append((row & -row, row, combo))
    return None


# Carry-less reference arithmetic, used to build tables and as a test oracle.

def poly_degree(poly: int) -> int:
    return poly.bit_length() - 1


def poly_mod(a: int, mod: int) -> int:
    """Remainder of carry-less division of ``a`` by ``mod``."""
    mod_degree = poly_degree(mod)
    while a and poly_degree(a) >= mod_degree:
        a ^= mod << (poly_degree(a) - mod_degree)
    return a


def is_irreducible(poly: int, c: int) -> bool:
    """Exhaustive divisor check; feasible for c <= 16."""
    if poly_degree(poly) != c or c < 1:
        return False
    for divisor in range(2, 1 << (c // 2 + 1)):
        if poly_mod(poly, divisor) == 0:
            return False
    return True


def smallest_irreducible(c: int) -> int:
    for poly in range(1 << c, 1 << (c + 1)):
        if is_irreducible(poly, c):
            return poly
    raise FieldError(f"no irreducible polynomial of degree {c}")


def gf_mul_reference(a: int, b: int, irreducible: int) -> int:
    """Shift-and-add multiplication reduced modulo ``irreducible``."""
    c = poly_degree(irreducible)
    top = 1 << c
    result = 0
    while b:
        if b & 1:
            result ^= a
        b >>= 1
        a <<= 1
        if a & top:
            a ^= irreducible
    return result


def _pow_reference(a: int, e: int, irreducible: int) -> int:
    result = 1
    while e:
        if e & 1:
            result = gf_mul_reference(result, a, irreducible)
        a = gf_mul_reference(a, a, irreducible)
        e >>= 1
    return result


def _prime_factors(n: int) -> List[int]:
    factors = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            factors.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        factors.append(n)
    return factors


def _find_generator(irreducible: int, c: int) -> int:
    order = (1 << c) - 1
    if order == 1:
        return 1
    factors = _prime_factors(order)
    for g in range(2, 1 << c):
        if all(_pow_reference(g, order // p, irreducible) != 1 for p in factors):
            return g
    raise FieldError(f"no primitive element for polynomial {irreducible:#x}")


@dataclass(frozen=True)
class BinaryField:
    """GF(2^c) with log/antilog tables built once per field.

    ``exp_table`` has length 2*(2^c - 1) so a product is a single lookup
    at ``log[a] + log[b]`` without a modulo.
    """
    c: int
    irreducible: int
    generator: int
    exp_table: np.ndarray = field(repr=False, compare=False)
    log_table: np.ndarray = field(repr=False, compare=False)

    @classmethod
    def create(cls, c: int, irreducible: Optional[int] = None) -> 'BinaryField':
        """Create GF(2^c); the polynomial is verified irreducible."""
        if not 1 <= c <= MAX_FIELD_BITS:
            raise UnsupportedFieldError(f"field width c={c} outside 1..{MAX_FIELD_BITS}")
        if irreducible is None:
            irreducible = DEFAULT_IRREDUCIBLES.get(c) or smallest_irreducible(c)
        if not is_irreducible(irreducible, c):
            raise FieldError(f"{irreducible:#x} is not an irreducible polynomial of degree {c}")

        generator = _find_generator(irreducible, c)
        order = (1 << c) - 1
        exp_table = np.zeros(2 * order, dtype=np.int64)
        log_table = np.zeros(1 << c, dtype=np.int64)
        value = 1
        for i in range(order):
            exp_table[i] = value
            log_table[value] = i
            value = gf_mul_reference(value, generator, irreducible)
        exp_table[order:] = exp_table[:order]
        logger.debug(f"Built GF(2^{c}) tables, polynomial {irreducible:#x}, generator {generator}")
        return cls(c, irreducible, generator, exp_table, log_table)

    @property
    def size(self) -> int:
        return 1 << self.c

    def check(self, a: int) -> None:
        if not 0 <= a < self.size:
            raise FieldRangeError(f"{a} is not an element of GF(2^{self.c})")

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return int(self.exp_table[self.log_table[a] + self.log_table[b]])

    def inverse(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("zero has no multiplicative inverse")
        order = self.size - 1
        return int(self.exp_table[(order - self.log_table[a]) % order])

    def pow(self, a: int, e: int) -> int:
        if e == 0:
            return 1
        if a == 0:
            return 0
        order = self.size - 1
        return int(self.exp_table[(int(self.log_table[a]) * e) % order])

    def mul_array(self, a: np.ndarray, b) -> np.ndarray:
        """Elementwise product of arrays (or an array and a scalar)."""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        product = self.exp_table[self.log_table[a] + self.log_table[b]]
        return np.where((a == 0) | (b == 0), 0, product)


@functools.lru_cache(maxsize=None)
def default_field(c: int) -> BinaryField:
    """Shared instance of GF(2^c) with the default polynomial."""
    return BinaryField.create(c)


def gf_mul(f: BinaryField, a: int, b: int) -> int:
    """Product of ``a`` and ``b`` in ``f``."""
    f.check(a)
    f.check(b)
    return f.mul(a, b)


def build_vandermonde(f: BinaryField, q: int, d: int) -> Tuple[Tuple[int, ...], ...]:
    """q x d matrix with entry (i, j) = alpha_j ** i, alpha_j encoded as j.

    Row 0 is all ones (0^0 = 1) and column 0 below row 0 is zero.
    """
    if d > f.size:
        raise FieldRangeError(f"d={d} exceeds the {f.size} distinct points of GF(2^{f.c})")
    return tuple(tuple(f.pow(j, i) for j in range(d)) for i in range(q))


def field_rank(f: BinaryField, matrix: Sequence[Sequence[int]]) -> int:
    """Rank of a matrix over ``f`` by Gaussian elimination."""
    work = [list(row) for row in matrix]
    n_cols = len(work[0]) if work else 0
    result = 0
    for col in range(n_cols):
        pivot = next((r for r in range(result, len(work)) if work[r][col]), None)
        if pivot is None:
            continue
        work[result], work[pivot] = work[pivot], work[result]
        inv = f.inverse(work[result][col])
        work[result] = [f.mul(v, inv) for v in work[result]]
        for r in range(len(work)):
            if r != result and work[r][col]:
                factor = work[r][col]
                work[r] = [v ^ f.mul(factor, p) for v, p in zip(work[r], work[result])]
        result += 1
    return result
