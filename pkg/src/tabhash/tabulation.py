"""Lookup tables and tabulation-based hash evaluation.

h(x) is the XOR of T_i(D_i(x)) over the d derived characters of x.
"""

from __future__ import annotations

import logging
import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO, List, Optional, Sequence, Tuple, Union

import numpy as np

from .derivation import DerivationSpec, derive, derive_many, table_index_bounds
from .exceptions import TableError, TableFormatError, TableSizeError, UnsupportedFieldError
from .gf2 import MAX_FIELD_BITS, BinaryField, default_field

logger = logging.getLogger(__name__)

MAX_ELL = 32
TABLE_MAGIC = b"TBH1"


def seeded_rng(seed: int, *stream: int) -> np.random.Generator:
    """Generator for the independent stream ``stream`` of ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(stream)))


@dataclass(frozen=True)
class LookupTables:
    """The d tables T_0..T_{d-1}, entries in [2^ell]."""
    tables: Tuple[np.ndarray, ...]
    ell: int

    def __post_init__(self):
        if not 1 <= self.ell <= MAX_ELL:
            raise TableError(f"output width ell={self.ell} outside 1..{MAX_ELL}")
        limit = 1 << self.ell
        for i, table in enumerate(self.tables):
            if table.size and int(table.max()) >= limit:
                raise TableError(f"table {i} has entries outside [2^{self.ell}]")

    @property
    def d(self) -> int:
        return len(self.tables)

    @property
    def sizes(self) -> Tuple[int, ...]:
        return tuple(len(t) for t in self.tables)

    @property
    def nbytes(self) -> int:
        return sum(int(t.nbytes) for t in self.tables)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LookupTables):
            return NotImplemented
        return self.ell == other.ell and self.d == other.d and all(
            np.array_equal(a, b) for a, b in zip(self.tables, other.tables)
        )


def _check_ell(ell: int) -> None:
    if not 1 <= ell <= MAX_ELL:
        raise TableError(f"output width ell={ell} outside 1..{MAX_ELL}")


def fill_tables_random(rng_seed: int, sizes: Sequence[int], ell: int) -> LookupTables:
    """Fully random tables; table i draws from stream i of the seed."""
    _check_ell(ell)
    tables = tuple(
        seeded_rng(rng_seed, i).integers(0, 1 << ell, size=n, dtype=np.uint64).astype(np.uint32)
        for i, n in enumerate(sizes)
    )
    return LookupTables(tables, ell)


def kwise_table_values(f: BinaryField, coefficients: Sequence[int], n: int, ell: int) -> np.ndarray:
    """Evaluate sum_j coefficients[j] * x^j at x = 0..n-1, keep the low ell bits."""
    points = np.arange(n, dtype=np.int64)
    values = np.zeros(n, dtype=np.int64)
    for coefficient in reversed(list(coefficients)):
        values = f.mul_array(values, points) ^ int(coefficient)
    return (values & ((1 << ell) - 1)).astype(np.uint32)


def fill_tables_kwise(rng_seed: int, sizes: Sequence[int], ell: int, k: int) -> LookupTables:
    """Tables of exactly k-wise independent values.

    Table i evaluates a uniform random polynomial of degree < k over
    GF(2^b), b = max(ell, ceil(log2 n_i)), at the points 0..n_i-1.
    """
    _check_ell(ell)
    if k < 1:
        raise TableError(f"k must be at least 1, got {k}")
    tables = []
    for i, n in enumerate(sizes):
        b = max(ell, math.ceil(math.log2(n)) if n > 1 else 0)
        if b > MAX_FIELD_BITS:
            raise UnsupportedFieldError(
                f"table {i} needs GF(2^{b}); k-wise filling supports at most {MAX_FIELD_BITS} bits"
            )
        f = default_field(b)
        coefficients = seeded_rng(rng_seed, i).integers(0, f.size, size=k)
        tables.append(kwise_table_values(f, coefficients.tolist(), n, ell))
    return LookupTables(tuple(tables), ell)


@dataclass
class LookupCounter:
    """Counts table reads and hash evaluations of an instrumented Hasher."""
    lookups: int = 0
    evaluations: int = 0

    def reset(self) -> None:
        self.lookups = 0
        self.evaluations = 0

    @property
    def lookups_per_evaluation(self) -> float:
        return self.lookups / self.evaluations if self.evaluations else 0.0


class Hasher:
    """A member of a tabulation-based hash family."""

    def __init__(self, spec: DerivationSpec, tables: LookupTables,
                 counter: Optional[LookupCounter] = None):
        if tables.d != spec.d:
            raise TableSizeError(f"{spec.describe()} needs {spec.d} tables, got {tables.d}")
        self.spec = spec
        self.tables = tables
        self.counter = counter

    @classmethod
    def for_universe(cls, spec: DerivationSpec, tables: LookupTables, universe_bound: int,
                     counter: Optional[LookupCounter] = None) -> 'Hasher':
        """Build a Hasher after checking the tables cover [n]^q."""
        needed = table_index_bounds(spec, universe_bound)
        for i, (have, need) in enumerate(zip(tables.sizes, needed)):
            if have < need:
                raise TableSizeError(f"table {i} has {have} cells, universe needs {need}")
        return cls(spec, tables, counter)

    @property
    def ell(self) -> int:
        return self.tables.ell

    def hash(self, key: Sequence[int]) -> int:
        value = 0
        counter = self.counter
        for i, a in derive(self.spec, key):
            table = self.tables.tables[i]
            if not 0 <= a < len(table):
                raise TableSizeError(f"derived character {a} outside table {i} of length {len(table)}")
            value ^= int(table[a])
            if counter is not None:
                counter.lookups += 1
        if counter is not None:
            counter.evaluations += 1
        return value

    def hash_many(self, keys: np.ndarray) -> np.ndarray:
        """Hash an (N, q) key array; one gather per table."""
        derived = derive_many(self.spec, keys)
        result = np.zeros(derived.shape[0], dtype=np.uint32)
        for i, table in enumerate(self.tables.tables):
            column = derived[:, i]
            if column.size and (column.min() < 0 or column.max() >= len(table)):
                raise TableSizeError(f"derived characters outside table {i} of length {len(table)}")
            result ^= table[column]
            if self.counter is not None:
                self.counter.lookups += column.size
        if self.counter is not None:
            self.counter.evaluations += derived.shape[0]
        return result


def hash_key(h: Hasher, key: Sequence[int]) -> int:
    """XOR of the d table cells addressed by the derived key."""
    return h.hash(key)


# TBH1 serialization: magic, d, ell, d lengths (u64 LE), then u32 LE entries.

def save_tables(tables: LookupTables, target: Union[str, Path, BinaryIO]) -> None:
    header = TABLE_MAGIC + struct.pack("<QQ", tables.d, tables.ell)
    header += struct.pack(f"<{tables.d}Q", *tables.sizes)
    payload = b"".join(t.astype("<u4").tobytes() for t in tables.tables)
    if isinstance(target, (str, Path)):
        with open(target, "wb") as f:
            f.write(header + payload)
        logger.info(f"Saved {tables.d} tables ({len(payload)} bytes) to {target}")
    else:
        target.write(header + payload)


def load_tables(source: Union[str, Path, BinaryIO]) -> LookupTables:
    if isinstance(source, (str, Path)):
        with open(source, "rb") as f:
            data = f.read()
    else:
        data = source.read()
    if data[:4] != TABLE_MAGIC:
        raise TableFormatError("missing TBH1 magic")
    try:
        d, ell = struct.unpack_from("<QQ", data, 4)
        offset = 20
        sizes = struct.unpack_from(f"<{d}Q", data, offset)
    except struct.error as e:
        raise TableFormatError(f"truncated table header: {e}") from e
    offset += 8 * d
    if len(data) != offset + 4 * sum(sizes):
        raise TableFormatError(f"expected {sum(sizes)} entries after the header")
    tables: List[np.ndarray] = []
    for n in sizes:
        tables.append(np.frombuffer(data, dtype="<u4", count=n, offset=offset).astype(np.uint32))
        offset += 4 * n
    try:
        return LookupTables(tuple(tables), int(ell))
    except TableError as e:
        raise TableFormatError(str(e)) from e
