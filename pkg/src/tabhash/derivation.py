"""Derivation functions: keys to derived keys for every supported variant."""

from __future__ import annotations

import functools
import logging
from dataclasses import dataclass, field as dataclass_field
from enum import Enum
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .exceptions import DerivationError, DerivationOverflowError, FieldRangeError
from .gf2 import BinaryField, build_vandermonde, default_field

logger = logging.getLogger(__name__)

Key = Tuple[int, ...]
DerivedKey = Tuple[Tuple[int, int], ...]

# Derived characters are stored in 64-bit words; larger values are an error.
WORD_BITS = 64
WORD_LIMIT = 1 << WORD_BITS

TZ_FIELD_WIDTHS = (2, 8, 16)


class Variant(str, Enum):
    CURVE = "curve"
    CURVE_MOD = "curve_mod"
    TZ_LINEAR = "tz_linear"
    TZ5 = "tz5"
    IDENTITY = "identity"
    EXPLICIT = "explicit"


@dataclass(frozen=True)
class DerivationSpec:
    """Derivation variant and its parameters.

    ``matrix`` is the q x d Vandermonde matrix for ``tz_linear``,
    ``modulus`` the reduction modulus for ``curve_mod`` and ``table`` the
    key -> derived characters mapping for ``explicit``.
    """
    variant: Variant
    q: int
    d: int
    field: Optional[BinaryField] = None
    matrix: Optional[Tuple[Tuple[int, ...], ...]] = None
    modulus: Optional[int] = None
    table: Optional[Mapping[Key, Tuple[int, ...]]] = dataclass_field(default=None, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        v = self.variant
        if v in (Variant.CURVE, Variant.CURVE_MOD):
            if self.q < 2 or self.d < 1:
                raise DerivationError(f"curve derivation needs q >= 2 and d >= 1, got q={self.q}, d={self.d}")
            if v is Variant.CURVE_MOD and (self.modulus is None or self.modulus < 1):
                raise DerivationError("curve_mod derivation needs a modulus >= 1")
        elif v is Variant.TZ_LINEAR:
            if self.field is None or self.matrix is None:
                raise DerivationError("tz_linear derivation needs a field and a matrix")
            if self.d < self.q:
                raise DerivationError(f"tz_linear needs d >= q, got q={self.q}, d={self.d}")
            if len(self.matrix) != self.q or any(len(row) != self.d for row in self.matrix):
                raise DerivationError(f"tz_linear matrix must be {self.q}x{self.d}")
        elif v is Variant.TZ5:
            if self.q != 2 or self.d != 3:
                raise DerivationError("tz5 derivation is defined for q=2, d=3 only")
        elif v is Variant.IDENTITY:
            if self.d != self.q:
                raise DerivationError("identity derivation needs d == q")
        elif v is Variant.EXPLICIT:
            if not self.table:
                raise DerivationError("explicit derivation needs a non-empty table")
            for key, chars in self.table.items():
                if len(key) != self.q or len(chars) != self.d:
                    raise DerivationError(f"explicit entry {key} -> {chars} does not match q={self.q}, d={self.d}")

    # Constructors

    @classmethod
    def curve(cls, q: int, d: int) -> 'DerivationSpec':
        return cls(Variant.CURVE, q, d)

    @classmethod
    def curve_mod(cls, q: int, d: int, modulus: int) -> 'DerivationSpec':
        return cls(Variant.CURVE_MOD, q, d, modulus=modulus)

    @classmethod
    def tz(cls, q: int, d: int, c: int) -> 'DerivationSpec':
        """Thorup-Zhang linear map over GF(2^c) with the Vandermonde matrix."""
        if c not in TZ_FIELD_WIDTHS:
            raise DerivationError(f"tz_linear supports c in {TZ_FIELD_WIDTHS}, got {c}")
        f = default_field(c)
        return cls(Variant.TZ_LINEAR, q, d, field=f, matrix=build_vandermonde(f, q, d))

    @classmethod
    def tz5(cls) -> 'DerivationSpec':
        return cls(Variant.TZ5, 2, 3)

    @classmethod
    def identity(cls, q: int) -> 'DerivationSpec':
        return cls(Variant.IDENTITY, q, q)

    @classmethod
    def explicit(cls, table: Mapping[Sequence[int], Sequence[int]]) -> 'DerivationSpec':
        """Derivation given by a finite table of derived characters."""
        normalized: Dict[Key, Tuple[int, ...]] = {
            tuple(int(x) for x in key): tuple(int(a) for a in chars)
            for key, chars in table.items()
        }
        if not normalized:
            raise DerivationError("explicit derivation needs a non-empty table")
        first_key, first_chars = next(iter(normalized.items()))
        return cls(Variant.EXPLICIT, len(first_key), len(first_chars), table=normalized)

    def describe(self) -> str:
        if self.variant is Variant.TZ_LINEAR:
            return f"tz_linear(q={self.q}, d={self.d}, c={self.field.c})"
        if self.variant is Variant.CURVE_MOD:
            return f"curve_mod(q={self.q}, d={self.d}, r={self.modulus})"
        return f"{self.variant.value}(q={self.q}, d={self.d})"


def _check_word(value: int) -> int:
    if abs(value) >= WORD_LIMIT:
        raise DerivationOverflowError(f"derived character {value} does not fit in {WORD_BITS} bits")
    return value


def _check_key(key: Sequence[int], q: int) -> Key:
    key = tuple(int(x) for x in key)
    if len(key) != q:
        raise DerivationError(f"key {key} has {len(key)} characters, expected {q}")
    return key


def derive_curve(key: Sequence[int], d: int) -> DerivedKey:
    """Entry i is sum_r a_r * i^r in exact integer arithmetic."""
    key = tuple(int(x) for x in key)
    if len(key) < 2 or d < 1:
        raise DerivationError(f"curve derivation needs q >= 2 and d >= 1, got key {key}, d={d}")
    entries = []
    for i in range(d):
        value = 0
        for a in reversed(key):
            value = value * i + a
        entries.append((i, _check_word(value)))
    return tuple(entries)


def derive_curve_mod(key: Sequence[int], d: int, modulus: int) -> DerivedKey:
    return tuple((i, value % modulus) for i, value in derive_curve(key, d))


def derive_tz(key: Sequence[int], spec: DerivationSpec) -> DerivedKey:
    """Entry j is the XOR over i of x_i * G[i][j] in GF(2^c)."""
    if spec.variant is not Variant.TZ_LINEAR:
        raise DerivationError(f"derive_tz needs a tz_linear spec, got {spec.variant.value}")
    key = _check_key(key, spec.q)
    f = spec.field
    for x in key:
        f.check(x)
    entries = []
    for j in range(spec.d):
        value = 0
        for i, x in enumerate(key):
            value ^= f.mul(x, spec.matrix[i][j])
        entries.append((j, value))
    return tuple(entries)


def derive_tz5(key: Sequence[int]) -> DerivedKey:
    key = tuple(int(x) for x in key)
    if len(key) != 2:
        raise DerivationError(f"tz5 keys have two characters, got {key}")
    a, b = key
    if a < 0 or b < 0:
        raise DerivationError(f"tz5 characters must be non-negative, got {key}")
    return ((0, a), (1, b), (2, _check_word(a + b)))


def derive_identity(key: Sequence[int]) -> DerivedKey:
    return tuple((i, int(x)) for i, x in enumerate(key))


def derive(spec: DerivationSpec, key: Sequence[int]) -> DerivedKey:
    """Dispatch to the variant's derivation."""
    v = spec.variant
    if v is Variant.CURVE:
        return derive_curve(_check_key(key, spec.q), spec.d)
    if v is Variant.CURVE_MOD:
        return derive_curve_mod(_check_key(key, spec.q), spec.d, spec.modulus)
    if v is Variant.TZ_LINEAR:
        return derive_tz(key, spec)
    if v is Variant.TZ5:
        return derive_tz5(key)
    if v is Variant.IDENTITY:
        return derive_identity(_check_key(key, spec.q))
    key = _check_key(key, spec.q)
    try:
        chars = spec.table[key]
    except KeyError:
        raise DerivationError(f"key {key} is not in the explicit derivation table") from None
    return tuple(enumerate(chars))


def table_index_bounds(spec: DerivationSpec, universe_bound: int) -> Tuple[int, ...]:
    """Table lengths n_i covering every key in [n]^q.

    Exact for curve, tz5, identity and explicit; for tz_linear the columns
    past the first use the field size, which is exact when n = 2^c.
    """
    n = universe_bound
    v = spec.variant
    if v in (Variant.CURVE, Variant.CURVE_MOD):
        bounds = [1 + (n - 1) * sum(i ** r for r in range(spec.q)) for i in range(spec.d)]
        if v is Variant.CURVE_MOD:
            bounds = [min(b, spec.modulus) for b in bounds]
        return tuple(bounds)
    if v is Variant.TZ_LINEAR:
        return (min(n, spec.field.size),) + (spec.field.size,) * (spec.d - 1)
    if v is Variant.TZ5:
        return (n, n, 2 * n - 1)
    if v is Variant.IDENTITY:
        return (n,) * spec.q
    return tuple(1 + max(chars[i] for chars in spec.table.values()) for i in range(spec.d))


# Batch derivation for the benchmark path.

class PackedTzDeriver:
    """Derive up to eight GF(2^8) characters per 64-bit word.

    For each input position i and byte value x, ``words[g][i][x]`` holds the
    products x * G[i][j] for the j of group g packed as bytes; a key's
    derived word is the XOR of one word per input character.
    """

    BYTES_PER_WORD = 8

    def __init__(self, spec: DerivationSpec):
        if spec.variant is not Variant.TZ_LINEAR or spec.field.c != 8:
            raise DerivationError("packed derivation needs a tz_linear spec over GF(2^8)")
        self.spec = spec
        f = spec.field
        xs = np.arange(256, dtype=np.int64)
        self.groups: List[Tuple[int, int]] = []
        self.words: List[np.ndarray] = []
        for start in range(0, spec.d, self.BYTES_PER_WORD):
            stop = min(start + self.BYTES_PER_WORD, spec.d)
            table = np.zeros((spec.q, 256), dtype=np.uint64)
            for i in range(spec.q):
                for offset, j in enumerate(range(start, stop)):
                    products = f.mul_array(xs, spec.matrix[i][j]).astype(np.uint64)
                    table[i] |= products << np.uint64(8 * offset)
            self.groups.append((start, stop))
            self.words.append(table)
        logger.debug(f"Packed {spec.describe()} into {len(self.groups)} words per key")

    def derive_many(self, keys: np.ndarray) -> np.ndarray:
        keys = np.asarray(keys, dtype=np.int64)
        out = np.empty((keys.shape[0], self.spec.d), dtype=np.int64)
        for (start, stop), table in zip(self.groups, self.words):
            packed = np.zeros(keys.shape[0], dtype=np.uint64)
            for i in range(self.spec.q):
                packed ^= table[i][keys[:, i]]
            for offset, j in enumerate(range(start, stop)):
                out[:, j] = ((packed >> np.uint64(8 * offset)) & np.uint64(0xFF)).astype(np.int64)
        return out


@functools.lru_cache(maxsize=32)
def packed_tz_deriver(spec: DerivationSpec) -> PackedTzDeriver:
    return PackedTzDeriver(spec)


def derive_many(spec: DerivationSpec, keys: np.ndarray) -> np.ndarray:
    """Derived characters of an (N, q) key array as an (N, d) int64 array."""
    keys = np.asarray(keys, dtype=np.int64)
    if keys.ndim != 2 or keys.shape[1] != spec.q:
        raise DerivationError(f"expected an (N, {spec.q}) key array, got shape {keys.shape}")
    v = spec.variant
    if v in (Variant.CURVE, Variant.CURVE_MOD):
        if keys.size:
            bounds = table_index_bounds(spec.curve(spec.q, spec.d), int(keys.max()) + 1)
            if max(bounds) >= 1 << 63 or keys.min() < 0:
                raise DerivationOverflowError("batch curve derivation needs non-negative keys with 63-bit derived characters")
        out = np.empty((keys.shape[0], spec.d), dtype=np.int64)
        for i in range(spec.d):
            value = np.zeros(keys.shape[0], dtype=np.int64)
            for r in reversed(range(spec.q)):
                value = value * i + keys[:, r]
            out[:, i] = value % spec.modulus if v is Variant.CURVE_MOD else value
        return out
    if v is Variant.TZ_LINEAR:
        if keys.size and (keys.min() < 0 or keys.max() >= spec.field.size):
            raise FieldRangeError(f"key characters must be elements of GF(2^{spec.field.c})")
        if spec.field.c == 8:
            return packed_tz_deriver(spec).derive_many(keys)
        out = np.zeros((keys.shape[0], spec.d), dtype=np.int64)
        for j in range(spec.d):
            for i in range(spec.q):
                out[:, j] ^= spec.field.mul_array(keys[:, i], spec.matrix[i][j])
        return out
    if v is Variant.TZ5:
        return np.stack([keys[:, 0], keys[:, 1], keys[:, 0] + keys[:, 1]], axis=1)
    if v is Variant.IDENTITY:
        return keys.copy()
    return np.array([[a for _, a in derive(spec, tuple(row))] for row in keys.tolist()], dtype=np.int64).reshape(-1, spec.d)
