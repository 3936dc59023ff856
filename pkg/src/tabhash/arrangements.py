"""Bad arrangements of key curves.

A key (a_0, ..., a_{q-1}) is read as the curve z -> sum a_i z^i. An
arrangement is bad on column c when every value at z = c is hit by an even
number of its curves; an arrangement bad on columns 0..d-1 is exactly a key
set whose (q,d)-curve incidence rows XOR to zero.
"""

from __future__ import annotations

import logging
import sys
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

from .derivation import WORD_BITS, WORD_LIMIT, Key
from .exceptions import (
    ArrangementError,
    ArrangementFormatError,
    DerivationOverflowError,
    DisjointnessError,
    DuplicateKeyError,
)

logger = logging.getLogger(__name__)

MAX_CONSTRUCTION_D = 12

_BASE_CASES = {
    1: ((0, 0), (0, 1)),
    2: ((0, 1), (0, 2), (1, 0), (1, 1)),
    3: ((0, 3), (0, 4), (1, 2), (1, 3), (4, 1), (4, 2), (5, 0), (5, 1)),
}


@dataclass(frozen=True)
class Arrangement:
    """k distinct key curves claimed bad on columns 0..d-1.

    ``verified`` is set only by code that has run :func:`verify_bad`.
    """
    q: int
    d: int
    keys: Tuple[Key, ...]
    verified: bool = False

    def __post_init__(self):
        keys = tuple(tuple(int(x) for x in key) for key in self.keys)
        object.__setattr__(self, "keys", keys)
        for key in keys:
            if len(key) != self.q:
                raise ArrangementError(f"key {key} has {len(key)} coefficients, expected {self.q}")
        if len(set(keys)) != len(keys):
            raise DuplicateKeyError("arrangement keys must be distinct")

    @property
    def k(self) -> int:
        return len(self.keys)

    @property
    def max_character(self) -> int:
        return max((x for key in self.keys for x in key), default=0)

    @property
    def min_character(self) -> int:
        return min((x for key in self.keys for x in key), default=0)

    def key_set(self) -> frozenset:
        return frozenset(self.keys)


def curve_value(key: Sequence[int], z: int) -> int:
    """Value of the key curve at z, checked against the 64-bit word."""
    value = 0
    for a in reversed(key):
        value = value * z + int(a)
        if abs(value) >= WORD_LIMIT:
            raise DerivationOverflowError(f"curve {tuple(key)} at z={z} exceeds {WORD_BITS} bits")
    return value


def is_bad_column(keys: Iterable[Sequence[int]], c: int) -> bool:
    counts = Counter(curve_value(key, c) for key in keys)
    return all(count % 2 == 0 for count in counts.values())


def verify_bad(arr: Arrangement) -> bool:
    """Whether every column 0..d-1 is bad."""
    return all(is_bad_column(arr.keys, c) for c in range(arr.d))


def bad_columns(arr: Arrangement, limit: Optional[int] = None) -> List[int]:
    """The bad columns among 0..limit-1 (default 0..d-1)."""
    limit = arr.d if limit is None else limit
    return [c for c in range(limit) if is_bad_column(arr.keys, c)]


def add_polynomial(arr: Arrangement, coefficients: Sequence[int]) -> Arrangement:
    """Add a fixed polynomial of degree < q to every curve; badness is unchanged."""
    if len(coefficients) > arr.q:
        raise ArrangementError(f"polynomial of {len(coefficients)} coefficients exceeds degree {arr.q - 1}")
    shift = list(coefficients) + [0] * (arr.q - len(coefficients))
    keys = tuple(tuple(a + s for a, s in zip(key, shift)) for key in arr.keys)
    result = Arrangement(arr.q, arr.d, keys)
    if arr.verified:
        return Arrangement(arr.q, arr.d, keys, verified=verify_bad(result))
    return result


def doubling_polynomial(q: int, d: int, scale: int) -> Tuple[int, ...]:
    """Coefficients of scale * prod_{i < q-1} (d + i - z), lowest degree first."""
    coefficients = [scale]
    for i in range(q - 1):
        root = d + i
        # multiply by (root - z)
        shifted = [0] + [-c for c in coefficients]
        coefficients = [root * c for c in coefficients] + [0]
        coefficients = [a + b for a, b in zip(coefficients, shifted)]
    return tuple(coefficients)


def double_arrangement(arr: Arrangement, shift_scale: Optional[int] = None) -> Arrangement:
    """Union of the arrangement and its copy shifted by the doubling polynomial.

    The shift vanishes on columns d..d+q-2, so the result is bad on d+q-1
    columns. With ``shift_scale`` None a scale is chosen that separates the
    two copies, doubling it until they are disjoint.

    Raises:
        ArrangementError: if ``arr`` is not bad on its d columns.
        DisjointnessError: if an explicit ``shift_scale`` makes the copies overlap.
    """
    new_d = arr.d + arr.q - 1
    if not arr.keys:
        return Arrangement(arr.q, new_d, (), verified=True)
    if not verify_bad(arr):
        raise ArrangementError(f"cannot double an arrangement that is not bad on {arr.d} columns")

    explicit = shift_scale is not None
    if not explicit:
        firsts = [key[0] for key in arr.keys]
        shift_scale = 1 + max(firsts) - min(firsts)
    original = arr.key_set()
    while True:
        shifted = add_polynomial(Arrangement(arr.q, arr.d, arr.keys),
                                 doubling_polynomial(arr.q, arr.d, shift_scale))
        overlap = original & shifted.key_set()
        if not overlap:
            break
        if explicit:
            raise DisjointnessError(f"shift scale {shift_scale} maps {sorted(overlap)[0]} onto an existing curve")
        logger.debug(f"Shift scale {shift_scale} overlaps {len(overlap)} curves, doubling")
        shift_scale *= 2

    result = Arrangement(arr.q, new_d, arr.keys + shifted.keys)
    if not verify_bad(result):
        raise ArrangementError(f"doubled arrangement is not bad on {new_d} columns")
    return Arrangement(result.q, result.d, result.keys, verified=True)


def normalize_nonneg(arr: Arrangement) -> Arrangement:
    """Shift all second characters so the smallest is 0 (only if some are negative)."""
    if arr.q != 2:
        raise ArrangementError(f"normalization is defined for q=2, got q={arr.q}")
    shift = max(0, -min((key[1] for key in arr.keys), default=0))
    if shift == 0:
        return arr
    result = add_polynomial(arr, (0, shift))
    return Arrangement(2, arr.d, result.keys, verified=verify_bad(result))


def construct_bad_arrangement(d: int) -> Arrangement:
    """Bad (2,d,2^d)-arrangement with non-negative characters.

    For d > 3 each step doubles with scale 2^(d'-1) and then raises all
    second characters by 2^(d'-1), keeping characters within
    2^(d-1)(d-2)+1.
    """
    if not 1 <= d <= MAX_CONSTRUCTION_D:
        raise ArrangementError(f"construction supports 1 <= d <= {MAX_CONSTRUCTION_D}, got {d}")
    if d in _BASE_CASES:
        arr = Arrangement(2, d, _BASE_CASES[d])
        return Arrangement(2, d, arr.keys, verified=verify_bad(arr))

    arr = construct_bad_arrangement(3)
    for step in range(3, d):
        scale = 2 ** (step - 1)
        arr = add_polynomial(double_arrangement(arr, scale), (0, scale))
        logger.debug(f"Constructed bad (2,{step + 1},{arr.k})-arrangement, max character {arr.max_character}")
    return Arrangement(2, d, tuple(sorted(arr.keys)), verified=verify_bad(arr))


# Text format: "q d k" header, then k lines of q integers; '#' starts a comment.

def format_arrangement(arr: Arrangement, comment: Optional[str] = None) -> str:
    lines = []
    if comment:
        lines.extend(f"# {line}" for line in comment.splitlines())
    lines.append(f"{arr.q} {arr.d} {arr.k}")
    lines.extend(" ".join(str(x) for x in key) for key in arr.keys)
    return "\n".join(lines) + "\n"


def _content_lines(text: str) -> List[Tuple[int, List[str]]]:
    result = []
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if line:
            result.append((number, line.split()))
    return result


def parse_arrangement(text: str) -> Arrangement:
    lines = _content_lines(text)
    if not lines:
        raise ArrangementFormatError("empty arrangement: missing 'q d k' header")
    number, header = lines[0]
    try:
        q, d, k = (int(x) for x in header)
    except ValueError:
        raise ArrangementFormatError(f"line {number}: expected header 'q d k', got {' '.join(header)!r}") from None
    body = lines[1:]
    if len(body) != k:
        raise ArrangementFormatError(f"header declares {k} keys, found {len(body)}")
    keys = []
    for number, fields in body:
        if len(fields) != q:
            raise ArrangementFormatError(f"line {number}: expected {q} integers, got {len(fields)}")
        try:
            keys.append(tuple(int(x) for x in fields))
        except ValueError:
            raise ArrangementFormatError(f"line {number}: non-integer coefficient") from None
    try:
        return Arrangement(q, d, tuple(keys))
    except (ArrangementError, DuplicateKeyError) as e:
        raise ArrangementFormatError(str(e)) from e


def read_arrangement(source: Union[str, Path]) -> Arrangement:
    """Read an arrangement from a file path or '-' for standard input."""
    if str(source) == "-":
        return parse_arrangement(sys.stdin.read())
    try:
        text = Path(source).read_text()
    except OSError as e:
        raise ArrangementFormatError(f"cannot read arrangement file {source}: {e}") from e
    return parse_arrangement(text)


def write_arrangement(arr: Arrangement, target: Union[str, Path], comment: Optional[str] = None) -> None:
    text = format_arrangement(arr, comment)
    if str(target) == "-":
        sys.stdout.write(text)
    else:
        Path(target).write_text(text)
        logger.info(f"Wrote {arr.k}-key arrangement to {target}")
