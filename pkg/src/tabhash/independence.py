"""Independence analysis of tabulation-based hash families.

A set of keys hashes independently and uniformly exactly when its
derivation incidence matrix has full row rank over GF(2). Everything in
this module is built on that matrix: the rank test, peeling, the
exhaustive search for bad arrangements (key sets whose rows XOR to zero)
and the brute-force distribution oracle the rank test is checked against.
"""

from __future__ import annotations

import bisect
import itertools
import logging
import math
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from collections import Counter
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import tomli_w

from .derivation import DerivationSpec, Key, Variant, derive
from .exceptions import BudgetExceededError, DuplicateKeyError
from .gf2 import BitMatrix, find_dependent_rows, rank
from .tabulation import seeded_rng

logger = logging.getLogger(__name__)

DEFAULT_SEARCH_BUDGET = 10 ** 10
MAX_ENUMERATION_BITS = 24
_ENUMERATION_CHUNK = 1 << 20
_SAMPLE_CHUNK = 1 << 18

Outcome = Tuple[int, ...]


@dataclass(frozen=True)
class IndependenceVerdict:
    """Outcome of the rank test for one key set."""
    independent: bool
    witness: Optional[Tuple[Key, ...]]
    rank: int
    used_cells: int
    n_keys: int


def _distinct_keys(keys: Iterable[Sequence[int]]) -> List[Key]:
    result = [tuple(int(x) for x in key) for key in keys]
    if len(set(result)) != len(result):
        duplicate = next(key for key, count in Counter(result).items() if count > 1)
        raise DuplicateKeyError(f"key {duplicate} appears more than once")
    return result


def incidence_matrix(spec: DerivationSpec, keys: Iterable[Sequence[int]]) -> BitMatrix:
    """One row per key, one column per used cell (i, a) in lexicographic order."""
    keys = _distinct_keys(keys)
    derived = [derive(spec, key) for key in keys]
    labels = sorted({cell for dk in derived for cell in dk})
    index = {cell: j for j, cell in enumerate(labels)}
    rows = []
    for dk in derived:
        row = 0
        for cell in dk:
            row |= 1 << index[cell]
        rows.append(row)
    return BitMatrix(len(rows), len(labels), tuple(rows), tuple(labels))


def is_independent_set(spec: DerivationSpec, keys: Iterable[Sequence[int]]) -> IndependenceVerdict:
    keys = _distinct_keys(keys)
    m = incidence_matrix(spec, keys)
    dependent = find_dependent_rows(m)
    witness = None
    if dependent is not None:
        witness = tuple(keys[i] for i in sorted(dependent))
    return IndependenceVerdict(
        independent=dependent is None,
        witness=witness,
        rank=rank(m),
        used_cells=m.n_cols,
        n_keys=len(keys),
    )


def is_peelable(spec: DerivationSpec, keys: Iterable[Sequence[int]]) -> bool:
    """Whether repeatedly removing a key with a unique derived character empties the set."""
    keys = _distinct_keys(keys)
    remaining = {key: derive(spec, key) for key in keys}
    counts = Counter(cell for dk in remaining.values() for cell in dk)
    while remaining:
        peel = next(
            (key for key, dk in remaining.items() if any(counts[cell] == 1 for cell in dk)),
            None,
        )
        if peel is None:
            return False
        counts.subtract(remaining.pop(peel))
    return True


# Exhaustive search

def universe_keys(spec: DerivationSpec, n: int) -> List[Key]:
    """[n]^q in lexicographic order, or the table keys of an explicit derivation."""
    if spec.variant is Variant.EXPLICIT:
        return sorted(spec.table)
    return list(itertools.product(range(n), repeat=spec.q))


@dataclass
class _SearchSpace:
    """Packed rows of the universe plus the tables the depth-first search prunes with."""
    keys: List[Key]
    rows: List[int]
    suffix: List[int]
    row_positions: Dict[int, List[int]]
    d: int
    k: int


def _build_space(spec: DerivationSpec, keys: List[Key], k: int) -> _SearchSpace:
    cells: Dict[Tuple[int, int], int] = {}
    rows = []
    for key in keys:
        row = 0
        for cell in derive(spec, key):
            row |= 1 << cells.setdefault(cell, len(cells))
        rows.append(row)
    suffix = [0] * (len(rows) + 1)
    for j in range(len(rows) - 1, -1, -1):
        suffix[j] = suffix[j + 1] | rows[j]
    positions: Dict[int, List[int]] = {}
    for j, row in enumerate(rows):
        positions.setdefault(row, []).append(j)
    return _SearchSpace(keys, rows, suffix, positions, spec.d, k)


def _extend(space: _SearchSpace, start: int, remaining: int, parity: int,
            chosen: List[int]) -> Optional[List[int]]:
    if remaining == 0:
        return chosen if parity == 0 else None
    if parity.bit_count() > remaining * space.d:
        return None
    if remaining == 1:
        positions = space.row_positions.get(parity)
        if positions:
            at = bisect.bisect_left(positions, start)
            if at < len(positions):
                return chosen + [positions[at]]
        return None
    rows, suffix = space.rows, space.suffix
    for j in range(start, len(rows) - remaining + 1):
        # an odd cell no later row touches can never be cancelled
        if parity & ~suffix[j]:
            break
        found = _extend(space, j + 1, remaining - 1, parity ^ rows[j], chosen + [j])
        if found is not None:
            return found
    return None


def _search_root(space: _SearchSpace, root: int) -> Optional[List[int]]:
    return _extend(space, root + 1, space.k - 1, space.rows[root], [root])


def _slope_order(keys: List[Key]) -> List[Key]:
    # steepest lines first, so the first chosen key has maximal slope
    return sorted(keys, key=lambda key: (-key[1], key[0]))


def _slope_feasible_roots(keys: List[Key], d: int, k: int) -> List[int]:
    """Roots of a (2,d)-curve search that can lead to a bad arrangement.

    The first key a + b*z has maximal slope among the chosen keys, so at
    every column c < d it must meet a later key of smaller slope, and these
    keys are pairwise distinct because a line crosses it at most once.
    """
    if k < d + 1:
        return []
    present = set(keys)
    feasible = []
    for j, (a0, b0) in enumerate(keys):
        later_slopes = range(min(b for _, b in keys), b0)
        if all(
            any((a0 + (b0 - b) * c, b) in present for b in later_slopes)
            for c in range(d)
        ):
            feasible.append(j)
    return feasible


_WORKER_SPACE: Optional[_SearchSpace] = None


def _init_worker(space: _SearchSpace) -> None:
    global _WORKER_SPACE
    _WORKER_SPACE = space


def _search_partition(roots: Sequence[int]) -> Optional[List[int]]:
    for root in roots:
        found = _search_root(_WORKER_SPACE, root)
        if found is not None:
            return found
    return None


def _run_search(space: _SearchSpace, roots: List[int], workers: int) -> Optional[List[int]]:
    if workers <= 1 or len(roots) < 2:
        for root in roots:
            found = _search_root(space, root)
            logger.debug(f"Root {root}/{len(space.rows)} {'found a witness' if found else 'exhausted'}")
            if found is not None:
                return found
        return None

    partitions = [roots[i::workers] for i in range(workers) if roots[i::workers]]
    witnesses = []
    with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker, initargs=(space,)) as executor:
        futures = [executor.submit(_search_partition, part) for part in partitions]
        for future in as_completed(futures):
            found = future.result()
            logger.debug(f"Partition finished, witness: {found is not None}")
            if found is not None:
                witnesses.append(found)
    # each partition returns its lowest witness; the lowest root overall wins
    return min(witnesses) if witnesses else None


def find_bad_arrangement(
    spec: DerivationSpec,
    n: int,
    k: int,
    budget: int = DEFAULT_SEARCH_BUDGET,
    workers: int = 1,
    slope_pruning: bool = True,
    ledger: Optional['SearchLedger'] = None,
) -> Optional[Tuple[Key, ...]]:
    """Find k distinct keys of [n]^q whose incidence rows XOR to zero.

    Returns the keys in sorted order, or None when none exist; None is a
    proof by exhaustion for the universe [n]^q.

    Raises:
        BudgetExceededError: if C(|U|, k) exceeds ``budget``.
    """
    if k < 2:
        raise ValueError(f"bad arrangements have at least 2 keys, got k={k}")
    if ledger is not None:
        cached = ledger.lookup(spec, n, k)
        if cached is not None:
            logger.info(f"Ledger hit for {spec.describe()} n={n} k={k}")
            return cached[1]

    keys = universe_keys(spec, n)
    size = math.comb(len(keys), k)
    if size > budget:
        logger.info(f"Refusing search of C({len(keys)}, {k}) = {size} subsets, budget {budget}")
        raise BudgetExceededError(f"C({len(keys)}, {k}) = {size} subsets exceeds the search budget {budget}")

    logger.info(f"Searching {spec.describe()} over {len(keys)} keys for bad arrangements of size {k}")
    use_slopes = slope_pruning and spec.variant is Variant.CURVE and spec.q == 2
    if use_slopes:
        keys = _slope_order(keys)
    space = _build_space(spec, keys, k)
    roots = list(range(max(len(keys) - k + 1, 0)))
    if use_slopes:
        feasible = set(_slope_feasible_roots(keys, spec.d, k))
        roots = [root for root in roots if root in feasible]
        logger.debug(f"Slope pruning kept {len(roots)} roots")

    found = _run_search(space, roots, workers)
    witness = tuple(sorted(keys[j] for j in found)) if found is not None else None
    logger.info(f"Search finished: {'witness ' + str(witness) if witness else 'no bad arrangement'}")
    if ledger is not None:
        ledger.record(spec, n, k, witness)
    return witness


@dataclass(frozen=True)
class KMaxResult:
    """Bounded k_max together with the smallest refuting witness, if any."""
    k_max: int
    witness: Optional[Tuple[Key, ...]]
    n: int
    k_limit: int

    @property
    def refuted(self) -> bool:
        return self.witness is not None


def k_max_search(spec: DerivationSpec, n: int, k_limit: int, **search_options) -> KMaxResult:
    """Largest k <= k_limit with no bad arrangement of any size k' <= k in [n]^q.

    Only even sizes are searched; an odd-size bad arrangement cannot exist
    because every row has exactly one cell in table 0.
    """
    for size in range(2, k_limit + 1, 2):
        witness = find_bad_arrangement(spec, n, size, **search_options)
        if witness is not None:
            return KMaxResult(size - 1, witness, n, k_limit)
    return KMaxResult(k_limit, None, n, k_limit)


def k_max_bounded(spec: DerivationSpec, n: int, k_limit: int, **search_options) -> int:
    return k_max_search(spec, n, k_limit, **search_options).k_max


class SearchLedger:
    """TOML cache of exhaustive search verdicts.

    Entries are keyed by variant, q, d, field width, modulus, n and k.
    Explicit derivations are never cached.
    """

    def __init__(self, path: Path):
        self.path = Path(path).expanduser()
        self.entries: Dict[str, dict] = {}
        if self.path.exists():
            try:
                with open(self.path, "rb") as f:
                    self.entries = tomllib.load(f).get("verdicts", {})
            except tomllib.TOMLDecodeError as e:
                logger.warning(f"Ignoring unreadable search ledger {self.path}: {e}")

    @staticmethod
    def entry_key(spec: DerivationSpec, n: int, k: int) -> Optional[str]:
        if spec.variant is Variant.EXPLICIT:
            return None
        c = spec.field.c if spec.field is not None else "-"
        modulus = spec.modulus if spec.modulus is not None else "-"
        return f"{spec.variant.value}:{spec.q}:{spec.d}:{c}:{modulus}:{n}:{k}"

    def lookup(self, spec: DerivationSpec, n: int, k: int) -> Optional[Tuple[bool, Optional[Tuple[Key, ...]]]]:
        """(found, witness) for a cached search, or None on a miss."""
        key = self.entry_key(spec, n, k)
        if key is None or key not in self.entries:
            return None
        entry = self.entries[key]
        if entry.get("found"):
            return True, tuple(tuple(x) for x in entry["witness"])
        return False, None

    def record(self, spec: DerivationSpec, n: int, k: int, witness: Optional[Tuple[Key, ...]]) -> None:
        key = self.entry_key(spec, n, k)
        if key is None:
            return
        entry: dict = {"found": witness is not None}
        if witness is not None:
            entry["witness"] = [list(x) for x in witness]
        self.entries[key] = entry
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.path, "wb") as f:
            tomli_w.dump({"verdicts": self.entries}, f)

    def __len__(self) -> int:
        return len(self.entries)


# Distribution oracles

def _row_cells(m: BitMatrix) -> List[List[int]]:
    return [[c for c in range(m.n_cols) if (row >> c) & 1] for row in m.rows]


def _decode_outcomes(codes: np.ndarray, counts: np.ndarray, n_keys: int, ell: int) -> Dict[Outcome, int]:
    mask = (1 << ell) - 1
    return {
        tuple((int(code) >> (j * ell)) & mask for j in range(n_keys)): int(count)
        for code, count in zip(codes, counts)
    }


def exact_joint_distribution(spec: DerivationSpec, keys: Iterable[Sequence[int]],
                             ell: int) -> Dict[Outcome, Fraction]:
    """Exact distribution of (h(x_0), ..., h(x_{k-1})) under fully random tables.

    Enumerates all 2^(ell*w) fillings of the w used cells. Only outcomes of
    positive probability appear in the result.
    """
    m = incidence_matrix(spec, keys)
    bits = ell * m.n_cols
    if bits > MAX_ENUMERATION_BITS or m.n_rows * ell > 63:
        raise BudgetExceededError(
            f"enumerating 2^{bits} fillings of {m.n_cols} cells exceeds 2^{MAX_ENUMERATION_BITS}"
        )
    # bit b of h(x_j) is the parity of the filling bits (cell*ell + b) over x_j's cells
    masks = [
        [sum(1 << (c * ell + b) for c in cells) for b in range(ell)]
        for cells in _row_cells(m)
    ]
    counts: Counter = Counter()
    total = 1 << bits
    for start in range(0, total, _ENUMERATION_CHUNK):
        fillings = np.arange(start, min(start + _ENUMERATION_CHUNK, total), dtype=np.uint64)
        codes = np.zeros(fillings.shape, dtype=np.uint64)
        for j, row_masks in enumerate(masks):
            for b, mask in enumerate(row_masks):
                parity = np.bitwise_count(fillings & np.uint64(mask)).astype(np.uint64) & np.uint64(1)
                codes |= parity << np.uint64(j * ell + b)
        values, value_counts = np.unique(codes, return_counts=True)
        counts.update(_decode_outcomes(values, value_counts, m.n_rows, ell))
    return {outcome: Fraction(count, total) for outcome, count in sorted(counts.items())}


def is_uniform(distribution: Dict[Outcome, Fraction], n_keys: int, ell: int) -> bool:
    """Whether every outcome in [2^ell]^n_keys has probability exactly 2^(-ell*n_keys)."""
    outcomes = 1 << (ell * n_keys)
    target = Fraction(1, outcomes)
    return len(distribution) == outcomes and all(p == target for p in distribution.values())


def sample_joint_distribution(spec: DerivationSpec, keys: Iterable[Sequence[int]], ell: int,
                              samples: int, seed: int = 0) -> Dict[Outcome, int]:
    """Outcome counts of (h(x_0), ..., h(x_{k-1})) over ``samples`` random fillings."""
    m = incidence_matrix(spec, keys)
    if m.n_rows * ell > 63:
        raise BudgetExceededError(f"{m.n_rows} keys of {ell} bits do not fit one outcome word")
    cells = _row_cells(m)
    rng = seeded_rng(seed, 0)
    counts: Counter = Counter()
    for start in range(0, samples, _SAMPLE_CHUNK):
        size = min(_SAMPLE_CHUNK, samples - start)
        fillings = rng.integers(0, 1 << ell, size=(size, m.n_cols), dtype=np.uint64)
        codes = np.zeros(size, dtype=np.uint64)
        for j, row_cells in enumerate(cells):
            h = np.bitwise_xor.reduce(fillings[:, row_cells], axis=1)
            codes |= h << np.uint64(j * ell)
        values, value_counts = np.unique(codes, return_counts=True)
        counts.update(_decode_outcomes(values, value_counts, m.n_rows, ell))
    return dict(counts)
