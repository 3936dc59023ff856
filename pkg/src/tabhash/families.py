"""Hash family identifiers and the independence guarantees they carry.

Identifiers follow the naming used in benchmark reports:

    id          simple tabulation, two 16-bit characters
    curve{q}_{d}    (q,d)-curve family, 32/q-bit input characters
    tz{q}_{d}   Thorup-Zhang linear map over GF(2^(32/q))
    tz5         T0(a) ^ T1(b) ^ T2(a+b) on 16-bit halves

``curve{q}_{d}%{r}`` selects the modular-reduction variant and
``tz{q}_{d}@{c}`` overrides the field width (c in 2, 8, 16).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Tuple

from .derivation import TZ_FIELD_WIDTHS, DerivationSpec, Variant, table_index_bounds
from .exceptions import DerivationError, UnknownFamilyError

KEY_BITS = 32

_FAMILY_RE = re.compile(
    r"^(?:(?P<id>id)|(?P<tz5>tz5)"
    r"|curve(?P<cq>\d+)_(?P<cd>\d+)(?:%(?P<mod>\d+))?"
    r"|tz(?P<tq>\d+)_(?P<td>\d+)(?:@(?P<c>\d+))?)$"
)


@dataclass(frozen=True)
class HashFamilySpec:
    """A named family: derivation, input character width and output bits."""
    family_id: str
    derivation: DerivationSpec
    char_bits: int
    ell: int = 32

    @property
    def universe_bound(self) -> int:
        return 1 << self.char_bits

    @property
    def lookups(self) -> int:
        return self.derivation.d

    @property
    def table_sizes(self) -> Tuple[int, ...]:
        return table_index_bounds(self.derivation, self.universe_bound)

    @property
    def guaranteed_k(self) -> int:
        return guaranteed_k(self.derivation)

    def with_ell(self, ell: int) -> 'HashFamilySpec':
        return HashFamilySpec(self.family_id, self.derivation, self.char_bits, ell)


def parse_family(family_id: str, ell: int = 32) -> HashFamilySpec:
    """Resolve a family identifier such as ``curve2_4`` or ``tz4_16``."""
    match = _FAMILY_RE.match(family_id.strip())
    if not match:
        raise UnknownFamilyError(f"unknown hash family '{family_id}'")
    try:
        if match["id"]:
            return HashFamilySpec(family_id, DerivationSpec.identity(2), 16, ell)
        if match["tz5"]:
            return HashFamilySpec(family_id, DerivationSpec.tz5(), 16, ell)
        if match["cq"]:
            q, d = int(match["cq"]), int(match["cd"])
            if q < 2 or KEY_BITS % q:
                raise UnknownFamilyError(f"curve family needs q dividing {KEY_BITS}, got q={q}")
            if match["mod"]:
                spec = DerivationSpec.curve_mod(q, d, int(match["mod"]))
            else:
                spec = DerivationSpec.curve(q, d)
            return HashFamilySpec(family_id, spec, KEY_BITS // q, ell)
        q, d = int(match["tq"]), int(match["td"])
        if match["c"]:
            c = int(match["c"])
        elif q >= 1 and KEY_BITS % q == 0 and KEY_BITS // q in TZ_FIELD_WIDTHS:
            c = KEY_BITS // q
        else:
            raise UnknownFamilyError(f"no default field width for tz family with q={q}; use tz{q}_{d}@c")
        return HashFamilySpec(family_id, DerivationSpec.tz(q, d, c), c, ell)
    except DerivationError as e:
        raise UnknownFamilyError(f"invalid hash family '{family_id}': {e}") from e


# Independence bounds

def required_d_tz(k: int, q: int) -> int:
    """Derived characters the Thorup-Zhang scheme needs for k-wise independence."""
    if k <= 1:
        return 1
    if k % 2 == 1:
        return (k - 2) * (q - 1) + 1
    return (k - 1) * (q - 1) + 1


def required_d_curve(k: int, q: int) -> int:
    """Derived characters sufficient for a (q,d)-curve family to be k-wise independent."""
    if k <= 1:
        return 1
    if q == 2:
        return (k + 2) // 2
    return math.ceil(2 * (q - 1) * (k - 1) / (2 * q - 1)) * (q - 1) + 1


def _largest_k(d: int, required) -> int:
    k = 1
    while required(k + 1) <= d:
        k += 1
    # an even degree of independence always extends to the next odd one
    if k % 2 == 0:
        k += 1
    return k


def guaranteed_k(spec: DerivationSpec) -> int:
    """Largest k for which the family is proven k-wise independent."""
    v = spec.variant
    if v is Variant.CURVE:
        if spec.q == 2:
            return 2 * spec.d - 1
        return _largest_k(spec.d, lambda k: required_d_curve(k, spec.q))
    if v is Variant.TZ_LINEAR:
        return _largest_k(spec.d, lambda k: required_d_tz(k, spec.q))
    if v is Variant.TZ5:
        return 5
    if v is Variant.IDENTITY:
        return 3 if spec.q > 1 else 1
    return 0


def lower_bound_universe(d: int) -> int:
    """Universe side n from which no (2,d)-curve family is 2^d-wise independent."""
    return max(2 ** (d - 1) * (d - 1) + 2, 3)


def construction_universe(d: int) -> int:
    """Universe side the explicit bad (2,d,2^d)-arrangement construction fits in."""
    if d <= 2:
        return 3
    return max(2 ** (d - 1) * (d - 2) + 2, 3)
