"""tabhash - tabulation-based hashing with certified k-wise independence."""

__version__ = "0.1.0"

from .derivation import DerivationSpec, Variant, derive
from .families import HashFamilySpec, guaranteed_k, parse_family
from .tabulation import Hasher, LookupTables, fill_tables_kwise, fill_tables_random, hash_key
from .independence import (
    exact_joint_distribution,
    find_bad_arrangement,
    incidence_matrix,
    is_independent_set,
    is_peelable,
    k_max_bounded,
)
from .arrangements import Arrangement, construct_bad_arrangement, verify_bad
from .utils import to_json, to_toml
from .config import Config
from .exceptions import TabhashError, ConfigurationError

__all__ = [
    "DerivationSpec",
    "Variant",
    "derive",
    "HashFamilySpec",
    "guaranteed_k",
    "parse_family",
    "Hasher",
    "LookupTables",
    "fill_tables_kwise",
    "fill_tables_random",
    "hash_key",
    "exact_joint_distribution",
    "find_bad_arrangement",
    "incidence_matrix",
    "is_independent_set",
    "is_peelable",
    "k_max_bounded",
    "Arrangement",
    "construct_bad_arrangement",
    "verify_bad",
    "to_json",
    "to_toml",
    "Config",
    "TabhashError",
    "ConfigurationError",
]
