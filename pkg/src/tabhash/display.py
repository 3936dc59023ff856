"""Text rendering for CLI output."""

from typing import Any, Dict, List, Optional, Sequence

from .arrangements import Arrangement
from .independence import IndependenceVerdict, KMaxResult


def format_key(key: Sequence[int]) -> str:
    return "(" + ", ".join(str(x) for x in key) + ")"


def format_verdict(verdict: IndependenceVerdict, family_id: Optional[str] = None) -> str:
    """Rank test summary, with the dependent keys when there are any."""
    subject = f"{verdict.n_keys} keys" + (f" under {family_id}" if family_id else "")
    lines = [
        f"{subject}: {'INDEPENDENT' if verdict.independent else 'DEPENDENT'}",
        f"  rank {verdict.rank} of {verdict.n_keys}, {verdict.used_cells} table cells used",
    ]
    if verdict.witness:
        lines.append(f"  witness ({len(verdict.witness)} keys, hash values XOR to 0):")
        lines.extend(f"    {format_key(key)}" for key in verdict.witness)
    return "\n".join(lines)


def format_kmax(result: KMaxResult, family_id: str) -> str:
    """Bounded k_max with its caveat.

    Only a refutation holds beyond [n]^q; an unrefuted k only says no bad
    arrangement exists among keys of that universe.
    """
    lines = [f"k_max({family_id}) over [{result.n}]^q = {result.k_max}"]
    if result.refuted:
        lines.append(
            f"  refuted at k = {result.k_max + 1} by a bad arrangement; holds for every universe containing it:"
        )
        lines.extend(f"    {format_key(key)}" for key in result.witness)
    else:
        lines.append(
            f"  no bad arrangement of size <= {result.k_limit} in [{result.n}]^q; "
            "a larger universe may still contain one"
        )
    return "\n".join(lines)


def format_bad_columns(arr: Arrangement, columns: List[int]) -> str:
    """'BAD on columns 0..d-1' when all claimed columns are bad."""
    missing = [c for c in range(arr.d) if c not in columns]
    if not missing:
        if arr.d == 0:
            return "BAD on no columns (d = 0)"
        return f"BAD on columns 0..{arr.d - 1}"
    return f"NOT BAD: columns {', '.join(str(c) for c in missing)} have an odd-size value class"


def get_file_size_human(size_bytes: int) -> str:
    """Format sizes (1.2MB, 34KB)."""
    if size_bytes < 1024:
        return f"{size_bytes}B"
    elif size_bytes < 1024 * 1024:
        return f"{size_bytes / 1024:.1f}KB"
    elif size_bytes < 1024 * 1024 * 1024:
        return f"{size_bytes / (1024 * 1024):.1f}MB"
    else:
        return f"{size_bytes / (1024 * 1024 * 1024):.1f}GB"


def format_bench_summary(rows) -> str:
    """One line per family for terminal output."""
    return "\n".join(
        f"{row.family:<10} k={row.guaranteed_k:<3} lookups={row.lookups:<3} "
        f"{row.mean_ns:8.2f} ns ± {row.sd_ns:.2f}  tables {get_file_size_human(row.table_bytes)}"
        for row in rows
    )


# Configuration Display
def display_config_section(title: str, config_dict: Dict[str, Any]) -> str:
    """Display a configuration section with formatting."""
    output = f"[{title}]\n"
    for key, value in config_dict.items():
        output += f"  {key} = {value}\n"
    return output


def format_config_for_display(config) -> str:
    """Format entire configuration for readable display."""
    output = "=== tabhash Configuration ===\n\n"
    sections = config.to_dict()
    output += "\n".join(display_config_section(name, values) for name, values in sections.items())
    return output


def format_validation_report(validation_results: Dict[str, bool]) -> str:
    """Format validation results for display."""
    output = "\n=== Configuration Validation Report ===\n\n"

    for check, passed in validation_results.items():
        status = "PASS" if passed else "FAIL"
        output += f"{status} - {check}\n"

    overall_status = all(validation_results.values())
    output += f"\nOverall Status: {'Valid' if overall_status else 'Invalid'}\n"

    return output
