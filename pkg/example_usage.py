"""Streamlined tabhash examples."""

import asyncio

from tabhash import (
    DerivationSpec, Hasher, construct_bad_arrangement, exact_joint_distribution, fill_tables_random,
    find_bad_arrangement, is_independent_set, is_peelable, k_max_bounded, parse_family, to_json,
)
from tabhash.bench import report_markdown, run_benchmark_async
from tabhash.config import BenchConfig
from tabhash.display import format_verdict


def example_hashing():
    """Example: Hash a few keys with every standard family."""
    print("🔑 Hashing examples")

    for family_id in ["id", "tz5", "curve2_4", "tz4_16"]:
        family = parse_family(family_id)
        tables = fill_tables_random(42, family.table_sizes, 32)
        h = Hasher(family.derivation, tables)
        key = (1, 2) if family.derivation.q == 2 else (1, 2, 3, 4)
        print(f"  {family_id:<9} k={family.guaranteed_k} lookups={family.lookups}: h{key} = {h.hash(key):#010x}")
    print()


def example_rank_test():
    """Example: Certify key sets and compare with peeling."""
    print("🧮 Rank test examples")

    spec = DerivationSpec.curve(2, 2)
    for keys in ([(0, 1), (0, 2), (1, 0)], [(0, 1), (0, 2), (1, 0), (1, 1)]):
        verdict = is_independent_set(spec, keys)
        print(format_verdict(verdict, "curve2_2"))
        print(f"  peelable: {is_peelable(spec, keys)}")

    # exact distribution of the dependent set: only 8 of 16 outcomes occur
    dist = exact_joint_distribution(spec, [(0, 1), (0, 2), (1, 0), (1, 1)], ell=1)
    print(f"  {len(dist)} outcomes, each with probability {next(iter(dist.values()))}")
    print()


def example_search():
    """Example: Exhaustive search and the bounded k_max."""
    print("🔍 Search examples")

    spec = DerivationSpec.curve(2, 2)
    print(f"  size 3 in [5]^2: {find_bad_arrangement(spec, 5, 3)}")
    print(f"  size 4 in [3]^2: {find_bad_arrangement(spec, 3, 4)}")
    print(f"  k_max over [3]^2: {k_max_bounded(spec, 3, 4)}")

    for d in range(1, 6):
        arr = construct_bad_arrangement(d)
        print(f"  construct d={d}: {arr.k} keys, characters <= {arr.max_character}, verified={arr.verified}")
    print()


async def example_benchmark():
    """Example: A short benchmark run, families timed concurrently."""
    print("⏱️ Benchmark example")

    cfg = BenchConfig(trials=3, keys_per_trial=100_000, passes=2, families=["id", "curve2_4", "tz4_16"])
    report = await run_benchmark_async(cfg)
    print(report_markdown(report))
    print(to_json(report.rows[0])[:200])


def main():
    """Run all examples."""
    print("tabhash Examples\n")
    example_hashing()
    example_rank_test()
    example_search()
    asyncio.run(example_benchmark())


if __name__ == "__main__":
    main()
