"""End-to-end checks of the independence results at desk scale."""
import itertools
import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest

from tabhash.arrangements import construct_bad_arrangement, verify_bad
from tabhash.bench import report_csv, run_benchmark
from tabhash.config import BenchConfig
from tabhash.derivation import DerivationSpec, table_index_bounds
from tabhash.independence import (
    exact_joint_distribution, find_bad_arrangement, incidence_matrix, is_independent_set, is_peelable, is_uniform,
    k_max_bounded, k_max_search, sample_joint_distribution, universe_keys,
)
from tabhash.tabulation import Hasher, fill_tables_random, seeded_rng

WORKED = DerivationSpec.explicit({(0,): (4, 5, 6), (1,): (4, 7, 8), (2,): (5, 7, 9)})


def random_explicit(rng, n_keys, d, values):
    rows = rng.integers(0, values, size=(n_keys, d)).tolist()
    return DerivationSpec.explicit({(j,): tuple(row) for j, row in enumerate(rows)})


def smallest_dependent_size(spec):
    m = incidence_matrix(spec, universe_keys(spec, 0))
    for size in range(1, m.n_rows + 1):
        if any(m.xor_rows(subset) == 0 for subset in itertools.combinations(range(m.n_rows), size)):
            return size
    return None


class TestCurveUpperBound:
    """No bad (2,d,k)-arrangement with k <= 2d-1 in small universes."""

    @pytest.mark.parametrize("d,n", [(1, 5), (2, 5), (3, 5), (4, 4)])
    def test_exhaustive(self, d, n):
        """Test no bad arrangement up to 2d-1 keys."""
        result = k_max_search(DerivationSpec.curve(2, d), n, 2 * d - 1, slope_pruning=False)

        assert result.k_max == 2 * d - 1
        assert not result.refuted

    @pytest.mark.parametrize("d,n", [(2, 5), (3, 5)])
    def test_odd_sizes_have_no_witness(self, d, n):
        """Test odd sizes never have a witness."""
        for k in range(3, 2 * d, 2):
            assert find_bad_arrangement(DerivationSpec.curve(2, d), n, k, slope_pruning=False) is None


class TestCurveLowerBound:
    """The doubling construction gives bad (2,d,2^d)-arrangements."""

    @pytest.mark.parametrize("d", range(1, 9))
    def test_construction(self, d):
        """Test 2^d constructed keys are bad."""
        arr = construct_bad_arrangement(d)

        assert arr.k == 2 ** d
        assert verify_bad(arr)
        bound = 2 if d <= 2 else 2 ** (d - 1) * (d - 2) + 1
        assert 0 <= arr.min_character and arr.max_character <= bound

    @pytest.mark.parametrize("d", range(1, 7))
    def test_rank_deficient(self, d):
        """Test the constructed keys are rank deficient."""
        arr = construct_bad_arrangement(d)

        m = incidence_matrix(DerivationSpec.curve(2, d), arr.keys)

        assert m.xor_rows(range(m.n_rows)) == 0
        assert is_independent_set(DerivationSpec.curve(2, d), arr.keys).independent is False


class TestKMaxWindow:
    """Bounded k_max sits exactly between the two bounds."""

    def test_curve2_2(self):
        """Test k_max of the (2,2)-curve."""
        assert k_max_bounded(DerivationSpec.curve(2, 2), 3, 4, slope_pruning=False) == 3

    @pytest.mark.slow
    def test_curve2_3_six_keys(self):
        """A 6-key bad arrangement already fits in [6]^2, below the 8 keys of the construction."""
        assert k_max_bounded(DerivationSpec.curve(2, 3), 6, 6) == 5

    def test_known_six_key_arrangement(self):
        """Test a known six-key arrangement is dependent."""
        keys = [(0, 4), (2, 1), (4, 1), (0, 3), (4, 0), (2, 3)]

        assert is_independent_set(DerivationSpec.curve(2, 3), keys).independent is False


class TestRankOracleEquivalence:
    """Exact uniformity under fully random tables coincides with full rank."""

    FAMILIES = [
        (DerivationSpec.curve(2, 2), 3),
        (DerivationSpec.curve(2, 3), 3),
        (DerivationSpec.tz(2, 3, 2), 4),
        (DerivationSpec.tz(2, 4, 2), 4),
        (DerivationSpec.tz5(), 4),
        (DerivationSpec.identity(2), 4),
    ]

    def test_randomized_instances(self):
        """Test the rank test agrees with exact enumeration."""
        rng = seeded_rng(2024, 0)
        instances = 0
        while instances < 120:
            spec, n = self.FAMILIES[int(rng.integers(len(self.FAMILIES)))]
            universe = universe_keys(spec, n)
            k = int(rng.integers(1, 5))
            keys = [universe[i] for i in rng.choice(len(universe), size=k, replace=False)]
            if incidence_matrix(spec, keys).n_cols > 20:
                continue
            instances += 1

            verdict = is_independent_set(spec, keys)
            dist = exact_joint_distribution(spec, keys, 1)

            assert sum(dist.values()) == 1
            assert is_uniform(dist, k, 1) == verdict.independent
            if not verdict.independent:
                positions = [keys.index(key) for key in verdict.witness]
                for outcome in dist:
                    assert sum(outcome[j] for j in positions) % 2 == 0

    def test_dependent_rectangle_probability(self):
        """Test the rectangle's zero XOR has probability one."""
        keys = [(0, 0), (0, 1), (1, 0), (1, 1)]

        dist = exact_joint_distribution(DerivationSpec.identity(2), keys, 1)

        assert all(p == Fraction(1, 8) for p in dist.values())


class TestOddEven:
    """Zero-sum key sets always have even size."""

    def test_random_derivation_tables(self):
        """Test the smallest dependent set is even."""
        rng = seeded_rng(7, 0)
        for _ in range(1000):
            spec = random_explicit(rng, int(rng.integers(2, 7)), int(rng.integers(1, 4)), 3)
            size = smallest_dependent_size(spec)
            assert size is None or size % 2 == 0

    def test_searches_return_no_odd_witness(self):
        """Test searches never return an odd witness."""
        rng = seeded_rng(8, 0)
        for _ in range(200):
            spec = random_explicit(rng, 7, 2, 3)
            for k in (3, 5, 7):
                assert find_bad_arrangement(spec, 0, k) is None


class TestPeeling:
    """Peelable key sets are independent, and the converse fails."""

    def test_peelable_implies_independent(self):
        """Test peelable sets are independent."""
        rng = seeded_rng(11, 0)
        peelable = 0
        for _ in range(1000):
            spec = random_explicit(rng, int(rng.integers(1, 8)), int(rng.integers(1, 5)), 3)
            keys = universe_keys(spec, 0)
            if is_peelable(spec, keys):
                peelable += 1
                assert is_independent_set(spec, keys).independent
        assert peelable > 0

    def test_independent_but_not_peelable(self):
        """Test an independent set that cannot be peeled."""
        spec = DerivationSpec.explicit({
            (0,): (0, 0, 1, 0),
            (1,): (0, 1, 0, 0),
            (2,): (0, 1, 1, 1),
            (3,): (1, 0, 0, 1),
            (4,): (1, 0, 1, 1),
        })
        keys = universe_keys(spec, 0)

        assert not is_peelable(spec, keys)
        assert is_independent_set(spec, keys).independent


class TestThorupZhang:
    """Every small key set of the linear scheme over GF(4) is independent."""

    def test_tz_gf4_four_wise(self):
        """Test GF(4) Thorup-Zhang is 4-wise independent."""
        spec = DerivationSpec.tz(2, 4, 2)
        universe = universe_keys(spec, 4)

        for size in range(1, 5):
            for keys in itertools.combinations(universe, size):
                assert is_independent_set(spec, keys).independent, keys

    def test_tz5_five_wise(self):
        """Test tz5 is 5-wise independent on [4]^2."""
        spec = DerivationSpec.tz5()
        universe = universe_keys(spec, 4)

        for size in range(1, 6):
            for keys in itertools.combinations(universe, size):
                assert is_independent_set(spec, keys).independent, keys


class TestHigherDegreeCurves:
    """Degree-2 key curves with d = 7 are 4-independent on [3]^3."""

    def test_q3_d7(self):
        """Test k_max of the (3,7)-curve over [3]^3."""
        spec = DerivationSpec.curve(3, 7)

        assert k_max_bounded(spec, 3, 4, slope_pruning=False) == 4


class TestSampledDistribution:
    """Sampled joint frequencies of the worked example stay near uniform."""

    def test_within_five_sigma(self):
        """Test sampled cell frequencies stay within five sigma."""
        samples = 10 ** 6
        counts = sample_joint_distribution(WORKED, [(0,), (1,), (2,)], 2, samples, seed=5)

        p = 4 ** -3
        sigma = math.sqrt(p * (1 - p) / samples)
        assert len(counts) == 64
        for count in counts.values():
            assert abs(count / samples - p) <= 5 * sigma

    @pytest.mark.parametrize("samples", [20_000, pytest.param(10 ** 6, marks=pytest.mark.slow)])
    def test_hashing_path_within_five_sigma(self, samples):
        """Test freshly filled tables hash the worked keys to near-uniform 2-bit triples."""
        keys = np.array([[0], [1], [2]])
        sizes = table_index_bounds(WORKED, 0)
        counts = Counter()
        for seed in range(samples):
            h = Hasher(WORKED, fill_tables_random(seed, sizes, 2))
            counts[tuple(h.hash_many(keys).tolist())] += 1

        p = 4 ** -3
        sigma = math.sqrt(p * (1 - p) / samples)
        assert len(counts) == 64
        assert all(0 <= v < 4 for outcome in counts for v in outcome)
        for count in counts.values():
            assert abs(count / samples - p) <= 5 * sigma


class TestBenchProtocol:
    """The benchmark performs exactly the configured work."""

    def test_instrumented_counts(self):
        """Test instrumented counts match the configured work."""
        cfg = BenchConfig(trials=2, keys_per_trial=300, passes=3, families=["curve2_4", "tz2_6", "tz4_16"],
                          instrument=True)

        report = run_benchmark(cfg)

        assert [row.measured_lookups for row in report.rows] == [4, 6, 16]
        assert all(row.evaluations == 2 * 3 * 300 for row in report.rows)
        assert len(report_csv(report).splitlines()) == 1 + 3
        assert all(row.sd_ns >= 0 and len(row.trial_ns) == 2 for row in report.rows)
