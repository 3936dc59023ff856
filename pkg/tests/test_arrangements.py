"""Tests for bad arrangements and the doubling construction."""
import io

import pytest
from hypothesis import given, settings, strategies as st

from tabhash.arrangements import (
    MAX_CONSTRUCTION_D, Arrangement, add_polynomial, bad_columns, construct_bad_arrangement, curve_value,
    double_arrangement, doubling_polynomial, format_arrangement, is_bad_column, normalize_nonneg, parse_arrangement,
    read_arrangement, verify_bad, write_arrangement,
)
from tabhash.derivation import DerivationSpec
from tabhash.exceptions import (
    ArrangementError, ArrangementFormatError, DerivationOverflowError, DisjointnessError, DuplicateKeyError,
)
from tabhash.independence import is_independent_set

SQUARE = Arrangement(2, 2, ((0, 1), (0, 2), (1, 0), (1, 1)))


class TestArrangement:
    """Test the Arrangement type."""

    def test_properties(self):
        """Test derived arrangement properties."""
        assert SQUARE.k == 4
        assert SQUARE.max_character == 2
        assert SQUARE.min_character == 0
        assert SQUARE.verified is False

    def test_keys_normalized_to_tuples(self):
        """Test keys are stored as tuples."""
        arr = Arrangement(2, 1, [[0, 0], [0, 1]])

        assert arr.keys == ((0, 0), (0, 1))

    def test_wrong_arity(self):
        """Test keys of the wrong arity are rejected."""
        with pytest.raises(ArrangementError, match="expected 2"):
            Arrangement(2, 1, ((0, 0), (1, 2, 3)))

    def test_duplicates(self):
        """Test duplicate keys are rejected."""
        with pytest.raises(DuplicateKeyError):
            Arrangement(2, 1, ((0, 0), (0, 0)))


class TestBadness:
    """Test column badness checks."""

    def test_curve_value(self):
        """Test curve evaluation."""
        assert curve_value((1, 2, 3), 2) == 17
        assert curve_value((4, -1), 3) == 1

    def test_curve_value_overflow(self):
        """Test curve evaluation past 64 bits raises."""
        with pytest.raises(DerivationOverflowError):
            curve_value((0, 2 ** 62), 5)

    def test_square_is_bad(self):
        """Test the four-key square is bad on both columns."""
        assert verify_bad(SQUARE)
        assert bad_columns(SQUARE) == [0, 1]
        assert bad_columns(SQUARE, 3) == [0, 1]

    def test_single_column(self):
        """Test one column check."""
        assert is_bad_column([(0, 5), (0, 7)], 0)
        assert not is_bad_column([(0, 5), (0, 7)], 1)

    def test_empty_is_bad(self):
        """Test the empty arrangement is bad."""
        assert verify_bad(Arrangement(2, 4, ()))

    def test_badness_matches_rank_test(self):
        """A bad (2,d)-arrangement is a dependent key set of the (2,d)-curve family."""
        assert is_independent_set(DerivationSpec.curve(2, 2), SQUARE.keys).independent is False
        assert is_independent_set(DerivationSpec.curve(2, 3), SQUARE.keys).independent is True


class TestAddPolynomial:
    """Test shifting every curve by a fixed polynomial."""

    def test_shift_preserves_badness(self):
        """Test a fixed shift keeps the square bad."""
        shifted = add_polynomial(SQUARE, (10, -3))

        assert shifted.keys == ((10, -2), (10, -1), (11, -3), (11, -2))
        assert verify_bad(shifted)

    @settings(max_examples=150)
    @given(st.integers(1, 4), st.lists(st.integers(-10 ** 4, 10 ** 4), max_size=2))
    def test_random_shift_preserves_constructed_badness(self, d, coefficients):
        """Test any degree < q shift keeps a constructed arrangement bad."""
        arr = construct_bad_arrangement(d)

        shifted = add_polynomial(arr, coefficients)

        assert verify_bad(shifted)
        assert bad_columns(shifted, d + 3) == bad_columns(arr, d + 3)

    @settings(max_examples=150)
    @given(
        st.sets(st.tuples(st.integers(-20, 20), st.integers(-20, 20)), min_size=1, max_size=8),
        st.lists(st.integers(-10 ** 4, 10 ** 4), max_size=2),
    )
    def test_random_shift_preserves_bad_column_set(self, keys, coefficients):
        """Test the set of bad columns of any arrangement survives a shift."""
        arr = Arrangement(2, 4, tuple(sorted(keys)))

        assert bad_columns(add_polynomial(arr, coefficients), 6) == bad_columns(arr, 6)

    def test_verified_flag_recomputed(self):
        """Test the verified flag is recomputed after a shift."""
        verified = Arrangement(2, 2, SQUARE.keys, verified=True)

        assert add_polynomial(verified, (1,)).verified is True
        assert add_polynomial(SQUARE, (1,)).verified is False

    def test_rejects_high_degree(self):
        """Test shifts of degree q or more are rejected."""
        with pytest.raises(ArrangementError):
            add_polynomial(SQUARE, (1, 2, 3))


class TestDoubling:
    """Test the doubling step."""

    def test_doubling_polynomial(self):
        """Test doubling polynomial coefficients."""
        assert doubling_polynomial(2, 3, 4) == (12, -4)
        # 1 * (2 - z)(3 - z) = 6 - 5z + z^2
        assert doubling_polynomial(3, 2, 1) == (6, -5, 1)

    def test_doubling_polynomial_vanishes_on_new_columns(self):
        """Test the doubling polynomial vanishes on the new columns."""
        coefficients = doubling_polynomial(3, 4, 7)

        assert curve_value(coefficients, 4) == 0
        assert curve_value(coefficients, 5) == 0
        assert curve_value(coefficients, 3) != 0

    def test_double_square(self):
        """Test doubling the square gives a bad eight-key arrangement."""
        doubled = double_arrangement(SQUARE)

        assert doubled.d == 3
        assert doubled.k == 8
        assert doubled.verified
        assert verify_bad(doubled)

    def test_double_q3(self):
        """Test doubling with three-character keys."""
        arr = Arrangement(3, 1, ((0, 0, 0), (0, 1, 0)))

        doubled = double_arrangement(arr)

        assert doubled.d == 3
        assert verify_bad(doubled)

    def test_double_empty(self):
        """Test doubling the empty arrangement."""
        doubled = double_arrangement(Arrangement(2, 5, ()))

        assert doubled.d == 6
        assert doubled.k == 0
        assert doubled.verified

    def test_rejects_non_bad_input(self):
        """Test doubling requires a bad input."""
        with pytest.raises(ArrangementError, match="not bad"):
            double_arrangement(Arrangement(2, 2, ((0, 0), (1, 1))))

    def test_explicit_scale_overlap(self):
        """Test a zero shift scale makes the halves overlap."""
        with pytest.raises(DisjointnessError):
            double_arrangement(Arrangement(2, 1, ((0, 0), (0, 1))), shift_scale=0)

    def test_normalize(self):
        """Test normalization gives non-negative characters."""
        normalized = normalize_nonneg(double_arrangement(SQUARE))

        assert normalized.min_character >= 0
        assert min(key[1] for key in normalized.keys) == 0
        assert normalized.verified

    def test_normalize_requires_q2(self):
        """Test normalization needs two-character keys."""
        with pytest.raises(ArrangementError):
            normalize_nonneg(Arrangement(3, 1, ((0, 0, 0), (0, 1, 0))))


class TestConstruction:
    """Test the recursive (2,d,2^d) construction."""

    @pytest.mark.parametrize("d", range(1, 8))
    def test_bad_with_2_to_d_keys(self, d):
        """Test the construction gives 2^d bad keys."""
        arr = construct_bad_arrangement(d)

        assert arr.q == 2
        assert arr.d == d
        assert arr.k == 2 ** d
        assert arr.verified
        assert verify_bad(arr)
        assert arr.min_character >= 0

    @pytest.mark.parametrize("d", range(3, 9))
    def test_character_bound(self, d):
        """Test constructed characters stay within the bound."""
        assert construct_bad_arrangement(d).max_character <= 2 ** (d - 1) * (d - 2) + 1

    def test_keys_sorted(self):
        """Test constructed keys are sorted."""
        arr = construct_bad_arrangement(5)

        assert list(arr.keys) == sorted(arr.keys)

    def test_dependent_under_curve_family(self):
        """Test the construction is dependent under the curve family."""
        arr = construct_bad_arrangement(4)

        verdict = is_independent_set(DerivationSpec.curve(2, 4), arr.keys)

        assert verdict.independent is False

    def test_out_of_range(self):
        """Test d outside the supported range is rejected."""
        with pytest.raises(ArrangementError):
            construct_bad_arrangement(0)
        with pytest.raises(ArrangementError):
            construct_bad_arrangement(MAX_CONSTRUCTION_D + 1)


class TestTextFormat:
    """Test reading and writing arrangement files."""

    def test_format(self):
        """Test the text rendering."""
        text = format_arrangement(SQUARE, comment="square")

        assert text == "# square\n2 2 4\n0 1\n0 2\n1 0\n1 1\n"

    def test_parse_round_trip(self):
        """Test rendered text parses back."""
        assert parse_arrangement(format_arrangement(SQUARE, "x\ny")).keys == SQUARE.keys

    def test_parse_comments_and_blank_lines(self):
        """Test comments and blank lines are skipped."""
        arr = parse_arrangement("# header\n\n2 1 2  # q d k\n0 0\n\n0 1 # second\n")

        assert arr.keys == ((0, 0), (0, 1))
        assert arr.d == 1

    @pytest.mark.parametrize("text,message", [
        ("", "header"),
        ("2 two 4\n", "header"),
        ("2 2 3\n0 1\n0 2\n", "declares 3"),
        ("2 2 1\n0 1 2\n", "expected 2"),
        ("2 2 1\n0 x\n", "non-integer"),
        ("2 2 2\n0 1\n0 1\n", "distinct"),
    ])
    def test_parse_errors(self, text, message):
        """Test malformed text raises with a message."""
        with pytest.raises(ArrangementFormatError, match=message):
            parse_arrangement(text)

    def test_file_round_trip(self, tmp_path):
        """Test writing and reading a file."""
        path = tmp_path / "arr.txt"
        arr = construct_bad_arrangement(3)

        write_arrangement(arr, path, comment="d=3")

        assert read_arrangement(path).keys == arr.keys

    def test_missing_file(self, tmp_path):
        """Test a missing file raises."""
        with pytest.raises(ArrangementFormatError, match="cannot read"):
            read_arrangement(tmp_path / "missing.txt")

    def test_stdin_and_stdout(self, monkeypatch, capsys):
        """Test the - path uses standard streams."""
        monkeypatch.setattr("sys.stdin", io.StringIO("2 1 2\n0 0\n0 1\n"))

        arr = read_arrangement("-")
        write_arrangement(arr, "-")

        assert capsys.readouterr().out == "2 1 2\n0 0\n0 1\n"
