from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clingerlab.radix import (
    BestApprox, ConversionInput, DigitString, LanguageKind, LanguageSpec, LogKind,
    MalformedPatternError, Order, Radix, Tie, best_approx, clinger_inequality,
    is_commensurable, language_member, repeat_digit, value_lsd, value_msd,
)
from oracles import brute_force_best, brute_force_candidates, commensurable_by_signature

LSD, MSD = Order.LSD_FIRST, Order.MSD_FIRST


def ba(f, e, D, d, n):
    return best_approx(ConversionInput(f, e, Radix(D)), Radix(d), n)


class TestDigitStrings:
    @pytest.mark.parametrize("text,base,expected", [("1", 10, 1), ("321", 10, 123), ("1000", 2, 1)])
    def test_value_lsd(self, text, base, expected):
        assert value_lsd(DigitString.parse(text, base, LSD)) == expected

    @pytest.mark.parametrize("text,base,expected", [("1000", 2, 8), ("321", 10, 321), ("", 10, 0)])
    def test_value_msd(self, text, base, expected):
        assert value_msd(DigitString.parse(text, base, MSD)) == expected

    def test_order_mismatch_rejected(self):
        with pytest.raises(ValueError):
            value_lsd(DigitString.parse("12", 10, MSD))
        with pytest.raises(ValueError):
            value_msd(DigitString.parse("12", 10, LSD))

    def test_repeat_digit(self):
        assert str(repeat_digit(0, 3, 10)) == "000"
        assert str(repeat_digit(1, 0, 2)) == ""
        assert str(repeat_digit(7, 2, 10)) == "77"
        with pytest.raises(ValueError):
            repeat_digit(10, 2, 10)

    def test_digit_range_and_radix_checked(self):
        with pytest.raises(ValueError):
            DigitString((2,), Radix(2))
        with pytest.raises(ValueError):
            Radix(1)

    def test_leading_zeros_kept(self):
        z = DigitString.parse("007", 10)
        assert len(z) == 3 and z.value == 7

    @given(st.integers(2, 16).flatmap(lambda b: st.tuples(st.just(b), st.lists(st.integers(0, b - 1), max_size=30))))
    def test_reversal_duality(self, case):
        b, digits = case
        z = DigitString(tuple(digits), Radix(b), LSD)
        assert value_lsd(z) == value_msd(z.reversed())

    @given(st.integers(0, 10**12), st.sampled_from([2, 3, 10, 16]))
    def test_of_int_round_trip(self, value, base):
        assert value_msd(DigitString.of_int(value, base)) == value
        assert value_lsd(DigitString.of_int(value, base, LSD)) == value


class TestCommensurability:
    def test_examples(self):
        w = is_commensurable(Radix(2), Radix(8))
        assert w and (w.p, w.q) == (3, 1)
        w = is_commensurable(Radix(4), Radix(8))
        assert w and (w.p, w.q) == (3, 2) and 4**3 == 8**2
        assert not is_commensurable(Radix(10), Radix(2))

    @given(st.integers(2, 400), st.integers(2, 400))
    def test_matches_prime_signature(self, d, D):
        wit = is_commensurable(d, D)
        ref = commensurable_by_signature(d, D)
        assert bool(wit) == (ref is not None)
        if ref is not None:
            assert (wit.p, wit.q) == ref
            assert d**wit.p == D**wit.q

    @given(st.integers(2, 7), st.integers(1, 5), st.integers(1, 5))
    def test_powers_of_common_root(self, root, a, b):
        wit = is_commensurable(root**a, root**b)
        assert wit and (root**a) ** wit.p == (root**b) ** wit.q


class TestBestApprox:
    def test_examples(self):
        r = ba(1, 0, 2, 10, 1)
        assert (r.m, r.q) == (1, 0)
        r = ba(1, 10, 2, 10, 1)
        assert (r.m, r.q) == (1, 3)
        r = ba(1, 1, 10, 2, 2)
        assert (r.m, r.q, r.tie) == (2, 2, Tie.HALF_RESOLVED_TO_EVEN)
        r = ba(97, -2, 10, 10, 1)
        assert (r.m, r.q, r.eps) == (1, 0, Fraction(-3, 100))

    def test_boundary_rule_rejects_large_negative_error(self):
        # 0.94 = (1 - 0.06) * 1 is not allowed (-0.06 < -1/20), so 9 * 10^-1 wins
        r = ba(94, -2, 10, 10, 1)
        assert (r.m, r.q) == (9, -1)

    def test_exact_value_and_eps_identity(self):
        r = ba(7, -3, 3, 2, 3)
        assert (r.m + r.eps) * Fraction(2) ** r.q == Fraction(7, 27)
        assert abs(r.eps) <= Fraction(1, 2)

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            ConversionInput(0, 1, Radix(2))
        with pytest.raises(ValueError):
            ba(1, 1, 2, 10, 0)

    def test_dict_round_trip(self):
        r = ba(1, 1, 10, 2, 2)
        assert BestApprox.from_dict(r.to_dict()) == r

    @settings(max_examples=300)
    @given(st.integers(1, 10**6), st.integers(-40, 40), st.sampled_from([2, 3, 5, 10, 16]),
           st.sampled_from([2, 3, 7, 10, 16]), st.integers(1, 5))
    def test_matches_brute_force(self, f, e, D, d, n):
        r = ba(f, e, D, d, n)
        assert (r.m, r.q, r.tie is Tie.HALF_RESOLVED_TO_EVEN) == brute_force_best(f, e, D, d, n)

    @settings(max_examples=300)
    @given(st.integers(1, 100), st.integers(-20, 20), st.sampled_from([2, 3, 10, 16]),
           st.sampled_from([2, 3, 10, 16]), st.integers(1, 4))
    def test_uniqueness_of_candidates(self, f, e, D, d, n):
        r = Fraction(f) * Fraction(D) ** e
        cands = brute_force_candidates(f, e, D, d, n)
        dist = sorted(abs(r - m * Fraction(d) ** q) for m, q, _ in cands)
        # one nearest candidate, or exactly two equally near ones
        assert len(dist) >= 1
        if len(dist) > 1 and dist[0] == dist[1]:
            assert len(dist) == 2 or dist[1] < dist[2]
            assert ba(f, e, D, d, n).tie is Tie.HALF_RESOLVED_TO_EVEN

    @given(st.integers(1, 1000), st.integers(-30, 30), st.sampled_from([2, 3, 10, 16]),
           st.sampled_from([2, 3, 10, 16]), st.integers(1, 4))
    def test_scaling_invariance(self, f, e, D, d, n):
        assert ba(f, e, D, d, n) == ba(f * D, e - 1, D, d, n)

    @pytest.mark.parametrize("n", range(3, 8))
    @pytest.mark.parametrize("e", range(1, 11))
    def test_commensurable_powers_are_exact(self, e, n):
        assert ba(1, e, 8, 2, n).eps == 0


class TestLanguages:
    def test_examples(self):
        spec = LanguageSpec(LanguageKind.L, 10, 2, 10, 1, 1)
        assert language_member(DigitString.parse("01", 10, LSD), spec)
        p2 = LanguageSpec(LanguageKind.P, 10, 2, 10, 1, 2)
        assert language_member(DigitString.parse("1", 10), p2)
        assert not language_member(DigitString.parse("10", 10), p2)

    def test_malformed_pattern_raises(self):
        p2 = LanguageSpec(LanguageKind.P, 10, 2, 10, 1, 2)
        with pytest.raises(MalformedPatternError):
            language_member(DigitString.parse("11", 10), p2)

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            LanguageSpec(LanguageKind.P, 10, 2, 10, 1, 10)
        with pytest.raises(ValueError):
            LanguageSpec(LanguageKind.P, 10, 10, 2, 1, 1)
        with pytest.raises(ValueError):
            LanguageSpec(LanguageKind.L, 10, 2, 10, 2, 1)

    def test_m_reads_most_significant_first(self):
        spec = LanguageSpec(LanguageKind.M, 10, 2, 10, 1, 1)
        # "10" read MSD-first is 10, 2^10 = 1024
        assert language_member(DigitString.parse("10", 10), spec)
        # read LSD-first "10" is 1, 2^1 = 2: belongs to L_2 instead
        assert language_member(DigitString.parse("10", 10), LanguageSpec(LanguageKind.L, 10, 2, 10, 1, 2))

    @pytest.mark.parametrize("b,D,d,n", [(2, 2, 10, 1), (10, 2, 3, 1), (3, 2, 10, 2), (10, 3, 2, 2)])
    def test_p_partition(self, b, D, d, n):
        for p in range(0, 6):
            z = DigitString((1,) + (0,) * p, Radix(b))
            hits = [m for m in range(d ** (n - 1), d**n)
                    if language_member(z, LanguageSpec(LanguageKind.P, b, D, d, n, m))]
            assert len(hits) == 1

    @given(st.lists(st.integers(0, 9), max_size=4), st.sampled_from([LanguageKind.L, LanguageKind.M]),
           st.sampled_from([(10, 2), (3, 2)]))
    def test_lm_partition(self, digits, kind, Dd):
        D, d = Dd
        z = DigitString(tuple(digits), Radix(10))
        n = 2 if d == 2 else 1
        targets = range(0, 2) if d == 2 else range(1, d)
        hits = [t for t in targets if language_member(z, LanguageSpec(kind, 10, D, d, n, t))]
        assert len(hits) == 1


class TestClingerInequality:
    @pytest.mark.parametrize("b,d,n,expected", [(10, 2, 5, True), (10, 2, 1, False), (2, 10, 1, True)])
    def test_natural_log_examples(self, b, d, n, expected):
        assert clinger_inequality(b, d, n) is expected

    def test_other_log_bases(self):
        # log_10 10 = 1 exactly: 4 < 2
        assert clinger_inequality(2, 10, 1, LogKind.BASE_10) is False
        # log_2 4 = 2 exactly: 4 < 2*4*2 = 16
        assert clinger_inequality(2, 4, 2, LogKind.BASE_B) is True
        # base 10, 2^n precision: 100/9 < 2 * 2^(n-1) * 0.30103 first holds for n = 6
        assert [clinger_inequality(10, 2, n, LogKind.BASE_10) for n in (5, 6)] == [False, True]

    def test_precision_ceiling_failure(self):
        with pytest.raises(ArithmeticError):
            clinger_inequality(10, 2, 1, ceiling=8)
