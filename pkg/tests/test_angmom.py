import math
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given
from hypothesis import strategies as st
from sympy import Rational, S
from sympy.physics.wigner import clebsch_gordan as sym_cg
from sympy.physics.wigner import wigner_3j as sym_3j
from sympy.physics.wigner import wigner_6j as sym_6j

from hfdecoherence.angmom import HalfInt, clebsch_gordan, wigner3j, wigner6j

TWICE_MAX = 8  # j <= 4


def half(t):
    return Fraction(t, 2)


def sym(t):
    return Rational(t, 2)


def ms(tj):
    return range(-tj, tj + 1, 2)


def racah_3j_exact(j1, j2, j3, m1, m2, m3):
    """Squared 3-j symbol with its sign, exact, by the Racah sum over Fractions."""
    if m1 + m2 + m3 != 0 or not abs(j1 - j2) <= j3 <= j1 + j2:
        return Fraction(0), 1
    f = math.factorial
    ints = lambda x: int(x)
    tri = Fraction(f(ints(j1 + j2 - j3)) * f(ints(j1 - j2 + j3)) * f(ints(-j1 + j2 + j3)), f(ints(j1 + j2 + j3 + 1)))
    pre = tri * f(ints(j1 + m1)) * f(ints(j1 - m1)) * f(ints(j2 + m2)) * f(ints(j2 - m2)) * f(ints(j3 + m3)) * f(ints(j3 - m3))
    total = Fraction(0)
    for k in range(0, ints(j1 + j2 - j3) + 1):
        dens = [k, j1 + j2 - j3 - k, j1 - m1 - k, j2 + m2 - k, j3 - j2 + m1 + k, j3 - j1 - m2 + k]
        if any(d < 0 for d in dens):
            continue
        term = Fraction(1)
        for d in dens:
            term /= f(ints(d))
        total += (-1) ** k * term
    sign = (-1) ** ints(j1 - j2 - m3)
    value_sign = 1 if sign * total >= 0 else -1
    return pre * total * total, value_sign


class TestHalfInt:
    def test_stores_doubled_value(self):
        assert HalfInt.of(Fraction(3, 2)).twice_value == 3
        assert HalfInt.of(2).twice_value == 4
        assert HalfInt.of(0.5) == HalfInt(1)

    def test_rejects_non_half_integers(self):
        with pytest.raises(ValueError):
            HalfInt.of(0.3)
        with pytest.raises(TypeError):
            HalfInt.of(True)

    def test_arithmetic(self):
        assert HalfInt(3) + HalfInt(1) == HalfInt(4)
        assert HalfInt(3) - 1 == HalfInt(1)
        assert -HalfInt(3) == HalfInt(-3)


class TestWigner3j:
    def test_all_integer_odd_sum_vanishes(self):
        assert wigner3j(1, 1, 1, 0, 0, 0) == 0.0

    def test_frozen_value(self):
        assert wigner3j(1, 1, 0, 0, 0, 0) == pytest.approx(-1 / math.sqrt(3), rel=1e-15)

    def test_m_sum_selection_is_exact_zero(self):
        assert wigner3j(1, 1, 1, 1, 0, 0) == 0.0

    def test_triangle_failure_is_exact_zero(self):
        assert wigner3j(1, 1, 3, 0, 0, 0) == 0.0

    def test_parity_mismatch_rejected(self):
        with pytest.raises(ValueError):
            wigner3j(1, 1, 1, 0.5, -0.5, 0)

    def test_exact_racah_oracle(self):
        for tj1, tj2, tj3 in product(range(0, 7), repeat=3):
            if (tj1 + tj2 + tj3) % 2:
                continue
            for tm1, tm2 in product(ms(tj1), ms(tj2)):
                tm3 = -tm1 - tm2
                if abs(tm3) > tj3:
                    continue
                sq, sign = racah_3j_exact(half(tj1), half(tj2), half(tj3), half(tm1), half(tm2), half(tm3))
                got = wigner3j(half(tj1), half(tj2), half(tj3), half(tm1), half(tm2), half(tm3))
                assert got == pytest.approx(sign * math.sqrt(sq), abs=1e-13)

    @given(st.integers(0, TWICE_MAX), st.integers(0, TWICE_MAX), st.integers(0, TWICE_MAX), st.data())
    def test_matches_sympy(self, tj1, tj2, tj3, data):
        if (tj1 + tj2 + tj3) % 2:
            return
        tm1 = data.draw(st.sampled_from(list(ms(tj1))))
        tm2 = data.draw(st.sampled_from(list(ms(tj2))))
        tm3 = -tm1 - tm2
        if abs(tm3) > tj3:
            return
        ref = float(sym_3j(sym(tj1), sym(tj2), sym(tj3), sym(tm1), sym(tm2), sym(tm3)))
        got = wigner3j(half(tj1), half(tj2), half(tj3), half(tm1), half(tm2), half(tm3))
        assert got == pytest.approx(ref, abs=1e-13)

    @given(st.integers(0, TWICE_MAX), st.integers(0, TWICE_MAX), st.integers(0, TWICE_MAX), st.data())
    def test_column_permutation_symmetry(self, tj1, tj2, tj3, data):
        if (tj1 + tj2 + tj3) % 2:
            return
        tm1 = data.draw(st.sampled_from(list(ms(tj1))))
        tm2 = data.draw(st.sampled_from(list(ms(tj2))))
        tm3 = -tm1 - tm2
        if abs(tm3) > tj3:
            return
        j = [half(tj1), half(tj2), half(tj3)]
        m = [half(tm1), half(tm2), half(tm3)]
        base = wigner3j(*j, *m)
        assert wigner3j(j[1], j[2], j[0], m[1], m[2], m[0]) == pytest.approx(base, abs=1e-14)
        assert wigner3j(j[2], j[0], j[1], m[2], m[0], m[1]) == pytest.approx(base, abs=1e-14)
        odd = (-1) ** int(sum(j))
        assert wigner3j(j[1], j[0], j[2], m[1], m[0], m[2]) == pytest.approx(odd * base, abs=1e-14)
        assert wigner3j(*j, *(-x for x in m)) == pytest.approx(odd * base, abs=1e-14)

    def test_orthogonality(self):
        for tj1, tj2 in product(range(0, TWICE_MAX + 1), repeat=2):
            for tj3 in range(abs(tj1 - tj2), tj1 + tj2 + 1, 2):
                if tj3 > TWICE_MAX:
                    continue
                for tm3 in ms(tj3):
                    total = math.fsum(
                        (tj3 + 1) * wigner3j(half(tj1), half(tj2), half(tj3), half(tm1), half(-tm1 - tm3), half(tm3)) ** 2
                        for tm1 in ms(tj1) if abs(-tm1 - tm3) <= tj2
                    )
                    assert total == pytest.approx(1.0, abs=1e-12)


class TestWigner6j:
    def test_frozen_value(self):
        assert wigner6j(1, 1, 0, 1, 1, 0) == pytest.approx(1 / 3, rel=1e-15)

    def test_triangle_failure_is_exact_zero(self):
        assert wigner6j(1, 1, 3, 1, 1, 1) == 0.0

    @given(st.integers(0, 8), st.integers(0, 8))
    def test_zero_argument_closed_form(self, ta, tb):
        # {a b c; 0 c b} = (-1)^(a+b+c) / sqrt((2b+1)(2c+1))
        for tc in range(abs(ta - tb), ta + tb + 1, 2):
            got = wigner6j(half(ta), half(tb), half(tc), 0, half(tc), half(tb))
            ref = (-1) ** ((ta + tb + tc) // 2) / math.sqrt((tb + 1) * (tc + 1))
            assert got == pytest.approx(ref, abs=1e-14)

    @given(st.tuples(*[st.integers(0, 6) for _ in range(6)]))
    def test_matches_sympy(self, t):
        ref = float(sym_6j(*[sym(x) for x in t])) if all(
            (a + b + c) % 2 == 0 for a, b, c in ((t[0], t[1], t[2]), (t[0], t[4], t[5]), (t[3], t[1], t[5]), (t[3], t[4], t[2]))
        ) else 0.0
        assert wigner6j(*[half(x) for x in t]) == pytest.approx(ref, abs=1e-13)


class TestClebschGordan:
    def test_frozen_value(self):
        assert clebsch_gordan(1, 1, 1, -1, 0, 0) == pytest.approx(1 / math.sqrt(3), rel=1e-15)

    def test_m_mismatch_is_exact_zero(self):
        assert clebsch_gordan(1, 1, 1, 0, 2, 2) == 0.0

    @given(st.integers(0, 8), st.integers(0, 8))
    def test_stretched_is_one(self, ta, tb):
        assert clebsch_gordan(half(ta), half(ta), half(tb), half(tb), half(ta + tb), half(ta + tb)) == pytest.approx(1.0, abs=1e-14)

    @given(st.integers(0, TWICE_MAX), st.integers(0, TWICE_MAX), st.data())
    def test_condon_shortley_matches_sympy(self, tj1, tj2, data):
        tJ = data.draw(st.sampled_from(list(range(abs(tj1 - tj2), tj1 + tj2 + 1, 2))))
        tm1 = data.draw(st.sampled_from(list(ms(tj1))))
        tm2 = data.draw(st.sampled_from(list(ms(tj2))))
        tM = tm1 + tm2
        if abs(tM) > tJ:
            return
        ref = float(sym_cg(sym(tj1), sym(tj2), sym(tJ), sym(tm1), sym(tm2), sym(tM)))
        got = clebsch_gordan(half(tj1), half(tm1), half(tj2), half(tm2), half(tJ), half(tM))
        assert got == pytest.approx(ref, abs=1e-13)

    @given(st.integers(0, TWICE_MAX), st.integers(0, TWICE_MAX), st.data())
    def test_consistent_with_3j(self, tj1, tj2, data):
        tJ = data.draw(st.sampled_from(list(range(abs(tj1 - tj2), tj1 + tj2 + 1, 2))))
        tm1 = data.draw(st.sampled_from(list(ms(tj1))))
        tm2 = data.draw(st.sampled_from(list(ms(tj2))))
        tM = tm1 + tm2
        if abs(tM) > tJ:
            return
        via3j = (-1) ** ((tj1 - tj2 + tM) // 2) * math.sqrt(tJ + 1) * wigner3j(
            half(tj1), half(tj2), half(tJ), half(tm1), half(tm2), half(-tM))
        got = clebsch_gordan(half(tj1), half(tm1), half(tj2), half(tm2), half(tJ), half(tM))
        assert got == pytest.approx(via3j, rel=1e-12, abs=1e-15)
