import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nilseqlab.exactnum import (
    IntMatrix,
    PhasePolynomial,
    PhaseScalar,
    parse_phase,
)
from nilseqlab.nilseq import Tag, e_phase
from nilseqlab.torus import (
    Character,
    MismatchAt,
    TorusPoint,
    character_seq,
    orbit_point,
    verify_polynomial_form,
    weyl_test,
)

SHEAR = IntMatrix.from_rows([[1, 1], [0, 1]])
ROTATION = IntMatrix.from_rows([[0, -1], [1, 0]])
FIB_SQ = IntMatrix.from_rows([[2, 1], [1, 1]])


def point(*specs):
    return TorusPoint.make(tuple(parse_phase(s) for s in specs))


# ------------------------------------------------------------------- orbits

@given(st.integers(min_value=-40, max_value=40))
def test_shear_orbit_closed_form(n):
    x = point("0", "g1")
    y = orbit_point(SHEAR, x, n)
    assert y.coords[0] == parse_phase("g1").scale(n).reduce_mod_1()
    assert y.coords[1] == parse_phase("g1").reduce_mod_1()


@given(st.integers(min_value=-20, max_value=20),
       st.integers(min_value=-20, max_value=20))
def test_orbit_is_group_action(m, n):
    x = point("1/7", "g2")
    a = orbit_point(ROTATION, orbit_point(ROTATION, x, m), n)
    b = orbit_point(ROTATION, x, m + n)
    assert a.coords == b.coords


# -------------------------------------------------------- character streams

def test_shear_character_matches_hand_formula():
    cs = character_seq(SHEAR, point("0", "g1"), Character((1, 0)))
    assert cs.entropy.is_zero_entropy
    assert cs.modulus == 1
    assert cs.stream.tag == Tag.nil(1)
    g1 = parse_phase("g1")
    for n in range(-30, 31):
        want = e_phase(g1.scale(n).float_mod_1())
        assert abs(cs.stream.evaluate(n) - want) < 1e-12


def test_rotation_character_dual_route():
    x = point("1/3", "g2")
    v = Character((2, 1))
    cs = character_seq(ROTATION, x, v)
    assert cs.modulus == 4
    assert len(cs.residue_polys) == 4
    # every residue polynomial is constant: the orbit is 4-periodic
    for f in cs.residue_polys:
        assert f.degree <= 0
    for n in range(-50, 51):
        direct = e_phase(v.pair(orbit_point(ROTATION, x, n)).float_mod_1())
        assert abs(cs.stream.evaluate(n) - direct) < 1e-12


def test_character_dimension_checked():
    with pytest.raises(ValueError):
        character_seq(SHEAR, point("0"), Character((1, 0)))
    with pytest.raises(ValueError):
        character_seq(SHEAR, point("0", "g1"), Character((1, 0, 0)))


def test_positive_entropy_character_runs_without_structure():
    x = point("1/5", "1/7")
    v = Character((1, 1))
    cs = character_seq(FIB_SQ, x, v)
    assert cs.modulus is None
    assert cs.residue_polys is None
    assert cs.stream.tag == Tag.unknown()
    for n in range(-10, 11):
        direct = e_phase(v.pair(orbit_point(FIB_SQ, x, n)).float_mod_1())
        assert abs(cs.stream.evaluate(n) - direct) < 1e-12


def test_verify_polynomial_form_counts_and_rejects():
    checked = verify_polynomial_form(
        SHEAR, point("1/3", "g1"), Character((1, 2)), range(-60, 61))
    assert checked == 121
    with pytest.raises(ValueError):
        verify_polynomial_form(FIB_SQ, point("0", "0"), Character((1, 0)), [0])


def test_verify_three_dimensional_chain():
    a = IntMatrix.from_rows([[1, 1, 0], [0, 1, 1], [0, 0, 1]])
    checked = verify_polynomial_form(
        a, point("g1", "1/2", "g2"), Character((1, 0, 3)), range(-40, 41))
    assert checked == 81


def test_mismatch_exception_carries_location():
    err = MismatchAt(17)
    assert err.n == 17
    assert isinstance(err, AssertionError)


# --------------------------------------------------------------- Weyl means

def brute_mean(p, k, N):
    q = p.scale(k)
    vals = [e_phase(q(n).float_mod_1()) for n in range(-N, N + 1)]
    return sum(vals) / (2 * N + 1)


def test_weyl_rational_period_fold():
    p = PhasePolynomial.from_coeffs(
        (PhaseScalar.zero(), parse_phase("1/3")), basis="monomial")
    rep = weyl_test(p, [1, 3], [4, 5, 10])
    assert rep.checkpoints == (4, 5, 10)
    h1, h3 = rep.harmonics

    assert h1.method == "periodic-fold"
    assert h1.period == 3
    assert not h1.expect_zero
    # 2*4+1 = 9 covers whole periods, so the mean is the period mean
    assert abs(h1.means[0]) < 1e-15
    for mean, N in zip(h1.means, (4, 5, 10)):
        assert abs(mean - brute_mean(p, 1, N)) < 1e-12

    # 3 * (n/3) is an integer phase, mean exactly 1
    assert h3.period == 1
    assert h3.means == (1 + 0j, 1 + 0j, 1 + 0j)


@given(st.integers(min_value=1, max_value=4),
       st.integers(min_value=2, max_value=9),
       st.integers(min_value=0, max_value=25))
def test_weyl_rational_counts_match_brute_force(k, den, N):
    p = PhasePolynomial.from_coeffs(
        (parse_phase("1/2"), PhaseScalar.from_rational(Fraction(1, den))),
        basis="monomial")
    rep = weyl_test(p, [k], [N])
    assert abs(rep.harmonics[0].means[0] - brute_mean(p, k, N)) < 1e-12


def test_weyl_irrational_block_route():
    p = PhasePolynomial.from_coeffs(
        (PhaseScalar.zero(), parse_phase("g1")), basis="monomial")
    rep = weyl_test(p, [1, 2], [100, 500], precision="exact")
    for h in rep.harmonics:
        assert h.method == "block"
        assert h.period is None
        assert h.expect_zero
        for mean, N in zip(h.means, (100, 500)):
            assert abs(mean - brute_mean(p, h.harmonic, N)) < 1e-9
    # equidistribution: bigger window, smaller mean for this alpha
    assert abs(rep.harmonics[0].means[1]) < abs(rep.harmonics[0].means[0])


def test_weyl_quadratic_irrational():
    p = PhasePolynomial.from_coeffs(
        (PhaseScalar.zero(), PhaseScalar.zero(), parse_phase("g1")),
        basis="monomial")
    rep = weyl_test(p, [1], [300])
    h = rep.harmonics[0]
    assert h.expect_zero
    assert abs(h.means[0] - brute_mean(p, 1, 300)) < 1e-9


def test_weyl_mixed_rational_irrational_coeffs():
    # constant irrational part does not break equidistribution logic
    p = PhasePolynomial.from_coeffs(
        (parse_phase("g2"), parse_phase("1/4")), basis="monomial")
    rep = weyl_test(p, [1, 4], [6])
    h1, h4 = rep.harmonics
    assert not h1.expect_zero          # nonconstant coefficients all rational
    assert h1.method == "block"        # but the constant makes it non-periodic
    assert h4.method == "block"
    assert abs(h1.means[0] - brute_mean(p, 1, 6)) < 1e-12


def test_weyl_rejects_negative_checkpoints():
    p = PhasePolynomial.from_coeffs((PhaseScalar.zero(), parse_phase("g1")))
    with pytest.raises(ValueError):
        weyl_test(p, [1], [-3])
    with pytest.raises(ValueError):
        weyl_test(p, [1], [])


def test_weyl_fast_and_exact_agree():
    p = PhasePolynomial.from_coeffs(
        (PhaseScalar.zero(), parse_phase("g1"), parse_phase("g2")))
    fast = weyl_test(p, [1], [2000], precision="fast")
    exact = weyl_test(p, [1], [2000], precision="exact")
    assert abs(fast.harmonics[0].means[0] - exact.harmonics[0].means[0]) < 1e-9
