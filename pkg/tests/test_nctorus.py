import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nilseqlab.exactnum import (
    IntMatrix,
    NotUnipotent,
    PhaseScalar,
    congruent_mod_1,
    parse_phase,
)
from nilseqlab.nctorus import (
    DimensionMismatch,
    NotCompatible,
    NotRational,
    NotUnitVector,
    ThetaMatrix,
    WeylElement,
    WeylWord,
    apply_auto,
    apply_auto_inverse,
    clock_shift_check,
    commutator_phase,
    gns_apply,
    iterate_phase_polys,
    state_seq,
    word_identity,
    word_mul,
    word_pow,
)
from nilseqlab.nilseq import Tag, e_phase
from nilseqlab.spectral import SparseVector

from conftest import SQRT2, SQRT3
from nilseqlab.exactnum import declare_generator

declare_generator("g1", SQRT2)
declare_generator("g2", SQRT3)

SHEAR = IntMatrix.from_rows([[1, 1], [0, 1]])
SWAP = IntMatrix.from_rows([[0, 1], [1, 0]])
FIB_SQ = IntMatrix.from_rows([[2, 1], [1, 1]])


def theta2(spec):
    return ThetaMatrix.from_upper(2, {(0, 1): parse_phase(spec)})


THETA_IRR = theta2("g1")
THETA_RAT = theta2("1/4")

exponents2 = st.tuples(st.integers(min_value=-6, max_value=6),
                       st.integers(min_value=-6, max_value=6))


@st.composite
def words2(draw):
    num = draw(st.integers(min_value=-12, max_value=12))
    den = draw(st.integers(min_value=1, max_value=8))
    phase = PhaseScalar.from_rational(Fraction(num, den))
    if draw(st.booleans()):
        phase = phase + parse_phase("g1").scale(draw(st.integers(-3, 3)))
    return WeylWord.make(draw(exponents2), phase)


# ----------------------------------------------------------- theta validity

def test_theta_construction_checks():
    z = PhaseScalar.zero()
    g1 = parse_phase("g1")
    with pytest.raises(ValueError):
        ThetaMatrix(((z, g1), (g1, z)))       # not skew
    with pytest.raises(ValueError):
        ThetaMatrix(((g1, z), (z, z)))        # diagonal nonzero
    with pytest.raises(ValueError):
        ThetaMatrix.from_upper(2, {(1, 0): g1})
    with pytest.raises(ValueError):
        ThetaMatrix.from_upper(2, {(0, 2): g1})
    t = theta2("g1")
    assert t.entry(0, 1) == g1
    assert t.entry(1, 0) == -g1
    assert t.dim == 2


def test_compatibility_is_mod_one():
    # swap conjugation flips the sign of theta, so 2*theta must be integral
    apply_auto(SWAP, WeylWord.make((1, 0)), theta2("1/2"))
    with pytest.raises(NotCompatible):
        apply_auto(SWAP, WeylWord.make((1, 0)), THETA_IRR)
    with pytest.raises(NotCompatible):
        apply_auto(SWAP, WeylWord.make((1, 0)), theta2("1/3"))
    # upper triangular S is compatible with any theta
    apply_auto(SHEAR, WeylWord.make((1, 0)), THETA_IRR)


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        apply_auto(IntMatrix.from_rows([[1]]), WeylWord.make((1, 0)), THETA_IRR)


# ----------------------------------------------------------------- words

def test_generator_product_order():
    u1 = WeylWord.make((1, 0))
    u2 = WeylWord.make((0, 1))
    fwd = word_mul(u1, u2, THETA_IRR)
    rev = word_mul(u2, u1, THETA_IRR)
    assert fwd.exponents == rev.exponents == (1, 1)
    # u1 u2 is already normal ordered: no phase is picked up
    assert not fwd.phase
    diff = rev.phase - fwd.phase
    assert congruent_mod_1(diff, commutator_phase((0, 1), (1, 0), THETA_IRR))


@given(words2(), words2(), words2())
def test_word_mul_associative(a, b, c):
    lhs = word_mul(word_mul(a, b, THETA_IRR), c, THETA_IRR)
    rhs = word_mul(a, word_mul(b, c, THETA_IRR), THETA_IRR)
    assert lhs.exponents == rhs.exponents
    assert congruent_mod_1(lhs.phase, rhs.phase)


@given(words2())
def test_word_identity_neutral(w):
    e = word_identity(2)
    assert word_mul(e, w, THETA_IRR) == w
    assert word_mul(w, e, THETA_IRR) == w


@given(words2(), st.integers(min_value=-15, max_value=15))
def test_word_pow_matches_repeated_mul(w, q):
    got = word_pow(w, q, THETA_IRR)
    direct = word_identity(2)
    step = w if q >= 0 else word_pow(w, -1, THETA_IRR)
    for _ in range(abs(q)):
        direct = word_mul(direct, step, THETA_IRR)
    assert got.exponents == direct.exponents
    assert congruent_mod_1(got.phase, direct.phase)


@given(words2())
def test_word_inverse(w):
    inv = word_pow(w, -1, THETA_IRR)
    assert word_mul(w, inv, THETA_IRR) == word_identity(2)
    assert word_mul(inv, w, THETA_IRR) == word_identity(2)


@given(exponents2, exponents2)
def test_commutator_antisymmetric(x, y):
    a = commutator_phase(x, y, THETA_IRR)
    b = commutator_phase(y, x, THETA_IRR)
    assert congruent_mod_1(a + b, PhaseScalar.zero())


@given(exponents2, exponents2)
def test_commutator_from_words(x, y):
    # x y x^-1 y^-1 is central with phase commutator_phase(x, y)
    wx, wy = WeylWord.make(x), WeylWord.make(y)
    lhs = word_mul(word_mul(wx, wy, THETA_IRR),
                   word_mul(word_pow(wx, -1, THETA_IRR),
                            word_pow(wy, -1, THETA_IRR), THETA_IRR), THETA_IRR)
    assert lhs.exponents == (0, 0)
    assert congruent_mod_1(lhs.phase, commutator_phase(x, y, THETA_IRR))


# ------------------------------------------------------------ automorphisms

@given(words2(), words2())
def test_apply_auto_is_homomorphism(a, b):
    ga = apply_auto(SHEAR, a, THETA_IRR)
    gb = apply_auto(SHEAR, b, THETA_IRR)
    lhs = apply_auto(SHEAR, word_mul(a, b, THETA_IRR), THETA_IRR)
    rhs = word_mul(ga, gb, THETA_IRR)
    assert lhs.exponents == rhs.exponents
    assert congruent_mod_1(lhs.phase, rhs.phase)


@given(words2(), st.integers(min_value=-25, max_value=25))
def test_apply_auto_exponents_follow_matrix(w, n):
    out = w
    step = apply_auto if n >= 0 else apply_auto_inverse
    for _ in range(abs(n)):
        out = step(SHEAR, out, THETA_IRR)
    assert out.exponents == (SHEAR ** n).apply(w.exponents)


@given(words2())
def test_apply_auto_inverse_round_trip(w):
    fwd = apply_auto(SHEAR, w, THETA_IRR)
    assert apply_auto_inverse(SHEAR, fwd, THETA_IRR) == w
    bwd = apply_auto_inverse(SHEAR, w, THETA_IRR)
    assert apply_auto(SHEAR, bwd, THETA_IRR) == w


@given(exponents2, exponents2)
def test_commutator_invariant_under_auto(x, y):
    sx = tuple(SHEAR.apply(x))
    sy = tuple(SHEAR.apply(y))
    assert congruent_mod_1(commutator_phase(sx, sy, THETA_IRR),
                           commutator_phase(x, y, THETA_IRR))


# ----------------------------------------------------------------- elements

@st.composite
def elements2(draw):
    n_terms = draw(st.integers(min_value=1, max_value=3))
    terms = {}
    for _ in range(n_terms):
        exps = draw(exponents2)
        re = draw(st.integers(min_value=-4, max_value=4))
        im = draw(st.integers(min_value=-4, max_value=4))
        terms[exps] = complex(re, im) / 4
    return WeylElement.from_terms(2, terms)


def test_trace_reads_identity_coefficient():
    a = WeylElement.from_terms(2, {(0, 0): 2.5 + 1j, (1, 0): 3.0})
    assert a.trace() == 2.5 + 1j
    assert WeylElement.from_terms(2, {(1, 1): 1.0}).trace() == 0j


@given(elements2(), elements2())
def test_trace_is_tracial(a, b):
    ab = a.mul(b, THETA_IRR).trace()
    ba = b.mul(a, THETA_IRR).trace()
    assert abs(ab - ba) < 1e-12


@given(elements2())
def test_trace_positive_on_squares(a):
    val = a.adjoint(THETA_IRR).mul(a, THETA_IRR).trace()
    assert abs(val.imag) < 1e-12
    assert val.real > -1e-12


@given(elements2())
def test_adjoint_involution(a):
    again = a.adjoint(THETA_IRR).adjoint(THETA_IRR)
    assert again.dim == a.dim
    assert len(again.terms) == len(a.terms)
    for (e1, c1), (e2, c2) in zip(again.terms, a.terms):
        assert e1 == e2
        assert abs(c1 - c2) < 1e-12


@given(elements2(), elements2())
def test_element_auto_is_star_homomorphism(a, b):
    lhs = a.mul(b, THETA_IRR).apply_auto(SHEAR, THETA_IRR)
    rhs = a.apply_auto(SHEAR, THETA_IRR).mul(b.apply_auto(SHEAR, THETA_IRR),
                                             THETA_IRR)
    assert lhs.dim == rhs.dim
    la, ra = dict(lhs.terms), dict(rhs.terms)
    assert set(la) == set(ra)
    for k in la:
        assert abs(la[k] - ra[k]) < 1e-12
    star = a.adjoint(THETA_IRR).apply_auto(SHEAR, THETA_IRR)
    star2 = a.apply_auto(SHEAR, THETA_IRR).adjoint(THETA_IRR)
    assert set(dict(star.terms)) == set(dict(star2.terms))


# ---------------------------------------------------------------- GNS space

def test_gns_apply_follows_word_mul():
    # applying u1 to the basis vector at site (0,1) lands on site (1,1)
    # with exactly the phase of the word product u1 * u2
    u1 = WeylWord.make((1, 0))
    psi = SparseVector.basis(2, (0, 1))
    out = gns_apply(u1, psi, THETA_IRR)
    prod = word_mul(u1, WeylWord.make((0, 1)), THETA_IRR)
    assert out.site_dict() == {prod.exponents: e_phase(prod.phase.float_mod_1())}


@given(words2(), exponents2)
def test_gns_apply_composes_like_word_mul(w, site):
    psi = SparseVector.basis(2, site)
    site_word = WeylWord.make(site)
    out = gns_apply(w, psi, THETA_IRR)
    prod = word_mul(w, site_word, THETA_IRR)
    got = out.site_dict()
    assert list(got) == [prod.exponents]
    assert abs(got[prod.exponents] - e_phase(prod.phase.float_mod_1())) < 1e-12


@given(words2())
def test_gns_apply_preserves_norm(w):
    psi = SparseVector.from_sites(2, {(0, 0): 0.6, (2, -1): 0.8j})
    out = gns_apply(w, psi, THETA_IRR)
    assert abs(out.norm() - psi.norm()) < 1e-12


def test_gns_apply_rejects_atomic_vectors():
    psi = SparseVector.from_sites(2, {(0, 0): 1.0})
    withatom = psi.add(SparseVector(
        2, (), (("a0", 0.5 + 0j, (parse_phase("g1"),)),)))
    with pytest.raises(DimensionMismatch):
        gns_apply(WeylWord.make((1, 0)), withatom, THETA_IRR)


# -------------------------------------------------------- state sequences

def brute_state_value(S, theta, u, vec, n):
    total = 0j
    for exps, c in u.terms:
        w = WeylWord.make(exps)
        step = apply_auto if n >= 0 else apply_auto_inverse
        for _ in range(abs(n)):
            w = step(S, w, theta)
        total += c * gns_apply(w, vec, theta).inner(vec)
    return total


def unit_vec():
    return SparseVector.from_sites(2, {(0, 0): 0.6, (1, 1): 0.8})


def test_state_seq_matches_brute_force_zero_entropy():
    u = WeylElement.from_terms(2, {(0, 1): 1.0, (1, 0): 0.5j})
    vec = unit_vec()
    stream = state_seq(SHEAR, THETA_IRR, u, vec)
    assert stream.tag.kind == "almost_nil"
    for n in range(-25, 26):
        want = brute_state_value(SHEAR, THETA_IRR, u, vec, n)
        assert abs(stream.evaluate(n) - want) < 1e-12


def test_state_seq_block_matches_scalar():
    u = WeylElement.from_terms(2, {(0, 1): 1.0})
    stream = state_seq(SHEAR, THETA_IRR, u, unit_vec())
    block = stream.evaluate_block(-700, 700)
    for i, n in enumerate(range(-700, 700)):
        if n % 97 == 0:
            assert abs(block[i] - stream.evaluate(n)) < 1e-12


def test_state_seq_rational_theta_dual_route():
    u = WeylElement.from_terms(2, {(1, 1): 1.0, (0, 0): 0.25})
    vec = unit_vec()
    stream = state_seq(SHEAR, THETA_RAT, u, vec)
    for n in range(-20, 21):
        want = brute_state_value(SHEAR, THETA_RAT, u, vec, n)
        assert abs(stream.evaluate(n) - want) < 1e-12


def test_state_seq_positive_entropy_direct_path():
    u = WeylElement.from_terms(2, {(0, 1): 1.0})
    vec = unit_vec()
    stream = state_seq(FIB_SQ, theta2("1/2"), u, vec)
    assert stream.tag == Tag.unknown()
    for n in range(-6, 7):
        want = brute_state_value(FIB_SQ, theta2("1/2"), u, vec, n)
        assert abs(stream.evaluate(n) - want) < 1e-12


def test_state_seq_requires_unit_vector():
    u = WeylElement.from_terms(2, {(0, 1): 1.0})
    bad = SparseVector.from_sites(2, {(0, 0): 0.6, (1, 1): 0.9})
    with pytest.raises(NotUnitVector):
        state_seq(SHEAR, THETA_IRR, u, bad)


def test_state_seq_fast_path_close_to_exact():
    u = WeylElement.from_terms(2, {(0, 1): 1.0})
    vec = unit_vec()
    exact = state_seq(SHEAR, THETA_IRR, u, vec, precision="exact")
    fast = state_seq(SHEAR, THETA_IRR, u, vec, precision="fast")
    a = exact.evaluate_block(-2000, 2000)
    b = fast.evaluate_block(-2000, 2000)
    assert np.max(np.abs(a - b)) < 1e-9


# ------------------------------------------------------ iterated phase data

def test_iterate_phase_polys_matches_word_iteration():
    rep = iterate_phase_polys(SHEAR, THETA_IRR, (0, 1))
    assert rep.modulus == 1
    w = WeylWord.make((0, 1))
    for n in range(0, 40):
        assert rep.word_at(n).exponents == w.exponents
        assert congruent_mod_1(rep.phase_at(n), w.phase)
        w = apply_auto(SHEAR, w, THETA_IRR)
    w = WeylWord.make((0, 1))
    for n in range(0, -40, -1):
        assert rep.word_at(n).exponents == w.exponents
        assert congruent_mod_1(rep.phase_at(n), w.phase)
        w = apply_auto_inverse(SHEAR, w, THETA_IRR)


def test_iterate_phase_polys_exponent_polys():
    rep = iterate_phase_polys(SHEAR, THETA_IRR, (0, 1))
    # shear sends u2 to words with exponents (n, 1)
    for n in (-9, -1, 0, 1, 2, 31):
        assert rep.exponents_at(n) == (n, 1)


def test_iterate_phase_polys_rejects_positive_entropy():
    with pytest.raises(NotUnipotent):
        iterate_phase_polys(FIB_SQ, theta2("1/2"), (0, 1))


# ------------------------------------------------------------- clock shift

def test_clock_shift_rational():
    rep = clock_shift_check(parse_phase("1/3"))
    assert rep.q == 3
    assert rep.p == 1
    assert rep.relation_error < 1e-12
    assert rep.max_word_error < 1e-10
    assert rep.words_checked > 0


def test_clock_shift_rejects_irrational():
    with pytest.raises(NotRational):
        clock_shift_check(parse_phase("g1"))
