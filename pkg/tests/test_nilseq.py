import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nilseqlab.exactnum import PhasePolynomial, PhaseScalar, binom_int, parse_phase
from nilseqlab.nilseq import (
    ArityMismatch,
    DegreeZero,
    SequenceStream,
    Tag,
    constant,
    deinterleave,
    e_phase,
    from_function,
    furstenberg_orbit,
    heisenberg_seq,
    indicator,
    interleave,
    phase_block_exact,
    phase_block_fast,
    poly_exp,
    quadratic_seq,
    theta_kappa,
)

# 50-digit series oracle values, frozen
KAPPA_00 = 1.086434811213308
KAPPA_0_HALF = 0.9135791381561168
KAPPA_QUARTER_0 = 0.9999930253152876
KAPPA_THIRD_QUARTER = 0.7325909244652877 - 0.1414841747390007j

rationals = st.fractions(min_value=-5, max_value=5, max_denominator=8)


@st.composite
def phases(draw):
    r = draw(rationals)
    parts = []
    for g in ("g1", "g2"):
        c = draw(rationals)
        if c:
            parts.append((g, c))
    return PhaseScalar(Fraction(r), tuple(parts))


@st.composite
def phase_polys(draw, max_degree=4):
    deg = draw(st.integers(min_value=0, max_value=max_degree))
    return PhasePolynomial.from_coeffs(tuple(draw(phases()) for _ in range(deg + 1)))


def test_e_phase_quarter_turns():
    assert e_phase(0.0) == 1.0 + 0j
    assert abs(e_phase(0.5) - (-1.0)) < 1e-15
    assert abs(e_phase(0.25) - 1j) < 1e-15
    assert abs(e_phase(1.0) - 1.0) < 1e-15


# --------------------------------------------------------------------- tags

def test_tag_constructors_and_str():
    assert str(Tag.nil(2)) == "Nil(step 2)"
    assert str(Tag.zero_density()) == "ZeroDensity"
    assert str(Tag.almost_nil()) == "AlmostNil"
    assert str(Tag.unknown()) == "Unknown"
    with pytest.raises(ValueError):
        Tag.nil(0)


def test_tag_addition_rules():
    a = constant(1.0)                      # Nil(1)
    q = quadratic_seq(parse_phase("g1"))   # Nil(2)
    z = indicator()                        # ZeroDensity
    u = from_function(lambda n: 0j, bound=1.0)  # Unknown

    assert a.add(q).tag == Tag.nil(2)
    assert z.add(z).tag == Tag.zero_density()
    assert a.add(z).tag == Tag.almost_nil(1)
    assert q.add(z).tag == Tag.almost_nil(2)
    assert a.add(u).tag == Tag.unknown()
    assert z.add(u).tag == Tag.unknown()


def test_tag_multiplication_rules():
    a = constant(1.0)
    q = quadratic_seq(parse_phase("g1"))
    z = indicator()
    u = from_function(lambda n: 0j, bound=1.0)

    assert a.mul(q).tag == Tag.nil(2)
    # zero-density absorbs any bounded factor, even unknown
    assert z.mul(a).tag == Tag.zero_density()
    assert z.mul(u).tag == Tag.zero_density()
    assert a.mul(u).tag == Tag.unknown()
    assert q.add(z).mul(q).tag == Tag.almost_nil(2)


# ------------------------------------------------------------ stream algebra

@given(st.integers(min_value=-30, max_value=30))
def test_stream_pointwise_ops(n):
    a = quadratic_seq(parse_phase("g1"))
    b = constant(0.5 - 0.25j)
    assert a.add(b).evaluate(n) == a.evaluate(n) + b.evaluate(n)
    assert a.mul(b).evaluate(n) == a.evaluate(n) * b.evaluate(n)
    assert a.conj().evaluate(n) == a.evaluate(n).conjugate()
    assert a.shift(7).evaluate(n) == a.evaluate(n + 7)
    assert a.scale(2j).evaluate(n) == 2j * a.evaluate(n)


def test_stream_bounds_compose():
    a = constant(2.0)
    b = constant(-3.0)
    assert a.add(b).bound == 5.0
    assert a.mul(b).bound == 6.0
    assert a.scale(2j).bound == 4.0
    assert a.conj().bound == 2.0


@given(st.integers(min_value=-40, max_value=10),
       st.integers(min_value=0, max_value=50))
def test_block_matches_scalar_path(start, width):
    p = PhasePolynomial.from_coeffs(
        (parse_phase("1/3"), parse_phase("g1"), parse_phase("g2 - 1/2")))
    s = poly_exp(p)
    block = s.evaluate_block(start, start + width)
    assert len(block) == width
    for i, n in enumerate(range(start, start + width)):
        assert abs(block[i] - s.evaluate(n)) < 1e-12


def test_constant_and_indicator_streams():
    c = constant(1.5 + 0.5j)
    assert c.tag == Tag.nil(1)
    assert c.evaluate(123) == 1.5 + 0.5j
    ind = indicator(at=3, value=-2.0)
    assert ind.tag == Tag.zero_density()
    assert ind.evaluate(3) == -2.0 + 0j
    assert ind.evaluate(2) == 0j
    assert list(ind.evaluate_block(2, 5)) == [0j, -2.0 + 0j, 0j]


# ------------------------------------------------------------ phase blocks

@given(phase_polys(), st.integers(min_value=-200, max_value=200))
def test_poly_exp_matches_direct_formula(p, n):
    s = poly_exp(p)
    want = e_phase(p(n).float_mod_1())
    assert abs(s.evaluate(n) - want) < 1e-12
    assert s.tag == Tag.nil(max(p.degree, 1))
    assert s.bound == 1.0


def test_exact_and_fast_blocks_agree():
    p = PhasePolynomial.from_coeffs(
        (parse_phase("1/7"), parse_phase("g1"), parse_phase("g2"),
         parse_phase("g1 - 2/3")))
    exact = phase_block_exact(p, -3000, 3000)
    fast = phase_block_fast(p, -3000, 3000)
    assert np.max(np.abs(exact - fast)) < 1e-10


def test_fast_path_selected_transparently():
    p = PhasePolynomial.from_coeffs((parse_phase("g1"), parse_phase("g2")))
    fast = poly_exp(p, precision="fast")
    exact = poly_exp(p, precision="exact")
    big_f = fast.evaluate_block(0, 2000)
    big_e = exact.evaluate_block(0, 2000)
    assert np.max(np.abs(big_f - big_e)) < 1e-9


@given(st.integers(min_value=-100, max_value=100))
def test_quadratic_seq_formula(n):
    t = parse_phase("g1")
    s = quadratic_seq(t)
    want = e_phase(t.scale(Fraction(binom_int(n, 2))).float_mod_1())
    assert abs(s.evaluate(n) - want) < 1e-12
    assert s.tag == Tag.nil(2)


# ------------------------------------------------------------ theta kernel

def test_kappa_frozen_oracle_values():
    assert abs(theta_kappa(0.0, 0.0) - KAPPA_00) < 1e-12
    assert abs(theta_kappa(0.0, 0.5) - KAPPA_0_HALF) < 1e-12
    assert abs(theta_kappa(0.25, 0.0) - KAPPA_QUARTER_0) < 1e-12
    assert abs(theta_kappa(1 / 3, 0.25) - KAPPA_THIRD_QUARTER) < 1e-12
    assert abs(theta_kappa(0.5, -0.5)) < 1e-10


def test_kappa_truncation_stable():
    # the default cutoff already puts the dropped tail below eps
    for s, t in ((0.3, 0.7), (0.0, 0.0), (0.9, -2.4)):
        assert abs(theta_kappa(s, t, 1e-12) - theta_kappa(s, t, 1e-18)) < 1e-12


@given(st.floats(min_value=-1, max_value=1, allow_nan=False),
       st.floats(min_value=-3, max_value=3, allow_nan=False))
def test_kappa_shift_identity(s, t):
    lhs = theta_kappa(s, t + 1.0)
    rhs = e_phase(-s) * theta_kappa(s, t)
    assert abs(lhs - rhs) < 2e-12


def test_kappa_integer_periodicity_in_s():
    for s, t in ((0.2, 0.4), (0.75, -1.2)):
        assert abs(theta_kappa(s + 1.0, t) - theta_kappa(s, t)) < 2e-12


def test_heisenberg_values():
    alpha, beta = math.sqrt(2) - 1, math.sqrt(3) - 1
    w = heisenberg_seq(alpha, beta)
    assert abs(w.evaluate(0) - KAPPA_00) < 1e-12
    # n = 1 has no quadratic phase yet
    assert abs(w.evaluate(1) - theta_kappa(alpha % 1.0, beta)) < 1e-12
    assert w.tag == Tag.nil(2)
    assert abs(w.bound - KAPPA_00) < 1e-12
    for n in (2, 3, 17, 400, 10**6 + 7):
        assert abs(w.evaluate(n)) <= w.bound + 1e-12


def test_heisenberg_quadratic_phase_exact_mod_1():
    # huge n: phase reduction happens in exact rational arithmetic
    alpha, beta = 0.125, 0.375
    w = heisenberg_seq(alpha, beta)
    n = 10**9 + 3
    quad = (Fraction(n * (n - 1), 2) * Fraction(alpha) * Fraction(beta)) % 1
    want = theta_kappa((n * Fraction(alpha)) % 1, n * beta) * e_phase(float(quad))
    assert abs(w.evaluate(n) - want) < 1e-12


# --------------------------------------------------------------- skew tower

@given(phase_polys(max_degree=3), st.integers(min_value=-60, max_value=60))
def test_tower_iterate_matches_closed_form(p, n):
    try:
        state, stream = furstenberg_orbit(p)
    except DegreeZero:
        assert p.to_binomial().degree < 1
        return
    orbit = state.iterate(n)
    assert orbit[-1] == state.closed_form(n)
    want = e_phase(state.closed_form(n).float_mod_1())
    assert abs(stream.evaluate(n) - want) < 1e-12


def test_tower_shape():
    p = PhasePolynomial.from_coeffs(
        (parse_phase("1/5"), parse_phase("1/7"), parse_phase("g1")))
    state, stream = furstenberg_orbit(p)
    assert state.dim == 2
    assert state.alpha == parse_phase("g1")
    assert state.points == (parse_phase("1/7"), parse_phase("1/5"))
    assert stream.tag == Tag.nil(2)


def test_furstenberg_rejects_constants():
    with pytest.raises(DegreeZero):
        furstenberg_orbit(PhasePolynomial.constant(parse_phase("g1")))


def test_iterate_float_tracks_exact_orbit():
    p = PhasePolynomial.from_coeffs(
        (parse_phase("0"), parse_phase("1/3"), parse_phase("g1")))
    state, _ = furstenberg_orbit(p)
    n = 2000
    got = state.iterate_float(n)
    want = [x.float_mod_1() for x in state.iterate(n)]
    for g, w in zip(got, want):
        # compare as points on the circle
        d = abs(g - w)
        assert min(d, 1.0 - d) < 1e-9


def test_iterate_float_forward_only():
    p = PhasePolynomial.from_coeffs((parse_phase("0"), parse_phase("g1")))
    state, _ = furstenberg_orbit(p)
    with pytest.raises(ValueError):
        state.iterate_float(-1)


# ------------------------------------------------------------- interleaving

@given(st.integers(min_value=1, max_value=5), st.data())
def test_interleave_deinterleave_round_trip(m, data):
    comps = []
    for r in range(m):
        t = data.draw(phases())
        comps.append(poly_exp(PhasePolynomial.from_coeffs((t, parse_phase("g1")))))
    xi = interleave(comps, m)
    back = deinterleave(xi, m)
    for r in range(m):
        for t in (-7, -1, 0, 1, 5):
            assert back[r].evaluate(t) == comps[r].evaluate(t)


@given(st.integers(min_value=-50, max_value=50))
def test_interleave_residue_indexing(n):
    m = 3
    comps = [constant(complex(r + 1)) for r in range(m)]
    xi = interleave(comps, m)
    # n = t m + r with 0 <= r < m, also for negative n
    assert xi.evaluate(n) == complex(n % m + 1)


def test_interleave_block_matches_scalar():
    m = 4
    comps = [poly_exp(PhasePolynomial.from_coeffs(
        (parse_phase(f"{r}/7"), parse_phase("g1")))) for r in range(m)]
    xi = interleave(comps, m)
    block = xi.evaluate_block(-13, 13)
    for i, n in enumerate(range(-13, 13)):
        assert abs(block[i] - xi.evaluate(n)) < 1e-12


def test_interleave_arity_checked():
    with pytest.raises(ArityMismatch):
        interleave([constant(1.0)], 2)


def test_interleave_tag_join():
    nil1 = constant(1.0)
    nil3 = poly_exp(PhasePolynomial.from_coeffs(
        (parse_phase("0"), parse_phase("0"), parse_phase("0"), parse_phase("g1"))))
    xi = interleave([nil1, nil3], 2)
    assert xi.tag == Tag.nil(3)
    mixed = interleave([nil1, indicator()], 2)
    assert mixed.tag == Tag.almost_nil(1)
