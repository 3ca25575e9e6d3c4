"""Exact arithmetic kernel.

Integer matrices, integral polynomials held in the binomial basis
C(t,0), C(t,1), ..., scalars of the form rational + sum of rational
multiples of declared irrational generators, and polynomials with such
coefficients.  Everything here is immutable and side-effect free except
for the process-wide generator registry, which is append-only.

The binomial basis is the natural one for power iterates of unipotent
matrices: an integer matrix U with (U - I)^d = 0 satisfies
U^t = sum_j C(t,j) (U - I)^j for every integer t, so entries of matrix
powers are integral polynomials with integer binomial coefficients.
Monomial coefficients are exposed as exact Fractions for display and
for rationality tests.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import mpmath

__all__ = [
    "NotInGL",
    "NotUnipotent",
    "NonClosedProduct",
    "DegreeBoundExceeded",
    "binom_int",
    "IntMatrix",
    "IntegralPolynomial",
    "char_poly",
    "euler_phi",
    "cyclotomic",
    "EntropyReport",
    "classify_entropy",
    "PowerPolys",
    "unipotent_power_polys",
    "PhaseScalar",
    "declare_generator",
    "declare_generator_product",
    "generator_value",
    "reset_generators",
    "parse_phase",
    "format_phase",
    "PhasePolynomial",
    "fit_phase_polynomial",
    "congruent_mod_1",
]


class NotInGL(ValueError):
    """Matrix is not invertible over the integers (determinant not +-1)."""


class NotUnipotent(ValueError):
    """S^m - I is not nilpotent, so no polynomial power formula exists."""


class NonClosedProduct(ValueError):
    """Product of two irrational generators that was never declared."""


class DegreeBoundExceeded(ValueError):
    """A fitted polynomial failed verification at held-out points."""


def binom_int(t: int, k: int) -> int:
    """C(t, k) for any integer t, including negative t.  Exact."""
    if k < 0:
        return 0
    num = 1
    for i in range(k):
        num *= t - i
    return num // math.factorial(k)


# ---------------------------------------------------------------------------
# integer matrices


@dataclass(frozen=True)
class IntMatrix:
    rows: tuple[tuple[int, ...], ...]

    @staticmethod
    def from_rows(rows: Iterable[Iterable[int]]) -> "IntMatrix":
        tup = tuple(tuple(int(x) for x in r) for r in rows)
        d = len(tup)
        if d == 0 or any(len(r) != d for r in tup):
            raise ValueError("matrix must be square and nonempty")
        return IntMatrix(tup)

    @staticmethod
    def identity(d: int) -> "IntMatrix":
        return IntMatrix(tuple(tuple(1 if i == j else 0 for j in range(d)) for i in range(d)))

    @property
    def dim(self) -> int:
        return len(self.rows)

    def __add__(self, other: "IntMatrix") -> "IntMatrix":
        return IntMatrix(tuple(tuple(a + b for a, b in zip(ra, rb)) for ra, rb in zip(self.rows, other.rows)))

    def __sub__(self, other: "IntMatrix") -> "IntMatrix":
        return IntMatrix(tuple(tuple(a - b for a, b in zip(ra, rb)) for ra, rb in zip(self.rows, other.rows)))

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        d = self.dim
        cols = tuple(zip(*other.rows))
        return IntMatrix(tuple(tuple(sum(a * b for a, b in zip(row, col)) for col in cols) for row in self.rows))

    def scale(self, c: int) -> "IntMatrix":
        return IntMatrix(tuple(tuple(c * a for a in row) for row in self.rows))

    def transpose(self) -> "IntMatrix":
        return IntMatrix(tuple(zip(*self.rows)))

    def apply(self, vec: Sequence[int]) -> tuple[int, ...]:
        return tuple(sum(a * x for a, x in zip(row, vec)) for row in self.rows)

    def is_zero(self) -> bool:
        return all(a == 0 for row in self.rows for a in row)

    def is_identity(self) -> bool:
        return self == IntMatrix.identity(self.dim)

    def det(self) -> int:
        # Bareiss fraction-free elimination; exact over Z.
        d = self.dim
        m = [list(r) for r in self.rows]
        sign = 1
        prev = 1
        for k in range(d - 1):
            if m[k][k] == 0:
                for i in range(k + 1, d):
                    if m[i][k] != 0:
                        m[k], m[i] = m[i], m[k]
                        sign = -sign
                        break
                else:
                    return 0
            for i in range(k + 1, d):
                for j in range(k + 1, d):
                    m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
                m[i][k] = 0
            prev = m[k][k]
        return sign * m[d - 1][d - 1]

    def inverse(self) -> "IntMatrix":
        """Exact inverse, defined only for determinant +-1."""
        dt = self.det()
        if dt not in (1, -1):
            raise NotInGL(f"determinant {dt}, matrix has no integer inverse")
        d = self.dim
        # Gauss-Jordan over Fractions, then the result is integral.
        aug = [[Fraction(x) for x in row] + [Fraction(1 if i == j else 0) for j in range(d)]
               for i, row in enumerate(self.rows)]
        for col in range(d):
            piv = next(r for r in range(col, d) if aug[r][col] != 0)
            aug[col], aug[piv] = aug[piv], aug[col]
            pval = aug[col][col]
            aug[col] = [x / pval for x in aug[col]]
            for r in range(d):
                if r != col and aug[r][col] != 0:
                    f = aug[r][col]
                    aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
        inv = tuple(tuple(int(x) for x in row[d:]) for row in aug)
        return IntMatrix(inv)

    def __pow__(self, n: int) -> "IntMatrix":
        base = self if n >= 0 else self.inverse()
        e = abs(n)
        result = IntMatrix.identity(self.dim)
        while e:
            if e & 1:
                result = result @ base
            base = base @ base
            e >>= 1
        return result


# ---------------------------------------------------------------------------
# integral polynomials (binomial basis)


def _trim(seq: Sequence) -> tuple:
    out = list(seq)
    while out and not out[-1]:
        out.pop()
    return tuple(out)


@dataclass(frozen=True)
class IntegralPolynomial:
    """Polynomial taking integer values on integers.

    Stored in the binomial basis: p(t) = sum_j coeffs[j] * C(t, j) with
    integer coeffs.  The zero polynomial has an empty coefficient tuple.
    """

    coeffs: tuple[int, ...]

    @staticmethod
    def from_binomial(coeffs: Iterable[int]) -> "IntegralPolynomial":
        return IntegralPolynomial(_trim([int(c) for c in coeffs]))

    @staticmethod
    def from_values(values: Sequence[int]) -> "IntegralPolynomial":
        """Interpolate from values at t = 0, 1, ..., len(values)-1.

        Binomial coefficients are the forward differences at 0.
        """
        diffs = list(values)
        coeffs = []
        for _ in range(len(values)):
            coeffs.append(diffs[0])
            diffs = [b - a for a, b in zip(diffs, diffs[1:])]
        return IntegralPolynomial.from_binomial(coeffs)

    @staticmethod
    def from_monomial(coeffs: Sequence[int]) -> "IntegralPolynomial":
        """Build from integer monomial coefficients (low degree first)."""
        deg = len(_trim(coeffs))
        vals = []
        for t in range(max(deg, 1)):
            acc = 0
            for c in reversed(coeffs):
                acc = acc * t + c
            vals.append(acc)
        return IntegralPolynomial.from_values(vals)

    @staticmethod
    def constant(c: int) -> "IntegralPolynomial":
        return IntegralPolynomial.from_binomial([c])

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def __call__(self, t: int) -> int:
        return sum(c * binom_int(t, j) for j, c in enumerate(self.coeffs))

    def __add__(self, other: "IntegralPolynomial") -> "IntegralPolynomial":
        n = max(len(self.coeffs), len(other.coeffs))
        a = list(self.coeffs) + [0] * (n - len(self.coeffs))
        b = list(other.coeffs) + [0] * (n - len(other.coeffs))
        return IntegralPolynomial.from_binomial([x + y for x, y in zip(a, b)])

    def __sub__(self, other: "IntegralPolynomial") -> "IntegralPolynomial":
        return self + other.scale(-1)

    def scale(self, c: int) -> "IntegralPolynomial":
        return IntegralPolynomial.from_binomial([c * x for x in self.coeffs])

    def __mul__(self, other: "IntegralPolynomial") -> "IntegralPolynomial":
        if not self.coeffs or not other.coeffs:
            return IntegralPolynomial(())
        n = self.degree + other.degree
        vals = [self(t) * other(t) for t in range(n + 1)]
        return IntegralPolynomial.from_values(vals)

    def is_constant(self) -> bool:
        return len(self.coeffs) <= 1

    def monomial_coefficients(self) -> tuple[Fraction, ...]:
        """Exact monomial coefficients, low degree first."""
        if not self.coeffs:
            return ()
        out = [Fraction(0)] * len(self.coeffs)
        for j, c in enumerate(self.coeffs):
            # C(t, j) = t(t-1)...(t-j+1) / j!
            poly = [Fraction(1)]
            for i in range(j):
                poly = [0] + poly
                poly = [a - i * b for a, b in zip(poly, poly[1:] + [Fraction(0)])]
                # the line above computes poly*(t - i) coefficient-wise
            fj = Fraction(1, math.factorial(j))
            for k, a in enumerate(poly):
                out[k] += c * fj * a
        return _trim(out) if any(out) else ()


# ---------------------------------------------------------------------------
# characteristic polynomial and entropy classification


def char_poly(S: IntMatrix) -> IntegralPolynomial:
    """Characteristic polynomial det(xI - S), monic, exact.

    Computed by the Faddeev-LeVerrier recursion; all divisions are exact
    over the integers.  Returned as an IntegralPolynomial; monomial
    coefficients (which are integers here) are available through
    monomial_coefficients().
    """
    d = S.dim
    coeffs = [0] * (d + 1)
    coeffs[d] = 1
    M = IntMatrix.identity(d)
    c = 1
    for k in range(1, d + 1):
        AM = S @ M
        tr = sum(AM.rows[i][i] for i in range(d))
        assert tr % k == 0
        c = -tr // k
        coeffs[d - k] = c
        M = AM + IntMatrix.identity(d).scale(c)
    return IntegralPolynomial.from_monomial(coeffs)


def euler_phi(k: int) -> int:
    n, result, p = k, k, 2
    while p * p <= n:
        if n % p == 0:
            while n % p == 0:
                n //= p
            result -= result // p
        p += 1
    if n > 1:
        result -= result // n
    return result


def _poly_divmod_z(num: Sequence[int], den: Sequence[int]) -> tuple[list[int], list[int]]:
    """Division in Z[x] assuming den is monic.  Low degree first."""
    num = list(num)
    den = list(den)
    q = [0] * max(len(num) - len(den) + 1, 1)
    while len(num) >= len(den) and any(num):
        if num[-1] == 0:
            num.pop()
            continue
        shift = len(num) - len(den)
        coef = num[-1]
        q[shift] = coef
        for i, dc in enumerate(den):
            num[shift + i] -= coef * dc
        num.pop()
    while len(num) > 1 and num[-1] == 0:
        num.pop()
    return q, num


def _poly_gcd_monic(a: Sequence[Fraction], b: Sequence[Fraction]) -> list[Fraction]:
    """Monic gcd over Q, low degree first.  [1] when coprime."""
    def norm(p: Sequence[Fraction]) -> list[Fraction]:
        p = list(p)
        while len(p) > 1 and p[-1] == 0:
            p.pop()
        if p[-1] not in (0, 1):
            lead = p[-1]
            p = [c / lead for c in p]
        return p

    a, b = norm([Fraction(c) for c in a]), norm([Fraction(c) for c in b])
    while len(b) > 1:
        _, r = _poly_divmod_z(a, b)
        a, b = b, norm(r)
    return a if b[0] == 0 else [Fraction(1)]


def _squarefree_mults(p: Sequence[int]) -> list[tuple[list[Fraction], int]]:
    """Squarefree factors of a monic poly with their multiplicities.

    Repeated factors stall the numeric root finder, so roots are taken
    per squarefree part and weighted by multiplicity instead.
    """
    f = [Fraction(c) for c in p]
    deriv = [i * c for i, c in enumerate(f)][1:] or [Fraction(0)]
    d = _poly_gcd_monic(f, deriv)
    if len(d) == 1:
        return [(f, 1)]
    e, _ = _poly_divmod_z(f, d)
    out: list[tuple[list[Fraction], int]] = []
    mult = 1
    while len(e) > 1:
        y = _poly_gcd_monic(e, d)
        z, _ = _poly_divmod_z(e, y)
        if len(z) > 1:
            out.append((z, mult))
        e = y
        d, _ = _poly_divmod_z(d, y)
        mult += 1
    return out


_CYCLOTOMIC_CACHE: dict[int, tuple[int, ...]] = {1: (-1, 1)}


def cyclotomic(k: int) -> tuple[int, ...]:
    """Coefficients of the k-th cyclotomic polynomial, low degree first."""
    if k in _CYCLOTOMIC_CACHE:
        return _CYCLOTOMIC_CACHE[k]
    # x^k - 1 divided by the product of cyclotomics of proper divisors
    num = [0] * (k + 1)
    num[0], num[k] = -1, 1
    for d in range(1, k):
        if k % d == 0:
            num, rem = _poly_divmod_z(num, list(cyclotomic(d)))
            assert not any(rem)
    _CYCLOTOMIC_CACHE[k] = tuple(num)
    return _CYCLOTOMIC_CACHE[k]


def cyclotomic_candidates(d: int) -> list[int]:
    """All k with euler_phi(k) <= d; only these can divide a degree-d
    characteristic polynomial through a cyclotomic factor."""
    # phi(k) >= sqrt(k/2), so k <= 2 d^2 suffices as a scan bound
    return [k for k in range(1, 2 * d * d + 2) if euler_phi(k) <= d]


@dataclass(frozen=True)
class EntropyReport:
    """Classification of the automorphism induced by an integer matrix.

    verdict is "zero" or "positive".  For "zero", unipotence_order m is
    the least common multiple of the orders of the cyclotomic factors,
    so S^m is unipotent; cyclotomic_orders lists the factors with
    multiplicity.  For "positive", entropy is sum of log|eigenvalue|
    over eigenvalues outside the unit circle and nc_lower_bound is half
    of it (the bound available for the noncommutative extension).
    """

    verdict: str
    dim: int
    unipotence_order: int | None = None
    cyclotomic_orders: tuple[int, ...] | None = None
    entropy: float | None = None
    nc_lower_bound: float | None = None

    @property
    def is_zero_entropy(self) -> bool:
        return self.verdict == "zero"


def classify_entropy(S: IntMatrix, tol: float = 1e-12) -> EntropyReport:
    """Decide zero vs positive entropy for the toral automorphism of S.

    Zero entropy holds exactly when the characteristic polynomial is a
    product of cyclotomic polynomials (no eigenvalue off the unit circle
    is possible otherwise for a monic integer polynomial).  The test is
    exact integer polynomial division; the positive-entropy value is
    numeric, refined to well below tol.
    """
    if S.det() not in (1, -1):
        raise NotInGL(f"determinant {S.det()}; not an automorphism of the torus")
    d = S.dim
    mono = [int(c) for c in char_poly(S).monomial_coefficients()]
    remainder = list(mono)
    orders: list[int] = []
    for k in cyclotomic_candidates(d):
        ck = list(cyclotomic(k))
        while len(remainder) >= len(ck):
            q, rem = _poly_divmod_z(remainder, ck)
            if any(rem):
                break
            orders.append(k)
            remainder = q if any(q) else [0]
    if len(remainder) == 1:
        m = math.lcm(*orders)
        nil = (S ** m) - IntMatrix.identity(d)
        acc = IntMatrix.identity(d)
        for _ in range(d):
            acc = acc @ nil
        assert acc.is_zero(), "cyclotomic factorization must force unipotence"
        return EntropyReport(
            verdict="zero", dim=d, unipotence_order=m,
            cyclotomic_orders=tuple(sorted(orders)),
        )
    # positive entropy: sum log|root| over roots of the non-cyclotomic part,
    # one squarefree factor at a time so multiple roots cannot stall polyroots
    with mpmath.workdps(60):
        h = mpmath.mpf(0)
        for fac, mult in _squarefree_mults(remainder):
            poly_hi = [mpmath.mpf(c.numerator) / c.denominator
                       for c in reversed(fac)]
            roots = mpmath.polyroots(poly_hi, maxsteps=200, extraprec=120)
            for r in roots:
                mod = abs(r)
                if mod > 1:
                    h += mult * mpmath.log(mod)
            # validation: residual at each root must be negligible
            scale = max(abs(c) for c in poly_hi)
            for r in roots:
                val = mpmath.polyval(poly_hi, r)
                assert abs(val) < scale * mpmath.mpf(10) ** (-30)
        h_float = float(h)
    return EntropyReport(
        verdict="positive", dim=d,
        entropy=h_float, nc_lower_bound=h_float / 2.0,
    )


# ---------------------------------------------------------------------------
# polynomial power formulas for quasi-unipotent matrices


@dataclass(frozen=True)
class PowerPolys:
    """Matrices of integral polynomials P_r with P_r(t) = S^(t*m + r).

    Valid for every integer t, negative included: with D = S^m - I
    nilpotent, S^(t*m) = (I + D)^t = sum_{j<d} C(t,j) D^j holds as a
    polynomial identity in t.
    """

    modulus: int
    mats: tuple[tuple[tuple[IntegralPolynomial, ...], ...], ...]

    @property
    def dim(self) -> int:
        return len(self.mats[0])

    def entry(self, r: int, i: int, j: int) -> IntegralPolynomial:
        return self.mats[r][i][j]

    def evaluate(self, r: int, t: int) -> IntMatrix:
        return IntMatrix(tuple(tuple(p(t) for p in row) for row in self.mats[r]))

    def power_at(self, n: int) -> IntMatrix:
        """S^n through the polynomial formulas (n = t*m + r, 0 <= r < m)."""
        r = n % self.modulus
        t = (n - r) // self.modulus
        return self.evaluate(r, t)


def unipotent_power_polys(S: IntMatrix, m: int) -> PowerPolys:
    """Polynomial formulas for all powers of S given S^m unipotent."""
    d = S.dim
    D = (S ** m) - IntMatrix.identity(d)
    dpows = [IntMatrix.identity(d)]
    for _ in range(d - 1):
        dpows.append(dpows[-1] @ D)
    if not (dpows[-1] @ D).is_zero():
        raise NotUnipotent(f"(S^{m} - I)^{d} != 0")
    mats = []
    for r in range(m):
        Sr = S ** r
        terms = [dp @ Sr for dp in dpows]
        mat = tuple(
            tuple(
                IntegralPolynomial.from_binomial([terms[j].rows[i][k] for j in range(d)])
                for k in range(d)
            )
            for i in range(d)
        )
        mats.append(mat)
    return PowerPolys(modulus=m, mats=tuple(mats))


# ---------------------------------------------------------------------------
# phase scalars over declared irrational generators


_GENERATOR_VALUES: dict[str, Fraction] = {}
_GENERATOR_PRODUCTS: dict[tuple[str, str], "PhaseScalar"] = {}

_GID_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


def _to_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)  # accepts "a/b" and decimal strings exactly
    if isinstance(value, float):
        return Fraction(value)
    raise TypeError(f"cannot interpret {value!r} as an exact number")


def declare_generator(gid: str, value) -> "PhaseScalar":
    """Register an irrational generator with its numeric stand-in.

    The value is stored exactly (decimal strings are converted without
    rounding); rational independence from 1 and the other generators is
    assumed, not checked.  Re-declaring with the same value is a no-op;
    a conflicting value is an error.
    """
    if not _GID_RE.match(gid):
        raise ValueError(f"bad generator id {gid!r}")
    val = _to_fraction(value)
    if gid in _GENERATOR_VALUES and _GENERATOR_VALUES[gid] != val:
        raise ValueError(f"generator {gid!r} already declared with a different value")
    _GENERATOR_VALUES[gid] = val
    return PhaseScalar(Fraction(0), ((gid, Fraction(1)),))


def declare_generator_product(g1: str, g2: str, result: "PhaseScalar") -> None:
    """Declare that generator g1 times generator g2 equals result.

    Needed only when two irrational scalars must be multiplied; without
    a declaration such products raise NonClosedProduct.
    """
    for g in (g1, g2):
        if g not in _GENERATOR_VALUES:
            raise ValueError(f"unknown generator {g!r}")
    key = (min(g1, g2), max(g1, g2))
    _GENERATOR_PRODUCTS[key] = result


def generator_value(gid: str) -> Fraction:
    return _GENERATOR_VALUES[gid]


def reset_generators() -> None:
    """Forget all declarations.  Intended for test isolation."""
    _GENERATOR_VALUES.clear()
    _GENERATOR_PRODUCTS.clear()


@dataclass(frozen=True)
class PhaseScalar:
    """rational + sum of rational multiples of declared generators.

    Addition, negation, and scaling by rationals are closed.  A product
    is defined when either operand is rational or every generator pair
    involved has a declared product.  reduce_mod_1 normalizes only the
    rational part into [0, 1); mod-1 congruence therefore means the
    difference is a plain integer.
    """

    rational: Fraction
    irr: tuple[tuple[str, Fraction], ...] = ()

    @staticmethod
    def from_rational(q) -> "PhaseScalar":
        return PhaseScalar(_to_fraction(q))

    @staticmethod
    def zero() -> "PhaseScalar":
        return PhaseScalar(Fraction(0))

    @staticmethod
    def generator(gid: str) -> "PhaseScalar":
        if gid not in _GENERATOR_VALUES:
            raise ValueError(f"generator {gid!r} was never declared")
        return PhaseScalar(Fraction(0), ((gid, Fraction(1)),))

    @staticmethod
    def _build(rational: Fraction, parts: dict[str, Fraction]) -> "PhaseScalar":
        irr = tuple(sorted((g, c) for g, c in parts.items() if c != 0))
        return PhaseScalar(rational, irr)

    def __add__(self, other: "PhaseScalar") -> "PhaseScalar":
        parts = dict(self.irr)
        for g, c in other.irr:
            parts[g] = parts.get(g, Fraction(0)) + c
        return PhaseScalar._build(self.rational + other.rational, parts)

    def __sub__(self, other: "PhaseScalar") -> "PhaseScalar":
        return self + (-other)

    def __neg__(self) -> "PhaseScalar":
        return PhaseScalar(-self.rational, tuple((g, -c) for g, c in self.irr))

    def scale(self, q) -> "PhaseScalar":
        q = _to_fraction(q)
        if q == 0:
            return PhaseScalar.zero()
        return PhaseScalar(self.rational * q, tuple((g, c * q) for g, c in self.irr))

    def __mul__(self, other: "PhaseScalar") -> "PhaseScalar":
        if self.is_rational():
            return other.scale(self.rational)
        if other.is_rational():
            return self.scale(other.rational)
        # cross terms: rational x irrational parts are fine, generator
        # pairs must have been declared
        acc = PhaseScalar(self.rational * other.rational)
        acc = acc + PhaseScalar(Fraction(0), other.irr).scale(self.rational)
        acc = acc + PhaseScalar(Fraction(0), self.irr).scale(other.rational)
        for g1, c1 in self.irr:
            for g2, c2 in other.irr:
                key = (min(g1, g2), max(g1, g2))
                if key not in _GENERATOR_PRODUCTS:
                    raise NonClosedProduct(
                        f"product {g1!r} * {g2!r} was never declared")
                acc = acc + _GENERATOR_PRODUCTS[key].scale(c1 * c2)
        return acc

    def reduce_mod_1(self) -> "PhaseScalar":
        return PhaseScalar(self.rational % 1, self.irr)

    def is_rational(self) -> bool:
        return not self.irr

    def is_integer(self) -> bool:
        return not self.irr and self.rational.denominator == 1

    def exact_value(self) -> Fraction:
        """Exact numeric value using the declared generator stand-ins."""
        acc = self.rational
        for g, c in self.irr:
            acc += c * _GENERATOR_VALUES[g]
        return acc

    def to_float(self) -> float:
        return float(self.exact_value())

    def float_mod_1(self) -> float:
        return float(self.exact_value() % 1)

    def __bool__(self) -> bool:
        return bool(self.rational) or bool(self.irr)


def congruent_mod_1(a: PhaseScalar, b: PhaseScalar) -> bool:
    """True when a - b is a plain integer."""
    return (a - b).is_integer()


_TERM_RE = re.compile(
    r"""^(?:
        (?P<coef>[+-]?\d+(?:\.\d+)?(?:/\d+)?)\s*\*\s*(?P<gid>[A-Za-z_][A-Za-z0-9_]*)
        | (?P<gid2>[A-Za-z_][A-Za-z0-9_]*)
        | (?P<num>[+-]?\d+(?:\.\d+)?(?:/\d+)?)
    )$""",
    re.VERBOSE,
)


def parse_phase(text: str) -> PhaseScalar:
    """Parse the scalar literal syntax: "1/3 + 2*g1 - g2", "-0.25", "g1".

    Rationals may be written a/b or as decimal strings (kept exact);
    generators must be declared before use.
    """
    s = text.replace("-", "+-").replace(" ", "")
    if s.startswith("+"):
        s = s[1:]
    if not s:
        raise ValueError(f"empty scalar literal {text!r}")
    acc = PhaseScalar.zero()
    for raw in s.split("+"):
        if not raw:
            raise ValueError(f"dangling operator in {text!r}")
        term = raw
        neg = term.startswith("-")
        if neg:
            term = term[1:]
        m = _TERM_RE.match(term)
        if not m:
            raise ValueError(f"cannot parse scalar term {raw!r} in {text!r}")
        if m.group("gid"):
            part = PhaseScalar.generator(m.group("gid")).scale(Fraction(m.group("coef")))
        elif m.group("gid2"):
            part = PhaseScalar.generator(m.group("gid2"))
        else:
            part = PhaseScalar.from_rational(Fraction(m.group("num")))
        acc = acc + (-part if neg else part)
    return acc


def format_phase(p: PhaseScalar) -> str:
    """Literal form parse_phase accepts; round-trips exactly."""
    parts = []
    if p.rational or not p.irr:
        parts.append(str(p.rational))
    for g, c in p.irr:
        if c == 1:
            term = g
        else:
            term = f"{c}*{g}"
        if parts:
            parts.append(f"+ {term}" if c > 0 or c == 1 else f"+ {term}")
        else:
            parts.append(term)
    out = " ".join(parts)
    return out.replace("+ -", "- ")


# ---------------------------------------------------------------------------
# polynomials with phase-scalar coefficients


@dataclass(frozen=True)
class PhasePolynomial:
    """Polynomial with PhaseScalar coefficients, evaluated at integers.

    basis is "binomial" (coeffs[j] multiplies C(n,j)) or "monomial".
    Binomial is the working basis: fitting by finite differences and the
    unipotent power formulas both land there.  Conversions are exact.
    """

    coeffs: tuple[PhaseScalar, ...]
    basis: str = "binomial"

    def __post_init__(self):
        if self.basis not in ("binomial", "monomial"):
            raise ValueError(f"unknown basis {self.basis!r}")

    @staticmethod
    def from_coeffs(coeffs: Iterable[PhaseScalar], basis: str = "binomial") -> "PhasePolynomial":
        tup = _trim(tuple(coeffs))
        return PhasePolynomial(tup, basis)

    @staticmethod
    def constant(c: PhaseScalar) -> "PhasePolynomial":
        return PhasePolynomial.from_coeffs([c])

    @staticmethod
    def zero() -> "PhasePolynomial":
        return PhasePolynomial((), "binomial")

    @staticmethod
    def from_integral(p: IntegralPolynomial, s: PhaseScalar) -> "PhasePolynomial":
        """s * p(n) as a phase polynomial (binomial basis)."""
        return PhasePolynomial.from_coeffs([s.scale(c) for c in p.coeffs])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, n: int) -> PhaseScalar:
        acc = PhaseScalar.zero()
        if self.basis == "binomial":
            for j, c in enumerate(self.coeffs):
                acc = acc + c.scale(binom_int(n, j))
        else:
            for c in reversed(self.coeffs):
                acc = acc.scale(n) + c
        return acc

    def __add__(self, other: "PhasePolynomial") -> "PhasePolynomial":
        a = self.to_binomial().coeffs
        b = other.to_binomial().coeffs
        n = max(len(a), len(b))
        a = a + (PhaseScalar.zero(),) * (n - len(a))
        b = b + (PhaseScalar.zero(),) * (n - len(b))
        return PhasePolynomial.from_coeffs([x + y for x, y in zip(a, b)])

    def __sub__(self, other: "PhasePolynomial") -> "PhasePolynomial":
        return self + other.scale(-1)

    def scale(self, q) -> "PhasePolynomial":
        return PhasePolynomial(tuple(c.scale(q) for c in self.coeffs), self.basis)

    def to_binomial(self) -> "PhasePolynomial":
        if self.basis == "binomial":
            return self
        deg = max(self.degree, 0)
        values = [self(t) for t in range(deg + 1)]
        return PhasePolynomial.from_coeffs(_finite_differences(values))

    def to_monomial(self) -> "PhasePolynomial":
        if self.basis == "monomial":
            return self
        out = [PhaseScalar.zero() for _ in self.coeffs]
        for j, c in enumerate(self.coeffs):
            poly = [Fraction(1)]
            for i in range(j):
                poly = [Fraction(0)] + poly
                poly = [a - i * b for a, b in zip(poly, poly[1:] + [Fraction(0)])]
            fj = Fraction(1, math.factorial(j))
            for k, a in enumerate(poly):
                out[k] = out[k] + c.scale(fj * a)
        return PhasePolynomial.from_coeffs(out, basis="monomial")

    def is_rational(self) -> bool:
        return all(c.is_rational() for c in self.coeffs)

    def has_irrational_nonconstant(self) -> bool:
        """True when some coefficient of positive degree is irrational
        (the equidistribution criterion for e(p(n)))."""
        mono = self.to_monomial()
        return any(not c.is_rational() for c in mono.coeffs[1:])


def _finite_differences(values: Sequence[PhaseScalar]) -> list[PhaseScalar]:
    diffs = list(values)
    out = []
    for _ in range(len(values)):
        out.append(diffs[0])
        diffs = [b - a for a, b in zip(diffs, diffs[1:])]
    return out


def fit_phase_polynomial(
    evaluate: Callable[[int], PhaseScalar],
    degree_bound: int,
    held_out: int = 3,
) -> PhasePolynomial:
    """Fit a polynomial mod 1 of degree <= degree_bound to a sequence.

    Samples t = 0..degree_bound for the fit (Newton forward differences,
    exact) and verifies the next `held_out` points.  Values only known
    mod 1 are fine: integer perturbations of the samples shift the
    fitted coefficients by integers, so the fit is still congruent mod 1
    at every integer.  Verification failure raises DegreeBoundExceeded.
    """
    samples = [evaluate(t) for t in range(degree_bound + 1)]
    poly = PhasePolynomial.from_coeffs(_finite_differences(samples))
    for t in range(degree_bound + 1, degree_bound + 1 + held_out):
        if not congruent_mod_1(poly(t), evaluate(t)):
            raise DegreeBoundExceeded(
                f"degree-{degree_bound} fit fails at held-out t={t}")
    return poly
