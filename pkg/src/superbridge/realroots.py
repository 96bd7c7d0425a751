"""Exact real-root counting for univariate polynomials with rational coefficients.

Everything here is exact: coefficients are `fractions.Fraction`, floats are
lifted to their exact binary rationals, and root counts come from Sturm
chains, so a statement like "at most two zeros on (0,1)" is certified rather
than sampled.  The module also houses the trigonometric side of the story:
finite cos/sin expressions (`TrigPoly`), the half-angle substitution

    cos t = 2w/(1+w^2),   sin t = (1-w^2)/(1+w^2)

that turns critical-point equations on the circle into polynomial root
counts, and the reduced two-parameter zero count on the quarter arc.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .errors import NormViolation, ZeroDirection, ZeroPolynomial

__all__ = [
    "RealPoly",
    "SturmChain",
    "RootBracket",
    "TrigPoly",
    "CriticalProfile",
    "sturm_count",
    "count_real_roots",
    "isolate_real_roots",
    "quarter_arc_zero_count",
    "quarter_arc_quartic",
    "base_curve_critical_count",
    "halfangle_critical_polynomial",
    "halfangle_clearing_power",
    "projected_height_derivative",
]


def to_fraction(x) -> Fraction:
    """Lift an int/float/Fraction to an exact Fraction (floats lift exactly)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"cannot lift non-finite float {x!r}")
        return Fraction(x)
    raise TypeError(f"expected a rational-like number, got {type(x).__name__}")


class RealPoly:
    """Univariate polynomial with exact rational coefficients, lowest degree first.

    Trailing zero coefficients are stripped, so the leading coefficient is
    nonzero unless the polynomial is identically zero (empty tuple).
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        cs = [to_fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    def __setattr__(self, name, value):
        raise AttributeError("RealPoly is immutable")

    @classmethod
    def zero(cls) -> "RealPoly":
        return cls(())

    @classmethod
    def monomial(cls, k: int, c=1) -> "RealPoly":
        return cls((0,) * k + (c,))

    @property
    def degree(self) -> int:
        """Degree, with the zero polynomial assigned -1."""
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def leading(self) -> Fraction:
        if self.is_zero:
            raise ZeroPolynomial("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def __call__(self, x):
        """Evaluate exactly at a rational point (floats lifted first)."""
        x = to_fraction(x)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def eval_float(self, x: float) -> float:
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * x + float(c)
        return acc

    def derivative(self) -> "RealPoly":
        return RealPoly([i * c for i, c in enumerate(self.coeffs)][1:])

    def __eq__(self, other):
        if isinstance(other, RealPoly):
            return self.coeffs == other.coeffs
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def __neg__(self):
        return RealPoly([-c for c in self.coeffs])

    def __add__(self, other):
        if not isinstance(other, RealPoly):
            other = RealPoly([other])
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return RealPoly(out)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, RealPoly):
            other = RealPoly([other])
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, RealPoly):
            c = to_fraction(other)
            return RealPoly([c * a for a in self.coeffs])
        if self.is_zero or other.is_zero:
            return RealPoly.zero()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return RealPoly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        out = RealPoly([1])
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __divmod__(self, other: "RealPoly"):
        if other.is_zero:
            raise ZeroDivisionError("polynomial division by zero")
        q = [Fraction(0)] * max(len(self.coeffs) - len(other.coeffs) + 1, 0)
        r = list(self.coeffs)
        d = other.degree
        lc = other.leading
        while len(r) - 1 >= d and any(c != 0 for c in r):
            while r and r[-1] == 0:
                r.pop()
            if len(r) - 1 < d:
                break
            k = len(r) - 1 - d
            f = r[-1] / lc
            q[k] = f
            for i, c in enumerate(other.coeffs):
                r[k + i] -= f * c
            r.pop()
        return RealPoly(q), RealPoly(r)

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def squarefree_part(self) -> "RealPoly":
        if self.is_zero or self.degree == 0:
            return self
        g = poly_gcd(self, self.derivative())
        if g.degree <= 0:
            return self
        return self // g

    def deflate_root(self, r) -> "RealPoly":
        """Divide out (x - r) for a known rational root r (exact, asserts zero rem)."""
        r = to_fraction(r)
        q, rem = divmod(self, RealPoly([-r, 1]))
        if not rem.is_zero:
            raise ValueError(f"{r} is not a root")
        return q

    def __repr__(self):
        return f"RealPoly({list(self.coeffs)!r})"


def poly_gcd(a: RealPoly, b: RealPoly) -> RealPoly:
    """Monic gcd of two rational polynomials (Euclid)."""
    while not b.is_zero:
        a, b = b, a % b
    if a.is_zero:
        return a
    return a * (1 / a.leading)


# ---------------------------------------------------------------------------
# Integer Sturm machinery.  Chains are kept as primitive integer coefficient
# lists so that sign evaluations at rationals stay in (fast) integer
# arithmetic.  Dividing a row by its positive content never changes signs.
# ---------------------------------------------------------------------------


def _int_coeffs(p: RealPoly) -> list[int]:
    if p.is_zero:
        return []
    den = 1
    for c in p.coeffs:
        den = den * c.denominator // gcd(den, c.denominator)
    ints = [int(c * den) for c in p.coeffs]
    g = 0
    for c in ints:
        g = gcd(g, abs(c))
    return [c // g for c in ints]


def _int_derivative(ic: list[int]) -> list[int]:
    return [i * c for i, c in enumerate(ic)][1:]


def _int_primitive(ic: list[int]) -> list[int]:
    while ic and ic[-1] == 0:
        ic.pop()
    if not ic:
        return ic
    g = 0
    for c in ic:
        g = gcd(g, abs(c))
    return [c // g for c in ic]


def _int_rem(a: list[int], b: list[int]) -> list[int]:
    # Fraction-exact remainder of integer polynomials, then made primitive.
    r = [Fraction(c) for c in a]
    d = len(b) - 1
    lc = Fraction(b[-1])
    while len(r) - 1 >= d:
        f = r[-1] / lc
        k = len(r) - 1 - d
        for i, c in enumerate(b):
            r[k + i] -= f * c
        r.pop()
        while r and r[-1] == 0:
            r.pop()
    den = 1
    for c in r:
        den = den * c.denominator // gcd(den, c.denominator)
    return _int_primitive([int(c * den) for c in r])


@dataclass(frozen=True)
class SturmChain:
    """Canonical Sturm chain: p, p', then negated remainders down to gcd(p, p').

    Stored as primitive integer rows, which carry the same signs everywhere.
    Works for non-squarefree p too; sign variations then count *distinct*
    real roots.
    """

    rows: tuple[tuple[int, ...], ...]

    @classmethod
    def of(cls, p: RealPoly) -> "SturmChain":
        if p.is_zero:
            raise ZeroPolynomial("cannot build a Sturm chain for the zero polynomial")
        rows = [_int_coeffs(p)]
        d = _int_derivative(rows[0])
        d = _int_primitive(d)
        if d:
            rows.append(d)
            while len(rows[-1]) > 1:
                rem = _int_rem(rows[-2], rows[-1])
                if not rem:
                    break
                rows.append([-c for c in rem])
        return cls(tuple(tuple(r) for r in rows))

    def variations_at(self, x: Fraction) -> int:
        num, den = x.numerator, x.denominator
        signs = []
        for row in self.rows:
            s = _sign_at(row, num, den)
            if s:
                signs.append(s)
        return sum(1 for a, b in zip(signs, signs[1:]) if a != b)

    def variations_at_inf(self, direction: int) -> int:
        """direction=+1 for +infinity, -1 for -infinity."""
        signs = []
        for row in self.rows:
            s = 1 if row[-1] > 0 else -1
            if direction < 0 and (len(row) - 1) % 2 == 1:
                s = -s
            signs.append(s)
        return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def _sign_at(row: tuple[int, ...], num: int, den: int) -> int:
    # sign of p(num/den) via p(num/den) * den^deg, all integer Horner
    acc = row[-1]
    dp = 1
    for c in reversed(row[:-1]):
        dp *= den
        acc = acc * num + c * dp
    return (acc > 0) - (acc < 0)


def _count_open(chain: SturmChain, p: RealPoly, lo, hi) -> int:
    """Distinct real roots on the open interval (lo, hi); None means +/-inf.

    Endpoints that happen to be roots are excluded exactly by deflating the
    linear factor before counting (the interval is open, so a root sitting
    on the boundary must not be counted).
    """
    if lo is not None and hi is not None and not lo < hi:
        raise ValueError("need lo < hi")
    deflated = False
    for endpoint in (lo, hi):
        if endpoint is None:
            continue
        while p(endpoint) == 0:
            p = p.deflate_root(endpoint)
            deflated = True
    if p.degree <= 0:
        return 0
    if deflated:
        chain = SturmChain.of(p)
    va = chain.variations_at_inf(-1) if lo is None else chain.variations_at(lo)
    vb = chain.variations_at_inf(+1) if hi is None else chain.variations_at(hi)
    return va - vb


def sturm_count(p: RealPoly, lo, hi) -> int:
    """Exact number of distinct real roots of p on the open interval (lo, hi).

    Roots at the endpoints are excluded (they are divided out exactly before
    the sign-variation count, so no epsilon-nudging of the bounds is needed).
    """
    if p.is_zero:
        raise ZeroPolynomial("root count of the zero polynomial is undefined")
    lo, hi = to_fraction(lo), to_fraction(hi)
    return _count_open(SturmChain.of(p), p, lo, hi)


def count_real_roots(p: RealPoly) -> int:
    """Exact number of distinct real roots over all of R."""
    if p.is_zero:
        raise ZeroPolynomial("root count of the zero polynomial is undefined")
    if p.degree <= 0:
        return 0
    return _count_open(SturmChain.of(p), p, None, None)


@dataclass(frozen=True)
class RootBracket:
    """An isolating interval for one distinct real root; lo == hi marks an
    exact rational root."""

    lo: Fraction
    hi: Fraction

    @property
    def is_exact(self) -> bool:
        return self.lo == self.hi

    def contains(self, x: Fraction) -> bool:
        if self.is_exact:
            return x == self.lo
        return self.lo < x < self.hi


def isolate_real_roots(p: RealPoly, lo=None, hi=None) -> list[RootBracket]:
    """Isolating brackets for every distinct real root of p in open (lo, hi).

    Defaults to all real roots (Cauchy bound).  Brackets are disjoint, sorted,
    and each open bracket contains exactly one distinct root; exact rational
    roots come back as degenerate brackets.
    """
    if p.is_zero:
        raise ZeroPolynomial("cannot isolate roots of the zero polynomial")
    if lo is None or hi is None:
        bound = Fraction(1) + max(abs(c) for c in p.coeffs) / abs(p.leading)
        lo = -bound if lo is None else to_fraction(lo)
        hi = bound if hi is None else to_fraction(hi)
    else:
        lo, hi = to_fraction(lo), to_fraction(hi)
    for endpoint in (lo, hi):
        while p(endpoint) == 0:
            p = p.deflate_root(endpoint)
    if p.degree <= 0:
        return []
    chain = SturmChain.of(p)
    out: list[RootBracket] = []

    def rec(a: Fraction, b: Fraction, k: int):
        if k == 0:
            return
        if k == 1:
            out.append(RootBracket(a, b))
            return
        m = (a + b) / 2
        if p(m) == 0:
            out.append(RootBracket(m, m))
            q = p.deflate_root(m)
            while q(m) == 0:
                q = q.deflate_root(m)
            qchain = SturmChain.of(q) if q.degree > 0 else None
            ka = _count_open(qchain, q, a, m) if qchain else 0
            kb = _count_open(qchain, q, m, b) if qchain else 0
            rec2(q, qchain, a, m, ka)
            rec2(q, qchain, m, b, kb)
            return
        ka = _count_open(chain, p, a, m)
        rec(a, m, ka)
        rec(m, b, k - ka)

    def rec2(q, qchain, a, b, k):
        # continue isolation on a deflated polynomial
        if k == 0 or qchain is None:
            return
        if k == 1:
            out.append(RootBracket(a, b))
            return
        m = (a + b) / 2
        if q(m) == 0:
            out.append(RootBracket(m, m))
            q2 = q.deflate_root(m)
            while q2(m) == 0:
                q2 = q2.deflate_root(m)
            q2chain = SturmChain.of(q2) if q2.degree > 0 else None
            rec2(q2, q2chain, a, m, _count_open(q2chain, q2, a, m) if q2chain else 0)
            rec2(q2, q2chain, m, b, _count_open(q2chain, q2, m, b) if q2chain else 0)
            return
        ka = _count_open(qchain, q, a, m)
        rec2(q, qchain, a, m, ka)
        rec2(q, qchain, m, b, k - ka)

    rec(lo, hi, _count_open(chain, p, lo, hi))
    out.sort(key=lambda br: (br.lo, br.hi))
    return out


def refine_bracket_away_from(p: RealPoly, bracket: RootBracket, point) -> RootBracket:
    """Shrink an isolating bracket until the given rational point is outside it.

    If the bracketed root *is* the point, the exact bracket [point, point]
    comes back.
    """
    point = to_fraction(point)
    if bracket.is_exact or not (bracket.lo < point < bracket.hi):
        return bracket
    if p(point) == 0:
        # the bracket isolates one root, and `point` is a root inside it
        return RootBracket(point, point)
    lo, hi = bracket.lo, bracket.hi
    slo = 1 if p(lo) > 0 else -1
    while lo < point < hi:
        m = (lo + hi) / 2
        pm = p(m)
        if pm == 0:
            return RootBracket(m, m)
        if (1 if pm > 0 else -1) == slo:
            lo = m
        else:
            hi = m
    return RootBracket(lo, hi)


# ---------------------------------------------------------------------------
# The reduced critical-point count on the quarter arc.
#
# Direction (v1, v2, v3) with v3 != 0 reduces the critical-point equation of
# the base curve (cos t, sin t, cos^2 t) on 0 < t < pi/2 to counting zeros of
#
#     a*x + (b + x) * sqrt(1 - x^2)        on 0 < x < 1,  x = sin t,
#
# with a = v1/(2 v3), b = -v2/(2 v3).  Multiplying by the conjugate factor
# -a*x + (b + x)*sqrt(1 - x^2) gives the quartic below, whose roots split
# between the two factors according to an exact sign test.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CriticalProfile:
    """The reduced pair (a, b) parametrizing the quarter-arc zero count."""

    a: Fraction
    b: Fraction

    @classmethod
    def from_direction(cls, v) -> "CriticalProfile":
        v1, v2, v3 = (to_fraction(c) for c in v)
        if v3 == 0:
            raise ZeroDivisionError("profile needs a nonzero third component")
        return cls(v1 / (2 * v3), -v2 / (2 * v3))


def quarter_arc_quartic(a, b) -> RealPoly:
    """b^2 + 2bx + (1 - a^2 - b^2)x^2 - 2bx^3 - x^4, the conjugate product."""
    a, b = to_fraction(a), to_fraction(b)
    return RealPoly([b * b, 2 * b, 1 - a * a - b * b, -2 * b, -1])


def quarter_arc_zero_count(a, b) -> int:
    """Exact number of zeros of a*x + (b + x)*sqrt(1 - x^2) on open (0, 1).

    Certified to be at most 2 for every real (a, b).  Roots of the conjugate
    quartic are isolated and each one is attributed to this factor or to the
    conjugate -a*x + (b + x)*sqrt(1-x^2) by the sign test: since the quartic
    forces |a*r| = |(b + r)*sqrt(1 - r^2)|, the root r belongs here exactly
    when sign(a*r) and sign(b + r) disagree (or both vanish).
    """
    a, b = to_fraction(a), to_fraction(b)
    if a == 0 and b == 0:
        return 0  # x*sqrt(1-x^2) has no zero strictly inside (0, 1)
    if a == 0:
        # zero at x = -b only
        return 1 if 0 < -b < 1 else 0
    if b == 0:
        # x*(a + sqrt(1-x^2)): needs a = -sqrt(1-x^2) for some x in (0,1)
        return 1 if -1 < a < 0 else 0

    f = quarter_arc_quartic(a, b)
    # On this stratum f(0) = b^2 > 0, f(1) = -a^2 < 0 and f(-b) != 0, so the
    # interval endpoints are clean and -b never collides with a root.
    sign_a = 1 if a > 0 else -1
    count = 0
    for bracket in isolate_real_roots(f, Fraction(0), Fraction(1)):
        bracket = refine_bracket_away_from(f, bracket, -b)
        if bracket.is_exact:
            s_bpr = b + bracket.lo
            sign_bpr = (s_bpr > 0) - (s_bpr < 0)
        else:
            sign_bpr = 1 if b + bracket.lo > 0 else -1  # -b outside bracket
        if sign_a * sign_bpr <= 0:
            count += 1
    return count


# ---------------------------------------------------------------------------
# Critical points of the base curve (cos t, sin t, cos^2 t).
# ---------------------------------------------------------------------------

_QUARTER = math.pi / 2


def _halfangle_equation_poly(v1: Fraction, v2: Fraction, v3: Fraction) -> RealPoly:
    # -v1 sin t + v2 cos t - 2 v3 sin t cos t = 0, cleared by (1+w^2)^2
    return RealPoly([-v1, 2 * (v2 - 2 * v3), 0, 2 * (v2 + 2 * v3), v1])


def _snap_quarter(t: float):
    """Map t to exact w = tan(pi/4 - t/2) when t sits on a quarter-period."""
    k = round(t / _QUARTER)
    if abs(t - k * _QUARTER) < 1e-12:
        return k
    return None


def _w_of(t: float) -> Fraction:
    k = _snap_quarter(t)
    if k is not None:
        r = k % 4
        if r == 0:
            return Fraction(1)
        if r == 1:
            return Fraction(0)
        if r == 2:
            return Fraction(-1)
        raise ValueError("chart boundary")  # t = 3pi/2 mod 2pi, w infinite
    return to_fraction(math.tan(math.pi / 4 - t / 2))


def base_curve_critical_count(v, t_lo: float, t_hi: float) -> int:
    """Number of critical points of <(cos t, sin t, cos^2 t), v> on (t_lo, t_hi).

    For a nonzero direction v this solves -v1 sin t + v2 cos t
    - 2 v3 sin t cos t = 0 exactly.  The canonical quarter interval
    (0, pi/2) with v3 != 0 goes through the reduced (a, b) count; everything
    else goes through the half-angle polynomial, chart by chart.  Interval
    bounds that are not quarter-period multiples are lifted from their float
    values, so the interval itself is a binary-rational proxy.

    The half-angle chart covers t in (-pi/2, 3pi/2) modulo 2pi; the single
    excluded parameter per period (t = 3pi/2, where w blows up) is a critical
    point exactly when v1 = 0 and is checked separately.
    """
    v1, v2, v3 = (to_fraction(c) for c in v)
    if v1 == 0 and v2 == 0 and v3 == 0:
        raise ZeroDirection("direction must be nonzero")
    if not t_lo < t_hi:
        raise ValueError("need t_lo < t_hi")
    if t_hi - t_lo > 2 * math.pi + 1e-9:
        raise ValueError("interval longer than one period")

    if t_lo == 0.0 and _snap_quarter(t_hi) == 1 and v3 != 0:
        profile = CriticalProfile.from_direction((v1, v2, v3))
        return quarter_arc_zero_count(profile.a, profile.b)

    if v3 == 0:
        # planar case: the curve projects to a circle, and the equation
        # factors as (1+w^2) * (v1 w^2 + 2 v2 w - v1)
        poly = RealPoly([-v1, 2 * v2, v1])
    else:
        poly = _halfangle_equation_poly(v1, v2, v3)

    # chart boundaries t = 3pi/2 + 2k*pi strictly inside the interval
    count = 0
    k0 = math.ceil((t_lo - 3 * _QUARTER) / (2 * math.pi) + 1e-15)
    boundaries = []
    tb = 3 * _QUARTER + 2 * math.pi * k0
    while tb < t_hi - 1e-15:
        if tb > t_lo + 1e-15:
            boundaries.append(tb)
            if v1 == 0:
                count += 1
        tb += 2 * math.pi

    chain = SturmChain.of(poly) if poly.degree > 0 else None
    pieces = [t_lo, *boundaries, t_hi]
    for seg_lo, seg_hi in zip(pieces, pieces[1:]):
        if chain is None:
            break
        # w decreases in t; boundary endpoints map to +/- infinity
        at_left_boundary = any(abs(seg_lo - b) < 1e-15 for b in boundaries)
        at_right_boundary = any(abs(seg_hi - b) < 1e-15 for b in boundaries)
        w_hi = None if at_left_boundary else _w_of(seg_lo)
        w_lo = None if at_right_boundary else _w_of(seg_hi)
        count += _count_open(chain, poly, w_lo, w_hi)
    return count


# ---------------------------------------------------------------------------
# Finite trigonometric expressions.
# ---------------------------------------------------------------------------


class TrigPoly:
    """c0 + sum_j ( c_j cos(j t) + s_j sin(j t) ) with exact rational
    coefficients and finitely many harmonics."""

    __slots__ = ("constant", "cos", "sin")

    def __init__(self, constant=0, cos=None, sin=None):
        object.__setattr__(self, "constant", to_fraction(constant))
        object.__setattr__(self, "cos", _clean_harmonics(cos))
        object.__setattr__(self, "sin", _clean_harmonics(sin))

    def __setattr__(self, name, value):
        raise AttributeError("TrigPoly is immutable")

    @classmethod
    def zero(cls) -> "TrigPoly":
        return cls()

    @classmethod
    def cosine(cls, j: int, coeff=1) -> "TrigPoly":
        if j == 0:
            return cls(constant=coeff)
        return cls(cos={j: coeff})

    @classmethod
    def sine(cls, j: int, coeff=1) -> "TrigPoly":
        if j == 0:
            return cls()
        return cls(sin={j: coeff})

    @property
    def max_harmonic(self) -> int:
        return max([0, *self.cos.keys(), *self.sin.keys()])

    @property
    def is_zero(self) -> bool:
        return self.constant == 0 and not self.cos and not self.sin

    def __call__(self, t: float) -> float:
        val = float(self.constant)
        for j, c in self.cos.items():
            val += float(c) * math.cos(j * t)
        for j, s in self.sin.items():
            val += float(s) * math.sin(j * t)
        return val

    def __add__(self, other):
        if not isinstance(other, TrigPoly):
            other = TrigPoly(constant=other)
        cos = dict(self.cos)
        sin = dict(self.sin)
        for j, c in other.cos.items():
            cos[j] = cos.get(j, Fraction(0)) + c
        for j, s in other.sin.items():
            sin[j] = sin.get(j, Fraction(0)) + s
        return TrigPoly(self.constant + other.constant, cos, sin)

    __radd__ = __add__

    def __neg__(self):
        return TrigPoly(
            -self.constant,
            {j: -c for j, c in self.cos.items()},
            {j: -s for j, s in self.sin.items()},
        )

    def __sub__(self, other):
        if not isinstance(other, TrigPoly):
            other = TrigPoly(constant=other)
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, TrigPoly):
            c = to_fraction(other)
            return TrigPoly(
                self.constant * c,
                {j: a * c for j, a in self.cos.items()},
                {j: a * c for j, a in self.sin.items()},
            )
        acc = _HarmonicAccumulator()
        acc.add_cos(0, self.constant * other.constant)
        for j, c in other.cos.items():
            acc.add_cos(j, self.constant * c)
        for j, s in other.sin.items():
            acc.add_sin(j, self.constant * s)
        for j, c in self.cos.items():
            acc.add_cos(j, c * other.constant)
        for j, s in self.sin.items():
            acc.add_sin(j, s * other.constant)
        for i, a in self.cos.items():
            for j, b in other.cos.items():
                # cos A cos B = (cos(A-B) + cos(A+B)) / 2
                acc.add_cos(i - j, a * b / 2)
                acc.add_cos(i + j, a * b / 2)
            for j, b in other.sin.items():
                # cos A sin B = (sin(A+B) - sin(A-B)) / 2
                acc.add_sin(i + j, a * b / 2)
                acc.add_sin(i - j, -a * b / 2)
        for i, a in self.sin.items():
            for j, b in other.cos.items():
                # sin A cos B = (sin(A+B) + sin(A-B)) / 2
                acc.add_sin(i + j, a * b / 2)
                acc.add_sin(i - j, a * b / 2)
            for j, b in other.sin.items():
                # sin A sin B = (cos(A-B) - cos(A+B)) / 2
                acc.add_cos(i - j, a * b / 2)
                acc.add_cos(i + j, -a * b / 2)
        return acc.build()

    __rmul__ = __mul__

    def derivative(self) -> "TrigPoly":
        cos = {j: j * s for j, s in self.sin.items()}
        sin = {j: -j * c for j, c in self.cos.items()}
        return TrigPoly(0, cos, sin)

    def __eq__(self, other):
        if isinstance(other, TrigPoly):
            return (
                self.constant == other.constant
                and self.cos == other.cos
                and self.sin == other.sin
            )
        return NotImplemented

    def __hash__(self):
        return hash((self.constant, tuple(sorted(self.cos.items())),
                     tuple(sorted(self.sin.items()))))

    def __repr__(self):
        return f"TrigPoly(constant={self.constant!r}, cos={self.cos!r}, sin={self.sin!r})"


def _clean_harmonics(d) -> dict[int, Fraction]:
    if not d:
        return {}
    out = {}
    for j, c in d.items():
        if j < 1:
            raise ValueError("harmonic indices must be >= 1")
        c = to_fraction(c)
        if c != 0:
            out[int(j)] = c
    return out


class _HarmonicAccumulator:
    def __init__(self):
        self.constant = Fraction(0)
        self.cos: dict[int, Fraction] = {}
        self.sin: dict[int, Fraction] = {}

    def add_cos(self, j: int, c: Fraction):
        if c == 0:
            return
        j = abs(j)  # cos is even
        if j == 0:
            self.constant += c
        else:
            self.cos[j] = self.cos.get(j, Fraction(0)) + c

    def add_sin(self, j: int, c: Fraction):
        if c == 0 or j == 0:
            return
        if j < 0:  # sin is odd
            j, c = -j, -c
        self.sin[j] = self.sin.get(j, Fraction(0)) + c

    def build(self) -> TrigPoly:
        return TrigPoly(self.constant, self.cos, self.sin)


def check_perturbation_norm(radial: TrigPoly, vertical: TrigPoly,
                            samples: int = 4096, tol: float = 1e-9):
    """Dense-sample check that radial^2 + vertical^2 <= 1 on the circle."""
    worst = 0.0
    for k in range(samples):
        t = 2 * math.pi * k / samples
        val = radial(t) ** 2 + vertical(t) ** 2
        if val > worst:
            worst = val
    if worst > 1 + tol:
        raise NormViolation(
            f"perturbation norm reaches {worst:.6g} > 1 on the circle")


# ---------------------------------------------------------------------------
# Half-angle critical polynomial for the braided curve
#
#   ( cos(rt)(1 + e*radial(t)), sin(rt)(1 + e*radial(t)),
#     cos^2(rt) + e*vertical(t) )
#
# Critical points of the height along v satisfy a trigonometric equation of
# harmonic order N; clearing (1+w^2)^N after the substitution yields a single
# polynomial in w.  At e = 0 it is divisible by (1+w^2)^(N-2r): the chart
# contributes N-2r conjugate root pairs at +/- i, leaving at most 4r real
# roots, i.e. at most 2r height maxima.
# ---------------------------------------------------------------------------


def projected_height(radial: TrigPoly, vertical: TrigPoly, winding: int,
                     epsilon, v) -> TrigPoly:
    """<curve(t), v> as a TrigPoly for the braided curve above."""
    if winding < 1:
        raise ValueError("winding must be a positive integer")
    eps = to_fraction(epsilon)
    v1, v2, v3 = (to_fraction(c) for c in v)
    r = winding
    one_plus = TrigPoly(constant=1) + radial * eps
    cos_sq = TrigPoly(constant=Fraction(1, 2)) + TrigPoly.cosine(2 * r, Fraction(1, 2))
    return (
        TrigPoly.cosine(r) * one_plus * v1
        + TrigPoly.sine(r) * one_plus * v2
        + (cos_sq + vertical * eps) * v3
    )


def projected_height_derivative(radial: TrigPoly, vertical: TrigPoly,
                                winding: int, epsilon, v) -> TrigPoly:
    return projected_height(radial, vertical, winding, epsilon, v).derivative()


def halfangle_clearing_power(radial: TrigPoly, vertical: TrigPoly,
                             winding: int, v) -> int:
    """The clearing exponent N: harmonic order of the height derivative.

    Computed from the structural harmonic content (independent of epsilon),
    so the epsilon -> 0 limit keeps the same chart degree.  This is an upper
    bound when hand-tuned coefficients cancel the top harmonic; the cleared
    polynomial is then divisible by extra copies of (1 + w^2), which is
    harmless for real-root counts.
    """
    v1, v2, v3 = (to_fraction(c) for c in v)
    n = 2 * winding
    if (v1 != 0 or v2 != 0) and not radial.is_zero:
        n = max(n, winding + radial.max_harmonic)
    if v3 != 0 and not vertical.is_zero:
        n = max(n, vertical.max_harmonic)
    return n


def halfangle_critical_polynomial(radial: TrigPoly, vertical: TrigPoly,
                                  winding: int, epsilon, v,
                                  check_norm: bool = True) -> RealPoly:
    """Polynomial in w whose real roots are the critical points of the height.

    Substitutes cos t = 2w/(1+w^2), sin t = (1-w^2)/(1+w^2) into the
    derivative of the projected height and clears (1+w^2)^N, N the clearing
    power.  The chart covers one period minus the single point t = 3pi/2
    (w at infinity).  Degree is at most 2N.
    """
    if check_norm:
        check_perturbation_norm(radial, vertical)
    hp = projected_height_derivative(radial, vertical, winding, epsilon, v)
    n = halfangle_clearing_power(radial, vertical, winding, v)

    one_plus_w2 = RealPoly([1, 0, 1])
    # C_j = cos(jt)(1+w^2)^j and S_j = sin(jt)(1+w^2)^j as exact polynomials
    max_j = max([0, *hp.cos.keys(), *hp.sin.keys()])
    c_list = [RealPoly([1])]
    s_list = [RealPoly.zero()]
    two_w = RealPoly([0, 2])
    one_minus_w2 = RealPoly([1, 0, -1])
    for _ in range(max_j):
        c_prev, s_prev = c_list[-1], s_list[-1]
        c_list.append(two_w * c_prev - one_minus_w2 * s_prev)
        s_list.append(two_w * s_prev + one_minus_w2 * c_prev)

    total = RealPoly.zero()
    if hp.constant != 0:
        total = total + one_plus_w2 ** n * hp.constant
    for j, c in hp.cos.items():
        total = total + (c_list[j] * c) * one_plus_w2 ** (n - j)
    for j, s in hp.sin.items():
        total = total + (s_list[j] * s) * one_plus_w2 ** (n - j)
    return total
