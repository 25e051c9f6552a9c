"""Exact arithmetic for polynomials and rational functions in one variable.

Rule-generated diagrams carry incidence entries that are integer polynomials
in the level index n.  All asymptotic hypotheses used by the ergodicity
criteria (divergence of entry sums, convergence of determinant defects,
vanishing of height ratios) then reduce to questions about rational
functions of n, which are decidable by exact degree and leading-coefficient
comparisons.  This module provides that decision layer.

Convention: a series verdict concerns sum over large n of term(n)**power for
an eventually positive rational term; finitely many initial terms never
matter and are ignored.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction

from .errors import ArgumentError, SchemaError


def _trim(coeffs):
    coeffs = list(coeffs)
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    return tuple(coeffs)


@dataclass(frozen=True)
class Poly:
    """Dense polynomial; coeffs[k] multiplies n**k, no trailing zeros."""

    coeffs: tuple = ()

    @staticmethod
    def const(c) -> "Poly":
        return Poly(_trim([Fraction(c)]))

    @staticmethod
    def var() -> "Poly":
        return Poly((Fraction(0), Fraction(1)))

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def degree(self) -> int:
        """Degree, with -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    @property
    def leading(self) -> Fraction:
        if self.is_zero:
            return Fraction(0)
        return self.coeffs[-1]

    def __add__(self, other: "Poly") -> "Poly":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return Poly(_trim(out))

    def __neg__(self) -> "Poly":
        return Poly(tuple(-c for c in self.coeffs))

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: "Poly") -> "Poly":
        if self.is_zero or other.is_zero:
            return Poly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Poly(_trim(out))

    def __pow__(self, k: int) -> "Poly":
        if k < 0:
            raise ArgumentError("negative polynomial power")
        result = Poly.const(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __call__(self, n) -> Fraction:
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * n + c
        return acc

    def eventual_sign(self) -> int:
        """Sign of p(n) for all large n."""
        if self.is_zero:
            return 0
        return 1 if self.leading > 0 else -1

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        parts = []
        for k in range(self.degree, -1, -1):
            c = self.coeffs[k]
            if c == 0:
                continue
            term = "n" if k == 1 else f"n^{k}" if k > 1 else ""
            if k == 0:
                parts.append(str(c))
            elif c == 1:
                parts.append(term)
            elif c == -1:
                parts.append(f"-{term}")
            else:
                parts.append(f"{c}*{term}")
        return " + ".join(parts).replace("+ -", "- ")


ZERO = Poly()
ONE = Poly.const(1)
N = Poly.var()


@dataclass(frozen=True)
class RatFn:
    """Quotient of polynomials; the denominator is not identically zero.

    No gcd reduction is performed: common factors cancel in values and do
    not affect degree differences, which is all the verdicts use.
    """

    num: Poly
    den: Poly = ONE

    def __post_init__(self):
        if self.den.is_zero:
            raise ArgumentError("zero denominator")

    @staticmethod
    def const(c) -> "RatFn":
        return RatFn(Poly.const(c))

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    def __add__(self, other: "RatFn") -> "RatFn":
        return RatFn(self.num * other.den + other.num * self.den,
                     self.den * other.den)

    def __sub__(self, other: "RatFn") -> "RatFn":
        return RatFn(self.num * other.den - other.num * self.den,
                     self.den * other.den)

    def __mul__(self, other: "RatFn") -> "RatFn":
        return RatFn(self.num * other.num, self.den * other.den)

    def __truediv__(self, other: "RatFn") -> "RatFn":
        if other.is_zero:
            raise ArgumentError("division by the zero function")
        return RatFn(self.num * other.den, self.den * other.num)

    def __call__(self, n) -> Fraction:
        d = self.den(n)
        if d == 0:
            raise ArgumentError(f"denominator vanishes at n={n}")
        return self.num(n) / d

    def degree_gap(self) -> int:
        """deg(denominator) - deg(numerator); large gaps mean fast decay."""
        return self.den.degree - self.num.degree

    def eventual_sign(self) -> int:
        return self.num.eventual_sign() * self.den.eventual_sign()

    def limit(self):
        """Limit at +infinity: a Fraction, 0, or None for +/- infinity."""
        gap = self.degree_gap()
        if self.is_zero or gap > 0:
            return Fraction(0)
        if gap == 0:
            return self.num.leading / self.den.leading
        return None

    def __str__(self) -> str:
        if self.den.degree == 0 and self.den.leading == 1:
            return str(self.num)
        return f"({self.num}) / ({self.den})"


def eventual_compare(a: RatFn, b: RatFn) -> int:
    """Sign of a(n) - b(n) for all large n."""
    return (a - b).eventual_sign()


def eventual_min(fns):
    """The member that is eventually smallest (exists: rational functions
    are eventually totally ordered)."""
    best = fns[0]
    for f in fns[1:]:
        if eventual_compare(f, best) < 0:
            best = f
    return best


def eventual_max(fns):
    best = fns[0]
    for f in fns[1:]:
        if eventual_compare(f, best) > 0:
            best = f
    return best


def series_converges(term: RatFn, power: Fraction = Fraction(1)):
    """Exact verdict for sum term(n)**power, term eventually nonnegative.

    Returns True (converges), False (diverges) or None when the term is
    eventually negative, which signals a caller bug rather than a series
    property.  Since term ~ C * n**(-gap) with integer gap, the boundary
    exponent 1 is never attained for power 1, so the answer is always
    decided for the cases this package generates.
    """
    if term.is_zero:
        return True
    if term.eventual_sign() < 0:
        return None
    return Fraction(term.degree_gap()) * power > 1


def ratio_test(ratio: RatFn):
    """Verdict for a positive series given term(n+1)/term(n) as a function.

    Uses the limit ratio, then Raabe's refinement when the ratio tends
    to 1.  Returns True (converges), False (diverges) or None (undecided,
    Raabe limit exactly 1).
    """
    lim = ratio.limit()
    if lim is None:
        return False if ratio.eventual_sign() > 0 else None
    if lim < 1:
        return True
    if lim > 1:
        return False
    raabe = (RatFn.const(1) - ratio) * RatFn(N)
    rl = raabe.limit()
    if rl is None:
        return True if raabe.eventual_sign() > 0 else False
    if rl > 1:
        return True
    if rl < 1:
        return False
    return None


def shift(p: Poly, offset: int = 1) -> Poly:
    """p(n + offset) as a polynomial in n."""
    return compose(p, N + Poly.const(offset))


def compose(p: Poly, inner: Poly) -> Poly:
    acc = Poly()
    for c in reversed(p.coeffs):
        acc = acc * inner + Poly.const(c)
    return acc


def integer_roots(p: Poly):
    """Full factorization into integer-rooted linear factors.

    Returns (leading coefficient, sorted roots) or None when some factor
    has no integer root.
    """
    if p.is_zero:
        return None
    denom_lcm = 1
    for c in p.coeffs:
        denom_lcm = denom_lcm * c.denominator // math.gcd(denom_lcm,
                                                          c.denominator)
    coeffs = [int(c * denom_lcm) for c in p.coeffs]
    lead = Fraction(coeffs[-1], denom_lcm)
    roots = []
    while len(coeffs) > 1:
        const = coeffs[0]
        if const == 0:
            root = 0
        else:
            root = None
            for cand in _divisors(abs(const)):
                for r in (cand, -cand):
                    if _poly_int_eval(coeffs, r) == 0:
                        root = r
                        break
                if root is not None:
                    break
            if root is None:
                return None
        coeffs = _synthetic_divide(coeffs, root)
        roots.append(root)
    return lead, sorted(roots)


def _divisors(n: int):
    out = []
    i = 1
    while i * i <= n:
        if n % i == 0:
            out.append(i)
            if i != n // i:
                out.append(n // i)
        i += 1
    return sorted(out)


def _poly_int_eval(coeffs, x):
    acc = 0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _synthetic_divide(coeffs, root):
    """coeffs / (x - root), exact; coeffs indexed by ascending power."""
    rev = list(reversed(coeffs))
    out = [rev[0]]
    for c in rev[1:-1]:
        out.append(c + root * out[-1])
    return list(reversed(out))


def product_value(f: RatFn, a: int, b: int):
    """Exact prod_{i=a}^{b} f(i), via telescoping of integer-rooted linear
    factors when possible (O(degree * root offsets) instead of O(b - a)).

    Returns None when the closed form is unavailable (non-integer roots,
    unequal leading coefficients or degrees).  A zero or pole inside the
    range is handled by direct evaluation of the short unsafe segment.
    """
    if b < a:
        return Fraction(1)
    num = integer_roots(f.num)
    den = integer_roots(f.den)
    if num is None or den is None:
        return None
    lead_n, roots_n = num
    lead_d, roots_d = den
    if len(roots_n) != len(roots_d) or lead_n != lead_d:
        return None
    top_root = max(roots_n + roots_d, default=a - 1)
    safe = max(a, top_root + 1)
    value = Fraction(1)
    for i in range(a, min(safe, b + 1)):
        value *= f(i)
        if value == 0:
            return Fraction(0)
    if safe > b:
        return value
    for r, s in zip(roots_n, roots_d):
        d = s - r
        if d == 0:
            continue
        if d > 0:
            j0, j1 = safe - s, b - s
            hi = math.prod(range(j1 + 1, j1 + d + 1))
            lo = math.prod(range(j0, j0 + d))
            value *= Fraction(hi, lo)
        else:
            j0, j1 = safe - r, b - r
            hi = math.prod(range(j1 + 1, j1 - d + 1))
            lo = math.prod(range(j0, j0 - d))
            value *= Fraction(lo, hi)
    return value


_TOKEN = re.compile(r"\s*(\d+|n|[-+*^()])")


def parse_expression(text: str) -> Poly:
    """Parse the diagram-file entry grammar into a polynomial.

    Grammar: expr := term (('+'|'-') term)*; term := factor ('*' factor)*;
    factor := int | 'n' | factor '^' int | '(' expr ')'.
    """
    if not isinstance(text, str):
        raise SchemaError(f"expression must be a string, got {text!r}")
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise SchemaError(f"bad character in expression {text!r} at {pos}")
        tokens.append(m.group(1))
        pos = m.end()
    tokens.append(None)
    idx = 0

    def peek():
        return tokens[idx]

    def take():
        nonlocal idx
        tok = tokens[idx]
        idx += 1
        return tok

    def parse_expr():
        node = parse_term()
        while peek() in ("+", "-"):
            op = take()
            rhs = parse_term()
            node = node + rhs if op == "+" else node - rhs
        return node

    def parse_term():
        node = parse_factor()
        while peek() == "*":
            take()
            node = node * parse_factor()
        return node

    def parse_factor():
        tok = take()
        if tok == "(":
            node = parse_expr()
            if take() != ")":
                raise SchemaError(f"unbalanced parentheses in {text!r}")
        elif tok == "n":
            node = N
        elif tok is not None and tok.isdigit():
            node = Poly.const(int(tok))
        else:
            raise SchemaError(f"unexpected token {tok!r} in {text!r}")
        while peek() == "^":
            take()
            exp = take()
            if exp is None or not exp.isdigit():
                raise SchemaError(f"exponent must be an integer in {text!r}")
            node = node ** int(exp)
        return node

    result = parse_expr()
    if peek() is not None:
        raise SchemaError(f"trailing tokens in expression {text!r}")
    return result
