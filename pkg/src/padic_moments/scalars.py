"""Exact rational scalars, Bernoulli numbers, and p-adic reduction services.

Every coefficient in this package is a ``fractions.Fraction``; nothing here
ever rounds.  The p-adic side is deliberately minimal: residues mod p^N with
base-p digit access, valuations, and the p-adic logarithm of a unit.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb

INFINITY = float("inf")


class NonIntegralError(ArithmeticError):
    """Raised when a rational with p in its denominator reaches a mod-p^N context.

    This is the congruence-failure signal: the verifier treats it as a failed
    integrality assertion, not as a programming error.
    """

    def __init__(self, value: Fraction, p: int, where: str = ""):
        self.value = value
        self.p = p
        self.where = where
        msg = f"{value} is not {p}-integral"
        if where:
            msg += f" ({where})"
        super().__init__(msg)


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    return Fraction(x)


@dataclass(frozen=True)
class PadicInteger:
    """A residue mod p^N together with its base-p digit expansion.

    ``digits`` are least-significant first; rendering reverses them so that
    strings read most-significant first, e.g. residue 78 at p=3, N=4 prints
    as ``2220``.
    """

    p: int
    precision: int
    residue: int

    def __post_init__(self):
        if not (0 <= self.residue < self.p ** self.precision):
            raise ValueError("residue out of range for p^N")

    @property
    def digits(self) -> tuple[int, ...]:
        r = self.residue
        out = []
        for _ in range(self.precision):
            out.append(r % self.p)
            r //= self.p
        return tuple(out)

    def digit_string(self, subscript: bool = False) -> str:
        s = "".join(str(d) for d in reversed(self.digits))
        if subscript:
            sub = str(self.p).translate(str.maketrans("0123456789", "₀₁₂₃₄₅₆₇₈₉"))
            return s + sub
        return s

    def __str__(self):
        return self.digit_string(subscript=True)


def valuation(r: Fraction | int, p: int):
    """Exponent of p in r, or +infinity for r = 0."""
    r = as_fraction(r)
    if r == 0:
        return INFINITY
    v = 0
    n = r.numerator
    while n % p == 0:
        n //= p
        v += 1
    d = r.denominator
    while d % p == 0:
        d //= p
        v -= 1
    return v


def reduce_rational(r: Fraction | int, p: int, precision: int, where: str = "") -> PadicInteger:
    """Reduce a p-integral rational mod p^N, inverting the denominator.

    Raises :class:`NonIntegralError` when p divides the denominator.
    """
    r = as_fraction(r)
    modulus = p ** precision
    if r.denominator % p == 0:
        raise NonIntegralError(r, p, where)
    inv = pow(r.denominator, -1, modulus)
    return PadicInteger(p, precision, (r.numerator * inv) % modulus)


@lru_cache(maxsize=None)
def _bernoulli_upto(n: int) -> tuple[Fraction, ...]:
    # sum_{j<=m} C(m+1, j) B_j = 0 for m >= 1, solved for B_m
    out = [Fraction(1)]
    for m in range(1, n + 1):
        s = sum(comb(m + 1, j) * out[j] for j in range(m))
        out.append(Fraction(-s, m + 1))
    return tuple(out)


def bernoulli(n: int) -> Fraction:
    """Bernoulli number B_n with the n!-normalized convention (B_1 = -1/2)."""
    if n < 0:
        raise ValueError("n must be >= 0")
    return _bernoulli_upto(n)[n]


def padic_log_partial_sum(c: Fraction | int, p: int, precision: int) -> Fraction:
    """Exact partial sum of log(c) = sum (-1)^{k+1}(c-1)^k/k.

    Terms are accumulated until every omitted term has valuation >= precision.
    Requires valuation(c - 1, p) >= 1.
    """
    c = as_fraction(c)
    u = c - 1
    v = valuation(u, p)
    if u != 0 and v < 1:
        raise ValueError("padic log needs valuation(c - 1) >= 1")
    if u == 0:
        return Fraction(0)
    total = Fraction(0)
    uk = Fraction(1)
    k = 0
    while True:
        k += 1
        uk *= u
        # all terms from index k on have valuation >= k*v - log_p(k); stop
        # once that floor is provably >= precision for every later index
        if _tail_valuation_bound(k, v, p) >= precision:
            break
        total += Fraction((-1) ** (k + 1)) * uk / k
    return total


def _tail_valuation_bound(k: int, v: int, p: int) -> int:
    # min over j >= k of j*v - floor(log_p j); the expression is eventually
    # increasing, so scan a short horizon past the first minimum
    best = None
    j = k
    horizon = 0
    while horizon < 64:
        b = j * v - _ilog(j, p)
        if best is None or b < best:
            best = b
            horizon = 0
        else:
            horizon += 1
        j += 1
    return best


def _ilog(n: int, p: int) -> int:
    e = 0
    while p ** (e + 1) <= n:
        e += 1
    return e


def padic_log(c: Fraction | int, p: int, precision: int) -> PadicInteger:
    """p-adic logarithm of a unit c with c = 1 mod p, reported mod p^N."""
    return reduce_rational(padic_log_partial_sum(c, p, precision), p, precision, "padic_log")
