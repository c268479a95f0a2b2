"""Truncated coefficient ring: power series in q, Laurent in t, exact rationals.

A :class:`QTSeries` keeps coefficients on the rectangle 0 <= qdeg < qmax,
tmin <= tdeg < tmax of its :class:`PrecisionProfile`; everything outside is
truncated.  :class:`XSeries` wraps a vector of QTSeries as a polynomial in a
formal degree variable x.  The Frobenius substitution q -> q^p,
t -> 1 - (1 - t)^p acts on QTSeries, with Laurent tails resummed through the
integer polynomial zeta solving (1/t - 1)^p = 1/t^p - 1 + p*zeta; tail terms
of index >= N carry valuation >= N and are dropped, so results are exact
mod p^N on the window.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial

from .scalars import as_fraction


class ProfileMismatchError(ValueError):
    pass


class NonTerminatingError(ValueError):
    """A series expansion whose powers never leave the truncation window."""


@dataclass(frozen=True)
class PrecisionProfile:
    """Truncation data: prime, p-adic digits, q and t windows, moment range."""

    p: int
    precision: int
    qmax: int
    tmin: int
    tmax: int
    nmax: int

    def __post_init__(self):
        if self.p < 2:
            raise ValueError("p must be a prime >= 2")
        if self.precision < 1 or self.qmax < 1 or self.nmax < 1:
            raise ValueError("precision, qmax and nmax must be >= 1")
        if not (self.tmin <= 0 < self.tmax):
            raise ValueError("t-window must satisfy tmin <= 0 < tmax")

    def frobenius_sound(self, nmax: int | None = None) -> bool:
        """True when the window keeps every pre-valuation-N Frobenius tail term.

        Frobenius on t^-m reaches degree -p*m - k*(p-1) at tail index k < N,
        so full soundness for moments up to ``nmax`` needs
        tmin <= -p*nmax - (N-1)(p-1).  Shallower windows stay exact on the
        degrees they keep (tails only move downward); they just truncate the
        deep end of the completed element.
        """
        n = self.nmax if nmax is None else nmax
        return self.tmin <= -self.p * n - (self.precision - 1) * (self.p - 1)

    def padded(self, lo: int = 0, hi: int = 0) -> "PrecisionProfile":
        """Widen the t-window; construction code computes on padded windows
        and re-truncates on return so that user-window coefficients are exact."""
        return PrecisionProfile(self.p, self.precision, self.qmax,
                                self.tmin - lo, self.tmax + hi, self.nmax)

    def contains(self, qdeg: int, tdeg: int) -> bool:
        return 0 <= qdeg < self.qmax and self.tmin <= tdeg < self.tmax


def _check_profiles(a: "QTSeries", b: "QTSeries"):
    if a.profile != b.profile:
        raise ProfileMismatchError(f"{a.profile} != {b.profile}")


@dataclass(frozen=True)
class QTSeries:
    """Window-truncated series: map (qdeg, tdeg) -> Fraction, zeros omitted.

    Values are immutable by convention; every operation returns a new series.
    """

    profile: PrecisionProfile
    coefficients: dict = field(default_factory=dict)

    # ---- constructors -------------------------------------------------
    @classmethod
    def zero(cls, profile):
        return cls(profile, {})

    @classmethod
    def monomial(cls, profile, qdeg, tdeg, coeff=1):
        c = as_fraction(coeff)
        if c == 0 or not profile.contains(qdeg, tdeg):
            return cls(profile, {})
        return cls(profile, {(qdeg, tdeg): c})

    @classmethod
    def constant(cls, profile, value):
        return cls.monomial(profile, 0, 0, value)

    @classmethod
    def one(cls, profile):
        return cls.constant(profile, 1)

    @classmethod
    def var_q(cls, profile):
        return cls.monomial(profile, 1, 0)

    @classmethod
    def var_t(cls, profile):
        return cls.monomial(profile, 0, 1)

    @classmethod
    def from_terms(cls, profile, terms):
        """Build from an iterable of (qdeg, tdeg, coeff), window-filtered."""
        d = {}
        for i, j, c in terms:
            c = as_fraction(c)
            if c and profile.contains(i, j):
                d[(i, j)] = d.get((i, j), Fraction(0)) + c
        return cls(profile, {k: v for k, v in d.items() if v})

    # ---- access --------------------------------------------------------
    def __getitem__(self, key) -> Fraction:
        return self.coefficients.get(key, Fraction(0))

    def is_zero(self) -> bool:
        return not self.coefficients

    def support(self):
        return sorted(self.coefficients)

    def t_valuation(self):
        """Smallest t-degree with a nonzero coefficient; None when zero."""
        if not self.coefficients:
            return None
        return min(j for (_, j) in self.coefficients)

    # ---- ring operations ------------------------------------------------
    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = QTSeries.constant(self.profile, other)
        _check_profiles(self, other)
        d = dict(self.coefficients)
        for k, v in other.coefficients.items():
            nv = d.get(k, Fraction(0)) + v
            if nv:
                d[k] = nv
            else:
                d.pop(k, None)
        return QTSeries(self.profile, d)

    __radd__ = __add__

    def __neg__(self):
        return QTSeries(self.profile, {k: -v for k, v in self.coefficients.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = QTSeries.constant(self.profile, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "QTSeries":
        c = as_fraction(c)
        if c == 0:
            return QTSeries.zero(self.profile)
        return QTSeries(self.profile, {k: v * c for k, v in self.coefficients.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        _check_profiles(self, other)
        a, b = self.coefficients, other.coefficients
        if len(a) > len(b):
            a, b = b, a
        prof = self.profile
        qmax, tmin, tmax = prof.qmax, prof.tmin, prof.tmax
        out: dict = {}
        for (i1, j1), v1 in a.items():
            for (i2, j2), v2 in b.items():
                i = i1 + i2
                if i >= qmax:
                    continue
                j = j1 + j2
                if not tmin <= j < tmax:
                    continue
                k = (i, j)
                nv = out.get(k)
                nv = v1 * v2 if nv is None else nv + v1 * v2
                if nv:
                    out[k] = nv
                else:
                    del out[k]
        return QTSeries(prof, out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            return invert(self) ** (-n)
        result = QTSeries.one(self.profile)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def shift_t(self, d: int) -> "QTSeries":
        """Multiply by t^d (exact monomial shift, window-filtered)."""
        prof = self.profile
        return QTSeries(prof, {(i, j + d): v for (i, j), v in self.coefficients.items()
                               if prof.contains(i, j + d)})

    def retruncate(self, profile: PrecisionProfile) -> "QTSeries":
        """Reinterpret on another window, dropping coefficients outside it."""
        return QTSeries(profile, {k: v for k, v in self.coefficients.items()
                                  if profile.contains(*k)})

    def q_slice(self, qdeg: int) -> dict:
        """Map tdeg -> coefficient at the given q-degree."""
        return {j: v for (i, j), v in self.coefficients.items() if i == qdeg}

    def min_valuation(self, p: int | None = None):
        """Smallest p-valuation over all coefficients (None when zero)."""
        from .scalars import valuation
        p = p if p is not None else self.profile.p
        vals = [valuation(v, p) for v in self.coefficients.values()]
        return min(vals) if vals else None

    # ---- serialization ---------------------------------------------------
    def to_json_obj(self) -> dict:
        prof = self.profile
        terms = [[i, j, f"{v.numerator}/{v.denominator}"]
                 for (i, j), v in sorted(self.coefficients.items())]
        return {"p": prof.p, "N": prof.precision, "Q": prof.qmax,
                "tmin": prof.tmin, "tmax": prof.tmax, "terms": terms}

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), separators=(",", ":"))

    @classmethod
    def from_json_obj(cls, obj: dict, nmax: int = 1) -> "QTSeries":
        prof = PrecisionProfile(obj["p"], obj["N"], obj["Q"],
                                obj["tmin"], obj["tmax"], nmax)
        return cls.from_terms(prof, ((i, j, Fraction(s)) for i, j, s in obj["terms"]))


# --------------------------------------------------------------------------
# unit structure: invert, log, exp
# --------------------------------------------------------------------------

def _nilpotence_cap(profile: PrecisionProfile) -> int:
    # products of k in-window monomials each with qdeg >= 1 or tdeg >= 1 die
    # once total qdeg >= qmax or total tdeg >= tmax; terms with tdeg <= 0 must
    # carry qdeg >= 1, so at most qmax of them appear in a surviving product
    return profile.qmax * (1 - min(profile.tmin, 0)) + profile.tmax + profile.qmax + 4


def _geometric(s: QTSeries, weights) -> QTSeries:
    """sum_k weights(k) * s^k for k >= 1, requiring nilpotence to truncation."""
    acc = QTSeries.zero(s.profile)
    term = QTSeries.one(s.profile)
    cap = _nilpotence_cap(s.profile)
    for k in range(1, cap + 1):
        term = term * s
        if term.is_zero():
            return acc
        w = weights(k)
        if w:
            acc = acc + term.scale(w)
    raise NonTerminatingError("series powers never leave the window")


def invert(a: QTSeries) -> QTSeries:
    """Inverse of a = t^d * u with u a leading-unit series; a * invert(a) = 1."""
    if a.is_zero():
        raise ZeroDivisionError("cannot invert the zero series")
    d = a.t_valuation()
    u = a.shift_t(-d) if d else a
    c0 = u[(0, 0)]
    if c0 == 0:
        raise ValueError("leading t-coefficient is not a unit")
    s = (u.scale(1 / c0) - 1)
    inv_u = (QTSeries.one(a.profile) + _geometric(s, lambda k: Fraction((-1) ** k))).scale(1 / c0)
    return inv_u.shift_t(-d) if d else inv_u


def log1p(s: QTSeries) -> QTSeries:
    """log(1 + s) for s with zero constant term, nilpotent to truncation."""
    if s[(0, 0)] != 0:
        raise ValueError("log1p needs a zero constant term")
    return _geometric(s, lambda k: Fraction((-1) ** (k + 1), k))


def exp0(s: QTSeries) -> QTSeries:
    """exp(s) for s with zero constant term, nilpotent to truncation."""
    if s[(0, 0)] != 0:
        raise ValueError("exp0 needs a zero constant term")
    acc = QTSeries.one(s.profile)
    term = QTSeries.one(s.profile)
    cap = _nilpotence_cap(s.profile)
    for k in range(1, cap + 1):
        term = term * s
        if term.is_zero():
            return acc
        acc = acc + term.scale(Fraction(1, factorial(k)))
    raise NonTerminatingError("series powers never leave the window")


def minus_log_one_minus_t(profile: PrecisionProfile) -> QTSeries:
    """-log(1 - t) = sum_{k>=1} t^k / k on the window."""
    return QTSeries.from_terms(profile, ((0, k, Fraction(1, k))
                                         for k in range(1, max(profile.tmax, 1))))


# --------------------------------------------------------------------------
# Frobenius substitution
# --------------------------------------------------------------------------

def zeta_tail_polynomial(profile: PrecisionProfile) -> QTSeries:
    """The integer polynomial in 1/t with (1/t - 1)^p = 1/t^p - 1 + p*zeta."""
    p = profile.p
    terms = {}
    for j in range(p + 1):
        terms[(0, -j)] = terms.get((0, -j), 0) + comb(p, j) * (-1) ** (p - j)
    terms[(0, -p)] = terms.get((0, -p), 0) - 1
    terms[(0, 0)] = terms.get((0, 0), 0) + 1
    return QTSeries.from_terms(profile, ((i, j, Fraction(v, p)) for (i, j), v in terms.items()))


class _FrobeniusTables:
    """Per (profile, p) caches of t-power images under the substitution."""

    def __init__(self, profile: PrecisionProfile):
        self.profile = profile
        p = profile.p
        sub = {(0, 0): Fraction(1)}
        for j in range(p + 1):
            k = (0, j)
            sub[k] = sub.get(k, Fraction(0)) - Fraction(comb(p, j) * (-1) ** j)
        self.t_image = QTSeries(profile, {k: v for k, v in sub.items() if v and profile.contains(*k)})
        self.zeta = zeta_tail_polynomial(profile)
        self._pos = {0: QTSeries.one(profile)}
        self._neg = {}

    def positive(self, m: int) -> QTSeries:
        if m not in self._pos:
            self._pos[m] = self.positive(m - 1) * self.t_image
        return self._pos[m]

    def negative(self, m: int) -> QTSeries:
        # t^-m maps to t^{-pm} * sum_{k<N} C(m+k-1, k) p^k zeta^k; dropped
        # k >= N terms all have valuation >= N
        if m not in self._neg:
            prof = self.profile
            p, N = prof.p, prof.precision
            if prof.tmin > -(p - 1):
                raise ValueError("t-window too shallow for the Frobenius tail polynomial")
            acc = QTSeries.zero(prof)
            zk = QTSeries.one(prof)
            for k in range(N):
                acc = acc + zk.scale(Fraction(comb(m + k - 1, k) * p ** k))
                if k < N - 1:
                    zk = zk * self.zeta
            self._neg[m] = acc.shift_t(-p * m)
        return self._neg[m]


_frob_cache: dict = {}


def _frob_tables(profile: PrecisionProfile) -> _FrobeniusTables:
    tables = _frob_cache.get(profile)
    if tables is None:
        tables = _frob_cache[profile] = _FrobeniusTables(profile)
    return tables


def frobenius(a: QTSeries) -> QTSeries:
    """Substitute q -> q^p and t -> 1 - (1 - t)^p, exactly mod p^N on the window."""
    prof = a.profile
    p = prof.p
    tables = _frob_tables(prof)
    out = QTSeries.zero(prof)
    by_t: dict = {}
    for (i, j), v in a.coefficients.items():
        if p * i >= prof.qmax:
            continue
        by_t.setdefault(j, []).append((i, v))
    for j, entries in by_t.items():
        img = tables.positive(j) if j >= 0 else tables.negative(-j)
        row = QTSeries(prof, {(p * i, 0): v for i, v in entries})
        out = out + img * row
    return out


# --------------------------------------------------------------------------
# series in a formal degree variable x with QTSeries coefficients
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class XSeries:
    """sum_{n=0}^{deg} c_n x^n with QTSeries coefficients (no 1/n! built in)."""

    profile: PrecisionProfile
    coefficients: tuple

    def __post_init__(self):
        for c in self.coefficients:
            if c.profile != self.profile:
                raise ProfileMismatchError("XSeries coefficient profile mismatch")

    @classmethod
    def from_list(cls, profile, coeffs):
        return cls(profile, tuple(coeffs))

    @classmethod
    def zero(cls, profile, deg):
        z = QTSeries.zero(profile)
        return cls(profile, tuple(z for _ in range(deg + 1)))

    @classmethod
    def var_x(cls, profile, deg):
        cs = [QTSeries.zero(profile) for _ in range(deg + 1)]
        if deg >= 1:
            cs[1] = QTSeries.one(profile)
        return cls(profile, tuple(cs))

    @property
    def deg(self) -> int:
        return len(self.coefficients) - 1

    def __getitem__(self, n: int) -> QTSeries:
        if 0 <= n < len(self.coefficients):
            return self.coefficients[n]
        return QTSeries.zero(self.profile)

    def __add__(self, other: "XSeries") -> "XSeries":
        if self.profile != other.profile:
            raise ProfileMismatchError("XSeries profile mismatch")
        n = max(self.deg, other.deg)
        return XSeries(self.profile, tuple(self[k] + other[k] for k in range(n + 1)))

    def __neg__(self):
        return XSeries(self.profile, tuple(-c for c in self.coefficients))

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other) -> "XSeries":
        if isinstance(other, (int, Fraction)):
            return XSeries(self.profile, tuple(c.scale(other) for c in self.coefficients))
        if isinstance(other, QTSeries):
            return XSeries(self.profile, tuple(c * other for c in self.coefficients))
        if self.profile != other.profile:
            raise ProfileMismatchError("XSeries profile mismatch")
        n = max(self.deg, other.deg)
        zero = QTSeries.zero(self.profile)
        out = [zero for _ in range(n + 1)]
        for i, ci in enumerate(self.coefficients):
            if ci.is_zero():
                continue
            for j, cj in enumerate(other.coefficients):
                if i + j > n:
                    break
                if cj.is_zero():
                    continue
                out[i + j] = out[i + j] + ci * cj
        return XSeries(self.profile, tuple(out))

    __rmul__ = __mul__

    def truncate_x(self, deg: int) -> "XSeries":
        cs = list(self.coefficients[: deg + 1])
        zero = QTSeries.zero(self.profile)
        while len(cs) < deg + 1:
            cs.append(zero)
        return XSeries(self.profile, tuple(cs))

    def retruncate(self, profile: PrecisionProfile) -> "XSeries":
        return XSeries(profile, tuple(c.retruncate(profile) for c in self.coefficients))

    def x_valuation(self):
        for n, c in enumerate(self.coefficients):
            if not c.is_zero():
                return n
        return None


def xmul(a: XSeries, b: XSeries) -> XSeries:
    return a * b


def _x_one(profile, deg):
    return XSeries(profile, (QTSeries.one(profile),)
                   + tuple(QTSeries.zero(profile) for _ in range(deg)))


def xinvert(f: XSeries) -> XSeries:
    """Inverse of an XSeries whose constant term is an invertible QTSeries."""
    inv0 = invert(f[0])
    g = f * inv0
    s = XSeries(f.profile, (QTSeries.zero(f.profile),) + g.coefficients[1:])
    acc = _x_one(f.profile, f.deg)
    term = acc
    for k in range(1, f.deg + 1):
        term = term * s
        acc = acc + term * Fraction((-1) ** k)
    return acc * inv0


def xlog(f: XSeries) -> XSeries:
    """log(f / x^d) for f = x^d * (unit), normalizing away the formal log x.

    The unit's leading QTSeries must be a unit with log-able constant part
    (the case for every exponential handled here).  The result has x-degree
    f.deg - d: that is how far f determines its own logarithm.
    """
    d = f.x_valuation()
    if d is None:
        raise ValueError("cannot take the log of the zero series")
    shifted = XSeries(f.profile, f.coefficients[d:])
    deg = shifted.deg
    c0 = shifted[0]
    u = c0 - 1
    lead_log = log1p(u) if not u.is_zero() else QTSeries.zero(f.profile)
    inv0 = invert(c0)
    g = shifted * inv0
    s = XSeries(f.profile, (QTSeries.zero(f.profile),) + g.coefficients[1:])
    acc = XSeries.zero(f.profile, deg)
    term = _x_one(f.profile, deg)
    for k in range(1, deg + 1):
        term = (term * s).truncate_x(deg)
        acc = acc + term * Fraction((-1) ** (k + 1), k)
    return acc + XSeries(f.profile, (lead_log,) + tuple(QTSeries.zero(f.profile)
                                                        for _ in range(deg)))


def xcompose_shift(f: XSeries, y: QTSeries) -> XSeries:
    """Taylor re-expansion f(x + y) for y of strictly positive t-valuation.

    Exact to the stored x-degree only insofar as f itself is complete; terms
    of f beyond its stored degree would contribute with t-valuation at least
    deg(f) + 1 - n to the x^n coefficient, so callers shift from a series
    extended far enough in x for the window they care about.
    """
    if not y.is_zero():
        if y[(0, 0)] != 0 or any(j <= 0 and i == 0 for (i, j) in y.coefficients):
            raise ValueError("shift requires strictly positive t-valuation at q^0")
    prof = f.profile
    ypow = [QTSeries.one(prof)]
    for _ in range(f.deg):
        ypow.append(ypow[-1] * y)
    out = []
    for m in range(f.deg + 1):
        acc = QTSeries.zero(prof)
        for k in range(m, f.deg + 1):
            c = f[k]
            if c.is_zero():
                continue
            acc = acc + c.scale(comb(k, m)) * ypow[k - m]
        out.append(acc)
    return XSeries(prof, tuple(out))


def xeval(f: XSeries, s: QTSeries) -> QTSeries:
    """Evaluate the polynomial-in-x at a QTSeries argument."""
    acc = QTSeries.zero(f.profile)
    power = QTSeries.one(f.profile)
    for n, c in enumerate(f.coefficients):
        if n:
            power = power * s
        if not c.is_zero():
            acc = acc + c * power
    return acc


def xreverse(f: XSeries) -> XSeries:
    """Compositional inverse g of f = x + O(x^2) with unit linear coefficient."""
    prof = f.profile
    if not f[0].is_zero():
        raise ValueError("reversion needs a zero constant term")
    inv1 = invert(f[1])
    n = f.deg
    zero = QTSeries.zero(prof)
    g = [zero, inv1] + [zero] * (n - 1)
    fpow = [None, f]
    for _ in range(2, n + 1):
        fpow.append(fpow[-1] * f)
    # g(f(x)) = x: at x^m the top term is g_m * c1^m, the rest is known
    inv1_pow = inv1
    for m in range(2, n + 1):
        inv1_pow = inv1_pow * inv1
        acc = zero
        for k in range(1, m):
            acc = acc + g[k] * fpow[k][m]
        g[m] = -acc * inv1_pow
    return XSeries(prof, tuple(g))
