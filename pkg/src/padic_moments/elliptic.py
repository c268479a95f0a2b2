"""q-expansions of Eisenstein series, the sigma function, and its log derivatives.

All objects live in the rescaled elliptic variable w (the period variable
times 2*pi*i), which keeps every coefficient rational: writing s(w) for the
rescaled sigma function, the classical weight dictionary reads
P(w) = -(d/dw)^2 log s(w) with the classical function equal to (2*pi*i)^2 P.
Composition at w = -log(1 - t) turns these into window-truncated Laurent
series in t.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial

from .scalars import bernoulli
from .qt_series import PrecisionProfile, QTSeries, invert


@lru_cache(maxsize=None)
def divisor_sigma(k: int, j: int) -> int:
    """Sum of k-th powers of the divisors of j."""
    if j < 1:
        raise ValueError("j must be >= 1")
    total = 0
    d = 1
    while d * d <= j:
        if j % d == 0:
            total += d ** k
            e = j // d
            if e != d:
                total += e ** k
        d += 1
    return total


def eisenstein_g(k: int, profile: PrecisionProfile) -> QTSeries:
    """Normalized weight-k Eisenstein series as a pure q-series.

    For even k this is -B_k/k + 2 * sum_j sigma_{k-1}(j) q^j; for odd k >= 3
    the lattice sum cancels pairwise and the series is zero.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if k % 2 == 1:
        return QTSeries.zero(profile)
    terms = [(0, 0, -bernoulli(k) / k)]
    terms += [(j, 0, Fraction(2 * divisor_sigma(k - 1, j))) for j in range(1, profile.qmax)]
    return QTSeries.from_terms(profile, terms)


@dataclass(frozen=True)
class WSeries:
    """Laurent series in w whose coefficients are pure q-series.

    ``coefficients`` maps w-degree -> QTSeries with t-support {0}; degrees run
    from -pole_order up to wmax - 1.
    """

    profile: PrecisionProfile
    wmax: int
    coefficients: dict

    @property
    def pole_order(self) -> int:
        neg = [k for k in self.coefficients if k < 0]
        return -min(neg) if neg else 0

    def __getitem__(self, k: int) -> QTSeries:
        return self.coefficients.get(k, QTSeries.zero(self.profile))

    def __add__(self, other: "WSeries") -> "WSeries":
        d = dict(self.coefficients)
        for k, v in other.coefficients.items():
            s = d.get(k)
            s = v if s is None else s + v
            if s.is_zero():
                d.pop(k, None)
            else:
                d[k] = s
        return WSeries(self.profile, min(self.wmax, other.wmax), d)

    def __neg__(self):
        return WSeries(self.profile, self.wmax, {k: -v for k, v in self.coefficients.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "WSeries":
        c = Fraction(c)
        if not c:
            return WSeries(self.profile, self.wmax, {})
        return WSeries(self.profile, self.wmax, {k: v.scale(c) for k, v in self.coefficients.items()})

    def __mul__(self, other: "WSeries") -> "WSeries":
        wmax = min(self.wmax, other.wmax)
        out: dict = {}
        for k1, v1 in self.coefficients.items():
            for k2, v2 in other.coefficients.items():
                k = k1 + k2
                if k >= wmax:
                    continue
                prod = v1 * v2
                if prod.is_zero():
                    continue
                cur = out.get(k)
                cur = prod if cur is None else cur + prod
                if cur.is_zero():
                    out.pop(k, None)
                else:
                    out[k] = cur
        return WSeries(self.profile, wmax, out)

    def differentiate(self) -> "WSeries":
        return WSeries(self.profile, self.wmax - 1,
                       {k - 1: v.scale(k) for k, v in self.coefficients.items() if k != 0})


def _w_log1p(s: WSeries) -> WSeries:
    """log(1 + s) for a WSeries with positive q-valuation (powers die at q^Q)."""
    acc = WSeries(s.profile, s.wmax, {})
    term = WSeries(s.profile, s.wmax, {0: QTSeries.one(s.profile)})
    for k in range(1, s.profile.qmax + 1):
        term = term * s
        if not term.coefficients:
            break
        acc = acc + term.scale(Fraction((-1) ** (k + 1), k))
    return acc


def _exp_w(scalar: int, profile: PrecisionProfile, wmax: int) -> WSeries:
    """e^{scalar * w} as a WSeries."""
    return WSeries(profile, wmax,
                   {k: QTSeries.constant(profile, Fraction(scalar ** k, factorial(k)))
                    for k in range(wmax)})


def sigma_log(profile: PrecisionProfile, wmax: int) -> WSeries:
    """log s(w) - log w, assembled from the product presentation of sigma.

    The pieces are w/2 + g_2 w^2/2, the principal factor log((1 - e^-w)/w)
    whose derivative is the Bernoulli generating function, and one
    log(1 - q^j e^-w) + log(1 - q^j e^w) - 2 log(1 - q^j) per j, each expanded
    by the generic series logarithm.
    """
    if wmax < 3:
        raise ValueError("wmax must be >= 3")
    g2 = eisenstein_g(2, profile)
    coeffs = {1: QTSeries.constant(profile, Fraction(1, 2)), 2: g2.scale(Fraction(1, 2))}
    acc = WSeries(profile, wmax, {k: v for k, v in coeffs.items() if not v.is_zero()})
    # log((1 - e^-w)/w): antiderivative of 1/(e^w - 1) - 1/w
    principal = {}
    for n in range(1, wmax):
        b = bernoulli(n)
        if b:
            principal[n] = QTSeries.constant(profile, b / (factorial(n) * n))
    acc = acc + WSeries(profile, wmax, principal)
    one = QTSeries.one(profile)
    for j in range(1, profile.qmax):
        qj = QTSeries.monomial(profile, j, 0)
        for sgn in (-1, 1):
            factor = _exp_w(sgn, profile, wmax)
            s = WSeries(profile, wmax, {k: -(v * qj) for k, v in factor.coefficients.items()})
            acc = acc + _w_log1p(s)
        # -2 log(1 - q^j)
        d = 1
        corr = QTSeries.zero(profile)
        while j * d < profile.qmax:
            corr = corr + QTSeries.monomial(profile, j * d, 0, Fraction(2, d))
            d += 1
        acc = acc + WSeries(profile, wmax, {0: corr} if not corr.is_zero() else {})
    return acc


def weierstrass_P(d: int, profile: PrecisionProfile, wmax: int,
                  sig: WSeries | None = None) -> WSeries:
    """Derivatives of -log s: index 0 is P = 1/w^2 - (log s - log w)'',
    positive d differentiates d more times, and d = -1 is the antiderivative
    -(d/dw) log s with no further integration constant.
    """
    if d < -1:
        raise ValueError("d must be >= -1")
    if sig is None:
        sig = sigma_log(profile, wmax + d + 2)
    if d == -1:
        body = -sig.differentiate()
        pole = WSeries(profile, body.wmax, {-1: QTSeries.constant(profile, -1)})
        return body + pole
    body = -sig.differentiate().differentiate()
    pole = WSeries(profile, body.wmax, {-2: QTSeries.one(profile)})
    out = body + pole
    for _ in range(d):
        out = out.differentiate()
    return out


def compose_at_minus_log(ws: WSeries, scale: int, profile: PrecisionProfile | None = None) -> QTSeries:
    """Substitute w = scale * (-log(1 - t)) = scale * (t + t^2/2 + ...).

    Poles factor through w = scale * t * v with v = sum_k t^k/(k+1) a unit,
    so w^-m becomes scale^-m t^-m v^-m, exactly on the window.
    """
    prof = ws.profile if profile is None else profile
    if ws.pole_order and prof.tmin > -ws.pole_order:
        raise ValueError("t-window too shallow for the pole of this series")
    v = QTSeries.from_terms(prof, ((0, k, Fraction(1, k + 1)) for k in range(0, max(prof.tmax, 1))))
    y = v.shift_t(1)
    vinv = invert(v)
    ypow = {0: QTSeries.one(prof)}
    vinvpow = {0: QTSeries.one(prof)}

    def pos(k):
        if k not in ypow:
            ypow[k] = pos(k - 1) * y
        return ypow[k]

    def neg(m):
        if m not in vinvpow:
            vinvpow[m] = neg(m - 1) * vinv
        return vinvpow[m]

    out = QTSeries.zero(prof)
    s = Fraction(scale)
    for k, coeff in sorted(ws.coefficients.items()):
        coeff = coeff.retruncate(prof) if coeff.profile != prof else coeff
        if coeff.is_zero():
            continue
        if k >= 0:
            img = pos(k).scale(s ** k)
        else:
            img = neg(-k).shift_t(k).scale(s ** k)
        out = out + coeff * img
    return out
