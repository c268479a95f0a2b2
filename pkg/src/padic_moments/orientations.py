"""Todd and Witten exponentials, the sharp construction, nepers, and moments.

Moments are computed by two independent routes and the package treats their
exact agreement as its central oracle:

* generating_function: expand the (sharped) exponential as an XSeries, read
  nepers off its logarithm, then apply the weighted Frobenius difference.
* closed_form: assemble each index directly from Bernoulli numbers, forward
  finite differences with explicit Laurent tails, Eisenstein series, and
  derivatives of the sigma-function logarithm composed at w = -log(1 - t).

Both routes produce exact rationals on the same window, so equality is
checked with zero tolerance.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from math import comb, factorial

from .scalars import (NonIntegralError, as_fraction, bernoulli,
                      padic_log_partial_sum, valuation)
from .qt_series import (PrecisionProfile, QTSeries, XSeries, frobenius, invert,
                        minus_log_one_minus_t, xcompose_shift, xeval, xinvert,
                        xlog, xreverse)
from .elliptic import compose_at_minus_log, eisenstein_g, sigma_log, weierstrass_P


class OrientationKind(str, Enum):
    TODD = "todd"
    WITTEN = "witten"
    TODD_SHARP = "todd-sharp"
    WITTEN_SHARP = "witten-sharp"

    @property
    def sharped(self) -> bool:
        return self in (OrientationKind.TODD_SHARP, OrientationKind.WITTEN_SHARP)

    @property
    def base(self) -> "OrientationKind":
        if self is OrientationKind.TODD_SHARP:
            return OrientationKind.TODD
        if self is OrientationKind.WITTEN_SHARP:
            return OrientationKind.WITTEN
        return self


class SharpMismatchError(AssertionError):
    """The Taylor-shift and substitution computations of exp(x + y) disagreed,
    which signals a truncation bug rather than bad input."""


def internal_profile(profile: PrecisionProfile) -> PrecisionProfile:
    """Padded window used while building series, re-truncated on return.

    Poles reach t-degree -nmax, so products need the window floor at least
    that deep, and pole shifts during inversion/logarithm eat into the top,
    so the ceiling is raised by nmax as well.
    """
    tmin_i = min(profile.tmin, -profile.nmax) - 2
    tmax_i = profile.tmax + profile.nmax + 2
    return PrecisionProfile(profile.p, profile.precision, profile.qmax,
                            tmin_i, tmax_i, profile.nmax)


def _thread_count() -> int:
    raw = os.environ.get("PADIC_MOMENTS_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


# --------------------------------------------------------------------------
# exponentials and the sharp construction
# --------------------------------------------------------------------------

def _exp_scalar_x(profile: PrecisionProfile, deg: int, sign: int,
                  unit: QTSeries | None = None) -> XSeries:
    """e^{sign * x} (times an optional QTSeries unit) as an XSeries."""
    one = QTSeries.one(profile) if unit is None else unit
    return XSeries(profile, tuple(one.scale(Fraction(sign ** n, factorial(n)))
                                  for n in range(deg + 1)))


def _witten_product(profile: PrecisionProfile, deg: int,
                    u_neg: XSeries, u_pos: XSeries) -> XSeries:
    """(1 - u_neg) * prod_{1 <= j < Q} (1 - q^j u_neg)(1 - q^j u_pos)/(1 - q^j)^2."""
    one_x = XSeries(profile, (QTSeries.one(profile),)
                    + tuple(QTSeries.zero(profile) for _ in range(deg)))
    res = one_x - u_neg
    for j in range(1, profile.qmax):
        qj = QTSeries.monomial(profile, j, 0)
        res = res * (one_x - u_neg * qj)
        res = res * (one_x - u_pos * qj)
        inv = invert(QTSeries.one(profile) - qj)
        res = res * (inv * inv)
    return res


def exponential(kind: OrientationKind, profile: PrecisionProfile,
                deg: int | None = None) -> XSeries:
    """Exponential series of the orientation: zero constant term, linear term 1.

    Todd is 1 - e^-x; Witten multiplies in the theta-quotient factors
    (1 - e^-x q^j)(1 - e^x q^j)/(1 - q^j)^2 for 1 <= j < Q.
    """
    kind = OrientationKind(kind)
    if deg is None:
        deg = profile.nmax
    if kind.base is OrientationKind.TODD and not kind.sharped:
        one_x = XSeries(profile, (QTSeries.one(profile),)
                        + tuple(QTSeries.zero(profile) for _ in range(deg)))
        return one_x - _exp_scalar_x(profile, deg, -1)
    if kind is OrientationKind.WITTEN:
        return _witten_product(profile, deg,
                               _exp_scalar_x(profile, deg, -1),
                               _exp_scalar_x(profile, deg, +1))
    raise ValueError("exponential() builds base orientations; use sharp() for sharped ones")


def _exp_shifted_substitution(kind: OrientationKind, profile: PrecisionProfile,
                              deg: int) -> XSeries:
    """exp(x + y) for y = -log(1 - t), via e^-x -> (1-t)e^-x, e^x -> e^x/(1-t)."""
    one_minus_t = QTSeries.one(profile) - QTSeries.var_t(profile)
    if kind.base is OrientationKind.TODD:
        one_x = XSeries(profile, (QTSeries.one(profile),)
                        + tuple(QTSeries.zero(profile) for _ in range(deg)))
        return one_x - _exp_scalar_x(profile, deg, -1, one_minus_t)
    return _witten_product(profile, deg,
                           _exp_scalar_x(profile, deg, -1, one_minus_t),
                           _exp_scalar_x(profile, deg, +1, invert(one_minus_t)))


def sharp(e: XSeries, kind: OrientationKind, check: bool = True) -> XSeries:
    """Sharped exponential e(x) * e(y) / e(x + y) with y = -log(1 - t).

    e(x + y) is computed by the variable substitution in the defining product
    and, when ``check`` is set, again by Taylor-shifting ``e``; the two must
    agree on every coefficient the shift determines (the x^m coefficient of
    the shift is complete up to t-degree deg(e) - m).
    """
    kind = OrientationKind(kind)
    profile = e.profile
    deg = e.profile.nmax
    exp_xy = _exp_shifted_substitution(kind, profile, deg)
    if check:
        y = minus_log_one_minus_t(profile)
        shifted = xcompose_shift(e, y).truncate_x(deg)
        for m in range(deg + 1):
            ceiling = e.deg - m + 1
            got, want = shifted[m], exp_xy[m]
            for (i, j) in set(got.coefficients) | set(want.coefficients):
                if j < ceiling and got[(i, j)] != want[(i, j)]:
                    raise SharpMismatchError(
                        f"exp(x+y) routes disagree at x^{m} q^{i} t^{j}: "
                        f"{got[(i, j)]} vs {want[(i, j)]}")
    exp_y = exp_xy[0]
    return (e.truncate_x(deg) * xinvert(exp_xy)) * exp_y


def sharped_exponential(kind: OrientationKind, profile: PrecisionProfile,
                        check: bool = True) -> XSeries:
    """Build the base exponential and sharp it in one step."""
    kind = OrientationKind(kind)
    base = exponential(kind.base, profile)
    if not kind.sharped:
        return base
    return sharp(base, kind.base, check=check)


# --------------------------------------------------------------------------
# nepers and finite differences
# --------------------------------------------------------------------------

def nepers(e: XSeries) -> list[QTSeries]:
    """N_n = n! [x^n] log(x / e(x)) for n = 1..deg; index 0 of the list is N_1.

    Exact for exponentials whose coefficients carry no t-poles (the base
    orientations).  For sharped exponentials prefer :func:`sharped_nepers`,
    which factors the logarithm so that poles only enter as exact monomial
    shifts and the padded window provably suffices.
    """
    lg = xlog(e)
    return [lg[n].scale(-factorial(n)) for n in range(1, e.deg + 1)]


def _log1p_x(s: XSeries, qval: int = 0) -> XSeries:
    """log(1 + s) for an XSeries with zero x^0 term (powers die at x-degree)."""
    deg = s.deg
    acc = XSeries.zero(s.profile, deg)
    term = _x_one_series(s.profile, deg)
    kmax = deg if qval == 0 else min(deg, (s.profile.qmax - 1) // qval + 1)
    for k in range(1, kmax + 1):
        term = term * s
        acc = acc + term * Fraction((-1) ** (k + 1), k)
    return acc


def _x_one_series(profile, deg):
    return XSeries(profile, (QTSeries.one(profile),)
                   + tuple(QTSeries.zero(profile) for _ in range(deg)))


def sharp_log_tail(kind: OrientationKind, profile: PrecisionProfile,
                   deg: int) -> XSeries:
    """log(e(x + y) / e(y)) with every pole entering as an exact t-shift.

    The principal factor is log(1 + (1-t)(1 - e^-x)/t), expanded with powers
    ((1-t)(1 - e^-x))^k computed on positive support and then shifted by
    t^-k; the Witten theta factors contribute one positive-support series
    logarithm per q-power.
    """
    kind = OrientationKind(kind)
    one_minus_t = QTSeries.one(profile) - QTSeries.var_t(profile)
    one_x = _x_one_series(profile, deg)
    base = (one_x - _exp_scalar_x(profile, deg, -1)) * one_minus_t
    # log1p(t^-1 * base) with exact shifted powers
    acc = XSeries.zero(profile, deg)
    power = _x_one_series(profile, deg)
    for k in range(1, deg + 1):
        power = power * base
        shifted = XSeries(profile, tuple(c.shift_t(-k) for c in power.coefficients))
        acc = acc + shifted * Fraction((-1) ** (k + 1), k)
    if kind.base is OrientationKind.TODD:
        return acc
    inv_omt = invert(one_minus_t)
    for j in range(1, profile.qmax):
        qj = QTSeries.monomial(profile, j, 0)
        for a, sign in ((one_minus_t, -1), (inv_omt, +1)):
            unit = invert(QTSeries.one(profile) - a * qj)
            arg = (one_x - _exp_scalar_x(profile, deg, sign)) * (a * qj * unit)
            acc = acc + _log1p_x(arg, qval=j)
    return acc


def sharped_nepers(kind: OrientationKind, profile: PrecisionProfile) -> list[QTSeries]:
    """Nepers of the (possibly sharped) orientation, soundly on the window."""
    kind = OrientationKind(kind)
    base = nepers(exponential(kind.base, profile, deg=profile.nmax + 1))
    base = base[: profile.nmax]
    if not kind.sharped:
        return base
    tail = sharp_log_tail(kind, profile, profile.nmax)
    return [base[n - 1] + tail[n].scale(factorial(n))
            for n in range(1, profile.nmax + 1)]


def finite_difference(n: int, m: int) -> int:
    """Forward difference Delta^m [r^n](0) = sum_j (-1)^{m-j} C(m,j) j^n."""
    if n < 0 or m < 0:
        raise ValueError("n and m must be >= 0")
    return sum((-1) ** (m - j) * comb(m, j) * j ** n for j in range(m + 1))


# --------------------------------------------------------------------------
# moment sequences
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class MomentSequence:
    """Indexed family M_1..M_nmax of window-truncated series, plus the limit
    term M_0 = p^-1 log c^{p-1} shared by every orientation.

    Construction asserts p-integrality of every kept coefficient, which is
    the theorem under test; failure raises NonIntegralError.
    """

    kind: OrientationKind
    c: Fraction
    profile: PrecisionProfile
    route: str
    entries: dict = field(default_factory=dict)
    m0: Fraction = Fraction(0)

    def __post_init__(self):
        offenders = []
        for n, series in sorted(self.entries.items()):
            for key, value in sorted(series.coefficients.items()):
                if valuation(value, self.profile.p) < 0:
                    offenders.append((n, key, value))
        if offenders:
            n, key, value = offenders[0]
            raise NonIntegralError(value, self.profile.p,
                                   f"M_{n} at q^{key[0]} t^{key[1]} "
                                   f"(+{len(offenders) - 1} more)")

    def __getitem__(self, n: int) -> QTSeries:
        if n == 0:
            return QTSeries.constant(self.profile, self.m0)
        return self.entries[n]

    @property
    def indices(self):
        return sorted(self.entries)

    def to_json_obj(self) -> dict:
        return {
            "kind": self.kind.value,
            "c": f"{self.c.numerator}/{self.c.denominator}",
            "route": self.route,
            "nmax": self.profile.nmax,
            "m0": f"{self.m0.numerator}/{self.m0.denominator}",
            "entries": {str(n): self.entries[n].to_json_obj() for n in self.indices},
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "MomentSequence":
        nmax = obj["nmax"]
        entries = {int(n): QTSeries.from_json_obj(e, nmax=nmax)
                   for n, e in obj["entries"].items()}
        profile = next(iter(entries.values())).profile if entries else None
        return cls(OrientationKind(obj["kind"]), Fraction(obj["c"]), profile,
                   obj["route"], entries, Fraction(obj["m0"]))


def check_unit(c: Fraction, profile: PrecisionProfile):
    """The twist constant must be a p-adic unit distinct from +-1 mod p^N."""
    c = as_fraction(c)
    p, N = profile.p, profile.precision
    if valuation(c, p) != 0:
        raise ValueError(f"c = {c} is not a {p}-adic unit")
    modulus = p ** N
    residue = (c.numerator * pow(c.denominator, -1, modulus)) % modulus
    if residue in (1 % modulus, (modulus - 1) % modulus):
        raise ValueError(f"c = {c} is congruent to +-1 mod {p}^{N}")
    return c


def _limit_moment(c: Fraction, profile: PrecisionProfile) -> Fraction:
    return padic_log_partial_sum(c ** (profile.p - 1), profile.p,
                                 profile.precision) / profile.p


def _moment_from_neper(neper: QTSeries, n: int, c: Fraction, p: int) -> QTSeries:
    cn = 1 - c ** n
    return neper.scale(cn) - frobenius(neper).scale(cn * Fraction(p) ** (n - 1))


def moments_from_nepers(neper_list, kind: OrientationKind, c,
                        profile: PrecisionProfile) -> MomentSequence:
    """Weighted Frobenius differences (1 - c^n)(N_n - p^{n-1} N_n(q^p, psi t))."""
    kind = OrientationKind(kind)
    c = check_unit(c, profile)
    entries = {}
    for idx, neper in enumerate(neper_list):
        n = idx + 1
        if n > profile.nmax:
            break
        entries[n] = _moment_from_neper(neper, n, c, profile.p).retruncate(profile)
    return MomentSequence(kind, c, profile, "generating_function", entries,
                          _limit_moment(c, profile))


def moment_sequence_generating(kind: OrientationKind, c,
                               profile: PrecisionProfile) -> MomentSequence:
    """Full generating-function pipeline: exponential, log, nepers, moments."""
    kind = OrientationKind(kind)
    inner = internal_profile(profile)
    return moments_from_nepers(sharped_nepers(kind, inner), kind, c, profile)


# ---- closed forms ----------------------------------------------------------

def _todd_sharp_pole_part(n: int, profile: PrecisionProfile) -> QTSeries:
    # sum_m (-1)^{m+1} Delta^m[r^n](0)/m * t^-m; the alternating weight is
    # what the series expansion of log(1 - (1 - e^x)/t) actually produces
    terms = []
    for m in range(1, n + 1):
        d = finite_difference(n, m)
        if d:
            terms.append((0, -m, Fraction((-1) ** (m + 1) * d, m)))
    return QTSeries.from_terms(profile, terms)


def closed_form_input(kind: OrientationKind, n: int, profile: PrecisionProfile,
                      sig=None, todd_variant: str = "full") -> QTSeries:
    """The series A_n with M_n = (1 - c^n)(A_n - p^{n-1} frobenius(A_n)).

    Todd: -B_n/n.  Witten: the weight-n Eisenstein series for even n, zero
    for odd.  Todd sharp adds the finite-difference Laurent polynomial.
    Witten sharp subtracts the composed sigma-log derivative, with the
    weight-2 correction -g_2 * (-log(1 - t)) appearing only at n = 1 and the
    Eisenstein summand dropping out at n = 2.
    """
    kind = OrientationKind(kind)
    if kind is OrientationKind.TODD:
        return QTSeries.constant(profile, -bernoulli(n) / n)
    if kind is OrientationKind.WITTEN:
        return eisenstein_g(n, profile) if n % 2 == 0 else QTSeries.zero(profile)
    if kind is OrientationKind.TODD_SHARP:
        pole = _todd_sharp_pole_part(n, profile)
        if todd_variant == "pole":
            return pole
        return pole + QTSeries.constant(profile, -bernoulli(n) / n)
    # Witten sharp
    if n == 1:
        g2 = eisenstein_g(2, profile)
        y = minus_log_one_minus_t(profile)
        p_minus1 = compose_at_minus_log(weierstrass_P(-1, profile, profile.tmax + 1, sig=sig),
                                        1, profile)
        return -(g2 * y) - p_minus1
    composed = compose_at_minus_log(weierstrass_P(n - 2, profile, profile.tmax + n, sig=sig),
                                    1, profile)
    out = -composed
    if n % 2 == 0 and n >= 4:
        out = out + eisenstein_g(n, profile)
    return out


def moments_closed_form(kind: OrientationKind, c, profile: PrecisionProfile,
                        todd_variant: str = "full") -> MomentSequence:
    """Direct per-index assembly from Bernoulli/finite-difference/elliptic data.

    ``todd_variant`` selects between the full Todd-sharp sequence (Laurent
    pole part plus the Bernoulli part, which is what the digit tables show)
    and the bare pole part, itself a moment sequence.
    """
    kind = OrientationKind(kind)
    if todd_variant not in ("full", "pole"):
        raise ValueError("todd_variant must be 'full' or 'pole'")
    c = check_unit(c, profile)
    inner = internal_profile(profile)
    sig = None
    if kind is OrientationKind.WITTEN_SHARP:
        sig = sigma_log(inner, inner.tmax + profile.nmax + 2)

    def build(n):
        a = closed_form_input(kind, n, inner, sig=sig, todd_variant=todd_variant)
        return n, _moment_from_neper(a, n, c, inner.p).retruncate(profile)

    indices = range(1, profile.nmax + 1)
    workers = _thread_count()
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=workers) as pool:
            entries = dict(pool.map(lambda n: build(n), indices))
    else:
        entries = dict(build(n) for n in indices)
    return MomentSequence(kind, c, profile, "closed_form", entries,
                          _limit_moment(c, profile))


def moment_sequence(kind: OrientationKind, c, profile: PrecisionProfile,
                    route: str = "closed", **kwargs) -> MomentSequence:
    """Route dispatcher: 'closed', 'genfn', or 'both' (assert equal, return closed)."""
    if route == "closed":
        return moments_closed_form(kind, c, profile, **kwargs)
    if route == "genfn":
        return moment_sequence_generating(kind, c, profile)
    if route == "both":
        closed = moments_closed_form(kind, c, profile, **kwargs)
        generating = moment_sequence_generating(kind, c, profile)
        for n in closed.indices:
            if closed[n] != generating[n]:
                raise AssertionError(f"route mismatch at M_{n}")
        return closed
    raise ValueError("route must be 'closed', 'genfn' or 'both'")


# --------------------------------------------------------------------------
# formal group law
# --------------------------------------------------------------------------

def fgl_add(e: XSeries, a: QTSeries, b: QTSeries) -> QTSeries:
    """a +_F b = e(log_e(a) + log_e(b)) with log_e the compositional inverse."""
    log_e = xreverse(e)
    return xeval(e, xeval(log_e, a) + xeval(log_e, b))
