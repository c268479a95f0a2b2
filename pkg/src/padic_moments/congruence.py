"""Test polynomials, the moment pairing, integrality reports, digit tables.

A rational polynomial that maps p-adic units into p-adic integers pairs with
a moment sequence through sum_n a_n M_n; the theorem under test says the
result is p-integral.  Failure shows up as a negative valuation (or a
NonIntegralError out of the digit renderer), never as a silent wrong value.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction

from .scalars import INFINITY, as_fraction, reduce_rational, valuation
from .qt_series import QTSeries
from .orientations import MomentSequence


@dataclass(frozen=True)
class TestPolynomial:
    """f(r) = sum_k coefficients[k] r^k with a unit-integrality certificate."""

    coefficients: dict
    label: str

    @classmethod
    def from_terms(cls, terms: dict, label: str) -> "TestPolynomial":
        clean = {int(k): as_fraction(v) for k, v in terms.items() if as_fraction(v) != 0}
        return cls(clean, label)

    def __call__(self, r) -> Fraction:
        r = as_fraction(r)
        return sum((c * r ** k for k, c in self.coefficients.items()), Fraction(0))

    def degree(self) -> int:
        return max(self.coefficients, default=0)

    def screen_integer_valued(self, p: int, precision: int) -> bool:
        """Necessary-condition screen: f(u) is p-integral for every unit
        residue u below p^(precision+2).

        Finite precision cannot certify integer-valuedness of arbitrary
        polynomials; a pass here is labeled as a screen, not a proof.
        """
        bound = p ** (precision + 2)
        for u in range(1, bound):
            if u % p == 0:
                continue
            if valuation(self(u), p) < 0:
                return False
        return True


def canonical_family(p: int, i: int, sharp: bool = False) -> TestPolynomial:
    """The captioned family of unit-integral test polynomials.

    Index -1 is the sentinel (r^p - r)/p.  For odd p, index i >= 0 gives
    p^-i (r^{(p-1)p^i} - 1); the ``sharp`` flag strengthens the denominator
    to p^-(i+1), the sharpest unit-integral normalization.  For p = 2, index
    i >= 1 gives 2^-(i+2) (r^{2^i} - 1), which is already sharpest.
    """
    if i == -1:
        return TestPolynomial.from_terms(
            {p: Fraction(1, p), 1: Fraction(-1, p)}, f"(r^{p} - r)/{p}")
    if p == 2:
        if i < 1:
            raise ValueError("the p = 2 family starts at index 1")
        e = 2 ** i
        denom = 2 ** (i + 2)
        return TestPolynomial.from_terms(
            {e: Fraction(1, denom), 0: Fraction(-1, denom)},
            f"(r^{e} - 1)/{denom}")
    if i < 0:
        raise ValueError("family index must be >= -1")
    e = (p - 1) * p ** i
    denom = p ** (i + 1 if sharp else i)
    return TestPolynomial.from_terms(
        {e: Fraction(1, denom), 0: Fraction(-1, denom)},
        f"(r^{e} - 1)/{denom}")


def pair(f: TestPolynomial, moments: MomentSequence) -> QTSeries:
    """sum_n a_n M_n; the constant coefficient pairs with the limit term M_0."""
    profile = moments.profile
    out = QTSeries.zero(profile)
    for k, a in sorted(f.coefficients.items()):
        if k == 0:
            out = out + QTSeries.constant(profile, a * moments.m0)
            continue
        if k not in moments.entries:
            raise ValueError(f"pairing needs M_{k} but the sequence stops at "
                             f"{max(moments.entries, default=0)}")
        out = out + moments[k].scale(a)
    return out


@dataclass(frozen=True)
class CongruenceReport:
    """Outcome of pairing one test polynomial against one moment sequence."""

    polynomial: str
    kind: str
    min_valuation: float
    offenders: tuple = ()
    screened: bool = True

    @property
    def passed(self) -> bool:
        return self.min_valuation >= 0 and not self.offenders

    def to_json_obj(self) -> dict:
        return {
            "polynomial": self.polynomial,
            "kind": self.kind,
            "min_valuation": None if self.min_valuation == INFINITY else self.min_valuation,
            "offenders": [[list(key), v] for key, v in self.offenders],
            "screened": self.screened,
            "passed": self.passed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), separators=(",", ":"))


def verify(f: TestPolynomial, moments: MomentSequence,
           screen: bool = True) -> CongruenceReport:
    """Pair and report the minimum p-valuation; failure is data, not an error."""
    p = moments.profile.p
    paired = pair(f, moments)
    offenders = []
    min_val = INFINITY
    for key, value in sorted(paired.coefficients.items()):
        v = valuation(value, p)
        min_val = min(min_val, v)
        if v < 0:
            offenders.append((key, v))
    screened = f.screen_integer_valued(p, moments.profile.precision) if screen else True
    return CongruenceReport(f.label, moments.kind.value, min_val,
                            tuple(offenders), screened)


# --------------------------------------------------------------------------
# digit tables
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class DigitTable:
    """Rectangular grid of base-p digit strings, most-significant first."""

    p: int
    digits: int
    row_labels: tuple
    col_labels: tuple
    cells: tuple = field(default_factory=tuple)  # tuple of row tuples

    def cell(self, row_label, col_label) -> str:
        return self.cells[self.row_labels.index(row_label)][self.col_labels.index(col_label)]

    def digit_column(self, col_label, digit_index: int) -> list[int]:
        """One digit position (0 = least significant) read down the rows."""
        j = self.col_labels.index(col_label)
        return [int(row[j][-1 - digit_index]) for row in self.cells]

    def to_rows(self):
        head = [""] + [str(c) for c in self.col_labels]
        body = [[str(r)] + list(row) for r, row in zip(self.row_labels, self.cells)]
        return [head] + body

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerows(self.to_rows())
        return buf.getvalue()

    def to_text(self) -> str:
        sub = str(self.p).translate(str.maketrans("0123456789", "₀₁₂₃₄₅₆₇₈₉"))
        rows = self.to_rows()
        rows = [rows[0]] + [[r[0]] + [c + sub for c in r[1:]] for r in rows[1:]]
        widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
        lines = ["  ".join(cellv.rjust(w) for cellv, w in zip(r, widths)) for r in rows]
        return "\n".join(lines) + "\n"


def _fmt_tcol(j: int) -> str:
    return f"t^{j}"


def digit_table(moments: MomentSequence, n_range, t_cols, digits: int | None = None,
                q_slice: int = 0) -> DigitTable:
    """Rows indexed by moment number, one q-degree slice (the default layout)."""
    p = moments.profile.p
    digits = moments.profile.precision if digits is None else digits
    rows = []
    labels = []
    for n in n_range:
        labels.append(f"M_{n}")
        rows.append(tuple(
            reduce_rational(moments[n][(q_slice, j)], p, digits,
                            f"M_{n} q^{q_slice} t^{j}").digit_string()
            for j in t_cols))
    return DigitTable(p, digits, tuple(labels), tuple(_fmt_tcol(j) for j in t_cols),
                      tuple(rows))


def digit_table_fixed_n(moments: MomentSequence, n: int, q_rows, t_cols,
                        digits: int | None = None) -> DigitTable:
    """Rows indexed by q-degree for one moment (the positive-t layout)."""
    p = moments.profile.p
    digits = moments.profile.precision if digits is None else digits
    rows = []
    labels = []
    series = moments[n]
    for qi in q_rows:
        labels.append(f"q^{qi}")
        rows.append(tuple(
            reduce_rational(series[(qi, j)], p, digits,
                            f"M_{n} q^{qi} t^{j}").digit_string()
            for j in t_cols))
    return DigitTable(p, digits, tuple(labels), tuple(_fmt_tcol(j) for j in t_cols),
                      tuple(rows))


def periodicity_check(table: DigitTable, digit_index: int, period: int) -> bool:
    """Exact repetition of one digit position down every column of the table."""
    for col in table.col_labels:
        column = table.digit_column(col, digit_index)
        for r in range(len(column) - period):
            if column[r] != column[r + period]:
                return False
    return True


def expected_digit_period(p: int, digit_index: int) -> int:
    """Digit-column periods stated by the table captions.

    Odd p: digit i repeats with period (p-1)p^i.  p = 2: digits 0..2 repeat
    with period 2, after which digit i repeats with period 2^(i-1).
    """
    if p == 2:
        return 2 if digit_index <= 2 else 2 ** (digit_index - 1)
    return (p - 1) * p ** digit_index
