"""Command-line surface: moments, digit tables, congruence runs, self checks.

Exit codes: 0 success, 1 failed check, 2 configuration error, 3 a value that
should have been p-integral was not.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from math import factorial

from .scalars import NonIntegralError, valuation
from .qt_series import PrecisionProfile, QTSeries
from .elliptic import eisenstein_g, sigma_log
from .orientations import (MomentSequence, OrientationKind, exponential,
                           fgl_add, internal_profile, moment_sequence,
                           moments_closed_form, sharp)
from .congruence import canonical_family, digit_table, digit_table_fixed_n, verify

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_NONINTEGRAL = 3

# one-command reproduction of the published digit tables, keyed by p
TABLE_DEFAULTS = {
    3: {"prec": 4, "qmax": 1, "tmin": -16, "tmax": 1, "nmax": 38, "cols": (0, -6)},
    2: {"prec": 7, "qmax": 1, "tmin": -24, "tmax": 1, "nmax": 36, "cols": (0, -5)},
}
# positive-t layout used for the q-sliced tables
WITTEN_TABLE_DEFAULTS = {
    3: {"prec": 4, "qmax": 10, "tmin": -16, "tmax": 8, "nmax": 19,
        "cols": (6, 1), "qrows": (1, 9)},
    2: {"prec": 6, "qmax": 7, "tmin": -24, "tmax": 8, "nmax": 9,
        "cols": (6, 1), "qrows": (1, 6)},
}


def _parse_fraction(text: str) -> Fraction:
    return Fraction(text)


def _parse_span(text: str) -> tuple[int, int]:
    """Inclusive 'a:b' range; single value means a:a."""
    parts = text.split(":")
    if len(parts) == 1:
        v = int(parts[0])
        return v, v
    if len(parts) == 2:
        return int(parts[0]), int(parts[1])
    raise argparse.ArgumentTypeError(f"bad range {text!r}; use a:b")


def _span_values(span: tuple[int, int]) -> list[int]:
    a, b = span
    step = 1 if b >= a else -1
    return list(range(a, b + step, step))


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--p", type=int, default=3, help="prime (default 3)")
    parser.add_argument("--prec", type=int, default=None, help="p-adic digits N")
    parser.add_argument("--qmax", type=int, default=None, help="q-truncation Q")
    parser.add_argument("--tmin", type=int, default=None, help="lowest kept t-degree")
    parser.add_argument("--tmax", type=int, default=None, help="one past the highest kept t-degree")
    parser.add_argument("--nmax", type=int, default=None, help="highest moment index")
    parser.add_argument("--c", type=_parse_fraction, default=None,
                        help="twist unit c (default 1+p)")
    parser.add_argument("--kind", default="todd-sharp",
                        choices=[k.value for k in OrientationKind])
    parser.add_argument("--route", default="closed", choices=["closed", "genfn", "both"])
    parser.add_argument("--format", dest="fmt", default=None,
                        choices=["json", "csv", "text"])
    parser.add_argument("--out", default=None, help="output path (default stdout)")


def _build_profile(args, defaults: dict) -> PrecisionProfile:
    return PrecisionProfile(
        p=args.p,
        precision=args.prec if args.prec is not None else defaults["prec"],
        qmax=args.qmax if args.qmax is not None else defaults["qmax"],
        tmin=args.tmin if args.tmin is not None else defaults["tmin"],
        tmax=args.tmax if args.tmax is not None else defaults["tmax"],
        nmax=args.nmax if args.nmax is not None else defaults["nmax"],
    )


def _default_c(args) -> Fraction:
    return args.c if args.c is not None else Fraction(1 + args.p)


def _emit(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as handle:
            handle.write(text)


def _sequence(args, profile, kind=None) -> MomentSequence:
    kind = OrientationKind(args.kind if kind is None else kind)
    return moment_sequence(kind, _default_c(args), profile, route=args.route)


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def cmd_moments(args) -> int:
    defaults = TABLE_DEFAULTS.get(args.p, TABLE_DEFAULTS[3])
    defaults = dict(defaults, tmax=2, tmin=min(defaults["tmin"], -8), nmax=6)
    profile = _build_profile(args, defaults)
    seq = _sequence(args, profile)
    if (args.fmt or "json") != "json":
        raise ValueError("moments are serialized as JSON")
    _emit(json.dumps(seq.to_json_obj(), separators=(",", ":"), sort_keys=True) + "\n",
          args.out)
    return EXIT_OK


def _render_figure(table, path: str):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    from matplotlib import colormaps

    nrows, ncols = len(table.row_labels), len(table.col_labels)
    width = table.digits
    cmap = colormaps["viridis"]
    fig_w = max(3.0, 0.18 * (width + 1) * ncols + 1.2)
    fig_h = max(2.0, 0.22 * nrows + 0.8)
    fig, ax = plt.subplots(figsize=(fig_w, fig_h))
    ax.set_xlim(0, ncols)
    ax.set_ylim(0, nrows)
    ax.invert_yaxis()
    ax.set_xticks([i + 0.5 for i in range(ncols)])
    ax.set_xticklabels(table.col_labels)
    ax.set_yticks([r + 0.5 for r in range(nrows)])
    ax.set_yticklabels(table.row_labels, fontsize=7)
    ax.tick_params(length=0)
    for spine in ax.spines.values():
        spine.set_visible(False)
    for r, row in enumerate(table.cells):
        for ccol, cellv in enumerate(row):
            for k, ch in enumerate(cellv):
                shade = cmap(int(ch) / max(table.p - 1, 1))
                ax.text(ccol + (k + 1) / (width + 1), r + 0.5, ch,
                        ha="center", va="center", fontsize=7,
                        fontfamily="monospace", color=shade)
    ax.set_title(f"base-{table.p} digit table ({table.digits} digits)", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=160)
    plt.close(fig)


def cmd_table(args) -> int:
    kind = OrientationKind(args.kind)
    fixed_n = args.fixed_n
    if fixed_n is not None:
        defaults = WITTEN_TABLE_DEFAULTS.get(args.p, WITTEN_TABLE_DEFAULTS[3])
    else:
        defaults = TABLE_DEFAULTS.get(args.p, TABLE_DEFAULTS[3])
    profile = _build_profile(args, defaults)
    cols = _span_values(args.cols if args.cols else defaults["cols"])
    seq = _sequence(args, profile)
    if fixed_n is not None:
        qrows = _span_values(args.q_rows if args.q_rows else defaults["qrows"])
        table = digit_table_fixed_n(seq, fixed_n, qrows, cols, digits=args.digits)
    else:
        rows = _span_values(args.rows) if args.rows else list(range(1, profile.nmax + 1))
        table = digit_table(seq, rows, cols, digits=args.digits, q_slice=args.q_slice)
    fmt = args.fmt or "text"
    if fmt == "csv":
        _emit(table.to_csv(), args.out)
    elif fmt == "text":
        _emit(table.to_text(), args.out)
    else:
        raise ValueError("tables render as text or csv")
    if args.figure:
        _render_figure(table, args.figure)
    return EXIT_OK


def _corrupt(seq: MomentSequence) -> MomentSequence:
    """Test hook: damage one coefficient by 1/p, bypassing the integrality gate."""
    entries = dict(seq.entries)
    n = seq.profile.p if seq.profile.p in entries else max(entries)
    bad = entries[n] + QTSeries.constant(seq.profile, Fraction(1, seq.profile.p))
    entries[n] = bad
    corrupted = object.__new__(MomentSequence)
    for name, value in (("kind", seq.kind), ("c", seq.c), ("profile", seq.profile),
                        ("route", seq.route), ("entries", entries), ("m0", seq.m0)):
        object.__setattr__(corrupted, name, value)
    return corrupted


def cmd_verify(args) -> int:
    indices = [-1] + list(range(1, args.imax + 1))
    needed = max(canonical_family(args.p, i, sharp=args.sharp_family).degree()
                 for i in indices)
    profile = PrecisionProfile(
        p=args.p,
        precision=args.prec if args.prec is not None else (4 if args.p != 2 else 6),
        qmax=args.qmax if args.qmax is not None else 4,
        tmin=args.tmin if args.tmin is not None else TABLE_DEFAULTS.get(args.p, TABLE_DEFAULTS[3])["tmin"],
        tmax=args.tmax if args.tmax is not None else 2,
        nmax=max(args.nmax or 24, needed),
    )
    seq = _sequence(args, profile)
    if args.corrupt:
        seq = _corrupt(seq)
    reports = []
    for i in indices:
        f = canonical_family(args.p, i, sharp=args.sharp_family)
        reports.append(verify(f, seq))
    failed = [r for r in reports if not r.passed]
    fmt = args.fmt or "text"
    if fmt == "json":
        payload = [r.to_json_obj() for r in reports]
        _emit(json.dumps(payload, separators=(",", ":"), sort_keys=True) + "\n", args.out)
    else:
        lines = []
        for r in reports:
            status = "PASS" if r.passed else "FAIL"
            mv = "inf" if r.min_valuation == float("inf") else str(r.min_valuation)
            line = f"{status} {r.kind} vs {r.polynomial}: min valuation {mv}"
            if r.offenders:
                worst = ", ".join(f"q^{key[0]} t^{key[1]} (v={v})"
                                  for key, v in r.offenders[:4])
                line += f"; offenders {worst}"
            lines.append(line)
        _emit("\n".join(lines) + "\n", args.out)
    return EXIT_CHECK_FAILED if failed else EXIT_OK


def _selfcheck_items(p: int, qmax: int, nmax: int):
    c = Fraction(1 + p)
    prof = PrecisionProfile(p=p, precision=4, qmax=qmax, tmin=-3 * nmax - 8,
                            tmax=6, nmax=nmax)

    def routes_agree():
        for kind in (OrientationKind.TODD_SHARP, OrientationKind.WITTEN_SHARP):
            closed = moments_closed_form(kind, c, prof)
            generated = moment_sequence(kind, c, prof, route="genfn")
            for n in closed.indices:
                if closed[n] != generated[n]:
                    return False
        return True

    def sigma_identity():
        inner = PrecisionProfile(p, 4, qmax, -2, 2, 1)
        sig = sigma_log(inner, 11)
        for n in range(1, 11):
            expected = eisenstein_g(n, inner).scale(Fraction(-1, factorial(n))) \
                if n >= 3 else QTSeries.zero(inner)
            if sig[n] != expected:
                return False
        return True

    def sharp_dual_route():
        small = PrecisionProfile(p, 4, min(qmax, 3), -(nmax + 4), 5, min(nmax, 4))
        inner = internal_profile(small)
        for kind in (OrientationKind.TODD, OrientationKind.WITTEN):
            e = exponential(kind, inner, deg=inner.nmax + inner.tmax + 2)
            sharp(e, kind, check=True)
        return True

    def fgl_identities():
        small = PrecisionProfile(p, 4, 3, -6, 6, 6)
        e = exponential(OrientationKind.TODD, small, deg=8)
        a = QTSeries.var_t(small)
        b = QTSeries.var_q(small) + QTSeries.monomial(small, 0, 2, Fraction(1, 2))
        want = a + b - a * b
        if fgl_add(e, a, b) != want:
            return False
        if fgl_add(e, a, QTSeries.zero(small)) != a:
            return False
        return fgl_add(e, a, b) == fgl_add(e, b, a)

    def limit_moment_valuations():
        jmax = 2
        n_top = (p - 1) * p ** jmax
        prof0 = PrecisionProfile(p, 5, 1, -1, 1, n_top)
        seq = moments_closed_form(OrientationKind.TODD, c, prof0)
        m0 = seq.m0
        vals = [valuation(seq[(p - 1) * p ** j][(0, 0)] - m0, p) for j in range(jmax + 1)]
        return all(x < y for x, y in zip(vals, vals[1:]))

    return [("route-equivalence", routes_agree),
            ("sigma-eisenstein-identity", sigma_identity),
            ("sharp-dual-route", sharp_dual_route),
            ("formal-group-law", fgl_identities),
            ("limit-moment-valuations", limit_moment_valuations)]


def cmd_selfcheck(args) -> int:
    qmax = args.qmax if args.qmax is not None else 4
    nmax = args.nmax if args.nmax is not None else 6
    failed = False
    lines = []
    for name, check in _selfcheck_items(args.p, qmax, nmax):
        ok = check()
        failed = failed or not ok
        lines.append(f"{'PASS' if ok else 'FAIL'} {name}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_CHECK_FAILED if failed else EXIT_OK


# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="padic-moments",
        description="Exact p-adic moment sequences, Kummer congruence checks, "
                    "and base-p digit tables")
    sub = parser.add_subparsers(dest="command", required=True)

    p_moments = sub.add_parser("moments", help="compute a moment sequence as JSON")
    _add_common(p_moments)
    p_moments.set_defaults(func=cmd_moments)

    p_table = sub.add_parser("table", help="render a base-p digit table")
    _add_common(p_table)
    p_table.add_argument("--rows", type=_parse_span, default=None,
                         help="moment rows a:b (default 1:nmax)")
    p_table.add_argument("--cols", type=_parse_span, default=None,
                         help="t-degree columns a:b (default per p)")
    p_table.add_argument("--digits", type=int, default=None)
    p_table.add_argument("--q-slice", type=int, default=0,
                         help="q-degree of the tabulated slice (default 0)")
    p_table.add_argument("--fixed-n", type=int, default=None,
                         help="tabulate one moment with q-degree rows")
    p_table.add_argument("--q-rows", type=_parse_span, default=None,
                         help="q-degree rows for --fixed-n (default per p)")
    p_table.add_argument("--figure", default=None,
                         help="also render the table to this image file")
    p_table.set_defaults(func=cmd_table)

    p_verify = sub.add_parser("verify", help="run canonical congruence checks")
    _add_common(p_verify)
    p_verify.add_argument("--imax", type=int, default=2,
                          help="largest canonical family index (default 2)")
    p_verify.add_argument("--sharp-family", action="store_true",
                          help="use the sharpest integral normalization")
    p_verify.add_argument("--corrupt", action="store_true",
                          help="damage one coefficient first (negative-path test)")
    p_verify.set_defaults(func=cmd_verify)

    p_self = sub.add_parser("selfcheck", help="run the built-in oracle suite")
    _add_common(p_self)
    p_self.set_defaults(func=cmd_selfcheck)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NonIntegralError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONINTEGRAL
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
