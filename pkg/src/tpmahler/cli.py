"""Command-line front end: ``tpmahler <command> [options]``.

Exit codes: 0 success, 1 invalid configuration, 2 precondition violation
(e.g. |alpha| >= 1), 3 invariant failure (details on stderr).

Output goes to ``--output`` if given, else to a file in the directory named
by ``$TPMAHLER_OUT_DIR`` if set, else to stdout.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from .arith import format_rational, is_prime, to_rational
from .auxiliary import (
    SchemeError,
    build_aux,
    build_aux_bivariate,
    decay_experiment,
    height_ledger,
    ledger_sweep,
    regularity_check,
    verify_bivariate_vanishing,
)
from .coeffs import (
    GOLDEN_PRIMES,
    Algorithm,
    CheckReport,
    CoeffTable,
    CSVFormatError,
    check_functional_equation,
    check_p_integrality,
    check_vanishing,
    gen_cauchy_recurrence,
    gen_diff_recurrence,
    generate,
    golden_table,
    tables_from_csv,
)
from .evaluate import (
    EVAL_CSV_HEADER,
    Method,
    Point,
    boundary_probe,
    evaluate,
    iterate_functional_check,
    iterate_identity_check,
)

OUT_DIR_ENV = "TPMAHLER_OUT_DIR"
COMMANDS = ("coeffs", "verify", "eval", "iterate", "probe", "aux", "decay", "ledger",
            "regularity", "compare")
DEFAULT_RADII = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,0.99"

EXIT_OK, EXIT_CONFIG, EXIT_PRECONDITION, EXIT_INVARIANT = 0, 1, 2, 3


class ConfigError(Exception):
    pass


class PreconditionError(Exception):
    pass


class InvariantError(Exception):
    def __init__(self, message: str, payload: str = ""):
        super().__init__(message)
        self.payload = payload


@dataclass
class RunConfig:
    command: str
    p: int = 2
    N: int = 100
    P: int = 3
    kmax: int = 4
    alpha: Fraction | None = None
    alpha_im: Fraction = Fraction(0)
    precision_bits: int = 256
    algorithm: Algorithm = Algorithm.DIFF_RECURRENCE
    output_path: str | None = None
    format: str = "csv"
    method: Method = Method.PRODUCT
    terms: int | None = None
    form: str = "stated"
    root_order: int = 1
    radii: list[Fraction] = field(default_factory=list)
    m: int = 1
    sweep: list[int] = field(default_factory=list)
    h_T: float = 0.0
    digits: int = 30
    paths: list[str] = field(default_factory=list)

    @property
    def point(self) -> Point:
        return Point(self.alpha, self.alpha_im)


def _parse_int_list(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tpmahler", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, *, alpha=False):
        sp.add_argument("--p", type=int, default=2, help="prime (default 2)")
        sp.add_argument("--output", "-o", dest="output_path", default=None)
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        if alpha:
            sp.add_argument("--alpha", required=True, help="rational or decimal, e.g. 1/2 or 0.9")
            sp.add_argument("--alpha-im", default="0", help="imaginary part (default 0)")
        sp.add_argument("--prec", dest="precision_bits", type=int, default=256)
        sp.add_argument("--digits", type=int, default=30, help="significant digits in numeric output")
        return sp

    sp = common(sub.add_parser("coeffs", help="Taylor coefficients t_p(0..N)"))
    sp.add_argument("--n", "--N", dest="N", type=int, default=100)
    sp.add_argument("--algorithm", default="diff", help="logexp | cauchy | diff")

    sp = common(sub.add_parser("verify", help="invariant suites on t_p(0..N)"))
    sp.add_argument("--n", "--N", dest="N", type=int, default=100)

    sp = common(sub.add_parser("eval", help="certified value of T_p(alpha)"), alpha=True)
    sp.add_argument("--method", default="product", help="product | series | logseries")
    sp.add_argument("--terms", type=int, default=None)

    sp = common(sub.add_parser("iterate", help="orbit identities along alpha^(p^k)"), alpha=True)
    sp.add_argument("--kmax", type=int, default=4)
    sp.add_argument("--form", choices=("stated", "root", "step"), default="stated")

    sp = common(sub.add_parser("probe", help="growth toward the unit circle"))
    sp.add_argument("--root-order", type=int, default=1)
    sp.add_argument("--radii", default=DEFAULT_RADII)

    sp = common(sub.add_parser("aux", help="build an auxiliary scheme"))
    sp.add_argument("--P", type=int, default=3)
    sp.add_argument("--m", type=int, choices=(1, 2), default=1, help="number of variables")

    sp = common(sub.add_parser("decay", help="|E_P| along the orbit of alpha"), alpha=True)
    sp.add_argument("--P", type=int, default=3)
    sp.add_argument("--kmax", type=int, default=4)

    sp = common(sub.add_parser("ledger", help="height bounds versus analytic decay"), alpha=True)
    sp.add_argument("--P", type=int, default=3)
    sp.add_argument("--kmax", type=int, default=6)
    sp.add_argument("--sweep", default=None, help="P values, e.g. 2..8; prints ratio per P")
    sp.add_argument("--h-T", dest="h_T", type=float, default=0.0)

    sp = common(sub.add_parser("regularity", help="denominators along the orbit"), alpha=True)
    sp.add_argument("--kmax", type=int, default=10)

    sp = sub.add_parser("compare", help="diff two coefficient CSV files")
    sp.add_argument("paths", nargs=2)
    sp.add_argument("--output", "-o", dest="output_path", default=None)
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    return ap


def make_config(ns: argparse.Namespace) -> RunConfig:
    """Validate every parameter before anything is computed."""
    cfg = RunConfig(ns.command)
    for name in ("output_path", "format", "paths"):
        if hasattr(ns, name):
            setattr(cfg, name, getattr(ns, name))
    if cfg.command == "compare":
        return cfg
    cfg.p = ns.p
    if not is_prime(cfg.p):
        raise ConfigError(f"--p {cfg.p} is not prime")
    cfg.precision_bits = ns.precision_bits
    if not 16 <= cfg.precision_bits <= 1 << 16:
        raise ConfigError("--prec must lie in [16, 65536]")
    cfg.digits = ns.digits
    if cfg.digits < 1:
        raise ConfigError("--digits must be positive")
    if hasattr(ns, "N"):
        cfg.N = ns.N
        if cfg.N < 0:
            raise ConfigError("--n must be >= 0")
    if hasattr(ns, "algorithm"):
        try:
            cfg.algorithm = Algorithm.parse(ns.algorithm)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    if hasattr(ns, "P"):
        cfg.P = ns.P
        if cfg.P < (1 if getattr(ns, "m", 1) == 2 else 2):
            raise ConfigError("--P too small")
    if hasattr(ns, "m"):
        cfg.m = ns.m
    if hasattr(ns, "kmax"):
        cfg.kmax = ns.kmax
        if cfg.kmax < 0 or (cfg.command == "ledger" and cfg.kmax < 1):
            raise ConfigError("--kmax out of range")
    if hasattr(ns, "alpha"):
        try:
            cfg.alpha = to_rational(ns.alpha)
            cfg.alpha_im = to_rational(ns.alpha_im)
        except (TypeError, ValueError, ZeroDivisionError):
            raise ConfigError(f"cannot parse alpha {ns.alpha!r} / {ns.alpha_im!r}") from None
        if cfg.command in ("decay", "ledger") and cfg.alpha_im:
            raise ConfigError(f"{cfg.command} needs a real rational alpha")
    if hasattr(ns, "method"):
        key = ns.method.strip().lower().replace("-", "").replace("_", "")
        table = {"product": Method.PRODUCT, "series": Method.SERIES_EXP, "seriesexp": Method.SERIES_EXP,
                 "logseries": Method.LOG_SERIES}
        if key not in table:
            raise ConfigError(f"unknown method {ns.method!r}")
        cfg.method = table[key]
        cfg.terms = ns.terms
        if cfg.terms is not None and cfg.terms < 0:
            raise ConfigError("--terms must be >= 0")
    if hasattr(ns, "form"):
        cfg.form = ns.form
    if hasattr(ns, "root_order"):
        cfg.root_order = ns.root_order
        if cfg.root_order < 0:
            raise ConfigError("--root-order must be >= 0")
        try:
            cfg.radii = [to_rational(r.strip()) for r in ns.radii.split(",") if r.strip()]
        except (TypeError, ValueError, ZeroDivisionError):
            raise ConfigError(f"cannot parse radii {ns.radii!r}") from None
        if not cfg.radii:
            raise ConfigError("--radii is empty")
    if getattr(ns, "sweep", None):
        try:
            cfg.sweep = _parse_int_list(ns.sweep)
        except ValueError:
            raise ConfigError(f"cannot parse sweep {ns.sweep!r}") from None
        if len(cfg.sweep) < 3 or min(cfg.sweep) < 2:
            raise ConfigError("--sweep needs at least three P values, all >= 2")
    if hasattr(ns, "h_T"):
        cfg.h_T = ns.h_T
        if cfg.h_T < 0:
            raise ConfigError("--h-T must be >= 0")
    return cfg


# --------------------------------------------------------------------------
# output helpers


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _json(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _n(x, digits) -> str:
    return "nan" if x is None else mpmath.nstr(x, digits)


def _require_disk(cfg: RunConfig, *, punctured: bool = False) -> None:
    a2 = cfg.point.abs2
    if a2 >= 1:
        raise PreconditionError(f"|alpha| >= 1 (alpha = {cfg.point})")
    if punctured and a2 == 0:
        raise PreconditionError("alpha must be nonzero")


def _default_name(cfg: RunConfig) -> str:
    parts = [cfg.command, f"p{cfg.p}"]
    if cfg.command in ("coeffs", "verify"):
        parts.append(f"n{cfg.N}")
    if cfg.command in ("aux", "decay", "ledger"):
        parts.append(f"P{cfg.P}")
    if cfg.alpha is not None:
        a = format_rational(cfg.alpha).replace("/", "_").replace("-", "m")
        parts.append(f"a{a}")
    return "_".join(parts) + "." + cfg.format


# --------------------------------------------------------------------------
# commands


def cmd_coeffs(cfg: RunConfig) -> str:
    tab = generate(cfg.p, cfg.N, cfg.algorithm)
    if cfg.p in GOLDEN_PRIMES:
        gold = golden_table()[cfg.p]
        bad = [n for n in range(min(cfg.N, len(gold) - 1) + 1) if tab.t[n] != gold[n]]
        if bad:
            raise InvariantError(f"golden-table mismatch at n = {bad}")
    return _json(tab.to_json()) if cfg.format == "json" else tab.to_csv()


def cmd_verify(cfg: RunConfig) -> str:
    tabs = {a: generate(cfg.p, cfg.N, a) for a in Algorithm}
    tab = tabs[Algorithm.DIFF_RECURRENCE]
    reports = [check_vanishing(tab), check_p_integrality(tab), check_functional_equation(tab)]
    ref = tab.t
    diff = [n for n in range(cfg.N + 1) if any(t.t[n] != ref[n] for t in tabs.values())]
    reports.append(CheckReport("cross_algorithm", not diff, cfg.N + 1, [(n, "") for n in diff]))
    rows = [(r.name, str(r.passed).lower(), r.checked, len(r.violations),
             "" if r.first_violation is None else r.first_violation) for r in reports]
    if cfg.format == "json":
        out = _json({"p": cfg.p, "N": cfg.N, "suites": [
            {"suite": a, "passed": b == "true", "checked": c, "violations": d,
             "first_violation": e if e != "" else None} for a, b, c, d, e in rows]})
    else:
        out = _csv(("suite", "passed", "checked", "violations", "first_violation"), rows)
    failed = [r for r in reports if not r.passed]
    if failed:
        detail = "; ".join(f"{r.name}: n = {[v[0] for v in r.violations[:20]]}" for r in failed)
        raise InvariantError(f"invariant failure: {detail}", out)
    return out


def cmd_eval(cfg: RunConfig) -> str:
    _require_disk(cfg)
    rep = evaluate(cfg.p, cfg.point, cfg.method, cfg.precision_bits, cfg.terms)
    row = rep.csv_row(cfg.digits)
    if cfg.format == "json":
        return _json(dict(zip(EVAL_CSV_HEADER, row)))
    return _csv(EVAL_CSV_HEADER, [row])


def cmd_iterate(cfg: RunConfig) -> str:
    _require_disk(cfg)
    if cfg.form == "step":
        rows = iterate_functional_check(cfg.p, cfg.point, cfg.kmax, cfg.precision_bits)
    else:
        rows = iterate_identity_check(cfg.p, cfg.point, cfg.kmax, cfg.precision_bits, cfg.form)
    d = cfg.digits
    header = ("k", "lhs", "rhs", "residual", "radius", "ok")
    table = [(r.k, _n(r.lhs.real, d), _n(r.rhs.real, d), _n(r.residual, 6),
              _n(r.lhs.rad + r.rhs.rad, 6), str(r.ok).lower()) for r in rows]
    out = _json({"form": cfg.form, "rows": [dict(zip(header, t)) for t in table]}) \
        if cfg.format == "json" else _csv(header, table)
    bad = [r.k for r in rows if not r.ok]
    if bad:
        raise InvariantError(f"identity ({cfg.form} form) fails at k = {bad}", out)
    return out


def cmd_probe(cfg: RunConfig) -> str:
    try:
        tab = boundary_probe(cfg.p, cfg.root_order, cfg.radii, cfg.precision_bits)
    except AssertionError as exc:
        raise InvariantError(str(exc)) from None
    if cfg.format == "json":
        d = cfg.digits
        return _json({"p": cfg.p, "root_order": cfg.root_order, "monotone": tab.monotone,
                      "positive": tab.positive, "rows": [
                          {"r": format_rational(r.r), "log_T_real": _n(r.log_real.real, d),
                           "log_abs_T_ray": _n(r.log_ray.real, d)} for r in tab.rows]})
    return tab.to_csv(cfg.digits)


def _table_for(cfg: RunConfig, P: int) -> CoeffTable:
    return gen_diff_recurrence(cfg.p, P * P + P)


def cmd_aux(cfg: RunConfig) -> str:
    tab = _table_for(cfg, cfg.P)
    if cfg.m == 2:
        s = build_aux_bivariate(cfg.p, cfg.P, tab)
        other = gen_cauchy_recurrence(cfg.p, tab.N)
        first = verify_bivariate_vanishing(s, tab, other, cfg.P * cfg.P)
        if first is not None:
            raise InvariantError(f"bivariate scheme has a nonzero coefficient in total degree {first}")
        if cfg.format == "json":
            doc = s.to_json()
            doc.update(unknowns=s.unknowns, conditions=s.conditions, nullity=s.nullity)
            return _json(doc)
        return _csv(("j1", "j2", "l1", "l2", "d"), [k + (v,) for k, v in sorted(s.d.items())])
    s = build_aux(cfg.p, cfg.P, tab)
    if cfg.format == "json":
        return _json(s.to_json())
    return _csv(("j", "l", "d"), [(j, l, s.d[j][l]) for j in range(s.P + 1) for l in range(s.P + 1)])


def cmd_decay(cfg: RunConfig) -> str:
    _require_disk(cfg, punctured=True)
    s = build_aux(cfg.p, cfg.P, _table_for(cfg, cfg.P))
    rep = decay_experiment(s, cfg.alpha, cfg.kmax, cfg.precision_bits)
    if cfg.format == "json":
        d = cfg.digits
        return _json({"p": cfg.p, "P": cfg.P, "alpha": format_rational(cfg.alpha),
                      "log_C": _n(rep.log_C, d), "rows": [
                          {"k": r.k, "log_abs": _n(r.log_abs, d), "decay_exponent": _n(r.decay_exponent, d),
                           "calibrated_exponent": _n(r.calibrated_exponent, d)} for r in rep.rows]})
    return rep.to_csv(cfg.digits)


def cmd_ledger(cfg: RunConfig) -> str:
    _require_disk(cfg, punctured=True)
    if cfg.sweep:
        sw = ledger_sweep(cfg.p, cfg.alpha, cfg.sweep, k=1, kmax=cfg.kmax, h_T=cfg.h_T)
        ratios = sw.ratios()
        rows = [(P, f"{ratios[P]:.12g}", f"{sw.ledgers[P].c2:.12g}", sw.ledgers[P].crossover_P)
                for P in sorted(ratios)]
        if cfg.format == "json":
            slope, icept = sw.least_squares_slope()
            return _json({"p": cfg.p, "alpha": format_rational(cfg.alpha), "C0": sw.C0,
                          "slope": slope, "intercept": icept, "slope_error": sw.slope_error(),
                          "crossover_P": sw.crossover_P,
                          "rows": [dict(zip(("P", "ratio", "c2", "crossover_P"), r)) for r in rows]})
        return _csv(("P", "ratio", "c2", "crossover_P"), rows)
    led = height_ledger(cfg.p, cfg.alpha, cfg.P, cfg.kmax, tab=_table_for(cfg, cfg.P), h_T=cfg.h_T)
    if cfg.format == "json":
        return _json({"p": cfg.p, "alpha": format_rational(cfg.alpha), "P": cfg.P, "C0": led.C0,
                      "C1": led.C1, "c2": led.c2, "h_T": led.h_T, "crossover_P": led.crossover_P,
                      "rows": [{"k": r.k, "analytic": r.analytic, "arithmetic": r.arithmetic,
                                "c1_chain": r.c1_chain} for r in led.rows]})
    return led.to_csv()


def cmd_regularity(cfg: RunConfig) -> str:
    _require_disk(cfg, punctured=True)
    rep = regularity_check(cfg.p, cfg.point, cfg.kmax)
    rows = [(k, g, format_rational(d)) for k, (g, d) in enumerate(zip(rep.g_values, rep.denominators))]
    out = _json({"p": cfg.p, "passed": rep.passed, "rows": [dict(zip(("k", "g", "denominator"), r))
                                                            for r in rows]}) \
        if cfg.format == "json" else _csv(("k", "g", "denominator"), rows)
    if not rep.passed:
        raise InvariantError("vanishing denominator on the orbit", out)
    return out


def compare_tables(text_a: str, text_b: str) -> list[tuple[int, int, Fraction | None, Fraction | None]]:
    """Exact mismatches (p, n, expected, found); a missing entry shows as None.

    Only primes present in both files are compared, so a full golden file
    can be checked against a single-prime table.
    """
    a = tables_from_csv(text_a)
    b = tables_from_csv(text_b)
    shared = {p for p, _ in a} & {p for p, _ in b}
    out = []
    for key in sorted(k for k in set(a) | set(b) if k[0] in shared):
        x, y = a.get(key), b.get(key)
        if x != y:
            out.append((key[0], key[1], x, y))
    return out


def cmd_compare(cfg: RunConfig) -> str:
    texts = []
    for path in cfg.paths:
        try:
            with open(path, encoding="utf-8") as fh:
                texts.append(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    try:
        diff = compare_tables(*texts)
    except CSVFormatError as exc:
        raise ConfigError(f"parse error: {exc}") from None

    def fmt(x):
        return "" if x is None else format_rational(x)

    rows = [(p, n, fmt(x), fmt(y)) for p, n, x, y in diff]
    header = ("p", "n", "expected", "found")
    out = _json([dict(zip(header, r)) for r in rows]) if cfg.format == "json" else _csv(header, rows)
    if diff:
        raise InvariantError(f"{len(diff)} mismatching entries", out)
    return out


HANDLERS = {
    "coeffs": cmd_coeffs,
    "verify": cmd_verify,
    "eval": cmd_eval,
    "iterate": cmd_iterate,
    "probe": cmd_probe,
    "aux": cmd_aux,
    "decay": cmd_decay,
    "ledger": cmd_ledger,
    "regularity": cmd_regularity,
    "compare": cmd_compare,
}


def _emit(cfg: RunConfig, text: str) -> None:
    path = cfg.output_path
    if path is None and os.environ.get(OUT_DIR_ENV) and cfg.command != "compare":
        path = os.path.join(os.environ[OUT_DIR_ENV], _default_name(cfg))
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    d = os.path.dirname(path)
    if d:
        os.makedirs(d, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def run(cfg: RunConfig) -> int:
    try:
        text = HANDLERS[cfg.command](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PreconditionError as exc:
        print(f"precondition: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except InvariantError as exc:
        if exc.payload:
            _emit(cfg, exc.payload)
        print(f"invariant: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except SchemeError as exc:
        print(f"invariant: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (ValueError, TypeError) as exc:
        print(f"precondition: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    _emit(cfg, text)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = make_config(ns)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
