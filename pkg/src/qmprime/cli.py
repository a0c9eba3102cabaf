"""Command-line front end.

Exit codes: 0 on success or a positive verdict, 1 when a certification or scan
is refuted (the witness is in the output), 2 on usage or input errors.
Numbers in JSON output are written as strings.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from qmprime.algebra import CycValue, DirichletCharacter, enumerate_characters, rational_to_str
from qmprime.detector import Progression, format_value, scan_detection, sign_changes
from qmprime.eisenstein import (
    EisensteinSpec,
    HSpec,
    InsufficientPrimesError,
    NonRealCoefficientError,
    ParityError,
    combination_from_json,
    combination_qexp,
    eisenstein_qexp,
    finite_prime_check,
    h_difference,
    h_qexp,
    prime_coefficient_polynomial,
    spanning_set,
)
from qmprime.macmahon import macmahon_table, verify_prime_identity
from qmprime.ntheory import primes_in_progression
from qmprime.qseries import QSeries, delta_series
from qmprime.wexpr import (
    MODES,
    DecompositionError,
    PreconditionError,
    certify_prime_detection,
    parse_terms,
    peel_off,
    zeta_exponents,
)

OUTPUT_DIR_ENV = "QMPRIME_OUTPUT_DIR"
EXIT_OK, EXIT_REFUTED, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# --- output --------------------------------------------------------------------


def _stringify(obj):
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, Fraction):
        return rational_to_str(obj)
    if isinstance(obj, dict):
        return {str(k): _stringify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_stringify(v) for v in obj]
    return str(obj)


def _output_path(path: str | None) -> Path | None:
    if path is None:
        return None
    p = Path(path)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    return p


def _emit(args, payload: dict, text=None, csv=None, default: str = "json") -> None:
    fmt = args.format or default
    if fmt == "json":
        body = json.dumps(_stringify(payload), indent=2) + "\n"
    elif fmt == "text" and text is not None:
        body = text() if callable(text) else text
    elif fmt == "csv" and csv is not None:
        body = csv() if callable(csv) else csv
    else:
        raise UsageError(f"{args.command}: format {fmt!r} is not available here")
    path = _output_path(args.output)
    if path is None:
        sys.stdout.write(body)
    else:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(body)


def _series_csv(f: QSeries) -> str:
    rows = ["n,coefficient"] + [f"{n},{format_value(f[n])}" for n in range(f.truncation + 1)]
    return "\n".join(rows) + "\n"


# --- input helpers -----------------------------------------------------------------


def _read_json(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def _character(label: str, modulus: int | None = None) -> DirichletCharacter:
    try:
        return DirichletCharacter.from_label(label, modulus)
    except ValueError as exc:
        raise UsageError(f"bad character {label!r}: {exc}") from None


def _progression(text: str) -> Progression:
    try:
        return Progression.parse(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def load_spec(obj, where: str = "spec"):
    """Interpret a spec document.

    Returns ``(series, combination, progression)``: exactly one of the first two
    is set; ``progression`` is the H-progression when the document names one.
    Accepted shapes: a q-series artifact (``coeffs``), ``{"h1", "h2"}``,
    ``{"h"}``, ``{"combination"}``, a bare combination list, an H spec
    (``k``, ``l``, ...) or an Eisenstein spec (``k`` or ``kind``).
    """
    try:
        if isinstance(obj, list):
            return None, combination_from_json(obj), None
        if not isinstance(obj, dict):
            raise ValueError("expected a JSON object or list")
        if "coeffs" in obj:
            return QSeries.from_json(obj), None, None
        if "h1" in obj:
            h1, h2 = HSpec.from_json(obj["h1"]), HSpec.from_json(obj["h2"])
            return None, h_difference(h1, h2), Progression(h1.m, h1.M)
        if "h" in obj or "l" in obj:
            h = HSpec.from_json(obj.get("h", obj))
            return None, h.constituents(), Progression(h.m, h.M)
        if "combination" in obj:
            return None, combination_from_json(obj["combination"]), None
        if "k" in obj or "kind" in obj:
            return None, [(CycValue.one(), EisensteinSpec.from_json(obj))], None
        raise ValueError("unrecognised spec document")
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"{where}: {exc}") from None


# --- subcommands -----------------------------------------------------------------------


def cmd_gen_eisenstein(args) -> int:
    if args.e2:
        spec = EisensteinSpec.e2(args.ell, args.delta, normalized=args.normalized)
    else:
        if args.k is None:
            raise UsageError("gen-eisenstein: --k is required unless --e2 is given")
        spec = EisensteinSpec(args.k, _character(args.chi, 1), _character(args.psi, 1), args.ell, args.delta)
    f = eisenstein_qexp(spec, args.nmax, strict=not args.formal)
    _emit(args, f.to_json(), text=f.to_text, csv=lambda: _series_csv(f))
    return EXIT_OK


def cmd_gen_h(args) -> int:
    h = HSpec(args.k, args.l, _character(args.chi, args.M), _character(args.psi, args.M), args.m)
    f = h_qexp(h, args.nmax)
    _emit(args, f.to_json(), text=f.to_text, csv=lambda: _series_csv(f))
    return EXIT_OK


def cmd_spanning_set(args) -> int:
    pairs = spanning_set(args.K, args.M, args.m, parity=args.parity)
    payload = {
        "K": args.K,
        "M": args.M,
        "m": args.m,
        "parity": args.parity,
        "count": len(pairs),
        "pairs": [{"h1": a.to_json(), "h2": b.to_json()} for a, b in pairs],
    }
    _emit(args, payload, text=lambda: "".join(f"{a} - {b}\n" for a, b in pairs))
    return EXIT_OK


def _certify_one(combination, prog: Progression, primes_arg: str, use_qexp: bool) -> dict:
    """Finite check; with ``use_qexp`` the values come from the q-expansion, not the polynomial."""
    poly = prime_coefficient_polynomial(combination, prog.m, prog.M)
    if primes_arg == "auto":
        primes = primes_in_progression(prog.m, prog.M, poly.degree_bound + 1)
    else:
        try:
            primes = [int(p) for p in primes_arg.split(",") if p.strip()]
        except ValueError:
            raise UsageError(f"--primes: expected 'auto' or a comma-separated list, got {primes_arg!r}") from None
    values = None
    if use_qexp and primes:
        values = combination_qexp(combination, max(primes)).__getitem__
    return finite_prime_check(poly, primes, values).to_json()


def cmd_certify(args) -> int:
    doc = _read_json(args.spec)
    docs = doc["pairs"] if isinstance(doc, dict) and "pairs" in doc else [doc]
    results = []
    for i, item in enumerate(docs):
        where = f"{args.spec}: pair {i}" if len(docs) > 1 else args.spec
        series, combination, prog = load_spec(item, where)
        if combination is None:
            raise UsageError(f"{where}: certify needs an Eisenstein-side spec, not a q-series")
        if args.progression:
            prog = _progression(args.progression)
        if prog is None:
            raise UsageError(f"{where}: --progression is required for this spec")
        try:
            results.append(_certify_one(combination, prog, args.primes, args.values == "qexp"))
        except InsufficientPrimesError as exc:
            raise UsageError(f"{where}: {exc}") from None
    refuted = [r for r in results if r["verdict"] != "detects"]
    payload = results[0] if len(results) == 1 else {"count": len(results), "refuted": len(refuted), "certificates": results}
    text = "".join(
        f"{r['verdict']}" + (f" at p={r['witness']['p']}" if r["witness"] else "") + "\n" for r in results
    )
    _emit(args, payload, text=text)
    return EXIT_REFUTED if refuted else EXIT_OK


def _terms(args):
    try:
        return parse_terms(args.terms)
    except ValueError as exc:
        raise UsageError(f"--terms: {exc}") from None


def cmd_decompose_w(args) -> int:
    W = _terms(args)
    exps = zeta_exponents(W)
    if exps:
        payload = {
            "input": W.to_json(),
            "verdict": "refuted",
            "exponents": {str(m): rational_to_str(B) for m, B in exps.items()},
        }
        _emit(args, payload, text=f"refuted: exponent vector {payload['exponents']}\n")
        return EXIT_REFUTED
    res = peel_off(W)
    cert = certify_prime_detection(W, "decomposition")
    if not res.complete or cert.decomposition is None:
        raise DecompositionError("peel-off stalled on an expression with empty exponent vector")
    payload = {
        "input": W.to_json(),
        "verdict": cert.verdict,
        "decomposition": [[rational_to_str(c), list(q)] for c, q in cert.decomposition],
        "iterations": res.iterations,
        "iteration_bound": res.bound,
    }
    text = "".join(f"{rational_to_str(c)} * W{tuple(q)}\n" for c, q in cert.decomposition)
    _emit(args, payload, text=text)
    return EXIT_OK if cert.detects else EXIT_REFUTED


def cmd_certify_w(args) -> int:
    W = _terms(args)
    modes = MODES if args.mode == "all" else (args.mode,)
    certs = {mode: certify_prime_detection(W, mode, args.prime_count) for mode in modes}
    verdicts = {c.verdict for c in certs.values()}
    verdict = verdicts.pop() if len(verdicts) == 1 else "inconsistent"
    payload = {"input": W.to_json(), "verdict": verdict, "certificates": {m: c.to_json() for m, c in certs.items()}}
    text = "".join(f"{m}: {c.verdict}\n" for m, c in certs.items()) + f"verdict: {verdict}\n"
    _emit(args, payload, text=text)
    return EXIT_OK if verdict == "detects" else EXIT_REFUTED


def cmd_macmahon(args) -> int:
    if args.verify_identity:
        report = verify_prime_identity(args.nmax)
        text = f"checked {report.checked} values of n in [2, {args.nmax}]: {len(report.failures)} failures\n"
        _emit(args, report.to_json(), text=text)
        return EXIT_OK if report.ok else EXIT_REFUTED
    table = macmahon_table(args.a, args.nmax)
    payload = {"a": args.a, "nmax": args.nmax, "values": list(table.values)}
    _emit(args, payload, csv=table.to_csv, text=table.to_csv, default="csv")
    return EXIT_OK


def _scan_source(spec_path: str, bound: int):
    series, combination, prog = load_spec(_read_json(spec_path), spec_path)
    if series is None:
        series = combination_qexp(combination, bound)
    return series, prog


def cmd_scan(args) -> int:
    source, prog = _scan_source(args.spec, args.bound)
    if args.progression:
        prog = _progression(args.progression)
    prog = prog or Progression.everything()
    level = args.level if args.level is not None else source.level
    report = scan_detection(source, prog, level, args.bound, strong=args.strong)
    text = f"{report.verdict}" + (" (vacuous)" if report.vacuous else "") + "\n"
    text += "".join(f"n={n} value={format_value(v)} expected {e}\n" for n, v, e in report.witnesses)
    _emit(args, report.to_json(), text=text)
    ok = report.strongly_detects if args.strong else report.detects
    return EXIT_OK if ok else EXIT_REFUTED


def cmd_sign_changes(args) -> int:
    if args.series == "delta":
        source = delta_series(args.bound)
    elif args.series == "e2":
        source = eisenstein_qexp(EisensteinSpec.e2(), args.bound)
    else:
        if not args.spec:
            raise UsageError("sign-changes: --series spec needs --spec FILE")
        source, _ = _scan_source(args.spec, args.bound)
    prog = _progression(args.progression) if args.progression else None
    report = sign_changes(source, prog, args.bound)
    text = f"{report.count} sign changes among {report.nonzero_terms} nonzero prime coefficients\n"
    _emit(args, report.to_json(), text=text)
    return EXIT_OK


def cmd_characters(args) -> int:
    chars = enumerate_characters(args.M)
    rows = []
    for chi in chars:
        rows.append(
            {
                "label": chi.label(),
                "index": chi.index,
                "order": chi.order,
                "parity": chi.parity,
                "conductor": chi.conductor,
                "primitive": chi.is_primitive,
                "values": [str(chi(n)) for n in range(args.M)],
            }
        )
    payload = {"M": args.M, "count": len(rows), "characters": rows}

    def csv():
        out = ["label,order,parity,conductor,primitive"]
        out += [f"{r['label']},{r['order']},{r['parity']},{r['conductor']},{str(r['primitive']).lower()}" for r in rows]
        return "\n".join(out) + "\n"

    def text():
        return "".join(f"{r['label']}: order {r['order']}, conductor {r['conductor']}, values [{', '.join(r['values'])}]\n" for r in rows)

    _emit(args, payload, text=text, csv=csv)
    return EXIT_OK


# --- parser ----------------------------------------------------------------------------------


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _nonneg(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qmprime", description="Prime detection with quasimodular forms and zeta products.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def command(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        p.add_argument("--format", choices=("json", "text", "csv"))
        p.add_argument("--output", help=f"output file (relative paths resolve under ${OUTPUT_DIR_ENV} if set)")
        return p

    p = command("gen-eisenstein", cmd_gen_eisenstein, "q-expansion of an Eisenstein series")
    p.add_argument("--k", type=_nonneg)
    p.add_argument("--chi", default="1:0", help="character label M:index")
    p.add_argument("--psi", default="1:0")
    p.add_argument("--nmax", type=_nonneg, required=True)
    p.add_argument("--ell", type=_nonneg, default=0)
    p.add_argument("--delta", type=_positive, default=1)
    p.add_argument("--e2", action="store_true", help="the weight 2 series 1 - 24 sum sigma(n) q^n")
    p.add_argument("--normalized", action="store_true", help="with --e2: -1/12 + 2 sum sigma(n) q^n")
    p.add_argument("--formal", action="store_true", help="allow parity-violating characters")

    p = command("gen-h", cmd_gen_h, "q-expansion of an H series")
    for flag in ("--k", "--l"):
        p.add_argument(flag, type=_positive, required=True)
    p.add_argument("--chi", required=True)
    p.add_argument("--psi", required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--M", type=_positive, required=True)
    p.add_argument("--nmax", type=_nonneg, required=True)

    p = command("spanning-set", cmd_spanning_set, "pairs of H series whose differences detect primes")
    p.add_argument("--K", type=_positive, required=True)
    p.add_argument("--M", type=_positive, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--parity", choices=("strict", "formal"), default="strict")

    p = command("certify", cmd_certify, "finite prime check of an Eisenstein-side combination")
    p.add_argument("--spec", required=True)
    p.add_argument("--progression", help="m/M")
    p.add_argument("--primes", default="auto")
    p.add_argument("--values", choices=("qexp", "poly"), default="qexp")

    p = command("decompose-w", cmd_decompose_w, "write W as a combination of quadruple expressions")
    p.add_argument("--terms", required=True, help="A,l,k;A,l,k;...")

    p = command("certify-w", cmd_certify_w, "certify that a(p) = 0 for all primes")
    p.add_argument("--terms", required=True)
    p.add_argument("--mode", choices=("all",) + MODES, default="all")
    p.add_argument("--prime-count", type=_positive)

    p = command("macmahon", cmd_macmahon, "MacMahon partition functions")
    p.add_argument("--a", type=_positive, default=1)
    p.add_argument("--nmax", type=_nonneg, required=True)
    p.add_argument("--verify-identity", action="store_true")

    p = command("scan", cmd_scan, "detection scan over a progression")
    p.add_argument("--spec", required=True)
    p.add_argument("--progression")
    p.add_argument("--level", type=_positive)
    p.add_argument("--bound", type=_positive, required=True)
    p.add_argument("--strong", action="store_true")

    p = command("sign-changes", cmd_sign_changes, "sign changes of prime coefficients")
    p.add_argument("--series", choices=("delta", "e2", "spec"), required=True)
    p.add_argument("--spec")
    p.add_argument("--progression")
    p.add_argument("--bound", type=_positive, required=True)

    p = command("characters", cmd_characters, "enumerate Dirichlet characters")
    p.add_argument("--M", type=_positive, required=True)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParityError, NonRealCoefficientError, PreconditionError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
