"""Command-line entry point: regenerate tables and figure data, run checks.

Exit codes: 0 success, 1 cycle-check found a violation, 2 usage or input
error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

from . import scan
from .entropy import DomainError, q_ln
from .inefficiency import (
    InefficiencyModel,
    ModelKind,
    RatioUndefinedError,
    deformed_joint_form,
    single_detector_report,
    two_detector_report,
)
from .quantum import KcbsConfig
from .scenarios import CapacityError, CycleCorrelations, cycle_polytope_check

EXIT_OK, EXIT_VIOLATED, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3

DEFAULTS = {
    "format": "csv",
    "out": "-",
    "precision": 6,
    "points": 400,
    "eta": 0.99,
    "model": "two",
    "alpha": None,
    "theta": None,
    "q": None,
    "q_list": None,
    "q_range": "1,3",
    "gamma_range": None,
    "theta_range": None,
    "step": None,
    "n": None,
    "corr": None,
}


class InputError(Exception):
    pass


def _floats(text: str, what: str) -> list[float]:
    try:
        return [float(v) for v in str(text).replace(";", ",").split(",") if v.strip()]
    except ValueError:
        raise InputError(f"{what}: cannot parse {text!r} as numbers") from None


def _pair(text, what: str) -> tuple[float, float]:
    vals = _floats(text, what)
    if len(vals) != 2 or vals[0] > vals[1]:
        raise InputError(f"{what} must be 'lo,hi' with lo <= hi")
    return vals[0], vals[1]


def read_config(path: str) -> dict[str, str]:
    """``key=value`` lines; ``#`` starts a comment. Keys use flag names without dashes."""
    out = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from None
    for num, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"{path}:{num}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        if key not in DEFAULTS:
            raise InputError(f"{path}:{num}: unknown key {key!r}")
        out[key] = value
    return out


def _settings(args) -> dict:
    merged = dict(DEFAULTS)
    if args.config:
        merged.update(read_config(args.config))
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val
    precision = int(merged["precision"])
    if not 1 <= precision <= 15:
        raise InputError("precision must lie in [1, 15]")
    merged["precision"] = precision
    if merged["format"] not in ("csv", "json"):
        raise InputError("format must be csv or json")
    merged["points"] = int(merged["points"])
    return merged


def _grid(s: dict, **ranges) -> scan.ScanGrid:
    return scan.ScanGrid(points=s["points"], **ranges)


def _fmt(value, precision: int):
    if value is None:
        return None
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ArithmeticError(f"non-finite result {value!r}")
        return f"{value:.{precision}f}"
    return str(value)


def render(columns: list[str], rows: list[list], fmt: str, precision: int) -> str:
    """CSV (``\\n`` line endings) or a JSON array of objects with the same rounded values."""
    text_rows = [[_fmt(v, precision) for v in row] for row in rows]
    if fmt == "json":
        objs = []
        for raw, txt in zip(rows, text_rows):
            objs.append(
                {c: (float(t) if isinstance(r, float) else r) for c, r, t in zip(columns, raw, txt)}
            )
        return json.dumps(objs, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows([["" if v is None else v for v in row] for row in text_rows])
    return buf.getvalue()


def emit(text: str, out: str) -> None:
    if out in ("-", ""):
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise InputError(f"cannot write {out}: {exc}") from None


def _q_list(s: dict, default) -> list[float]:
    return list(default) if s["q_list"] is None else _floats(s["q_list"], "--q-list")


def _axis(rng: tuple[float, float], step) -> list[float]:
    lo, hi = rng
    if step is None:
        raise InputError("--step is required")
    step = float(step)
    if step <= 0:
        raise InputError("--step must be positive")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [lo + i * step for i in range(count)]


def cmd_table1(s: dict) -> int:
    rows = []
    for q in _q_list(s, scan.TABLE1_Q):
        best = scan.scan_kcbs(q, _grid(s)).best
        rows.append([q, best.max_cq, best.max_cq_relative, best.argmax["alpha"], best.argmax["theta"]])
    emit(render(["q", "max_cq", "max_cq_rel", "alpha_max", "theta_max"], rows, s["format"], s["precision"]), s["out"])
    return EXIT_OK


def cmd_table2(s: dict) -> int:
    eta = float(s["eta"])
    if not 0.0 < eta <= 1.0:
        raise InputError("--eta must lie in (0, 1]")
    qs = _q_list(s, scan.TABLE1_Q)
    ratios = scan.table2_ratios(qs, eta, _grid(s))
    emit(render(["q", "r_q"], [[q, r] for q, r in zip(qs, ratios)], s["format"], s["precision"]), s["out"])
    return EXIT_OK


def cmd_fig1(s: dict) -> int:
    default = scan.ScanGrid().gamma_range
    rng = _pair(s["gamma_range"], "--gamma-range") if s["gamma_range"] else default
    gammas = _axis(rng, s["step"] if s["step"] is not None else 0.005)
    if not (0.0 < gammas[0] and gammas[-1] < math.pi):
        raise InputError("gamma must stay inside (0, pi)")
    rows = []
    for q in _q_list(s, scan.FIG1_Q):
        values = scan.chsh_cq_array(gammas, q) / q_ln(2.0, q)
        rows.extend([q, g, float(v)] for g, v in zip(gammas, values))
    emit(render(["q", "gamma", "c_rel"], rows, s["format"], s["precision"]), s["out"])
    return EXIT_OK


def cmd_fig2(s: dict) -> int:
    alpha = float(s["alpha"]) if s["alpha"] is not None else scan.FIG2_ALPHA
    rng = _pair(s["theta_range"], "--theta-range") if s["theta_range"] else (0.0, math.pi / 2)
    thetas = _axis(rng, s["step"] if s["step"] is not None else 0.005)
    rows = []
    for q in _q_list(s, scan.FIG2_Q):
        rows.extend([q, t, v] for t, v in scan.kcbs_theta_series(alpha, q, thetas))
    emit(render(["q", "theta", "c_rel"], rows, s["format"], s["precision"]), s["out"])
    return EXIT_OK


def cmd_chsh_scan(s: dict) -> int:
    rows = []
    for q in _q_list(s, [float(s["q"]) if s["q"] is not None else 1.0]):
        best = scan.scan_chsh(q, _grid(s)).best
        rows.append([q, best.max_cq, best.max_cq_relative, best.argmax["gamma"]])
    emit(render(["q", "max_cq", "max_cq_rel", "gamma_max"], rows, s["format"], s["precision"]), s["out"])
    return EXIT_OK


def cmd_kcbs_scan(s: dict) -> int:
    q = [float(s["q"])] if s["q"] is not None else [2.0]
    s = dict(s, q_list=s["q_list"] if s["q_list"] is not None else ",".join(map(str, q)))
    return cmd_table1(s)


def cmd_q_threshold(s: dict) -> int:
    alpha = float(s["alpha"]) if s["alpha"] is not None else scan.FIG2_ALPHA
    theta = float(s["theta"]) if s["theta"] is not None else 0.4765
    res = scan.q_threshold(alpha, theta, _pair(s["q_range"], "--q-range"))
    emit(render(["alpha", "theta", "q_star"], [[alpha, theta, res.q_star]], s["format"], s["precision"]), s["out"])
    return EXIT_OK


def _read_corr(text: str) -> list[float]:
    if text.startswith("@"):
        try:
            text = Path(text[1:]).read_text(encoding="utf-8")
        except OSError as exc:
            raise InputError(f"cannot read {text[1:]}: {exc}") from None
        text = ",".join(text.split())
    return _floats(text, "--corr")


def cmd_cycle_check(s: dict) -> int:
    if s["corr"] is None:
        raise InputError("--corr is required")
    corr = _read_corr(str(s["corr"]))
    if s["n"] is not None and int(s["n"]) != len(corr):
        raise InputError(f"--n {s['n']} does not match {len(corr)} correlations")
    try:
        verdict = cycle_polytope_check(CycleCorrelations(corr))
    except (DomainError, CapacityError) as exc:
        raise InputError(str(exc)) from None
    signs = " ".join("+" if g > 0 else "-" for g in verdict.signs)
    emit(
        render(["verdict", "lhs", "margin", "signs"], [[verdict.verdict, verdict.lhs, verdict.margin, signs]], s["format"], s["precision"]),
        s["out"],
    )
    return EXIT_VIOLATED if verdict.violated else EXIT_OK


def cmd_kcbs_eta(s: dict) -> int:
    for key in ("alpha", "theta", "q"):
        if s[key] is None:
            raise InputError(f"--{key} is required")
    cfg = KcbsConfig(float(s["alpha"]), float(s["theta"]))
    q, eta = float(s["q"]), float(s["eta"])
    model = ModelKind(s["model"])
    note = None
    if model is ModelKind.SINGLE:
        report = single_detector_report(cfg, eta, q)
        constructive = deformed_joint_form(cfg, InefficiencyModel(model, eta), q)
    else:
        try:
            report = two_detector_report(cfg, eta, q)
        except RatioUndefinedError as exc:
            report, note = exc.report, str(exc)
        constructive = deformed_joint_form(cfg, InefficiencyModel(model, eta), q)
    p = s["precision"]
    out = {
        "alpha": cfg.alpha,
        "theta": cfg.theta,
        "q": q,
        "eta": eta,
        "model": model.value,
        "c_q": round(report.c_q, p),
        "c_q_eta": round(report.c_q_eta, p),
        "c_q_eta_constructive": round(constructive, p),
        "delta_q": round(report.delta_q, p),
        "ratio": None if report.ratio is None else round(report.ratio, p),
    }
    if note:
        out["note"] = note
    emit(json.dumps(out, indent=2) + "\n", s["out"])
    return EXIT_OK


COMMANDS = {
    "table1": (cmd_table1, "maximal KCBS violation for a list of q"),
    "table2": (cmd_table2, "ratio r_q(eta) at each q's maximal violation"),
    "fig1": (cmd_fig1, "relative CHSH C_q versus gamma, long format"),
    "fig2": (cmd_fig2, "relative KCBS C_q versus theta at fixed alpha, long format"),
    "chsh-scan": (cmd_chsh_scan, "maximal CHSH violation"),
    "kcbs-scan": (cmd_kcbs_scan, "maximal KCBS violation for one q"),
    "q-threshold": (cmd_q_threshold, "order q where the KCBS C_q changes sign"),
    "cycle-check": (cmd_cycle_check, "test correlations against the n-cycle polytope"),
    "kcbs-eta": (cmd_kcbs_eta, "detector-inefficiency report (JSON)"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    common.add_argument("--precision", type=int, metavar="N")
    common.add_argument("--config", metavar="PATH", help="key=value defaults, overridden by flags")
    common.add_argument("--points", type=int, help="coarse grid points per axis")
    common.add_argument("--q", type=float)
    common.add_argument("--q-list", dest="q_list", metavar="Q1,Q2,...")
    common.add_argument("--q-range", dest="q_range", metavar="LO,HI")
    common.add_argument("--alpha", type=float)
    common.add_argument("--theta", type=float)
    common.add_argument("--gamma-range", dest="gamma_range", metavar="LO,HI")
    common.add_argument("--theta-range", dest="theta_range", metavar="LO,HI")
    common.add_argument("--step", type=float)
    common.add_argument("--eta", type=float)
    common.add_argument("--model", choices=("single", "two"))
    common.add_argument("--n", type=int)
    common.add_argument("--corr", metavar="C1,C2,...|@FILE")

    parser = argparse.ArgumentParser(prog="qentropic", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text)
    return parser


def _glue_negative_values(argv: list[str]) -> list[str]:
    # argparse would read "--corr -1,-1" as two options
    out = []
    it = iter(argv)
    for tok in it:
        if tok in ("--corr", "--q-range", "--gamma-range", "--theta-range", "--q-list"):
            nxt = next(it, None)
            if nxt is not None and nxt.startswith("-") and len(nxt) > 1 and (nxt[1].isdigit() or nxt[1] == "."):
                out.append(f"{tok}={nxt}")
                continue
            out.append(tok)
            if nxt is not None:
                out.append(nxt)
            continue
        out.append(tok)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(_glue_negative_values(list(sys.argv[1:] if argv is None else argv)))
    func = COMMANDS[args.command][0]
    try:
        return func(_settings(args))
    except (InputError, DomainError, ValueError) as exc:
        print(f"qentropic {args.command}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ArithmeticError as exc:
        print(f"qentropic {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
