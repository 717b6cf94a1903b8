"""Command-line interface.

Usage:
    subgauss norm gaussian                 # psi_2 norm
    subgauss proxy binary:2,0.5 --json     # optimal variance proxy
    subgauss ratio file:law.json           # sigma / psi_2 norm
    subgauss verify --seed 42              # full certificate battery
    subgauss scan --u-max 50 --grid 200 --csv scan.csv

Exit codes: 0 success, 1 usage error, 2 unparseable or invalid distribution,
3 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import sharpness as sh
from .distributions import (
    RADEMACHER,
    STANDARD_GAUSSIAN,
    Distribution,
    make_centered_binary,
    make_finite,
)
from .exceptions import FileError, InvalidDistribution, ParseError, SubGaussError
from .subgaussian import (
    PROXY_TOL,
    PSI2_TOL,
    SQRT_3_8,
    SQRT_LOG2,
    psi2_norm,
    ratio,
    variance_proxy,
    variance_proxy_binary,
)
from .verify import run_battery

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_VERIFY = 3

SCAN_COLUMNS = ("u", "t_star", "ratio", "sigma", "psi2")
_NAMED = {"gaussian": STANDARD_GAUSSIAN, "rademacher": RADEMACHER}


@dataclass
class RunConfig:
    command: str
    dist_spec: str | None = None
    tol: float | None = None
    output: str = "human"
    out_path: str | None = None
    seed: int = 42
    u_max: float = 50.0
    grid: int = 500
    trials: int = 100_000
    laws: int = 1000


def _parse_float(text: str, offset: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"expected a number, got {text!r}", offset) from None
    if not math.isfinite(value):
        raise ParseError(f"expected a finite number, got {text!r}", offset)
    return value


def load_law_file(path: str | Path) -> Distribution:
    """Read a JSON array of ``{"x": real, "p": real}`` objects."""
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise FileError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise FileError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(data, list) or not data:
        raise FileError(f"{path}: expected a non-empty JSON array of atoms")
    try:
        xs = [float(atom["x"]) for atom in data]
        ps = [float(atom["p"]) for atom in data]
    except (TypeError, KeyError, ValueError) as exc:
        raise FileError(f"{path}: every atom needs numeric 'x' and 'p' ({exc})") from exc
    return make_finite(xs, ps)


def parse_dist_spec(spec: str) -> Distribution:
    """Parse ``gaussian | rademacher | binary:<u>,<x1> | file:<path>``."""
    text = spec.strip()
    lead = len(spec) - len(spec.lstrip())
    if text.lower() in _NAMED:
        return _NAMED[text.lower()]
    kind, sep, rest = text.partition(":")
    if not sep:
        raise ParseError(f"unknown distribution {text!r}", lead)
    start = lead + len(kind) + 1
    kind = kind.lower()
    if kind == "binary":
        parts = rest.split(",")
        if len(parts) != 2:
            raise ParseError("binary takes exactly two numbers: binary:<u>,<x1>", start + len(rest))
        u = _parse_float(parts[0], start)
        x1 = _parse_float(parts[1], start + len(parts[0]) + 1)
        return make_centered_binary(u, x1)
    if kind == "file":
        if not rest:
            raise ParseError("missing path after 'file:'", start)
        return load_law_file(rest)
    raise ParseError(f"unknown distribution kind {kind!r}", lead)


def _fmt(v: float) -> str:
    return f"{v:.12g}"


def _write_csv(rows: list[dict], columns: Sequence[str], path: str | None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c]) if isinstance(row[c], float) else row[c] for c in columns])
    text = buf.getvalue()
    if path:
        Path(path).write_text(text)
    return text


def _norm_payload(cfg: RunConfig, res) -> dict:
    return {
        "command": cfg.command,
        "distribution": cfg.dist_spec,
        "value": res.value,
        "bracket": [res.bracket_lo, res.bracket_hi],
        "tol": res.tol,
        "evaluations": res.evaluations,
    }


def _run_single(cfg: RunConfig, out) -> int:
    d = parse_dist_spec(cfg.dist_spec)
    if cfg.command == "norm":
        res = psi2_norm(d, cfg.tol or PSI2_TOL)
        payload = _norm_payload(cfg, res)
        label = "psi2 norm"
    elif cfg.command == "proxy":
        res = variance_proxy(d, cfg.tol or PROXY_TOL)
        payload = _norm_payload(cfg, res)
        label = "variance proxy"
    else:
        rr = ratio(d, cfg.tol or PROXY_TOL)
        band = rr.combined_tol
        passed = SQRT_3_8 - band <= rr.ratio <= SQRT_LOG2 + band
        payload = {
            "command": "ratio",
            "distribution": cfg.dist_spec,
            "values": {"sigma": rr.sigma.value, "psi2": rr.psi2.value, "ratio": rr.ratio},
            "bracket": {
                "sigma": [rr.sigma.bracket_lo, rr.sigma.bracket_hi],
                "psi2": [rr.psi2.bracket_lo, rr.psi2.bracket_hi],
            },
            "tol": band,
            "passed": passed,
        }

    if cfg.out_path:
        if cfg.command == "ratio":
            row = {"command": "ratio", "distribution": cfg.dist_spec, **payload["values"], "tol": payload["tol"]}
            cols = ("command", "distribution", "sigma", "psi2", "ratio", "tol")
        else:
            row = {"command": cfg.command, "distribution": cfg.dist_spec, "value": payload["value"],
                   "bracket_lo": payload["bracket"][0], "bracket_hi": payload["bracket"][1], "tol": payload["tol"]}
            cols = ("command", "distribution", "value", "bracket_lo", "bracket_hi", "tol")
        _write_csv([row], cols, cfg.out_path)

    if cfg.output == "json":
        print(json.dumps(payload), file=out)
    elif cfg.command == "ratio":
        v = payload["values"]
        print(f"sigma  = {_fmt(v['sigma'])}", file=out)
        print(f"psi2   = {_fmt(v['psi2'])}", file=out)
        print(f"ratio  = {_fmt(v['ratio'])}  (band [{_fmt(SQRT_3_8)}, {_fmt(SQRT_LOG2)}], "
              f"{'inside' if payload['passed'] else 'OUTSIDE'})", file=out)
    else:
        lo, hi = payload["bracket"]
        print(f"{label} = {_fmt(payload['value'])}  bracket [{_fmt(lo)}, {_fmt(hi)}]  "
              f"tol {payload['tol']:g}", file=out)
    return EXIT_OK


def _run_verify(cfg: RunConfig, out) -> int:
    reports = run_battery(cfg.seed, cfg.trials, cfg.laws, cfg.u_max, cfg.grid)
    passed = all(r.passed for r in reports)
    if cfg.out_path:
        rows = [{"name": r.name, "passed": r.passed, "min_margin": r.min_margin,
                 "tolerance": r.tolerance, "grid": r.grid} for r in reports]
        _write_csv(rows, ("name", "passed", "min_margin", "tolerance", "grid"), cfg.out_path)
    if cfg.output == "json":
        payload = {"command": "verify", "seed": cfg.seed, "passed": passed,
                   "reports": [r.to_dict() for r in reports]}
        print(json.dumps(payload), file=out)
    else:
        for r in reports:
            print(f"{'PASS' if r.passed else 'FAIL'}  {r.name:<42s} margin {r.min_margin: .3e}  [{r.grid}]", file=out)
        print(f"{sum(r.passed for r in reports)}/{len(reports)} checks passed", file=out)
    return EXIT_OK if passed else EXIT_VERIFY


def scan_rows(u_max: float, n: int) -> list[dict]:
    rows = []
    for u in np.geomspace(1.0, u_max, n):
        u = float(u)
        t = sh.t_star(u)
        x1 = math.sqrt(t)
        rows.append({
            "u": u,
            "t_star": t,
            "ratio": sh.binary_ratio(u),
            "sigma": variance_proxy_binary(u, x1),
            "psi2": psi2_norm(make_centered_binary(u, x1)).value,
        })
    return rows


def _run_scan(cfg: RunConfig, out) -> int:
    rows = scan_rows(cfg.u_max, cfg.grid)
    text = _write_csv(rows, SCAN_COLUMNS, cfg.out_path)
    if cfg.output == "json":
        print(json.dumps({"command": "scan", "u_max": cfg.u_max, "grid": cfg.grid, "rows": rows}), file=out)
    elif not cfg.out_path:
        out.write(text)
    else:
        print(f"wrote {len(rows)} rows to {cfg.out_path}", file=out)
    return EXIT_OK


def run(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    try:
        if cfg.command in ("norm", "proxy", "ratio"):
            return _run_single(cfg, out)
        if cfg.command == "verify":
            return _run_verify(cfg, out)
        if cfg.command == "scan":
            return _run_scan(cfg, out)
    except (ParseError, FileError, InvalidDistribution) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except SubGaussError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(f"error: unknown command {cfg.command!r}", file=sys.stderr)
    return EXIT_USAGE


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=_positive_float, default=None, help="absolute tolerance")
    common.add_argument("--json", action="store_true", help="emit JSON on stdout")
    common.add_argument("--csv", metavar="PATH", default=None, help="also write CSV to PATH")
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="subgauss", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_ in (("norm", "sub-Gaussian (psi_2) norm"),
                        ("proxy", "optimal variance proxy"),
                        ("ratio", "variance proxy / psi_2 norm")):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("dist", help="gaussian | rademacher | binary:<u>,<x1> | file:<path>")

    p = sub.add_parser("verify", parents=[common], help="run the certificate battery")
    p.add_argument("--u-max", type=_positive_float, default=50.0)
    p.add_argument("--grid", type=int, default=500)
    p.add_argument("--trials", type=int, default=100_000, help="three-point samples per s")
    p.add_argument("--laws", type=int, default=1000, help="random laws for the ratio band")

    p = sub.add_parser("scan", parents=[common], help="two-point ratio scan over u")
    p.add_argument("--u-max", type=_positive_float, default=50.0)
    p.add_argument("--grid", type=int, default=500)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    cfg = RunConfig(
        command=args.command,
        dist_spec=getattr(args, "dist", None),
        tol=args.tol,
        output="json" if args.json else "human",
        out_path=args.csv,
        seed=args.seed,
        u_max=getattr(args, "u_max", 50.0),
        grid=getattr(args, "grid", 500),
        trials=getattr(args, "trials", 100_000),
        laws=getattr(args, "laws", 1000),
    )
    if cfg.command in ("verify", "scan") and (cfg.u_max <= 1.0 or cfg.grid < 2):
        print("error: need --u-max > 1 and --grid >= 2", file=sys.stderr)
        return EXIT_USAGE
    log.debug("config %s", cfg)
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
