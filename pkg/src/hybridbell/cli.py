"""Command-line front end: reference tables, figure data and custom runs."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from pathlib import Path

from . import __version__
from .chsh import ConvergenceError, binning_norm, pi_states
from .fock import BinningSet, QuadratureError
from .multipartite import (ghz_quadrature_expectation, ghz_quadrature_violation, w_critical_eta,
                           w_mermin_closed_form, w_mermin_value)
from .noise import (BISECTION_WIDTH, MonotonicityError, NoiseParams, NoViolationError, critical_delta_of_state,
                    critical_eta, critical_eta_of_state, critical_t, critical_t_of_state, state_expectation)
from .operators import PureState, SubspaceSpec
from .optimize import optimize_binning, optimize_state_binning
from .states import GammaParams, fixture_binning, gamma_state, ghz_state, load_fixture, noon_state, w_state
from .tables import ERFINV_HALF, FIGURE_IDS, TABLE_IDS, Num, RunConfig, Table, build_table, figure_data

SCHEMA_VERSION = 1
EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3
CSV_DIGITS = 6
JSON_DIGITS = 10


class UsageError(ValueError):
    pass


def _float_text(x: float, digits: int) -> str | float:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return round(float(x), digits) + 0.0


def _csv_number(x) -> str:
    if x is None:
        return ""
    v = _float_text(x, CSV_DIGITS)
    return v if isinstance(v, str) else f"{v:.{CSV_DIGITS}f}"


def _json_num(n: Num) -> dict:
    out = {"value": _float_text(n.value, JSON_DIGITS), "tolerance": n.tolerance}
    if n.reference is not None:
        out["reference"] = _float_text(n.reference, JSON_DIGITS)
        out["delta"] = _float_text(n.delta, JSON_DIGITS)
        out["within_tolerance"] = bool(n.ok)
    return out


def _config_record(cfg: RunConfig) -> dict:
    return {"dim": cfg.dim, "tol": cfg.tol, "grid_step": cfg.grid_step, "long": cfg.long, "seed": cfg.seed}


def render_table(table: Table, cfg: RunConfig) -> str:
    if cfg.fmt == "json":
        rows = [{c: (_json_num(v) if isinstance(v, Num) else v) for c, v in row.items()} for row in table.rows]
        doc = {"schema": SCHEMA_VERSION, "version": __version__, "seed": cfg.seed, "config": _config_record(cfg),
               "table": table.name, "columns": list(table.columns), "rows": rows}
        return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
    numeric = [c for c in table.columns if any(isinstance(r.get(c), Num) for r in table.rows)]
    header = []
    for c in table.columns:
        header.append(c)
        if c in numeric:
            header += [f"{c}_tolerance", f"{c}_reference", f"{c}_delta"]
    header += ["seed", "version"]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in table.rows:
        line = []
        for c in table.columns:
            v = row.get(c, "")
            if isinstance(v, Num):
                line += [_csv_number(v.value), f"{v.tolerance:g}", _csv_number(v.reference),
                         _csv_number(v.delta)]
            else:
                line.append(v)
                if c in numeric:
                    line += ["", "", ""]
        w.writerow(line + [cfg.seed, __version__])
    return buf.getvalue()


def _safe_name(name: str) -> str:
    return name.replace("+", "_plus").replace("-", "_minus")


def write_figure(number: int, cfg: RunConfig) -> list[Path]:
    fig = figure_data(number, cfg)
    out = Path(cfg.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    crossings = {k: (None if v is None else _json_num(v)) for k, v in fig.crossings.items()}
    meta = {"schema": SCHEMA_VERSION, "version": __version__, "seed": cfg.seed, "config": _config_record(cfg),
            "figure": number, "x": fig.x_label, "level": 2.0, "crossings": crossings}
    paths = []
    if cfg.fmt == "json":
        series = {}
        for name, pts in fig.series.items():
            entry = {"x": [_float_text(x, JSON_DIGITS) for x, _ in pts],
                     "y": [_float_text(y, JSON_DIGITS) for _, y in pts], "tolerance": fig.tolerance}
            for col, vals in fig.extra_columns.items():
                entry[col] = [_float_text(v, JSON_DIGITS) for v in vals]
            series[name] = entry
        path = out / f"figure{number}.json"
        path.write_text(json.dumps({**meta, "series": series}, indent=2, ensure_ascii=False) + "\n")
        return [path]
    for name, pts in fig.series.items():
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([fig.x_label, "abs_B", "tolerance", *fig.extra_columns])
        for i, (x, y) in enumerate(pts):
            extra = [_csv_number(vals[i]) for vals in fig.extra_columns.values()]
            w.writerow([_csv_number(x), _csv_number(y), f"{fig.tolerance:g}", *extra])
        path = out / f"figure{number}_{_safe_name(name)}.csv"
        path.write_text(buf.getvalue())
        paths.append(path)
    path = out / f"figure{number}_crossings.json"
    path.write_text(json.dumps(meta, indent=2, ensure_ascii=False) + "\n")
    paths.append(path)
    return paths


def parse_binning(text: str) -> BinningSet | None:
    """``auto``, ``R+``, ``sym:c``, ``half:a`` or ``lo,hi`` (``inf`` allowed); ``None`` means optimize."""
    t = text.strip()
    try:
        if t.lower() == "auto":
            return None
        if t in ("R+", "r+"):
            return BinningSet.half_line(0.0)
        if t.startswith("sym:"):
            return BinningSet.symmetric(float(t[4:]))
        if t.startswith("half:"):
            return BinningSet.half_line(float(t[5:]))
        lo, hi = (float(v) for v in t.split(","))
        return BinningSet(lo, hi)
    except ValueError as exc:
        raise UsageError(f"cannot parse binning {text!r}: use auto, R+, sym:c, half:a or lo,hi ({exc})") from exc


def _complex(text: str) -> complex:
    return complex(text.strip().replace("i", "j"))


def parse_state(text: str, dim: int | None) -> tuple[PureState, BinningSet | None, str]:
    """Build a state from ``kind:args``; also returns its natural binning, if any."""
    kind, _, arg = text.strip().partition(":")
    try:
        if kind == "noon":
            return noon_state(int(arg), dim), None, "two-mode"
        if kind == "fixture":
            psi = load_fixture(arg)
            if dim is not None:
                psi = psi.resized((dim, dim))
            return psi, fixture_binning(arg), "two-mode"
        if kind == "gamma":
            parts = arg.split(",")
            if len(parts) not in (2, 3):
                raise ValueError("expected gamma:theta,alpha[,odd]")
            parity = parts[2].strip() if len(parts) == 3 else "even"
            return gamma_state(GammaParams(float(parts[0]), _complex(parts[1]), parity), dim), None, "two-mode"
        if kind in ("pi-", "pi+"):
            b = BinningSet.symmetric(ERFINV_HALF) if arg in ("sym", "symmetric") else BinningSet.half_line(0.0)
            if arg not in ("sym", "symmetric", "R+", "half-line"):
                raise ValueError("expected pi-:R+ or pi-:sym")
            plus, minus = pi_states(b, dim or 101)
            return (minus if kind == "pi-" else plus), b, "two-mode"
        if kind == "ghz":
            return ghz_state(int(arg), dim or 2), None, "ghz"
        if kind == "w":
            return w_state(3, dim or 2), BinningSet.half_line(0.0), "w"
    except (ValueError, KeyError) as exc:
        raise UsageError(f"invalid state {text!r}: {exc}") from exc
    raise UsageError(f"unknown state kind {kind!r}; use noon:N, fixture:NAME, gamma:theta,alpha[,odd], "
                     "pi-:R+|sym, pi+:R+|sym, ghz:N or w")


def parse_subspace(text: str) -> SubspaceSpec:
    """``H:N`` (photon numbers 0..N), ``even:N`` or an explicit list like ``0,2``."""
    try:
        if text.startswith("H:"):
            return SubspaceSpec.lowest(int(text[2:]))
        if text.startswith("even:"):
            return SubspaceSpec.even(int(text[5:]))
        return SubspaceSpec.uniform(tuple(int(v) for v in text.split(",")))
    except ValueError as exc:
        raise UsageError(f"cannot parse subspace {text!r}: use H:N, even:N or a list like 0,2 ({exc})") from exc


def _noise(args) -> NoiseParams:
    try:
        return NoiseParams(eta=args.eta, delta=args.delta, t=args.t)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _binning_record(b: BinningSet | None):
    if b is None:
        return None
    return {"lower": _float_text(b.lower, JSON_DIGITS), "upper": _float_text(b.upper, JSON_DIGITS)}


def run_custom(args, cfg: RunConfig) -> dict:
    q = cfg.quadrature
    inputs = {k: v for k, v in vars(args).items() if k not in ("func", "command", "format", "out", "long")}
    record = {"schema": SCHEMA_VERSION, "version": __version__, "seed": cfg.seed, "command": args.command,
              "inputs": inputs}

    if args.command == "mermin":
        state, _, kind = parse_state(args.state, cfg.dim)
        if kind == "ghz":
            n = len(state.mode_dims)
            record["result"] = {"value": _float_text(ghz_quadrature_expectation(n, q), JSON_DIGITS),
                                "tolerance": 1e-10}
            record["closed_form"] = {"value": _float_text(ghz_quadrature_violation(n), JSON_DIGITS),
                                     "tolerance": 1e-10}
        elif kind == "w":
            dim = cfg.dim or 2
            record["result"] = {"value": _float_text(w_mermin_value(dim=dim, eta=args.eta, cfg=q), JSON_DIGITS),
                                "tolerance": 1e-8}
            record["closed_form"] = {"value": _float_text(w_mermin_closed_form(args.eta), JSON_DIGITS),
                                     "tolerance": 1e-9}
            record["critical_eta"] = {"value": _float_text(w_critical_eta(dim=dim, cfg=q), JSON_DIGITS),
                                      "tolerance": BISECTION_WIDTH}
        else:
            raise UsageError("mermin needs --state ghz:N or --state w")
        return record

    noise = _noise(args)
    binning = parse_binning(args.binning)
    if args.subspace is not None:
        spec = parse_subspace(args.subspace)
        if args.command == "violation":
            if binning is None:
                opt = optimize_binning(spec, noise, grid_step=cfg.grid_step, cfg=q)
                value, binning, tol = opt.value, opt.binning, 1e-6
            else:
                value, tol = binning_norm(binning, spec, q).value, 1e-10
        elif args.command in ("critical-eta", "critical-t"):
            objective = "min-eta" if args.command == "critical-eta" else "min-t"
            if binning is None:
                opt = optimize_binning(spec, objective=objective, grid_step=cfg.grid_step, cfg=q)
                value, binning = opt.value, opt.binning
            else:
                fn = critical_eta if args.command == "critical-eta" else critical_t
                value = fn(binning, spec, q).value
            tol = BISECTION_WIDTH
        else:
            raise UsageError("critical-delta needs --state; --subspace is not supported")
        record["result"] = {"value": _float_text(value, JSON_DIGITS), "tolerance": tol,
                            "binning": _binning_record(binning)}
        return record

    if args.state is None:
        raise UsageError("give --state or --subspace")
    state, natural, kind = parse_state(args.state, cfg.dim)
    if kind == "ghz":
        if args.command != "violation" or args.scheme != "quadrature-sign":
            raise UsageError("GHZ states support `violation --scheme quadrature-sign` and `mermin`")
        n = len(state.mode_dims)
        record["result"] = {"value": _float_text(ghz_quadrature_expectation(n, q), JSON_DIGITS), "tolerance": 1e-10}
        return record
    if kind == "w":
        raise UsageError("use `mermin --state w` for the W state")
    if binning is None and args.binning.lower() == "auto" and natural is not None and args.command != "violation":
        binning = natural
    if args.command == "violation":
        if binning is None:
            value, binning = optimize_state_binning(state, noise, grid_step=cfg.grid_step, cfg=q)
            tol = 1e-6
        else:
            value, tol = abs(state_expectation(state, binning, noise, q)), 1e-10
    else:
        if binning is None:
            raise UsageError("threshold searches on a state need an explicit --binning")
        if args.command == "critical-eta":
            value = critical_eta_of_state(state, binning, q, delta=args.delta, t=args.t).value
        elif args.command == "critical-t":
            value = critical_t_of_state(state, binning, q, eta=args.eta).value
        else:
            value = critical_delta_of_state(state, binning, args.eta, q).value
        tol = BISECTION_WIDTH
    record["result"] = {"value": _float_text(value, JSON_DIGITS), "tolerance": tol,
                        "binning": _binning_record(binning)}
    return record


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--dim", type=int, default=None, help="truncation per mode (default: per input)")
    common.add_argument("--tol", type=float, default=1e-10, help="quadrature absolute tolerance")
    common.add_argument("--grid-step", type=float, default=0.05, help="coarse interval grid step")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--long", action="store_true", help="include long-running cells")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized oracles")
    common.add_argument("--out", default=None, help="output file (tables) or directory (figures)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="hybridbell", description=__doc__)
    p.add_argument("--version", action="version", version=f"hybridbell {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    t = sub.add_parser("table", parents=[common], help="recompute a reference table")
    t.add_argument("id", choices=TABLE_IDS)
    f = sub.add_parser("figure", parents=[common], help="write figure curve data")
    f.add_argument("id", type=int, choices=FIGURE_IDS)
    for name in ("violation", "critical-eta", "critical-t", "critical-delta"):
        c = sub.add_parser(name, parents=[common], help=f"{name} for a state or subspace")
        c.add_argument("--state", default=None, help="noon:N, fixture:NAME, gamma:theta,alpha[,odd], pi-:R+|sym, ghz:N")
        c.add_argument("--subspace", default=None, help="H:N, even:N or a list like 0,2 (norm-based)")
        c.add_argument("--binning", default="auto", help="auto, R+, sym:c, half:a or lo,hi")
        c.add_argument("--eta", type=float, default=1.0)
        c.add_argument("--delta", type=float, default=1.0)
        c.add_argument("--t", type=float, default=1.0)
        c.add_argument("--scheme", choices=("quadrature-sign",), default="quadrature-sign")
    m = sub.add_parser("mermin", parents=[common], help="Mermin-type value for ghz:N or w")
    m.add_argument("--state", required=True)
    m.add_argument("--eta", type=float, default=1.0)
    return p


def _join_values(argv):
    """Attach option values that start with '-' (e.g. --binning -1.1,1.1) so argparse keeps them."""
    out, it = [], iter(argv)
    for a in it:
        if a in ("--binning", "--state", "--subspace"):
            nxt = next(it, None)
            out.append(a if nxt is None else f"{a}={nxt}")
        else:
            out.append(a)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(_join_values(sys.argv[1:] if argv is None else list(argv)))
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_VALIDATION
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = RunConfig(args.dim, args.tol, args.grid_step, args.format, args.long, args.seed, args.out)
        if args.command == "table":
            text = render_table(build_table(args.id, cfg), cfg)
            if cfg.out:
                Path(cfg.out).write_text(text)
            else:
                sys.stdout.write(text)
        elif args.command == "figure":
            for path in write_figure(args.id, cfg):
                print(path)
        else:
            text = json.dumps(run_custom(args, cfg), indent=2, ensure_ascii=False) + "\n"
            if cfg.out:
                Path(cfg.out).write_text(text)
            else:
                sys.stdout.write(text)
    except NoViolationError as exc:
        print(f"error: {exc}; there is no threshold to search for", file=sys.stderr)
        return EXIT_VALIDATION
    except (UsageError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ConvergenceError, QuadratureError, MonotonicityError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
