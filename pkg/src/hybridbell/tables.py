"""Recompute the reference tables and figure data as plain rows."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import reference as ref
from .bounds import constrained_chsh_max, vector_oracle
from .chsh import binning_norm, pi_states
from .fock import BinningSet, QuadratureConfig
from .noise import (BISECTION_WIDTH, critical_delta_of_state, critical_eta_of_state, critical_t_of_state,
                    curve_crossing, state_expectation, violation_curve)
from .operators import SubspaceSpec
from .optimize import optimize_binning
from .states import GammaParams, fixture_binning, gamma_state, load_fixture, noon_optimum, noon_upper_bound

ERFINV_HALF = 0.4769362762044699
TABLE_IDS = ("I", "II", "III", "IV", "V", "VI", "VII")
FIGURE_IDS = (1, 2, 3)
SKIPPED = "skipped (--long)"


@dataclass(frozen=True)
class RunConfig:
    dim: int | None = None
    tol: float = 1e-10
    grid_step: float = 0.05
    fmt: str = "csv"
    long: bool = False
    seed: int = 0
    out: str | None = None

    def __post_init__(self):
        if self.tol <= 0 or self.grid_step <= 0:
            raise ValueError("tolerances and grid step must be positive")
        if self.dim is not None and self.dim < 2:
            raise ValueError("--dim must be at least 2")
        if self.fmt not in ("csv", "json"):
            raise ValueError("--format must be csv or json")

    @property
    def quadrature(self) -> QuadratureConfig:
        return QuadratureConfig(abs_tolerance=self.tol)


@dataclass(frozen=True)
class Num:
    """Numeric cell: computed value, the tolerance it is quoted with, optional reference."""

    value: float
    tolerance: float
    reference: float | None = None

    @property
    def delta(self) -> float | None:
        return None if self.reference is None else self.value - self.reference

    @property
    def ok(self) -> bool | None:
        return None if self.reference is None else abs(self.delta) <= self.tolerance + 1e-12


@dataclass
class Table:
    name: str
    columns: tuple[str, ...]
    rows: list[dict] = field(default_factory=list)


def _ends(b: BinningSet, tol: float):
    return Num(b.lower, tol), Num(b.upper, tol)


def _even(n: int) -> SubspaceSpec:
    return SubspaceSpec.even(n)


def _label(spec: SubspaceSpec) -> str:
    return "{" + ",".join(str(i) for i in spec.indices[0]) + "}^2"


def table_I(cfg: RunConfig) -> Table:
    t = Table("I", ("subspace", "abs_B", "lower", "upper"))
    for n, (value, _) in ref.TABLE_I.items():
        row = {"subspace": f"H_{n}"}
        if n in ref.LONG_ROWS and not cfg.long:
            row.update(abs_B=SKIPPED, lower=SKIPPED, upper=SKIPPED)
        else:
            opt = optimize_binning(SubspaceSpec.lowest(n), grid_step=cfg.grid_step, cfg=cfg.quadrature)
            lo, hi = _ends(opt.binning, 1e-3)
            row.update(abs_B=Num(opt.value, ref.TOLERANCE, value), lower=lo, upper=hi)
        t.rows.append(row)
    return t


def table_II(cfg: RunConfig) -> Table:
    t = Table("II", ("n", "abs_B", "lower", "upper", "bound"))
    for n, (value, bound) in ref.TABLE_II.items():
        best, b = noon_optimum(n, cfg.grid_step, cfg=cfg.quadrature)
        lo, hi = _ends(b, 1e-3)
        bound_tol = 1e-9 if n in (2, 4) else ref.TOLERANCE
        t.rows.append({"n": str(n), "abs_B": Num(best, ref.TOLERANCE, value), "lower": lo, "upper": hi,
                       "bound": Num(noon_upper_bound(n, cfg.quadrature)[0], bound_tol, bound)})
    return t


def table_III(cfg: RunConfig) -> Table:
    t = Table("III", ("state", "subspace", "lower", "upper", "abs_B", "subspace_norm"))
    for name, value in ref.TABLE_III.items():
        b = fixture_binning(name)
        n = int(name[-1])
        spec = SubspaceSpec.uniform((0, n))
        psi = load_fixture(name)
        lo, hi = _ends(b, 0.0)
        t.rows.append({"state": name, "subspace": _label(spec), "lower": lo, "upper": hi,
                       "abs_B": Num(abs(state_expectation(psi, b, cfg=cfg.quadrature)), ref.TOLERANCE, value),
                       "subspace_norm": Num(binning_norm(b, spec, cfg.quadrature).value, ref.TOLERANCE, value)})
    return t


def pi_minus_eta(kind: str, dim: int, cfg: QuadratureConfig | None = None) -> float:
    b = BinningSet.half_line(0.0) if kind == "half-line" else BinningSet.symmetric(ERFINV_HALF)
    kw = {} if cfg is None else {"cfg": cfg}
    _, minus = pi_states(b, dim, **kw)
    return critical_eta_of_state(minus, b, **kw).value


def chi2_type_eta(cfg: QuadratureConfig | None = None):
    """eta_c of the maximal-violation eigenvector of {0,2}^2 at its optimal interval."""
    kw = {} if cfg is None else {"cfg": cfg}
    spec = SubspaceSpec.uniform((0, 2))
    opt = optimize_binning(spec, **kw)
    state = spec.embed(opt.witness.state)
    return critical_eta_of_state(state, opt.binning, **kw).value, opt


def table_IV(cfg: RunConfig) -> Table:
    t = Table("IV", ("state", "subspace", "lower", "upper", "abs_B", "eta_c", "eta_state"))
    q = cfg.quadrature
    for name, (value, eta) in ref.TABLE_IV.items():
        spec = _even(int(name[-1]))
        opt = optimize_binning(spec, objective="min-eta", grid_step=cfg.grid_step, cfg=q)
        lo, hi = _ends(opt.binning, 1e-3)
        psi, b = load_fixture(name), fixture_binning(name)
        t.rows.append({"state": name, "subspace": _label(spec), "lower": lo, "upper": hi,
                       "abs_B": Num(abs(state_expectation(psi, b, cfg=q)), ref.TOLERANCE, value),
                       "eta_c": Num(opt.value, ref.TOLERANCE, eta),
                       "eta_state": Num(critical_eta_of_state(psi, b, q).value, BISECTION_WIDTH)})
    dim = cfg.dim or 101
    for kind, eta in ref.PI_MINUS_ETA.items():
        b = BinningSet.half_line(0.0) if kind == "half-line" else BinningSet.symmetric(ERFINV_HALF)
        lo, hi = _ends(b, 0.0)
        t.rows.append({"state": f"pi- ({kind}, dim {dim})", "subspace": "", "lower": lo, "upper": hi,
                       "abs_B": "", "eta_c": "", "eta_state": Num(pi_minus_eta(kind, dim, q), ref.TOLERANCE, eta)})
    eta_chi, opt = chi2_type_eta(q)
    lo, hi = _ends(opt.binning, 1e-3)
    t.rows.append({"state": "max-violation {0,2}^2", "subspace": "{0,2}^2", "lower": lo, "upper": hi,
                   "abs_B": Num(opt.value, BISECTION_WIDTH), "eta_c": "",
                   "eta_state": Num(eta_chi, ref.TOLERANCE, ref.CHI2_TYPE_ETA)})
    g = gamma_state(GammaParams(1.12, 2.36j), cfg.dim)
    b = BinningSet.symmetric(0.48)
    lo, hi = _ends(b, 0.0)
    t.rows.append({"state": "gamma+ (1.12, 2.36i)", "subspace": "", "lower": lo, "upper": hi,
                   "abs_B": Num(abs(state_expectation(g, b, cfg=q)), BISECTION_WIDTH), "eta_c": "",
                   "eta_state": Num(critical_eta_of_state(g, b, q).value, ref.TOLERANCE, ref.GAMMA_ETA)})
    return t


def table_V(cfg: RunConfig) -> Table:
    t = Table("V", ("state", "lower", "upper", "abs_B", "eta", "delta"))
    q = cfg.quadrature
    for name, (value, eta, delta) in ref.TABLE_V.items():
        psi, b = load_fixture(name), fixture_binning(name)
        lo, hi = _ends(b, 0.0)
        t.rows.append({"state": name, "lower": lo, "upper": hi,
                       "abs_B": Num(abs(state_expectation(psi, b, cfg=q)), ref.TOLERANCE, value),
                       "eta": Num(critical_eta_of_state(psi, b, q).value, ref.TOLERANCE, eta),
                       "delta": Num(critical_delta_of_state(psi, b, 1.0, q).value, ref.TOLERANCE, delta)})
    return t


def table_VI(cfg: RunConfig) -> Table:
    t = Table("VI", ("state", "subspace", "lower", "upper", "t_c", "abs_B", "eta_state", "t_state"))
    q = cfg.quadrature
    for name, (value, eta, tc) in ref.TABLE_VI.items():
        spec = _even(int(name[-1]))
        opt = optimize_binning(spec, objective="min-t", grid_step=cfg.grid_step, cfg=q)
        lo, hi = _ends(opt.binning, 1e-3)
        psi, b = load_fixture(name), fixture_binning(name)
        t.rows.append({"state": name, "subspace": _label(spec), "lower": lo, "upper": hi,
                       "t_c": Num(opt.value, ref.TOLERANCE, tc),
                       "abs_B": Num(abs(state_expectation(psi, b, cfg=q)), ref.TOLERANCE, value),
                       "eta_state": Num(critical_eta_of_state(psi, b, q).value, ref.TOLERANCE, eta),
                       "t_state": Num(critical_t_of_state(psi, b, q).value, BISECTION_WIDTH)})
    return t


GAMMA_T = GammaParams(1.03, 1.91j)
GAMMA_ETA_PARAMS = GammaParams(1.12, 2.36j)
GAMMA_BINNING = BinningSet.symmetric(0.48)


def table_VII(cfg: RunConfig) -> Table:
    t = Table("VII", ("state", "lower", "upper", "abs_B", "eta", "t"))
    q = cfg.quadrature
    for name, (value, eta, tt) in ref.TABLE_VII.items():
        if name == "gamma+":
            psi, b = gamma_state(GAMMA_T, cfg.dim), GAMMA_BINNING
        else:
            psi, b = load_fixture(name), fixture_binning(name)
        lo, hi = _ends(b, 0.0)
        t.rows.append({"state": name, "lower": lo, "upper": hi,
                       "abs_B": Num(abs(state_expectation(psi, b, cfg=q)), ref.TOLERANCE, value),
                       "eta": Num(critical_eta_of_state(psi, b, q).value, ref.TOLERANCE, eta),
                       "t": Num(critical_t_of_state(psi, b, q).value, ref.TOLERANCE, tt)})
    return t


TABLES = {"I": table_I, "II": table_II, "III": table_III, "IV": table_IV,
          "V": table_V, "VI": table_VI, "VII": table_VII}


def build_table(table_id: str, cfg: RunConfig) -> Table:
    key = table_id.upper()
    if key not in TABLES:
        raise ValueError(f"unknown table {table_id!r}; choose from {', '.join(TABLE_IDS)}")
    return TABLES[key](cfg)


@dataclass
class Figure:
    number: int
    x_label: str
    series: dict[str, list[tuple[float, float]]]
    crossings: dict[str, Num | None]
    extra_columns: dict[str, list[float]] = field(default_factory=dict)
    tolerance: float = BISECTION_WIDTH


def _sweep_series(sweep: str, cfg: RunConfig, points: int = 1001):
    grid = np.linspace(0.0, 1.0, points)
    q = cfg.quadrature
    gamma = GAMMA_ETA_PARAMS if sweep == "eta" else GAMMA_T
    entries = [("Gamma+", gamma_state(gamma, cfg.dim), GAMMA_BINNING)]
    entries += [(name, load_fixture(name), fixture_binning(name)) for name in ("phi2", "phi4", "phi6", "phi8")]
    series, crossings = {}, {}
    fig_no = 1 if sweep == "eta" else 2
    ref_name, ref_x = ref.FIGURE_CROSSINGS[fig_no]
    for name, psi, b in entries:
        curve = [(x, abs(y)) for x, y in violation_curve(psi, b, sweep, grid, q)]
        series[name] = curve
        cross = curve_crossing(curve)
        if cross is None:
            crossings[name] = None
        elif name == ref_name:
            crossings[name] = Num(cross, ref.CROSSING_TOLERANCE, ref_x)
        else:
            crossings[name] = Num(cross, 1.0 / (points - 1))
    return series, crossings


def figure_data(number: int, cfg: RunConfig) -> Figure:
    if number == 1:
        s, c = _sweep_series("eta", cfg)
        return Figure(1, "eta", s, c, tolerance=1e-3)
    if number == 2:
        s, c = _sweep_series("t", cfg)
        return Figure(2, "t", s, c, tolerance=1e-3)
    if number == 3:
        grid = np.linspace(-1.0, 1.0, 41)
        curve = [(float(c), constrained_chsh_max(float(c))) for c in grid]
        oracle = [vector_oracle(float(c), seed=cfg.seed + i) for i, c in enumerate(grid)]
        ends = {"c=-1": Num(curve[0][1], 1e-6, 2.5), "c=+1": Num(curve[-1][1], 1e-6, 2.5)}
        return Figure(3, "correlator", {"max_abs_B": curve}, ends, {"oracle": oracle}, tolerance=1e-6)
    raise ValueError(f"unknown figure {number!r}; choose from 1, 2, 3")
