"""Command-line front end: config ingestion, orchestration, persistence.

Commands take a JSON config describing the map, the potential, and
command-specific parameters, run the corresponding pipeline, and write CSV
artifacts into the configured output directory. All floating-point output
uses 17 significant digits so files round-trip bit-exactly; identical
configs and seeds produce byte-identical artifacts regardless of the
``--threads`` flag, which is accepted for interface stability but never
changes results (orchestration is single-threaded by design).

Exit codes: 0 success, 2 audit failure, 3 budget or convergence failure
(partial artifacts are still written, with a status column), 64 malformed
configuration (message anchored to the offending line).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .conformal import (
    AtomicMeasure,
    WeightSchedule,
    atom_audit,
    conformality_audit,
    transition_parameter,
    uniform_atoms,
    weak_limit,
)
from .errors import (
    AuditError,
    BudgetError,
    ConfigError,
    ConvergenceError,
    DomainError,
)
from .keller import SampledFunction, norm_chain_audit, norm_report
from .maps import IntervalMap, full_linear_map, logistic4_map, pw_linear_map
from .potentials import (
    BranchConstantPotential,
    ConstantPotential,
    CosineSeriesPotential,
    PiecewiseLinearPotential,
    Potential,
)
from .pressure import (
    appendix_construct,
    hyperbolicity_check,
    pressure_curve,
    tree_pressure,
)
from .transfer import (
    adjoint_invariance_audit,
    correlation,
    equilibrium_state,
    power_iteration,
    smoothed_indicator,
)

DEFAULT_BUDGET = 20_000_000
DEFAULT_GRID = 4096
DEFAULT_TOL = 1e-12

COMMANDS = (
    "pressure",
    "entropy",
    "conformal",
    "equilibrium",
    "correlations",
    "norms",
    "curve",
    "appendix",
    "audit-all",
)


def _fmt(x) -> str:
    if x is None:
        return "nan"
    return format(float(x), ".17g")


def write_csv(path: Path, header: Sequence[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(c if isinstance(c, str) else _fmt(c) for c in row))
    path.write_text("\n".join(lines) + "\n")


def write_measure(path: Path, measure: AtomicMeasure) -> None:
    """Serialize atoms as `point,mass` rows with 17 significant digits."""
    write_csv(path, ("point", "mass"), zip(measure.points, measure.masses))


def read_measure(path: Path) -> AtomicMeasure:
    """Parse a measure file; rejects unsorted points, negative masses, and
    mass sums off by more than 1e-9. Files written by write_measure round-
    trip bit-exactly."""
    lines = Path(path).read_text().strip().splitlines()
    if not lines or lines[0].strip() != "point,mass":
        raise ConfigError(f"{path}:1: expected header 'point,mass'")
    pts, ms = [], []
    for i, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != 2:
            raise ConfigError(f"{path}:{i}: expected two comma-separated cells")
        try:
            pts.append(float(cells[0]))
            ms.append(float(cells[1]))
        except ValueError as exc:
            raise ConfigError(f"{path}:{i}: {exc}") from exc
    points = np.asarray(pts)
    masses = np.asarray(ms)
    if points.size == 0:
        raise ConfigError(f"{path}: no atoms")
    if np.any(np.diff(points) <= 0):
        raise ConfigError(f"{path}: points must be strictly ascending")
    if np.any(masses < 0):
        raise ConfigError(f"{path}: negative mass")
    total = float(masses.sum())
    if abs(total - 1.0) > 1e-9:
        raise ConfigError(f"{path}: mass sum {total!r} is off by more than 1e-9")
    if abs(total - 1.0) > 1e-12:
        masses = masses / total
    return AtomicMeasure(
        points=points,
        masses=masses,
        domain=(float(points[0]), float(points[-1])),
    )


# ---------------------------------------------------------------------------
# configuration


def _line_of(raw: str, key: str) -> Optional[int]:
    needle = f'"{key}"'
    for i, line in enumerate(raw.splitlines(), start=1):
        if needle in line:
            return i
    return None


def _reject_unknown(obj: dict, allowed: set, where: str, raw: str, path: str):
    for key in obj:
        if key not in allowed:
            line = _line_of(raw, key)
            anchor = f"{path}:{line}" if line else path
            raise ConfigError(
                f"{anchor}: unknown key {key!r} in {where} "
                f"(allowed: {sorted(allowed)})"
            )


def _require(obj: dict, key: str, where: str, raw: str, path: str):
    if key not in obj:
        raise ConfigError(f"{path}: missing required key {key!r} in {where}")
    return obj[key]


def build_map(spec: dict, raw: str, path: str) -> IntervalMap:
    if not isinstance(spec, dict):
        raise ConfigError(f"{path}: 'map' must be an object")
    kind = _require(spec, "kind", "map", raw, path)
    if kind == "full_linear":
        _reject_unknown(spec, {"kind", "branches"}, "map", raw, path)
        branches = _require(spec, "branches", "map", raw, path)
        if not isinstance(branches, int) or branches < 2:
            raise ConfigError(f"{path}: map.branches must be an integer >= 2")
        return full_linear_map(branches)
    if kind == "pw_linear":
        _reject_unknown(
            spec, {"kind", "breakpoints", "slopes", "intercepts"}, "map", raw, path
        )
        return pw_linear_map(
            _require(spec, "breakpoints", "map", raw, path),
            _require(spec, "slopes", "map", raw, path),
            _require(spec, "intercepts", "map", raw, path),
        )
    if kind == "logistic4":
        _reject_unknown(spec, {"kind"}, "map", raw, path)
        return logistic4_map()
    raise ConfigError(
        f"{path}: map.kind must be one of full_linear, pw_linear, logistic4"
    )


def build_potential(spec, raw: str, path: str) -> Optional[Potential]:
    if spec is None:
        return None
    if not isinstance(spec, dict):
        raise ConfigError(f"{path}: 'potential' must be an object or null")
    kind = _require(spec, "kind", "potential", raw, path)
    alpha = spec.get("alpha", 1.0)
    if not (isinstance(alpha, (int, float)) and 0 < alpha <= 1):
        raise ConfigError(f"{path}: potential.alpha must lie in (0, 1]")
    if kind == "constant":
        _reject_unknown(spec, {"kind", "values", "alpha"}, "potential", raw, path)
        values = _require(spec, "values", "potential", raw, path)
        if len(values) != 1:
            raise ConfigError(f"{path}: constant potential takes one value")
        return ConstantPotential(float(values[0]))
    if kind == "branch_pw_constant":
        _reject_unknown(
            spec, {"kind", "segments", "values", "alpha"}, "potential", raw, path
        )
        return BranchConstantPotential(
            tuple(_require(spec, "segments", "potential", raw, path)),
            tuple(_require(spec, "values", "potential", raw, path)),
        )
    if kind == "cosine_series":
        _reject_unknown(
            spec, {"kind", "coefficients", "offset", "alpha"}, "potential", raw, path
        )
        return CosineSeriesPotential(
            tuple(_require(spec, "coefficients", "potential", raw, path)),
            offset=float(spec.get("offset", 0.0)),
        )
    if kind == "pw_linear":
        _reject_unknown(
            spec, {"kind", "segments", "values", "alpha"}, "potential", raw, path
        )
        return PiecewiseLinearPotential(
            tuple(_require(spec, "segments", "potential", raw, path)),
            tuple(_require(spec, "values", "potential", raw, path)),
        )
    raise ConfigError(
        f"{path}: potential.kind must be one of constant, branch_pw_constant, "
        f"cosine_series, pw_linear"
    )


class Experiment:
    """Validated configuration plus global flag overrides."""

    def __init__(self, config_path: str, args):
        raw = Path(config_path).read_text()
        try:
            data = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ConfigError(
                f"{config_path}:{exc.lineno}: {exc.msg}"
            ) from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{config_path}: top level must be an object")
        _reject_unknown(
            data,
            {"map", "potential", "command_params", "output_dir", "seed"},
            "config",
            raw,
            config_path,
        )
        self.raw = raw
        self.path = config_path
        self.imap = build_map(
            _require(data, "map", "config", raw, config_path), raw, config_path
        )
        self.potential = build_potential(
            data.get("potential"), raw, config_path
        )
        params = data.get("command_params", {})
        if not isinstance(params, dict):
            raise ConfigError(f"{config_path}: command_params must be an object")
        self.params = params
        self.outdir = Path(data.get("output_dir", "."))
        seed = data.get("seed", 0)
        if not isinstance(seed, int) or seed < 0:
            raise ConfigError(f"{config_path}: seed must be a non-negative integer")
        self.seed = seed
        self.budget = args.budget
        self.grid = args.grid
        self.tol = args.tol

    def take(self, keys: dict) -> dict:
        """Validate command_params against `keys` (name -> default)."""
        _reject_unknown(
            self.params, set(keys), "command_params", self.raw, self.path
        )
        return {k: self.params.get(k, v) for k, v in keys.items()}


# ---------------------------------------------------------------------------
# command pipelines


def _pressure_rows(report, requested_max: int):
    status = "ok" if report.depths[-1] >= requested_max else "budget"
    rows = [
        (int(n), p, report.estimate, report.fluctuation, status)
        for n, p in zip(report.depths, report.p_values)
    ]
    return rows, status


def cmd_pressure(exp: Experiment, out: Path) -> int:
    p = exp.take({"x0": 0.3, "n_min": 1, "n_max": 12})
    report = tree_pressure(
        exp.imap,
        exp.potential,
        p["x0"],
        p["n_max"],
        n_min=p["n_min"],
        budget=exp.budget,
        partial_on_budget=True,
    )
    rows, status = _pressure_rows(report, p["n_max"])
    write_csv(out / "pressure.csv", ("n", "p_n", "P_hat", "delta", "status"), rows)
    return 0 if status == "ok" else 3


def cmd_entropy(exp: Experiment, out: Path) -> int:
    p = exp.take({"x0": 0.3, "n_min": 1, "n_max": 12})
    report = tree_pressure(
        exp.imap,
        None,
        p["x0"],
        p["n_max"],
        n_min=p["n_min"],
        budget=exp.budget,
        partial_on_budget=True,
    )
    rows, status = _pressure_rows(report, p["n_max"])
    write_csv(out / "entropy.csv", ("n", "p_n", "P_hat", "delta", "status"), rows)
    return 0 if status == "ok" else 3


def _conformal_pipeline(exp: Experiment, p: dict):
    trans = transition_parameter(
        exp.imap, exp.potential, p["x0"], p["n_max"], budget=exp.budget
    )
    limit = weak_limit(
        exp.imap,
        exp.potential,
        p["x0"],
        trans.c,
        p["n_max"],
        bins=p["bins"],
        tol=max(exp.tol, 1e-6),
        weights=WeightSchedule(theta=p["theta"]),
        budget=exp.budget,
    )
    return trans, limit


CONFORMAL_PARAMS = {"x0": 0.3, "n_max": 14, "bins": 64, "theta": 0.0}


def _conformal_row(trans, limit, status):
    return (
        trans.c,
        trans.residual,
        limit.s_values[-1],
        limit.eta_final,
        limit.stability,
        "true" if limit.converged else "false",
        int(limit.window[0]),
        int(limit.window[1]),
        status,
    )


CONFORMAL_HEADER = (
    "c",
    "fit_residual",
    "s_final",
    "eta_final",
    "stability",
    "converged",
    "window_lo",
    "window_hi",
    "status",
)


def cmd_conformal(exp: Experiment, out: Path) -> int:
    p = exp.take(CONFORMAL_PARAMS)
    trans, limit = _conformal_pipeline(exp, p)
    status = "ok" if limit.converged else "not_converged"
    write_measure(out / "measure.csv", limit.measure)
    write_csv(
        out / "binned.csv",
        ("bin", "mass"),
        ((int(i), m) for i, m in enumerate(limit.binned)),
    )
    write_csv(out / "conformal.csv", CONFORMAL_HEADER, [_conformal_row(trans, limit, status)])
    return 0 if limit.converged else 3


EQUILIBRIUM_HEADER = (
    "lambda",
    "log_lambda",
    "tree_P_hat",
    "entropy",
    "potential_mean",
    "residual",
    "iterations",
    "rho_hat",
    "fit_r2",
    "hyperbolicity",
    "status",
)


def _equilibrium_pipeline(exp: Experiment, p: dict, mu: AtomicMeasure):
    tree = tree_pressure(
        exp.imap, exp.potential, p["x0"], p["tree_depth"], budget=exp.budget
    )
    eigen = power_iteration(
        exp.imap, exp.potential, grid_size=exp.grid, tol=exp.tol, mu=mu
    )
    hyper = hyperbolicity_check(
        exp.imap, exp.potential, tree.estimate, grid_size=exp.grid
    )
    state = equilibrium_state(
        exp.imap, exp.potential, mu, eigen,
        hyperbolic=hyper.verdict == "hyperbolic",
    )
    return tree, eigen, hyper, state


def _equilibrium_row(tree, eigen, hyper, state, status):
    return (
        eigen.eigenvalue,
        eigen.log_eigenvalue,
        tree.estimate,
        state.entropy,
        state.potential_mean,
        eigen.residual,
        int(eigen.iterations),
        eigen.rho_hat,
        eigen.fit_r2,
        hyper.verdict,
        status,
    )


def cmd_equilibrium(exp: Experiment, out: Path) -> int:
    p = exp.take({**CONFORMAL_PARAMS, "tree_depth": 12})
    trans, limit = _conformal_pipeline(exp, p)
    tree, eigen, hyper, state = _equilibrium_pipeline(exp, p, limit.measure)
    status = "ok" if (limit.converged and eigen.converged) else "not_converged"
    write_measure(out / "mu.csv", limit.measure)
    write_measure(out / "nu.csv", state.nu)
    write_csv(
        out / "equilibrium.csv",
        EQUILIBRIUM_HEADER,
        [_equilibrium_row(tree, eigen, hyper, state, status)],
    )
    return 0 if status == "ok" else 3


def cmd_correlations(exp: Experiment, out: Path) -> int:
    p = exp.take(
        {
            **CONFORMAL_PARAMS,
            "tree_depth": 12,
            "lags": 12,
            "observables": None,
        }
    )
    trans, limit = _conformal_pipeline(exp, p)
    tree, eigen, hyper, state = _equilibrium_pipeline(exp, p, limit.measure)
    lo, hi = exp.imap.domain
    obs_specs = p["observables"]
    if obs_specs is None:
        obs_specs = [{"lo": lo, "hi": lo + (hi - lo) / 3.0, "width": 0.05}]
    rows = []
    for idx, spec in enumerate(obs_specs):
        if set(spec) - {"lo", "hi", "width"}:
            raise ConfigError(
                f"{exp.path}: observable keys are lo, hi, width"
            )
        fn = smoothed_indicator(
            float(spec["lo"]), float(spec["hi"]), float(spec.get("width", 0.05))
        )
        rep = correlation(exp.imap, fn, fn, state, n_max=p["lags"])
        status = "below_resolution" if rep.below_resolution else "ok"
        rho = rep.rho if rep.rho is not None else float("nan")
        r2 = rep.r_squared if rep.r_squared is not None else float("nan")
        for n, c in zip(rep.ns, rep.c_values):
            rows.append((int(idx), int(n), c, rho, r2, status))
    write_csv(
        out / "correlations.csv",
        ("observable", "n", "c_n", "rho", "r_squared", "status"),
        rows,
    )
    return 0


def cmd_norms(exp: Experiment, out: Path) -> int:
    p = exp.take(
        {"alpha": 0.5, "scale": 0.5, "draws": 20, "atoms": 48, "p": None}
    )
    rng = np.random.default_rng(exp.seed)
    m = uniform_atoms(p["atoms"], exp.imap.domain)
    rows = []
    all_passed = True
    for draw in range(p["draws"]):
        values = np.zeros(p["atoms"])
        for _ in range(rng.integers(0, 4)):
            values += rng.uniform(-1, 1) * (
                m.points >= rng.uniform(*exp.imap.domain)
            )
        for _ in range(rng.integers(1, 4)):
            c = rng.uniform(*exp.imap.domain)
            values += rng.uniform(-1, 1) * np.abs(m.points - c) ** p["alpha"]
        h = SampledFunction(m.points, values)
        report = norm_report(h, m, p["alpha"], p["scale"], p=p["p"])
        audit = norm_chain_audit(h, m, p["alpha"], p["scale"])
        all_passed &= audit.passed
        worst = min(chk.slack for chk in audit.checks)
        rows.append(
            (
                int(draw),
                p["alpha"],
                report.l1,
                report.keller_seminorm,
                report.keller_norm,
                report.var_p,
                report.bv_norm,
                report.holder_norm,
                audit.c_star,
                "true" if audit.passed else "false",
                worst,
                "ok" if audit.passed else "audit_failed",
            )
        )
    write_csv(
        out / "norms.csv",
        (
            "draw",
            "alpha",
            "l1",
            "keller_seminorm",
            "keller_norm",
            "var_p",
            "bv_norm",
            "holder_norm",
            "c_star",
            "passed",
            "worst_slack",
            "status",
        ),
        rows,
    )
    return 0 if all_passed else 2


def cmd_curve(exp: Experiment, out: Path) -> int:
    p = exp.take(
        {
            "x0": 0.3,
            "n_max": 8,
            "t_lo": -1.0,
            "t_hi": 1.0,
            "t_count": 21,
            "chi": None,
        }
    )
    if p["chi"] is None:
        raise ConfigError(f"{exp.path}: curve requires command_params.chi")
    chi = build_potential(p["chi"], exp.raw, exp.path)
    ts = np.linspace(p["t_lo"], p["t_hi"], p["t_count"])
    curve = pressure_curve(
        exp.imap,
        exp.potential,
        chi,
        ts,
        x0=p["x0"],
        n_max=p["n_max"],
        budget=exp.budget,
    )
    rows = [
        (t, est, d1, d2, curve.fit_residual)
        for t, est, d1, d2 in zip(
            curve.ts, curve.estimates, curve.first_diff, curve.second_diff
        )
    ]
    write_csv(
        out / "curve.csv",
        ("t", "P_hat", "dP_central", "d2P_central", "fit_residual"),
        rows,
    )
    return 0


def cmd_appendix(exp: Experiment, out: Path) -> int:
    p = exp.take({"gap": float(np.log(4.0)), "x0": 0.3, "n_max": 11})
    rep = appendix_construct(p["gap"], x0=p["x0"], n_max=p["n_max"], budget=exp.budget)
    write_csv(
        out / "appendix.csv",
        (
            "gap",
            "sup_phi",
            "inf_phi",
            "phi_range",
            "P_hat",
            "entropy",
            "hyperbolic",
            "hyperbolic_margin",
            "bounded_range",
            "phi_at_fixed_point",
            "status",
        ),
        [
            (
                rep.gap,
                rep.sup_phi,
                rep.inf_phi,
                rep.phi_range,
                rep.pressure.estimate,
                rep.entropy.estimate,
                "true" if rep.hyperbolic else "false",
                rep.hyperbolic_margin,
                "true" if rep.bounded_range else "false",
                rep.phi_at_fixed_point,
                "ok",
            )
        ],
    )
    return 0


def _single_branch_intervals(imap: IntervalMap, count: int):
    """Evenly spaced test intervals strictly inside each branch cell."""
    per = max(1, count // len(imap.branches))
    out = []
    for br in imap.branches:
        width = br.hi - br.lo
        for i in range(per):
            a = br.lo + width * (i + 0.2) / (per + 0.4)
            b = a + 0.55 * width / (per + 0.4)
            out.append((a, b))
    return out[:count]


def cmd_audit_all(exp: Experiment, out: Path) -> int:
    p = exp.take(
        {
            **CONFORMAL_PARAMS,
            "tree_depth": 12,
            "intervals": 20,
            "conformality_bound": 1e-2,
            "adjoint_bound": 1e-2,
        }
    )
    trans, limit = _conformal_pipeline(exp, p)
    tree = tree_pressure(
        exp.imap, exp.potential, p["x0"], p["tree_depth"], budget=exp.budget
    )
    rows, status = _pressure_rows(tree, p["tree_depth"])
    write_csv(out / "pressure.csv", ("n", "p_n", "P_hat", "delta", "status"), rows)
    write_measure(out / "measure.csv", limit.measure)
    write_csv(
        out / "conformal.csv",
        CONFORMAL_HEADER,
        [_conformal_row(trans, limit, "ok" if limit.converged else "not_converged")],
    )

    audits = []

    conf = conformality_audit(
        limit.measure,
        exp.imap,
        exp.potential,
        trans.c,
        _single_branch_intervals(exp.imap, p["intervals"]),
    )
    audits.append(("conformality_max_delta", conf.max_delta, p["conformality_bound"]))

    atoms = atom_audit(limit.measure, (64, 512))
    support = float(np.min(limit.measure.bin_masses(64)))
    audits.append(("full_support_min_64bin", -support, 0.0))

    eigen = power_iteration(
        exp.imap, exp.potential, grid_size=exp.grid, tol=exp.tol, mu=limit.measure
    )
    gap = abs(eigen.log_eigenvalue - tree.estimate)
    audits.append(
        ("eigen_vs_tree", gap, max(2.0 * tree.fluctuation, 1e-2))
    )

    hyper = hyperbolicity_check(
        exp.imap, exp.potential, tree.estimate, grid_size=exp.grid
    )
    state = equilibrium_state(
        exp.imap, exp.potential, limit.measure, eigen, hyperbolic=False
    )
    if hyper.verdict == "hyperbolic":
        audits.append(("entropy_positive", -state.entropy, 0.0))
    write_measure(out / "nu.csv", state.nu)
    write_csv(
        out / "equilibrium.csv",
        EQUILIBRIUM_HEADER,
        [
            _equilibrium_row(
                tree, eigen, hyper, state,
                "ok" if eigen.converged else "not_converged",
            )
        ],
    )

    lo, hi = exp.imap.domain
    suite = [
        lambda x: np.ones_like(np.asarray(x, dtype=float)),
        lambda x: np.asarray(x, dtype=float),
        lambda x: np.asarray(x, dtype=float) ** 2,
        lambda x: np.cos(np.pi * (np.asarray(x, dtype=float) - lo) / (hi - lo)),
        lambda x: np.sin(2 * np.pi * (np.asarray(x, dtype=float) - lo) / (hi - lo)),
        lambda x: np.exp(np.asarray(x, dtype=float) - lo),
        smoothed_indicator(lo + 0.1 * (hi - lo), lo + 0.3 * (hi - lo)),
        smoothed_indicator(lo + 0.5 * (hi - lo), lo + 0.9 * (hi - lo)),
        lambda x: np.abs(np.asarray(x, dtype=float) - lo - 0.37 * (hi - lo)),
        lambda x: (np.asarray(x, dtype=float) >= lo + (hi - lo) / 3.0).astype(float),
    ]
    dev = adjoint_invariance_audit(
        exp.imap,
        exp.potential,
        eigen.log_eigenvalue,
        limit.measure,
        suite,
        grid_size=exp.grid,
    )
    audits.append(("adjoint_max_deviation", dev, p["adjoint_bound"]))

    audit_rows = []
    all_passed = True
    for name, value, bound in audits:
        passed = value <= bound
        all_passed &= passed
        audit_rows.append(
            (name, value, bound, "true" if passed else "false",
             "ok" if passed else "audit_failed")
        )
    audit_rows.append(
        (
            "atom_max_bin_mass_512",
            float(atoms.max_bin_masses[-1]),
            float("nan"),
            "true",
            "ok",
        )
    )
    write_csv(
        out / "audit.csv",
        ("name", "value", "bound", "passed", "status"),
        audit_rows,
    )
    if not limit.converged or not eigen.converged:
        return 3
    return 0 if all_passed else 2


RUNNERS: dict[str, Callable[[Experiment, Path], int]] = {
    "pressure": cmd_pressure,
    "entropy": cmd_entropy,
    "conformal": cmd_conformal,
    "equilibrium": cmd_equilibrium,
    "correlations": cmd_correlations,
    "norms": cmd_norms,
    "curve": cmd_curve,
    "appendix": cmd_appendix,
    "audit-all": cmd_audit_all,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="thermomap",
        description="Thermodynamic-formalism experiments on interval maps",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("config", help="path to a JSON experiment config")
    parser.add_argument("--budget", type=int, default=DEFAULT_BUDGET,
                        help="preimage-tree node budget")
    parser.add_argument("--grid", type=int, default=DEFAULT_GRID,
                        help="transfer-operator grid size")
    parser.add_argument("--tol", type=float, default=DEFAULT_TOL,
                        help="iteration tolerance")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker threads (affects speed only, never results)")
    args = parser.parse_args(argv)

    if args.threads < 1:
        print(f"{parser.prog}: --threads must be >= 1", file=sys.stderr)
        return 64
    if args.budget < 1 or args.grid < 16 or not args.tol > 0:
        print(f"{parser.prog}: invalid --budget/--grid/--tol", file=sys.stderr)
        return 64

    try:
        exp = Experiment(args.config, args)
        out = exp.outdir
        out.mkdir(parents=True, exist_ok=True)
        return RUNNERS[args.command](exp, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 64
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 64
    except AuditError as exc:
        print(f"audit failure: {exc}", file=sys.stderr)
        return 2
    except (BudgetError, ConvergenceError) as exc:
        print(f"resource/convergence failure: {exc}", file=sys.stderr)
        return 3
    except DomainError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 64


if __name__ == "__main__":
    sys.exit(main())
