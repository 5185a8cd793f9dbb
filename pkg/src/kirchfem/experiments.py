"""Config-driven experiment commands: hypothesis audit, threshold estimation,
single solves and two-parameter sweeps, with reproducible report files.

A run is described by one YAML config file (grammar documented in the README).
Reports are deterministic JSON trees (sorted keys, format-version field);
sweeps additionally emit a flat comma-separated table with a fixed column
order.  Config echo plus seed reproduce every number bit for bit.
"""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from .errors import ConfigError, FeasibilityError, KirchfemError
from .fem import FeFunction, Mesh, assemble, build_interval_mesh, build_rect_mesh
from .model import (
    KirchhoffLaw,
    Nonlinearity,
    SamplingConfig,
    affine_law,
    bump_nonlinearity,
    check_hypotheses,
    constant_law,
    decay_law,
    linear_nonlinearity,
    scale_nonlinearity,
    sine_forcing,
    sine_t_nonlinearity,
)
from .solvers import (
    Problem,
    SolutionSet,
    SolverOptions,
    ThresholdEstimate,
    ThresholdOptions,
    estimate_threshold,
    newton_deflated,
    standard_starts,
)

log = logging.getLogger("kirchfem")

FORMAT_VERSION = 1
TABLE_COLUMNS = (
    "format_version",
    "lambda_index",
    "lambda",
    "mu",
    "solution_count",
    "max_norm",
    "min_pairwise_distance",
    "max_residual",
)

_LAW_KINDS = ("affine", "constant", "decay")
_NL_KINDS = ("bump", "linear", "sin_forcing", "sin_t")


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ConfigError(message)


def _get_section(raw: dict, key: str, required: bool = False) -> dict:
    section = raw.get(key)
    if section is None:
        _require(not required, f"missing config section '{key}'")
        return {}
    _require(isinstance(section, dict), f"config section '{key}' must be a mapping")
    return dict(section)


def _build_law(section: dict) -> KirchhoffLaw:
    kind = section.get("kind")
    _require(kind in _LAW_KINDS, f"law.kind must be one of {_LAW_KINDS}, got {kind!r}")
    try:
        if kind == "affine":
            law = affine_law(float(section.get("a", 1.0)), float(section.get("b", 1.0)))
        elif kind == "constant":
            law = constant_law(float(section.get("value", 1.0)))
        else:
            law = decay_law()
    except KirchfemError as exc:
        raise ConfigError(f"invalid law parameters: {exc}") from exc
    if "alpha" in section:
        alpha = float(section["alpha"])
        _require(alpha > 0, f"law.alpha must be positive, got {alpha}")
        law = KirchhoffLaw(
            coefficient=law.coefficient,
            growth_exponent=alpha,
            primitive=law.primitive,
            derivative=law.derivative,
            monotone_onto=law.monotone_onto,
            name=law.name,
        )
    return law


def _build_nonlinearity(section: dict) -> Nonlinearity:
    kind = section.get("kind")
    _require(kind in _NL_KINDS, f"nonlinearity kind must be one of {_NL_KINDS}, got {kind!r}")
    nl = {
        "bump": bump_nonlinearity,
        "linear": linear_nonlinearity,
        "sin_forcing": sine_forcing,
        "sin_t": sine_t_nonlinearity,
    }[kind]()
    scale = float(section.get("scale", 1.0))
    _require(scale > 0, f"nonlinearity scale must be positive, got {scale}")
    if scale != 1.0:
        nl = scale_nonlinearity(nl, scale)
    return nl


@dataclass
class RunConfig:
    """Validated run configuration; ``raw`` is the resolved echo written to reports."""

    raw: dict
    seed: int
    out_dir: Optional[Path]
    dimension: int
    cells: tuple
    lengths: tuple
    law: KirchhoffLaw
    source: Nonlinearity
    perturbation: Optional[Nonlinearity]
    sampling: SamplingConfig
    threshold_opts: ThresholdOptions
    solver_opts: SolverOptions
    n_random_starts: int
    start_amplitudes: tuple
    solve_lam: Optional[dict]
    solve_mu: float
    sweep_lambdas: Optional[dict]
    sweep_mu: Optional[dict]
    sweep_workers: int

    @staticmethod
    def from_file(
        path: str | Path,
        seed_override: Optional[int] = None,
        out_override: Optional[str] = None,
    ) -> "RunConfig":
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            raw = yaml.safe_load(path.read_text())
        except yaml.YAMLError as exc:
            raise ConfigError(f"config is not valid YAML: {exc}") from exc
        return RunConfig.from_dict(raw, seed_override, out_override)

    @staticmethod
    def from_dict(
        raw,
        seed_override: Optional[int] = None,
        out_override: Optional[str] = None,
    ) -> "RunConfig":
        _require(isinstance(raw, dict), "config must be a mapping")
        raw = json.loads(json.dumps(raw))  # deep copy with plain types
        version = raw.get("format_version", FORMAT_VERSION)
        _require(version == FORMAT_VERSION, f"unsupported config format_version {version!r}")
        raw["format_version"] = FORMAT_VERSION

        seed = raw.get("seed", 0) if seed_override is None else seed_override
        _require(isinstance(seed, int) and seed >= 0, f"seed must be a non-negative integer, got {seed!r}")
        raw["seed"] = seed

        domain = _get_section(raw, "domain", required=True)
        dimension = domain.get("dimension")
        _require(dimension in (1, 2), f"domain.dimension must be 1 or 2, got {dimension!r}")
        cells = domain.get("cells")
        _require(
            isinstance(cells, list) and len(cells) == dimension,
            f"domain.cells must be a list of {dimension} positive integers",
        )
        _require(
            all(isinstance(c, int) and c >= 2 for c in cells),
            f"every entry of domain.cells must be an integer >= 2, got {cells}",
        )
        lengths = domain.get("lengths", [1.0] * dimension)
        _require(
            isinstance(lengths, list) and len(lengths) == dimension,
            f"domain.lengths must be a list of {dimension} positive reals",
        )
        lengths = [float(x) for x in lengths]
        _require(all(x > 0 for x in lengths), f"domain.lengths must be positive, got {lengths}")
        domain["lengths"] = lengths
        raw["domain"] = domain

        law = _build_law(_get_section(raw, "law", required=True))
        source = _build_nonlinearity(_get_section(raw, "nonlinearity", required=True))
        perturbation = None
        if raw.get("perturbation") is not None:
            perturbation = _build_nonlinearity(_get_section(raw, "perturbation"))

        hyp = _get_section(raw, "hypotheses")
        sampling = SamplingConfig(
            points_per_decade=int(hyp.get("points_per_decade", 200)),
            positive_tol=float(hyp.get("positive_tol", 1e-9)),
            ambient_dim=hyp.get("ambient_dim"),
        )
        _require(sampling.points_per_decade > 0, "hypotheses.points_per_decade must be positive")
        _require(sampling.positive_tol > 0, "hypotheses.positive_tol must be positive")
        if sampling.ambient_dim is not None:
            _require(
                isinstance(sampling.ambient_dim, int) and sampling.ambient_dim >= 1,
                "hypotheses.ambient_dim must be a positive integer",
            )

        th = _get_section(raw, "theta_star")
        threshold_opts = ThresholdOptions(
            n_eigen=int(th.get("n_eigen", 5)),
            n_random=int(th.get("n_random", 8)),
            t_per_decade=int(th.get("t_per_decade", 10)),
            golden_iters=int(th.get("golden_iters", 48)),
            polish_iters=int(th.get("polish_iters", 60)),
            seed=seed,
        )
        _require(threshold_opts.n_eigen >= 0, "theta_star.n_eigen must be >= 0")
        _require(threshold_opts.n_random >= 0, "theta_star.n_random must be >= 0")

        sv = _get_section(raw, "solver")
        solver_opts = SolverOptions(
            accept_tol=float(sv.get("accept_tol", 1e-8)),
            max_iter=int(sv.get("max_iter", 100)),
            distinct_tol=float(sv.get("distinct_tol", 1e-3)),
        )
        _require(solver_opts.accept_tol > 0, "solver.accept_tol must be positive")
        _require(solver_opts.max_iter > 0, "solver.max_iter must be positive")
        _require(solver_opts.distinct_tol > 0, "solver.distinct_tol must be positive")
        n_random_starts = int(sv.get("n_random_starts", 12))
        _require(n_random_starts >= 0, "solver.n_random_starts must be >= 0")
        start_amplitudes = tuple(float(a) for a in sv.get("start_amplitudes", [0.5, 1.5, 3.0]))
        _require(len(start_amplitudes) > 0, "solver.start_amplitudes must be nonempty")

        solve_lam = None
        solve_mu = 0.0
        if raw.get("solve") is not None:
            s = _get_section(raw, "solve")
            solve_lam = _parse_lambda_spec(s.get("lam", 0.0), "solve.lam")
            solve_mu = float(s.get("mu", 0.0))
            _require(solve_mu >= 0, f"solve.mu must be >= 0, got {solve_mu}")
            _require(
                solve_mu == 0.0 or perturbation is not None,
                "solve.mu > 0 requires a perturbation section",
            )

        sweep_lambdas = None
        sweep_mu = None
        sweep_workers = 1
        if raw.get("sweep") is not None:
            s = _get_section(raw, "sweep")
            lams = s.get("lambdas")
            _require(lams is not None, "sweep.lambdas is required for sweeps")
            if isinstance(lams, dict):
                mults = lams.get("theta_multiples")
                _require(
                    isinstance(mults, list) and len(mults) > 0,
                    "sweep.lambdas.theta_multiples must be a nonempty list",
                )
                sweep_lambdas = {"theta_multiples": [float(m) for m in mults]}
            else:
                _require(
                    isinstance(lams, list) and len(lams) > 0,
                    "sweep.lambdas must be a nonempty list or {theta_multiples: [...]}",
                )
                sweep_lambdas = {"values": [float(v) for v in lams]}
            mu = s.get("mu", {"values": [0.0]})
            _require(isinstance(mu, dict), "sweep.mu must be a mapping")
            if "values" in mu:
                vals = mu["values"]
                _require(
                    isinstance(vals, list) and len(vals) > 0 and all(float(v) >= 0 for v in vals),
                    "sweep.mu.values must be a nonempty list of reals >= 0",
                )
                sweep_mu = {"values": sorted(float(v) for v in vals)}
            elif "bisect" in mu:
                b = mu["bisect"]
                _require(isinstance(b, dict), "sweep.mu.bisect must be a mapping")
                sweep_mu = {
                    "bisect": {
                        "max": b.get("max"),
                        "max_lambda_fraction": b.get("max_lambda_fraction"),
                        "tol_lambda_fraction": float(b.get("tol_lambda_fraction", 1e-3)),
                    }
                }
                _require(
                    (b.get("max") is not None) != (b.get("max_lambda_fraction") is not None),
                    "sweep.mu.bisect needs exactly one of 'max' or 'max_lambda_fraction'",
                )
            else:
                raise ConfigError("sweep.mu must contain 'values' or 'bisect'")
            has_positive_mu = ("bisect" in sweep_mu) or any(v > 0 for v in sweep_mu["values"])
            _require(
                not has_positive_mu or perturbation is not None,
                "sweep with mu > 0 requires a perturbation section",
            )
            sweep_workers = int(s.get("workers", 1))
            _require(sweep_workers >= 1, "sweep.workers must be >= 1")

        out_dir = out_override if out_override is not None else _get_section(raw, "output").get("dir")

        return RunConfig(
            raw=raw,
            seed=seed,
            out_dir=None if out_dir is None else Path(out_dir),
            dimension=dimension,
            cells=tuple(cells),
            lengths=tuple(lengths),
            law=law,
            source=source,
            perturbation=perturbation,
            sampling=sampling,
            threshold_opts=threshold_opts,
            solver_opts=solver_opts,
            n_random_starts=n_random_starts,
            start_amplitudes=start_amplitudes,
            solve_lam=solve_lam,
            solve_mu=solve_mu,
            sweep_lambdas=sweep_lambdas,
            sweep_mu=sweep_mu,
            sweep_workers=sweep_workers,
        )

    def build_mesh(self) -> Mesh:
        if self.dimension == 1:
            return build_interval_mesh(self.cells[0], self.lengths[0])
        return build_rect_mesh(self.cells[0], self.cells[1], self.lengths[0], self.lengths[1])


def _parse_lambda_spec(value, where: str) -> dict:
    if isinstance(value, dict):
        mult = value.get("theta_multiple")
        _require(mult is not None, f"{where} mapping must contain theta_multiple")
        return {"theta_multiple": float(mult)}
    try:
        return {"value": float(value)}
    except (TypeError, ValueError):
        raise ConfigError(f"{where} must be a number or {{theta_multiple: m}}, got {value!r}")


# ---------------------------------------------------------------------------
# report plumbing
# ---------------------------------------------------------------------------


def _jsonify(obj):
    """Plain JSON types only; non-finite floats become null."""
    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):  # before int: bool is an int subclass
        return bool(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return _jsonify(obj.tolist())
    return obj


def render_json(report: dict) -> str:
    return json.dumps(_jsonify(report), sort_keys=True, indent=2) + "\n"


def write_report(report: dict, out_dir: Path, filename: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / filename
    path.write_text(render_json(report))
    return path


def _table_field(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_table(rows: list[dict]) -> str:
    lines = [",".join(TABLE_COLUMNS)]
    for row in rows:
        lines.append(",".join(_table_field(row[c]) for c in TABLE_COLUMNS))
    return "\n".join(lines) + "\n"


def _solution_entry(point) -> dict:
    return {
        "node_values": point.u.to_full().tolist(),
        "norm": point.energies.norm,
        "residual_norm": point.residual_norm,
        "energies": point.energies.to_dict(),
        "iterations": point.iterations,
        "origin": point.origin,
    }


def _base_report(cfg: RunConfig, command: str) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "command": command,
        "config": cfg.raw,
        "seed": cfg.seed,
    }


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_check(cfg: RunConfig) -> tuple[dict, int]:
    """Hypothesis audit; exit 0 iff no condition failed (inconclusive allowed)."""
    mesh = cfg.build_mesh()
    report = check_hypotheses(cfg.law, cfg.source, mesh, cfg.sampling)
    out = _base_report(cfg, "check")
    out["mesh"] = mesh.describe()
    out["report"] = report.to_dict()
    code = 0 if report.ok() else 1
    log.info(
        "hypothesis audit on %s: %s",
        mesh.describe(),
        "all satisfied" if report.ok() else f"failures: {report.failures()}",
    )
    return out, code


def _estimate(cfg: RunConfig, ops) -> ThresholdEstimate:
    return estimate_threshold(ops, cfg.law, cfg.source, cfg.threshold_opts)


def cmd_theta_star(cfg: RunConfig) -> tuple[dict, int]:
    """Threshold estimation; writes value, minimizer node values and diagnostics."""
    mesh = cfg.build_mesh()
    ops = assemble(mesh)
    est = _estimate(cfg, ops)
    out = _base_report(cfg, "theta-star")
    out["mesh"] = est.mesh_id
    out["value"] = est.value
    out["minimizer_node_values"] = est.minimizer.to_full().tolist()
    out["diagnostics"] = est.diagnostics
    log.info("threshold estimate on %s: %.12g", est.mesh_id, est.value)
    return out, 0


def _resolve_lambda(cfg: RunConfig, spec: dict, ops) -> tuple[float, Optional[ThresholdEstimate]]:
    if "value" in spec:
        return spec["value"], None
    est = _estimate(cfg, ops)
    return spec["theta_multiple"] * est.value, est


def _build_starts(cfg: RunConfig, ops, est: Optional[ThresholdEstimate]):
    return standard_starts(
        ops,
        n_random=cfg.n_random_starts,
        seed=cfg.seed,
        amplitudes=cfg.start_amplitudes,
        threshold_minimizer=None if est is None else est.minimizer,
    )


def _run_cell(cfg: RunConfig, ops, starts, lam: float, mu: float) -> SolutionSet:
    problem = Problem(
        ops=ops,
        law=cfg.law,
        source=cfg.source,
        perturbation=cfg.perturbation,
        lam=lam,
        mu=mu,
    )
    return newton_deflated(problem, starts, cfg.solver_opts)


def cmd_solve(cfg: RunConfig) -> tuple[dict, int]:
    """Deflated multistart solve at one (lambda, mu); exit 0 on >= 1 solution."""
    _require(cfg.solve_lam is not None, "config has no 'solve' section")
    mesh = cfg.build_mesh()
    ops = assemble(mesh)
    lam, est = _resolve_lambda(cfg, cfg.solve_lam, ops)
    starts = _build_starts(cfg, ops, est)
    solset = _run_cell(cfg, ops, starts, lam, cfg.solve_mu)
    out = _base_report(cfg, "solve")
    out["mesh"] = mesh.describe()
    out["lambda"] = lam
    out["mu"] = cfg.solve_mu
    out["theta_star_used"] = None if est is None else est.value
    out["n_starts"] = len(starts)
    out["solution_count"] = solset.count
    out["solutions"] = [_solution_entry(p) for p in solset.points]
    out["min_pairwise_distance"] = (
        solset.min_pairwise_distance(ops) if solset.count > 1 else None
    )
    out["abandoned_starts"] = [
        {"start_index": i, "reason": r} for i, r in solset.failures
    ]
    log.info(
        "solve at lambda=%.6g mu=%.6g: %d solution(s) from %d starts",
        lam,
        cfg.solve_mu,
        solset.count,
        len(starts),
    )
    return out, 0 if solset.count >= 1 else 1


def _cell_record(ops, lam_index: int, lam: float, mu: float, solset: SolutionSet) -> dict:
    return {
        "lambda_index": lam_index,
        "lambda": lam,
        "mu": mu,
        "solution_count": solset.count,
        "max_norm": solset.max_norm,
        "min_pairwise_distance": (
            solset.min_pairwise_distance(ops) if solset.count > 1 else None
        ),
        "residuals": [p.residual_norm for p in solset.points],
        "norms": [p.energies.norm for p in solset.points],
    }


def _sweep_row(cfg: RunConfig, ops, starts, lam_index: int, lam: float) -> dict:
    """All cells of one lambda row: explicit mu list or bisection for the budget."""
    cells: dict[float, dict] = {}

    def run(mu: float) -> dict:
        log.info("sweep cell lambda=%.6g mu=%.6g", lam, mu)
        rec = _cell_record(ops, lam_index, lam, mu, _run_cell(cfg, ops, starts, lam, mu))
        cells[mu] = rec
        return rec

    if "values" in cfg.sweep_mu:
        for mu in cfg.sweep_mu["values"]:
            run(mu)
        qualifying = [mu for mu, rec in cells.items() if rec["solution_count"] >= 3]
        delta = max(qualifying) if qualifying else None
    else:
        b = cfg.sweep_mu["bisect"]
        mu_max = b["max"] if b["max"] is not None else b["max_lambda_fraction"] * lam
        tol = b["tol_lambda_fraction"] * lam
        first = run(0.0)
        if first["solution_count"] < 3:
            delta = None
        else:
            top = run(mu_max)
            if top["solution_count"] >= 3:
                delta = mu_max
            else:
                lo, hi = 0.0, mu_max
                while hi - lo > tol:
                    mid = 0.5 * (lo + hi)
                    if run(mid)["solution_count"] >= 3:
                        lo = mid
                    else:
                        hi = mid
                delta = lo
            if delta and delta > 0 and (delta / 2.0) not in cells:
                run(delta / 2.0)

    anomalies = []
    if delta is not None:
        for mu, rec in cells.items():
            if mu <= delta and rec["solution_count"] < 3:
                anomalies.append(
                    {
                        "lambda_index": lam_index,
                        "mu": mu,
                        "solution_count": rec["solution_count"],
                        "note": "below the empirical budget but fewer than 3 solutions",
                    }
                )
    return {
        "lambda_index": lam_index,
        "lambda": lam,
        "cells": [cells[mu] for mu in sorted(cells)],
        "delta_empirical": delta,
        "anomalies": anomalies,
    }


def _sweep_row_from_raw(raw: dict, lam_index: int, lam: float, theta_min_coeffs) -> dict:
    """Worker entry: rebuild everything from the config echo (picklable args only)."""
    cfg = RunConfig.from_dict(raw)
    ops = assemble(cfg.build_mesh())
    est = None
    if theta_min_coeffs is not None:
        est = ThresholdEstimate(
            value=0.0,
            minimizer=FeFunction(ops.mesh, np.asarray(theta_min_coeffs)),
            mesh_id=ops.mesh.describe(),
        )
    starts = _build_starts(cfg, ops, est)
    return _sweep_row(cfg, ops, starts, lam_index, lam)


def cmd_sweep(cfg: RunConfig) -> tuple[dict, int]:
    """(lambda, mu) sweep with per-lambda empirical perturbation budgets."""
    _require(cfg.sweep_lambdas is not None, "config has no 'sweep' section")
    mesh = cfg.build_mesh()
    ops = assemble(mesh)
    warnings = []
    est = _estimate(cfg, ops)
    from_threshold = "theta_multiples" in cfg.sweep_lambdas
    if from_threshold:
        lambdas = [m * est.value for m in cfg.sweep_lambdas["theta_multiples"]]
    else:
        lambdas = list(cfg.sweep_lambdas["values"])
    below = [lam for lam in lambdas if lam <= est.value]
    if below:
        warnings.append(
            f"lambda values {below} do not exceed the threshold estimate "
            f"{est.value:.6g}; those rows are exploratory"
        )
        log.warning(warnings[-1])

    # the minimizer seeds the start library only when lambda is tied to the
    # threshold, so mu = 0 cells match cmd_solve output exactly
    starts_est = est if from_threshold else None
    starts = _build_starts(cfg, ops, starts_est)
    if cfg.sweep_workers > 1 and len(lambdas) > 1:
        coeffs = None if starts_est is None else est.minimizer.coeffs.tolist()
        with ProcessPoolExecutor(max_workers=cfg.sweep_workers) as pool:
            rows = list(
                pool.map(
                    _sweep_row_from_raw,
                    [cfg.raw] * len(lambdas),
                    range(len(lambdas)),
                    lambdas,
                    [coeffs] * len(lambdas),
                )
            )
    else:
        rows = [_sweep_row(cfg, ops, starts, i, lam) for i, lam in enumerate(lambdas)]

    qualifying_norms = [
        c["max_norm"] for row in rows for c in row["cells"] if c["solution_count"] >= 3
    ]
    r_emp = 1.1 * max(qualifying_norms) if qualifying_norms else None
    table_rows = [
        {
            "format_version": FORMAT_VERSION,
            "lambda_index": c["lambda_index"],
            "lambda": c["lambda"],
            "mu": c["mu"],
            "solution_count": c["solution_count"],
            "max_norm": c["max_norm"],
            "min_pairwise_distance": c["min_pairwise_distance"],
            "max_residual": max(c["residuals"], default=None),
        }
        for row in rows
        for c in row["cells"]
    ]

    out = _base_report(cfg, "sweep")
    out["mesh"] = mesh.describe()
    out["theta_star_used"] = est.value
    out["warnings"] = warnings
    out["rows"] = rows
    out["r_empirical"] = r_emp
    out["delta_by_lambda"] = [
        {"lambda": row["lambda"], "delta_empirical": row["delta_empirical"]} for row in rows
    ]
    out["anomalies"] = [a for row in rows for a in row["anomalies"]]
    out["table"] = table_rows
    failed_cells = [c for c in table_rows if c["solution_count"] == 0]
    return out, 0 if not failed_cells else 1


COMMANDS = {
    "check": (cmd_check, "check_report.json"),
    "theta-star": (cmd_theta_star, "theta_star.json"),
    "solve": (cmd_solve, "solutions.json"),
    "sweep": (cmd_sweep, "sweep_report.json"),
}


def execute(cfg: RunConfig, command: str, out_dir: Optional[Path] = None) -> int:
    """Run one command, write its report files, and return the exit code."""
    fn, filename = COMMANDS[command]
    out_dir = out_dir or cfg.out_dir or Path("out")
    try:
        report, code = fn(cfg)
    except FeasibilityError as exc:
        log.error("%s", exc)
        write_report(
            {**_base_report(cfg, command), "error": str(exc)}, out_dir, filename
        )
        return 1
    write_report(report, out_dir, filename)
    if command == "sweep":
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "sweep_table.csv").write_text(render_table(report["table"]))
    log.info("report written to %s", out_dir / filename)
    return code
