"""Command-line front end: designs, surface sweeps, diagnostics, and studies.

Four subcommands share one configuration schema (JSON file, preset, and
flags, later sources overriding earlier ones):

  kbemu design    write a training design and its variance-criterion report
  kbemu emulate   sweep an emulator over a 2-d slice and write surface CSVs
  kbemu diagnose  compare an emulator against fresh simulator runs
  kbemu study     RMSE table over designs x boundary-usage levels

Every output embeds the SHA-256 hash of the resolved configuration and the
seed, and contains no timestamps, so re-running a config reproduces each
file byte for byte. Exit codes: 0 success, 2 configuration error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import os
import sys
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import models
from .design import (
    CriterionGrid,
    Design,
    greedy_v_optimal,
    latin_hypercube,
    maximin_lhc,
    save_design_csv,
    sobol_pool,
    v_criterion,
    warp_design,
)
from .diagnostics import (
    SliceSpec,
    format_summary_table,
    grid_sweep,
    standardized_errors,
)
from .emulator import (
    BoundaryConfig,
    PriorSpec,
    SingleBoundary,
    TrainingSet,
    TwoParallelBoundaries,
    TwoPerpendicularBoundaries,
    build_adjusted,
)
from .errors import (
    ConditioningError,
    ConfigError,
    DegenerateBoundaryError,
    DomainError,
    EmulatorInconsistencyError,
    InvalidParameterError,
    ModelEvaluationError,
    NumericalConsistencyError,
    ShapeError,
    StiffnessError,
    UsageError,
)
from .kernel import KernelSpec

MODELS = ("toy2d", "arabidopsis", "external-table")
BOUNDARY_CHOICES = ("none", "K", "KL-perp", "KL-par")
METHODS = ("lhc", "maximin", "warped-maximin", "greedy-vopt", "warped-greedy-vopt")

# Sample mean/variance of 60 hormonal-crosstalk outputs on a space-filling
# scoping design (seed 2711) over the default rate table; used as the prior
# for the six-input model unless the config overrides them.
ARABIDOPSIS_BETA = 0.35907891336555864
ARABIDOPSIS_SIGMA2 = 0.2324257708195831

_MODEL_PRIORS = {
    "toy2d": (0.0, 1.0, 0.4),
    "arabidopsis": (ARABIDOPSIS_BETA, ARABIDOPSIS_SIGMA2, 0.7),
    "external-table": (ARABIDOPSIS_BETA, ARABIDOPSIS_SIGMA2, 0.7),
}

# Canned toy-model surface configurations, selectable with --preset.
PRESETS = {
    "toy-single": {"model": "toy2d", "boundaries": "K", "n": 0, "grid": 41},
    "toy-single-trained": {
        "model": "toy2d", "boundaries": "K", "n": 10, "method": "maximin", "grid": 41,
    },
    "toy-perp": {"model": "toy2d", "boundaries": "KL-perp", "n": 0, "grid": 41},
    "toy-parallel": {"model": "toy2d", "boundaries": "KL-par", "n": 0, "grid": 41},
}

_CONFIG_DEFAULTS = {
    "model": "toy2d",
    "rates": None,          # rate-table path, required for model=external-table
    "beta": None,           # None -> per-model default
    "sigma2": None,
    "theta": None,          # scalar or per-axis list; None -> per-model default
    "boundaries": "none",
    "n": 0,
    "method": "maximin",
    "grid": None,           # per-axis resolution; None -> per-command default
    "n_diag": 500,
    "candidates": 100000,   # candidate LHCs for the training maximin search
    "diag_candidates": 200,  # candidate LHCs for diagnostic maximin sets
    "pool_size": 4096,
    "refine_sweeps": 0,
    "jitter": 1e-10,
    "seed": 0,
    "out": "kbemu-out",
}

# Fixed offsets applied to the global seed so that each derived random
# object is independent yet fully reproducible.
_POOL_SEED_OFFSET = 1
_DIAG_SEED_OFFSET = 101

_CONFIG_ERRORS = (
    ConfigError,
    UsageError,
    InvalidParameterError,
    ShapeError,
    DomainError,
    DegenerateBoundaryError,
)
_NUMERICAL_ERRORS = (
    ConditioningError,
    StiffnessError,
    NumericalConsistencyError,
    ModelEvaluationError,
    EmulatorInconsistencyError,
    FloatingPointError,
)


@dataclass(frozen=True)
class ResolvedRun:
    """A fully validated run: model bindings, prior, and derived settings."""

    command: str
    model: str
    dim: int
    box: np.ndarray
    simulator: Callable[[np.ndarray], float]
    truth: Optional[Callable[[np.ndarray], float]]  # cheap exact truth, if any
    prior: PriorSpec
    boundaries_name: str
    bconfig: Optional[BoundaryConfig]
    n: int
    method: str
    grid: int
    n_diag: int
    candidates: int
    diag_candidates: int
    pool_size: int
    refine_sweeps: int
    jitter: float
    seed: int
    out: str
    config_hash: str
    base_spec: Optional[models.ArabidopsisSpec]


def _field_error(field: str, problem: str) -> ConfigError:
    return ConfigError(f"config field `{field}`: {problem}")


def _as_float(merged: dict, field: str) -> float:
    try:
        return float(merged[field])
    except (TypeError, ValueError):
        raise _field_error(field, f"expected a number, got {merged[field]!r}") from None


def _as_int(merged: dict, field: str) -> int:
    val = merged[field]
    if isinstance(val, bool):
        raise _field_error(field, f"expected an integer, got {val!r}")
    try:
        ival = int(val)
    except (TypeError, ValueError):
        raise _field_error(field, f"expected an integer, got {val!r}") from None
    if isinstance(val, str) or ival != val:
        raise _field_error(field, f"expected an integer, got {val!r}")
    return ival


def _parse_theta_flag(text: str):
    try:
        parts = [float(p) for p in text.split(",")]
    except ValueError:
        raise _field_error("theta", f"could not parse {text!r}") from None
    return parts[0] if len(parts) == 1 else parts


def _resolve_thetas(raw, dim: int, default: float) -> tuple:
    if raw is None:
        return (float(default),) * dim
    if np.isscalar(raw):
        return (float(raw),) * dim
    thetas = [float(v) for v in raw]
    if len(thetas) != dim:
        raise _field_error("theta", f"needs 1 or {dim} values, got {len(thetas)}")
    return tuple(thetas)


def _toy_bconfig(name: str) -> Optional[BoundaryConfig]:
    if name == "none":
        return None
    first = models.toy_boundary_K()
    if name == "K":
        return SingleBoundary(first)
    if name == "KL-perp":
        return TwoPerpendicularBoundaries(first, models.toy_boundary_L())
    return TwoParallelBoundaries(first, models.toy_boundary_x1_one())


def _crosstalk_bconfig(name: str, base) -> Optional[BoundaryConfig]:
    if name == "none":
        return None
    if name == "KL-par":
        raise _field_error(
            "boundaries",
            "the hormonal-crosstalk model has its two boundaries on different "
            "axes; no parallel pair exists",
        )
    first = models.arabidopsis_boundary_k6(base)
    if name == "K":
        return SingleBoundary(first)
    return TwoPerpendicularBoundaries(first, models.arabidopsis_boundary_k8(base))


def _default_grid(command: str, dim: int) -> int:
    if command in ("emulate",):
        return 41
    # full-dimensional criterion grids: keep the tensor size moderate
    return 30 if dim == 2 else 6


def resolve_config(args: argparse.Namespace) -> ResolvedRun:
    """Layer defaults, preset, config file, and flags; validate everything."""
    merged = dict(_CONFIG_DEFAULTS)
    if getattr(args, "preset", None):
        if args.preset not in PRESETS:
            raise _field_error(
                "preset", f"unknown preset {args.preset!r}; known: {sorted(PRESETS)}"
            )
        merged.update(PRESETS[args.preset])
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                doc = json.load(fh)
        except FileNotFoundError:
            raise _field_error("config", f"no such file: {args.config}") from None
        except json.JSONDecodeError as exc:
            raise _field_error("config", f"invalid JSON in {args.config}: {exc}") from None
        if not isinstance(doc, dict):
            raise _field_error("config", "top level must be a JSON object")
        for key in doc:
            if key not in _CONFIG_DEFAULTS:
                raise _field_error(key, "unknown config field")
        merged.update(doc)
    for flag in ("seed", "out", "model", "boundaries", "n", "method", "grid"):
        val = getattr(args, flag, None)
        if val is not None:
            merged[flag] = val
    if getattr(args, "theta", None) is not None:
        merged["theta"] = _parse_theta_flag(args.theta)

    model = merged["model"]
    if model not in MODELS:
        raise _field_error("model", f"expected one of {MODELS}, got {model!r}")
    method = merged["method"]
    if method not in METHODS:
        raise _field_error("method", f"expected one of {METHODS}, got {method!r}")
    boundaries_name = merged["boundaries"]
    if boundaries_name not in BOUNDARY_CHOICES:
        raise _field_error(
            "boundaries", f"expected one of {BOUNDARY_CHOICES}, got {boundaries_name!r}"
        )

    # A study compares boundary-usage levels, so "none" selects the model's
    # full boundary set rather than asking for an empty comparison.
    if args.command == "study" and boundaries_name == "none":
        boundaries_name = "K" if model == "toy2d" else "KL-perp"

    base_spec = None
    hash_model_entry: object = model
    if model == "toy2d":
        dim, box = 2, np.array([[0.0, 1.0], [0.0, 1.0]])
        simulator = lambda p: models.toy_f(p)  # noqa: E731
        truth = simulator
        bconfig = _toy_bconfig(boundaries_name)
    else:
        if model == "external-table":
            if not merged["rates"]:
                raise _field_error(
                    "rates", "model `external-table` needs a rate-table path"
                )
            try:
                base_spec = models.load_arabidopsis_spec(merged["rates"])
            except FileNotFoundError:
                raise _field_error(
                    "rates", f"no such file: {merged['rates']}"
                ) from None
            hash_model_entry = {
                "rates": {k: float(v) for k, v in sorted(base_spec.rates.items())},
                "initial_state": {
                    k: float(v) for k, v in sorted(base_spec.initial_state.items())
                },
                "t_end": float(base_spec.t_end),
            }
        dim, box = 6, np.array([[-1.0, 1.0]] * 6)
        simulator = models.make_plsp_simulator(base_spec)
        truth = None
        bconfig = _crosstalk_bconfig(boundaries_name, base_spec)

    beta_default, sigma2_default, theta_default = _MODEL_PRIORS[model]
    merged["beta"] = merged["beta"] if merged["beta"] is not None else beta_default
    merged["sigma2"] = merged["sigma2"] if merged["sigma2"] is not None else sigma2_default
    beta = _as_float(merged, "beta")
    sigma2 = _as_float(merged, "sigma2")
    if sigma2 <= 0:
        raise _field_error("sigma2", f"must be positive, got {sigma2}")
    thetas = _resolve_thetas(merged["theta"], dim, theta_default)
    if any(t <= 0 for t in thetas):
        raise _field_error("theta", f"correlation lengths must be positive, got {thetas}")

    n = _as_int(merged, "n")
    if n < 0:
        raise _field_error("n", f"must be >= 0, got {n}")
    if args.command == "design" and n < 1:
        raise _field_error("n", "a design needs at least one point")
    grid = merged["grid"] if merged["grid"] is not None else _default_grid(args.command, dim)
    merged["grid"] = grid
    grid = _as_int(merged, "grid")
    if grid < 2:
        raise _field_error("grid", f"resolution must be >= 2, got {grid}")
    n_diag = _as_int(merged, "n_diag")
    if n_diag < 1:
        raise _field_error("n_diag", f"must be >= 1, got {n_diag}")
    candidates = _as_int(merged, "candidates")
    diag_candidates = _as_int(merged, "diag_candidates")
    if candidates < 1 or diag_candidates < 1:
        raise _field_error("candidates", "candidate counts must be >= 1")
    pool_size = _as_int(merged, "pool_size")
    if pool_size < 1:
        raise _field_error("pool_size", f"must be >= 1, got {pool_size}")
    refine_sweeps = _as_int(merged, "refine_sweeps")
    if refine_sweeps < 0:
        raise _field_error("refine_sweeps", f"must be >= 0, got {refine_sweeps}")
    jitter = _as_float(merged, "jitter")
    if not 0 < jitter <= 1e-6:
        raise _field_error("jitter", f"must be in (0, 1e-6], got {jitter}")
    seed = _as_int(merged, "seed")
    out = str(merged["out"])

    if method.startswith("warped") and bconfig is None:
        raise _field_error(
            "method", f"{method!r} needs a boundary selection (got `boundaries: none`)"
        )
    if args.command == "study" and method.startswith("warped"):
        raise _field_error(
            "method",
            "a study varies warping itself; give the unwarped base method",
        )

    kernel = KernelSpec(thetas=thetas)
    prior = PriorSpec(beta=beta, sigma2=sigma2, kernel=kernel)

    basis = {
        "command": args.command,
        "model": hash_model_entry,
        "beta": beta,
        "sigma2": sigma2,
        "theta": list(thetas),
        "boundaries": boundaries_name,
        "n": n,
        "method": method,
        "grid": grid,
        "n_diag": n_diag,
        "candidates": candidates,
        "diag_candidates": diag_candidates,
        "pool_size": pool_size,
        "refine_sweeps": refine_sweeps,
        "jitter": jitter,
        "seed": seed,
    }
    digest = hashlib.sha256(
        json.dumps(basis, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()

    return ResolvedRun(
        command=args.command, model=model, dim=dim, box=box, simulator=simulator,
        truth=truth, prior=prior, boundaries_name=boundaries_name, bconfig=bconfig,
        n=n, method=method, grid=grid, n_diag=n_diag, candidates=candidates,
        diag_candidates=diag_candidates, pool_size=pool_size,
        refine_sweeps=refine_sweeps, jitter=jitter, seed=seed, out=out,
        config_hash=digest, base_spec=base_spec,
    )


def _header_lines(run: ResolvedRun) -> tuple:
    return (
        f"config_hash: {run.config_hash}",
        f"seed: {run.seed}",
        f"model: {run.model}",
        f"boundaries: {run.boundaries_name}",
    )


def _criterion_grid(run: ResolvedRun) -> CriterionGrid:
    return CriterionGrid.tensor(run.box, run.grid)


def _build_design(run: ResolvedRun, bconfig_for_warp: Optional[BoundaryConfig]) -> Design:
    """Training design per the configured method."""
    method = run.method
    if method in ("lhc", "maximin", "warped-maximin"):
        if method == "lhc":
            design = latin_hypercube(run.n, run.dim, run.seed, box=run.box)
        else:
            design = maximin_lhc(
                run.n, run.dim, run.seed, box=run.box, num_candidates=run.candidates
            )
        if method == "warped-maximin":
            design = warp_design(design, bconfig_for_warp, run.prior.kernel)
        return design
    pool = None
    if method == "warped-greedy-vopt":
        raw = sobol_pool(run.pool_size, run.box, run.seed + _POOL_SEED_OFFSET)
        wrapped = Design(points=raw, box=run.box,
                         seed=run.seed + _POOL_SEED_OFFSET, provenance="sobol-pool")
        pool = warp_design(wrapped, bconfig_for_warp, run.prior.kernel).points
    result = greedy_v_optimal(
        run.n,
        _criterion_grid(run),
        run.prior,
        run.bconfig,
        candidate_pool=pool,
        pool_size=run.pool_size,
        seed=run.seed + _POOL_SEED_OFFSET,
        refine_sweeps=run.refine_sweeps,
        jitter=run.jitter,
    )
    design = result.design
    if method == "warped-greedy-vopt":
        design = dataclasses.replace(design, provenance="greedy-vopt(warped-pool)")
    return design


def _evaluate(run: ResolvedRun, points: np.ndarray) -> np.ndarray:
    return np.array([float(run.simulator(p)) for p in points])


def _training_emulator(run: ResolvedRun, bconfig, design: Optional[Design]):
    if design is None or design.n == 0:
        training = TrainingSet.empty(run.dim)
    else:
        training = TrainingSet(
            points=design.points, values=_evaluate(run, design.points), box=run.box
        )
    return build_adjusted(run.prior, bconfig, training, jitter=run.jitter)


def _write_json(path: str, doc: dict) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_design(run: ResolvedRun) -> int:
    design = _build_design(run, run.bconfig)
    grid = _criterion_grid(run)
    v_with = v_criterion(design, grid, run.prior, run.bconfig, jitter=run.jitter)
    v_without = v_criterion(design, grid, run.prior, None, jitter=run.jitter)
    os.makedirs(run.out, exist_ok=True)
    csv_path = os.path.join(run.out, "design.csv")
    save_design_csv(
        design, csv_path,
        extra_header=(f"config_hash: {run.config_hash}", f"config_seed: {run.seed}"),
    )
    report = {
        "config_hash": run.config_hash,
        "seed": run.seed,
        "model": run.model,
        "method": run.method,
        "boundaries": run.boundaries_name,
        "n": int(design.n),
        "provenance": design.provenance,
        "grid_resolution": run.grid,
        "grid_points": int(grid.m),
        "v_with_boundaries": float(v_with),
        "v_without_boundaries": float(v_without),
    }
    json_path = os.path.join(run.out, "criterion.json")
    _write_json(json_path, report)
    print(f"wrote {csv_path} and {json_path}")
    print(f"v_criterion with boundaries: {v_with:.17g}")
    print(f"v_criterion without boundaries: {v_without:.17g}")
    return 0


def _sweep_axes(run: ResolvedRun) -> tuple[int, int]:
    if run.model == "toy2d":
        return (0, 1)
    return (1, 4)  # the two axes carrying known boundaries


def _write_matrix_csv(path, header_lines, row_axis, col_axis, row_grid, col_grid, M):
    with open(path, "w") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write(f"# row_axis: {row_axis}\n")
        fh.write(f"# col_axis: {col_axis}\n")
        fh.write("# row_grid: " + json.dumps([float(v) for v in row_grid]) + "\n")
        fh.write("# col_grid: " + json.dumps([float(v) for v in col_grid]) + "\n")
        for row in M:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def cmd_emulate(run: ResolvedRun) -> int:
    design = _build_design(run, run.bconfig) if run.n > 0 else None
    em = _training_emulator(run, run.bconfig, design)
    i, j = _sweep_axes(run)
    base = np.full(run.dim, 0.5) if run.model == "toy2d" else np.zeros(run.dim)
    spec = SliceSpec(
        axes=(i, j), resolution=(run.grid, run.grid), base=base, box=run.box,
        truth=run.truth,
    )
    sweep = grid_sweep(em, spec)
    res = run.grid
    gi = np.linspace(run.box[i, 0], run.box[i, 1], res)
    gj = np.linspace(run.box[j, 0], run.box[j, 1], res)
    os.makedirs(run.out, exist_ok=True)
    header = _header_lines(run) + (f"n_train: {run.n}",)
    mean_path = os.path.join(run.out, "mean.csv")
    sd_path = os.path.join(run.out, "sd.csv")
    diag_path = os.path.join(run.out, "diagnostics.csv")
    _write_matrix_csv(mean_path, header, i, j, gi, gj, sweep.mean.reshape(res, res))
    _write_matrix_csv(sd_path, header, i, j, gi, gj, sweep.sd.reshape(res, res))
    sweep.save_csv(diag_path, header_lines=header)
    print(f"wrote {mean_path}, {sd_path}, {diag_path}")
    return 0


def cmd_diagnose(run: ResolvedRun) -> int:
    design = _build_design(run, run.bconfig) if run.n > 0 else None
    em = _training_emulator(run, run.bconfig, design)
    diag = maximin_lhc(
        run.n_diag, run.dim, run.seed + _DIAG_SEED_OFFSET, box=run.box,
        num_candidates=run.diag_candidates,
    )
    truth = _evaluate(run, diag.points)
    report = standardized_errors(em, diag.points, truth)
    os.makedirs(run.out, exist_ok=True)
    csv_path = os.path.join(run.out, "diagnostics.csv")
    report.save_csv(csv_path, header_lines=_header_lines(run) + (f"n_train: {run.n}",))
    summary = {
        "config_hash": run.config_hash,
        "seed": run.seed,
        "model": run.model,
        "boundaries": run.boundaries_name,
        "n_train": run.n,
        "n_diag": report.n_points,
        "rmse": report.rmse,
        "max_abs_s": report.max_abs_s,
        "n_large": report.n_large,
        "frac_large": report.frac_large,
    }
    json_path = os.path.join(run.out, "summary.json")
    _write_json(json_path, summary)
    print(format_summary_table([(run.method, run.n, run.boundaries_name, report)]))
    print(f"wrote {csv_path} and {json_path}")
    return 0


def _study_levels(name: str) -> list[str]:
    return ["none", "K"] if name == "K" else ["none", "K", name]


def cmd_study(run: ResolvedRun) -> int:
    full = run.bconfig
    if run.model == "toy2d":
        level_cfg = {lv: _toy_bconfig(lv) for lv in _study_levels(run.boundaries_name)}
    else:
        level_cfg = {
            lv: _crosstalk_bconfig(lv, run.base_spec)
            for lv in _study_levels(run.boundaries_name)
        }

    if run.method == "greedy-vopt":
        design_a = _build_design(run, full)
        blind = dataclasses.replace(run, bconfig=None)
        design_b = _build_design(blind, None)
        # boundary-aware greedy is the interesting variant: list it second
        design_a, design_b = design_b, design_a
        label_a, label_b = "greedy-vopt", "greedy-vopt+boundaries"
    else:
        design_a = _build_design(run, None)
        design_b = warp_design(design_a, full, run.prior.kernel)
        label_a, label_b = run.method, f"warped-{run.method}"

    y_a = _evaluate(run, design_a.points)
    y_b = _evaluate(run, design_b.points)
    diag = maximin_lhc(
        run.n_diag, run.dim, run.seed + _DIAG_SEED_OFFSET, box=run.box,
        num_candidates=run.diag_candidates,
    )
    truth = _evaluate(run, diag.points)

    rows = []
    for label, design, values in ((label_a, design_a, y_a), (label_b, design_b, y_b)):
        training = TrainingSet(points=design.points, values=values, box=run.box)
        for level, cfg in level_cfg.items():
            em = build_adjusted(run.prior, cfg, training, jitter=run.jitter)
            report = standardized_errors(em, diag.points, truth)
            rows.append((label, run.n, level, report))

    os.makedirs(run.out, exist_ok=True)
    csv_path = os.path.join(run.out, "study.csv")
    with open(csv_path, "w") as fh:
        for line in _header_lines(run):
            fh.write(f"# {line}\n")
        fh.write("design,boundaries,n_train,rmse,max_abs_s,n_large,frac_large\n")
        for label, n_train, level, report in rows:
            fh.write(
                f"{label},{level},{n_train},{report.rmse:.17g},"
                f"{report.max_abs_s:.17g},{report.n_large},{report.frac_large:.17g}\n"
            )
    print(format_summary_table(rows))
    print(f"wrote {csv_path}")
    return 0


_COMMANDS = {
    "design": cmd_design,
    "emulate": cmd_emulate,
    "diagnose": cmd_diagnose,
    "study": cmd_study,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kbemu",
        description="Boundary-aware emulation: designs, surfaces, diagnostics, studies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "design": "generate a training design and its variance-criterion report",
        "emulate": "sweep an emulator over a 2-d slice; write mean/sd surfaces",
        "diagnose": "standardized-error report against fresh simulator runs",
        "study": "RMSE table over {plain, boundary-aware design} x boundary levels",
    }
    for name, help_text in helps.items():
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", metavar="PATH", help="JSON config file")
        sp.add_argument("--preset", metavar="NAME",
                        help=f"canned configuration, one of {sorted(PRESETS)}")
        sp.add_argument("--seed", type=int, metavar="N")
        sp.add_argument("--out", metavar="DIR")
        sp.add_argument("--model", metavar="NAME",
                        help=f"one of {MODELS} (external-table needs `rates` in the config)")
        sp.add_argument("--boundaries", metavar="SEL",
                        help=f"one of {BOUNDARY_CHOICES}")
        sp.add_argument("--n", type=int, metavar="N", help="training design size")
        sp.add_argument("--method", metavar="NAME", help=f"one of {METHODS}")
        sp.add_argument("--theta", metavar="F[,F...]",
                        help="correlation length(s), scalar or one per axis")
        sp.add_argument("--grid", type=int, metavar="RES",
                        help="per-axis grid resolution (sweep or criterion grid)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        run = resolve_config(args)
        return _COMMANDS[args.command](run)
    except _CONFIG_ERRORS as exc:
        print(f"kbemu: config error: {exc}", file=sys.stderr)
        return 2
    except _NUMERICAL_ERRORS as exc:
        print(f"kbemu: numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
