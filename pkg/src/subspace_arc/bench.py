"""Benchmark orchestration: budget accounting, data profiles and CSV output.

A run's cost is measured in relative Hessians seen, (l_k/d)^2 per iteration.
For a problem p with known optimum f* and start value f0, the budget to
solve p at tolerance tau is

    N_p(tau) = cumulative cost until the first iterate with
               f(x_k) <= f* + tau (f0 - f*),

infinite if the run never gets there.  A data profile reports, for each
budget abscissa alpha in [0, 100], the fraction of problems a solver brought
below tolerance within budget alpha.

``run_suite`` executes a (problems x solvers x repetitions) grid, each run on
an independent stream derived from (master seed, run index), and emits three
CSV artifact kinds with fixed headers:

    trace    k,f,sketched_grad_norm,true_grad_norm,l,alpha,success,step_norm,cum_rel_hess,wall_ns
    np_table problem,solver,tau,rep,n_p,status
    profile  alpha,fraction

Unreached tolerances serialize as the literal ``inf``.  Everything except the
wall_ns column is reproduced byte-identically by a repeated run with the same
master seed (wall-clock time is machine noise by nature).  Suite configs are
flat ``key = value`` text files; unknown keys are rejected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .driver import RunRecord, SolverConfig, Status, run
from .model import RegMode
from .problems import Problem, builtin_problem, make_low_rank
from .rng import derive_seed
from .sketch import IDENTITY, parse_ensemble
from .subproblem import NumericError, SolverFailure

TRACE_HEADER = "k,f,sketched_grad_norm,true_grad_norm,l,alpha,success,step_norm,cum_rel_hess,wall_ns"
NP_TABLE_HEADER = "problem,solver,tau,rep,n_p,status"
PROFILE_HEADER = "alpha,fraction"


class ConfigError(ValueError):
    """A malformed suite configuration or CLI request."""


@dataclass(frozen=True)
class ProfilePoint:
    alpha: float
    fraction: float


def n_p(record: RunRecord, tau: float, f0: float, f_star: float) -> float:
    """Budget spent until the tolerance f* + tau (f0 - f*) is first met.

    Returns 0.0 when the starting point already qualifies and inf when the
    record never reaches the tolerance.
    """
    if not 0.0 < tau < 1.0:
        raise ValueError("tau must lie in (0, 1)")
    if not f0 > f_star:
        raise ValueError(f"degenerate problem: f0={f0} must exceed f_star={f_star}")
    thresh = f_star + tau * (f0 - f_star)
    for i, row in enumerate(record.rows):
        if row.f <= thresh:
            return 0.0 if i == 0 else record.rows[i - 1].cum_rel_hess
    return math.inf


def default_alpha_grid() -> np.ndarray:
    """201 uniform budget abscissae on [0, 100]."""
    return np.linspace(0.0, 100.0, 201)


def data_profile(results: Mapping[object, float], alphas: Iterable[float]) -> list[ProfilePoint]:
    """Fraction of problems with N_p <= alpha, per alpha; inf never counts."""
    if not results:
        raise ValueError("data profile needs at least one result")
    values = list(results.values())
    n = len(values)
    return [
        ProfilePoint(float(a), sum(v <= a for v in values) / n) for a in alphas
    ]


@dataclass(frozen=True)
class ProblemSpec:
    """A suite entry: a built-in name at dimension ``dim``, optionally lifted
    to a low-rank problem of effective rank ``lowrank``."""

    name: str
    dim: int
    lowrank: int | None = None
    rotation: str = "haar"

    @property
    def spec_id(self) -> str:
        if self.lowrank is None:
            return f"{self.name}_d{self.dim}"
        return f"{self.name}_d{self.dim}_r{self.lowrank}_{self.rotation}"


@dataclass(frozen=True)
class SolverSpec:
    """A solver column: mode arc | rarc | rarcd with its dimension knob."""

    mode: str
    l: int | None = None
    l0: int | None = None
    label: str = ""

    def __post_init__(self) -> None:
        if self.mode not in ("arc", "rarc", "rarcd"):
            raise ConfigError(f"unknown solver mode {self.mode!r}")
        if self.mode == "rarc" and self.l is None:
            raise ConfigError("rarc needs a sketch dimension l")
        if not self.label:
            object.__setattr__(self, "label", _default_label(self))


def _default_label(s: SolverSpec) -> str:
    if s.mode == "arc":
        return "arc"
    if s.mode == "rarc":
        return f"rarc_l{s.l}"
    return f"rarcd_l0{s.l0 if s.l0 is not None else 2}"


@dataclass(frozen=True)
class SuiteConfig:
    problems: tuple[ProblemSpec, ...]
    solvers: tuple[SolverSpec, ...]
    taus: tuple[float, ...]
    master_seed: int = 0
    reps: int = 1
    base: SolverConfig = SolverConfig()

    def __post_init__(self) -> None:
        if not self.problems or not self.solvers or not self.taus:
            raise ConfigError("suite needs problems, solvers and taus")
        for tau in self.taus:
            if not 0.0 < tau < 1.0:
                raise ConfigError(f"tau={tau} must lie in (0, 1)")
        if self.reps < 1:
            raise ConfigError("reps must be >= 1")


def solver_config(base: SolverConfig, spec: SolverSpec, seed: int) -> SolverConfig:
    """Concrete run configuration for one solver column."""
    if spec.mode == "arc":
        return replace(base, ensemble=IDENTITY, l=None, l0=None, adaptive=False, seed=seed)
    if spec.mode == "rarc":
        return replace(base, l=spec.l, l0=None, adaptive=False, seed=seed)
    return replace(base, l=None, l0=spec.l0 if spec.l0 is not None else 2, adaptive=True, seed=seed)


def build_problem(spec: ProblemSpec, seed: int) -> Problem:
    if spec.lowrank is None:
        return builtin_problem(spec.name, spec.dim)
    base = builtin_problem(spec.name, spec.lowrank)
    return make_low_rank(base, spec.dim, spec.rotation, seed)


# ---------------------------------------------------------------------------
# Flat key = value configuration files
# ---------------------------------------------------------------------------

_SOLVER_FIELD_PARSERS = {
    "gamma1": float,
    "c": int,
    "theta": float,
    "alpha_max": float,
    "p": int,
    "kappa_T": float,
    "kappa_S": float,
    "rank_tol": float,
    "gtol": float,
    "max_iter": int,
    "C": float,
    "D": float,
    "l": int,
    "l0": int,
    "seed": int,
    "adaptive": lambda v: v.lower() in ("1", "true", "yes"),
    "eps_H": lambda v: None if v.lower() == "none" else float(v),
    "reg_mode": RegMode,
    "hashing_s": int,
}


def _parse_problem_entry(entry: str) -> ProblemSpec:
    parts = entry.split(":")
    name = parts[0].strip()
    kwargs: dict = {}
    for part in parts[1:]:
        key, _, val = part.partition("=")
        key, val = key.strip(), val.strip()
        if key == "d":
            kwargs["dim"] = int(val)
        elif key == "r":
            kwargs["lowrank"] = int(val)
        elif key == "rot":
            kwargs["rotation"] = val
        else:
            raise ConfigError(f"unknown problem option {key!r} in {entry!r}")
    if "dim" not in kwargs:
        raise ConfigError(f"problem entry {entry!r} needs d=<dim>")
    return ProblemSpec(name=name, **kwargs)


def _parse_solver_entry(entry: str) -> SolverSpec:
    parts = entry.split(":")
    mode = parts[0].strip()
    kwargs: dict = {}
    for part in parts[1:]:
        key, _, val = part.partition("=")
        key, val = key.strip(), val.strip()
        if key in ("l", "l0"):
            kwargs[key] = int(val)
        elif key == "label":
            kwargs["label"] = val
        else:
            raise ConfigError(f"unknown solver option {key!r} in {entry!r}")
    return SolverSpec(mode=mode, **kwargs)


def parse_suite_config(text: str) -> SuiteConfig:
    """Parse a flat key = value suite description.

    Recognized suite keys: problems, solvers, taus, master_seed, reps.  Every
    solver-configuration field (gamma1, c, theta, alpha_max, p, kappa_T,
    kappa_S, reg_mode, ensemble, hashing_s, rank_tol, gtol, eps_H, max_iter,
    l, l0, adaptive, C, D, seed) may appear and sets the shared baseline for
    all solver columns.  Lines starting with # and blank lines are ignored;
    unknown keys are errors.
    """
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, eq, val = line.partition("=")
        if not eq:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        key, val = key.strip(), val.strip()
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = val

    for required in ("problems", "solvers", "taus"):
        if required not in values:
            raise ConfigError(f"missing required key {required!r}")

    problems = tuple(_parse_problem_entry(e) for e in values.pop("problems").split(",") if e.strip())
    solvers = tuple(_parse_solver_entry(e) for e in values.pop("solvers").split(",") if e.strip())
    try:
        taus = tuple(float(t) for t in values.pop("taus").split(",") if t.strip())
    except ValueError as exc:
        raise ConfigError(f"bad taus list: {exc}") from exc
    master_seed = int(values.pop("master_seed", "0"))
    reps = int(values.pop("reps", "1"))

    base_kwargs: dict = {}
    hashing_s = 1
    if "hashing_s" in values:
        hashing_s = int(values.pop("hashing_s"))
    ensemble_text = values.pop("ensemble", None)
    for key in list(values):
        if key not in _SOLVER_FIELD_PARSERS:
            raise ConfigError(f"unknown key {key!r}")
        try:
            base_kwargs[key] = _SOLVER_FIELD_PARSERS[key](values.pop(key))
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}") from exc
    if ensemble_text is not None:
        try:
            base_kwargs["ensemble"] = parse_ensemble(ensemble_text, hashing_s)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    try:
        base = SolverConfig(**base_kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return SuiteConfig(
        problems=problems, solvers=solvers, taus=taus,
        master_seed=master_seed, reps=reps, base=base,
    )


# ---------------------------------------------------------------------------
# CSV emission
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return repr(float(x))


def write_trace(record: RunRecord, path: Path) -> None:
    lines = [TRACE_HEADER]
    for r in record.rows:
        lines.append(
            f"{r.k},{_fmt(r.f)},{_fmt(r.sketched_grad_norm)},{_fmt(r.true_grad_norm)},"
            f"{r.l},{_fmt(r.alpha)},{int(r.success)},{_fmt(r.step_norm)},"
            f"{_fmt(r.cum_rel_hess)},{r.wall_ns}"
        )
    path.write_text("\n".join(lines) + "\n")


def write_np_table(rows: list[tuple[str, str, float, int, float, str]], path: Path) -> None:
    lines = [NP_TABLE_HEADER]
    for problem, solver, tau, rep, value, status in rows:
        lines.append(f"{problem},{solver},{_fmt(tau)},{rep},{_fmt(value)},{status}")
    path.write_text("\n".join(lines) + "\n")


def write_profile(points: list[ProfilePoint], path: Path) -> None:
    lines = [PROFILE_HEADER]
    for pt in points:
        lines.append(f"{_fmt(pt.alpha)},{_fmt(pt.fraction)}")
    path.write_text("\n".join(lines) + "\n")


def _tau_tag(tau: float) -> str:
    return f"{tau:g}".replace("-", "m")


def run_suite(cfg: SuiteConfig, out_dir: str | Path) -> dict[str, list[Path]]:
    """Execute the whole grid and emit trace, np_table and profile CSVs.

    Run r of the grid uses the stream derived from (master_seed, run index);
    low-rank rotations are derived per problem so every solver sees the same
    lifted objective.  A per-run seed configured in the baseline is ignored
    here.  Failed runs are recorded with their status and never abort the
    suite.  Returns the emitted paths keyed by artifact kind.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    emitted: dict[str, list[Path]] = {"trace": [], "np_table": [], "profile": []}

    problems = [
        (spec, build_problem(spec, derive_seed(cfg.master_seed, 1, pi)))
        for pi, spec in enumerate(cfg.problems)
    ]
    for spec, problem in problems:
        if problem.f_star is None:
            raise ConfigError(f"problem {spec.spec_id} has no known optimum; n_p is undefined")

    np_rows: list[tuple[str, str, float, int, float, str]] = []
    run_index = 0
    for spec, problem in problems:
        f0 = float(problem.value(problem.x0))
        for solver in cfg.solvers:
            for rep in range(cfg.reps):
                run_seed = derive_seed(cfg.master_seed, 0, run_index)
                run_index += 1
                rcfg = solver_config(cfg.base, solver, run_seed)
                try:
                    record = run(problem, rcfg)
                except (SolverFailure, NumericError) as exc:
                    record = getattr(exc, "record", None) or RunRecord(
                        problem=problem.name, dim=problem.dim,
                        status=Status.SOLVER_FAILURE, rows=(),
                    )
                path = out / f"trace_{spec.spec_id}_{solver.label}_rep{rep}.csv"
                write_trace(record, path)
                emitted["trace"].append(path)
                for tau in cfg.taus:
                    np_rows.append(
                        (spec.spec_id, solver.label, tau, rep,
                         n_p(record, tau, f0, problem.f_star), record.status.value)
                    )

    np_rows.sort(key=lambda r: (r[0], r[1], r[2], r[3]))
    np_path = out / "np_table.csv"
    write_np_table(np_rows, np_path)
    emitted["np_table"].append(np_path)

    alphas = default_alpha_grid()
    for solver in cfg.solvers:
        for tau in cfg.taus:
            results = {
                (problem, rep): value
                for problem, label, t, rep, value, _ in np_rows
                if label == solver.label and t == tau
            }
            points = data_profile(results, alphas)
            path = out / f"profile_{solver.label}_tau{_tau_tag(tau)}.csv"
            write_profile(points, path)
            emitted["profile"].append(path)
    return emitted


def profile_from_np_table(
    path: str | Path, tau: float, solver: str | None = None
) -> list[ProfilePoint]:
    """Recompute a data profile from an emitted np_table CSV."""
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != NP_TABLE_HEADER:
        raise ConfigError(f"{path}: not an np_table CSV (header mismatch)")
    rows = []
    for line in lines[1:]:
        problem, label, tau_s, rep, value, _status = line.split(",")
        rows.append((problem, label, float(tau_s), int(rep), float(value)))
    labels = sorted({r[1] for r in rows})
    if solver is None:
        if len(labels) > 1:
            raise ConfigError(
                f"np_table holds several solvers {labels}; pick one with --solver"
            )
        solver = labels[0]
    elif solver not in labels:
        raise ConfigError(f"solver {solver!r} not in table; available: {labels}")
    results = {
        (problem, rep): value
        for problem, label, t, rep, value in rows
        if label == solver and t == tau
    }
    if not results:
        raise ConfigError(f"no rows for solver {solver!r} at tau={tau:g}")
    return data_profile(results, default_alpha_grid())
