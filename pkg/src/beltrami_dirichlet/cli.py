"""Command-line entry point: ``solve``, ``check`` and ``verify``.

One JSON config drives a run (``schema: 1``); relative paths in it are
resolved against the config file's directory.  See README.md for the
schema and the report formats.
"""
from __future__ import annotations

import argparse
import datetime
import json
import logging
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, verify
from .coefficients import (FAMILIES, CoefficientError, CoefficientPair, DEFAULT_LEVELS,
                           builtin_family, dilatation)
from .conformal import ConformalMapError, JordanBoundary
from .criteria import DEFAULT_THRESHOLDS, PhiCondition, PhiTableError, Thresholds, criteria_report
from .dirichlet import DirichletProblem, ProblemError, SolverSettings, solve
from .fieldio import FieldFormatError, read_field, write_field
from .grid import ComplexField, GridError, GridSpec, RealField, wirtinger_derivatives
from .oracle import radial_stretch_case, two_characteristics_split
from .plotting import solution_heatmaps

log = logging.getLogger("beltrami_dirichlet")

SCHEMA = 1
EXIT_OK, EXIT_CONFIG, EXIT_NOT_CONVERGED, EXIT_VIOLATED, EXIT_INCONCLUSIVE = 0, 1, 2, 3, 4
CHECK_EXIT = {"satisfied": EXIT_OK, "violated": EXIT_VIOLATED, "inconclusive": EXIT_INCONCLUSIVE}
DOMAINS = ("disk", "ellipse", "square", "polygon-csv")
MANUFACTURED = ("radial-stretch",)


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    domain: dict
    coefficients: dict
    boundary_datum: dict = field(default_factory=lambda: {"fourier": {"cos": [0, 1]}})
    solver: dict = field(default_factory=dict)
    criteria: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    base: Path = Path(".")
    raw: dict = field(default_factory=dict)

    # solver knobs with defaults
    @property
    def grid(self) -> int:
        return int(self.solver.get("grid", 256))

    @property
    def padding(self) -> float:
        return float(self.solver.get("padding", 0.2))

    @property
    def levels(self) -> list:
        return [float(v) for v in self.solver.get("levels", DEFAULT_LEVELS)]

    @property
    def tol_ladder(self) -> float:
        return float(self.solver.get("tol_ladder", 1e-3))

    def settings(self) -> SolverSettings:
        keys = ("tol_outer", "max_outer", "relaxation", "neumann_tol", "neumann_max_iter",
                "circle_samples")
        kw = {k: self.solver[k] for k in keys if k in self.solver}
        return SolverSettings(**kw)

    def thresholds(self) -> Thresholds:
        return Thresholds(**{**DEFAULT_THRESHOLDS.to_dict(), **self.criteria.get("thresholds", {})})

    def path(self, p) -> Path:
        p = Path(p)
        return p if p.is_absolute() else self.base / p

    @property
    def outdir(self) -> Path:
        return self.path(self.output.get("dir", "out"))


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file {path} not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    return parse_config(raw, path.parent)


def parse_config(raw: dict, base=Path(".")) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    if raw.get("schema") != SCHEMA:
        raise ConfigError(f"config needs \"schema\": {SCHEMA}")
    known = {"schema", "description", "domain", "coefficients", "boundary_datum", "solver",
             "criteria", "output"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for key in ("domain", "coefficients"):
        if not isinstance(raw.get(key), dict):
            raise ConfigError(f"config needs a \"{key}\" object")
    cfg = RunConfig(raw["domain"], raw["coefficients"],
                    raw.get("boundary_datum") or {"fourier": {"cos": [0, 1]}},
                    raw.get("solver", {}), raw.get("criteria", {}), raw.get("output", {}),
                    Path(base), raw)
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    n = cfg.grid
    if n < 64 or n > 4096 or n & (n - 1):
        raise ConfigError(f"solver.grid must be a power of two in [64, 4096], got {n}")
    levels = cfg.levels
    if not levels or any(b <= a for a, b in zip(levels, levels[1:])) or levels[0] < 1:
        raise ConfigError("solver.levels must be strictly increasing and >= 1")
    for key in ("tol_ladder", "tol_outer", "neumann_tol"):
        if key in cfg.solver and not float(cfg.solver[key]) > 0:
            raise ConfigError(f"solver.{key} must be positive")
    if not 0 <= cfg.padding < 2:
        raise ConfigError("solver.padding must lie in [0, 2)")
    if cfg.domain.get("type") not in DOMAINS:
        raise ConfigError(f"domain.type must be one of {DOMAINS}")
    c = cfg.coefficients
    if sum(k in c for k in ("family", "files", "manufactured")) != 1:
        raise ConfigError("coefficients needs exactly one of family, files, manufactured")
    if "family" in c and c["family"] not in FAMILIES:
        raise ConfigError(f"unknown coefficient family {c['family']!r}; expected one of {FAMILIES}")
    if "manufactured" in c and c["manufactured"].get("case", "radial-stretch") not in MANUFACTURED:
        raise ConfigError(f"manufactured.case must be one of {MANUFACTURED}")
    fmt = cfg.output.get("field_format", "binary")
    if fmt not in ("binary", "csv"):
        raise ConfigError("output.field_format must be binary or csv")
    try:
        cfg.settings()
        cfg.thresholds()
    except (ProblemError, TypeError) as exc:
        raise ConfigError(str(exc)) from None


# --- building the problem -----------------------------------------------------

def build_boundary(cfg: RunConfig) -> JordanBoundary:
    d = cfg.domain
    m = int(d.get("vertices", 512))
    kind = d["type"]
    if kind == "disk":
        return JordanBoundary.circle(m, float(d.get("radius", 1.0)))
    if kind == "ellipse":
        return JordanBoundary.ellipse(float(d.get("a", 1.0)), float(d.get("b", 0.6)), m)
    if kind == "square":
        return JordanBoundary.square(m, float(d.get("half_side", 1.0)))
    return JordanBoundary.from_csv(cfg.path(d["path"]))


def _manufactured_case(cfg: RunConfig):
    spec = cfg.coefficients.get("manufactured")
    if spec is None:
        return None
    case = radial_stretch_case(float(spec.get("K", 2.0)), int(spec.get("degree", 2)))
    if spec.get("split"):
        case = two_characteristics_split(case, float(spec["split"]))
    return case


def build_pair(cfg: RunConfig, boundary: JordanBoundary) -> CoefficientPair:
    c = cfg.coefficients
    if "files" in c:
        files = c["files"]
        mu = read_field(cfg.path(files["mu"]))
        spec = mu.spec
        nu = read_field(cfg.path(files["nu"])).values if files.get("nu") else 0
        n = spec.n
        if n < 64 or n > 4096 or n & (n - 1):
            raise ConfigError(f"coefficient grid must be a power of two in [64, 4096], got {n}")
        mask = boundary.mask(spec)
        return CoefficientPair.from_arrays(spec, np.where(mask, mu.values, 0),
                                           np.where(mask, nu, 0), mask)
    spec = boundary.grid(cfg.grid, cfg.padding)
    mask = boundary.mask(spec)
    case = _manufactured_case(cfg)
    if case is not None:
        return case.pair(spec, mask)
    return builtin_family(c["family"], c.get("params"), spec, mask)


def build_datum(cfg: RunConfig, boundary: JordanBoundary):
    b = cfg.boundary_datum
    v = boundary.vertices
    if b.get("manufactured"):
        case = _manufactured_case(cfg)
        if case is None:
            raise ConfigError("boundary_datum.manufactured needs manufactured coefficients")
        return case.phi
    if "samples_csv" in b:
        data = np.loadtxt(cfg.path(b["samples_csv"]), delimiter=",", skiprows=1, ndmin=1)
        if data.shape != (boundary.m,):
            raise ConfigError(f"samples_csv needs {boundary.m} values (one per vertex)")
        return lambda pts: data
    if "fourier" in b:
        cos = np.asarray(b["fourier"].get("cos", []), dtype=float)
        sin = np.asarray(b["fourier"].get("sin", []), dtype=float)

        def phi(pts):
            th = np.angle(pts)
            out = np.zeros(th.shape)
            for k, a in enumerate(cos):
                out += a * np.cos(k * th)
            for k, s in enumerate(sin, start=1):
                out += s * np.sin(k * th)
            return out
        return phi
    raise ConfigError("boundary_datum needs fourier, samples_csv or manufactured")


def build_phi(cfg: RunConfig) -> PhiCondition | None:
    c = cfg.criteria
    if c.get("phi_table"):
        return PhiCondition.from_csv(cfg.path(c["phi_table"]))
    name = c.get("phi")
    if name is None:
        return None
    if name == "exp":
        return PhiCondition.exponential()
    if name.startswith("power"):
        return PhiCondition.power(float(name[5:] or 2))
    raise ConfigError(f"criteria.phi must be exp or powerP, got {name!r}")


# --- outputs ------------------------------------------------------------------

def _round(obj, digits: int = 12):
    """Deterministic JSON-ready copy: floats to 12 significant digits, no NaN tokens."""
    if isinstance(obj, dict):
        return {str(k): _round(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_round(v, digits) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not np.isfinite(v):
            return "nan" if np.isnan(v) else ("inf" if v > 0 else "-inf")
        return float(f"{v:.{digits}g}")
    return obj


def write_json(obj, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_round(obj), indent=2, sort_keys=True) + "\n")
    return path


def _sidecar(outdir: Path, command: str, started: float) -> None:
    info = {"command": command, "version": __version__,
            "finished_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
            "wall_seconds": time.perf_counter() - started}
    (outdir / "run_info.json").write_text(json.dumps(info, indent=2, sort_keys=True) + "\n")


def _interior_error(report, cfg: RunConfig, boundary: JordanBoundary):
    case = _manufactured_case(cfg)
    z = report.f.spec.z
    inner = report.problem.pair.mask & (np.abs(z) <= 0.9 * boundary.radius)
    if case is not None:
        exact = case.f(z)
    elif _is_identity(cfg):
        exact = z / boundary.radius
    else:
        return None
    return float(np.max(np.abs(report.f.values - exact)[inner]))


def _is_identity(cfg: RunConfig) -> bool:
    """Zero coefficients with ``phi = cos(theta)`` on a disk: the solution is ``z / R``."""
    return (cfg.coefficients.get("family") == "zero" and cfg.domain["type"] == "disk"
            and cfg.boundary_datum.get("fourier") == {"cos": [0, 1]})


def cmd_solve(cfg: RunConfig, out=print) -> int:
    started = time.perf_counter()
    boundary = build_boundary(cfg)
    pair = build_pair(cfg, boundary)
    problem = DirichletProblem.on_boundary(boundary, build_datum(cfg, boundary), pair)
    report = solve(problem, cfg.levels, cfg.tol_ladder, cfg.settings())
    outdir = cfg.outdir
    outdir.mkdir(parents=True, exist_ok=True)
    ext = ".csv" if cfg.output.get("field_format", "binary") == "csv" else ".cfld"
    spec = pair.spec
    write_field(report.f, outdir / f"f{ext}")
    write_field(report.h, outdir / f"h{ext}")
    write_field(pair.mu, outdir / f"mu{ext}")
    write_field(pair.nu, outdir / f"nu{ext}")
    _boundary_csv(report, outdir / "boundary_error.csv")
    np.savetxt(outdir / "analytic_factor.csv",
               np.column_stack([report.A.taylor.real, report.A.taylor.imag]),
               delimiter=",", header="re,im", comments="", fmt="%.17g")
    body = {"schema": SCHEMA, "config": cfg.raw, "grid": spec.to_dict(), "solve": report.to_dict()}
    err = _interior_error(report, cfg, boundary)
    if err is not None:
        body["interior_sup_error_vs_exact"] = err
    if cfg.criteria.get("attach", True):
        crit = criteria_report(pair, build_phi(cfg), th=cfg.thresholds())
        body["criteria"] = {"overall": crit["overall"], "satisfied_by": crit["satisfied_by"],
                            "tests": {k: v["verdict"] for k, v in crit["tests"].items()}}
    write_json(body, outdir / "report.json")
    if cfg.output.get("heatmaps", True):
        fz, fzb = wirtinger_derivatives(report.f)
        resid = fzb.values - pair.mu.values * fz.values - pair.nu.values * np.conj(fz.values)
        solution_heatmaps(outdir, spec, report.f.values, dilatation(pair).values, resid, pair.mask)
    _sidecar(outdir, "solve", started)
    res = report.final_residual
    out(f"converged={report.converged} residual={res['l2_rel']:.3e} "
        f"boundary_error={report.state.boundary_error:.3e} -> {outdir}")
    return EXIT_OK if report.converged else EXIT_NOT_CONVERGED


def _boundary_csv(report, path) -> None:
    st = report.state
    prob = report.problem
    v = prob.boundary.vertices
    recon = st.A.values(np.exp(1j * st.h.boundary_angles)).real
    phi = np.asarray(prob.phi.samples)
    rows = np.column_stack([v.real, v.imag, st.h.boundary_angles, phi, recon, recon - phi])
    np.savetxt(path, rows, delimiter=",", header="x,y,disk_angle,phi,re_f,error",
               comments="", fmt="%.17g")


def cmd_check(cfg: RunConfig, out=print) -> int:
    started = time.perf_counter()
    boundary = build_boundary(cfg)
    pair = build_pair(cfg, boundary)
    points = cfg.criteria.get("points")
    if points is not None:
        points = np.array([complex(x, y) for x, y in points])
    else:
        from .criteria.report import default_sample_points
        points = default_sample_points(pair.spec, pair.mask,
                                       int(cfg.criteria.get("lattice_density", 2)))
    report = criteria_report(pair, build_phi(cfg), points, th=cfg.thresholds())
    outdir = cfg.outdir
    outdir.mkdir(parents=True, exist_ok=True)
    write_json({"schema": SCHEMA, "config": cfg.raw, **report}, outdir / "criteria.json")
    _sidecar(outdir, "check", started)
    for name, t in report["tests"].items():
        out(f"{name:<20} {t['verdict']}")
    out(f"overall: {report['overall']}")
    return CHECK_EXIT[report["overall"]]


def cmd_verify(level: str = "fast", fault: str | None = None, out=print) -> int:
    results = verify.run(level, fault, out)
    failed = sum(not r.passed for r in results)
    out(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if failed == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="beltrami-dirichlet", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (("solve", "solve the Dirichlet problem"),
                        ("check", "evaluate the solvability criteria")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("config", help="JSON run config")
        s.add_argument("--out", help="override output.dir")
    v = sub.add_parser("verify", help="run the closed-form regression suite")
    v.add_argument("--level", choices=verify.LEVELS, default="fast")
    v.add_argument("--inject-fault", choices=verify.FAULTS, default=None,
                   help="corrupt a kernel to confirm the suite fails")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "verify":
        return cmd_verify(args.level, args.inject_fault)
    try:
        cfg = load_config(args.config)
        if args.out:
            cfg.output["dir"] = str(Path(args.out).resolve())
        with np.errstate(all="ignore"):
            if args.command == "solve":
                return cmd_solve(cfg)
            return cmd_check(cfg)
    except (ConfigError, ProblemError, CoefficientError, ConformalMapError, GridError,
            FieldFormatError, PhiTableError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
