"""Command-line front end: run one scenario, sweep a parameter, or run the invariant self-check."""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, CurvedWignerError, DomainError

EXIT_OK, EXIT_CONFIG, EXIT_DOMAIN, EXIT_INVARIANT = 0, 2, 3, 4

DEFAULTS = {
    "precession": {"M": 1.0, "R": 6.0},
    "circular-corrections": {"M": 1.0, "R": 6.0, "m": 1.0, "zeta": 0.0, "phi": 0.0, "t": 0.0, "epsilon": 1e-3},
    "wigner-track": {"M": 1.0, "R": 6.0, "m": 1.0, "zeta": 0.0, "phi": 0.0, "orbits": 1.0, "steps": 0},
    "radial-epr": {"M": 1.0, "r": 10.0, "m": 1.0, "epsilon": 1e-3, "dtau": 1.0},
    "pair-orbits": {"M": 1.0, "R": 10.0, "m": 1.0, "deltaR": 0.1, "Theta": np.pi / 2, "Phi": np.pi, "dtau": 1.0},
}
REQUIRED = {
    "precession": ("R",),
    "circular-corrections": ("R",),
    "wigner-track": ("R",),
    "radial-epr": ("r",),
    "pair-orbits": ("R", "deltaR"),
}
FORMATS = {"csv", "json"}


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    parameters: dict
    output: str = "out"
    formats: tuple = ("csv", "json")

    @classmethod
    def from_dict(cls, doc: dict) -> "ScenarioConfig":
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        name = doc.get("scenario")
        if name not in DEFAULTS:
            raise ConfigError(f"unknown scenario {name!r}; expected one of {sorted(DEFAULTS)}")
        given = doc.get("parameters", {})
        if not isinstance(given, dict):
            raise ConfigError("parameters must be a table of named reals")
        missing = [k for k in REQUIRED[name] if k not in given]
        if missing:
            raise ConfigError(f"scenario {name} needs parameters {missing}")
        params = dict(DEFAULTS[name])
        for k, v in given.items():
            if k not in params:
                raise ConfigError(f"parameter {k!r} is not used by scenario {name}")
            if isinstance(v, dict):
                params[k] = v      # sweep range, resolved by sweep()
                continue
            try:
                params[k] = float(v)
            except (TypeError, ValueError):
                raise ConfigError(f"parameter {k} = {v!r} is not a real number") from None
        fmts = doc.get("formats", ["csv", "json"])
        if isinstance(fmts, str):
            fmts = fmts.split(",")
        bad = set(fmts) - FORMATS
        if bad:
            raise ConfigError(f"unknown output formats {sorted(bad)}")
        return cls(name, params, str(doc.get("output", "out")), tuple(fmts))


@dataclass
class Check:
    name: str
    residual: float
    tolerance: float
    hard: bool = True

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.residual) and self.residual <= self.tolerance)


@dataclass
class RunManifest:
    config: dict
    version: str
    timestamp: str
    checks: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks if c.hard)

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "version": self.version,
            "timestamp": self.timestamp,
            "ok": self.ok,
            "checks": [dict(asdict(c), passed=c.passed) for c in self.checks],
        }


@dataclass
class ScenarioResult:
    columns: list
    rows: list
    checks: list


# ---------------------------------------------------------------- scenarios

def _precession(p) -> ScenarioResult:
    from .frames import geodetic_precession
    a = geodetic_precession(p["M"], p["R"])
    n = geodetic_precession(p["M"], p["R"], mode="numeric")
    rel = abs(n - a) / a if a else abs(n)
    return ScenarioResult(["M", "R", "analytic", "numeric", "relative_error"],
                          [[p["M"], p["R"], a, n, rel]],
                          [Check("precession_numeric_vs_analytic", rel, 1e-8)])


def _circular(p) -> ScenarioResult:
    from .dirac_wkb import (RestSpinor, acceleration_correction, circular_closed_forms, raise_index,
                            velocity_correction)
    from .frames import CircularFrame
    from .geometry import ChartPoint, SchwarzschildMetric

    M, R, m, eps = p["M"], p["R"], p["m"], p["epsilon"]
    closed = circular_closed_forms(M, R, m, p["zeta"], p["phi"], p["t"])
    metric = SchwarzschildMetric(M)
    frame = CircularFrame(M, R)
    x = ChartPoint.equatorial(p["t"], R)
    spin = RestSpinor(p["zeta"], p["phi"])
    u = frame.velocity(x)
    g = metric.components(x)
    dv_low = velocity_correction(frame, spin, x, metric, m)
    dv = raise_index(metric, x, dv_low)
    a_curv = acceleration_correction(metric, u, spin, frame, x, "curvature", m)
    a_der = acceleration_correction(metric, u, spin, frame, x, "gamma-derivative", m)

    def norm_res(e):
        v = u + e * dv
        return abs(v @ g @ v - 1)
    ratio = norm_res(eps) / norm_res(eps / 2) if norm_res(eps / 2) > 0 else np.nan

    res = norm_res(eps)
    rows = [[k, dv[k], dv_low[k], closed.delta_v[k], a_curv[k], a_der[k], closed.a_lower[k], res] for k in range(4)]
    checks = [
        Check("velocity_orthogonal_to_u", abs(dv_low @ u), 1e-10),
        Check("acceleration_routes_agree", float(np.max(np.abs(a_curv - a_der))), 1e-6),
        Check("normalization_eps_squared_ratio", abs(ratio - 4) / 4, 0.05),
        Check("closed_form_velocity_spatial", float(np.max(np.abs(dv[1:] - closed.delta_v[1:]))), 1e-8, hard=False),
        Check("closed_form_velocity_time", abs(dv[0] - closed.delta_v[0]), 1e-8, hard=False),
        Check("closed_form_acceleration", float(np.max(np.abs(a_curv - closed.a_lower))), 1e-8, hard=False),
    ]
    cols = ["component", "dv_upper", "dv_lower", "dv_closed_form", "da_curvature", "da_derivative", "da_closed_form",
            "normalization_residual"]
    return ScenarioResult(cols, rows, checks)


def _wigner_track(p) -> ScenarioResult:
    from .scenarios import accumulate_circular_spin

    steps = int(p["steps"]) or None
    res = accumulate_circular_spin(p["M"], p["R"], p["m"], p["zeta"], p["phi"], p["orbits"], steps)
    fine = accumulate_circular_spin(p["M"], p["R"], p["m"], p["zeta"], p["phi"], p["orbits"], 2 * res.rotation.steps)
    rot = res.rotation
    rows = []
    for i in range(4):
        rows.append(["W", i] + list(rot.W[i]))
    for i in range(2):
        rows.append(["D_real", i] + list(rot.D[i].real) + [np.nan, np.nan])
        rows.append(["D_imag", i] + list(rot.D[i].imag) + [np.nan, np.nan])
    checks = [
        Check("double_cover", rot.double_cover_residual(), 1e-8),
        Check("orthogonality", rot.orthogonality_residual(), 1e-8),
        Check("step_halving", float(np.max(np.abs(fine.rotation.D - rot.D))), 1e-6),
        Check("closed_form_phase", float(np.max(np.abs(rot.D - res.closed_form))), 1e-6),
    ]
    return ScenarioResult(["matrix", "row", "c0", "c1", "c2", "c3"], rows, checks)


def _radial_epr(p) -> ScenarioResult:
    from .entanglement import radial_epr_report

    rep = radial_epr_report(p["M"], p["r"], p["epsilon"], p["dtau"], p["m"])
    rows = [[rep.r, rep.epsilon, rep.dtau, rep.matched_fidelity, rep.mismatched_fidelity,
             rep.triplet_amplitude, rep.concurrence_matched, rep.concurrence_mismatched]]
    checks = [
        Check("matched_fidelity", abs(1 - rep.matched_fidelity), 1e-12),
        Check("matched_concurrence", abs(1 - rep.concurrence_matched), 1e-10),
    ]
    cols = ["r", "epsilon", "dtau", "matched_fidelity", "mismatched_fidelity", "triplet_amplitude",
            "concurrence_matched", "concurrence_mismatched"]
    return ScenarioResult(cols, rows, checks)


def _pair_orbits(p) -> ScenarioResult:
    from .entanglement import bipartite_state, concurrence, fidelity, pair_wigner_angles, transform_pair

    state = bipartite_state(p["Theta"], p["Phi"])
    ang = pair_wigner_angles(state, p["M"], p["R"], p["deltaR"], p["m"])
    out = transform_pair(state, ang, p["dtau"])
    f = fidelity(state, out)
    c_in, c_out = concurrence(state), concurrence(out)
    rows = [[p["R"], p["deltaR"], p["Theta"], p["Phi"], ang.theta_x, ang.delta_theta,
             ang.exact_plus, ang.exact_minus, f, c_in, c_out]]
    checks = [
        Check("norm_preserved", abs(out.norm() - 1), 1e-12),
        Check("concurrence_preserved", abs(c_out - c_in), 1e-10),
    ]
    if abs(np.cos(p["Theta"])) < 1e-15:
        checks.append(Check("singlet_invariance", abs(1 - f), 1e-12))
    cols = ["R", "deltaR", "Theta", "Phi", "theta_x", "delta_theta", "theta_plus_exact", "theta_minus_exact",
            "fidelity", "concurrence_in", "concurrence_out"]
    return ScenarioResult(cols, rows, checks)


RUNNERS = {
    "precession": _precession,
    "circular-corrections": _circular,
    "wigner-track": _wigner_track,
    "radial-epr": _radial_epr,
    "pair-orbits": _pair_orbits,
}


# ---------------------------------------------------------------- output

def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v) + 0.0, ".17g")     # + 0.0 folds -0 into 0


def csv_body(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if np.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    return v


def write_outputs(out_dir, name, columns, rows, manifest: RunManifest, formats):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if "csv" in formats:
        (out / f"{name}.csv").write_text(csv_body(columns, rows))
    if "json" in formats:
        doc = {"columns": columns, "rows": [[_jsonable(v) for v in r] for r in rows]}
        (out / f"{name}.json").write_text(json.dumps(doc, indent=1))
    (out / "manifest.json").write_text(json.dumps(manifest.to_dict(), indent=1, default=_jsonable))


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def run_scenario(config: ScenarioConfig) -> tuple:
    """Evaluate one scenario; returns (result, manifest). Domain errors carry the scenario name."""
    for k, v in config.parameters.items():
        if isinstance(v, dict):
            raise ConfigError(f"parameter {k} is a sweep range; use the sweep command")
    try:
        res = RUNNERS[config.scenario](config.parameters)
    except DomainError as exc:
        raise type(exc)(f"{config.scenario}: {exc}") from exc
    man = RunManifest({"scenario": config.scenario, "parameters": config.parameters,
                       "output": config.output, "formats": list(config.formats)},
                      __version__, _now(), res.checks)
    return res, man


def _sweep_point(args):
    scenario, params = args
    res = RUNNERS[scenario](params)
    return res.columns, res.rows, res.checks


def sweep_values(start: float, stop: float, count: int) -> np.ndarray:
    if count < 1:
        raise ConfigError("sweep count must be at least 1")
    return np.linspace(start, stop, count)


def sweep(config: ScenarioConfig, param: str, values, workers: int = 1) -> tuple:
    """Evaluate the scenario at each value of one parameter; rows stay in sweep order."""
    if param not in DEFAULTS[config.scenario]:
        raise ConfigError(f"parameter {param!r} is not used by scenario {config.scenario}")
    others = [k for k, v in config.parameters.items() if isinstance(v, dict) and k != param]
    if others:
        raise ConfigError(f"exactly one swept parameter allowed, also found {others}")
    jobs = []
    for v in values:
        p = dict(config.parameters)
        p[param] = float(v)
        jobs.append((config.scenario, p))
    try:
        if workers > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(_sweep_point, jobs))
        else:
            results = [_sweep_point(j) for j in jobs]
    except DomainError as exc:
        raise type(exc)(f"{config.scenario}: {exc}") from exc
    keep = param not in results[0][0]       # add the swept value only if rows lack it
    columns = ["index"] + ([param] if keep else []) + results[0][0]
    rows, checks = [], []
    for i, (v, (_, rs, cs)) in enumerate(zip(values, results)):
        rows.extend([i] + ([float(v)] if keep else []) + list(r) for r in rs)
        checks.extend(Check(f"{c.name}[{i}]", c.residual, c.tolerance, c.hard) for c in cs)
    man = RunManifest({"scenario": config.scenario, "parameters": config.parameters, "sweep": param,
                       "values": [float(v) for v in values]}, __version__, _now(), checks)
    return columns, rows, man


# ---------------------------------------------------------------- self-check

def selfcheck() -> RunManifest:
    """Invariant suite over all scenarios at their default parameters."""
    checks = []
    for name, runner in RUNNERS.items():
        params = dict(DEFAULTS[name])
        for c in runner(params).checks:
            checks.append(Check(f"{name}:{c.name}", c.residual, c.tolerance, c.hard))
    from .geometry import ChartPoint, SchwarzschildMetric, riemann
    from .geodesics import effective_potential_extrema
    Rm = riemann(SchwarzschildMetric(1.0), ChartPoint((0.0, 7.3, 1.1, 0.4)))
    checks.append(Check("riemann_antisymmetry", Rm.antisymmetry_residual(), 1e-9))
    checks.append(Check("riemann_first_bianchi", Rm.bianchi_residual(), 1e-9))
    checks.append(Check("isco_radius", abs(effective_potential_extrema(1.0, np.sqrt(12.0)).radii[0] - 6), 1e-10))
    return RunManifest({"command": "selfcheck"}, __version__, _now(), checks)


# ---------------------------------------------------------------- entry point

def _load(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file {path} not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None


def _apply_overrides(doc: dict, args) -> dict:
    doc = dict(doc)
    if getattr(args, "out", None):
        doc["output"] = args.out
    if getattr(args, "format", None):
        doc["formats"] = args.format.split(",")
    for item in getattr(args, "set", None) or []:
        if "=" not in item:
            raise ConfigError(f"--set expects NAME=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        doc.setdefault("parameters", {})
        doc["parameters"] = dict(doc["parameters"], **{k: v})
    return doc


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="curved-wigner", description=__doc__)
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario from a JSON config")
    run.add_argument("config")
    run.add_argument("--out", help="output directory (overrides the config)")
    run.add_argument("--format", help="comma-separated subset of csv,json")
    run.add_argument("--set", action="append", metavar="NAME=VALUE", help="override one parameter")

    sw = sub.add_parser("sweep", help="sweep one parameter over a linear grid")
    sw.add_argument("config")
    sw.add_argument("--param", required=True)
    sw.add_argument("--start", type=float)
    sw.add_argument("--stop", type=float)
    sw.add_argument("--count", type=int)
    sw.add_argument("--values", help="explicit comma-separated values instead of start/stop/count")
    sw.add_argument("--workers", type=int, default=1)
    sw.add_argument("--out")
    sw.add_argument("--format")
    sw.add_argument("--set", action="append", metavar="NAME=VALUE")

    sub.add_parser("selfcheck", help="run the invariant suite")
    return ap


def _report(man: RunManifest, stream=None):
    stream = stream or sys.stdout
    for c in man.checks:
        tag = "PASS" if c.passed else ("FAIL" if c.hard else "INFO")
        print(f"{tag:4s}  {c.name:45s} residual={c.residual:.3e} tol={c.tolerance:.0e}", file=stream)


def _sweep_grid(args, cfg: ScenarioConfig):
    if args.values:
        try:
            return np.array([float(v) for v in args.values.split(",")])
        except ValueError:
            raise ConfigError(f"--values {args.values!r} is not a list of reals") from None
    from_config = cfg.parameters.get(args.param)
    from_config = from_config if isinstance(from_config, dict) else {}
    start = args.start if args.start is not None else from_config.get("start")
    stop = args.stop if args.stop is not None else from_config.get("stop")
    count = args.count if args.count is not None else from_config.get("count")
    if start is None or stop is None or count is None:
        raise ConfigError("sweep needs --start, --stop and --count (or a {start, stop, count} parameter)")
    return sweep_values(float(start), float(stop), int(count))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "selfcheck":
            man = selfcheck()
            _report(man)
            return EXIT_OK if man.ok else EXIT_INVARIANT

        cfg = ScenarioConfig.from_dict(_apply_overrides(_load(args.config), args))
        if args.command == "run":
            res, man = run_scenario(cfg)
            write_outputs(cfg.output, cfg.scenario, res.columns, res.rows, man, cfg.formats)
        else:
            values = _sweep_grid(args, cfg)
            cols, rows, man = sweep(cfg, args.param, values, args.workers)
            write_outputs(cfg.output, f"{cfg.scenario}-sweep-{args.param}", cols, rows, man, cfg.formats)
        _report(man)
        return EXIT_OK if man.ok else EXIT_INVARIANT
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except CurvedWignerError as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
