"""Command-line front end: ``fpu-pulses <command> [--config FILE] [--out DIR] [--json]``.

Exit codes: 0 success, 2 numerical failure, 64 usage or configuration error.
Tolerances can be overridden through ``FPU_PULSES_TOL``,
``FPU_PULSES_MAX_ITER`` and ``FPU_PULSES_GMRES_RTOL``.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import bvp, dispersion, lattice, verify, waves
from .errors import ConfigError, ExistenceConditionViolated, FPUError, NumericalFailure
from .normalform import nls_params, normal_form_coeffs
from .potentials import PotentialSpec

EXIT_OK = 0
EXIT_NUMERICAL = 2
EXIT_USAGE = 64

ENV_OVERRIDES = {
    "FPU_PULSES_TOL": ("tol", float),
    "FPU_PULSES_MAX_ITER": ("max_iter", int),
    "FPU_PULSES_GMRES_RTOL": ("gmres_rtol", float),
}


@dataclass
class LatticeConfig:
    n_sites: int = 2048
    dt: float = 0.005
    T: float = 50.0
    epsilon: float = 0.04
    stride: int = 200


@dataclass
class ExperimentConfig:
    potential: PotentialSpec = field(default_factory=lambda: PotentialSpec(0.0, 0.0, 1.0, 1.0))
    epsilon_list: list = field(default_factory=lambda: list(verify.EPS_GRID))
    solver: bvp.SolverConfig = field(default_factory=bvp.SolverConfig)
    lattice: LatticeConfig = field(default_factory=LatticeConfig)
    output_dir: str = "out"
    seed: int = 0

    def __post_init__(self):
        eps = list(self.epsilon_list)
        if not eps:
            raise ConfigError("epsilon_list must not be empty")
        if any(not (isinstance(e, (int, float)) and math.isfinite(e) and e >= 0.0) for e in eps):
            raise ConfigError("epsilon_list entries must be finite and non-negative")
        if any(b <= a for a, b in zip(eps, eps[1:])):
            raise ConfigError("epsilon_list must be strictly ascending")
        if self.lattice.n_sites < 8 or not 0.0 < self.lattice.dt <= lattice.MAX_DT or self.lattice.T < 0.0:
            raise ConfigError("lattice needs n_sites >= 8, 0 < dt <= 0.05 and T >= 0")
        self.epsilon_list = [float(e) for e in eps]

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        known = {"potential", "epsilon_list", "solver", "lattice", "output_dir", "seed"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            kwargs = {}
            if "potential" in data:
                kwargs["potential"] = PotentialSpec.from_dict(data["potential"])
            if "solver" in data:
                kwargs["solver"] = _strict(bvp.SolverConfig, data["solver"], "solver")
            if "lattice" in data:
                kwargs["lattice"] = _strict(LatticeConfig, data["lattice"], "lattice")
            for key in ("epsilon_list", "output_dir", "seed"):
                if key in data:
                    kwargs[key] = data[key]
            return cls(**kwargs)
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict:
        return {
            "potential": self.potential.to_dict(),
            "epsilon_list": list(self.epsilon_list),
            "solver": self.solver.to_dict(),
            "lattice": asdict(self.lattice),
            "output_dir": self.output_dir,
            "seed": self.seed,
        }

    def hash(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:16]


def _strict(cls, data, section):
    allowed = set(cls.__dataclass_fields__)
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {section}: {sorted(unknown)}")
    return cls(**data)


def apply_env_overrides(config: ExperimentConfig, environ=None) -> ExperimentConfig:
    environ = os.environ if environ is None else environ
    for var, (attr, cast) in ENV_OVERRIDES.items():
        if var in environ:
            try:
                setattr(config.solver, attr, cast(environ[var]))
            except ValueError as exc:
                raise ConfigError(f"{var}: {exc}") from exc
    return config


def load_config(path: str | None) -> ExperimentConfig:
    if path is None:
        return apply_env_overrides(ExperimentConfig())
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return apply_env_overrides(ExperimentConfig.from_dict(data))


def _plain(obj):
    """Recursively convert numpy scalars, complex numbers and tuples for JSON."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _fmt(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return f"{x:.17g}"


def dumps(obj) -> str:
    """Deterministic JSON with 17-significant-digit floats and sorted keys."""
    return _dump(_plain(obj), 0) + "\n"


def _dump(obj, indent):
    pad = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_dump(obj[k], indent + 1)}" for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + "  " * indent + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if any(isinstance(v, (dict, list)) for v in obj):
            items = [pad + _dump(v, indent + 1) for v in obj]
            return "[\n" + ",\n".join(items) + "\n" + "  " * indent + "]"
        return "[" + ", ".join(_dump(v, indent + 1) for v in obj) + "]"
    if isinstance(obj, float):
        return _fmt(obj)
    return json.dumps(obj)


def _emit(args, name: str, payload: dict, table_rows=None):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    text = dumps(payload)
    (out / name).write_text(text)
    if args.json or table_rows is None:
        sys.stdout.write(text)
    else:
        for key, value in table_rows:
            sys.stdout.write(f"{key:<24s} {_fmt(value) if isinstance(value, float) else value}\n")


def _with_hash(text: str, config_hash: str) -> str:
    return f"# config_hash={config_hash}\n{text}"


def cmd_critical(args, config):
    crit = dispersion.find_critical()
    payload = {"config_hash": config.hash(), **crit.to_dict()}
    rows = [(k, float(v)) for k, v in crit.to_dict().items()]
    _emit(args, "critical.json", payload, rows)


def _parse_box(text):
    try:
        parts = [float(x) for x in text.split(",")]
    except ValueError:
        parts = []
    if len(parts) != 2 or not all(math.isfinite(p) and p > 0.0 for p in parts):
        raise argparse.ArgumentTypeError(f"box must be 're_max,im_max' with positive numbers, got {text!r}")
    return tuple(parts)


def cmd_spectrum(args, config):
    if not (math.isfinite(args.c2) and args.c2 > 0.0):
        raise ConfigError("c2 must be positive")
    eigs = dispersion.neutral_eigenvalues(math.sqrt(args.c2), args.box)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"spectrum_c2_{args.c2:g}.csv").write_text(_with_hash(eigs.to_csv(), config.hash()))
    imag = eigs.imaginary_roots()
    summary = {
        "config_hash": config.hash(),
        "c_sq": args.c2,
        "box": list(args.box),
        "count": eigs.count,
        "winding_number": eigs.winding_number,
        "n_imaginary_nonzero": len(imag),
        "imaginary_nonzero": [z.imag for z in imag],
    }
    rows = [(k, summary[k]) for k in ("c_sq", "count", "winding_number", "n_imaginary_nonzero")]
    _emit(args, f"spectrum_c2_{args.c2:g}.json", summary, rows)


def cmd_coeffs(args, config):
    crit = dispersion.find_critical()
    coeffs = normal_form_coeffs(crit, config.potential)
    payload = {"config_hash": config.hash(), "potential": config.potential.to_dict(), **coeffs.to_dict()}
    rows = [(k, v if isinstance(v, bool) else float(v)) for k, v in coeffs.to_dict().items()]
    _emit(args, "coeffs.json", payload, rows)


def _require_sign(crit, spec):
    nls_params(crit, spec)  # raises ExistenceConditionViolated


def cmd_solve(args, config):
    crit = dispersion.find_critical()
    _require_sign(crit, config.potential)
    coeffs = normal_form_coeffs(crit, config.potential)
    family = bvp.continuation(config.epsilon_list, crit, coeffs, config.potential, config.solver)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    summary = []
    for sol in family:
        stem = f"profile_eps_{sol.epsilon:g}"
        header = {"config_hash": config.hash(), **sol.header()}
        (out / f"{stem}.json").write_text(dumps(header))
        (out / f"{stem}.csv").write_text(_with_hash(sol.to_csv(), config.hash()))
        summary.append({k: header[k] for k in ("epsilon", "c", "domain_length", "residual_norm", "first_integral_drift", "symmetry_defect", "newton_iterations")})
    payload = {"config_hash": config.hash(), "solutions": summary}
    _emit(args, "solve.json", payload)


def _load_profile(stem: str) -> bvp.ProfileSolution:
    base = str(stem)
    for ext in (".json", ".csv"):
        if base.endswith(ext):
            base = base[: -len(ext)]
    try:
        header = Path(base + ".json").read_text()
        body = Path(base + ".csv").read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read profile {base}: {exc}") from exc
    return bvp.ProfileSolution.from_files(header, body)


def cmd_simulate(args, config):
    crit = dispersion.find_critical()
    lat = config.lattice
    if args.profile:
        profile = _load_profile(args.profile)
    else:
        _require_sign(crit, config.potential)
        coeffs = normal_form_coeffs(crit, config.potential)
        profile = bvp.solve(lat.epsilon, crit, coeffs, config.potential, config.solver)
    lo, _ = profile.support()
    x0 = -lo + 8.0
    q, p = waves.lattice_initial_data(profile, profile.c, lat.n_sites, x0)

    def observer(st):
        err, shift = lattice.shape_error(st, profile, profile.c, sigma_guess=x0 + profile.c * st.t, carrier_wavenumber=crit.k0)
        return {"shape_error": err, "shift": shift}

    snapshots = [] if args.snapshots else None
    traj = lattice.run(lattice.LatticeState(q, p), lat.T, lat.dt, config.potential, [observer], stride=lat.stride, snapshots=snapshots, snapshot_stride=lat.stride)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "trajectory.csv").write_text(_with_hash(traj.to_csv(), config.hash()))
    if snapshots is not None:
        (out / "snapshots.bin").write_bytes(b"".join(snapshots))
    E = traj.column("energy")
    payload = {
        "config_hash": config.hash(),
        "epsilon": profile.epsilon,
        "c": profile.c,
        "n_sites": lat.n_sites,
        "dt": lat.dt,
        "T": lat.T,
        "max_shape_error": float(np.max(traj.column("shape_error"))),
        "fitted_speed": lattice.fitted_speed(traj) if len(traj.records) > 1 else float("nan"),
        "energy_drift": float(np.max(np.abs(E - E[0])) / abs(E[0])) if E[0] != 0 else 0.0,
    }
    _emit(args, "simulate.json", payload)


def cmd_verify(args, config):
    crit = dispersion.find_critical()
    _require_sign(crit, config.potential)
    lat = config.lattice
    results = verify.run_all(config.potential, config.solver, lat.n_sites, lat.T, lat.dt)
    payload = {
        "config_hash": config.hash(),
        "all_passed": all(r.passed for r in results),
        "criteria": [r.to_dict() for r in results],
    }
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "verify.json").write_text(dumps(payload))
    if args.json:
        sys.stdout.write(dumps(payload))
    else:
        for r in results:
            sys.stdout.write(r.line() + "\n")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON experiment config")
    common.add_argument("--out", default=None, help="output directory (default: config output_dir)")
    common.add_argument("--json", action="store_true", help="print JSON instead of a table")

    parser = _Parser(prog="fpu-pulses", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("critical", parents=[common], help="critical speed and carrier wavenumber").set_defaults(func=cmd_critical)
    sp = sub.add_parser("spectrum", parents=[common], help="neutral roots of the dispersion relation")
    sp.add_argument("--c2", type=float, required=True, help="squared wave speed")
    sp.add_argument("--box", type=_parse_box, default=(0.5, 3.0), help="re_max,im_max")
    sp.set_defaults(func=cmd_spectrum)
    sub.add_parser("coeffs", parents=[common], help="normal-form coefficients").set_defaults(func=cmd_coeffs)
    sub.add_parser("solve", parents=[common], help="continuation of pulse profiles").set_defaults(func=cmd_solve)
    sm = sub.add_parser("simulate", parents=[common], help="evolve a profile on the chain")
    sm.add_argument("--profile", help="profile file stem written by 'solve' (solves afresh if omitted)")
    sm.add_argument("--snapshots", action="store_true", help="also write binary (q, p) snapshots")
    sm.set_defaults(func=cmd_simulate)
    sub.add_parser("verify", parents=[common], help="run every acceptance check").set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
        if args.out is None:
            args.out = config.output_dir
        args.func(args, config)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_USAGE
    except ExistenceConditionViolated as exc:
        sys.stderr.write(f"rejected: {exc}\n")
        return EXIT_NUMERICAL
    except NumericalFailure as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERICAL
    except FPUError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
