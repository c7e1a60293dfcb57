"""Command-line front end: JSON configs in, CSV sweeps out.

Each pipeline is a subcommand reading a single validated JSON document.
CSV files are written atomically (temp file + rename) with deterministic
row order, so identical configs give byte-identical output.

Exit codes: 0 success, 1 fatal error, 2 completed with flagged rows.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import bo_dissipative, bo_unitary, langevin
from .errors import ConfigError, OptomechError

PIPELINES = ("bo-unitary", "bo-dissipative", "steady-sweep", "stability")

CSV_HEADERS = {
    "bo-unitary": "t,n_thermal,negativity",
    "bo-dissipative": "t,negativity",
    "steady-sweep": "delta,nbar,stable,neg_m1m2,neg_m1ca,neg_m1cb",
    "stability": "delta,abscissa,stable",
}

SCHEMA_VERSION = 1

_DEFAULT_TIME = {"t_max": 100.0, "n_steps": 1000}


@dataclass(frozen=True)
class RunConfig:
    """Fully validated run description."""

    pipeline: str
    params: object
    time_grid: tuple[float, ...] = ()
    n_thermal_grid: tuple[float, ...] = (0.0,)
    delta_grid: tuple[float, ...] = ()
    nbar_grid: tuple[float, ...] = ()
    rtol: float = 1e-10
    atol: float = 1e-10
    cutoff_sigmas: float = bo_unitary.DEFAULT_CUTOFF_SIGMAS
    mixture: str = "per-branch"
    output: Optional[str] = None


def _fail(message: str) -> ConfigError:
    return ConfigError(message)


def _take(raw: dict, context: str, required: dict, optional: dict) -> dict:
    """Pull typed fields out of a JSON object, rejecting unknown keys."""
    if not isinstance(raw, dict):
        raise _fail(f"{context}: expected an object")
    unknown = set(raw) - set(required) - set(optional)
    if unknown:
        raise _fail(f"{context}: unknown key(s) {sorted(unknown)}")
    missing = [k for k in required if k not in raw]
    if missing:
        raise _fail(f"{context}: missing required key(s) {missing}")
    out = {}
    for key, conv in {**required, **optional}.items():
        if key in raw:
            try:
                out[key] = conv(raw[key])
            except (TypeError, ValueError) as exc:
                raise _fail(f"{context}.{key}: {exc}") from exc
    return out


def _as_float(x):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ValueError(f"expected a number, got {x!r}")
    return float(x)


def _as_int(x):
    if isinstance(x, bool) or not isinstance(x, int):
        raise ValueError(f"expected an integer, got {x!r}")
    return x


def _as_complex(x):
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return complex(float(x), 0.0)
    if isinstance(x, list) and len(x) == 2:
        return complex(_as_float(x[0]), _as_float(x[1]))
    raise ValueError(f"expected a number or [re, im] pair, got {x!r}")


def _as_str(x):
    if not isinstance(x, str):
        raise ValueError(f"expected a string, got {x!r}")
    return x


def _linear_grid(raw, context: str) -> tuple[float, ...]:
    if raw is None:
        raise _fail(f"{context}: this grid is required for the selected pipeline")
    if isinstance(raw, list):
        if not raw:
            raise _fail(f"{context}: grid list must be non-empty")
        return tuple(_as_float(x) for x in raw)
    spec = _take(raw, context, {"start": _as_float, "stop": _as_float, "n": _as_int}, {})
    if spec["n"] < 1:
        raise _fail(f"{context}.n: must be at least 1")
    return tuple(np.linspace(spec["start"], spec["stop"], spec["n"]).tolist())


def _time_grid(raw, context: str) -> tuple[float, ...]:
    if raw is None:
        raw = _DEFAULT_TIME
    spec = _take(raw, context, {}, {"t_max": _as_float, "n_steps": _as_int})
    t_max = spec.get("t_max", _DEFAULT_TIME["t_max"])
    n_steps = spec.get("n_steps", _DEFAULT_TIME["n_steps"])
    if t_max <= 0 or n_steps < 2:
        raise _fail(f"{context}: t_max must be positive and n_steps at least 2")
    return tuple(np.linspace(0.0, t_max, n_steps).tolist())


def _drive_from_dict(raw) -> object:
    kind = raw.get("kind") if isinstance(raw, dict) else None
    if kind == "bare":
        spec = _take(
            raw,
            "params.drive",
            {"kind": _as_str, "eta": _as_float, "delta_tilde": _as_float, "g": _as_float},
            {},
        )
        return langevin.BareDrive(spec["eta"], spec["delta_tilde"], spec["g"])
    if kind == "effective":
        spec = _take(
            raw,
            "params.drive",
            {"kind": _as_str, "g_a_s": _as_float, "g_b_s": _as_float},
            {"delta_a": _as_float, "delta_b": _as_float},
        )
        return langevin.EffectiveDrive(
            spec["g_a_s"], spec["g_b_s"], spec.get("delta_a", 0.0), spec.get("delta_b", 0.0)
        )
    raise _fail('params.drive.kind: must be "bare" or "effective"')


def config_from_dict(doc: dict) -> RunConfig:
    """Validate a parsed JSON document into a RunConfig."""
    top = _take(
        doc,
        "config",
        {"schema": _as_int, "pipeline": _as_str, "params": dict},
        {
            "grids": dict,
            "solver": dict,
            "mixture": _as_str,
            "output": _as_str,
        },
    )
    if top["schema"] != SCHEMA_VERSION:
        raise _fail(f"config.schema: unsupported version {top['schema']}")
    pipeline = top["pipeline"]
    if pipeline not in PIPELINES:
        raise _fail(f"config.pipeline: unknown pipeline {pipeline!r}")

    solver = _take(
        top.get("solver", {}),
        "solver",
        {},
        {"rtol": _as_float, "atol": _as_float, "cutoff_sigmas": _as_float},
    )
    mixture = top.get("mixture", "per-branch")
    if mixture not in bo_unitary.MIXTURE_MODES:
        raise _fail(f"config.mixture: unknown mode {mixture!r}")

    grids = top.get("grids", {})
    if not isinstance(grids, dict):
        raise _fail("config.grids: expected an object")
    allowed_grids = {
        "bo-unitary": {"time", "n_thermal"},
        "bo-dissipative": {"time"},
        "steady-sweep": {"delta", "nbar"},
        "stability": {"delta"},
    }[pipeline]
    unknown = set(grids) - allowed_grids
    if unknown:
        raise _fail(
            f"config.grids: key(s) {sorted(unknown)} not used by pipeline {pipeline}"
        )

    raw_params = top["params"]
    kwargs = dict(
        time_grid=(),
        n_thermal_grid=(0.0,),
        delta_grid=(),
        nbar_grid=(),
        rtol=solver.get("rtol", 1e-10),
        atol=solver.get("atol", 1e-10),
        cutoff_sigmas=solver.get("cutoff_sigmas", bo_unitary.DEFAULT_CUTOFF_SIGMAS),
        mixture=mixture,
        output=top.get("output"),
    )

    if pipeline == "bo-unitary":
        spec = _take(
            raw_params,
            "params",
            {"g": _as_float, "lam": _as_float, "alpha_a": _as_complex, "alpha_b": _as_complex},
            {"omega": _as_float},
        )
        params = bo_unitary.BOParams(
            omega=spec.get("omega", 1.0),
            g=spec["g"],
            lam=spec["lam"],
            alpha_a=spec["alpha_a"],
            alpha_b=spec["alpha_b"],
        )
        kwargs["time_grid"] = _time_grid(grids.get("time"), "grids.time")
        raw_nth = grids.get("n_thermal", [0.0])
        if not isinstance(raw_nth, list) or not raw_nth:
            raise _fail("grids.n_thermal: expected a non-empty list")
        kwargs["n_thermal_grid"] = tuple(_as_float(x) for x in raw_nth)
    elif pipeline == "bo-dissipative":
        spec = _take(
            raw_params,
            "params",
            {"g": _as_float, "lam": _as_float, "alpha_a": _as_complex, "alpha_b": _as_complex},
            {
                "omega": _as_float,
                "n_thermal": _as_float,
                "kappa": _as_float,
                "gamma": _as_float,
                "n_bath": _as_float,
            },
        )
        params = bo_dissipative.DissipativeParams(
            omega=spec.get("omega", 1.0),
            g=spec["g"],
            lam=spec["lam"],
            alpha_a=spec["alpha_a"],
            alpha_b=spec["alpha_b"],
            n_thermal=spec.get("n_thermal", 0.0),
            kappa=spec.get("kappa", 0.0),
            gamma=spec.get("gamma", 0.0),
            n_bath=spec.get("n_bath", 0.0),
        )
        kwargs["time_grid"] = _time_grid(grids.get("time"), "grids.time")
    else:
        spec = _take(
            raw_params,
            "params",
            {"lam": _as_float, "kappa": _as_float, "gamma_m": _as_float, "drive": dict},
            {"omega": _as_float},
        )
        params = langevin.DriveParams(
            omega=spec.get("omega", 1.0),
            lam=spec["lam"],
            kappa=spec["kappa"],
            gamma_m=spec["gamma_m"],
            n1=0.0,
            n2=0.0,
            drive=_drive_from_dict(spec["drive"]),
        )
        kwargs["delta_grid"] = _linear_grid(grids.get("delta"), "grids.delta")
        if pipeline == "steady-sweep":
            kwargs["nbar_grid"] = _linear_grid(grids.get("nbar"), "grids.nbar")

    try:
        return RunConfig(pipeline=pipeline, params=params, **kwargs)
    except OptomechError as exc:
        raise _fail(f"params: {exc}") from exc


def write_config(config: RunConfig) -> dict:
    """Serialize a RunConfig back to its JSON document form."""
    doc: dict = {"schema": SCHEMA_VERSION, "pipeline": config.pipeline}
    p = config.params
    grids: dict = {}

    def complex_out(z: complex):
        return z.real if z.imag == 0 else [z.real, z.imag]

    if config.pipeline == "bo-unitary":
        doc["params"] = {
            "omega": p.omega,
            "g": p.g,
            "lam": p.lam,
            "alpha_a": complex_out(complex(p.alpha_a)),
            "alpha_b": complex_out(complex(p.alpha_b)),
        }
        grids["time"] = {
            "t_max": config.time_grid[-1],
            "n_steps": len(config.time_grid),
        }
        grids["n_thermal"] = list(config.n_thermal_grid)
    elif config.pipeline == "bo-dissipative":
        doc["params"] = {
            "omega": p.omega,
            "g": p.g,
            "lam": p.lam,
            "alpha_a": complex_out(complex(p.alpha_a)),
            "alpha_b": complex_out(complex(p.alpha_b)),
            "n_thermal": p.n_thermal,
            "kappa": p.kappa,
            "gamma": p.gamma,
            "n_bath": p.n_bath,
        }
        grids["time"] = {
            "t_max": config.time_grid[-1],
            "n_steps": len(config.time_grid),
        }
    else:
        drive = p.drive
        if isinstance(drive, langevin.BareDrive):
            drive_doc = {
                "kind": "bare",
                "eta": drive.eta,
                "delta_tilde": drive.delta_tilde,
                "g": drive.g,
            }
        else:
            drive_doc = {
                "kind": "effective",
                "g_a_s": drive.g_a_s,
                "g_b_s": drive.g_b_s,
                "delta_a": drive.delta_a,
                "delta_b": drive.delta_b,
            }
        doc["params"] = {
            "omega": p.omega,
            "lam": p.lam,
            "kappa": p.kappa,
            "gamma_m": p.gamma_m,
            "drive": drive_doc,
        }
        grids["delta"] = list(config.delta_grid)
        if config.pipeline == "steady-sweep":
            grids["nbar"] = list(config.nbar_grid)

    doc["grids"] = grids
    doc["solver"] = {
        "rtol": config.rtol,
        "atol": config.atol,
        "cutoff_sigmas": config.cutoff_sigmas,
    }
    doc["mixture"] = config.mixture
    if config.output is not None:
        doc["output"] = config.output
    return doc


def load_config(path) -> RunConfig:
    """Read and validate a JSON config file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise _fail(f"cannot read config {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise _fail(
            f"{path}: JSON parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return config_from_dict(doc)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float) and math.isnan(value):
        return "nan"
    return repr(float(value))


def _rows_bo_unitary(config: RunConfig, workers: int):
    curves = {
        nth: bo_unitary.negativity_curve(
            bo_unitary.BOParams(
                omega=config.params.omega,
                g=config.params.g,
                lam=config.params.lam,
                alpha_a=config.params.alpha_a,
                alpha_b=config.params.alpha_b,
                n_thermal=nth,
            ),
            config.time_grid,
            mixture=config.mixture,
            cutoff_sigmas=config.cutoff_sigmas,
        )
        for nth in config.n_thermal_grid
    }
    rows = []
    for k, t in enumerate(config.time_grid):
        for nth in config.n_thermal_grid:
            rows.append((_fmt(t), _fmt(nth), _fmt(curves[nth][k])))
    return rows, 0


def _rows_bo_dissipative(config: RunConfig, workers: int):
    curve = bo_dissipative.dissipative_negativity(
        config.params,
        config.time_grid,
        mixture=config.mixture,
        cutoff_sigmas=config.cutoff_sigmas,
        rtol=config.rtol,
        atol=config.atol,
        workers=workers,
    )
    rows = [(_fmt(t), _fmt(v)) for t, v in zip(config.time_grid, curve)]
    return rows, 0


def _rows_steady_sweep(config: RunConfig, workers: int):
    results = langevin.sweep(config.params, config.delta_grid, config.nbar_grid, workers)
    rows = []
    flagged = 0
    for r in results:
        if not r.stable:
            flagged += 1
        rows.append(
            (
                _fmt(r.delta),
                _fmt(r.nbar),
                _fmt(r.stable),
                _fmt(r.neg_m1m2),
                _fmt(r.neg_m1ca),
                _fmt(r.neg_m1cb),
            )
        )
    return rows, flagged


def _rows_stability(config: RunConfig, workers: int):
    rows = []
    flagged = 0
    for delta in config.delta_grid:
        point = config.params
        drive = point.drive
        try:
            if isinstance(drive, langevin.EffectiveDrive):
                point = replace(point, drive=replace(drive, delta_a=delta, delta_b=delta))
                model = langevin.build_drift(point)
            else:
                point = replace(point, drive=replace(drive, delta_tilde=delta))
                ss = langevin.rotate_to_real(langevin.solve_steady_state(point))
                model = langevin.build_drift(point, ss)
        except OptomechError:
            flagged += 1
            rows.append((_fmt(delta), "nan", _fmt(False)))
            continue
        stable, abscissa = langevin.is_stable(model.z)
        if not stable:
            flagged += 1
        rows.append((_fmt(delta), _fmt(abscissa), _fmt(stable)))
    return rows, flagged


_RUNNERS = {
    "bo-unitary": _rows_bo_unitary,
    "bo-dissipative": _rows_bo_dissipative,
    "steady-sweep": _rows_steady_sweep,
    "stability": _rows_stability,
}


def write_csv(path, header: str, rows) -> None:
    """Atomically write rows under the exact header."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(header + "\n")
            for row in rows:
                fh.write(",".join(row) + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run(config: RunConfig, out: Optional[str] = None, workers: int = 1) -> int:
    """Execute a validated config; returns the process exit code."""
    target = out or config.output
    if target is None:
        raise ConfigError("no output path: set config.output or pass --out")
    rows, flagged = _RUNNERS[config.pipeline](config, workers)
    write_csv(target, CSV_HEADERS[config.pipeline], rows)
    return 2 if flagged else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="optomech",
        description="Entanglement simulators for fiber-coupled optomechanical cavities",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in PIPELINES + ("validate",):
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", required=True, help="path to a JSON run config")
        if name != "validate":
            cmd.add_argument("--out", default=None, help="output CSV path")
            cmd.add_argument("--threads", type=int, default=1, help="worker processes")
    args = parser.parse_args(argv)

    try:
        config = load_config(args.config)
        if args.command == "validate":
            print(f"ok: {config.pipeline} config is valid")
            return 0
        if config.pipeline != args.command:
            raise ConfigError(
                f"config declares pipeline {config.pipeline!r}, "
                f"but the {args.command!r} command was invoked"
            )
        code = run(config, args.out, max(1, args.threads))
    except OptomechError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if code == 2:
        print("completed with flagged rows", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
