"""Command-line frontend: config ingestion, run orchestration, artifacts.

Subcommands: ``orbit`` (integrate and dump the orbit), ``clv`` (full two-pass
run with vectors, exponents, optional checkpoint), ``perturb`` (steering
experiments against a stored checkpoint), ``plot`` (gnuplot script emission).
Every error path exits nonzero after printing a single line of the form
``error:<code>: detail`` to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import artifacts
from .errors import ArgumentError, CheckpointError, ClvKitError, ConfigError, RadiusNotReachedError
from .experiments import (
    PerturbationSpec,
    RunConfig,
    direction_test,
    find_orbit_point,
    first_radius_crossing,
    perturb_and_evolve,
    run_transient_clv,
)
from .ginelli import backward_pass, compose_vectors, seed_coefficients
from .integrate import integrate_orbit
from .systems import make_system

_RUN_KEYS = {
    "system",
    "params",
    "u0",
    "t0",
    "dt",
    "n1",
    "n2",
    "substeps",
    "q0_mode",
    "q0_seed",
    "backward_seed",
    "eq_tol",
    "alignment_tol",
}
_TOP_KEYS = _RUN_KEYS | {
    "out_dir",
    "orbit_steps",
    "perturbations",
    "exit_radius",
    "max_steps",
}
_PERTURBATION_KEYS = {"base_index", "z_target", "vector", "amplitude", "steps", "target", "radius"}


@dataclass
class PerturbationConfig:
    vector: int
    base_index: int | None = None
    z_target: float | None = None
    amplitude: float = 1e-12
    steps: int | None = None
    target: tuple | None = None
    radius: float = 1.0


@dataclass
class CliConfig:
    run: RunConfig
    out_dir: str = "out"
    orbit_steps: int | None = None
    perturbations: list = field(default_factory=list)
    exit_radius: float = 10.0
    max_steps: int = 2000


def _coerce(raw: dict, key: str, kind, default):
    if key not in raw or raw[key] is None:
        return default
    value = raw[key]
    try:
        return kind(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"config key '{key}' has invalid value {value!r}: {exc}") from exc


def load_config(path) -> CliConfig:
    """Parse and validate a JSON config file.

    ``system`` is the one required key; everything else defaults to the
    reference run. Unknown keys are rejected by name.
    """
    p = Path(path)
    try:
        raw = json.loads(p.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config '{p}': {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config '{p}' is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"config '{p}' must be a JSON object")
    for key in raw:
        if key not in _TOP_KEYS:
            raise ConfigError(f"unknown config key '{key}'")
    if "system" not in raw:
        raise ConfigError("missing required config key 'system'")

    params = raw.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("config key 'params' must be an object")
    u0 = raw.get("u0", RunConfig.u0)
    if not isinstance(u0, (list, tuple)):
        raise ConfigError("config key 'u0' must be an array of numbers")

    run = RunConfig(
        system=str(raw["system"]),
        params=params,
        u0=tuple(float(v) for v in u0),
        t0=_coerce(raw, "t0", float, RunConfig.t0),
        dt=_coerce(raw, "dt", float, RunConfig.dt),
        n1=_coerce(raw, "n1", int, RunConfig.n1),
        n2=_coerce(raw, "n2", int, RunConfig.n2),
        substeps=_coerce(raw, "substeps", int, RunConfig.substeps),
        q0_mode=_coerce(raw, "q0_mode", str, RunConfig.q0_mode),
        q0_seed=_coerce(raw, "q0_seed", int, RunConfig.q0_seed),
        backward_seed=_coerce(raw, "backward_seed", int, RunConfig.backward_seed),
        eq_tol=_coerce(raw, "eq_tol", float, RunConfig.eq_tol),
        alignment_tol=_coerce(raw, "alignment_tol", float, RunConfig.alignment_tol),
    )
    if run.q0_mode not in ("identity", "random"):
        raise ConfigError(f"config key 'q0_mode' must be 'identity' or 'random', got '{run.q0_mode}'")

    perturbations = []
    entries = raw.get("perturbations", [])
    if not isinstance(entries, list):
        raise ConfigError("config key 'perturbations' must be an array")
    for i, entry in enumerate(entries, start=1):
        if not isinstance(entry, dict):
            raise ConfigError(f"perturbation entry {i} must be an object")
        for key in entry:
            if key not in _PERTURBATION_KEYS:
                raise ConfigError(f"unknown perturbation key '{key}' (entry {i})")
        if "vector" not in entry:
            raise ConfigError(f"perturbation entry {i} is missing key 'vector'")
        has_base = entry.get("base_index") is not None
        has_z = entry.get("z_target") is not None
        if has_base == has_z:
            raise ConfigError(
                f"perturbation entry {i} needs exactly one of 'base_index' or 'z_target'"
            )
        target = entry.get("target")
        if target is not None:
            if not isinstance(target, (list, tuple)) or len(target) != 2:
                raise ConfigError(f"perturbation entry {i}: 'target' must be a 2-vector")
            target = (float(target[0]), float(target[1]))
        perturbations.append(
            PerturbationConfig(
                vector=_coerce(entry, "vector", int, None),
                base_index=_coerce(entry, "base_index", int, None),
                z_target=_coerce(entry, "z_target", float, None),
                amplitude=_coerce(entry, "amplitude", float, 1e-12),
                steps=_coerce(entry, "steps", int, None),
                target=target,
                radius=_coerce(entry, "radius", float, 1.0),
            )
        )

    return CliConfig(
        run=run,
        out_dir=_coerce(raw, "out_dir", str, "out"),
        orbit_steps=_coerce(raw, "orbit_steps", int, None),
        perturbations=perturbations,
        exit_radius=_coerce(raw, "exit_radius", float, 10.0),
        max_steps=_coerce(raw, "max_steps", int, 2000),
    )


def cmd_orbit(cfg: CliConfig, out_dir: Path) -> Path:
    """Integrate the configured orbit and write ``orbit.csv``."""
    system = make_system(cfg.run.system, cfg.run.params)
    steps = cfg.orbit_steps if cfg.orbit_steps is not None else cfg.run.n2
    traj = integrate_orbit(
        system, cfg.run.u0, cfg.run.t0, cfg.run.dt, steps, substeps=cfg.run.substeps
    )
    out = out_dir / "orbit.csv"
    artifacts.write_trajectory_csv(out, traj)
    return out


def cmd_clv(cfg: CliConfig, out_dir: Path, checkpoint: Path | None = None) -> dict:
    """Run the two-pass pipeline; write vectors, exponents, and a checkpoint."""
    result = run_transient_clv(cfg.run)
    vectors_csv = out_dir / "vectors.csv"
    exponents_json = out_dir / "exponents.json"
    artifacts.write_vectors_csv(vectors_csv, result.vectors)
    payload = {
        "system": cfg.run.system,
        "params": result.record.params,
        "dt": cfg.run.dt,
        "window": list(result.exponents.window),
        "values": [float(v) for v in result.exponents.values],
        "q0_mode": cfg.run.q0_mode,
        "backward_seed": cfg.run.backward_seed,
        "tolerances": {
            "near_equilibrium": cfg.run.eq_tol,
            "alignment": cfg.run.alignment_tol,
        },
    }
    if result.alignment is not None:
        payload["final_alignment"] = [float(c) for c in result.alignment.final]
        payload["aligned_from"] = result.alignment.aligned_from
    artifacts.write_json(exponents_json, payload)
    written = {"vectors": vectors_csv, "exponents": exponents_json}
    if checkpoint is not None:
        artifacts.checkpoint_write(checkpoint, result.record)
        written["checkpoint"] = checkpoint
    return written


def _check_record_matches(cfg: CliConfig, rec) -> None:
    system = make_system(cfg.run.system, cfg.run.params)
    mismatches = []
    if rec.system_name != system.name:
        mismatches.append(f"system '{rec.system_name}' != '{system.name}'")
    if rec.params != system.params:
        mismatches.append(f"params {rec.params} != {system.params}")
    for name, want in (
        ("dt", cfg.run.dt),
        ("t0", cfg.run.t0),
        ("substeps", cfg.run.substeps),
        ("n1", cfg.run.n1),
        ("n2", cfg.run.n2),
    ):
        if getattr(rec, name) != want:
            mismatches.append(f"{name} {getattr(rec, name)!r} != {want!r}")
    if not np.array_equal(rec.states[0], np.asarray(cfg.run.u0, dtype=float)):
        mismatches.append(f"u0 {rec.states[0].tolist()} != {list(cfg.run.u0)}")
    if mismatches:
        raise CheckpointError("checkpoint does not match config: " + "; ".join(mismatches))


def cmd_perturb(cfg: CliConfig, checkpoint: Path, out_dir: Path) -> dict:
    """Steering experiments against a stored forward record.

    Writes one trajectory CSV per configured perturbation plus a JSON summary
    of the direction tests.
    """
    rec = artifacts.checkpoint_read(checkpoint)
    _check_record_matches(cfg, rec)
    brec = backward_pass(rec, seed_coefficients(rec.dim, cfg.run.backward_seed))
    vf = compose_vectors(rec, brec, 0, rec.n1)

    summary = []
    written = {}
    for i, pc in enumerate(cfg.perturbations, start=1):
        base_index = pc.base_index
        if base_index is None:
            base_index = find_orbit_point(rec, pc.z_target)
        spec = PerturbationSpec(
            base_index=base_index, column=pc.vector, amplitude=pc.amplitude, steps=pc.steps
        )
        traj = perturb_and_evolve(
            rec, vf, spec, exit_radius=cfg.exit_radius, max_steps=cfg.max_steps
        )
        csv_path = out_dir / f"perturbed_{i}.csv"
        artifacts.write_trajectory_csv(csv_path, traj)
        written[f"perturbed_{i}"] = csv_path

        target = pc.target
        if target is None and pc.vector == 1:
            target = (1.0, 0.0)
        elif target is None and pc.vector == 2:
            target = (0.0, 1.0)
        entry = {
            "index": i,
            "csv": csv_path.name,
            "vector": pc.vector,
            "base_index": base_index,
            "base_time": rec.time_at(base_index),
            "amplitude": pc.amplitude,
            "steps": traj.states.shape[0] - 1,
            "radius": pc.radius,
            "target": list(target) if target is not None else None,
            "cosine": None,
            "crossing_index": None,
            "crossing_time": None,
            "error": None,
        }
        r = np.hypot(traj.states[:, 0], traj.states[:, 1])
        entry["max_radius"] = float(r.max())
        if target is not None:
            try:
                entry["cosine"] = direction_test(traj, target, pc.radius)
                k = first_radius_crossing(traj, pc.radius)
                entry["crossing_index"] = k
                entry["crossing_time"] = float(traj.times[k])
            except RadiusNotReachedError as exc:
                entry["error"] = f"{exc.code}: {exc}"
        summary.append(entry)

    summary_path = out_dir / "perturb_summary.json"
    artifacts.write_json(
        summary_path,
        {"system": rec.system_name, "checkpoint": str(checkpoint), "perturbations": summary},
    )
    written["summary"] = summary_path
    return written


def cmd_plot(
    out_dir: Path,
    vectors: Path | None = None,
    perturbed: list | None = None,
    stride: int = 500,
    scale: float = 20.0,
) -> list:
    """Emit gnuplot scripts for existing CSV artifacts."""
    if vectors is None and not perturbed:
        raise ArgumentError("nothing to plot: pass --vectors and/or --perturbed")
    written = []
    if vectors is not None:
        script = artifacts.gnuplot_vectors_script(vectors, out_dir, stride=stride, scale=scale)
        path = out_dir / "vectors.gp"
        artifacts.atomic_write_text(path, script)
        written.append(path)
    for p in perturbed or []:
        script = artifacts.gnuplot_perturbed_script(p, out_dir)
        path = out_dir / f"{Path(p).stem}.gp"
        artifacts.atomic_write_text(path, script)
        written.append(path)
    return written


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clvkit",
        description="Tangent-space vectors along transient orbits: two-pass runs, "
        "steering experiments, and plot scripts.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON config file")
    common.add_argument("--out", default=None, help="output directory (default from config)")
    common.add_argument(
        "--seed", type=int, default=None, help="override the backward coefficient seed"
    )

    p_orbit = sub.add_parser("orbit", parents=[common], help="integrate the orbit, write CSV")
    del p_orbit

    p_clv = sub.add_parser(
        "clv", parents=[common], help="two-pass run: vectors CSV, exponents JSON, checkpoint"
    )
    p_clv.add_argument("--checkpoint", default=None, help="write the forward record here")

    p_pert = sub.add_parser(
        "perturb", parents=[common], help="steering experiments from a stored checkpoint"
    )
    p_pert.add_argument("--checkpoint", required=True, help="forward record to perturb against")

    p_plot = sub.add_parser("plot", help="emit gnuplot scripts for CSV artifacts")
    p_plot.add_argument("--out", default=".", help="directory for the scripts")
    p_plot.add_argument("--vectors", default=None, help="vectors CSV from the clv command")
    p_plot.add_argument(
        "--perturbed", action="append", default=None, help="perturbed-orbit CSV (repeatable)"
    )
    p_plot.add_argument("--stride", type=int, default=500, help="glyph subsampling stride")
    p_plot.add_argument("--scale", type=float, default=20.0, help="glyph length scale")
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "plot":
            out_dir = Path(args.out)
            out_dir.mkdir(parents=True, exist_ok=True)
            for path in cmd_plot(
                out_dir,
                vectors=Path(args.vectors) if args.vectors else None,
                perturbed=[Path(p) for p in args.perturbed or []],
                stride=args.stride,
                scale=args.scale,
            ):
                print(path)
            return 0

        cfg = load_config(args.config)
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise ConfigError(f"--seed must be a u64, got {args.seed}")
            cfg.run.backward_seed = args.seed
        out_dir = Path(args.out) if args.out is not None else Path(cfg.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)

        if args.command == "orbit":
            print(cmd_orbit(cfg, out_dir))
        elif args.command == "clv":
            checkpoint = Path(args.checkpoint) if args.checkpoint else None
            for path in cmd_clv(cfg, out_dir, checkpoint).values():
                print(path)
        elif args.command == "perturb":
            for path in cmd_perturb(cfg, Path(args.checkpoint), out_dir).values():
                print(path)
        return 0
    except ClvKitError as exc:
        print(f"error:{exc.code}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error:io: {exc}", file=sys.stderr)
        return 1


def console_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_entry()
