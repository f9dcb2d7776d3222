"""Command-line entry point: ``qdiss verify`` and ``qdiss trajectory``.

Configuration is a flat ``key = value`` text file with dotted keys; command
line flags override file values. Exit codes: 0 success, 2 residual above
1e-8 (ideal mode), 3 numerical-domain error, 64 usage/config error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .errors import InvalidArgumentError, SupportMismatchError
from .expsim import NoiseModel, ShotConfig, run_shots
from .protocol import (
    DriveStep,
    Protocol,
    PulseShape,
    build_rotating_axis,
    build_xy_quench,
    evolve_trajectory,
    reverse_protocol,
)
from .qmath import DensityMatrix
from .thermo import GibbsSpec, RelationReport, verify_relations

EXIT_OK = 0
EXIT_RESIDUAL = 2
EXIT_NUMERIC = 3
EXIT_USAGE = 64

RESIDUAL_LIMIT = 1e-8

REPORT_HEADER = ["protocol", "checkpoint", "t_ns", "lhs_eq1", "rhs_eq1", "residual_eq1",
                 "alpha", "lhs_eq2", "rhs_eq2", "residual_eq2", "mean_or_rep", "std"]
TRAJECTORY_HEADER = ["protocol", "direction", "branch", "checkpoint", "t_ns", "x", "y", "z"]

PROTOCOL_DEFAULTS = {
    "xy_quench": {"n_steps": 14, "theta_deg": 6.22, "phi_deg": 0.0},
    "rotating_axis": {"n_steps": 16, "theta_deg": 5.88, "phi_deg": 6.08},
    "custom": {"n_steps": None, "theta_deg": None, "phi_deg": None},
}


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    protocol_kind: str = "xy_quench"
    n_steps: int | None = None
    theta_deg: float | None = None
    phi_deg: float | None = None
    step_ns: float = 16.0
    custom_steps: str = ""
    envelope: str = "ideal"
    beta_omega_start: float = 1.0
    beta_omega_end: float = 1.0
    alphas: list[float] = field(default_factory=list)
    mode: str = "ideal"
    tomography_shots: int = 3000
    tpm_shots: int = 3000
    repetitions: int = 25
    seed: int = 0
    projection: str = "radial"
    noise_t1: float = 8327.0
    noise_t2: float = 6813.0
    noise_enabled: bool = False
    output_format: str = "csv"
    output_path: str = "-"


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_floats(text: str) -> list[float]:
    return [float(x) for x in text.replace(";", ",").split(",") if x.strip()]


def _choice(*options):
    def parse(text: str) -> str:
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return text
    return parse


# dotted key -> (RunConfig attribute, parser)
CONFIG_KEYS = {
    "protocol.kind": ("protocol_kind", _choice("xy_quench", "rotating_axis", "custom")),
    "protocol.n_steps": ("n_steps", int),
    "protocol.theta_deg": ("theta_deg", float),
    "protocol.phi_deg": ("phi_deg", float),
    "protocol.step_ns": ("step_ns", float),
    "protocol.steps": ("custom_steps", str),
    "pulse.envelope": ("envelope", _choice("ideal", "gaussian")),
    "thermo.beta_omega_start": ("beta_omega_start", float),
    "thermo.beta_omega_end": ("beta_omega_end", float),
    "alphas": ("alphas", _parse_floats),
    "mode": ("mode", _choice("ideal", "shots")),
    "shots.tomography_shots": ("tomography_shots", int),
    "shots.tpm_shots": ("tpm_shots", int),
    "shots.repetitions": ("repetitions", int),
    "shots.seed": ("seed", int),
    "shots.projection": ("projection", _choice("radial", "clip")),
    "noise.t1": ("noise_t1", float),
    "noise.t2": ("noise_t2", float),
    "noise.enabled": ("noise_enabled", _parse_bool),
    "output.format": ("output_format", _choice("csv", "json")),
    "output.path": ("output_path", str),
}


def read_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown config key '{key}'")
        values[key] = value
    return values


def build_config(values: dict[str, str]) -> RunConfig:
    cfg = RunConfig()
    for key, text in values.items():
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown config key '{key}'")
        attr, parse = CONFIG_KEYS[key]
        try:
            setattr(cfg, attr, parse(text))
        except ValueError as exc:
            raise ConfigError(f"bad value for '{key}': {exc}") from None
    validate_config(cfg)
    return cfg


def validate_config(cfg: RunConfig) -> None:
    for a in cfg.alphas:
        if not (a > 0 and math.isfinite(a)):
            raise ConfigError(f"alphas: {a} is not a positive number")
        if abs(a - 1.0) < 1e-6:
            raise ConfigError("alphas: 1.0 is covered by the relative-entropy columns; remove it")
    if cfg.protocol_kind == "custom" and not cfg.custom_steps.strip():
        raise ConfigError("protocol.steps is required when protocol.kind = custom")
    if cfg.protocol_kind != "custom" and cfg.custom_steps.strip():
        raise ConfigError("protocol.steps is only valid with protocol.kind = custom")
    for name in ("beta_omega_start", "beta_omega_end", "step_ns"):
        if not getattr(cfg, name) > 0:
            raise ConfigError(f"{name} must be positive")
    try:
        build_protocol(cfg)
        shot_config(cfg)
        noise_model(cfg)
    except InvalidArgumentError as exc:
        raise ConfigError(str(exc)) from None


def _parse_custom_steps(text: str, step_ns: float) -> tuple[DriveStep, ...]:
    # "phase_deg:angle_deg[:duration_ns]; ..."
    steps = []
    for chunk in text.split(";"):
        if not chunk.strip():
            continue
        parts = [float(x) for x in chunk.split(":")]
        if len(parts) not in (2, 3):
            raise InvalidArgumentError(f"protocol.steps entry {chunk.strip()!r} needs phase:angle[:ns]")
        duration = parts[2] if len(parts) == 3 else step_ns
        steps.append(DriveStep.at_phase(math.radians(parts[0]), math.radians(parts[1]), duration))
    return tuple(steps)


def build_protocol(cfg: RunConfig) -> Protocol:
    defaults = PROTOCOL_DEFAULTS[cfg.protocol_kind]
    n_steps = cfg.n_steps if cfg.n_steps is not None else defaults["n_steps"]
    theta = cfg.theta_deg if cfg.theta_deg is not None else defaults["theta_deg"]
    phi = cfg.phi_deg if cfg.phi_deg is not None else defaults["phi_deg"]
    w0, w1 = cfg.beta_omega_start, cfg.beta_omega_end
    if cfg.protocol_kind == "xy_quench":
        return build_xy_quench(math.radians(theta), n_steps, cfg.step_ns, w0, w1)
    if cfg.protocol_kind == "rotating_axis":
        return build_rotating_axis(math.radians(theta), math.radians(phi), n_steps,
                                   cfg.step_ns, w0, w1)
    try:
        steps = _parse_custom_steps(cfg.custom_steps, cfg.step_ns)
    except ValueError as exc:
        raise InvalidArgumentError(f"protocol.steps: {exc}") from None
    return Protocol(steps, w0, w1, "custom")


def shot_config(cfg: RunConfig) -> ShotConfig:
    return ShotConfig(cfg.tomography_shots, cfg.tpm_shots, cfg.repetitions, cfg.seed)


def noise_model(cfg: RunConfig) -> NoiseModel:
    return NoiseModel(cfg.noise_t1, cfg.noise_t2, cfg.noise_enabled)


def config_echo(cfg: RunConfig) -> dict[str, Any]:
    echo = {key: getattr(cfg, attr) for key, (attr, _) in CONFIG_KEYS.items()}
    for name, value in PROTOCOL_DEFAULTS[cfg.protocol_kind].items():
        if echo["protocol." + name] is None:
            echo["protocol." + name] = value
    return echo


def fmt(x: float | None) -> str:
    if x is None:
        return ""
    return format(float(x) + 0.0, ".12g")


def report_rows(report: RelationReport, tag: str) -> list[dict[str, Any]]:
    rows = []
    for r in report.rows:
        base = {"protocol": report.label, "checkpoint": r.index, "t_ns": r.time,
                "lhs_eq1": r.entropy_lhs, "rhs_eq1": r.entropy_rhs,
                "residual_eq1": r.entropy_residual, "mean_or_rep": tag}
        rows.append({**base, "alpha": None, "lhs_eq2": None, "rhs_eq2": None,
                     "residual_eq2": None, "std": None})
        for a in report.alphas:
            pt = r.renyi[a]
            rows.append({**base, "alpha": a, "lhs_eq2": pt.lhs, "rhs_eq2": pt.rhs,
                         "residual_eq2": pt.residual, "std": None})
    return rows


def statistics_rows(stats, tag: str) -> list[dict[str, Any]]:
    """Rows for the repetition mean (``tag='mean'``) or standard deviation (``'std'``).

    On mean rows the ``std`` column carries the standard deviation of that
    row's residual.
    """
    src = stats.mean if tag == "mean" else stats.std
    rows = []
    for m, t in enumerate(stats.times):
        base = {"protocol": stats.label, "checkpoint": m, "t_ns": float(t),
                "lhs_eq1": src[("entropy_lhs", None)][m],
                "rhs_eq1": src[("entropy_rhs", None)][m],
                "residual_eq1": src[("entropy_residual", None)][m], "mean_or_rep": tag}
        std = stats.std[("entropy_residual", None)][m] if tag == "mean" else None
        rows.append({**base, "alpha": None, "lhs_eq2": None, "rhs_eq2": None,
                     "residual_eq2": None, "std": std})
        for a in stats.alphas:
            std = stats.std[("renyi_residual", a)][m] if tag == "mean" else None
            rows.append({**base, "alpha": a, "lhs_eq2": src[("renyi_lhs", a)][m],
                         "rhs_eq2": src[("renyi_rhs", a)][m],
                         "residual_eq2": src[("renyi_residual", a)][m], "std": std})
    return rows


def _native(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def render(rows: list[dict[str, Any]], header: list[str], fmt_name: str,
           meta: dict[str, Any]) -> str:
    if fmt_name == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(row[h]) if isinstance(row[h], (float, np.floating))
                             else ("" if row[h] is None else str(_native(row[h])))
                             for h in header])
        return buf.getvalue()
    payload = {**meta, "columns": header,
               "rows": [{h: _native(row[h]) for h in header} for row in rows]}
    return json.dumps(payload, indent=2) + "\n"


def parse_report_csv(text: str) -> list[dict[str, Any]]:
    """Inverse of the CSV writer: numeric columns back to floats, empty cells to None."""
    reader = csv.DictReader(io.StringIO(text))
    out = []
    for row in reader:
        parsed: dict[str, Any] = {}
        for k, v in row.items():
            if v == "":
                parsed[k] = None
            elif k in ("protocol", "mean_or_rep", "direction", "branch"):
                parsed[k] = v
            elif k == "checkpoint":
                parsed[k] = int(v)
            else:
                parsed[k] = float(v)
        out.append(parsed)
    return out


def _write(text: str, path: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8", newline="")


def _meta(command: str, cfg: RunConfig, **extra) -> dict[str, Any]:
    return {"software": "qdiss", "version": __version__, "command": command,
            "config": config_echo(cfg), **extra}


def cmd_verify(cfg: RunConfig) -> int:
    p = build_protocol(cfg)
    g = GibbsSpec(1.0, cfg.beta_omega_start, cfg.beta_omega_end)
    shape = PulseShape(cfg.envelope)
    if cfg.mode == "ideal":
        report = verify_relations(p, g, shape, cfg.alphas)
        rows = report_rows(report, "ideal")
        worst = report.max_residual()
        text = render(rows, REPORT_HEADER, cfg.output_format,
                      _meta("verify", cfg, max_abs_residual=worst))
        _write(text, cfg.output_path)
        if worst > RESIDUAL_LIMIT:
            print(f"max |residual| {worst:.3e} exceeds {RESIDUAL_LIMIT:g}", file=sys.stderr)
            return EXIT_RESIDUAL
        return EXIT_OK
    run = run_shots(p, g, shape, cfg.alphas, shot_config(cfg), noise_model(cfg), cfg.projection)
    rows = []
    for k, rep in enumerate(run.repetitions):
        rows.extend(report_rows(rep.report, f"rep{k}"))
    rows.extend(statistics_rows(run.statistics, "mean"))
    rows.extend(statistics_rows(run.statistics, "std"))
    fid_raw = np.stack([r.fidelity_raw for r in run.repetitions])
    fid_adj = np.stack([r.fidelity_adjusted for r in run.repetitions])
    meta = _meta("verify", cfg, repetitions=run.statistics.n_repetitions,
                 fidelity_raw_min=float(fid_raw.min()), fidelity_raw_mean=float(fid_raw.mean()),
                 fidelity_adjusted_min=float(fid_adj.min()),
                 fidelity_adjusted_mean=float(fid_adj.mean()))
    _write(render(rows, REPORT_HEADER, cfg.output_format, meta), cfg.output_path)
    return EXIT_OK


def trajectory_rows(p: Protocol, g: GibbsSpec, shape: PulseShape) -> list[dict[str, Any]]:
    """Bloch coordinates per checkpoint for the |0> and |1> branches and their Gibbs mixture."""
    rows = []
    basis = (DensityMatrix.pure([1, 0]), DensityMatrix.pure([0, 1]))
    for direction, proto, which in (("forward", p, "start"),
                                    ("backward", reverse_protocol(p), "end")):
        weights = g.populations(which)
        branches = [evolve_trajectory(proto, s, shape) for s in basis]
        for m, t in enumerate(branches[0].times):
            states = [b[m].state for b in branches]
            mixed = DensityMatrix(weights[0] * states[0].matrix + weights[1] * states[1].matrix)
            for name, st in (("0", states[0]), ("1", states[1]), ("gibbs", mixed)):
                x, y, z = st.bloch()
                rows.append({"protocol": p.label, "direction": direction, "branch": name,
                             "checkpoint": m, "t_ns": float(t), "x": x, "y": y, "z": z})
    return rows


def cmd_trajectory(cfg: RunConfig) -> int:
    p = build_protocol(cfg)
    g = GibbsSpec(1.0, cfg.beta_omega_start, cfg.beta_omega_end)
    rows = trajectory_rows(p, g, PulseShape(cfg.envelope))
    _write(render(rows, TRAJECTORY_HEADER, cfg.output_format, _meta("trajectory", cfg)),
           cfg.output_path)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qdiss", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"qdiss {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_text in (("verify", "check both dissipation relations and write a report"),
                            ("trajectory", "write forward/backward Bloch trajectories")):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", type=Path, help="flat key = value config file")
        cmd.add_argument("--protocol", choices=["xy_quench", "rotating_axis", "custom"])
        cmd.add_argument("--mode", choices=["ideal", "shots"])
        cmd.add_argument("--seed", type=int)
        cmd.add_argument("--out", help="output path ('-' for stdout)")
        cmd.add_argument("--format", choices=["csv", "json"])
    return parser


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        values: dict[str, str] = {}
        if args.config is not None:
            try:
                text = args.config.read_text(encoding="utf-8")
            except OSError as exc:
                raise ConfigError(f"cannot read config: {exc}") from None
            values.update(read_config_text(text, str(args.config)))
        for flag, key in (("protocol", "protocol.kind"), ("mode", "mode"), ("seed", "shots.seed"),
                          ("out", "output.path"), ("format", "output.format")):
            if getattr(args, flag) is not None:
                values[key] = str(getattr(args, flag))
        cfg = build_config(values)
    except ConfigError as exc:
        print(f"qdiss: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.command == "verify":
            return cmd_verify(cfg)
        return cmd_trajectory(cfg)
    except SupportMismatchError as exc:
        print(f"qdiss: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
