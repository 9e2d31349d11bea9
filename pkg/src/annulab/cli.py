"""``annulab`` command line: solve, sweep, convergence, verify, oracle.

Exit codes: 0 success, 1 failed verification, 2 invalid configuration,
3 solver failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import params
from .convergence import CONVERGENCE_COLUMNS, convergence_study
from .errors import AnnulabError
from .geometry import AnnulusSpec, SpaceForm
from .mesh import MAX_LEVEL
from .oracle import radial_J, radial_lambda1, radial_torsion
from .problems import Discretization, solve_eigen, solve_torsion
from .shape import SWEEP_COLUMNS, check_sweep_grid, sweep

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2, 3
COMMANDS = ("solve", "sweep", "convergence", "verify", "oracle")
CONFIG_KEYS = ("geom", "r0", "r1", "t", "t_grid", "L", "delta", "out")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    geom: SpaceForm | None
    r0: float | None
    r1: float | None
    t_values: tuple[float, ...]
    L: int
    delta: float
    out: str | None


# --------------------------------------------------------------------------
# parsing and validation


def parse_t_grid(text: str) -> tuple[float, ...]:
    parts = str(text).split(":")
    if len(parts) != 3:
        raise ConfigError(f"--t-grid expects start:stop:step, got {text!r}")
    try:
        a, b, s = (float(p) for p in parts)
    except ValueError:
        raise ConfigError(f"--t-grid has a non-numeric field: {text!r}") from None
    if not s > 0 or b < a:
        raise ConfigError(f"--t-grid needs step > 0 and stop >= start, got {text!r}")
    return params.t_values(a, b, s)


def _load_config_file(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    cfg = {}
    for k, v in raw.items():
        key = k.replace("-", "_")
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown config key {k!r} in {path}")
        cfg[key] = v
    return cfg


def _number(cfg: dict, key: str, kind=float):
    v = cfg.get(key)
    if v is None:
        return None
    try:
        x = kind(v)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be a number, got {v!r}") from None
    if kind is float and not math.isfinite(x):
        raise ConfigError(f"{key} must be finite, got {v!r}")
    return x


def build_config(ns: argparse.Namespace) -> RunConfig:
    cfg = _load_config_file(ns.config) if ns.config else {}
    for key in CONFIG_KEYS:
        val = getattr(ns, key)
        if val is not None:
            cfg[key] = val
    cmd = ns.command

    geom = None
    if cfg.get("geom") is not None:
        try:
            geom = SpaceForm.from_tag(str(cfg["geom"]))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    r0, r1 = _number(cfg, "r0"), _number(cfg, "r1")
    L = _number(cfg, "L", int)
    delta = _number(cfg, "delta")
    delta = params.DELTA if delta is None else delta

    if cmd != "verify":
        missing = [k for k, v in (("geom", geom), ("r0", r0), ("r1", r1)) if v is None]
        if missing:
            raise ConfigError("missing required setting(s): " + ", ".join("--" + m for m in missing))
        AnnulusSpec(geom, r0, r1, 0.0)  # GeometryError is a ValueError

    if cfg.get("t") is not None and cfg.get("t_grid") is not None:
        raise ConfigError("give either --t or --t-grid, not both")
    if cfg.get("t_grid") is not None:
        ts = parse_t_grid(cfg["t_grid"])
    elif cfg.get("t") is not None:
        ts = (_number(cfg, "t"),)
    else:
        ts = (0.0,) if cmd == "solve" else params.t_values(*params.T_GRID)
    if cmd == "solve" and len(ts) != 1:
        raise ConfigError("solve takes a single --t")

    if L is None:
        L = max(params.CONVERGENCE_LEVELS) if cmd == "convergence" else params.LEVEL
    lo = min(params.CONVERGENCE_LEVELS) + 1 if cmd == "convergence" else 0
    if not lo <= L <= MAX_LEVEL:
        raise ConfigError(f"--L must lie in [{lo}, {MAX_LEVEL}] for {cmd}, got {L}")

    if cmd == "solve":
        AnnulusSpec(geom, r0, r1, ts[0])
    elif cmd == "sweep":
        check_sweep_grid(r0, r1, ts, delta)
        for t in ts:
            AnnulusSpec(geom, r0, r1, t)
    return RunConfig(cmd, geom, r0, r1, tuple(ts), int(L), float(delta), cfg.get("out"))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--geom", choices=[g.tag for g in SpaceForm])
    common.add_argument("--r0", type=float)
    common.add_argument("--r1", type=float)
    tgroup = common.add_mutually_exclusive_group()
    tgroup.add_argument("--t", type=float)
    tgroup.add_argument("--t-grid", dest="t_grid", metavar="A:B:S")
    common.add_argument("--L", type=int)
    common.add_argument("--delta", type=float)
    common.add_argument("--out", metavar="PATH")
    common.add_argument("--config", metavar="PATH", help="JSON file with the same keys; flags win")

    p = argparse.ArgumentParser(prog="annulab", description="Torsion and eigenvalue shape study on annuli in space forms.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("solve", parents=[common], help="one torsion + eigen solve, JSON report")
    sub.add_parser("sweep", parents=[common], help="offset sweep with shape derivatives, CSV")
    sub.add_parser("convergence", parents=[common], help="oracle errors for L = 2..L, CSV")
    sub.add_parser("verify", parents=[common], help="full invariant suite")
    sub.add_parser("oracle", parents=[common], help="radial reference values, JSON")
    return p


# --------------------------------------------------------------------------
# commands


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return "%.12g" % x


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        sys.stdout.flush()


def cmd_solve(cfg: RunConfig) -> dict:
    spec = AnnulusSpec(cfg.geom, cfg.r0, cfg.r1, cfg.t_values[0])
    d = Discretization.build(spec, cfg.L)
    tor = solve_torsion(spec, cfg.L, d)
    eig = solve_eigen(spec, cfg.L, d, start=tor.y)
    return {
        "geometry": spec.geom.tag,
        "r0": spec.r0,
        "r1": spec.r1,
        "t": spec.t,
        "L": cfg.L,
        "J": tor.J,
        "lambda1": eig.lambda1,
        "energy_identity_residual": abs(tor.J - tor.energy) / abs(tor.J),
        "mesh_stats": d.mesh.stats(),
    }


def cmd_sweep(cfg: RunConfig) -> str:
    def progress(row):
        print(f"t={row.t:g} J={row.J:.10g} lambda1={row.lambda1:.10g}", file=sys.stderr, flush=True)

    rows = sweep(cfg.geom, cfg.r0, cfg.r1, cfg.t_values, cfg.L, cfg.delta, progress=progress)
    return _csv_text(SWEEP_COLUMNS, (r.csv_values() for r in rows))


def cmd_convergence(cfg: RunConfig) -> str:
    levels = range(min(params.CONVERGENCE_LEVELS), cfg.L + 1)
    st = convergence_study(cfg.geom, cfg.r0, cfg.r1, levels)
    orders = st.orders()
    last = ["order"] + [orders.get(c) for c in CONVERGENCE_COLUMNS[1:]]
    return _csv_text(CONVERGENCE_COLUMNS, [r.csv_values() for r in st.rows] + [last])


def cmd_oracle(cfg: RunConfig, samples: int = 5) -> dict:
    rt = radial_torsion(cfg.geom, cfg.r0, cfg.r1)
    r = np.linspace(cfg.r0, cfg.r1, samples)
    return {
        "geometry": cfg.geom.tag,
        "r0": cfg.r0,
        "r1": cfg.r1,
        "C": rt.C,
        "D": rt.D,
        "J": radial_J(cfg.geom, cfg.r0, cfg.r1),
        "lambda1": radial_lambda1(cfg.geom, cfg.r0, cfg.r1),
        "u_max": rt.max_value(),
        "u_samples": [{"r": float(a), "u": float(b)} for a, b in zip(r, rt.u(r))],
    }


def cmd_verify(cfg: RunConfig) -> int:
    from .verify import run_verify

    ok, _ = run_verify(geoms=[cfg.geom] if cfg.geom else None)
    return EXIT_OK if ok else EXIT_VERIFY


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = build_config(ns)
    except ValueError as exc:
        print(f"annulab {ns.command}: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if cfg.command == "verify":
            return cmd_verify(cfg)
        if cfg.command in ("solve", "oracle"):
            rep = cmd_solve(cfg) if cfg.command == "solve" else cmd_oracle(cfg)
            _emit(json.dumps(rep, indent=2) + "\n", cfg.out)
        elif cfg.command == "sweep":
            _emit(cmd_sweep(cfg), cfg.out)
        else:
            _emit(cmd_convergence(cfg), cfg.out)
    except (AnnulabError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"annulab {cfg.command}: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"annulab {cfg.command}: cannot write output: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
