"""Command line front end: ``morseflow <command> FIELD.json ...``.

Exit codes: 0 success (a compare verdict is data, not an error), 1 I/O or
usage error, 2 degenerate critical point, 3 no r1 found, 4 isolation
violation, 5 boundary does not square to zero, 6 unresolved orbit,
7 non-transverse suspicion.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__, critical, flow, isolate, pipeline
from .errors import MorseflowError
from .field import DEFAULT_SCREEN_RADII, DEFAULT_SEED, load_field, properness_screen

COMMANDS = ("critical-points", "radius", "morse", "compare", "trace", "screen")

# RunConfig key -> (flag, type, help)
_OVERRIDES = {
    "newton_tol": ("--tol-newton", float, f"Newton residual tolerance (default {critical.NEWTON_TOL:g})"),
    "degeneracy_tol": ("--tol-degeneracy", float,
                       f"smallest admissible |Hessian eigenvalue| (default {critical.DEGENERACY_TOL:g})"),
    "step_tol": ("--tol-step", float, f"integrator local error tolerance (default {flow.STEP_TOL:g})"),
    "capture_radius": ("--capture", float, f"capture radius around critical points (default {flow.CAPTURE_RADIUS:g})"),
    "resolution": ("--resolution", int, f"shooting samples per circle (default {pipeline.morse.RESOLUTION})"),
    "grid_density": ("--grid-density", int, "Newton seeds per axis (default: odd number near 20000**(1/dim))"),
    "samples_per_sphere": ("--sphere-samples", int, "random directions per sphere (default 64*dim^2)"),
    "seed": ("--seed", int, f"sampling seed (default {DEFAULT_SEED})"),
}


@dataclass
class RunConfig:
    command: str
    inputs: list[str]
    overrides: dict[str, Any] = field(default_factory=dict)
    out: str | None = None
    format: str = "json"
    x0: list[float] | None = None
    sign: int = -1

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        unknown = set(self.overrides) - set(_OVERRIDES)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        for key, value in self.overrides.items():
            if key != "seed" and not value > 0:
                raise ValueError(f"{key} must be positive, got {value}")
        if self.format not in ("json", "text"):
            raise ValueError(f"unknown format {self.format!r}")

    @classmethod
    def from_mapping(cls, doc: dict) -> RunConfig:
        """Build from a plain dict (e.g. a JSON config file); unknown keys are rejected."""
        names = {f.name for f in dataclasses.fields(cls)}
        extra = set(doc) - names - set(_OVERRIDES)
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        base = {k: v for k, v in doc.items() if k in names}
        overrides = dict(base.pop("overrides", {}))
        overrides.update({k: v for k, v in doc.items() if k in _OVERRIDES})
        return cls(overrides=overrides, **base)

    def settings(self) -> pipeline.Settings:
        return pipeline.Settings(**self.overrides)


def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _json(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _crit_table(points) -> str:
    lines = [f"{'#':>3}  {'location':<40} {'index':>5} {'det':>4} {'residual':>10}"]
    for i, c in enumerate(points):
        loc = "(" + ", ".join(f"{v:.10g}" for v in c.location) + ")"
        lines.append(f"{i:>3}  {loc:<40} {c.index:>5} {c.hess_det_sign:>+4d} {c.residual:>10.2e}")
    return "\n".join(lines)


def cmd_critical_points(cfg: RunConfig) -> tuple[dict, str]:
    F, _ = load_field(cfg.inputs[0])
    s = cfg.settings()
    ball = pipeline.compute_ball(F, s)
    crit = pipeline.critical_points(F, ball.R, s)
    deg = critical.brouwer_degree(crit)
    doc = {"label": F.label, "dim": F.dim, "expr": F.source, "R": ball.R, "ball": ball.to_dict(),
           "critical_points": [c.to_dict() for c in crit], "degree": deg.degree,
           "provenance": {"settings": s.resolved(F.dim), "version": __version__}}
    text = f"{F.label}: {len(crit)} critical point(s) in B({ball.R:g}), degree {deg.degree}\n{_crit_table(crit)}\n"
    return doc, text


def cmd_radius(cfg: RunConfig) -> tuple[dict, str]:
    s = cfg.settings()
    fields = [load_field(p)[0] for p in cfg.inputs]
    target = fields[0] if len(fields) == 1 else pipeline.FieldFamily(*fields)
    ball = pipeline.compute_ball(target, s)
    reports = [pipeline.validate(F, ball, s) for F in fields]
    doc = reports[0].to_dict()
    doc["verdict"] = "pass" if all(r.verdict == "pass" for r in reports) else "fail"
    doc["escaping_fraction"] = min(r.escaping_fraction for r in reports)
    doc["labels"] = [F.label for F in fields]
    doc["provenance"]["settings"] = s.resolved(fields[0].dim)
    text = (f"r1 = {ball.r1:g}, r2 = {ball.r2:g}, R = 2(r1 + r2) = {ball.R:g}\n"
            f"isolation check: {doc['verdict']} (escaping fraction {doc['escaping_fraction']:g})\n")
    return doc, text


def _morse_text(rep) -> str:
    out = [f"{rep.label}: dim {rep.dim}, R = {rep.R:g}", _crit_table(rep.critical_points)]
    for k, m in rep.complex.boundary.items():
        if m.size:
            out.append(f"d_{k} (GF(2)):\n" + "\n".join("  " + " ".join(str(int(v)) for v in row) for row in m))
    out.append(f"dim H^q(f, B(R); Z/2) = {rep.betti}")
    out.append(f"Euler characteristic = {rep.euler}, Brouwer degree = {rep.degree}")
    return "\n".join(out) + "\n"


def cmd_morse(cfg: RunConfig) -> tuple[dict, str]:
    F, _ = load_field(cfg.inputs[0])
    rep = pipeline.analyze(F, cfg.settings())
    doc = rep.to_dict()
    doc["provenance"]["version"] = __version__
    return doc, _morse_text(rep)


def cmd_compare(cfg: RunConfig) -> tuple[dict, str]:
    Fa, _ = load_field(cfg.inputs[0])
    Fb, _ = load_field(cfg.inputs[1])
    cmp = pipeline.compare(Fa, Fb, cfg.settings())
    doc = cmp.to_dict()
    doc["version"] = __version__
    v = cmp.verdict
    text = (_morse_text(cmp.a) + "\n" + _morse_text(cmp.b) + "\n"
            f"ball: {cmp.mode}, R = {cmp.a.R:g}\n"
            f"proper_homotopic = {str(v.proper_homotopic).lower()}\n"
            f"gradient_obstruction = {str(v.gradient_obstruction).lower()}\n"
            f"conclusion: {v.conclusion}\n{v.narrative}\n")
    return doc, text


def cmd_trace(cfg: RunConfig) -> tuple[str, str]:
    F, _ = load_field(cfg.inputs[0])
    if cfg.x0 is None or len(cfg.x0) != F.dim:
        raise ValueError(f"--x0 needs {F.dim} comma-separated coordinates")
    s = cfg.settings()
    ball = pipeline.compute_ball(F, s)
    crit = pipeline.critical_points(F, ball.R, s)
    bailout = max(4.0 * ball.R, 2.0 * float(np.linalg.norm(cfg.x0)))
    tr = flow.integrate(F, cfg.x0, cfg.sign, bailout=bailout, crit=crit, **s.flow_kwargs)
    return tr.to_csv(), f"{F.label}: {tr.terminal_state} after t = {tr.times[-1]:g} ({len(tr.times)} samples)\n"


def cmd_screen(cfg: RunConfig, radii=DEFAULT_SCREEN_RADII) -> tuple[dict, str]:
    F, _ = load_field(cfg.inputs[0])
    s = cfg.settings()
    rep = properness_screen(F, radii, s.samples_per_sphere, s.seed)
    doc = rep.to_dict()
    doc["label"] = F.label
    doc["provenance"]["settings"] = s.resolved(F.dim)
    rows = "\n".join(f"  r = {r:<8g} min |grad f| = {m:.6g}" for r, m in zip(rep.radii, rep.minima))
    return doc, f"{F.label}: properness screen {rep.verdict}\n{rows}\n"


_HANDLERS = {
    "critical-points": cmd_critical_points,
    "radius": cmd_radius,
    "morse": cmd_morse,
    "compare": cmd_compare,
    "trace": cmd_trace,
    "screen": cmd_screen,
}

_ARITY = {"critical-points": (1, 1), "radius": (1, 2), "morse": (1, 1), "compare": (2, 2),
          "trace": (1, 1), "screen": (1, 1)}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="morseflow",
        description="Degree and local Morse cohomology of proper gradient vector fields.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__.split("\n\n", 1)[1],
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    for key, (flag, typ, help_) in _OVERRIDES.items():
        common.add_argument(flag, dest=key, type=typ, default=None, help=help_)
    common.add_argument("--config", type=Path, help="JSON file of tolerance overrides (unknown keys rejected)")
    common.add_argument("--out", type=Path, help="directory for report files (default: stdout only)")
    common.add_argument("--format", choices=("json", "text"), default="json", help="stdout format (default json)")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("critical-points", parents=[common], help="isolating ball, critical points and degree") \
        .add_argument("fields", nargs=1, metavar="FIELD")
    sub.add_parser("radius", parents=[common], help="r1, r2, R and the isolation check (two fields: linear family)") \
        .add_argument("fields", nargs="+", metavar="FIELD")
    sub.add_parser("morse", parents=[common], help="local Morse complex, Betti numbers, degree") \
        .add_argument("fields", nargs=1, metavar="FIELD")
    sub.add_parser("compare", parents=[common], help="proper-homotopy and gradient-obstruction verdict") \
        .add_argument("fields", nargs=2, metavar="FIELD")
    tr = sub.add_parser("trace", parents=[common], help="dump one flow line as CSV")
    tr.add_argument("fields", nargs=1, metavar="FIELD")
    tr.add_argument("--x0", required=True, help="start point, comma separated")
    tr.add_argument("--sign", type=int, choices=(-1, 1), default=-1, help="flow of sign*grad f (default -1)")
    sc = sub.add_parser("screen", parents=[common], help="heuristic properness screen")
    sc.add_argument("fields", nargs=1, metavar="FIELD")
    sc.add_argument("--radii", help="comma separated ascending radii (default 1,2,...,1024)")
    return parser


def config_from_args(args) -> RunConfig:
    overrides = {}
    if args.config is not None:
        doc = json.loads(args.config.read_text(encoding="utf-8"))
        if not isinstance(doc, dict):
            raise ValueError("config file must hold a JSON object")
        unknown = set(doc) - set(_OVERRIDES)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        overrides.update(doc)
    overrides.update({k: getattr(args, k) for k in _OVERRIDES if getattr(args, k) is not None})
    lo, hi = _ARITY[args.command]
    if not lo <= len(args.fields) <= hi:
        raise ValueError(f"{args.command} takes {lo}..{hi} field files")
    x0 = [float(v) for v in args.x0.split(",")] if getattr(args, "x0", None) else None
    return RunConfig(args.command, [str(p) for p in args.fields], overrides,
                     str(args.out) if args.out else None, args.format, x0, getattr(args, "sign", -1))


def run(cfg: RunConfig, radii=None) -> tuple[str, str]:
    """Execute a command; returns (machine output, text output) and writes files under ``cfg.out``."""
    handler = _HANDLERS[cfg.command]
    result, text = handler(cfg, radii) if cfg.command == "screen" and radii else handler(cfg)
    machine = result if isinstance(result, str) else _json(result)
    if cfg.out:
        stem = Path(cfg.inputs[0]).stem
        if cfg.command == "compare":
            stem = f"{stem}__{Path(cfg.inputs[1]).stem}"
        out = Path(cfg.out)
        ext = "csv" if cfg.command == "trace" else "json"
        _write_atomic(out / f"{stem}.{cfg.command}.{ext}", machine)
        _write_atomic(out / f"{stem}.{cfg.command}.txt", text)
    return machine, text


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        radii = [float(r) for r in args.radii.split(",")] if getattr(args, "radii", None) else None
        machine, text = run(cfg, radii)
    except MorseflowError as exc:
        print(f"morseflow: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, ValueError) as exc:
        print(f"morseflow: error: {exc}", file=sys.stderr)
        return 1
    sys.stdout.write(machine if cfg.format == "json" or cfg.command == "trace" else text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
