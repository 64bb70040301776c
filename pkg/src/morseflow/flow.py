"""Gradient-flow trajectories and their limit points.

Integration uses the Dormand-Prince embedded Runge-Kutta pair: a 5th order
solution is propagated and the difference to the embedded 4th order one
controls the step size.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .field import ScalarField

STEP_TOL = 1e-9
INITIAL_STEP = 1e-3
MIN_STEP = 1e-14
MIN_STEP_TOL = 10 * np.finfo(float).eps
CAPTURE_RADIUS = 1e-4
CAPTURE_GRAD = 1e-6
OMEGA_HORIZON = 200.0

ESCAPED = "escaped"
UNRESOLVED = "unresolved"

# Dormand-Prince 5(4) tableau
_A = np.array([
    [0, 0, 0, 0, 0, 0],
    [1 / 5, 0, 0, 0, 0, 0],
    [3 / 40, 9 / 40, 0, 0, 0, 0],
    [44 / 45, -56 / 15, 32 / 9, 0, 0, 0],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0, 0],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656, 0],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
])
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


@dataclass
class Trajectory:
    """Samples of one flow line of ``x' = sign * grad f``.

    ``terminal`` is ``"converged"``, ``"escaped"`` or ``"timed_out"``;
    ``target`` holds the captured critical point's position in the list
    passed to :func:`integrate` when converged.
    """

    sign: int
    start: tuple[float, ...]
    times: np.ndarray
    points: np.ndarray
    terminal: str
    target: int | None = None
    diagnostic: str = ""
    provenance: dict = field(default_factory=dict)

    @property
    def end(self) -> np.ndarray:
        return self.points[-1]

    @property
    def terminal_state(self) -> str:
        if self.terminal == "converged":
            return f"converged({self.target})"
        return self.terminal

    def max_norm(self) -> float:
        return float(np.max(np.linalg.norm(self.points, axis=-1)))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        dim = self.points.shape[1]
        w.writerow(["t"] + [f"x{i}" for i in range(1, dim + 1)])
        for t, x in zip(self.times, self.points):
            w.writerow([repr(float(t))] + [repr(float(v)) for v in x])
        buf.write(f"# terminal={self.terminal_state}\n")
        return buf.getvalue()

    def write_csv(self, path) -> None:
        Path(path).write_text(self.to_csv(), encoding="utf-8")


def read_csv(path) -> tuple[np.ndarray, np.ndarray, str]:
    """Parse a trajectory dump back into ``(times, points, terminal_state)``."""
    rows, terminal = [], ""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        for line in fh:
            if line.startswith("# terminal="):
                terminal = line.strip().split("=", 1)[1]
            elif line.strip():
                rows.append([float(v) for v in line.split(",")])
    if not header.startswith("t,"):
        raise ValueError("not a trajectory CSV")
    data = np.array(rows)
    return data[:, 0], data[:, 1:], terminal


def integrate(F: ScalarField, x0, sign: int = -1, horizon: float = OMEGA_HORIZON, bailout: float = np.inf,
              crit=(), step_tol: float = STEP_TOL, capture_radius: float = CAPTURE_RADIUS,
              initial_step: float = INITIAL_STEP) -> Trajectory:
    """Integrate ``x' = sign * grad f(x)`` from ``x0`` with adaptive steps.

    Stops when the state is within ``capture_radius`` of a critical point
    from ``crit`` while |grad f| < 1e-6 (converged), when |x| exceeds
    ``bailout`` (escaped), or at ``t = horizon`` (timed out).  A step size
    below 1e-14 also ends the run as timed out, with a diagnostic.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if not step_tol >= MIN_STEP_TOL:
        raise ValueError(f"step_tol must be at least {MIN_STEP_TOL:.3g} (10 machine epsilons)")
    x = np.array(x0, dtype=float)
    if not np.linalg.norm(x) < bailout:
        raise ValueError("bailout must exceed |x0|")
    crit_x = np.array([c.location if hasattr(c, "location") else c for c in crit], dtype=float).reshape(-1, F.dim)

    grad = F.gradient_at

    def rhs(y):
        return sign * grad(y)

    times, points = [0.0], [x.copy()]
    t, h = 0.0, initial_step
    K = np.empty((7, F.dim))
    K[0] = rhs(x)
    terminal, target, diag = "timed_out", None, ""

    def norm(v):
        return math.sqrt(float(v @ v))

    def captured(y, g):
        if not len(crit_x) or norm(g) >= CAPTURE_GRAD:
            return None
        d = np.sqrt(np.sum((crit_x - y) ** 2, axis=-1))
        j = int(np.argmin(d))
        return j if d[j] < capture_radius else None

    hit = captured(x, K[0])
    if hit is not None:
        terminal, target = "converged", hit
    with np.errstate(over="ignore", invalid="ignore"):
        while terminal == "timed_out" and t < horizon:
            h = min(h, horizon - t)
            for s in range(1, 7):
                y = x + h * (_A[s, :s] @ K[:s])
                K[s] = rhs(y)
            x_new = y  # the last stage point is the 5th order solution
            ok = np.isfinite(x_new).all() and np.isfinite(K[6]).all()
            if ok:
                err = h * (_E @ K)
                scale = step_tol * (1.0 + np.maximum(np.abs(x), np.abs(x_new)))
                en = math.sqrt(float(np.mean((err / scale) ** 2)))
            else:
                en = math.inf
                if norm(x) + h * norm(K[0]) > bailout:
                    terminal = ESCAPED
                    break
            if en <= 1.0:
                t += h
                x = x_new
                K[0] = K[6]
                times.append(t)
                points.append(x)
                if norm(x) > bailout:
                    terminal = ESCAPED
                    break
                hit = captured(x, K[0])
                if hit is not None:
                    terminal, target = "converged", hit
                    break
                h *= 5.0 if en == 0 else min(5.0, 0.9 * en ** -0.2)
            else:
                h *= max(0.2, 0.9 * en ** -0.2) if math.isfinite(en) else 0.2
                if h < MIN_STEP:
                    diag = f"step underflow at t={t!r}"
                    break
    return Trajectory(sign, tuple(float(v) for v in np.asarray(x0, dtype=float)), np.array(times),
                      np.array(points), terminal, target, diag,
                      {"step_tol": step_tol, "capture_radius": capture_radius, "horizon": horizon,
                       "bailout": float(bailout)})


def omega_limit(F: ScalarField, x0, crit, R: float | None = None, horizon: float = OMEGA_HORIZON,
                bailout: float | None = None, sign: int = -1, **kwargs):
    """Limit of the flow line through ``x0`` under ``-grad f``.

    Returns the position of the captured point in ``crit``, or
    :data:`ESCAPED` / :data:`UNRESOLVED`.  ``sign=+1`` gives the alpha limit.
    The default bailout is ``4R``.
    """
    if not len(crit):
        raise ValueError("crit must be non-empty")
    if bailout is None:
        if R is None:
            R = max(1.0, float(np.linalg.norm(x0)), *(float(np.linalg.norm(c.location)) for c in crit))
        bailout = 4.0 * R
    traj = integrate(F, x0, sign, horizon=horizon, bailout=bailout, crit=crit, **kwargs)
    if traj.terminal == "converged":
        return traj.target
    if traj.terminal == ESCAPED:
        return ESCAPED
    return UNRESOLVED
