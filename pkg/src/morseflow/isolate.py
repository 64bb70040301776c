"""Constructive isolating balls for (families of) proper gradient flows.

A radius ``r1`` is found such that every sampled point outside B(r1) has
|grad f_lam| > 1, then ``r2`` bounds |f_lam| on B(r1), and the ball of radius
``R = 2 (r1 + r2)`` contains every bounded orbit.  Sampling cannot prove
these bounds, so :func:`validate_isolation` re-checks the result by
integrating the flow from the ball's boundary.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .critical import CriticalPoint, find_critical_points
from .errors import IsolationViolation, R1NotFound
from .field import DEFAULT_SEED, FieldFamily, ScalarField, default_samples_per_sphere, sphere_directions
from .flow import ESCAPED, integrate

R1_EXPONENTS = range(-3, 21)
R1_SHELLS = (1.0, 1.5, 2.0, 4.0, 8.0)
R2_SHELLS = 16
R2_INFLATION = 1.1
LAMBDA_GRID_SIZE = 11
VALIDATION_HORIZON = 50.0
PROBE_COUNT = 16
# relative slack when comparing |grad f| with 1 on the inner shell
_BOUNDARY_SLACK = 1e-12


@dataclass(frozen=True)
class IsolatingBall:
    r1: float
    r2: float
    R: float
    lambda_grid: tuple[float, ...] = (0.0,)
    provenance: dict = field(default_factory=dict, compare=False, hash=False)

    def to_dict(self) -> dict:
        return {"r1": self.r1, "r2": self.r2, "R": self.R, "lambda_grid": list(self.lambda_grid),
                "provenance": dict(self.provenance)}


def _members(obj, lambda_grid_size: int) -> tuple[list[float], list[ScalarField]]:
    if isinstance(obj, ScalarField):
        return [0.0], [obj]
    if isinstance(obj, FieldFamily):
        grid = obj.lambda_grid(lambda_grid_size)
        return grid, [obj.at(lam) for lam in grid]
    raise TypeError(f"expected ScalarField or FieldFamily, got {type(obj).__name__}")


def _sampling(dim: int, samples_per_sphere: int | None, seed: int):
    if samples_per_sphere is None:
        samples_per_sphere = default_samples_per_sphere(dim)
    return sphere_directions(dim, samples_per_sphere, seed), samples_per_sphere


def compute_r1(family, lambda_grid_size: int = LAMBDA_GRID_SIZE, samples_per_sphere: int | None = None,
               seed: int = DEFAULT_SEED) -> float:
    """Smallest ``2**k`` (k = -3..20) bounding the preimage of the unit ball.

    A candidate ``r`` passes when on the spheres of radius ``r*s``,
    s in (1, 1.5, 2, 4, 8), every sampled point has |grad f_lam| > 1 for all
    lam on the grid.  The inner sphere s = 1 lies in B(r) itself, so there
    |grad f_lam| >= 1 is enough.

    Raises
    ------
    R1NotFound
        If no grid radius up to 2**20 passes.
    """
    grid, fields = _members(family, lambda_grid_size)
    dirs, _ = _sampling(fields[0].dim, samples_per_sphere, seed)
    for k in R1_EXPONENTS:
        r = 2.0**k
        if all(_shells_pass(F, dirs, r) for F in fields):
            return r
    bad = [lam for lam, F in zip(grid, fields) if not _shells_pass(F, dirs, 2.0 ** R1_EXPONENTS[-1])]
    raise R1NotFound(f"no radius up to 2^{R1_EXPONENTS[-1]} bounds the preimage of B(1); "
                     f"failing lambda values: {bad}")


def _shells_pass(F: ScalarField, dirs: np.ndarray, r: float) -> bool:
    for s in R1_SHELLS:
        norms = np.linalg.norm(F.gradient(r * s * dirs), axis=-1)
        if not np.all(np.isfinite(norms)):
            return False
        if s == 1.0:
            if np.min(norms) < 1.0 - _BOUNDARY_SLACK:
                return False
        elif np.min(norms) <= 1.0:
            return False
    return True


def compute_r2(family, r1: float, lambda_grid_size: int = LAMBDA_GRID_SIZE, samples_per_sphere: int | None = None,
               seed: int = DEFAULT_SEED, inflation: float = R2_INFLATION) -> float:
    """Inflated maximum of |f_lam| over shells r1*k/16, k = 0..16, of B(r1)."""
    _, fields = _members(family, lambda_grid_size)
    dirs, _ = _sampling(fields[0].dim, samples_per_sphere, seed)
    pts = np.concatenate([np.zeros((1, fields[0].dim))]
                         + [r1 * k / R2_SHELLS * dirs for k in range(1, R2_SHELLS + 1)])
    peak = max(float(np.max(np.abs(F.value(pts)))) for F in fields)
    return inflation * peak


def assemble_ball(r1: float, r2: float, lambda_grid=(0.0,), provenance=None) -> IsolatingBall:
    if r1 <= 0 or r2 < 0:
        raise ValueError("need r1 > 0 and r2 >= 0")
    return IsolatingBall(float(r1), float(r2), 2.0 * (r1 + r2), tuple(float(v) for v in lambda_grid),
                         dict(provenance or {}))


def isolating_ball(family, lambda_grid_size: int = LAMBDA_GRID_SIZE, samples_per_sphere: int | None = None,
                   seed: int = DEFAULT_SEED) -> IsolatingBall:
    """compute_r1, compute_r2 and assemble_ball in one call."""
    grid, fields = _members(family, lambda_grid_size)
    _, spp = _sampling(fields[0].dim, samples_per_sphere, seed)
    r1 = compute_r1(family, lambda_grid_size, spp, seed)
    r2 = compute_r2(family, r1, lambda_grid_size, spp, seed)
    prov = {"seed": seed, "samples_per_sphere": spp, "r1_shells": list(R1_SHELLS),
            "r2_shells": R2_SHELLS, "r2_inflation": R2_INFLATION}
    return assemble_ball(r1, r2, grid, prov)


@dataclass
class ValidationReport:
    ball: IsolatingBall
    verdict: str
    escaping_fraction: float
    max_boundary_dwell: float
    probe_count: int
    bounded_orbits: list = field(default_factory=list)
    offending: list = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        prov = dict(self.ball.provenance)
        prov.update(self.provenance)
        return {"r1": self.ball.r1, "r2": self.ball.r2, "R": self.ball.R,
                "lambda_grid": list(self.ball.lambda_grid), "verdict": self.verdict,
                "escaping_fraction": self.escaping_fraction, "max_boundary_dwell": self.max_boundary_dwell,
                "provenance": prov}


def _unstable_shots(F: ScalarField, p: CriticalPoint, count: int, delta: float = 1e-3) -> list[np.ndarray]:
    w, v = np.linalg.eigh(F.hessian(p.x))
    basis = v[:, w < 0]
    k = basis.shape[1]
    if k == 0:
        return []
    if k == 1:
        dirs = np.array([[1.0], [-1.0]])
    else:
        dirs = sphere_directions(k, count, seed=0)
    return [p.x + delta * basis @ d for d in dirs]


def bounded_orbit_set(F: ScalarField, crit, bailout: float, count: int = 8, **flow_kwargs) -> list[np.ndarray]:
    """Critical points plus the connecting orbits leaving them under -grad f.

    Each entry is an array of points; a rest point is a one-row array.
    """
    orbits = [np.atleast_2d(c.x) for c in crit]
    for c in crit:
        for x0 in _unstable_shots(F, c, count):
            tr = integrate(F, x0, -1, bailout=bailout, crit=crit, **flow_kwargs)
            if tr.terminal == "converged":
                orbits.append(np.vstack([c.x, tr.points]))
    return orbits


def validate_isolation(F: ScalarField, ball: IsolatingBall, probe_count: int = PROBE_COUNT, crit=None,
                       seed: int = DEFAULT_SEED, horizon: float = VALIDATION_HORIZON, strict: bool = True,
                       grid_density: int | None = None, **flow_kwargs) -> ValidationReport:
    """A-posteriori check that B(R) isolates the flow of grad f.

    ``probe_count`` random points on each of the spheres |x| = R and
    |x| = 2R are integrated forward and backward for time ``horizon``; each
    must leave B(8R) in at least one direction.  In addition every bounded
    orbit seeded at a critical point (``crit``; by default those found in
    B(2R)) must stay inside B(0.99 R).

    Raises
    ------
    IsolationViolation
        When ``strict`` and either test fails; the report is attached.
    """
    R = ball.R
    bailout = 8.0 * R
    if crit is None:
        crit = find_critical_points(F, 2.0 * R, grid_density)
    dirs = sphere_directions(F.dim, probe_count, seed)[:probe_count]
    probes = np.concatenate([R * dirs, 2.0 * R * dirs])

    escaped, dwell, offending = 0, 0.0, []
    for x0 in probes:
        times = []
        for sign in (1, -1):
            tr = integrate(F, x0, sign, horizon=horizon, bailout=bailout, crit=crit, **flow_kwargs)
            if tr.terminal == ESCAPED:
                times.append(float(tr.times[-1]))
        if times:
            escaped += 1
            dwell = max(dwell, min(times))
        else:
            offending.append(tr)

    orbits = bounded_orbit_set(F, crit, bailout, **flow_kwargs)
    clipped = [o for o in orbits if np.max(np.linalg.norm(o, axis=-1)) >= 0.99 * R]

    verdict = "pass" if not offending and not clipped else "fail"
    report = ValidationReport(ball, verdict, escaped / len(probes), dwell, probe_count, orbits,
                              offending, {"probe_count": probe_count, "horizon": horizon, "validation_seed": seed})
    if strict and verdict != "pass":
        if offending:
            msg = f"{len(offending)} boundary probe(s) stayed bounded in B({bailout:g})"
            bad = offending[0]
        else:
            msg = (f"{len(clipped)} bounded orbit(s) reach beyond 0.99*R = {0.99 * R:g}; "
                   "rerun with denser sampling")
            bad = clipped[0]
        raise IsolationViolation(msg, trajectory=bad, report=report)
    return report
