"""Critical points of a scalar field and the Brouwer degree of its gradient."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateCriticalPoint
from .field import ScalarField

NEWTON_TOL = 1e-10
DEGENERACY_TOL = 1e-8
DEDUPE_TOL = 1e-6
MAX_NEWTON_STEPS = 100
MAX_SEEDS = 20000


@dataclass(frozen=True)
class CriticalPoint:
    location: tuple[float, ...]
    index: int
    hess_det_sign: int
    min_abs_eigenvalue: float
    residual: float

    @property
    def x(self) -> np.ndarray:
        return np.array(self.location)

    def to_dict(self) -> dict:
        return {
            "x": list(self.location),
            "index": self.index,
            "hess_det_sign": self.hess_det_sign,
            "min_abs_eigenvalue": self.min_abs_eigenvalue,
            "residual": self.residual,
        }


@dataclass(frozen=True)
class DegreeReport:
    degree: int
    contributions: tuple[tuple[CriticalPoint, int], ...]


def default_grid_density(dim: int) -> int:
    """Odd seed-grid density keeping the seed count near ``MAX_SEEDS``."""
    d = min(101, int(round(MAX_SEEDS ** (1.0 / dim))))
    d = max(d, 3)
    return d if d % 2 else d - 1


def classify(F: ScalarField, x) -> CriticalPoint:
    """Morse data of ``F`` at ``x`` from the Hessian eigenvalues."""
    x = np.asarray(x, dtype=float)
    eig = np.linalg.eigvalsh(F.hessian(x))
    index = int(np.sum(eig < 0))
    return CriticalPoint(
        location=tuple(float(v) for v in x),
        index=index,
        hess_det_sign=(-1) ** index,
        min_abs_eigenvalue=float(np.min(np.abs(eig))),
        residual=float(np.linalg.norm(F.gradient(x))),
    )


def _newton_batch(F: ScalarField, seeds: np.ndarray, tol: float, max_steps: int):
    x = seeds.copy()
    res = np.linalg.norm(F.gradient(x), axis=-1)
    active = np.isfinite(res) & (res > tol)
    for _ in range(max_steps):
        if not active.any():
            break
        xa = x[active]
        g = F.gradient(xa)
        H = F.hessian(xa)
        try:
            step = np.linalg.solve(H, g[..., None])[..., 0]
        except np.linalg.LinAlgError:
            step = np.stack([np.linalg.lstsq(h, v, rcond=None)[0] for h, v in zip(H, g)])
        xa = xa - step
        x[active] = xa
        with np.errstate(over="ignore", invalid="ignore"):
            r = np.linalg.norm(F.gradient(xa), axis=-1)
        res[active] = r
        still = np.isfinite(r) & (r > tol) & np.all(np.isfinite(xa), axis=-1)
        idx = np.flatnonzero(active)
        active[idx[~still]] = False
    converged = np.isfinite(res) & (res <= tol)
    return x[converged], res[converged]


def find_critical_points(F: ScalarField, R: float, grid_density: int | None = None,
                         newton_tol: float = NEWTON_TOL, degeneracy_tol: float = DEGENERACY_TOL,
                         dedupe_tol: float = DEDUPE_TOL, max_steps: int = MAX_NEWTON_STEPS) -> list[CriticalPoint]:
    """All nondegenerate zeros of grad f in the closed ball B(R).

    Newton's method on the gradient (Jacobian = Hessian) is started from a
    uniform ``grid_density**dim`` grid over the cube [-R, R]^dim.  Converged
    points inside B(R) are deduplicated (smallest residual wins) and
    returned in lexicographic order of location.

    Raises
    ------
    DegenerateCriticalPoint
        If a converged point has min |eigenvalue| below ``degeneracy_tol``.
    """
    if R <= 0:
        raise ValueError("R must be positive")
    if grid_density is None:
        grid_density = default_grid_density(F.dim)
    if grid_density < 2:
        raise ValueError("grid_density must be >= 2")
    axis = np.linspace(-R, R, grid_density)
    seeds = np.array(list(itertools.product(axis, repeat=F.dim)), dtype=float)
    pts, res = _newton_batch(F, seeds, newton_tol, max_steps)
    inside = np.linalg.norm(pts, axis=-1) <= R
    pts, res = pts[inside], res[inside]

    order = sorted(range(len(pts)), key=lambda k: (res[k], tuple(pts[k])))
    kept: list[np.ndarray] = []
    for k in order:
        if all(np.linalg.norm(pts[k] - q) >= dedupe_tol for q in kept):
            kept.append(pts[k])

    out = []
    for x in kept:
        cp = classify(F, x)
        if cp.min_abs_eigenvalue < degeneracy_tol:
            raise DegenerateCriticalPoint(
                f"critical point at {cp.location} has min |eigenvalue| "
                f"{cp.min_abs_eigenvalue:.3g} < {degeneracy_tol:g}; the function is not Morse",
                location=cp.location, min_abs_eigenvalue=cp.min_abs_eigenvalue)
        out.append(cp)
    out.sort(key=lambda cp: cp.location)
    return out


def brouwer_degree(points) -> DegreeReport:
    """deg(grad f, B(R)) as the sum of sign det Hess f over the zero set."""
    contributions = tuple((p, p.hess_det_sign) for p in points)
    return DegreeReport(sum(s for _, s in contributions), contributions)
