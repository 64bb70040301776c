"""Scalar fields with exact gradients, linear homotopy families, and the
numerical properness screen."""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from functools import cached_property
from pathlib import Path

import numpy as np

from .expr import Const, Expr, Neg, Product, Sum, compile_exprs, compile_scalar, differentiate, parse, simplify, to_string

DEFAULT_SEED = 42
DEFAULT_SCREEN_RADII = tuple(2.0**k for k in range(0, 11))


def default_samples_per_sphere(dim: int) -> int:
    return 64 * dim * dim


@dataclass(frozen=True)
class ScalarField:
    """A function on R^dim together with its symbolic gradient and Hessian."""

    dim: int
    f: Expr
    grad: tuple[Expr, ...]
    hess: tuple[tuple[Expr, ...], ...]
    label: str = ""

    @classmethod
    def from_expr(cls, f: Expr, dim: int, label: str = "") -> ScalarField:
        f = simplify(f)
        grad = tuple(differentiate(f, i) for i in range(1, dim + 1))
        hess = tuple(tuple(differentiate(g, j) for j in range(1, dim + 1)) for g in grad)
        return cls(dim, f, grad, hess, label)

    @cached_property
    def _f_fn(self):
        return compile_exprs([self.f])

    @cached_property
    def _grad_fn(self):
        return compile_exprs(self.grad, (self.dim,))

    @cached_property
    def _hess_fn(self):
        return compile_exprs([h for row in self.hess for h in row], (self.dim, self.dim))

    @cached_property
    def _grad_point_fn(self):
        return compile_scalar(self.grad, self.dim)

    def value(self, x):
        """f at a point ``(dim,)`` or batch ``(..., dim)``."""
        return self._f_fn(x)

    def gradient(self, x) -> np.ndarray:
        return self._grad_fn(x)

    def gradient_at(self, x) -> np.ndarray:
        """Gradient at a single point; faster than :meth:`gradient` for one point."""
        return np.array(self._grad_point_fn(x))

    def hessian(self, x) -> np.ndarray:
        return self._hess_fn(x)

    def negated(self) -> ScalarField:
        """The field of ``-f`` (used for time-reversal checks)."""
        return ScalarField.from_expr(Neg(self.f), self.dim, f"-{self.label}" if self.label else "")

    @property
    def source(self) -> str:
        return to_string(self.f)


def make_field(source: str, dim: int, label: str = "") -> ScalarField:
    """Parse ``source`` and derive the simplified gradient and Hessian."""
    return ScalarField.from_expr(parse(source, dim), dim, label)


def load_field(path) -> tuple[ScalarField, dict]:
    """Read a field definition file ``{"dim": n, "expr": "...", "label": "..."}``.

    Returns the field and the raw JSON document.
    """
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise ValueError(f"{path}: field file must hold a JSON object")
    unknown = set(doc) - {"dim", "expr", "label"}
    if unknown:
        raise ValueError(f"{path}: unknown keys {sorted(unknown)}")
    if "dim" not in doc or "expr" not in doc:
        raise ValueError(f"{path}: field file needs 'dim' and 'expr'")
    dim = doc["dim"]
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise ValueError(f"{path}: 'dim' must be a positive integer")
    label = doc.get("label") or path.stem
    return make_field(doc["expr"], dim, label), doc


def dump_field(F: ScalarField, path) -> None:
    doc = {"dim": F.dim, "expr": F.source, "label": F.label}
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class FieldFamily:
    """Linear homotopy ``f_lam = (1 - lam) f0 + lam f1`` for lam in [0, 1]."""

    f0: ScalarField
    f1: ScalarField
    _cache: dict = dc_field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.f0.dim != self.f1.dim:
            raise ValueError(f"dimension mismatch: {self.f0.dim} vs {self.f1.dim}")

    @property
    def dim(self) -> int:
        return self.f0.dim

    def at(self, lam: float) -> ScalarField:
        lam = float(lam)
        if not 0.0 <= lam <= 1.0:
            raise ValueError(f"lambda must lie in [0, 1], got {lam}")
        if lam not in self._cache:
            e = Sum((Product((Const(1.0 - lam), self.f0.f)), Product((Const(lam), self.f1.f))))
            self._cache[lam] = ScalarField.from_expr(e, self.dim, f"family@{lam:g}")
        return self._cache[lam]

    def lambda_grid(self, size: int = 11) -> list[float]:
        return [float(v) for v in np.linspace(0.0, 1.0, size)]


def sphere_directions(dim: int, count: int, seed: int = DEFAULT_SEED) -> np.ndarray:
    """Unit vectors: ``count`` uniform random directions followed by the
    ``2*dim`` signed coordinate axes.

    The axes make coordinate-aligned degeneracies (a gradient vanishing
    along a whole axis) visible to every sampler that uses this set.
    """
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((count, dim))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    axes = np.concatenate([np.eye(dim), -np.eye(dim)])
    return np.concatenate([v, axes])


@dataclass
class ScreenReport:
    radii: list[float]
    minima: list[float]
    verdict: str
    seed: int
    samples_per_sphere: int

    def to_dict(self) -> dict:
        return {
            "radii": self.radii,
            "minima": self.minima,
            "verdict": self.verdict,
            "provenance": {"seed": self.seed, "samples_per_sphere": self.samples_per_sphere},
        }


def properness_screen(F: ScalarField, radii=DEFAULT_SCREEN_RADII, samples_per_sphere: int | None = None,
                      seed: int = DEFAULT_SEED) -> ScreenReport:
    """Heuristic check that |grad f| grows on large spheres.

    For each radius the minimum of |grad f| over sampled sphere points is
    recorded.  The verdict is ``"pass"`` when all minima are finite, the
    last one exceeds 1 and the last three are non-decreasing; otherwise
    ``"warn"``.  A pass is evidence, not a proof, of properness.
    """
    radii = [float(r) for r in radii]
    if not radii or any(r <= 0 for r in radii) or any(b < a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be non-empty, positive and ascending")
    if samples_per_sphere is None:
        samples_per_sphere = default_samples_per_sphere(F.dim)
    dirs = sphere_directions(F.dim, samples_per_sphere, seed)
    minima = []
    for r in radii:
        g = F.gradient(r * dirs)
        minima.append(float(np.min(np.linalg.norm(g, axis=-1))))
    tail = minima[-3:]
    ok = (all(np.isfinite(minima)) and tail[-1] > 1.0
          and all(b >= a for a, b in zip(tail, tail[1:])))
    return ScreenReport(radii, minima, "pass" if ok else "warn", seed, samples_per_sphere)


def screen_family(family: FieldFamily, lambda_grid_size: int = 11, **kwargs) -> dict[float, ScreenReport]:
    """Run :func:`properness_screen` at every lambda of the family grid."""
    return {lam: properness_screen(family.at(lam), **kwargs) for lam in family.lambda_grid(lambda_grid_size)}
