"""Local Morse complex over GF(2), Betti numbers, and the homotopy verdict.

Homology of the negative gradient flow is graded by Morse index.  Over the
field GF(2) homology and cohomology have equal dimensions, so the Betti
vector doubles as dim H^q(f, B(R); Z/2).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .critical import CriticalPoint
from .errors import BoundarySquareNonzero, NonTransverseSuspicion, UnresolvedOrbit
from .field import ScalarField
from .flow import ESCAPED, UNRESOLVED, integrate

SHOOT_DELTA = 1e-3
RESOLUTION = 64
ARC_TOL = 1e-8
NON_TRANSVERSE_FRACTION = 0.05
# a bisected separatrix must pass this close to the critical point it is credited to
ATTRIBUTION_RADIUS = 1e-2
SHARPNESS = 0.05


# ---------------------------------------------------------------------------
# GF(2) linear algebra


def gf2_rank(matrix) -> int:
    """Rank over GF(2) by Gaussian elimination."""
    m = (np.asarray(matrix, dtype=np.uint8) & 1).copy()
    rows, cols = m.shape if m.ndim == 2 else (0, 0)
    rank = 0
    for c in range(cols):
        pivot = next((r for r in range(rank, rows) if m[r, c]), None)
        if pivot is None:
            continue
        m[[rank, pivot]] = m[[pivot, rank]]
        for r in range(rows):
            if r != rank and m[r, c]:
                m[r] ^= m[rank]
        rank += 1
        if rank == rows:
            break
    return rank


def gf2_matmul(a, b) -> np.ndarray:
    return (np.asarray(a, dtype=np.int64) @ np.asarray(b, dtype=np.int64)) % 2


# ---------------------------------------------------------------------------
# Connecting orbits


@dataclass
class ConnectionCount:
    parity: int
    raw_count: int
    side: str
    labels: list = field(default_factory=list)


def _eigenbasis(F: ScalarField, p: CriticalPoint, negative: bool) -> np.ndarray:
    w, v = np.linalg.eigh(F.hessian(p.x))
    return v[:, w < 0] if negative else v[:, w > 0]


def _classify(tr) -> int | str:
    if tr.terminal == "converged":
        return tr.target
    return ESCAPED if tr.terminal == ESCAPED else UNRESOLVED


class _CircleSurvey:
    """Limits and closest approaches of flow lines from a small circle.

    The circle ``origin + delta * (cos t * b1 + sin t * b2)`` is sampled at
    ``resolution`` angles; every flow line is classified by its limit and by
    its minimum distance to each critical point.  Changes of limit between
    neighbouring samples are bisected down to ``ARC_TOL``.
    """

    def __init__(self, F, origin, basis, sign, crit, bailout, resolution, delta, flow_kwargs):
        self.F, self.origin, self.basis, self.sign = F, origin, basis, sign
        self.crit = crit
        self.crit_x = np.array([c.x for c in crit])
        self.bailout, self.delta, self.flow_kwargs = bailout, delta, flow_kwargs
        self.spacing = 2 * np.pi / resolution
        # half-step phase keeps samples off symmetry axes of the eigenbasis
        self.thetas = self.spacing * (np.arange(resolution) + 0.5)
        shots = [self.shoot(t) for t in self.thetas]
        self.labels = [lab for lab, _ in shots]
        self.dist = np.array([d for _, d in shots])
        if UNRESOLVED in self.labels:
            bad = self.thetas[self.labels.index(UNRESOLVED)]
            raise UnresolvedOrbit(f"sample at angle {bad:.6g} on the circle of {origin.location} did not resolve")
        self.crossings: list[tuple[float, np.ndarray]] = []
        for j in range(resolution):
            a = self.thetas[j]
            la, lb = self.labels[j], self.labels[(j + 1) % resolution]
            if la != lb:
                self._bisect(a, la, self.dist[j], a + self.spacing, lb, self.dist[(j + 1) % resolution])
        self._found: dict[int, list[float]] = {}

    def shoot(self, theta):
        x0 = self.origin.x + self.delta * (self.basis @ np.array([np.cos(theta), np.sin(theta)]))
        tr = integrate(self.F, x0, self.sign, bailout=self.bailout, crit=self.crit, **self.flow_kwargs)
        d = np.min(np.linalg.norm(tr.points[:, None, :] - self.crit_x[None], axis=-1), axis=0)
        return _classify(tr), d

    def _bisect(self, a, la, da, b, lb, db):
        if b - a < ARC_TOL:
            self.crossings.append((0.5 * (a + b), np.minimum(da, db)))
            return
        mid = 0.5 * (a + b)
        lm, dm = self.shoot(mid)
        if lm == UNRESOLVED:
            raise UnresolvedOrbit(f"bisection on the circle of {self.origin.location} "
                                  f"bottomed out unresolved on arc [{a:.12g}, {b:.12g}]")
        if lm != la:
            self._bisect(a, la, da, mid, lm, dm)
        if lm != lb:
            self._bisect(mid, lm, dm, b, lb, db)

    def _golden(self, j, a, b):
        """Minimize the closest approach to crit[j] over angles in [a, b]."""
        g = (np.sqrt(5) - 1) / 2
        c, d = b - g * (b - a), a + g * (b - a)
        fc, fd = self.shoot(c)[1][j], self.shoot(d)[1][j]
        while b - a > ARC_TOL:
            if fc <= fd:
                b, d, fd = d, c, fc
                c = b - g * (b - a)
                fc = self.shoot(c)[1][j]
            else:
                a, c, fc = c, d, fd
                d = a + g * (b - a)
                fd = self.shoot(d)[1][j]
        return (c, fc) if fc <= fd else (d, fd)

    def orbits_to(self, j: int, through: list[int]) -> list[float]:
        """Angles whose flow lines run into crit[j]."""
        if j in self._found:
            return self._found[j]
        found: list[float] = []

        def add(theta):
            if all(abs((theta - t + np.pi) % (2 * np.pi) - np.pi) > 0.5 * self.spacing for t in found):
                found.append(theta)

        for theta, d in self.crossings:
            nearest = min(through, key=lambda i: d[i])
            if nearest == j and d[j] < ATTRIBUTION_RADIUS:
                add(theta)
        col = self.dist[:, j]
        n = len(col)
        for i in range(n):
            lo, hi = col[i - 1], col[(i + 1) % n]
            # flat stretches are trajectories sharing a limit, not a dip towards crit[j]
            if col[i] <= lo and col[i] <= hi and max(lo, hi) > (1 + SHARPNESS) * col[i]:
                t = self.thetas[i]
                if any(abs((t - u + np.pi) % (2 * np.pi) - np.pi) <= 0.5 * self.spacing for u in found):
                    continue
                theta, d = self._golden(j, t - self.spacing, t + self.spacing)
                if d < ATTRIBUTION_RADIUS:
                    add(theta)
        self._found[j] = found
        return found


def count_connections(F: ScalarField, p: CriticalPoint, q: CriticalPoint, crit, ball, resolution: int = RESOLUTION,
                      side: str = "auto", delta: float = SHOOT_DELTA, cache: dict | None = None,
                      **flow_kwargs) -> ConnectionCount:
    """Count flow lines of -grad f from ``p`` (index k) down to ``q`` (index k-1).

    The count is taken on the lower-dimensional of two spheres: the
    unstable sphere of ``p`` (dimension k-1, shot with -grad f) or the
    stable sphere of ``q`` (dimension n-k, shot backwards with +grad f).
    ``side`` forces one of ``"unstable"`` / ``"stable"``.

    On a 0-sphere the two shots are classified directly.  On a circle,
    ``resolution`` samples are classified; every change of limit between
    neighbours is bisected to an arc of 1e-8 and credited to the critical
    point the separating orbit passes, and local minima of the distance to
    the target are refined by golden-section search, which catches orbits
    whose neighbours on both sides share a limit.  ``cache`` lets repeated
    calls reuse one survey per shooting circle.

    Raises
    ------
    UnresolvedOrbit
        If a classification used in the count times out.
    NonTransverseSuspicion
        If more than 5% of circle samples land on the target directly.
    """
    k = p.index
    if q.index != k - 1:
        raise ValueError(f"index difference must be 1, got {k} -> {q.index}")
    n = F.dim
    crit = list(crit)
    if side == "auto":
        side = "unstable" if k - 1 <= n - k else "stable"
    if side == "unstable":
        origin, basis, sign, target = p, _eigenbasis(F, p, True), -1, q
    elif side == "stable":
        origin, basis, sign, target = q, _eigenbasis(F, q, False), 1, p
    else:
        raise ValueError(f"unknown side {side!r}")
    target_id = crit.index(target)
    bailout = 4.0 * ball.R
    m = basis.shape[1] - 1

    if m == 0:
        labels = []
        for s in (1.0, -1.0):
            tr = integrate(F, origin.x + delta * s * basis[:, 0], sign, bailout=bailout, crit=crit, **flow_kwargs)
            labels.append(_classify(tr))
        if UNRESOLVED in labels:
            raise UnresolvedOrbit(f"shot from {origin.location} along the {side} direction did not resolve")
        raw = sum(lab == target_id for lab in labels)
        return ConnectionCount(raw % 2, raw, side, labels)
    if m != 1:
        raise NotImplementedError(
            f"connection counting needs a 0- or 1-dimensional shooting sphere; "
            f"indices {k}->{k - 1} in dimension {n} give {min(k - 1, n - k)}")

    key = (origin.location, side, resolution, delta)
    survey = cache.get(key) if cache is not None else None
    if survey is None:
        survey = _CircleSurvey(F, origin, basis, sign, crit, bailout, resolution, delta, flow_kwargs)
        if cache is not None:
            cache[key] = survey
    hits = sum(lab == target_id for lab in survey.labels)
    if hits > NON_TRANSVERSE_FRACTION * resolution:
        raise NonTransverseSuspicion(
            f"{hits}/{resolution} samples from {origin.location} reach {target.location} directly")
    through_index = target.index
    through = [j for j, c in enumerate(crit) if c.index == through_index]
    raw = len(survey.orbits_to(target_id, through))
    return ConnectionCount(raw % 2, raw, side, list(survey.labels))


# ---------------------------------------------------------------------------
# Complex and homology


@dataclass
class MorseComplex:
    """Generators by index and GF(2) boundary matrices.

    ``boundary[k]`` has rows indexed by ``generators[k-1]`` and columns by
    ``generators[k]``.
    """

    dim: int
    generators: dict[int, list[CriticalPoint]]
    boundary: dict[int, np.ndarray]
    raw_counts: dict[int, np.ndarray] = field(default_factory=dict)

    def counts(self) -> list[int]:
        return [len(self.generators.get(k, [])) for k in range(self.dim + 1)]


def _group(crit, dim):
    return {k: [c for c in crit if c.index == k] for k in range(dim + 1)}


def build_complex(F: ScalarField, crit, ball, resolution: int = RESOLUTION, **kwargs) -> MorseComplex:
    """Assemble the Morse complex and verify that the boundary squares to zero.

    Raises
    ------
    BoundarySquareNonzero
        If some composite boundary has an odd entry; ``chain`` names the
        generators involved.
    """
    crit = list(crit)
    gens = _group(crit, F.dim)
    boundary, raw, cache = {}, {}, {}
    for k in range(1, F.dim + 1):
        rows, cols = gens[k - 1], gens[k]
        d = np.zeros((len(rows), len(cols)), dtype=np.uint8)
        r = np.zeros((len(rows), len(cols)), dtype=np.int64)
        for j, p in enumerate(cols):
            for i, q in enumerate(rows):
                cc = count_connections(F, p, q, crit, ball, resolution, cache=cache, **kwargs)
                d[i, j], r[i, j] = cc.parity, cc.raw_count
        boundary[k], raw[k] = d, r
    cx = MorseComplex(F.dim, gens, boundary, raw)
    check_boundary_square(cx)
    return cx


def check_boundary_square(cx: MorseComplex) -> None:
    for k in range(2, cx.dim + 1):
        prod = gf2_matmul(cx.boundary[k - 1], cx.boundary[k])
        bad = np.argwhere(prod)
        if bad.size:
            i, j = bad[0]
            top = cx.generators[k][j]
            bottom = cx.generators[k - 2][i]
            middle = [c for c, a, b in zip(cx.generators[k - 1], cx.boundary[k - 1][i], cx.boundary[k][:, j]) if a and b]
            chain = [top.location] + [c.location for c in middle] + [bottom.location]
            raise BoundarySquareNonzero(
                f"boundary^2 != 0 in degree {k}: {top.location} -> {bottom.location} "
                f"through {len(middle)} intermediate point(s)", chain=chain)


def betti_numbers(cx: MorseComplex) -> list[int]:
    """b_k = dim ker d_k - rank d_{k+1} over GF(2)."""
    c = cx.counts()
    rank = [0] * (cx.dim + 2)
    for k in range(1, cx.dim + 1):
        rank[k] = gf2_rank(cx.boundary[k]) if cx.boundary[k].size else 0
    return [c[k] - rank[k] - rank[k + 1] for k in range(cx.dim + 1)]


def euler_characteristic(cx: MorseComplex) -> int:
    return sum((-1) ** k * n for k, n in enumerate(cx.counts()))


@dataclass
class MorseReport:
    label: str
    dim: int
    R: float
    critical_points: list[CriticalPoint]
    complex: MorseComplex
    betti: list[int]
    degree: int
    euler: int
    provenance: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "dim": self.dim,
            "R": self.R,
            "critical_points": [{"x": list(c.location), "index": c.index, "residual": c.residual}
                                for c in self.critical_points],
            "boundary_matrices": {str(k): m.astype(int).tolist() for k, m in self.complex.boundary.items()},
            "betti": list(self.betti),
            "betti_label": "dim H^q(f, B(R); Z/2)",
            "degree": self.degree,
            "euler": self.euler,
            "provenance": self.provenance,
        }


@dataclass
class Verdict:
    proper_homotopic: bool
    gradient_obstruction: bool
    conclusion: str
    narrative: str

    def to_dict(self) -> dict:
        return {"proper_homotopic": self.proper_homotopic, "gradient_obstruction": self.gradient_obstruction,
                "conclusion": self.conclusion, "narrative": self.narrative}


def obstruction_verdict(a: MorseReport, b: MorseReport) -> Verdict:
    """Compare degrees (proper homotopy) and Betti vectors (gradient obstruction)."""
    proper = a.degree == b.degree
    obstruction = list(a.betti) != list(b.betti)
    parts = [f"degrees {a.degree} and {b.degree}: "
             + ("homotopic as proper maps." if proper else "not homotopic as proper maps.")]
    if obstruction:
        conclusion = "not gradient homotopic"
        parts.append(f"Morse cohomology ranks {a.betti} and {b.betti} differ, so the gradients "
                     "lie in different components of the proper gradient fields.")
    else:
        conclusion = "inconclusive"
        parts.append(f"Morse cohomology ranks agree ({a.betti}); this invariant is necessary but not "
                     "known to be sufficient, so gradient homotopy is INCONCLUSIVE.")
    return Verdict(proper, obstruction, conclusion, " ".join(parts))
