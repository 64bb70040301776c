"""End-to-end analysis: field -> isolating ball -> critical points -> complex."""

from __future__ import annotations

from dataclasses import asdict, dataclass

from . import critical, flow, isolate, morse
from .errors import R1NotFound
from .field import DEFAULT_SEED, FieldFamily, ScalarField, default_samples_per_sphere, screen_family


@dataclass(frozen=True)
class Settings:
    """Every tunable tolerance of a run; recorded verbatim in report provenance."""

    newton_tol: float = critical.NEWTON_TOL
    degeneracy_tol: float = critical.DEGENERACY_TOL
    dedupe_tol: float = critical.DEDUPE_TOL
    step_tol: float = flow.STEP_TOL
    capture_radius: float = flow.CAPTURE_RADIUS
    resolution: int = morse.RESOLUTION
    grid_density: int | None = None
    samples_per_sphere: int | None = None
    probe_count: int = isolate.PROBE_COUNT
    lambda_grid_size: int = isolate.LAMBDA_GRID_SIZE
    seed: int = DEFAULT_SEED

    def resolved(self, dim: int) -> dict:
        d = asdict(self)
        if d["grid_density"] is None:
            d["grid_density"] = critical.default_grid_density(dim)
        if d["samples_per_sphere"] is None:
            d["samples_per_sphere"] = default_samples_per_sphere(dim)
        return d

    @property
    def flow_kwargs(self) -> dict:
        return {"step_tol": self.step_tol, "capture_radius": self.capture_radius}


def compute_ball(target, settings: Settings) -> isolate.IsolatingBall:
    return isolate.isolating_ball(target, settings.lambda_grid_size, settings.samples_per_sphere, settings.seed)


def validate(F: ScalarField, ball, settings: Settings) -> isolate.ValidationReport:
    return isolate.validate_isolation(F, ball, settings.probe_count, seed=settings.seed,
                                      grid_density=settings.grid_density, **settings.flow_kwargs)


def critical_points(F: ScalarField, R: float, settings: Settings):
    return critical.find_critical_points(F, R, settings.grid_density, settings.newton_tol,
                                         settings.degeneracy_tol, settings.dedupe_tol)


def analyze(F: ScalarField, settings: Settings = Settings(), ball=None, mode: str = "single") -> morse.MorseReport:
    """Full pipeline for one field.  ``ball`` defaults to the field's own."""
    if ball is None:
        ball = compute_ball(F, settings)
    validation = validate(F, ball, settings)
    crit = critical_points(F, ball.R, settings)
    degree = critical.brouwer_degree(crit).degree
    cx = morse.build_complex(F, crit, ball, settings.resolution, **settings.flow_kwargs)
    betti = morse.betti_numbers(cx)
    prov = {"settings": settings.resolved(F.dim), "ball": ball.to_dict(), "ball_mode": mode,
            "validation": validation.to_dict(), "expr": F.source}
    return morse.MorseReport(F.label, F.dim, ball.R, crit, cx, betti, degree, morse.euler_characteristic(cx), prov)


@dataclass
class Comparison:
    a: morse.MorseReport
    b: morse.MorseReport
    verdict: morse.Verdict
    mode: str
    family_screen: dict

    def to_dict(self) -> dict:
        out = self.verdict.to_dict()
        out.update({"ball_mode": self.mode, "R": self.a.R, "family_screen": self.family_screen,
                    "reports": [self.a.to_dict(), self.b.to_dict()]})
        return out


def compare(Fa: ScalarField, Fb: ScalarField, settings: Settings = Settings()) -> Comparison:
    """Degree and Morse-cohomology comparison of two fields.

    A common ball from the linear family between the two fields is tried
    first.  If some member of the family fails the properness screen or no
    common ``r1`` exists, each endpoint gets its own ball and both are
    analyzed on the larger of the two.
    """
    if Fa.dim != Fb.dim:
        raise ValueError(f"dimension mismatch: {Fa.dim} vs {Fb.dim}")
    family = FieldFamily(Fa, Fb)
    screens = screen_family(family, settings.lambda_grid_size, samples_per_sphere=settings.samples_per_sphere,
                            seed=settings.seed)
    screen_summary = {f"{lam:g}": rep.verdict for lam, rep in screens.items()}
    ball = None
    if all(rep.verdict == "pass" for rep in screens.values()):
        try:
            ball = compute_ball(family, settings)
            mode = "shared-family"
        except R1NotFound:
            ball = None
    if ball is None:
        ba, bb = compute_ball(Fa, settings), compute_ball(Fb, settings)
        ball = ba if ba.R >= bb.R else bb
        mode = "per-endpoint-max"
    ra = analyze(Fa, settings, ball, mode)
    rb = analyze(Fb, settings, ball, mode)
    return Comparison(ra, rb, morse.obstruction_verdict(ra, rb), mode, screen_summary)
