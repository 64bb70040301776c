"""Building an isolating ball and checking it by integrating the flow.

r1: every sampled point with |x| >= r1 (on a few shells) has |grad f| > 1.
r2: 1.1 times the largest |f| sampled on B(r1).
R = 2 (r1 + r2) then contains every bounded flow line.

Run:  python demos/isolating_ball.py
"""

from morseflow import FieldFamily, R1NotFound, isolating_ball, make_field, properness_screen, validate_isolation
from morseflow.isolate import assemble_ball

fields = {
    "x1^2 + x2^2": 2,
    "(x1^2 - 1)^2 + x2^2": 2,
    "-x1^2 - x2^2 + x3^2": 3,
}

for src, dim in fields.items():
    F = make_field(src, dim)
    ball = isolating_ball(F)
    rep = validate_isolation(F, ball)
    print(f"{src:>24}:  r1 = {ball.r1:<6g} r2 = {ball.r2:<8.4g} R = {ball.R:<8.4g} "
          f"isolation {rep.verdict}, slowest escape after t = {rep.max_boundary_dwell:.2f}")

# Larger balls keep isolating the same bounded set.
F = make_field("(x1^2 - 1)^2 + x2^2", 2)
ball = isolating_ball(F)
for factor in (1.5, 2, 4):
    big = assemble_ball(factor * ball.r1, factor * ball.r2)
    print(f"  double well, R' = {big.R:g}: {validate_isolation(F, big).verdict}")

# A ball that cuts through the saddle-minimum connections is rejected.
small = validate_isolation(F, assemble_ball(0.2, 0.2), strict=False)
print(f"  double well, R = 0.8: {small.verdict}")

# The screen flags non-proper fields before any radius search.
for src in ("x1", "sin(x1)"):
    s = properness_screen(make_field(src, 1), [1, 2, 4])
    print(f"screen {src!r}: minima {[round(m, 4) for m in s.minima]} -> {s.verdict}")

# Linear families can lose properness in the middle.
fam = FieldFamily(make_field("x1^2 + x2^2 + x3^2", 3), make_field("-x1^2 - x2^2 + x3^2", 3))
try:
    isolating_ball(fam)
except R1NotFound as exc:
    print("family f -> g:", exc)
