"""Morse complex of the double well (x1^2 - 1)^2 + x2^2.

Two minima at (+-1, 0) and a saddle at the origin.  The saddle's unstable
manifold is the segment of the x1-axis, so each minimum receives exactly one
flow line and the boundary is [1; 1] over GF(2).  Homology is that of a
point, matching the degree 1 of the gradient.

Run:  python demos/double_well_complex.py [outdir]
"""

import sys
from pathlib import Path

import numpy as np

from morseflow import analyze, count_connections, integrate, isolating_ball, make_field

F = make_field("(x1^2 - 1)^2 + x2^2", 2, "double_well")
ball = isolating_ball(F)
rep = analyze(F, ball=ball)
crit = rep.critical_points

print("critical points:")
for cp in crit:
    print(f"  {cp.location}  index {cp.index}  det sign {cp.hess_det_sign:+d}  residual {cp.residual:.1e}")

saddle = next(cp for cp in crit if cp.index == 1)
for q in (cp for cp in crit if cp.index == 0):
    cc = count_connections(F, saddle, q, crit, ball)
    print(f"orbits from {saddle.location} to {q.location}: {cc.raw_count} (parity {cc.parity})")

print("d_1 =", rep.complex.boundary[1].tolist())
print("dim H^q =", rep.betti, " Euler characteristic", rep.euler, " degree", rep.degree)

# Flow lines from a ring of starting points, written as CSV for plotting.
out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("double_well_traces")
out.mkdir(exist_ok=True)
ends = {}
for k, th in enumerate(np.linspace(0, 2 * np.pi, 12, endpoint=False)):
    x0 = 1.8 * np.array([np.cos(th), np.sin(th)])
    tr = integrate(F, x0, -1, bailout=4 * rep.R, crit=crit)
    tr.write_csv(out / f"trace_{k:02d}.csv")
    ends[tr.terminal_state] = ends.get(tr.terminal_state, 0) + 1
print(f"12 flow lines written to {out}/; terminal states: {ends}")
