"""Two gradient fields with the same degree but different Morse cohomology.

f = x1^2 + ... + xn^2 has a single minimum and g = -x1^2 - x2^2 + x3^2 + ...
a single critical point of index 2.  Both gradients have degree 1, so they
are homotopic through proper maps, yet their local Morse cohomology lives in
different degrees, so no path of proper *gradient* fields joins them.

Run:  python demos/same_degree_different_cohomology.py
"""

import time

from morseflow import compare, make_field

for n in (2, 3, 4):
    f_src = " + ".join(f"x{i}^2" for i in range(1, n + 1))
    g_src = "-x1^2 - x2^2" + "".join(f" + x{i}^2" for i in range(3, n + 1))
    f = make_field(f_src, n, "f")
    g = make_field(g_src, n, "g")

    t0 = time.perf_counter()
    cmp = compare(f, g)
    dt = time.perf_counter() - t0

    print(f"n = {n}   ({dt:.2f} s, ball: {cmp.mode}, R = {cmp.a.R:g})")
    for rep in (cmp.a, cmp.b):
        (cp,) = rep.critical_points
        print(f"  {rep.label}: critical point {cp.location} of index {cp.index}; "
              f"degree {rep.degree}; dim H^q = {rep.betti}")
    v = cmp.verdict
    print(f"  proper_homotopic = {v.proper_homotopic}, gradient_obstruction = {v.gradient_obstruction}")
    print(f"  -> {v.conclusion}\n")

# The linear path between f and g is not a path of proper fields: at lambda = 1/2
# the first two coordinates drop out of the gradient entirely.
mid = make_field("x3^2", 3)
print("gradient of the midpoint (1-t)f + tg at t = 1/2, n = 3, at (1, 0, 0):", mid.gradient([1.0, 0.0, 0.0]))
