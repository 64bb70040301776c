"""Degree versus Morse cohomology on a handful of planar fields.

The degree is the alternating sum of the Betti numbers, so fields with
equal Betti vectors always share a degree, while equal degrees leave the
Betti vector free.

Run:  python demos/corpus_tour.py
"""

from morseflow import analyze, make_field, obstruction_verdict

corpus = {
    "bowl": "x1^2 + x2^2",
    "cap": "-x1^2 - x2^2",
    "saddle": "x1^2 - x2^2",
    "double well": "(x1^2 - 1)^2 + x2^2",
    "double ridge": "-(x1^2 - 1)^2 + x2^2",
    "egg crate": "x1^4 + x2^4 - 2*x1^2 - 2*x2^2 + 0.07*x1*x2 - 0.11*x1 - 0.08*x2",
}

reports = {}
print(f"{'field':>14} {'#crit':>5} {'indices':>22} {'betti':>10} {'degree':>6}")
for name, src in corpus.items():
    rep = analyze(make_field(src, 2, name))
    reports[name] = rep
    idx = sorted(cp.index for cp in rep.critical_points)
    print(f"{name:>14} {len(idx):>5} {str(idx):>22} {str(rep.betti):>10} {rep.degree:>6}")

print()
for a, b in [("bowl", "double well"), ("bowl", "cap"), ("bowl", "egg crate"), ("saddle", "double ridge")]:
    v = obstruction_verdict(reports[a], reports[b])
    print(f"{a} vs {b}: {v.conclusion}")
