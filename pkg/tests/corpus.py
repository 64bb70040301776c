"""Test corpus of proper gradient fields shared by the test modules."""

import numpy as np

from morseflow import make_field


def index_pair_sources(n):
    """Sum of squares and the quadric with two negative directions, in n variables."""
    f = " + ".join(f"x{i}^2" for i in range(1, n + 1))
    g = "-x1^2 - x2^2" + "".join(f" + x{i}^2" for i in range(3, n + 1))
    return f, g


def random_quartic_source(seed=2024):
    """x1^4 + x2^4 - 2x1^2 - 2x2^2 plus small seeded cross and linear terms (generic, so Morse-Smale)."""
    a, b, c = np.random.default_rng(seed).uniform(-0.2, 0.2, 3)
    return f"x1^4 + x2^4 - 2*x1^2 - 2*x2^2 {a:+.6f}*x1*x2 {b:+.6f}*x1 {c:+.6f}*x2"


# label -> (source, dim, expected betti, expected degree)
CORPUS = {
    "f": ("x1^2 + x2^2", 2, [1, 0, 0], 1),
    "g": ("-x1^2 - x2^2 + x3^2", 3, [0, 0, 1, 0], 1),
    "neg_f": ("-x1^2 - x2^2", 2, [0, 0, 1], 1),
    "double_well": ("(x1^2 - 1)^2 + x2^2", 2, [1, 0, 0], 1),
    "lifted_max": ("-(x1^2 - 1)^2 + x2^2", 2, [0, 1, 0], -1),
    "random_quartic": (random_quartic_source(), 2, [1, 0, 0], 1),
}


def corpus_field(label):
    src, dim, _, _ = CORPUS[label]
    return make_field(src, dim, label)
