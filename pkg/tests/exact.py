"""Exact rational evaluation of polynomial expression trees.

Used as a roundoff-free reference for finite-difference checks: with
rational arithmetic the central difference carries only its O(h^2)
truncation error.
"""

from fractions import Fraction

from morseflow.expr import Const, Func, Neg, Pow, Product, Sum, Var


def exact_eval(e, x):
    if isinstance(e, Const):
        return Fraction(e.value)
    if isinstance(e, Var):
        return x[e.index - 1]
    if isinstance(e, Sum):
        return sum((exact_eval(t, x) for t in e.terms), Fraction(0))
    if isinstance(e, Product):
        out = Fraction(1)
        for t in e.factors:
            out *= exact_eval(t, x)
        return out
    if isinstance(e, Pow):
        return exact_eval(e.base, x) ** e.exponent
    if isinstance(e, Neg):
        return -exact_eval(e.arg, x)
    if isinstance(e, Func):
        raise TypeError("exact evaluation covers polynomials only")
    raise TypeError(type(e))


def central_difference(e, x, i, h=1e-5):
    """Central difference of ``e`` in coordinate ``i`` (1-based) at float point ``x``, exactly."""
    xq = [Fraction(float(v)) for v in x]
    hq = Fraction(h)
    up, dn = list(xq), list(xq)
    up[i - 1] += hq
    dn[i - 1] -= hq
    return float((exact_eval(e, up) - exact_eval(e, dn)) / (2 * hq))


def close(approx, exact, rel=1e-6, abs_=1e-8):
    """Relative error <= rel, or absolute error <= abs_ near zero."""
    err = abs(approx - exact)
    return err <= rel * abs(exact) or err <= abs_
