import json

import numpy as np
import pytest

from corpus import CORPUS, corpus_field
from exact import central_difference, close
from morseflow.errors import ExprSyntaxError
from morseflow.expr import Const, Product, Var, evaluate, parse
from morseflow.field import (FieldFamily, dump_field, load_field, make_field, properness_screen,
                             screen_family, sphere_directions)


def _points_in_ball(dim, count, radius, seed):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((count, dim))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v * radius * rng.random((count, 1)) ** (1.0 / dim)


def test_make_field_examples():
    F = make_field("x1^2 + x2^2", 2)
    assert F.grad == (Product((Const(2.0), Var(1))), Product((Const(2.0), Var(2))))
    np.testing.assert_array_equal(F.hessian([0.3, -1.0]), np.diag([2.0, 2.0]))

    G = make_field("-x1^2 - x2^2 + x3^2", 3)
    np.testing.assert_array_equal(G.gradient([1.0, 2.0, 3.0]), [-2.0, -4.0, 6.0])

    L = make_field("x1", 1)
    assert L.grad == (Const(1.0),)
    assert L.hess == ((Const(0.0),),)


def test_parse_errors_propagate():
    with pytest.raises(ExprSyntaxError):
        make_field("x1 + x3", 2)


@pytest.mark.parametrize("label", sorted(CORPUS))
def test_gradient_and_hessian_match_finite_differences(label):
    F = corpus_field(label)
    for x in _points_in_ball(F.dim, 100, 10.0, seed=1):
        grad = F.gradient(x)
        hess = F.hessian(x)
        for i in range(1, F.dim + 1):
            assert close(grad[i - 1], central_difference(F.f, x, i))
            for j in range(1, F.dim + 1):
                assert close(hess[i - 1, j - 1], central_difference(F.grad[i - 1], x, j))


@pytest.mark.parametrize("label", sorted(CORPUS))
def test_hessian_symmetric(label):
    F = corpus_field(label)
    H = F.hessian(_points_in_ball(F.dim, 100, 10.0, seed=2))
    assert np.max(np.abs(H - np.swapaxes(H, -1, -2))) <= 1e-9 * max(1.0, np.max(np.abs(H)))


def test_single_point_gradient_agrees_with_batch():
    F = corpus_field("random_quartic")
    for x in _points_in_ball(2, 20, 5.0, seed=3):
        np.testing.assert_allclose(F.gradient_at(x), F.gradient(x), rtol=1e-14, atol=1e-14)


def test_family_endpoints_reproduce_inputs():
    f0, f1 = corpus_field("double_well"), corpus_field("random_quartic")
    fam = FieldFamily(f0, f1)
    pts = _points_in_ball(2, 100, 10.0, seed=4)
    assert np.max(np.abs(fam.at(0.0).value(pts) - f0.value(pts))) <= 1e-12
    assert np.max(np.abs(fam.at(1.0).value(pts) - f1.value(pts))) <= 1e-12
    mid = fam.at(0.25).value(pts)
    np.testing.assert_allclose(mid, 0.75 * f0.value(pts) + 0.25 * f1.value(pts), rtol=1e-12, atol=1e-9)


def test_family_rejects_mismatch_and_bad_lambda():
    with pytest.raises(ValueError):
        FieldFamily(corpus_field("f"), corpus_field("g"))
    with pytest.raises(ValueError):
        FieldFamily(corpus_field("f"), corpus_field("neg_f")).at(1.5)


def test_family_lambda_half_is_degenerate(oracle):
    f, g = make_field("x1^2 + x2^2 + x3^2", 3), corpus_field("g")
    mid = FieldFamily(f, g).at(0.5)
    np.testing.assert_array_equal(mid.gradient([1.0, 0.0, 0.0]), oracle["family_lambda_half"]["grad_at_e1"])


def test_screen_examples(oracle):
    rep = properness_screen(make_field("x1^2 + x2^2", 2), [1, 2, 4, 8])
    np.testing.assert_allclose(rep.minima, [2, 4, 8, 16], rtol=1e-12)
    assert rep.verdict == "pass"

    rep = properness_screen(make_field("x1", 1), [1, 2, 4])
    assert rep.minima == oracle["screen"]["x1"]
    assert rep.verdict == "warn"

    rep = properness_screen(make_field("sin(x1)", 1), [1, 2, 4])
    np.testing.assert_allclose(rep.minima, oracle["screen"]["sin"], rtol=1e-14)
    assert rep.verdict == "warn"


def test_screen_rejects_bad_radii():
    with pytest.raises(ValueError):
        properness_screen(make_field("x1", 1), [2, 1])


def test_screen_family_flags_nothing_at_endpoints():
    reps = screen_family(FieldFamily(corpus_field("f"), corpus_field("neg_f")), 5)
    assert reps[0.0].verdict == "pass" and reps[1.0].verdict == "pass"
    assert reps[0.5].verdict == "warn"  # f_1/2 = 0


def test_sphere_directions_unit_and_seeded():
    a = sphere_directions(3, 50, seed=9)
    np.testing.assert_allclose(np.linalg.norm(a, axis=1), 1.0)
    np.testing.assert_array_equal(a, sphere_directions(3, 50, seed=9))
    assert a.shape == (56, 3)


def test_field_file_round_trip(tmp_path):
    F = corpus_field("random_quartic")
    path = tmp_path / "q.json"
    dump_field(F, path)
    G, doc = load_field(path)
    assert G.f == F.f and G.label == F.label and doc["dim"] == 2


def test_field_file_validation(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"dim": 2, "expr": "x1", "colour": "red"}))
    with pytest.raises(ValueError, match="unknown keys"):
        load_field(p)
    p.write_text(json.dumps({"dim": 0, "expr": "x1"}))
    with pytest.raises(ValueError):
        load_field(p)
    p.write_text(json.dumps({"dim": 1, "expr": "x1"}))
    assert load_field(p)[0].label == "bad"


def test_negated_field():
    F = corpus_field("double_well")
    x = np.array([0.3, 0.7])
    assert F.negated().value(x) == -F.value(x)
    assert evaluate(parse("-(x1^2 - 1)^2 - x2^2", 2), x) == pytest.approx(F.negated().value(x))
