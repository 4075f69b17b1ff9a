import cmath
import math

import pytest

import carpetlab


def test_classify_tags():
    assert carpetlab.classify(3, 1 + 0j)["tag"] == "Cantor"
    report = carpetlab.classify(3, 1e-8 + 0j)
    assert report["tag"] == "CantorCircles"
    assert report["k"] == 2


def test_zero_lambda_rejected():
    with pytest.raises(ValueError):
        carpetlab.classify(3, 0j)


def test_critical_points_solve_equation():
    lam = 0.3 - 0.7j
    points = carpetlab.critical_points(4, lam)
    assert len(points) == 8
    for c in points:
        assert abs(c**8 - lam) < 1e-12
    args = [cmath.phase(c) % (2 * math.pi) for c in points]
    assert args == sorted(args)


def test_mcmullen_values():
    assert carpetlab.mcmullen(3, 1, 1) == 2
    assert carpetlab.mcmullen(3, 1, -1) == -2
    with pytest.raises(ArithmeticError):
        carpetlab.mcmullen(3, 1, 0)


def test_carpet_counts_are_python_ints():
    b, den = carpetlab.carpet_counts(3, 6)
    expected = 1
    for i in range(1, 7):
        expected *= 4 * 3**i - 4
    assert b == expected
    assert den == 3**21


def test_squares_and_raster_agree():
    squares = carpetlab.carpet_squares(3, 1)
    assert len(squares) == 8
    rows = carpetlab.rasterize_carpet(3, 1, 3)
    assert sum(map(sum, rows)) == 8
    assert rows[1][1] is False


def test_box_dimension_of_full_square():
    rows = [[True] * 64 for _ in range(64)]
    fit = carpetlab.box_dimension(rows, 6)
    assert fit["slope"] == pytest.approx(2.0)


def test_components_of_first_carpet_level():
    rows = carpetlab.rasterize_carpet(3, 1, 27)
    assert carpetlab.complement_component_count(rows) == 2


def test_high_type_golden_mean():
    quotients, verdict = carpetlab.high_type("0.6180339887498948482045868343656381177203", 1, 20)
    assert verdict == "yes"
    assert quotients == [1] * 20
    _, verdict = carpetlab.high_type("0.6180339887498948482045868343656381177203", 2, 5)
    assert verdict == "no"


def test_cover_bound_small_case():
    assert carpetlab.cover_bound(3, 1, 1.0) == pytest.approx(math.log(8 * math.sqrt(2) / 3))
