from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st

from affgaudin.exceptions import ContourConflict
from affgaudin.monodromy import (Contour, contour_for, default_lambda_grid, epsilon_linear_term, monodromy_matrix,
                                 triviality_scan)
from affgaudin.opers import RationalFunctionC, Sl2Oper, SlnOper, rational_kdv_oper, sln_residue_data

R = RationalFunctionC
H = np.diag([1.0, -1.0])
E = np.array([[0, 1.0], [0, 0]])


def test_free_operator():
    r = monodromy_matrix(Sl2Oper(R(), 0), Contour(0.3, 1.0), 1)
    assert r.deviation_from_identity < 1e-10


@pytest.mark.parametrize("lam", [0, 1, 1j])
def test_spherical_bessel(lam):
    # e^{+-sqrt(lam) z}(1 -+ 1/(sqrt(lam) z)) are single valued
    r = monodromy_matrix(Sl2Oper(R.pole(0, 2, 2), 0), Contour(0, 1.0), lam)
    assert r.deviation_from_identity < 1e-9
    assert r.wronskian_deviation < 1e-9


def test_half_integer_exponents():
    r = monodromy_matrix(Sl2Oper(R.pole(0, 2, 0.75), 0), Contour(0, 1.0), 0)
    assert r.deviation_from_identity > 0.5
    assert np.allclose(r.eigenvalues(), [-1, -1], atol=1e-8)


def test_sln_frobenius_exponents():
    nu = (F(1, 3), F(0), F(-1, 3))
    c = sln_residue_data(nu)
    op = SlnOper(3, [R.pole(0, i + 2, float(ci)) for i, ci in enumerate(c)], 0)
    r = monodromy_matrix(op, Contour(0, 1.0), 0)
    ev = r.eigenvalues()
    for want in np.exp(2j * np.pi * np.array([1 / 3, 0, -1 / 3])):
        assert np.min(np.abs(ev - want)) < 1e-8
    assert r.wronskian_deviation < 1e-8


def test_sln_integer_exponents_trivial():
    c = sln_residue_data((2, 0, -2))
    op = SlnOper(3, [R.pole(0, i + 2, float(ci)) for i, ci in enumerate(c)], 0)
    assert monodromy_matrix(op, Contour(0, 1.0), 0).deviation_from_identity < 1e-8


def test_triangle_pass():
    w = np.exp(2j * np.pi * np.arange(3) / 3)
    rep = triviality_scan(rational_kdv_oper(w))
    assert rep.passed and len(rep.lam_grid) == 9


def test_single_pole_pass():
    assert triviality_scan(rational_kdv_oper([1])).passed


def test_perturbed_fails():
    op = Sl2Oper(R({1: [0.1, 2]}), 0, marked=rational_kdv_oper([1]).marked)
    rep = triviality_scan(op)
    assert not rep.passed and rep.max_deviation > 1e-3


@given(st.floats(0.2, 0.45))
def test_radius_invariance(r):
    w = np.exp(2j * np.pi * np.arange(3) / 3)
    op = Sl2Oper(R.pole(0, 2, 0.75) + rational_kdv_oper(w).v, 0)
    a = monodromy_matrix(op, Contour(0, r), 0.5)
    b = monodromy_matrix(op, Contour(0, 0.5), 0.5)
    # base points differ, so compare conjugation invariants
    assert abs(np.trace(a.matrix) - np.trace(b.matrix)) < 1e-8
    assert np.allclose(np.sort_complex(np.round(a.eigenvalues(), 9)), np.sort_complex(np.round(b.eigenvalues(), 9)))


def test_contour_conflicts():
    op = Sl2Oper(R.pole(1, 2, 2), 0.5)
    with pytest.raises(ContourConflict):
        monodromy_matrix(op, Contour(0, 1.0), 0)
    with pytest.raises(ContourConflict):
        monodromy_matrix(Sl2Oper(R.pole(1, 2, 2), 0), Contour(0, 1.0), 0)
    with pytest.raises(ContourConflict):
        contour_for(op, 0)
    # non-integer exponent, contour avoiding 0: fine and radius shrinks below |w|
    c = contour_for(op, 1)
    assert c.radius < 1


def test_noninteger_exponent_locus():
    from affgaudin.bethe import SolveOptions, kdv_spec, solve
    from affgaudin.opers import oper_from_bethe

    rep = solve(kdv_spec(F(1, 3), F(1, 2)), {0: 2}, SolveOptions(seeds=16))
    for cfg in rep.solutions:
        assert triviality_scan(oper_from_bethe(cfg)).passed


def test_default_grid():
    g = default_lambda_grid()
    assert g[0] == 0 and np.allclose(np.abs(g[1:]), 1) and len(g) == 9


@pytest.mark.parametrize("c", [0.3, 0.17, 0.41])
def test_linear_term_diagonal(c):
    res = epsilon_linear_term(lambda t: c * H / t, lambda t: H / t, "trace", Contour(0, 1))
    exact = -4 * np.pi * np.sin(2 * np.pi * c)
    assert abs(res.rhs - exact) < 1e-9 * abs(exact)
    assert res.relative_error < 1e-6


def test_linear_term_trivial_cases():
    res = epsilon_linear_term(lambda t: 0.3 * H / t, lambda t: 0 * H, "trace", Contour(0, 1))
    assert abs(res.lhs) < 1e-10 and abs(res.rhs) < 1e-10
    res = epsilon_linear_term(lambda t: 0 * H, lambda t: E, "trace", Contour(0, 1))
    assert abs(res.lhs) < 1e-10 and abs(res.rhs) < 1e-10


def test_linear_term_nondiagonal():
    res = epsilon_linear_term(lambda t: 0.2 * H / t + E + 0.5 * E.T / t ** 2, lambda t: H / t + E * t,
                              "trace", Contour(0, 1))
    assert res.relative_error < 1e-6 and abs(res.lhs) > 1e-2
    res = epsilon_linear_term(lambda t: 0.2 * H / t + E, lambda t: H / t + E.T, "trace^2", Contour(0, 1))
    assert res.relative_error < 1e-6
