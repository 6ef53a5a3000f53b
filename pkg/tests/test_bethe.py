from fractions import Fraction as F

import numpy as np
import pytest

from affgaudin.algebra import build_algebra, build_module, tensor
from affgaudin.bethe import (BetheConfiguration, EmptyReport, SolveOptions, amm_residuals, bethe_vector,
                             continuation, eigentest, kdv_spec, rational_kdv_spec, residuals, sl2_affine_spec, solve)
from affgaudin.exceptions import DegenerateConfiguration
from affgaudin.hamiltonians import ModelSpec, dmt, gaudin_quadratic

SL2 = build_algebra("sl2")


def test_two_spin_bethe():
    spec = ModelSpec("regular_singularities", "sl2", sites=[0, 1], weights=[(1,), (1,)])
    rep = solve(spec, {1: 1}, SolveOptions(seeds=8))
    assert len(rep.solutions) == 1
    (w, c), = rep.solutions[0].roots
    assert abs(w - 0.5) < 1e-12
    t = tensor([build_module(SL2, x, "finite_irrep") for x in spec.weights])
    vec = bethe_vector(rep.solutions[0], t)
    v = t.to_dense(vec)
    # singlet: f(x)1 - 1(x)f up to scale
    f1 = t.to_dense({((), ((0, 0),)): 1})
    f0 = t.to_dense({(((0, 0),), ()): 1})
    singlet = f0 - f1
    assert abs(abs(np.vdot(singlet, v)) - np.linalg.norm(singlet) * np.linalg.norm(v)) < 1e-12 * np.linalg.norm(v)
    rec = eigentest(vec, gaudin_quadratic(spec, t)).records
    assert abs(rec[0].eigenvalue - 1.5) < 1e-12 and rec[0].residual < 1e-12


def test_trivial_solution():
    spec = ModelSpec("regular_singularities", "sl2", sites=[0, 1], weights=[(1,), (1,)])
    rep = solve(spec, {}, SolveOptions())
    assert len(rep.solutions) == 1 and rep.solutions[0].roots == []


def test_shift_finite_sl2():
    # 2/w + 1 - 2/(w - w') = 0 for both roots: w = -1 +- i
    spec = ModelSpec("shift_argument_finite", "sl2", sites=[0], shift=(F(1),), weights=[(F(2),)])
    rep = solve(spec, {1: 2}, SolveOptions(seeds=16))
    assert len(rep.classes) == 1
    w = sorted(rep.solutions[0].positions, key=lambda z: z.imag)
    assert np.allclose(w, [-1 - 1j, -1 + 1j], atol=1e-10)


def test_sl3_bethe_vectors_are_dmt_eigenvectors():
    alg = build_algebra("sl3")
    spec = ModelSpec("shift_argument_finite", alg, sites=[0], shift=(F(1), F(2)), weights=[(F(1), F(1))])
    rep = solve(spec, {1: 1, 2: 1}, SolveOptions(seeds=24))
    assert rep.solutions
    m = build_module(alg, spec.weights[0], "finite_irrep")
    ops = [dmt(spec, g, m) for g in ((F(1), F(0)), (F(0), F(1)))]
    for cfg in rep.solutions:
        er = eigentest(bethe_vector(cfg, m), ops)
        assert all(r.residual < 1e-10 for r in er.records)


def test_affine_closed_form():
    # u = -chi - l/z + 1/(z - w1) - 1/(z - w0) regular at w1 and u(w0) = -k/(2 w0) give w0 = 5/6, w1 = -5/3
    rep = solve(sl2_affine_spec(1, 3, 1), {1: 1, 0: 1}, SolveOptions(seeds=16))
    assert len(rep.solutions) == 1
    cfg = rep.solutions[0]
    assert abs(cfg.of_color(0)[0] - 5 / 6) < 1e-12
    assert abs(cfg.of_color(1)[0] + 5 / 3) < 1e-12
    assert np.max(np.abs(residuals(cfg))) < 1e-12


def test_affine_single_root():
    # 2l/w + 2 chi - ... halved: l/w + chi = 0 gives w = -1 for l = chi = 1
    rep = solve(sl2_affine_spec(1, 3, 1), {1: 1}, SolveOptions(seeds=8))
    assert abs(rep.solutions[0].positions[0] + 1) < 1e-12


def test_rational_kdv():
    assert isinstance(solve(rational_kdv_spec(), {0: 2}, SolveOptions(seeds=16)), EmptyReport)
    rep = solve(rational_kdv_spec(), {0: 3}, SolveOptions(seeds=16))
    assert len(rep.classes) == 1
    w = rep.solutions[0].positions
    d = sorted(abs(w[i] - w[j]) for i, j in ((0, 1), (1, 2), (0, 2)))
    assert d[2] - d[0] < 1e-10
    assert np.max(np.abs(amm_residuals(w))) < 1e-12


def test_amm_residual_formula():
    w = np.exp(2j * np.pi * np.arange(3) / 3)
    assert np.max(np.abs(amm_residuals(w))) < 1e-14
    assert abs(amm_residuals([0, 1])[0] - 2) < 1e-14  # 2/(w_s - w_j)^3 for a pair


def test_kdv_two_roots():
    rep = solve(kdv_spec(F(1, 3), F(1, 2)), {0: 2}, SolveOptions(seeds=32))
    assert len(rep.solutions) == 2


def test_degenerate_configuration():
    spec = ModelSpec("regular_singularities", "sl2", sites=[0, 1], weights=[(1,), (1,)])
    with pytest.raises(DegenerateConfiguration):
        residuals(BetheConfiguration(spec, [(0.3, 1), (0.3, 1)]))


def test_continuation_tracks_root():
    # w = (z_0 + z_1)/2 for two spin-1/2 sites
    path = continuation(lambda t: ModelSpec("regular_singularities", "sl2", sites=[0, 1 + t],
                                            weights=[(1,), (1,)]), {1: 1}, 0.0, 1.0)
    assert len(path) == 1
    assert abs(path[0].positions[0] - 1.0) < 1e-10


def test_determinism():
    a = solve(sl2_affine_spec(1, 3, 1), {1: 1, 0: 1}, SolveOptions(seeds=8, seed=3))
    b = solve(sl2_affine_spec(1, 3, 1), {1: 1, 0: 1}, SolveOptions(seeds=8, seed=3, threads=4))
    assert a.to_json() == b.to_json()
