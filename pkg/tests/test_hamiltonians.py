from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st

from affgaudin.algebra import WeightVector, build_algebra, build_module, tensor
from affgaudin.exceptions import CriticalLevel, DegenerateSites, SingularShift, ZeroLevel
from affgaudin.hamiltonians import (ModelSpec, affine_dmt, central_charge, conformal_dimension,
                                    coset_central_charge, dmt, gaudin_quadratic, gko_coset, heisenberg_mode,
                                    sugawara_l0, two_point_casimir)

SL2 = build_algebra("sl2")
AFF = build_algebra("sl2_affine")


def two_site(z=(0, 1)):
    spec = ModelSpec("regular_singularities", "sl2", sites=list(z), weights=[(1,), (1,)])
    mods = [build_module(SL2, w, "finite_irrep") for w in spec.weights]
    return spec, tensor(mods)


def test_gaudin_two_spins():
    # Omega = (C_tot - C_1 - C_2)/2 with C(j) = j(j+1)/... in trace-form units: triplet 1/2, singlet -3/2
    spec, t = two_site()
    xi = gaudin_quadratic(spec, t)
    ev = sorted(np.real(xi[0].spectrum()))
    assert np.allclose(ev, [-0.5, -0.5, -0.5, 1.5])
    assert (xi[0].matrix + xi[1].matrix).is_zero()
    assert xi[0].commutator(xi[1]).is_zero()


@given(st.lists(st.fractions(-4, 4, max_denominator=5), min_size=3, max_size=3, unique=True))
def test_gaudin_sum_and_commute(z):
    spec = ModelSpec("regular_singularities", "sl2", sites=z, weights=[(1,), (2,), (1,)])
    t = tensor([build_module(SL2, w, "finite_irrep") for w in spec.weights])
    xi = gaudin_quadratic(spec, t)
    assert (xi[0].matrix + xi[1].matrix + xi[2].matrix).is_zero()
    assert xi[0].commutator(xi[2]).is_zero()


def test_degenerate_sites():
    spec, t = two_site((0, 0))
    with pytest.raises(DegenerateSites, match="sites must be pairwise distinct"):
        gaudin_quadratic(spec, t)


def test_singular_shift():
    spec = ModelSpec("shift_argument_finite", "sl3", sites=[0], shift=(1, -1), weights=[(1, 1)])
    with pytest.raises(SingularShift, match="shift is not regular"):
        spec.shift_pairings()


@given(st.tuples(st.fractions(-3, 3, max_denominator=4), st.fractions(-3, 3, max_denominator=4)),
       st.tuples(st.fractions(-3, 3, max_denominator=4), st.fractions(-3, 3, max_denominator=4)))
def test_dmt_commute_sl3(g1, g2):
    alg = build_algebra("sl3")
    spec = ModelSpec("shift_argument_finite", alg, sites=[0], shift=(F(1), F(1, 3)), weights=[(F(1, 2), F(2))])
    m = build_module(alg, spec.weights[0], "verma", 3)
    assert dmt(spec, g1, m).commutator(dmt(spec, g2, m)).is_zero()


def test_dmt_sl2_eigenvalue():
    # sl2: T = (gamma/chi)(fe + ef); on f^j v of weight nu, fe + ef = 2j(nu-j+1) + ... checked on grade 1
    spec = ModelSpec("shift_argument_finite", "sl2", sites=[0], shift=(F(2),), weights=[(F(3),)])
    m = build_module(SL2, spec.weights[0], "verma", 2)
    T = dmt(spec, (F(2),), m)
    dense = np.real(np.array(T.matrix.to_dense(), dtype=complex))
    # f e + e f = C - h^2/2 with C = h^2/2 + h + 2fe: on weight mu = nu - 2j, fe = j(nu - j + 1)
    expect = [2 * j * (3 - j + 1) + (3 - 2 * j) for j in range(3)]
    assert np.allclose(sorted(np.diag(dense)), sorted(expect))


@pytest.mark.parametrize("cap", [2, 3])
def test_affine_dmt_sl2(cap):
    spec = ModelSpec("shift_argument_affine", AFF, sites=[0], levels=[3], shift=(F(2),), weights=[(F(2),)])
    m = build_module(AFF, WeightVector((F(2),), F(3)), "verma", cap)
    hat1, hat2 = affine_dmt(spec, (F(1),), m), affine_dmt(spec, (F(-3, 2),), m)
    til1, til2 = affine_dmt(spec, (F(1),), m, "tilde"), affine_dmt(spec, (F(5, 7),), m, "tilde")
    assert hat1.commutator(hat2).is_zero()
    assert til1.commutator(til2).is_zero()
    for n in (1, 2):
        assert til1.commutator(heisenberg_mode(m, 1, n)).is_zero()


def test_zero_level():
    spec = ModelSpec("shift_argument_affine", AFF, sites=[0], levels=[0], shift=(F(2),), weights=[(F(2),)])
    m = build_module(AFF, WeightVector((F(2),), F(0)), "verma", 1)
    with pytest.raises(ZeroLevel):
        affine_dmt(spec, (F(1),), m, "tilde")


def test_conformal_data():
    assert conformal_dimension(AFF, (F(1),), F(1)) == F(1, 4)
    assert conformal_dimension(AFF, (F(2),), F(2)) == F(1, 2)
    assert central_charge(AFF, 1) == 1
    assert coset_central_charge(AFF, 1, 1) == F(1, 2)
    with pytest.raises(CriticalLevel):
        central_charge(AFF, -2)


@pytest.mark.parametrize("lab,expect", [((1,), [0.25, 1.25, 2.25]), ((0,), [0, 1, 2])])
def test_sugawara_spectrum(lab, expect):
    m = build_module(AFF, WeightVector(tuple(F(x) for x in lab), F(1)), "integrable_quotient", 2)
    ev = np.unique(np.round(np.real(sugawara_l0(m).spectrum()), 9))
    assert np.allclose(ev, expect)


def test_gko_identity():
    v = build_module(AFF, WeightVector((F(0),), F(1)), "integrable_quotient", 2)
    t = tensor([v, v], 2)
    xi = two_point_casimir(t)
    gko = gko_coset(v, v, 1, 1, t)
    assert (xi.matrix + gko.matrix.scale(4)).is_zero()
    ev = np.unique(np.round(np.real(gko.spectrum()), 9))
    assert np.allclose(ev, [0, 0.5, 1.5, 2])
