from fractions import Fraction as F
from itertools import product

import numpy as np
import pytest
from hypothesis import given, strategies as st

from affgaudin.algebra import (LoopAlgebra, SlnRealization, WeightVector, build_algebra, build_module,
                               langlands_dual, shapovalov, tensor)
from affgaudin.exceptions import AlgebraMismatch, InvalidHighestWeight, UnsupportedAlgebra


# textbook Cartan data (Bourbaki labelling, a_ij = <alpha_i^vee, alpha_j>)
@pytest.mark.parametrize("name,cartan,h_dual,n_pos", [
    ("sl2", ((2,),), 2, 1),
    ("sl3", ((2, -1), (-1, 2)), 3, 3),
    ("A3", ((2, -1, 0), (-1, 2, -1), (0, -1, 2)), 4, 6),
    ("B2", ((2, -1), (-2, 2)), 3, 4),
    ("C2", ((2, -2), (-1, 2)), 3, 4),
    ("B3", ((2, -1, 0), (-1, 2, -1), (0, -2, 2)), 5, 9),
    ("C3", ((2, -1, 0), (-1, 2, -2), (0, -1, 2)), 4, 9),
])
def test_root_data(name, cartan, h_dual, n_pos):
    a = build_algebra(name)
    assert a.cartan_matrix == cartan
    assert a.dual_coxeter == h_dual
    assert len(a.positive_roots) == n_pos
    assert a.root_inner(a.highest_root, a.highest_root) == 2


def test_aliases_and_dual():
    assert build_algebra("so5").cartan_matrix == build_algebra("B2").cartan_matrix
    assert build_algebra("sp4").cartan_matrix == build_algebra("C2").cartan_matrix
    assert langlands_dual(build_algebra("B3")).name == "C3"
    assert langlands_dual(build_algebra("sl4")).cartan_matrix == build_algebra("sl4").cartan_matrix


def test_affine_cartan():
    a = build_algebra("sl3_affine")
    assert a.cartan_matrix == ((2, -1, -1), (-1, 2, -1), (-1, -1, 2))
    assert a.nodes == (0, 1, 2)
    assert build_algebra("sl2_affine").cartan_matrix == ((2, -2), (-2, 2))


def test_unsupported():
    for bad in ("G2", "E8", "D4", "B2_affine", "sl1"):
        with pytest.raises(UnsupportedAlgebra):
            build_algebra(bad)


def test_node_zero_pairing():
    a = build_algebra("sl2_affine")
    assert WeightVector((F(1),), F(3)).pair(a, 0) == 2


# --- sl_n realization: structure constants checked against matrix commutators


@pytest.mark.parametrize("n", [2, 3, 4])
def test_realization_brackets(n):
    r = SlnRealization(build_algebra(f"sl{n}"))
    mats = [np.array(m, dtype=object) for m in r.mats]
    for a, b in product(range(len(mats)), repeat=2):
        lhs = mats[a].dot(mats[b]) - mats[b].dot(mats[a])
        rhs = sum((c * mats[k] for k, c in r.bracket(a, b).items()), np.zeros_like(lhs))
        assert (lhs == rhs).all()


@given(st.integers(0, 7), st.integers(0, 7), st.integers(0, 7))
def test_jacobi_sl3(a, b, c):
    r = SlnRealization(build_algebra("sl3"))

    def br(x, y):
        out = {}
        for i, ci in x.items():
            for j, cj in y.items():
                for k, ck in r.bracket(i, j).items():
                    out[k] = out.get(k, 0) + ci * cj * ck
        return {k: v for k, v in out.items() if v}

    ea, eb, ec = {a: 1}, {b: 1}, {c: 1}
    tot = {}
    for x in (br(ea, br(eb, ec)), br(eb, br(ec, ea)), br(ec, br(ea, eb))):
        for k, v in x.items():
            tot[k] = tot.get(k, 0) + v
    assert all(v == 0 for v in tot.values())


# --- modules


def partitions_upto(n):
    p = [1] + [0] * n
    for k in range(1, n + 1):
        for m in range(k, n + 1):
            p[m] += p[m - k]
    return p


def theta_dims(shift, n):
    """Grade dims of level-1 sl2 integrable modules: sum_m q^{m^2 + shift*m} / prod (1 - q^j)."""
    p = partitions_upto(n)
    lat = [0] * (n + 1)
    for m in range(-n - 1, n + 2):
        e = m * m + shift * m
        if 0 <= e <= n:
            lat[e] += 1
    return [sum(lat[i] * p[g - i] for i in range(g + 1)) for g in range(n + 1)]


def weyl_dim(alg, lab):
    num, den = F(1), F(1)
    rho = alg.rho
    for r in alg.positive_roots:
        num *= alg.root_weight_inner(r, tuple(a + b for a, b in zip(lab, rho)))
        den *= alg.root_weight_inner(r, rho)
    return num / den


def test_verma_sl2_dims():
    m = build_module(build_algebra("sl2"), WeightVector((F(1, 3),)), "verma", 3)
    assert m.grade_dims() == [1, 1, 1, 1]


@pytest.mark.parametrize("lab", [(2,), (1, 0), (1, 1), (2, 1), (0, 3)])
def test_finite_irrep_weyl_dimension(lab):
    alg = build_algebra(f"sl{len(lab) + 1}")
    m = build_module(alg, WeightVector(tuple(F(x) for x in lab)), "finite_irrep")
    assert m.dim == weyl_dim(alg, lab)


@pytest.mark.parametrize("lab,shift", [((0,), 0), ((1,), 1)])
def test_level_one_characters(lab, shift):
    a = build_algebra("sl2_affine")
    m = build_module(a, WeightVector(tuple(F(x) for x in lab), F(1)), "integrable_quotient", 3)
    assert m.grade_dims() == theta_dims(shift, 3)


def test_tensor_level_one_dims():
    a = build_algebra("sl2_affine")
    v = build_module(a, WeightVector((F(0),), F(1)), "integrable_quotient", 2)
    t = tensor([v, v], 2)
    d = theta_dims(0, 2)
    assert t.grade_dims() == [sum(d[i] * d[g - i] for i in range(g + 1)) for g in range(3)]
    with pytest.raises(AlgebraMismatch):
        tensor([v, build_module(build_algebra("sl2"), WeightVector((F(1),)), "finite_irrep")])


def test_invalid_highest_weight():
    with pytest.raises(InvalidHighestWeight):
        build_module(build_algebra("sl2"), WeightVector((F(-1),)), "finite_irrep")
    with pytest.raises(InvalidHighestWeight):
        build_module(build_algebra("sl2_affine"), WeightVector((F(3),), F(2)), "integrable_quotient", 1)


@given(st.fractions(min_value=-5, max_value=5, max_denominator=7))
def test_shapovalov_sl2(n):
    m = build_module(build_algebra("sl2"), WeightVector((n,)), "verma", 2)
    assert shapovalov(m, 1).determinant() == n
    assert shapovalov(m, 2).determinant() == 2 * n * (n - 1)


@given(st.integers(0, 7), st.integers(0, 7), st.integers(0, 30))
def test_verma_is_representation(a, b, seed):
    """[x, y] acts as x y - y x on an sl3 Verma module (exact)."""
    alg = build_algebra("sl3")
    m = build_module(alg, WeightVector((F(1, 2), F(-2, 3))), "verma", 4)
    loop = LoopAlgebra(alg)
    rng = np.random.default_rng(seed)
    basis = [k for k in m.basis if m.block_of(k)[0] <= 2]
    vec = {basis[int(i)]: F(int(rng.integers(-3, 4))) for i in rng.integers(0, len(basis), 3)}
    x, y = (0, a), (0, b)
    xy = m.act(x, m.act(y, vec))
    yx = m.act(y, m.act(x, vec))
    br = m.act_combo(loop.bracket(x, y), vec)
    keys = set(xy) | set(yx) | set(br)
    assert all(xy.get(k, 0) - yx.get(k, 0) == br.get(k, 0) for k in keys)


def test_affine_representation_relation():
    """[e_1 t, f_1 t^-1] = h_1 + K on an affine Verma module."""
    a = build_algebra("sl2_affine")
    m = build_module(a, WeightVector((F(1),), F(3)), "verma", 3)
    loop = LoopAlgebra(a)
    e, f = loop.e((1,), 1), loop.f((1,), -1)
    for key in m.basis[:10]:
        v = {key: F(1)}
        lhs = {}
        for k, c in m.act(e, m.act(f, v)).items():
            lhs[k] = lhs.get(k, 0) + c
        for k, c in m.act(f, m.act(e, v)).items():
            lhs[k] = lhs.get(k, 0) - c
        rhs = m.act_combo(loop.bracket(e, f), v)
        keys = set(lhs) | set(rhs)
        if m.block_of(key)[0] < 3:
            assert all(lhs.get(k, 0) == rhs.get(k, 0) for k in keys)
