"""Acceptance criteria 1-10. Each test prints one PASS/FAIL line; the lines are also repeated in the
pytest terminal summary so they show up without ``-s``."""

import sys
import time
from fractions import Fraction as F

import numpy as np
import pytest

from affgaudin.algebra import WeightVector, build_algebra, build_module, tensor
from affgaudin.bethe import (EmptyReport, SolveOptions, amm_residuals, bethe_vector, eigentest, kdv_spec,
                             rational_kdv_spec, sl2_affine_spec, solve)
from affgaudin.hamiltonians import (ModelSpec, coset_central_charge, gaudin_quadratic, gko_coset,
                                    two_point_casimir)
from affgaudin.monodromy import Contour, epsilon_linear_term, triviality_scan
from affgaudin.opers import (PowerMap, RationalFunctionC, blz_map, blz_parameters, kdv_delta, local_expansion,
                             no_monodromy_residual, oper_from_bethe, pushforward_oper, pushforward_potential,
                             rational_kdv_oper)
from affgaudin.pipelines import agreement_corpus, conjecture_experiment, dmt_commute, oracle_agreement

SL2 = build_algebra("sl2")
AFF = build_algebra("sl2_affine")


VERDICTS = []


def verdict(n, ok, detail=""):
    line = f"CRITERION {n}: {'PASS' if ok else 'FAIL'} {detail}".rstrip()
    VERDICTS.append(line)
    print(line)
    return ok


def test_criterion_1_finite_gaudin():
    t0 = time.perf_counter()
    spec = ModelSpec("regular_singularities", "sl2", sites=[0, 1], weights=[(1,), (1,)])
    rep = solve(spec, {1: 1}, SolveOptions(seeds=8))
    w = rep.solutions[0].positions[0]
    t = tensor([build_module(SL2, x, "finite_irrep") for x in spec.weights])
    vec = t.to_dense(bethe_vector(rep.solutions[0], t))
    singlet = t.to_dense({(((0, 0),), ()): 1}) - t.to_dense({((), ((0, 0),)): 1})
    cos = abs(np.vdot(singlet, vec)) / (np.linalg.norm(singlet) * np.linalg.norm(vec))
    xi = gaudin_quadratic(spec, t)
    rec = eigentest(bethe_vector(rep.solutions[0], t), xi).records[0]
    sum_zero = (xi[0].matrix + xi[1].matrix).is_zero()
    dt = time.perf_counter() - t0
    ok = (len(rep.solutions) == 1 and abs(w - 0.5) < 1e-12 and abs(cos - 1) < 1e-12
          and abs(rec.eigenvalue - 1.5) < 1e-12 and rec.residual < 1e-12 and sum_zero and dt < 1)
    assert verdict(1, ok, f"w={w.real:.15f} eig={rec.eigenvalue.real:.15f} res={rec.residual:.1e} {dt:.2f}s")


def test_criterion_2_dmt_commutativity():
    t0 = time.perf_counter()
    runs = [dmt_commute("sl2", [F(7, 3)], 199, trials=3, seed=1),
            dmt_commute("sl3", [F(1, 2), F(-1, 3)], 10, trials=3, seed=2)]
    dt = time.perf_counter() - t0
    ok = all(r["verdict"] == "PASS" and r["dim"] <= 200 for r in runs) and dt < 30
    assert verdict(2, ok, f"dims={[r['dim'] for r in runs]} {dt:.1f}s")


def test_criterion_3_affine_dmt():
    t0 = time.perf_counter()
    runs = [dmt_commute("sl2_affine", [F(1)], cap, level=3, trials=1, seed=3) for cap in (1, 2, 3)]
    dt = time.perf_counter() - t0
    ok = all(r["verdict"] == "PASS" for r in runs) and dt < 120
    checks = runs[-1]["checks"][0]
    assert checks["hat_commute"] and checks["tilde_commute"] and checks["tilde_heisenberg"]
    assert verdict(3, ok, f"dims={[r['dim'] for r in runs]} {dt:.1f}s")


def test_criterion_4_affine_pipeline():
    t0 = time.perf_counter()
    rep = solve(sl2_affine_spec(1, 3, 1), {1: 1, 0: 1}, SolveOptions(seeds=16))
    cfg = rep.solutions[0]
    op = oper_from_bethe(cfg)
    # residue of u^2 + u' at w^1 (the oper is built only after this check succeeds)
    from affgaudin.opers import cartan_connection, miura_sl2

    v_full = miura_sl2(cartan_connection(cfg).u, +1)
    lau = v_full.laurent(cfg.of_color(1)[0], 0)
    res_w1 = max(abs(lau.get(-1, 0)), abs(lau.get(-2, 0)))
    nm = max(max(map(abs, no_monodromy_residual(local_expansion(op.v, m.w, 2), m.x0))) for m in op.marked)
    scan = triviality_scan(op)
    dt = time.perf_counter() - t0
    ok = res_w1 < 1e-10 and nm < 1e-10 and scan.passed and scan.max_deviation < 1e-6 and dt < 30
    assert verdict(4, ok, f"res_w1={res_w1:.1e} no_mon={nm:.1e} dev={scan.max_deviation:.1e} {dt:.1f}s")


def test_criterion_5_rational_kdv():
    spec = rational_kdv_spec()
    empty = isinstance(solve(spec, {0: 2}, SolveOptions()), EmptyReport)
    rep = solve(spec, {0: 3}, SolveOptions())
    w = rep.solutions[rep.classes[0][0]].positions
    d = sorted(abs(w[i] - w[j]) for i, j in ((0, 1), (1, 2), (0, 2)))
    tri = len(rep.classes) == 1 and d[2] - d[0] < 1e-9 * d[2]
    amm = float(np.max(np.abs(amm_residuals(w))))
    mono = triviality_scan(rational_kdv_oper(w)).passed
    one = solve(spec, {0: 1}, SolveOptions(seeds=4))
    one_ok = not one.empty and triviality_scan(rational_kdv_oper(one.solutions[0].positions)).passed
    ok = empty and tri and amm < 1e-12 and mono and one_ok
    assert verdict(5, ok, f"empty(m0=2)={empty} triangle={tri} amm={amm:.1e} mono={mono} m0=1:{one_ok}")


def test_criterion_6_blz():
    x = np.linspace(0.3, 2.5, 20) * np.exp(0.1j)
    v = RationalFunctionC({0.4: [0.3, 2]}, [1.0])
    ident = np.max(np.abs(pushforward_potential(v, PowerMap(1), x) - v(x))) < 1e-14
    sq = np.max(np.abs(pushforward_potential(RationalFunctionC(), PowerMap(2), x) - 3 / (4 * x ** 2))) < 1e-12
    rng = np.random.default_rng(6)
    rel = 0.0
    for _ in range(10):
        k, ell = rng.uniform(-1.5, 5), rng.uniform(0, 3)
        b = blz_parameters(ell, k)
        rel = max(rel, abs(b.ell_tilde * (b.ell_tilde + 1) - (4 * (b.alpha + 1) * kdv_delta(ell, k) + b.alpha ** 2 - 0.25)))
    rep = solve(kdv_spec(F(1, 3), F(1, 2)), {0: 2}, SolveOptions(seeds=16))
    op = oper_from_bethe(rep.solutions[0])
    b = blz_map(op)
    xs = rng.uniform(0.3, 2, 20) * np.exp(1j * rng.uniform(-0.2, 0.2, 20))
    push = max(float(np.max(np.abs(pushforward_oper(op, b.chart, xs, lam) - b.potential(xs, lam))))
               for lam in (0, 0.8 + 0.3j))
    ok = ident and sq and rel < 1e-12 and push < 1e-9
    assert verdict(6, ok, f"identity={ident} square={sq} relation={rel:.1e} pushforward={push:.1e}")


def test_criterion_7_gko():
    v = build_module(AFF, WeightVector((F(0),), F(1)), "integrable_quotient", 2)
    t = tensor([v, v], 2)
    xi = two_point_casimir(t)
    gko = gko_coset(v, v, 1, 1, t)
    exact = (xi.matrix + gko.matrix.scale(4)).is_zero()
    c = coset_central_charge(AFF, 1, 1)
    spec = np.real(np.linalg.eigvals((xi.matrix.scale(F(-1, 4))).to_dense().astype(complex)))
    allowed = np.array([a + n for a in (0, 0.5) for n in (0, 1, 2)])
    in_set = all(np.min(np.abs(allowed - e)) < 1e-10 for e in spec)
    ok = exact and c == F(1, 2) and in_set
    assert verdict(7, ok, f"exact={exact} c={c} spectrum={sorted(set(float(x) + 0.0 for x in np.round(spec, 10)))}")


def test_criterion_8_oracle_agreement():
    res = oracle_agreement(agreement_corpus(20, seed=11))
    rows = res["rows"]
    on = sum(r["on_locus"] for r in rows)
    ok = len(rows) >= 20 and on == len(rows) // 2 and res["all_agree"] and res["max_wronskian_deviation"] < 1e-8
    assert verdict(8, ok, f"cases={len(rows)} on_locus={on} agree={res['all_agree']} "
                          f"wronskian={res['max_wronskian_deviation']:.1e}")


def test_criterion_9_linear_term():
    H = np.diag([1.0, -1.0])
    E = np.array([[0, 1.0], [0, 0]])
    cases = [
        (lambda t: 0.3 * H / t, lambda t: H / t),
        (lambda t: 0.1 * H / t + 0.2 * (E + E.T) / t, lambda t: E.T / t + H / t),
        (lambda t: 0.2 * H / t + E + 0.5 * E.T / t ** 2, lambda t: H / t + E * t),
    ]
    errs = []
    for A0, A1 in cases:
        errs.append(epsilon_linear_term(A0, A1, "trace", Contour(0, 1)).relative_error)
    closed = epsilon_linear_term(cases[0][0], cases[0][1], "trace", Contour(0, 1))
    exact = -4 * np.pi * np.sin(0.6 * np.pi)
    ok = max(errs) < 1e-6 and abs(closed.rhs - exact) < 1e-6 * abs(exact)
    assert verdict(9, ok, f"relative errors={[f'{e:.1e}' for e in errs]}")


def test_criterion_10_conjecture_experiments():
    reports = [conjecture_experiment(1, 3, 1, counts, grade_cap=3) for counts in ({1: 1, 0: 1}, {1: 2, 0: 1})]
    produced = all("eigentests" in r for r in reports)
    outcomes = [r["verdict"] for r in reports]
    # conjectural statements: the criterion is that the report is produced, whatever it says
    assert verdict(10, produced, f"experiments={outcomes}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
