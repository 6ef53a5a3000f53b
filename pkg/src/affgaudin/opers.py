"""Rational functions in partial-fraction form, Miura transformation, sl2/sl_n opers and the BLZ map."""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .bethe import BetheConfiguration, _System, amm_residuals
from .exceptions import ForbiddenLevel, InvalidWeight, NotOnBetheLocus, SingularChart, UnsupportedPoleStrength
from .sparse import frac

_MERGE = 1e-13


def _binom_neg(k: int, n: int) -> int:
    """binom(-k, n)."""
    return (-1) ** n * comb(k + n - 1, n)


class RationalFunctionC:
    """sum_p sum_r c_{p,r} (z-p)^{-r} + sum_n a_n z^n with complex coefficients."""

    __slots__ = ("poles", "poly")

    def __init__(self, poles: Optional[Dict[complex, Sequence[complex]]] = None,
                 poly: Optional[Sequence[complex]] = None):
        self.poles: Dict[complex, np.ndarray] = {}
        self.poly = np.trim_zeros(np.asarray(poly if poly is not None else [], dtype=complex), "b")
        for loc, coeffs in (poles or {}).items():
            self._add_pole(complex(loc), np.asarray(coeffs, dtype=complex))

    # construction -----------------------------------------------------------
    @classmethod
    def constant(cls, c) -> "RationalFunctionC":
        return cls(poly=[complex(c)])

    @classmethod
    def pole(cls, loc, order: int = 1, coeff=1.0) -> "RationalFunctionC":
        arr = np.zeros(order, dtype=complex)
        arr[order - 1] = coeff
        return cls({complex(loc): arr})

    @classmethod
    def polynomial(cls, coeffs: Sequence) -> "RationalFunctionC":
        return cls(poly=coeffs)

    def _find(self, loc: complex) -> Optional[complex]:
        for p in self.poles:
            if abs(p - loc) <= _MERGE * max(1.0, abs(p)):
                return p
        return None

    def _add_pole(self, loc: complex, coeffs: np.ndarray):
        hit = self._find(loc)
        if hit is None:
            self.poles[loc] = coeffs.copy()
            return
        a = self.poles[hit]
        n = max(len(a), len(coeffs))
        out = np.zeros(n, dtype=complex)
        out[:len(a)] += a
        out[:len(coeffs)] += coeffs
        self.poles[hit] = out

    def copy(self) -> "RationalFunctionC":
        return RationalFunctionC({p: c.copy() for p, c in self.poles.items()}, self.poly.copy())

    # arithmetic -------------------------------------------------------------
    def __add__(self, other) -> "RationalFunctionC":
        if not isinstance(other, RationalFunctionC):
            other = RationalFunctionC.constant(other)
        out = self.copy()
        for p, c in other.poles.items():
            out._add_pole(p, c)
        n = max(len(out.poly), len(other.poly))
        poly = np.zeros(n, dtype=complex)
        poly[:len(out.poly)] += out.poly
        poly[:len(other.poly)] += other.poly
        out.poly = np.trim_zeros(poly, "b")
        return out

    __radd__ = __add__

    def __neg__(self) -> "RationalFunctionC":
        return RationalFunctionC({p: -c for p, c in self.poles.items()}, -self.poly)

    def __sub__(self, other) -> "RationalFunctionC":
        if not isinstance(other, RationalFunctionC):
            other = RationalFunctionC.constant(other)
        return self + (-other)

    def __rsub__(self, other) -> "RationalFunctionC":
        return (-self) + other

    def scale(self, c) -> "RationalFunctionC":
        c = complex(c)
        return RationalFunctionC({p: c * a for p, a in self.poles.items()}, c * self.poly)

    def __mul__(self, other) -> "RationalFunctionC":
        if not isinstance(other, RationalFunctionC):
            return self.scale(other)
        out = RationalFunctionC()
        # pole x pole
        for p, a in self.poles.items():
            for q, b in other.poles.items():
                for i, ca in enumerate(a, start=1):
                    if ca == 0:
                        continue
                    for j, cb in enumerate(b, start=1):
                        if cb == 0:
                            continue
                        out = out + _pole_product(p, i, q, j).scale(ca * cb)
        # pole x polynomial
        for p, a in self.poles.items():
            for i, ca in enumerate(a, start=1):
                if ca != 0 and len(other.poly):
                    out = out + _pole_times_poly(p, i, other.poly).scale(ca)
        for q, b in other.poles.items():
            for j, cb in enumerate(b, start=1):
                if cb != 0 and len(self.poly):
                    out = out + _pole_times_poly(q, j, self.poly).scale(cb)
        if len(self.poly) and len(other.poly):
            out = out + RationalFunctionC(poly=np.convolve(self.poly, other.poly))
        return out

    def __rmul__(self, other) -> "RationalFunctionC":
        return self.scale(other)

    def derivative(self) -> "RationalFunctionC":
        poles = {}
        for p, a in self.poles.items():
            d = np.zeros(len(a) + 1, dtype=complex)
            for r, c in enumerate(a, start=1):
                d[r] += -r * c
            poles[p] = d
        poly = self.poly[1:] * np.arange(1, len(self.poly)) if len(self.poly) > 1 else []
        return RationalFunctionC(poles, poly)

    # evaluation -------------------------------------------------------------
    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        for p, a in self.poles.items():
            d = z - p
            for r, c in enumerate(a, start=1):
                if c != 0:
                    out = out + c / d ** r
        if len(self.poly):
            out = out + np.polyval(self.poly[::-1], z)
        return out if out.ndim else complex(out)

    def laurent(self, w: complex, order: int) -> Dict[int, complex]:
        """Coefficients of (z-w)^n for n up to ``order``, including the principal part at w."""
        w = complex(w)
        out: Dict[int, complex] = {}
        hit = self._find(w)
        if hit is not None:
            for r, c in enumerate(self.poles[hit], start=1):
                if c != 0:
                    out[-r] = out.get(-r, 0) + c
        for p, a in self.poles.items():
            if p == hit:
                continue
            d = w - p
            for r, c in enumerate(a, start=1):
                if c == 0:
                    continue
                for n in range(order + 1):
                    out[n] = out.get(n, 0) + c * _binom_neg(r, n) * d ** (-r - n)
        for deg, c in enumerate(self.poly):
            for n in range(min(deg, order) + 1):
                out[n] = out.get(n, 0) + c * comb(deg, n) * w ** (deg - n)
        return out

    def pole_order(self, w: complex, tol: float = 0.0) -> int:
        hit = self._find(complex(w))
        if hit is None:
            return 0
        a = self.poles[hit]
        nz = [r for r, c in enumerate(a, start=1) if abs(c) > tol]
        return max(nz) if nz else 0

    def drop_pole(self, w: complex) -> "RationalFunctionC":
        out = self.copy()
        hit = out._find(complex(w))
        if hit is not None:
            del out.poles[hit]
        return out

    def cleaned(self, tol: float = 0.0) -> "RationalFunctionC":
        poles = {}
        for p, a in self.poles.items():
            a = np.where(np.abs(a) > tol, a, 0)
            if np.any(a != 0):
                poles[p] = np.trim_zeros(a, "b")
        poly = np.where(np.abs(self.poly) > tol, self.poly, 0)
        return RationalFunctionC(poles, poly)

    def to_json(self) -> dict:
        return {
            "poles": [{"at": [p.real, p.imag],
                       "coefficients": [[c.real, c.imag] for c in a]} for p, a in sorted(
                           self.poles.items(), key=lambda kv: (kv[0].real, kv[0].imag))],
            "polynomial": [[c.real, c.imag] for c in self.poly],
        }

    def __repr__(self) -> str:
        parts = []
        for p, a in self.poles.items():
            for r, c in enumerate(a, start=1):
                if c != 0:
                    parts.append(f"{c:.6g}/(z-{p:.6g})^{r}")
        for n, c in enumerate(self.poly):
            if c != 0:
                parts.append(f"{c:.6g} z^{n}")
        return "RationalFunctionC(" + (" + ".join(parts) or "0") + ")"


def _pole_product(p: complex, i: int, q: complex, j: int) -> RationalFunctionC:
    """(z-p)^{-i} (z-q)^{-j} in partial fractions."""
    if abs(p - q) <= _MERGE * max(1.0, abs(p)):
        return RationalFunctionC.pole(p, i + j)
    a = np.zeros(i, dtype=complex)
    for n in range(i):
        a[i - n - 1] = _binom_neg(j, n) * (p - q) ** (-j - n)
    b = np.zeros(j, dtype=complex)
    for n in range(j):
        b[j - n - 1] = _binom_neg(i, n) * (q - p) ** (-i - n)
    return RationalFunctionC({p: a, q: b})


def _pole_times_poly(p: complex, i: int, poly: np.ndarray) -> RationalFunctionC:
    """(z-p)^{-i} * sum a_n z^n."""
    # expand the polynomial in powers of (z - p)
    shifted = np.zeros(len(poly), dtype=complex)
    for n, a in enumerate(poly):
        for t in range(n + 1):
            shifted[t] += a * comb(n, t) * p ** (n - t)
    poles = np.zeros(i, dtype=complex)
    reg = np.zeros(max(len(poly) - i, 0), dtype=complex)  # coefficients of (z-p)^s, s >= 0
    for t, c in enumerate(shifted):
        s = t - i
        if s < 0:
            poles[-s - 1] += c
        else:
            reg[s] += c
    poly_z = np.zeros(len(reg), dtype=complex)
    for s, c in enumerate(reg):
        for u in range(s + 1):
            poly_z[u] += c * comb(s, u) * (-p) ** (s - u)
    return RationalFunctionC({p: poles}, poly_z)


# ---------------------------------------------------------------------------
# data types


@dataclass
class CartanConnection:
    """d/dz + u(z) h-component (sl2 case) or per-node components, plus the d-term coefficient."""

    u: Optional[RationalFunctionC]
    chi: complex
    d_term: RationalFunctionC
    components: Dict[int, RationalFunctionC] = field(default_factory=dict)


@dataclass
class MarkedPoint:
    w: complex
    strength: int = 1  # leading coefficient strength(strength+1)
    x0: complex = 0j


@dataclass
class Sl2Oper:
    """d^2 - v(z) - lam * z^k  (or lam * prod (z - z_i)^{k_i})."""

    v: RationalFunctionC
    k: Optional[complex] = 0
    sites: List[complex] = field(default_factory=list)
    exponents: List[complex] = field(default_factory=list)
    marked: List[MarkedPoint] = field(default_factory=list)
    params: dict = field(default_factory=dict)

    order = 2

    def spectral(self, z, branch_point: Optional[complex] = None):
        """z^k (principal branch, or the branch continuous near ``branch_point``)."""
        if self.k is None:
            out = 1
            for zi, ki in zip(self.sites, self.exponents):
                out = out * _power(z - zi, ki, None if branch_point is None else branch_point - zi)
            return out
        return _power(z, self.k, branch_point)

    def potential(self, z, lam: complex, branch_point: Optional[complex] = None):
        return self.v(z) + lam * self.spectral(z, branch_point)

    def singular_points(self) -> List[complex]:
        pts = list(self.v.poles)
        if self.k is not None and not _is_int(self.k):
            pts.append(0j)
        for zi, ki in zip(self.sites, self.exponents):
            if not _is_int(ki):
                pts.append(complex(zi))
        return pts

    def to_json(self) -> dict:
        return {
            "order": 2,
            "v": self.v.to_json(),
            "spectral_exponent": None if self.k is None else [complex(self.k).real, complex(self.k).imag],
            "sites": [[complex(z).real, complex(z).imag] for z in self.sites],
            "exponents": [[complex(x).real, complex(x).imag] for x in self.exponents],
            "marked_points": [{"w": [m.w.real, m.w.imag], "strength": m.strength,
                               "x0": [complex(m.x0).real, complex(m.x0).imag]} for m in self.marked],
            "params": {k: (str(v) if isinstance(v, Fraction) else v) for k, v in self.params.items()},
        }


@dataclass
class SlnOper:
    """(-d)^n - sum_r v_r (-d)^{n-1-r} - lam z^k."""

    n: int
    coeffs: List[RationalFunctionC]
    k: complex = 0
    marked: List[MarkedPoint] = field(default_factory=list)

    @property
    def order(self) -> int:
        return self.n

    def spectral(self, z, branch_point: Optional[complex] = None):
        return _power(z, self.k, branch_point)

    def singular_points(self) -> List[complex]:
        pts = []
        for c in self.coeffs:
            for p in c.poles:
                if all(abs(p - q) > 1e-12 for q in pts):
                    pts.append(p)
        if not _is_int(self.k) and all(abs(q) > 1e-12 for q in pts):
            pts.append(0j)
        return pts


@dataclass
class LocalExpansion:
    w: complex
    leading: complex
    coefficients: Dict[int, complex]

    def __getitem__(self, n: int) -> complex:
        return self.coefficients.get(n, 0j)

    @property
    def pole_order(self) -> int:
        neg = [n for n, c in self.coefficients.items() if n < 0 and c != 0]
        return -min(neg) if neg else 0


def _is_int(x) -> bool:
    x = complex(x)
    return abs(x.imag) < 1e-14 and abs(x.real - round(x.real)) < 1e-14


def _power(z, k, branch_point: Optional[complex] = None):
    """z^k; integer k exactly, otherwise principal branch or the local branch near ``branch_point``."""
    if _is_int(k):
        return np.asarray(z, dtype=complex) ** int(round(complex(k).real))
    z = np.asarray(z, dtype=complex)
    if branch_point is None or branch_point == 0:
        return np.exp(complex(k) * np.log(z))
    b = complex(branch_point)
    return np.exp(complex(k) * (cmath.log(b) + np.log1p((z - b) / b)))


# ---------------------------------------------------------------------------
# operations


def miura_sl2(u: RationalFunctionC, sign: int = 1) -> RationalFunctionC:
    """u^2 + sign * u'."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return u * u + u.derivative().scale(sign)


def _sl2_affine_params(spec):
    ell = spec.weights[0].coords[0] / 2
    k = spec.levels[0] if spec.levels else spec.weights[0].level
    chi = spec.shift.coords[0] / 2 if spec.shift is not None else 0
    return ell, k, chi


def cartan_connection(cfg: BetheConfiguration) -> CartanConnection:
    spec = cfg.model
    alg = spec.algebra
    if alg.is_affine and alg.rank == 1:
        w1, w0 = cfg.of_color(1), cfg.of_color(0)
        if spec.model == "regular_singularities":
            u = RationalFunctionC()
            d = RationalFunctionC()
            for zi, wt, ki in zip(spec.sites, spec.weights, spec.levels):
                u = u + RationalFunctionC.pole(complex(zi), 1, -complex(wt.coords[0]) / 2)
                d = d + RationalFunctionC.pole(complex(zi), 1, complex(ki))
            chi = 0j
        else:
            ell, k, chi = _sl2_affine_params(spec)
            chi = complex(chi)
            u = RationalFunctionC({0j: [-complex(ell)]}, [-chi])
            d = RationalFunctionC.pole(0, 1, complex(k))
        for w in w1:
            u = u + RationalFunctionC.pole(w, 1, 1)
        for w in w0:
            u = u + RationalFunctionC.pole(w, 1, -1)
        return CartanConnection(u, chi, d)
    # finite type: components <alpha_i^vee, -chi - sum nu_s/(z - z_s) + sum alpha_{i_j}/(z - w_j)>
    comps = {}
    for node in alg.nodes:
        chi_i = complex(spec.shift.coords[node - 1]) if spec.shift is not None else 0j
        f = RationalFunctionC.constant(-chi_i)
        sites = spec.sites if spec.model == "regular_singularities" else [0]
        for zs, wt in zip(sites, spec.weights):
            f = f + RationalFunctionC.pole(complex(zs), 1, -complex(wt.coords[node - 1]))
        for w, c in cfg.roots:
            a = alg.cartan_matrix[alg.nodes.index(node)][alg.nodes.index(c)]
            f = f + RationalFunctionC.pole(complex(w), 1, a)
        comps[node] = f
    return CartanConnection(None, 0j, RationalFunctionC(), comps)


def kdv_oper(ell, k, points: Sequence[complex]) -> Sl2Oper:
    """l(l+1)/z^2 + (1 - sum k/w_j)/z + sum [2/(z-w_j)^2 + (k/w_j)/(z-w_j)], for any points."""
    kc = complex(k)
    L = complex(ell * (ell + 1))
    w = [complex(x) for x in points]
    v = RationalFunctionC({0j: [1 - sum(kc / x for x in w), L]})
    for x in w:
        v = v + RationalFunctionC({x: [kc / x, 2]})
    marked = [MarkedPoint(x, 1, kc / x) for x in w]
    return Sl2Oper(v, kc, marked=marked, params={"model": "kdv", "ell": ell, "level": k})


def rational_kdv_oper(points: Sequence[complex], strengths: Optional[Sequence[int]] = None) -> Sl2Oper:
    """sum l_j(l_j+1)/(z-w_j)^2 with spectral exponent 0."""
    w = [complex(x) for x in points]
    ls = list(strengths) if strengths is not None else [1] * len(w)
    v = RationalFunctionC()
    for x, l in zip(w, ls):
        v = v + RationalFunctionC.pole(x, 2, l * (l + 1))
    return Sl2Oper(v, 0, marked=[MarkedPoint(x, l, 0j) for x, l in zip(w, ls)], params={"model": "rational_kdv"})


def oper_from_bethe(cfg: BetheConfiguration, tol: float = 1e-8) -> Sl2Oper:
    """Scalar sl2-affine oper attached to a solved configuration."""
    spec = cfg.model
    model = spec.model
    if model == "kdv":
        sysm = _System(spec, cfg.colors)
        w = cfg.positions
        if len(w) and np.max(np.abs(sysm.residuals(w))) > tol:
            raise NotOnBetheLocus("configuration does not satisfy the no-monodromy equations")
        return kdv_oper(spec.weights[0].coords[0] / 2, spec.levels[0], w)
    if model == "rational_kdv":
        w = cfg.positions
        if len(w) and np.max(np.abs(amm_residuals(w))) > tol:
            raise NotOnBetheLocus("configuration is not on the AMM locus")
        return rational_kdv_oper(w)
    conn = cartan_connection(cfg)
    if conn.u is None:
        raise UnsupportedPoleStrength("scalar opers are built for sl2-affine configurations")
    v = miura_sl2(conn.u, +1)
    for x in cfg.of_color(1):
        lau = v.laurent(x, 0)
        bad = max(abs(lau.get(-1, 0)), abs(lau.get(-2, 0)))
        if bad > tol * max(1.0, max(abs(c) for c in lau.values())):
            raise NotOnBetheLocus(f"v has a pole at w^1 = {x:.6g} (residual {bad:.3g})")
        v = v.drop_pole(x)
    marked = []
    if model == "regular_singularities":
        for x in cfg.of_color(0):
            marked.append(MarkedPoint(x, 1, complex(conn.d_term(x))))
        return Sl2Oper(v, None, sites=[complex(z) for z in spec.sites],
                       exponents=[complex(k) for k in spec.levels], marked=marked,
                       params={"model": model})
    ell, k, chi = _sl2_affine_params(spec)
    for x in cfg.of_color(0):
        marked.append(MarkedPoint(x, 1, complex(k) / x))
    return Sl2Oper(v, complex(k), marked=marked, params={"model": model, "ell": ell, "level": k, "chi": chi})


def local_expansion(v: RationalFunctionC, w: complex, order: int = 2) -> LocalExpansion:
    coeffs = v.laurent(w, order)
    return LocalExpansion(complex(w), coeffs.get(-2, 0j), coeffs)


def no_monodromy_residual(exp: LocalExpansion, x0: complex, tol: float = 1e-9) -> Tuple[complex, complex]:
    """(1/4 x0^3 - v0 x0 + v1, v_{-1} - x0) at a point with leading term 2/(z-w)^2."""
    if abs(exp.leading - 2) > tol * 10 or exp.pole_order > 2:
        raise UnsupportedPoleStrength("leading coefficient must be 2; use amm_residuals for higher strengths")
    x0 = complex(x0)
    r1 = 0.25 * x0 ** 3 - exp[0] * x0 + exp[1]
    r2 = exp[-1] - x0
    return r1, r2


def sln_residue_data(nu: Sequence, n: Optional[int] = None) -> List[Fraction]:
    """c_1..c_{n-1} with (-d)^n - sum c_i z^{-i-1} (-d)^{n-i-1} = prod (-d + nu_i/z)."""
    nu = [frac(x) for x in (nu.coords if hasattr(nu, "coords") else nu)]
    n = len(nu) if n is None else n
    if len(nu) != n:
        raise InvalidWeight("need n components")
    if sum(nu) != 0:
        raise InvalidWeight("components must sum to zero")

    # acting on z^s both sides give (polynomial in s) z^{s-n}
    def rhs(s):
        out = Fraction(1)
        for i, x in enumerate(nu, start=1):
            out *= x - s + n - i
        return out

    def falling(s, j):
        out = Fraction(1)
        for t in range(j):
            out *= s - t
        return out

    def q(s):
        return rhs(s) - (-1) ** n * falling(s, n)

    # Newton forward differences give coordinates in the falling-factorial basis
    vals = [q(Fraction(s)) for s in range(n)]
    coef = []
    for j in range(n):
        d = sum((-1) ** (j - t) * comb(j, t) * vals[t] for t in range(j + 1))
        fact = 1
        for t in range(2, j + 1):
            fact *= t
        coef.append(Fraction(d) / fact)
    # coef[n-1] multiplies F_{n-1}: the subprincipal term, zero when sum nu = 0
    return [-(-1) ** (n - i - 1) * coef[n - i - 1] for i in range(1, n)]


# ---------------------------------------------------------------------------
# changes of coordinates


@dataclass(frozen=True)
class PowerMap:
    """phi(x) = scale * x**power (principal branch)."""

    power: complex = 1.0
    scale: complex = 1.0

    def derivs(self, x):
        p, c = complex(self.power), complex(self.scale)
        x = np.asarray(x, dtype=complex)
        if p != 1 and np.any(x == 0):
            raise SingularChart("power map is not locally invertible at 0")
        xp = x ** int(round(p.real)) if _is_int(p) else np.exp(p * np.log(x))
        return (c * xp, c * p * xp / x, c * p * (p - 1) * xp / x ** 2, c * p * (p - 1) * (p - 2) * xp / x ** 3)

    def inverse(self) -> "PowerMap":
        p, c = complex(self.power), complex(self.scale)
        return PowerMap(1 / p, c ** (-1 / p))


@dataclass(frozen=True)
class ChartMap:
    """General holomorphic change of variables given by phi and its first three derivatives."""

    f: Callable
    df: Callable
    d2f: Callable
    d3f: Callable

    def derivs(self, x):
        return self.f(x), self.df(x), self.d2f(x), self.d3f(x)


def schwarzian(phi, x):
    _, d1, d2, d3 = phi.derivs(x)
    if np.any(np.abs(d1) == 0):
        raise SingularChart("critical point of the change of variables")
    return d3 / d1 - 1.5 * (d2 / d1) ** 2


def pushforward_potential(v, phi, x):
    """v(phi(x)) phi'(x)^2 - 1/2 {phi, x}; ``v`` is a RationalFunctionC or a callable."""
    f0, d1, _, _ = phi.derivs(x)
    if np.any(np.abs(d1) == 0):
        raise SingularChart("critical point of the change of variables")
    return v(f0) * d1 ** 2 - 0.5 * schwarzian(phi, x)


@dataclass
class BLZParams:
    alpha: complex
    p: complex
    ell: complex
    level: complex
    delta: complex
    ell_tilde: complex
    ell_tilde_sq: complex  # ell_tilde (ell_tilde + 1)
    z_points: List[complex]
    e_scale: complex  # E = e_scale * lam
    chart: PowerMap

    def potential(self, x, lam: complex = 0j):
        """W(x) for the operator d_x^2 - W(x) of the mapped Schroedinger problem."""
        x = np.asarray(x, dtype=complex)
        p = self.p
        xp = np.exp(p * np.log(x))
        out = self.ell_tilde_sq / x ** 2 + np.exp((p - 2) * np.log(x))
        for zj in self.z_points:
            g = xp - zj
            d2 = p * (p - 1) * xp / x ** 2 / g - (p * xp / x) ** 2 / g ** 2
            out = out - 2 * d2
        return out - self.e_scale * lam

    def to_json(self) -> dict:
        c = lambda z: [complex(z).real, complex(z).imag]
        return {"alpha": c(self.alpha), "p": c(self.p), "ell_tilde": c(self.ell_tilde),
                "ell_tilde_sq": c(self.ell_tilde_sq), "delta": c(self.delta),
                "z_points": [c(z) for z in self.z_points], "E_scale": c(self.e_scale)}


def kdv_delta(ell, k):
    """Conformal weight ((2l+1)^2 - (k+1)^2) / (4(k+2))."""
    return ((2 * ell + 1) ** 2 - (k + 1) ** 2) / (4 * (k + 2))


def blz_parameters(ell, k, w_points: Sequence[complex] = ()) -> BLZParams:
    k = complex(k)
    if k == -2:
        raise ForbiddenLevel("k = -2 is excluded")
    ell = complex(ell)
    alpha = -(k + 1) / (k + 2)
    p = 2 * alpha + 2
    delta = kdv_delta(ell, k)
    lt2 = 4 * (alpha + 1) * delta + alpha ** 2 - 0.25
    lt = -0.5 + cmath.sqrt(0.25 + lt2)
    return BLZParams(alpha, p, ell, k, delta, lt, lt2, [p ** 2 * complex(w) for w in w_points],
                     -cmath.exp(2 * alpha / (alpha + 1) * cmath.log(p)), PowerMap(p, 1 / p ** 2))


def blz_map(op: Sl2Oper) -> BLZParams:
    ell = op.params.get("ell")
    k = op.params.get("level", op.k)
    if ell is None:
        lau = op.v.laurent(0, 0)
        L = lau.get(-2, 0)
        ell = -0.5 + cmath.sqrt(0.25 + L)
    if k is None or complex(k) == -2:
        raise ForbiddenLevel("k = -2 is excluded")
    return blz_parameters(complex(ell), complex(k), [m.w for m in op.marked])


def pushforward_oper(op: Sl2Oper, phi, x, lam: complex = 0j):
    """Potential of the transformed operator including the spectral term."""
    f0, d1, _, _ = phi.derivs(x)
    return pushforward_potential(op.v, phi, x) + lam * op.spectral(f0) * d1 ** 2


__all__ = [
    "RationalFunctionC", "CartanConnection", "Sl2Oper", "SlnOper", "LocalExpansion", "MarkedPoint",
    "miura_sl2", "cartan_connection", "oper_from_bethe", "kdv_oper", "rational_kdv_oper", "local_expansion", "no_monodromy_residual",
    "amm_residuals", "sln_residue_data", "PowerMap", "ChartMap", "schwarzian", "pushforward_potential",
    "pushforward_oper", "BLZParams", "blz_map", "blz_parameters", "kdv_delta",
]
