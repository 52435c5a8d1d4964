"""Operator-valued trigonometric polynomials, the Hilbert transform and
Lambda_p(T) norms by exact equispaced quadrature."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .lambda_comm import FiniteMeasureSpace, MatrixField, lambda_norm, ratio_report, RatioReport, square_norm
from .linalg import check_dim, spectral_norm


@dataclass(frozen=True)
class TrigPolynomial:
    """f(t) = sum_n coeffs[n] e^{int}; zero coefficients are dropped."""

    opdim: int
    coeffs: Mapping

    def __post_init__(self):
        clean = {}
        for n, c in self.coeffs.items():
            c = np.asarray(c, dtype=complex).reshape(self.opdim, self.opdim)
            if np.any(c):
                clean[int(n)] = c
        object.__setattr__(self, "coeffs", dict(sorted(clean.items())))

    @property
    def degree(self) -> int:
        return max((abs(n) for n in self.coeffs), default=0)

    def coeff(self, n: int) -> np.ndarray:
        return self.coeffs.get(n, np.zeros((self.opdim, self.opdim), dtype=complex))

    def evaluate(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.zeros((t.size, self.opdim, self.opdim), dtype=complex)
        for n, c in self.coeffs.items():
            out += np.exp(1j * n * t)[:, None, None] * c
        return out

    def __add__(self, other: "TrigPolynomial") -> "TrigPolynomial":
        keys = set(self.coeffs) | set(other.coeffs)
        return TrigPolynomial(self.opdim, {n: self.coeff(n) + other.coeff(n) for n in keys})

    def __sub__(self, other: "TrigPolynomial") -> "TrigPolynomial":
        return self + other.scaled(-1)

    def scaled(self, c: complex) -> "TrigPolynomial":
        return TrigPolynomial(self.opdim, {n: c * v for n, v in self.coeffs.items()})


def monomial(n: int, b) -> TrigPolynomial:
    b = np.asarray(b, dtype=complex).reshape(np.shape(b) or (1, 1))
    return TrigPolynomial(b.shape[0], {n: b})


def random_trig(rng: np.random.Generator, degree: int, d: int, support=None) -> TrigPolynomial:
    freqs = range(-degree, degree + 1) if support is None else support
    co = {}
    for n in freqs:
        co[n] = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    return TrigPolynomial(d, co)


def multiplier(n: int) -> complex:
    return -1j * np.sign(n)


def hilbert_transform(f: TrigPolynomial) -> TrigPolynomial:
    return TrigPolynomial(f.opdim, {n: multiplier(n) * c for n, c in f.coeffs.items()})


def trig_conj(f: TrigPolynomial) -> TrigPolynomial:
    """Pointwise conjugate: coefficient n becomes conj of coefficient -n."""
    return TrigPolynomial(f.opdim, {-n: np.conj(c) for n, c in f.coeffs.items()})


def trig_tensor(f: TrigPolynomial, g: TrigPolynomial) -> TrigPolynomial:
    check_dim(f.opdim * g.opdim, "pointwise tensor")
    out: dict = {}
    for n, a in f.coeffs.items():
        for m, b in g.coeffs.items():
            k = np.kron(a, b)
            out[n + m] = out[n + m] + k if (n + m) in out else k
    return TrigPolynomial(f.opdim * g.opdim, out)


def sup_coeff_norm(f: TrigPolynomial) -> float:
    return max((float(np.abs(c).max()) for c in f.coeffs.values()), default=0.0)


@dataclass(frozen=True)
class CotlarReport:
    residual: float
    conj_residual: float
    star_residual: float
    scale: float

    @property
    def worst(self) -> float:
        return max(self.residual, self.conj_residual, self.star_residual)


def cotlar_residuals(f: TrigPolynomial, g: TrigPolynomial) -> CotlarReport:
    T = hilbert_transform
    tf, tg = T(f), T(g)
    lhs = T(trig_tensor(f, g) - trig_tensor(tf, tg))
    rhs = trig_tensor(f, tg) + trig_tensor(tf, g)
    r1 = sup_coeff_norm(lhs - rhs)
    gb = trig_conj(g)
    tgb = T(gb)
    lhs2 = T(trig_tensor(f, gb) - trig_tensor(tf, tgb))
    rhs2 = trig_tensor(f, tgb) + trig_tensor(tf, gb)
    r2 = sup_coeff_norm(lhs2 - rhs2)
    r3 = max(sup_coeff_norm(trig_conj(T(f)) - T(trig_conj(f))), sup_coeff_norm(trig_conj(tg) - tgb))
    scale = max(1.0, sup_coeff_norm(f) * sup_coeff_norm(g))
    return CotlarReport(r1, r2, r3, scale)


def cotlar_residual(f: TrigPolynomial, g: TrigPolynomial) -> float:
    """Largest coefficient defect among the Cotlar identity, its conjugate
    form and conj(Tf) = T(conj f)."""
    return cotlar_residuals(f, g).worst


def quadrature_field(f: TrigPolynomial, nodes: int) -> MatrixField:
    t = 2 * np.pi * np.arange(nodes) / nodes
    return MatrixField(FiniteMeasureSpace.uniform(nodes), f.evaluate(t))


def _nodes(f: TrigPolynomial, p: int, extra: int) -> int:
    return p * f.degree + 1 + int(extra)


def torus_lambda_norm(f: TrigPolynomial, p: int, extra_nodes: int = 0) -> float:
    """Exact Lambda_p(T) norm: the integrand has degree <= p * deg(f)."""
    if int(p) != p or p < 2 or p % 2:
        raise ValueError("p must be an even integer >= 2")
    check_dim(f.opdim ** p, f"Lambda_{p} integrand")
    if not f.coeffs:
        return 0.0
    return lambda_norm(quadrature_field(f, _nodes(f, p, extra_nodes)), p)


def torus_square_norm(s: TrigPolynomial, q: int, extra_nodes: int = 0) -> float:
    """||int s^{(x)q}||^{1/q} for a square-type polynomial s = sum D (x) conj D."""
    if not s.coeffs:
        return 0.0
    return square_norm(quadrature_field(s, q * s.degree + 1 + extra_nodes), q)


def parseval_value(f: TrigPolynomial) -> float:
    """||sum_n f^(n) (x) conj f^(n)||, which equals ||f||_(2)^2."""
    if not f.coeffs:
        return 0.0
    return spectral_norm(sum(np.kron(c, np.conj(c)) for c in f.coeffs.values()))


@dataclass(frozen=True)
class HilbertCbResult:
    p: int
    norm_f: float
    norm_Tf: float
    anchor: str = "hilbert transform on Lambda_p(T): ||Tf|| / ||f|| tracked"

    @property
    def ratio(self) -> float:
        return self.norm_Tf / self.norm_f if self.norm_f > 0 else math.inf

    def as_dict(self) -> dict:
        return {"anchor": self.anchor, "p": self.p, "norm_f": self.norm_f, "norm_Tf": self.norm_Tf, "ratio": self.ratio}


def hilbert_cb_experiment(f: TrigPolynomial, p: int) -> HilbertCbResult:
    return HilbertCbResult(int(p), torus_lambda_norm(f, p), torus_lambda_norm(hilbert_transform(f), p))


def dyadic_blocks(f: TrigPolynomial) -> list[TrigPolynomial]:
    """Delta_n: frequencies 2^n <= k < 2^{n+1}."""
    if any(n <= 0 for n in f.coeffs):
        raise ValueError("Littlewood-Paley blocks need support in n > 0")
    top = max(f.coeffs, default=0)
    blocks = []
    n = 0
    while 2**n <= top:
        lo, hi = 2**n, 2 ** (n + 1)
        blocks.append(TrigPolynomial(f.opdim, {k: c for k, c in f.coeffs.items() if lo <= k < hi}))
        n += 1
    return blocks


def lp_square_function(f: TrigPolynomial) -> TrigPolynomial:
    out = None
    for blk in dyadic_blocks(f):
        if not blk.coeffs:
            continue
        term = trig_tensor(blk, trig_conj(blk))
        out = term if out is None else out + term
    return out if out is not None else TrigPolynomial(f.opdim**2, {})


def littlewood_paley_check(f: TrigPolynomial, p: int) -> RatioReport:
    """||f||_(p) against ||S(f)||_(p/2)^{1/2}; ratio is logged, no constant asserted."""
    lhs = torus_lambda_norm(f, p)
    check_dim(f.opdim ** p, "square function power")
    rhs = torus_square_norm(lp_square_function(f), p // 2) ** 0.5
    rep = ratio_report(lhs, rhs, "littlewood-paley: ||f||_(p) vs ||S(f)||_(p/2)^1/2 (tracked)")
    # the constant is not explicit, so nothing is asserted
    return RatioReport(rep.lhs, rep.rhs, rep.ratio, True, rep.anchor)
