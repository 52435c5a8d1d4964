"""Filtrations, martingale differences and square-function inequalities."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .lambda_comm import (
    FiniteMeasureSpace,
    MatrixField,
    RatioReport,
    conditional_expectation,
    conj_field,
    integral_operator,
    lambda_norm,
    pointwise_tensor,
    ratio_report,
    scalar_field,
    square_norm,
)
from .linalg import check_dim, spectral_norm
from .partitions import khintchine_constant

BURKHOLDER4_BOUND = math.sqrt(2) + math.sqrt(3)


def _canon(blocks) -> tuple:
    return tuple(sorted(tuple(sorted(int(i) for i in b)) for b in blocks))


@dataclass(frozen=True)
class Filtration:
    space: FiniteMeasureSpace
    levels: tuple

    def __post_init__(self):
        if not self.space.is_probability:
            raise ValueError("filtrations live on probability spaces")
        levels = tuple(_canon(lv) for lv in self.levels)
        n = self.space.size
        for lv in levels:
            if sorted(i for b in lv for i in b) != list(range(n)):
                raise ValueError("each level must partition the atoms")
        if len(levels[0]) != 1:
            raise ValueError("level 0 must be trivial")
        if any(len(b) != 1 for b in levels[-1]):
            raise ValueError("last level must be discrete")
        for coarse, fine in zip(levels, levels[1:]):
            lab = {}
            for k, b in enumerate(coarse):
                for i in b:
                    lab[i] = k
            if any(len({lab[i] for i in b}) != 1 for b in fine):
                raise ValueError("levels must refine each other")
        object.__setattr__(self, "levels", levels)

    @property
    def depth(self) -> int:
        """Index of the last level."""
        return len(self.levels) - 1

    def expect(self, f: MatrixField, n: int) -> MatrixField:
        n = min(max(n, 0), self.depth)
        return conditional_expectation(f, self.levels[n])


@dataclass(frozen=True)
class DyadicSpace:
    """{-1, 1}^N with uniform weights; level n knows the first n signs."""

    N: int
    space: FiniteMeasureSpace
    filtration: Filtration
    eps: tuple
    atoms: tuple


def dyadic_space(N: int) -> DyadicSpace:
    if N < 1:
        raise ValueError("N must be >= 1")
    check_dim(2**N, "dyadic space")
    atoms = tuple(itertools.product((-1, 1), repeat=N))
    space = FiniteMeasureSpace(np.full(len(atoms), 1.0 / len(atoms)), atoms)
    levels = []
    for n in range(N + 1):
        groups: dict = {}
        for i, a in enumerate(atoms):
            groups.setdefault(a[:n], []).append(i)
        levels.append(tuple(tuple(g) for g in groups.values()))
    fil = Filtration(space, tuple(levels))
    eps = tuple(scalar_field(space, [a[k] for a in atoms]) for k in range(N))
    return DyadicSpace(N, space, fil, eps, atoms)


def rademacher_sum(ds: DyadicSpace, bs: Sequence[np.ndarray]) -> MatrixField:
    """sum_k b_k eps_k as a matrix field."""
    if len(bs) != ds.N:
        raise ValueError("need one coefficient per coordinate")
    bs = [np.asarray(b, dtype=complex).reshape(np.shape(b) or (1, 1)) for b in bs]
    signs = np.array(ds.atoms, dtype=float)  # (atoms, N)
    vals = np.einsum("wk,kij->wij", signs, np.stack(bs))
    return MatrixField(ds.space, vals)


def martingale_differences(f: MatrixField, fil: Filtration) -> list[MatrixField]:
    if not f.space.same_as(fil.space):
        raise ValueError("field and filtration live on different spaces")
    cond = [fil.expect(f, n) for n in range(fil.depth + 1)]
    return [cond[0]] + [b - a for a, b in zip(cond, cond[1:])]


def _sum_fields(fs: Sequence[MatrixField]) -> MatrixField:
    out = fs[0]
    for g in fs[1:]:
        out = out + g
    return out


def square_function(ds: Sequence[MatrixField]) -> MatrixField:
    return _sum_fields([pointwise_tensor(d, conj_field(d)) for d in ds])


def conditioned_square(ds: Sequence[MatrixField], fil: Filtration) -> MatrixField:
    terms = [pointwise_tensor(ds[0], conj_field(ds[0]))]
    for n, d in enumerate(ds[1:], start=1):
        terms.append(fil.expect(pointwise_tensor(d, conj_field(d)), n - 1))
    return _sum_fields(terms)


def _check_p(p: int) -> int:
    if int(p) != p or p < 2 or p % 2:
        raise ValueError(f"p must be an even integer >= 2, got {p}")
    return int(p)


@dataclass(frozen=True)
class BurkholderResult:
    p: int
    x: float
    y: float
    ratio_xy: float
    ratio_yx: float
    bound: float | None
    holds: bool | None
    anchor: str = "burkholder: ||f||_(p) vs ||S(f)||_(p/2)^1/2; p=4 ratios <= sqrt2+sqrt3"

    def as_dict(self) -> dict:
        return {
            "anchor": self.anchor,
            "p": self.p,
            "x": self.x,
            "y": self.y,
            "ratio_xy": self.ratio_xy,
            "ratio_yx": self.ratio_yx,
            "bound": self.bound,
            "holds": self.holds,
        }


def burkholder_experiment(f: MatrixField, fil: Filtration, p: int, slack: float = 1e-6) -> BurkholderResult:
    """x = ||f||_(p), y = ||S(f)||_(p/2)^{1/2}.

    Only p = 4 carries an asserted bound; other p report the ratios.
    """
    p = _check_p(p)
    if p < 4:
        raise ValueError("Burkholder experiments need p >= 4")
    check_dim(f.opdim ** p, f"Lambda_{p} integrand")
    ds = martingale_differences(f, fil)
    x = lambda_norm(f, p)
    y = square_norm(square_function(ds), p // 2) ** 0.5
    rxy = x / y if y > 0 else (0.0 if x == 0 else math.inf)
    ryx = y / x if x > 0 else (0.0 if y == 0 else math.inf)
    if p == 4:
        holds = max(rxy, ryx) <= BURKHOLDER4_BOUND + slack
        return BurkholderResult(p, x, y, rxy, ryx, BURKHOLDER4_BOUND, holds)
    return BurkholderResult(p, x, y, rxy, ryx, None, None)


def _power_norm(s: MatrixField, m: int) -> float:
    """||E(s^{(x)m})||."""
    check_dim(s.opdim ** m, "tensor power")
    return spectral_norm(integral_operator([s] * m))


def dual_doob_check(thetas: Sequence[MatrixField], fil: Filtration, m: int, slack: float = 1e-9) -> RatioReport:
    """alpha = sum_n E_n(theta_n . conj theta_n) against beta = sum_n theta_n . conj theta_n.

    thetas[0] is theta_1.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if not thetas or len(thetas) > fil.depth:
        raise ValueError(f"need 1..{fil.depth} thetas")
    betas = [pointwise_tensor(t, conj_field(t)) for t in thetas]
    alphas = [fil.expect(b, n) for n, b in enumerate(betas, start=1)]
    lhs = _power_norm(_sum_fields(alphas), m)
    rhs = m**m * _power_norm(_sum_fields(betas), m)
    return ratio_report(lhs, rhs, "dual doob: ||E(alpha^m)|| <= m^m ||E(beta^m)||", slack)


def stein_check(xs: Sequence[MatrixField], fil: Filtration, m: int, slack: float = 1e-9) -> RatioReport:
    """v = sum E_{n-1}(x.conj x) . E_{n-1}(conj x . x), delta = sum x.conj x.conj x.x.

    xs[0] is x_1.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if not xs or len(xs) > fil.depth:
        raise ValueError(f"need 1..{fil.depth} fields")
    vs, deltas = [], []
    for n, x in enumerate(xs, start=1):
        xb = conj_field(x)
        a = fil.expect(pointwise_tensor(x, xb), n - 1)
        b = fil.expect(pointwise_tensor(xb, x), n - 1)
        vs.append(pointwise_tensor(a, b))
        deltas.append(pointwise_tensor(pointwise_tensor(x, xb), pointwise_tensor(xb, x)))
    lhs = _power_norm(_sum_fields(vs), m)
    rhs = m**m * _power_norm(_sum_fields(deltas), m)
    return ratio_report(lhs, rhs, "stein: ||E(v^m)|| <= m^m ||E(delta^m)||", slack)


@dataclass(frozen=True)
class RosenthalResult:
    p: int
    norm: float
    sigma_term: float
    diagonal_term: float
    bracket: float
    anchor: str = "burkholder-rosenthal: ||f||_(p) vs [f]_p (ratios tracked, not asserted)"

    @property
    def ratio(self) -> float:
        return self.norm / self.bracket if self.bracket > 0 else math.inf

    def as_dict(self) -> dict:
        return {
            "anchor": self.anchor,
            "p": self.p,
            "norm": self.norm,
            "sigma_term": self.sigma_term,
            "diagonal_term": self.diagonal_term,
            "bracket": self.bracket,
            "ratio": self.ratio,
        }


def rosenthal_bracket(f: MatrixField, fil: Filtration, p: int) -> RosenthalResult:
    """[f]_p = ||sigma(f)||_(p/2)^{1/2} + ||E(D^{p/4})||^{1/p}, D = sum d.d*.d.d*.

    p must be a multiple of 4 so that the diagonal power is an integer.
    """
    p = _check_p(p)
    if p % 4:
        raise ValueError("the diagonal term needs p divisible by 4")
    check_dim(f.opdim ** p, f"Lambda_{p} integrand")
    ds = martingale_differences(f, fil)
    norm = lambda_norm(f, p)
    sig = conditioned_square(ds, fil)
    sigma_term = square_norm(sig, p // 2) ** 0.5
    diag = _sum_fields(
        [pointwise_tensor(pointwise_tensor(d, conj_field(d)), pointwise_tensor(d, conj_field(d))) for d in ds]
    )
    diagonal_term = _power_norm(diag, p // 4) ** (1.0 / p)
    return RosenthalResult(p, norm, sigma_term, diagonal_term, sigma_term + diagonal_term)


@dataclass(frozen=True)
class KhintchineResult:
    p: int
    lhs: float
    rhs: float
    constant: float
    lower_holds: bool
    upper_holds: bool
    anchor: str = "rademacher khintchine: OH norm <= ||sum b eps||_(p) <= C_gauss(p) * OH norm"

    def as_dict(self) -> dict:
        return {
            "anchor": self.anchor,
            "p": self.p,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "constant": self.constant,
            "ratio": self.lhs / self.rhs if self.rhs > 0 else None,
            "lower_holds": self.lower_holds,
            "upper_holds": self.upper_holds,
        }


def rademacher_khintchine(bs: Sequence[np.ndarray], p: int, slack: float = 1e-9) -> KhintchineResult:
    p = _check_p(p)
    ds = dyadic_space(len(bs))
    f = rademacher_sum(ds, bs)
    lhs = lambda_norm(f, p)
    terms = [np.kron(b, np.conj(b)) for b in (np.asarray(b, dtype=complex).reshape(np.shape(b) or (1, 1)) for b in bs)]
    rhs = spectral_norm(sum(terms)) ** 0.5
    c = khintchine_constant("gaussian", p)
    return KhintchineResult(
        p, lhs, rhs, c, rhs <= lhs * (1 + slack) + slack, lhs <= c * rhs * (1 + slack) + slack
    )


@dataclass(frozen=True)
class POrthogonalityResult:
    p: int
    is_p_orthogonal: bool
    max_word_norm: float
    ratio: float | None
    holds: bool | None
    anchor: str = "p-orthogonal sums: ||sum d||_(p) <= (3 pi/2) p max(square terms)"

    def as_dict(self) -> dict:
        return {
            "anchor": self.anchor,
            "p": self.p,
            "is_p_orthogonal": self.is_p_orthogonal,
            "max_word_norm": self.max_word_norm,
            "ratio": self.ratio,
            "holds": self.holds,
        }


P_ORTH_CAP = 10**6


def _word_integral(vals: Sequence[np.ndarray], weights: np.ndarray) -> np.ndarray:
    out = vals[0]
    for v in vals[1:]:
        w, da, _ = out.shape
        db = v.shape[1]
        out = np.einsum("wij,wkl->wikjl", out, v).reshape(w, da * db, da * db)
    return np.tensordot(weights, out, axes=(0, 0))


def p_orthogonality_check(ds: Sequence[MatrixField], p: int, rtol: float = 1e-10, slack: float = 1e-9) -> POrthogonalityResult:
    """Brute-force p-orthogonality test, then the inequality if it applies.

    Words are conj(d_g1) . d_g2 . conj(d_g3) ... over injective g.
    """
    p = _check_p(p)
    k = len(ds)
    if k ** p > P_ORTH_CAP:
        raise ValueError(f"|I|^p = {k ** p} exceeds the enumeration cap {P_ORTH_CAP}")
    space = ds[0].space
    for d in ds[1:]:
        if not d.space.same_as(space):
            raise ValueError("all fields must share the space")
    check_dim(ds[0].opdim ** p, "p-orthogonality word")
    w = space.weights
    sup = max(float(np.abs(d.values).max()) for d in ds) if ds else 0.0
    # entries of each word are bounded by sup^p
    scale = sup**p if sup > 0 else 1.0
    worst = 0.0
    conj_vals = [np.conj(d.values) for d in ds]
    for g in itertools.permutations(range(k), p):
        vals = [conj_vals[g[j]] if j % 2 == 0 else ds[g[j]].values for j in range(p)]
        worst = max(worst, float(np.abs(_word_integral(vals, w)).max()))
    orth = worst <= rtol * scale
    if not orth:
        return POrthogonalityResult(p, False, worst, None, None)
    f = _sum_fields(list(ds))
    lhs = lambda_norm(f, p)
    row = square_norm(_sum_fields([pointwise_tensor(d, conj_field(d)) for d in ds]), p // 2) ** 0.5
    col = square_norm(_sum_fields([pointwise_tensor(conj_field(d), d) for d in ds]), p // 2) ** 0.5
    rhs = 1.5 * math.pi * p * max(row, col)
    rep = ratio_report(lhs, rhs, "", slack)
    return POrthogonalityResult(p, True, worst, rep.ratio, rep.holds)


def random_martingale_field(rng: np.random.Generator, N: int, d: int) -> tuple[DyadicSpace, MatrixField]:
    ds = dyadic_space(N)
    shape = (ds.space.size, d, d)
    vals = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
    return ds, MatrixField(ds.space, vals)
