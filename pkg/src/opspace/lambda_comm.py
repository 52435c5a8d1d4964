"""Operator-valued functions on finite measure spaces and their Lambda_p norms.

A field takes one square matrix per atom.  The Lambda_p norm (p = 2m) is

    || int f^{(x)m} (x) conj(f)^{(x)m} dmu ||^{1/2m}

computed through a Kronecker-sum operator with one term per atom.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .linalg import KronSumOperator, check_dim, spectral_norm


@dataclass(frozen=True)
class FiniteMeasureSpace:
    weights: np.ndarray
    points: tuple = ()

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).ravel()
        if w.size == 0 or np.any(w <= 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and strictly positive")
        object.__setattr__(self, "weights", w)
        pts = tuple(self.points) if self.points else tuple(range(w.size))
        if len(pts) != w.size:
            raise ValueError("points and weights differ in length")
        object.__setattr__(self, "points", pts)

    @property
    def size(self) -> int:
        return self.weights.size

    @property
    def is_probability(self) -> bool:
        return abs(self.weights.sum() - 1.0) <= 1e-12

    @classmethod
    def uniform(cls, n: int) -> "FiniteMeasureSpace":
        return cls(np.full(n, 1.0 / n))

    def same_as(self, other: "FiniteMeasureSpace") -> bool:
        return self is other or (
            self.points == other.points and np.array_equal(self.weights, other.weights)
        )


@dataclass(frozen=True)
class MatrixField:
    space: FiniteMeasureSpace
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.ndim == 1:
            v = v.reshape(-1, 1, 1)
        if v.ndim != 3 or v.shape[1] != v.shape[2]:
            raise ValueError(f"values must have shape (atoms, d, d), got {v.shape}")
        if v.shape[0] != self.space.size:
            raise ValueError("one value per atom is required")
        object.__setattr__(self, "values", v)

    @property
    def opdim(self) -> int:
        return self.values.shape[1]

    def __add__(self, other: "MatrixField") -> "MatrixField":
        _same_space(self, other)
        return MatrixField(self.space, self.values + other.values)

    def __sub__(self, other: "MatrixField") -> "MatrixField":
        _same_space(self, other)
        return MatrixField(self.space, self.values - other.values)

    def scaled(self, c: complex) -> "MatrixField":
        return MatrixField(self.space, c * self.values)


def _same_space(f: MatrixField, g: MatrixField) -> None:
    if not f.space.same_as(g.space):
        raise ValueError("fields live on different measure spaces")


def constant_field(space: FiniteMeasureSpace, b) -> MatrixField:
    b = np.asarray(b, dtype=complex).reshape(np.shape(b) or (1, 1))
    return MatrixField(space, np.broadcast_to(b, (space.size,) + b.shape).copy())


def scalar_field(space: FiniteMeasureSpace, values) -> MatrixField:
    return MatrixField(space, np.asarray(values, dtype=complex).reshape(-1, 1, 1))


def zero_like(f: MatrixField) -> MatrixField:
    return MatrixField(f.space, np.zeros_like(f.values))


def random_field(rng: np.random.Generator, space: FiniteMeasureSpace, d: int) -> MatrixField:
    shape = (space.size, d, d)
    v = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
    return MatrixField(space, v)


def batch_kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Atomwise Kronecker product of stacks of matrices."""
    w, da, _ = a.shape
    db = b.shape[1]
    return np.einsum("wij,wkl->wikjl", a, b).reshape(w, da * db, da * db)


def pointwise_tensor(f: MatrixField, g: MatrixField) -> MatrixField:
    _same_space(f, g)
    check_dim(f.opdim * g.opdim, "pointwise tensor")
    return MatrixField(f.space, batch_kron(f.values, g.values))


def conj_field(f: MatrixField) -> MatrixField:
    return MatrixField(f.space, np.conj(f.values))


def tensor_product_fields(fs: Sequence[MatrixField]) -> MatrixField:
    out = fs[0]
    for g in fs[1:]:
        out = pointwise_tensor(out, g)
    return out


def field_power(f: MatrixField, m: int) -> MatrixField:
    if m < 1:
        raise ValueError("power must be >= 1")
    return tensor_product_fields([f] * m)


def integrate(f: MatrixField) -> np.ndarray:
    return np.tensordot(f.space.weights, f.values, axes=(0, 0))


def integral_operator(fs: Sequence[MatrixField]) -> KronSumOperator:
    """int f_1 (x) ... (x) f_k dmu as an implicit Kronecker sum."""
    space = fs[0].space
    for g in fs[1:]:
        _same_space(fs[0], g)
    terms = []
    for w, vals in zip(space.weights, zip(*[g.values for g in fs])):
        terms.append((w * vals[0],) + tuple(vals[1:]))
    return KronSumOperator(terms, tuple(g.opdim for g in fs))


def _check_even(p: int) -> int:
    if int(p) != p or p < 2 or p % 2:
        raise ValueError(f"p must be an even integer >= 2, got {p}")
    return int(p) // 2


def lambda_norm(f: MatrixField, p: int) -> float:
    m = _check_even(p)
    check_dim(f.opdim ** p, f"Lambda_{p} integrand")
    fb = conj_field(f)
    op = integral_operator([f] * m + [fb] * m)
    return spectral_norm(op) ** (1.0 / p)


def square_norm(s: MatrixField, q: int) -> float:
    """||int s^{(x)q}||^{1/q} for a self-conjugate square-type field.

    For s = sum d (x) conj(d), conj(s) is s with its two slots swapped, so this
    equals lambda_norm(s, q) whenever q is even.  It also gives the natural
    value when q is odd (q = 1 returns ||int s||).
    """
    if int(q) != q or q < 1:
        raise ValueError("q must be a positive integer")
    check_dim(s.opdim ** q, f"square-function power {q}")
    return spectral_norm(integral_operator([s] * int(q))) ** (1.0 / q)


def conditional_expectation(f: MatrixField, blocks: Sequence[Sequence[int]]) -> MatrixField:
    """mu-weighted block averages."""
    n = f.space.size
    seen = sorted(i for b in blocks for i in b)
    if seen != list(range(n)):
        raise ValueError("blocks must partition the atoms")
    w = f.space.weights
    out = np.empty_like(f.values)
    for b in blocks:
        b = list(b)
        if not b:
            raise ValueError("empty block")
        avg = np.tensordot(w[b], f.values[b], axes=(0, 0)) / w[b].sum()
        out[b] = avg
    return MatrixField(f.space, out)


@dataclass(frozen=True)
class RatioReport:
    lhs: float
    rhs: float
    ratio: float
    holds: bool
    anchor: str

    def as_dict(self) -> dict:
        return {
            "anchor": self.anchor,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "ratio": self.ratio,
            "holds": self.holds,
        }


def ratio_report(lhs: float, rhs: float, anchor: str, slack: float = 1e-9) -> RatioReport:
    if rhs > 0:
        ratio = lhs / rhs
    else:
        ratio = 0.0 if lhs <= slack else float("inf")
    return RatioReport(float(lhs), float(rhs), float(ratio), bool(ratio <= 1 + slack), anchor)


def holder_check(fs: Sequence[MatrixField], p: int) -> RatioReport:
    _check_even(p)
    if len(fs) != p:
        raise ValueError(f"need exactly p = {p} fields")
    check_dim(int(np.prod([g.opdim for g in fs])), "Holder integrand")
    lhs = spectral_norm(integral_operator(fs))
    rhs = float(np.prod([lambda_norm(g, p) for g in fs]))
    return ratio_report(lhs, rhs, "holder: ||int f1..fp|| <= prod ||fk||_(p)")


def cauchy_schwarz_check(f: MatrixField, g: MatrixField) -> RatioReport:
    lhs = spectral_norm(integral_operator([f, g]))
    a = spectral_norm(integral_operator([f, conj_field(f)]))
    b = spectral_norm(integral_operator([g, conj_field(g)]))
    return ratio_report(lhs, np.sqrt(a * b), "cauchy-schwarz: ||int f.g|| <= ||int f.f*||^1/2 ||int g.g*||^1/2")


def generalized_cs_check(a_s: Sequence[MatrixField], b_s: Sequence[MatrixField], m: int) -> RatioReport:
    """||E((sum a_k.b_k)^m)|| against the two conjugate-square bounds."""

    if m < 1 or len(a_s) != len(b_s) or not a_s:
        raise ValueError("need m >= 1 and two nonempty sequences of equal length")

    def power_int(xs, ys):
        total = pointwise_tensor(xs[0], ys[0])
        for x, y in zip(xs[1:], ys[1:]):
            total = total + pointwise_tensor(x, y)
        return spectral_norm(integral_operator([total] * m))

    lhs = power_int(a_s, b_s)
    ra = power_int(a_s, [conj_field(a) for a in a_s])
    rb = power_int(b_s, [conj_field(b) for b in b_s])
    return ratio_report(lhs, np.sqrt(ra * rb), "generalized cauchy-schwarz for sums of products")


@dataclass(frozen=True)
class LinfReport:
    p_list: tuple
    norms: tuple
    sup_norm: float
    gap: float
    monotone: bool
    bounded: bool
    anchor: str = "Lambda_p norms increase to the sup norm"


def linf_limit_check(f: MatrixField, p_list: Sequence[int], slack: float = 1e-9) -> LinfReport:
    if not f.space.is_probability:
        raise ValueError("linf_limit_check needs a probability space")
    ps = tuple(sorted(int(p) for p in p_list))
    norms = tuple(lambda_norm(f, p) for p in ps)
    sup = max(float(np.linalg.norm(v, 2)) for v in f.values)
    mono = all(b >= a - slack for a, b in zip(norms, norms[1:]))
    bounded = all(x <= sup + slack for x in norms)
    return LinfReport(ps, norms, sup, sup - norms[-1], mono, bounded)
