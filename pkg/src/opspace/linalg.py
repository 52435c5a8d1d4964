"""Dense complex linear algebra and implicit Kronecker-structured operators.

Matrices are plain complex numpy arrays.  A ``KronSumOperator`` stores a sum
of elementary tensors ``a_1 (x) ... (x) a_r`` and applies it to vectors without
materializing the full Kronecker product.
"""
from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from functools import reduce
from typing import Callable, Sequence

import numpy as np

log = logging.getLogger(__name__)

DEFAULT_MAX_DIM = 2**16
DENSE_CROSSOVER = 512
POWER_RTOL = 1e-10
POWER_MAXITER = 10_000
_RESTART_SEED = 20240611


class DimensionError(RuntimeError):
    """Raised when an operator would exceed the configured dimension guard."""

    def __init__(self, dim: int, limit: int, what: str = "operator"):
        self.dim = int(dim)
        self.limit = int(limit)
        super().__init__(
            f"{what} dimension {dim} exceeds the guard {limit} "
            "(raise OPSPACE_MAX_DIM to allow it)"
        )


class ConvergenceError(RuntimeError):
    """Power iteration hit its cap; carries the last two Rayleigh iterates."""

    def __init__(self, last_iterates: tuple[float, float], iterations: int):
        self.last_iterates = last_iterates
        self.iterations = iterations
        super().__init__(
            f"power iteration did not converge in {iterations} steps; "
            f"last Rayleigh iterates {last_iterates[0]!r}, {last_iterates[1]!r}"
        )


class HermiticityError(ValueError):
    def __init__(self, defect: float, allowed: float):
        self.defect = defect
        super().__init__(f"Hermiticity defect {defect:.3e} exceeds {allowed:.3e}")


def max_dim() -> int:
    raw = os.environ.get("OPSPACE_MAX_DIM")
    if raw is None or raw == "":
        return DEFAULT_MAX_DIM
    try:
        val = int(raw)
    except ValueError as exc:
        raise ValueError(f"OPSPACE_MAX_DIM must be an integer, got {raw!r}") from exc
    if val < 1:
        raise ValueError("OPSPACE_MAX_DIM must be positive")
    return val


def check_dim(dim: int, what: str = "operator") -> None:
    limit = max_dim()
    if dim > limit:
        raise DimensionError(dim, limit, what)


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return m


def adjoint(a: np.ndarray) -> np.ndarray:
    return np.conj(a).T


def conj_matrix(a: np.ndarray) -> np.ndarray:
    return np.conj(a)


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-major Kronecker product: block (i, j) equals a[i, j] * b."""
    a, b = as_matrix(a), as_matrix(b)
    check_dim(a.shape[0] * b.shape[0], "kron")
    return np.kron(a, b)


@dataclass(frozen=True)
class KronSumOperator:
    """Sum of elementary tensors, each a tuple of square matrices.

    All terms share the same arity and per-slot dimensions.  The dimension
    guard is applied at construction.
    """

    terms: tuple
    factor_dims: tuple

    def __init__(self, terms: Sequence[Sequence], factor_dims: Sequence[int] | None = None):
        terms = tuple(tuple(as_matrix(a) for a in t) for t in terms)
        if factor_dims is None:
            if not terms:
                raise ValueError("factor_dims required for an empty operator")
            factor_dims = tuple(a.shape[0] for a in terms[0])
        factor_dims = tuple(int(d) for d in factor_dims)
        if any(d < 1 for d in factor_dims):
            raise ValueError("factor dimensions must be positive")
        for t in terms:
            if tuple(a.shape[0] for a in t) != factor_dims:
                raise ValueError(
                    f"term slot dims {[a.shape[0] for a in t]} do not match {list(factor_dims)}"
                )
        check_dim(int(np.prod(factor_dims)), "KronSumOperator")
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "factor_dims", factor_dims)

    @property
    def dim(self) -> int:
        return int(np.prod(self.factor_dims))

    @property
    def arity(self) -> int:
        return len(self.factor_dims)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.dim, self.dim)

    def _apply(self, v: np.ndarray, adjoint_: bool) -> np.ndarray:
        v = np.asarray(v, dtype=complex)
        batch = v.shape[1:] if v.ndim > 1 else ()
        x = v.reshape(self.factor_dims + batch)
        out = np.zeros_like(x)
        for t in self.terms:
            y = x
            for k, a in enumerate(t):
                op = adjoint(a) if adjoint_ else a
                y = np.moveaxis(np.tensordot(op, y, axes=(1, k)), 0, k)
            out += y
        return out.reshape(v.shape)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return self._apply(v, False)

    def rmatvec(self, v: np.ndarray) -> np.ndarray:
        return self._apply(v, True)

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.shape, dtype=complex)
        for t in self.terms:
            out += reduce(np.kron, t)
        return out

    def permute_slots(self, perm: Sequence[int]) -> "KronSumOperator":
        perm = tuple(perm)
        if sorted(perm) != list(range(self.arity)):
            raise ValueError(f"{perm} is not a permutation of the slots")
        return KronSumOperator(
            [tuple(t[i] for i in perm) for t in self.terms],
            tuple(self.factor_dims[i] for i in perm),
        )

    def scaled(self, c: complex) -> "KronSumOperator":
        return KronSumOperator(
            [(c * t[0],) + t[1:] for t in self.terms], self.factor_dims
        )

    def __add__(self, other: "KronSumOperator") -> "KronSumOperator":
        if other.factor_dims != self.factor_dims:
            raise ValueError("slot dimensions differ")
        return KronSumOperator(self.terms + other.terms, self.factor_dims)

    def __sub__(self, other: "KronSumOperator") -> "KronSumOperator":
        return self + other.scaled(-1.0)


@dataclass(frozen=True)
class MatvecOperator:
    """Matrix-free square operator given by a batched matvec and its adjoint.

    ``matvec`` must accept arrays of shape (dim,) or (dim, k).
    """

    dim: int
    matvec: Callable[[np.ndarray], np.ndarray]
    rmatvec: Callable[[np.ndarray], np.ndarray]

    @property
    def shape(self) -> tuple[int, int]:
        return (self.dim, self.dim)

    def to_dense(self) -> np.ndarray:
        return np.asarray(self.matvec(np.eye(self.dim, dtype=complex)))


def _power_run(op, v0: np.ndarray, rtol: float, maxiter: int):
    """Power iteration on op^dagger op.  Returns (sigma, converged, history)."""
    v = v0 / np.linalg.norm(v0)
    prev = None
    lam = 0.0
    for it in range(1, maxiter + 1):
        w = op.matvec(v)
        lam = float(np.real(np.vdot(w, w)))
        u = op.rmatvec(w)
        nu = np.linalg.norm(u)
        if nu == 0.0 or not np.isfinite(nu):
            return 0.0, False, (prev if prev is not None else lam, lam), it
        if prev is not None and abs(lam - prev) <= rtol * abs(lam):
            return float(np.sqrt(lam)), True, (prev, lam), it
        prev = lam
        v = u / nu
    return float(np.sqrt(max(lam, 0.0))), None, (prev, lam), maxiter


def power_norm(op, rtol: float = POWER_RTOL, maxiter: int = POWER_MAXITER) -> float:
    """Largest singular value of a matrix-free operator by power iteration.

    Starts from the normalized all-ones vector.  If that run collapses onto the
    kernel or fails to settle within half the budget, it restarts once from a
    fixed pseudo-random vector.
    """
    n = op.shape[0]
    v0 = np.ones(n, dtype=complex)
    half = max(1, maxiter // 2)
    sigma, ok, hist, its = _power_run(op, v0, rtol, half)
    if ok:
        log.debug("power iteration converged in %d steps", its)
        return sigma
    log.debug("power iteration stagnated after %d steps, restarting", its)
    rng = np.random.default_rng(_RESTART_SEED)
    v1 = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    sigma2, ok2, hist2, its2 = _power_run(op, v1, rtol, maxiter - half)
    if ok2:
        return max(sigma, sigma2)
    if ok2 is False and ok is False:
        # both runs collapsed: the operator annihilates two generic vectors
        # only when it is zero
        return 0.0
    raise ConvergenceError(tuple(hist2), its + its2)


def spectral_norm(op, crossover: int = DENSE_CROSSOVER) -> float:
    """Operator norm (largest singular value).

    Dense SVD when the total dimension is at most ``crossover``; otherwise
    matrix-free power iteration.
    """
    if isinstance(op, (KronSumOperator, MatvecOperator)):
        if op.dim <= crossover:
            return _dense_norm(op.to_dense())
        return power_norm(op)
    m = np.asarray(op, dtype=complex)
    if m.ndim == 0:
        return float(abs(m))
    return _dense_norm(m)


def _dense_norm(m: np.ndarray) -> float:
    if m.size == 0:
        return 0.0
    if not np.any(m):
        return 0.0
    return float(np.linalg.svd(m, compute_uv=False)[0])


def min_eig_hermitian(m: np.ndarray, herm_tol: float = 1e-9) -> float:
    """Smallest eigenvalue of (M + M^dagger)/2, after checking M is Hermitian."""
    m = as_matrix(m)
    scale = 1.0 + _dense_norm(m)
    defect = _dense_norm(m - adjoint(m)) if m.size else 0.0
    if defect > herm_tol * scale:
        raise HermiticityError(defect, herm_tol * scale)
    h = 0.5 * (m + adjoint(m))
    return float(np.linalg.eigvalsh(h)[0])


def random_matrix(rng: np.random.Generator, d: int, scale: float = 1.0) -> np.ndarray:
    """Complex Gaussian d x d matrix with entries of unit variance."""
    return scale * (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
