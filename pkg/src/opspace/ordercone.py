"""The order x < y on tensors whose slots come in conjugate pairs.

An element lives on slots (H_0, ..., H_{2m-1}).  The pairing is a tuple
``order`` of slot indices: ``order[:m]`` are the plain copies K_1..K_m and
``order[m:]`` their conjugates, so slot ``order[j]`` is paired with
``order[m + j]``.  x is positive when it is a finite sum of a (x) conj(a),
which happens exactly when the realigned matrix below is PSD.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .linalg import (
    HermiticityError,
    KronSumOperator,
    check_dim,
    min_eig_hermitian,
    spectral_norm,
)

HERMITICITY_LIMIT = 1e-6


@dataclass(frozen=True)
class PairedTensor:
    value: KronSumOperator
    pairing: tuple

    def __post_init__(self):
        order = tuple(int(i) for i in self.pairing)
        r = self.value.arity
        if r % 2 or sorted(order) != list(range(r)):
            raise ValueError(f"pairing {order} is not a permutation of {r} slots (r even)")
        m = r // 2
        dims = self.value.factor_dims
        for j in range(m):
            if dims[order[j]] != dims[order[m + j]]:
                raise ValueError(
                    f"paired slots {order[j]} and {order[m + j]} have different dimensions"
                )
        object.__setattr__(self, "pairing", order)

    @property
    def m(self) -> int:
        return self.value.arity // 2

    def __add__(self, other: "PairedTensor") -> "PairedTensor":
        _check_compatible(self, other)
        return PairedTensor(self.value + other.value, self.pairing)

    def __sub__(self, other: "PairedTensor") -> "PairedTensor":
        _check_compatible(self, other)
        return PairedTensor(self.value - other.value, self.pairing)

    def scaled(self, c: float) -> "PairedTensor":
        return PairedTensor(self.value.scaled(c), self.pairing)


def standard_pairing(m: int) -> tuple:
    return tuple(range(2 * m))


def paired(terms, pairing: Sequence[int] | None = None) -> PairedTensor:
    op = terms if isinstance(terms, KronSumOperator) else KronSumOperator(terms)
    if pairing is None:
        pairing = standard_pairing(op.arity // 2)
    return PairedTensor(op, tuple(pairing))


def gram_element(vectors_or_mats: Sequence[np.ndarray], weights=None) -> PairedTensor:
    """Sum_k w_k a_k (x) conj(a_k): a canonical positive element."""
    mats = [np.asarray(a, dtype=complex) for a in vectors_or_mats]
    if weights is None:
        weights = np.ones(len(mats))
    return paired([(w * a, np.conj(a)) for w, a in zip(weights, mats)])


def _check_compatible(x: PairedTensor, y: PairedTensor) -> None:
    if x.pairing != y.pairing:
        raise ValueError(f"pairing mismatch: {x.pairing} vs {y.pairing}")
    if x.value.factor_dims != y.value.factor_dims:
        raise ValueError("slot dimension mismatch")


def realign(x: PairedTensor) -> np.ndarray:
    """Matrix of the sesquilinear form attached to x.

    Row index (i, j) runs over entries of the plain part, column index (k, l)
    over entries of the conjugate part.  For a single term P (x) Q this is
    vec(P) vec(Q)^T, so a (x) conj(a) becomes v v^dagger.
    """
    m = x.m
    dims = x.value.factor_dims
    plain = x.pairing[:m]
    conj = x.pairing[m:]
    dp = int(np.prod([dims[i] for i in plain]))
    check_dim(dp * dp, "realigned matrix")
    out = np.zeros((dp * dp, dp * dp), dtype=complex)
    for t in x.value.terms:
        p = np.ones((1, 1), dtype=complex)
        q = np.ones((1, 1), dtype=complex)
        for i in plain:
            p = np.kron(p, t[i])
        for i in conj:
            q = np.kron(q, t[i])
        out += np.outer(p.ravel(), q.ravel())
    return out


def is_positive(x: PairedTensor, tol: float = 1e-9) -> bool:
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    r = realign(x)
    scale = 1.0 + spectral_norm(r)
    defect = spectral_norm(r - np.conj(r).T)
    if defect > HERMITICITY_LIMIT * scale:
        raise HermiticityError(defect, HERMITICITY_LIMIT * scale)
    lam = min_eig_hermitian(r, herm_tol=HERMITICITY_LIMIT)
    return lam >= -tol * scale


def precedes(x: PairedTensor, y: PairedTensor, tol: float = 1e-9) -> bool:
    """x < y in the cone order, i.e. y - x is positive."""
    _check_compatible(x, y)
    return is_positive(y - x, tol)


def tensor_positive_product(x: PairedTensor, y: PairedTensor) -> PairedTensor:
    """x (x) y with plain slots of both first, then both conjugate parts."""
    rx = x.value.arity
    terms = [tx + ty for tx in x.value.terms for ty in y.value.terms]
    dims = x.value.factor_dims + y.value.factor_dims
    mx, my = x.m, y.m
    shifted = tuple(rx + s for s in y.pairing)
    order = x.pairing[:mx] + shifted[:my] + x.pairing[mx:] + shifted[my:]
    return PairedTensor(KronSumOperator(terms, dims), order)


def tensor_power(x: PairedTensor, m: int) -> PairedTensor:
    if m < 1:
        raise ValueError("power must be >= 1")
    out = x
    for _ in range(m - 1):
        out = tensor_positive_product(out, x)
    return out


def cone_norm(x: PairedTensor) -> float:
    return spectral_norm(x.value)
