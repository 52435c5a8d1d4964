"""Wick pairing moments and Ginibre trace moments.

Complex entries follow g = (xi + i eta)/sqrt(2), so E|g|^2 = 1 and E g^2 = 0;
only Y / Y* pairings contribute to trace moments.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .partitions import SetPartition, iter_pairings

MAX_WORD = 12


def wick_scalar_moment(cov: np.ndarray, word: Sequence[int]) -> complex:
    """E(X_{w1} ... X_{wk}) for a centered Gaussian family.

    ``cov[i, j]`` is the pair expectation E(X_i X_j) (the covariance for real
    variables); the moment is the sum over pairings of products of pair
    expectations.
    """
    cov = np.asarray(cov)
    word = [int(i) for i in word]
    if len(word) > MAX_WORD:
        raise ValueError(f"word length is capped at {MAX_WORD}")
    if len(word) % 2:
        return 0j
    total = 0j
    for pairs in iter_pairings(len(word)):
        term = 1 + 0j
        for a, b in pairs:
            term *= cov[word[a], word[b]]
            if term == 0:
                break
        total += term
    return complex(total)


def _find(parent, i):
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


def ginibre_pairing_weight(nu: SetPartition | Sequence, N: int, p: int) -> float:
    """E tau_N of the word Y Y* Y Y* ... (length p) restricted to pairing nu.

    Positions are 0-based; even positions carry Y, odd ones Y*.  Nonzero only
    when every pair joins a Y with a Y*; then N^{c - 1 - p/2} with c the
    number of index classes forced around the trace.
    """
    pairs = nu.blocks if isinstance(nu, SetPartition) else tuple(tuple(b) for b in nu)
    if p % 2 or len(pairs) * 2 != p:
        raise ValueError("nu must pair all p positions")
    parent = list(range(p))

    def union(i, j):
        ri, rj = _find(parent, i % p), _find(parent, j % p)
        if ri != rj:
            parent[ri] = rj

    for a, b in pairs:
        if (a % 2) == (b % 2):
            return 0.0
        y, ys = (a, b) if a % 2 == 0 else (b, a)
        # Y at y is g[i_y, i_{y+1}]; Y* at ys is conj g[i_{ys+1}, i_ys]
        union(y, ys + 1)
        union(y + 1, ys)
    c = len({_find(parent, i) for i in range(p)})
    return float(N) ** (c - 1 - p // 2)


def _check(N: int, p: int) -> None:
    if N < 1:
        raise ValueError("N must be >= 1")
    if int(p) != p or p < 2 or p % 2:
        raise ValueError("p must be an even integer >= 2")
    if p > MAX_WORD:
        raise ValueError(f"p is capped at {MAX_WORD}")


def moment_exact(N: int, p: int) -> float:
    """E tau_N(|Y|^p) as a sum of pairing weights."""
    _check(N, p)
    return float(sum(ginibre_pairing_weight(pr, N, p) for pr in iter_pairings(p)))


def rm_khintchine_constant(N: int, p: int) -> float:
    return moment_exact(N, p) ** (1.0 / p)


@dataclass(frozen=True)
class GinibreSpec:
    N: int
    seed: int = 0


@dataclass(frozen=True)
class MomentEstimate:
    estimate: float
    stderr: float
    exact: float
    samples: int

    @property
    def within(self) -> bool:
        return abs(self.estimate - self.exact) <= 4 * self.stderr

    def as_dict(self) -> dict:
        return {
            "estimate": self.estimate,
            "stderr": self.stderr,
            "exact": self.exact,
            "samples": self.samples,
            "within_4_sigma": self.within,
        }


def sample_ginibre(rng: np.random.Generator, N: int, count: int) -> np.ndarray:
    shape = (count, N, N)
    g = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2)
    return g / math.sqrt(N)


def moment_mc(spec: GinibreSpec, p: int, samples: int, chunk: int = 20_000) -> MomentEstimate:
    _check(spec.N, p)
    if samples < 1000:
        raise ValueError("need at least 1000 samples")
    rng = np.random.default_rng(spec.seed)
    vals = []
    left = samples
    while left > 0:
        k = min(chunk, left)
        y = sample_ginibre(rng, spec.N, k)
        yy = y @ np.conj(np.swapaxes(y, 1, 2))
        acc = yy
        for _ in range(p // 2 - 1):
            acc = acc @ yy
        vals.append(np.real(np.trace(acc, axis1=1, axis2=2)) / spec.N)
        left -= k
    v = np.concatenate(vals)
    return MomentEstimate(float(v.mean()), float(v.std(ddof=1) / math.sqrt(v.size)), moment_exact(spec.N, p), samples)
