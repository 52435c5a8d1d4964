"""Set partitions, pair partitions, Moebius functions and pairing constants.

Positions are 0-based: a partition of n covers {0, ..., n-1}.  Blocks are
sorted tuples and are ordered by their smallest element.
"""
from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

MAX_SET_N = 12
MAX_PAIR_N = 16
MAX_PAIR_MOMENT_P = 14
MAX_LAMBDA_ENUM = 10**7


@dataclass(frozen=True, order=True)
class SetPartition:
    n: int
    blocks: tuple

    def __post_init__(self):
        blocks = tuple(sorted(tuple(sorted(int(i) for i in b)) for b in self.blocks))
        flat = [i for b in blocks for i in b]
        if any(len(b) == 0 for b in blocks):
            raise ValueError("blocks must be nonempty")
        if sorted(flat) != list(range(self.n)):
            raise ValueError(f"blocks {blocks} do not partition range({self.n})")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def from_labels(cls, labels: Sequence) -> "SetPartition":
        groups: dict = {}
        for i, lab in enumerate(labels):
            groups.setdefault(lab, []).append(i)
        return cls(len(labels), tuple(tuple(g) for g in groups.values()))

    def labels(self) -> tuple:
        lab = [0] * self.n
        for k, b in enumerate(self.blocks):
            for i in b:
                lab[i] = k
        return tuple(lab)

    def __len__(self) -> int:
        return len(self.blocks)

    def block_sizes(self) -> tuple:
        return tuple(len(b) for b in self.blocks)


def finest(n: int) -> SetPartition:
    return SetPartition(n, tuple((i,) for i in range(n)))


def coarsest(n: int) -> SetPartition:
    return SetPartition(n, (tuple(range(n)),))


PairPartition = SetPartition


def is_pair_partition(p: SetPartition) -> bool:
    return all(len(b) == 2 for b in p.blocks)


def _growth_strings(n: int):
    if n == 0:
        yield ()
        return
    a = [0] * n
    maxes = [0] * n

    def rec(i):
        if i == n:
            yield tuple(a)
            return
        top = maxes[i - 1] + 1
        for v in range(top + 1):
            a[i] = v
            maxes[i] = max(maxes[i - 1], v)
            yield from rec(i + 1)

    a[0] = 0
    maxes[0] = 0
    yield from rec(1)


def enumerate_partitions(n: int) -> list[SetPartition]:
    if n < 1 or n > MAX_SET_N:
        raise ValueError(f"n must be in 1..{MAX_SET_N}")
    return [SetPartition.from_labels(s) for s in _growth_strings(n)]


def _pairings(items: tuple):
    if not items:
        yield ()
        return
    first, rest = items[0], items[1:]
    for k in range(len(rest)):
        pair = (first, rest[k])
        for tail in _pairings(rest[:k] + rest[k + 1:]):
            yield (pair,) + tail


def iter_pairings(n: int):
    """Yield pairings of range(n) as tuples of (a, b) with a < b."""
    if n % 2:
        return
    yield from _pairings(tuple(range(n)))


def enumerate_pair_partitions(n: int) -> list[SetPartition]:
    if n < 0 or n % 2:
        raise ValueError("n must be even")
    if n > MAX_PAIR_N:
        raise ValueError(f"n must be <= {MAX_PAIR_N}")
    return [SetPartition(n, pr) for pr in iter_pairings(n)]


def leq(pi: SetPartition, sigma: SetPartition) -> bool:
    """True when every block of pi lies inside a block of sigma."""
    if pi.n != sigma.n:
        raise ValueError("partitions of different sets")
    lab = sigma.labels()
    return all(len({lab[i] for i in b}) == 1 for b in pi.blocks)


def _mu_full(k: int) -> int:
    # Moebius value from the bottom to the top of the lattice of a k-set
    return (-1) ** (k - 1) * math.factorial(k - 1)


def mobius(pi: SetPartition) -> int:
    """mu(0, pi) as a product over block sizes."""
    r = Counter(len(b) for b in pi.blocks)
    out = 1
    for i, ri in r.items():
        out *= _mu_full(i) ** ri
    return out


def mobius_interval(pi: SetPartition, sigma: SetPartition) -> int:
    """mu(pi, sigma) for pi <= sigma.

    The interval [pi, sigma] is a product of full partition lattices, one per
    block of sigma, of rank given by the number of pi-blocks it contains.
    """
    if not leq(pi, sigma):
        return 0
    lab = sigma.labels()
    counts = Counter(lab[b[0]] for b in pi.blocks)
    out = 1
    for k in counts.values():
        out *= _mu_full(k)
    return out


def mobius_recursive(pi: SetPartition, sigma: SetPartition, universe: Sequence[SetPartition] | None = None) -> int:
    """mu(pi, sigma) from the defining recursion; slow, used as a cross-check."""
    if universe is None:
        universe = enumerate_partitions(pi.n)
    between = [r for r in universe if leq(pi, r) and leq(r, sigma)]
    between.sort(key=lambda r: -len(r))  # finer first
    mu: dict = {}
    for r in between:
        if r == pi:
            mu[r] = 1
        else:
            mu[r] = -sum(v for q, v in mu.items() if leq(q, r) and q != r)
    return mu.get(sigma, 0)


def crossing_number(nu: SetPartition) -> int:
    pairs = [b for b in nu.blocks]
    if not all(len(b) == 2 for b in pairs):
        raise ValueError("crossing number needs a pair partition")
    c = 0
    for (a, b), (x, y) in itertools.combinations(pairs, 2):
        if a < x < b < y or x < a < y < b:
            c += 1
    return c


def _crossings_of_pairs(pairs) -> int:
    c = 0
    for i in range(len(pairs)):
        a, b = pairs[i]
        for j in range(i + 1, len(pairs)):
            x, y = pairs[j]
            if a < x < b < y or x < a < y < b:
                c += 1
    return c


@lru_cache(maxsize=None)
def crossing_distribution(p: int) -> tuple:
    """Counts of pairings of range(p) by crossing number (index = crossings)."""
    if p % 2 or p < 0:
        raise ValueError("p must be even")
    if p > MAX_PAIR_MOMENT_P:
        raise ValueError(f"p must be <= {MAX_PAIR_MOMENT_P}")
    counts = Counter(_crossings_of_pairs(pr) for pr in iter_pairings(p))
    top = max(counts) if counts else 0
    return tuple(counts.get(i, 0) for i in range(top + 1))


PSI_KINDS = ("gaussian", "q_gaussian", "free", "spin")


def psi_value(kind: str, nu: SetPartition, q: float | None = None) -> float:
    """Signed moment function on pairings."""
    c = crossing_number(nu)
    if kind == "gaussian":
        return 1.0
    if kind == "free":
        return 1.0 if c == 0 else 0.0
    if kind == "spin":
        return float((-1) ** c)
    if kind == "q_gaussian":
        if q is None:
            raise ValueError("q_gaussian needs q")
        return float(q) ** c
    raise ValueError(f"unknown moment function {kind!r}")


def pairing_mass(kind: str, p: int, q: float | None = None) -> float:
    """Sum over pairings of |psi|."""
    if int(p) != p or p < 2 or p % 2:
        raise ValueError("p must be an even integer >= 2")
    dist = crossing_distribution(int(p))
    if kind in ("gaussian", "spin"):
        return float(sum(dist))
    if kind == "free":
        return float(dist[0])
    if kind == "q_gaussian":
        if q is None or not -1 <= q <= 1:
            raise ValueError("q_gaussian needs q in [-1, 1]")
        aq = abs(float(q))
        return float(sum(cnt * (aq ** c if c else 1.0) for c, cnt in enumerate(dist)))
    raise ValueError(f"unknown moment function {kind!r}")


def khintchine_constant(kind: str, p: int, q: float | None = None) -> float:
    return pairing_mass(kind, p, q) ** (1.0 / p)


def double_factorial(n: int) -> int:
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def catalan(m: int) -> int:
    return math.comb(2 * m, m) // (m + 1)


# ---- Moebius decomposition of a multilinear form -------------------------


def _form_value(phi: np.ndarray, vecs: Sequence[np.ndarray]) -> complex:
    out = phi
    for v in vecs:
        out = np.tensordot(out, v, axes=(0, 0))
    return complex(out)


@dataclass(frozen=True)
class MobiusDecomposition:
    lhs: complex
    rhs: complex
    residual: float
    scale: float


def mobius_decomposition(phi: np.ndarray, d: np.ndarray) -> MobiusDecomposition:
    """Compare phi(F_1..F_n) with Phi(0) - sum_{pi > 0} Psi(pi) mu(0, pi).

    phi has shape (e_1, ..., e_n); d has shape (|I|, n, e) with d[i, k] the
    vector d_i(k) (padded to a common length e).
    """
    n = phi.ndim
    size_i = d.shape[0]
    if n > 6 or size_i > 4:
        raise ValueError("need n <= 6 and |I| <= 4")
    dims = phi.shape
    vec = lambda i, k: d[i, k, : dims[k]]
    big_f = [sum(vec(i, k) for i in range(size_i)) for k in range(n)]
    lhs = _form_value(phi, big_f)

    phi0 = 0j
    for g in itertools.permutations(range(size_i), n):
        phi0 += _form_value(phi, [vec(g[k], k) for k in range(n)])

    rhs = phi0
    scale = 0.0
    for pi in enumerate_partitions(n):
        if len(pi) == n:
            continue
        psi = 0j
        for assign in itertools.product(range(size_i), repeat=len(pi)):
            g = [0] * n
            for b, i in zip(pi.blocks, assign):
                for pos in b:
                    g[pos] = i
            val = _form_value(phi, [vec(g[k], k) for k in range(n)])
            psi += val
            scale = max(scale, abs(val))
        rhs -= psi * mobius(pi)
    scale = max(scale, abs(lhs), 1.0)
    return MobiusDecomposition(lhs, rhs, float(abs(lhs - rhs)), scale)


def mobius_decomposition_check(n: int, seed: int = 0, index_size: int = 3, vec_dim: int = 2) -> float:
    """Relative residual of the decomposition on a random complex instance."""
    if n < 1 or n > 6 or index_size < 1 or index_size > 4:
        raise ValueError("need 1 <= n <= 6 and 1 <= |I| <= 4")
    rng = np.random.default_rng(seed)
    shape = (vec_dim,) * n
    phi = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    d = rng.standard_normal((index_size, n, vec_dim)) + 1j * rng.standard_normal((index_size, n, vec_dim))
    res = mobius_decomposition(phi, d)
    return res.residual / res.scale


# ---- Lambda(p)-set counting ----------------------------------------------


def _alt_sums(E: Sequence[int], p: int, plus: bool) -> Counter:
    if int(p) != p or p < 2 or p % 2:
        raise ValueError("p must be an even integer >= 2")
    E = sorted(set(int(t) for t in E))
    k = p // 2
    if len(E) ** k > MAX_LAMBDA_ENUM:
        raise ValueError(f"|E|^(p/2) = {len(E) ** k} exceeds {MAX_LAMBDA_ENUM}")
    signs = [1 if (plus or j % 2 == 0) else -1 for j in range(k)]
    out: Counter = Counter()
    for g in itertools.permutations(E, k):
        out[sum(s * t for s, t in zip(signs, g))] += 1
    return out


def lambda_set_count(E: Iterable[int], p: int, gamma: int, plus: bool = False) -> int:
    """Injective g: [1..p/2] -> E with g1 - g2 + g3 - ... = gamma (or plain sums)."""
    return _alt_sums(list(E), p, plus).get(int(gamma), 0)


def lambda_set_Z(E: Iterable[int], p: int, plus: bool = False) -> int:
    counts = _alt_sums(list(E), p, plus)
    return max(counts.values()) if counts else 0


def lacunary_khintchine_check(E: Sequence[int], bs: Sequence[np.ndarray], p: int, plus: bool = False, slack: float = 1e-9):
    """||sum_t b(t) e^{it.}||_(p) against ((4Z)^{1/p} + 9 pi p / 8) ||sum b (x) conj b||^{1/2}.

    The left side is the exact Lambda_p(T) norm.  With plus=True the count
    Z_+ of plain sums replaces Z; the same constant is used.
    """
    from .hilbert_torus import TrigPolynomial, torus_lambda_norm
    from .lambda_comm import ratio_report
    from .linalg import spectral_norm

    E = [int(t) for t in E]
    if len(set(E)) != len(E) or len(bs) != len(E):
        raise ValueError("E must be distinct, with one coefficient per frequency")
    bs = [np.asarray(b, dtype=complex).reshape(np.shape(b) or (1, 1)) for b in bs]
    z = lambda_set_Z(E, p, plus=plus)
    f = TrigPolynomial(bs[0].shape[0], dict(zip(E, bs)))
    lhs = torus_lambda_norm(f, p)
    oh = spectral_norm(sum(np.kron(b, np.conj(b)) for b in bs)) ** 0.5
    rhs = ((4 * z) ** (1.0 / p) + (9 * math.pi / 8) * p) * oh
    return ratio_report(lhs, rhs, "lacunary khintchine: ||sum b(t) e_t||_(p) <= ((4Z)^(1/p) + 9 pi p/8) OH norm", slack)
