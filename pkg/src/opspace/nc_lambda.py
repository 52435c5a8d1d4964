"""Lambda_p over the matrix algebra M_n with a (normalized) trace.

An element f = sum_{a,b} B[a, b] (x) e_ab is stored as an array of shape
(n, n, d, d).  Products contract the matrix index and Kronecker the B slots:

    (f . g)[a, c] = sum_b B[a, b] (x) C[b, c].

Traces of long products are applied matrix-free by a transfer recursion over
the cyclic index chain, which is what lets p = 16 run at dim 2^16.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .lambda_comm import MatrixField, RatioReport, ratio_report
from .linalg import MatvecOperator, check_dim, spectral_norm


@dataclass(frozen=True)
class NcElement:
    blocks: np.ndarray = field(repr=False)
    weight: float | None = None  # trace weight; None means 1/n

    def __post_init__(self):
        b = np.asarray(self.blocks, dtype=complex)
        if b.ndim != 4 or b.shape[0] != b.shape[1] or b.shape[2] != b.shape[3]:
            raise ValueError(f"blocks must have shape (n, n, d, d), got {b.shape}")
        object.__setattr__(self, "blocks", b)
        w = 1.0 / b.shape[0] if self.weight is None else float(self.weight)
        if w <= 0:
            raise ValueError("trace weight must be positive")
        object.__setattr__(self, "weight", w)

    @property
    def n(self) -> int:
        return self.blocks.shape[0]

    @property
    def opdim(self) -> int:
        return self.blocks.shape[2]

    def dense(self) -> np.ndarray:
        """Canonical (d n) x (d n) form, B slot first."""
        n, d = self.n, self.opdim
        return self.blocks.transpose(2, 0, 3, 1).reshape(d * n, d * n)

    def __add__(self, other: "NcElement") -> "NcElement":
        _same(self, other)
        return NcElement(self.blocks + other.blocks, self.weight)

    def __sub__(self, other: "NcElement") -> "NcElement":
        _same(self, other)
        return NcElement(self.blocks - other.blocks, self.weight)

    def scaled(self, c: complex) -> "NcElement":
        return NcElement(c * self.blocks, self.weight)


def _same(f: NcElement, g: NcElement) -> None:
    if f.n != g.n or f.opdim != g.opdim:
        raise ValueError("elements differ in n or opdim")
    if not math.isclose(f.weight, g.weight):
        raise ValueError("elements use different trace weights")


def nc_from_terms(terms: Sequence[tuple], weight: float | None = None) -> NcElement:
    """Build sum_k b_k (x) x_k from (b_k, x_k) pairs."""
    out = None
    for b, x in terms:
        b = np.asarray(b, dtype=complex).reshape(np.shape(b) or (1, 1))
        x = np.asarray(x, dtype=complex).reshape(np.shape(x) or (1, 1))
        blk = np.einsum("ab,ij->abij", x, b)
        out = blk if out is None else out + blk
    return NcElement(out, weight)


def nc_from_dense(m: np.ndarray, d: int, n: int, weight: float | None = None) -> NcElement:
    m = np.asarray(m, dtype=complex).reshape(d, n, d, n)
    return NcElement(m.transpose(1, 3, 0, 2), weight)


def nc_diagonal(bs: Sequence, weight: float | None = None) -> NcElement:
    """sum_j b_j (x) e_jj."""
    bs = [np.asarray(b, dtype=complex).reshape(np.shape(b) or (1, 1)) for b in bs]
    n, d = len(bs), bs[0].shape[0]
    blk = np.zeros((n, n, d, d), dtype=complex)
    for j, b in enumerate(bs):
        blk[j, j] = b
    return NcElement(blk, weight)


def nc_row(bs: Sequence, weight: float | None = None) -> NcElement:
    """sum_j b_j (x) e_{1j}."""
    bs = [np.asarray(b, dtype=complex).reshape(np.shape(b) or (1, 1)) for b in bs]
    n, d = len(bs), bs[0].shape[0]
    blk = np.zeros((n, n, d, d), dtype=complex)
    for j, b in enumerate(bs):
        blk[0, j] = b
    return NcElement(blk, weight)


def nc_column(bs: Sequence, weight: float | None = None) -> NcElement:
    """sum_j b_j (x) e_{j1}."""
    row = nc_row(bs, weight)
    return NcElement(row.blocks.transpose(1, 0, 2, 3).copy(), row.weight)


def nc_identity(d: int, n: int, weight: float | None = None) -> NcElement:
    return nc_from_terms([(np.eye(d), np.eye(n))], weight)


def random_nc(rng: np.random.Generator, d: int, n: int, weight: float | None = None) -> NcElement:
    shape = (n, n, d, d)
    return NcElement((rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2), weight)


def nc_star(f: NcElement) -> NcElement:
    return NcElement(np.conj(f.blocks.transpose(1, 0, 2, 3)), f.weight)


def nc_product(f: NcElement, g: NcElement) -> NcElement:
    if f.n != g.n:
        raise ValueError("elements differ in n")
    d1, d2 = f.opdim, g.opdim
    check_dim(d1 * d2, "nc product")
    out = np.einsum("abij,bckl->acikjl", f.blocks, g.blocks).reshape(f.n, f.n, d1 * d2, d1 * d2)
    return NcElement(out, f.weight)


def hat_tau(f: NcElement) -> np.ndarray:
    return f.weight * np.einsum("aaij->ij", f.blocks)


def chain_operator(fs: Sequence[NcElement]) -> MatvecOperator:
    """Matrix-free hat_tau(f_1 . f_2 . ... . f_k).

    The result acts on C^{d_1} (x) ... (x) C^{d_k}.  For a vector v the index
    chain a_1 -> a_2 -> ... -> a_{k+1} = a_1 is summed by a transfer state
    W[a_1, a_j] carried along the slots.
    """
    n = fs[0].n
    for g in fs[1:]:
        if g.n != n:
            raise ValueError("elements differ in n")
    dims = tuple(g.opdim for g in fs)
    total = int(np.prod(dims))
    check_dim(total, "trace chain")
    w = fs[0].weight

    def apply(v: np.ndarray, adj: bool) -> np.ndarray:
        v = np.asarray(v, dtype=complex)
        batch = v.shape[1:] if v.ndim > 1 else ()
        x = v.reshape(dims + batch)
        # state axes: (a1, current index, slots..., batch)
        state = np.zeros((n, n) + x.shape, dtype=complex)
        for a in range(n):
            state[a, a] = x
        for k, g in enumerate(fs):
            blk = g.blocks
            if adj:
                # adjoint of sum B[a,b] on slot k is sum conj(B[a,b]).T
                blk = np.conj(blk.transpose(0, 1, 3, 2))
            # contract previous index b and the input slot; new index c
            state = np.tensordot(state, blk, axes=([1, 2 + k], [0, 3]))
            # axes are now (a1, other slots..., batch..., c, out); put c back
            # as the running index and out into slot k
            state = np.moveaxis(state, [-2, -1], [1, 2 + k])
        out = np.einsum("aa...->...", state)
        return w * out.reshape(v.shape)

    return MatvecOperator(total, lambda v: apply(v, False), lambda v: apply(v, True))


def chain_norm(fs: Sequence[NcElement]) -> float:
    return spectral_norm(chain_operator(fs))


def _check_p(p: int) -> int:
    if int(p) != p or p < 2 or p % 2:
        raise ValueError(f"p must be an even integer >= 2, got {p}")
    return int(p)


def nc_lambda_norm(f: NcElement, p: int) -> float:
    """||hat_tau((f* . f)^{p/2})||^{1/p}."""
    p = _check_p(p)
    check_dim(f.opdim ** p, f"Lambda_{p} trace chain")
    fs = nc_star(f)
    return chain_norm([fs, f] * (p // 2)) ** (1.0 / p)


def nc_holder_check(fs: Sequence[NcElement], slack: float = 1e-9) -> RatioReport:
    p = _check_p(len(fs))
    lhs = chain_norm(fs)
    rhs = float(np.prod([nc_lambda_norm(g, p) for g in fs]))
    return ratio_report(lhs, rhs, "nc holder: ||tau(f1..fp)|| <= prod ||fj||_(p)", slack)


def nc_cauchy_schwarz_check(fs: Sequence[NcElement], gs: Sequence[NcElement], slack: float = 1e-9) -> RatioReport:
    """||sum tau(f_k* . g_k)|| <= ||sum tau(f_k* . f_k)||^1/2 ||sum tau(g_k* . g_k)||^1/2."""

    def total(xs, ys):
        return sum(hat_tau(nc_product(nc_star(x), y)) for x, y in zip(xs, ys))

    lhs = spectral_norm(total(fs, gs))
    rhs = math.sqrt(spectral_norm(total(fs, fs)) * spectral_norm(total(gs, gs)))
    return ratio_report(lhs, rhs, "haagerup cauchy-schwarz for the trace", slack)


@dataclass(frozen=True)
class BlockSubalgebra:
    """Block subalgebra of M_n attached to an interval partition.

    kind="full": block-diagonal matrices (sum of full matrix blocks), with the
    pinching as conditional expectation.  kind="scalar": the commutative span
    of the block projections, with block trace averaging.
    """

    blocks: tuple
    kind: str = "full"

    def __post_init__(self):
        blocks = tuple(tuple(int(i) for i in b) for b in self.blocks)
        flat = [i for b in blocks for i in b]
        if sorted(flat) != list(range(len(flat))) or any(not b for b in blocks):
            raise ValueError("blocks must partition 0..n-1")
        for b in blocks:
            if list(b) != list(range(b[0], b[0] + len(b))):
                raise ValueError(f"block {b} is not an interval")
        if self.kind not in ("full", "scalar"):
            raise ValueError("kind must be 'full' or 'scalar'")
        object.__setattr__(self, "blocks", tuple(sorted(blocks)))

    @property
    def n(self) -> int:
        return sum(len(b) for b in self.blocks)


def full_algebra(n: int) -> BlockSubalgebra:
    return BlockSubalgebra((tuple(range(n)),))


def diagonal_algebra(n: int) -> BlockSubalgebra:
    return BlockSubalgebra(tuple((i,) for i in range(n)))


def nc_conditional_expectation(f: NcElement, alg: BlockSubalgebra) -> NcElement:
    if alg.n != f.n:
        raise ValueError("algebra and element differ in n")
    out = np.zeros_like(f.blocks)
    for b in alg.blocks:
        idx = np.array(b)
        if alg.kind == "full":
            out[np.ix_(idx, idx)] = f.blocks[np.ix_(idx, idx)]
        else:
            avg = f.blocks[idx, idx].mean(axis=0)
            out[idx, idx] = avg
    return NcElement(out, f.weight)


def _contains(small: BlockSubalgebra, big: BlockSubalgebra, n: int) -> bool:
    for i in range(n):
        for j in range(n):
            e = np.zeros((n, n, 1, 1), dtype=complex)
            e[i, j] = 1.0
            x = nc_conditional_expectation(NcElement(e), small)
            y = nc_conditional_expectation(x, big)
            if not np.allclose(x.blocks, y.blocks, atol=1e-14):
                return False
    return True


@dataclass(frozen=True)
class NcBurkholderReport:
    norm4: float
    square_max: float
    bracket: float
    sigma_r: float
    sigma_c: float
    diagonal: float
    anchor: str = "nc burkholder p=4: ||f||_(4) vs square functions and the [4] bracket (tracked)"

    def as_dict(self) -> dict:
        return {
            "anchor": self.anchor,
            "norm4": self.norm4,
            "square_max": self.square_max,
            "bracket": self.bracket,
            "sigma_r": self.sigma_r,
            "sigma_c": self.sigma_c,
            "diagonal": self.diagonal,
            "ratio_square": self.norm4 / self.square_max if self.square_max > 0 else None,
            "ratio_bracket": self.norm4 / self.bracket if self.bracket > 0 else None,
        }


def nc_martingale_differences(f: NcElement, chain: Sequence[BlockSubalgebra]) -> list[NcElement]:
    chain = list(chain)
    if not chain:
        raise ValueError("empty chain")
    for a, b in zip(chain, chain[1:]):
        if not _contains(a, b, f.n):
            raise ValueError("chain must be increasing")
    top = full_algebra(f.n)
    if chain[-1] != top:
        chain.append(top)
    cond = [nc_conditional_expectation(f, a) for a in chain]
    return [cond[0]] + [b - a for a, b in zip(cond, cond[1:])]


def _nc_sum(xs: Sequence[NcElement]) -> NcElement:
    out = xs[0]
    for x in xs[1:]:
        out = out + x
    return out


def nc_burkholder4(f: NcElement, chain: Sequence[BlockSubalgebra]) -> NcBurkholderReport:
    """All p = 4 quantities of the non-commutative Burkholder statements.

    The chain is completed by the full algebra when it does not end there.
    The n = 0 term of sigma_r and sigma_c is d_0 . d_0* (resp. d_0* . d_0).
    """
    check_dim(f.opdim ** 4, "Lambda_4 trace chain")
    ds = nc_martingale_differences(f, chain)
    chain = list(chain)
    if chain[-1] != full_algebra(f.n):
        chain.append(full_algebra(f.n))
    star = [nc_star(d) for d in ds]
    s_r = _nc_sum([nc_product(d, ds_) for d, ds_ in zip(ds, star)])
    s_c = _nc_sum([nc_product(ds_, d) for d, ds_ in zip(ds, star)])
    sq = max(nc_lambda_norm(s_r, 2), nc_lambda_norm(s_c, 2)) ** 0.5
    sig_r = [nc_product(ds[0], star[0])]
    sig_c = [nc_product(star[0], ds[0])]
    for k in range(1, len(ds)):
        sig_r.append(nc_conditional_expectation(nc_product(ds[k], star[k]), chain[k - 1]))
        sig_c.append(nc_conditional_expectation(nc_product(star[k], ds[k]), chain[k - 1]))
    sr = nc_lambda_norm(_nc_sum(sig_r), 2) ** 0.5
    sc = nc_lambda_norm(_nc_sum(sig_c), 2) ** 0.5
    diag_terms = [nc_product(nc_product(nc_product(d, s), d), s) for d, s in zip(ds, star)]
    diag = spectral_norm(hat_tau(_nc_sum(diag_terms))) ** 0.25
    return NcBurkholderReport(nc_lambda_norm(f, 4), sq, max(diag, sr, sc), sr, sc, diag)


def dyadic_interval_chain(n: int, kind: str = "full") -> list[BlockSubalgebra]:
    """Increasing chain for n = 2^k: singletons, pairs, quadruples, ..., one block.

    With kind="scalar" the chain runs the other way (one block first) so that
    the commutative algebras increase.
    """
    k = int(round(math.log2(n)))
    if 2**k != n:
        raise ValueError("n must be a power of 2")
    parts = []
    for s in range(k + 1):
        size = 2**s
        parts.append(tuple(tuple(range(i, i + size)) for i in range(0, n, size)))
    if kind == "full":
        return [BlockSubalgebra(b, "full") for b in parts]
    return [BlockSubalgebra(b, "scalar") for b in reversed(parts)]


def diagonal_embedding(f: MatrixField) -> NcElement:
    """A field on a uniform space as the diagonal element sum f(w) (x) e_ww."""
    w = f.space.weights
    if not np.allclose(w, w[0]):
        raise ValueError("diagonal embedding needs uniform weights")
    return nc_diagonal(list(f.values))


@dataclass(frozen=True)
class CbLimitResult:
    ps: tuple
    values: tuple
    gaps: tuple
    guard_p: int | None = None


def cb_oh_limit(f: NcElement, m_max: int) -> CbLimitResult:
    """||f||_(2^m) for m = 1..m_max, a nondecreasing sequence.

    Stops early at the first p whose trace chain exceeds the dimension guard
    and records that p.
    """
    from .linalg import DimensionError, max_dim

    if m_max < 1:
        raise ValueError("m_max must be >= 1")
    ps, vals = [], []
    guard_p = None
    for m in range(1, m_max + 1):
        p = 2**m
        if f.opdim ** p > max_dim():
            guard_p = p
            break
        ps.append(p)
        vals.append(nc_lambda_norm(f, p))
    if not vals:
        raise DimensionError(f.opdim ** 2, max_dim(), "Lambda_2 trace chain")
    gaps = tuple(b - a for a, b in zip(vals, vals[1:]))
    return CbLimitResult(tuple(ps), tuple(vals), gaps, guard_p)
