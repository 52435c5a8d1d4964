"""Command-line experiment driver.

Every run prints a JSON (or CSV) report ``{manifest, results, violations}``.
Exit codes: 0 ok, 1 inequality violation, 2 invalid input, 3 dimension guard.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from typing import Callable

import numpy as np

from . import __version__
from . import hilbert_torus as ht
from . import lambda_comm as lc
from . import martingale as mg
from . import nc_lambda as nc
from . import ordercone as oc
from . import partitions as pt
from . import randmat as rm
from .linalg import ConvergenceError, DimensionError, max_dim, random_matrix


class ValidationError(ValueError):
    pass


def _rngs(seed: int, count: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


def _need(cond: bool, msg: str) -> None:
    if not cond:
        raise ValidationError(msg)


def _even_p(args, allowed=None) -> int:
    p = args.p
    _need(p >= 2 and p % 2 == 0, f"--p must be an even integer >= 2, got {p}")
    if allowed is not None:
        _need(p in allowed, f"--p must be one of {sorted(allowed)} here")
    return p


def _clean(x):
    """JSON-safe floats (inf/nan become strings) and plain containers."""
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if math.isfinite(v) else str(v)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


# ---- subcommands ----------------------------------------------------------
# each returns (results, violations)


def _load_input(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _complex_array(obj) -> np.ndarray:
    if isinstance(obj, dict):
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
        return re + 1j * im
    return np.asarray(obj, dtype=complex)


def cmd_norms(args):
    p = _even_p(args)
    if args.input:
        data = _load_input(args.input)
        kind = data.get("kind", "field")
        if kind == "field":
            vals = _complex_array(data["values"])
            w = np.asarray(data.get("weights", np.full(vals.shape[0], 1.0 / vals.shape[0])), dtype=float)
            f = lc.MatrixField(lc.FiniteMeasureSpace(w), vals)
            return [{"anchor": "Lambda_p norm of a field", "kind": kind, "p": p, "norm": lc.lambda_norm(f, p)}], []
        if kind == "nc":
            blocks = _complex_array(data["blocks"])
            f = nc.NcElement(blocks, data.get("weight"))
            return [{"anchor": "Lambda_p norm of a matrix-algebra element", "kind": kind, "p": p, "norm": nc.nc_lambda_norm(f, p)}], []
        raise ValidationError(f"unknown input kind {kind!r}")
    out = []
    for i, rng in enumerate(_rngs(args.seed, args.instances)):
        space = lc.FiniteMeasureSpace.uniform(args.n)
        f = lc.random_field(rng, space, args.dim)
        out.append({"anchor": "Lambda_p norm of a field", "instance": i, "p": p, "norm": lc.lambda_norm(f, p)})
    return out, []


def cmd_burkholder(args):
    p = _even_p(args)
    _need(p % 4 == 0 or p == 6, "--p must be 4, 6 or a multiple of 4")
    res, bad = [], []
    for i, rng in enumerate(_rngs(args.seed, args.instances)):
        ds, f = mg.random_martingale_field(rng, args.levels, args.dim)
        r = mg.burkholder_experiment(f, ds.filtration, p, slack=max(args.tol, 1e-6))
        row = {"instance": i, **r.as_dict()}
        res.append(row)
        if r.holds is False:
            bad.append(row)
    return res, bad


def _random_fields(rng, ds, count, d):
    return [lc.random_field(rng, ds.space, d) for _ in range(count)]


def cmd_dualdoob(args):
    res, bad = [], []
    for i, rng in enumerate(_rngs(args.seed, args.instances)):
        ds = mg.dyadic_space(args.levels)
        th = _random_fields(rng, ds, args.levels, args.dim)
        r = mg.dual_doob_check(th, ds.filtration, args.m, args.tol)
        row = {"instance": i, "m": args.m, **r.as_dict()}
        res.append(row)
        if not r.holds:
            bad.append(row)
    return res, bad


def cmd_stein(args):
    res, bad = [], []
    for i, rng in enumerate(_rngs(args.seed, args.instances)):
        ds = mg.dyadic_space(args.levels)
        xs = _random_fields(rng, ds, args.levels, args.dim)
        r = mg.stein_check(xs, ds.filtration, args.m, args.tol)
        row = {"instance": i, "m": args.m, **r.as_dict()}
        res.append(row)
        if not r.holds:
            bad.append(row)
    return res, bad


def cmd_rosenthal(args):
    p = _even_p(args)
    _need(p % 4 == 0, "--p must be a multiple of 4")
    res = []
    for i, rng in enumerate(_rngs(args.seed, args.instances)):
        ds, f = mg.random_martingale_field(rng, args.levels, args.dim)
        res.append({"instance": i, **mg.rosenthal_bracket(f, ds.filtration, p).as_dict()})
    return res, []


def cmd_hilbert(args):
    p = _even_p(args)
    res, bad = [], []
    for i, rng in enumerate(_rngs(args.seed, args.instances)):
        f = ht.random_trig(rng, args.degree, args.dim)
        g = ht.random_trig(rng, args.degree, args.dim)
        cot = ht.cotlar_residuals(f, g)
        row = {"instance": i, **ht.hilbert_cb_experiment(f, p).as_dict(), "cotlar_residual": cot.worst, "cotlar_scale": cot.scale}
        res.append(row)
        if cot.worst > 1e-10 * cot.scale:
            bad.append(row)
    return res, bad


def cmd_lpaley(args):
    p = _even_p(args)
    res = []
    top = 2 ** max(args.levels, 1)
    for i, rng in enumerate(_rngs(args.seed, args.instances)):
        f = ht.random_trig(rng, 0, args.dim, support=range(1, top))
        res.append({"instance": i, "p": p, **ht.littlewood_paley_check(f, p).as_dict()})
    return res, []


def cmd_khintchine(args):
    kind = args.kind
    if kind == "rademacher":
        p = _even_p(args)
        res, bad = [], []
        for i, rng in enumerate(_rngs(args.seed, args.instances)):
            bs = [random_matrix(rng, args.dim) for _ in range(args.n)]
            r = mg.rademacher_khintchine(bs, p, args.tol)
            row = {"instance": i, **r.as_dict()}
            res.append(row)
            if not (r.lower_holds and r.upper_holds):
                bad.append(row)
        return res, bad
    p = _even_p(args)
    _need(p <= pt.MAX_PAIR_MOMENT_P, f"--p is capped at {pt.MAX_PAIR_MOMENT_P}")
    tag = {"gaussian-const": "gaussian", "q-gaussian": "q_gaussian", "free": "free", "spin": "spin"}[kind]
    q = args.q if tag == "q_gaussian" else None
    if tag == "q_gaussian":
        _need(q is not None and -1 <= q <= 1, "--q in [-1, 1] is required")
    mass = pt.pairing_mass(tag, p, q)
    row = {
        "anchor": "pairing khintchine constant C = (sum |psi|)^(1/p)",
        "kind": tag,
        "p": p,
        "q": q,
        "pairing_mass": mass,
        "constant": mass ** (1.0 / p),
    }
    bad = []
    if tag == "free" and row["constant"] > 2 + 1e-12:
        bad.append(row)
    return [row], bad


def cmd_randmat(args):
    p = _even_p(args)
    _need(p <= rm.MAX_WORD, f"--p is capped at {rm.MAX_WORD}")
    N = args.n
    _need(N >= 1, "--n must be >= 1")
    if args.mode == "exact":
        return [{"anchor": "ginibre trace moment by pairings", "N": N, "p": p, "moment": rm.moment_exact(N, p)}], []
    if args.mode == "constant":
        return [{"anchor": "random-matrix khintchine constant", "N": N, "p": p, "constant": rm.rm_khintchine_constant(N, p)}], []
    _need(args.samples >= 1000, "--samples must be >= 1000")
    est = rm.moment_mc(rm.GinibreSpec(N, args.seed), p, args.samples)
    row = {"anchor": "ginibre trace moment, monte carlo vs pairings", "N": N, "p": p, **est.as_dict()}
    return [row], ([] if est.within else [row])


def cmd_mobius(args):
    n = args.n
    _need(1 <= n <= pt.MAX_SET_N, f"--n must be in 1..{pt.MAX_SET_N}")
    if args.sum_abs:
        total = sum(abs(pt.mobius(x)) for x in pt.enumerate_partitions(n))
        row = {"anchor": "sum of |mu(0, pi)| over the partition lattice equals n!", "n": n, "sum_abs": total, "expected": math.factorial(n)}
        return [row], ([] if total == math.factorial(n) else [row])
    _need(n <= 6, "the decomposition check needs --n <= 6")
    res, bad = [], []
    for i in range(args.instances):
        r = pt.mobius_decomposition_check(n, seed=args.seed + i, index_size=min(4, max(1, args.dim + 1)))
        row = {"anchor": "moebius decomposition of a multilinear form", "instance": i, "n": n, "relative_residual": r}
        res.append(row)
        if r > 1e-10:
            bad.append(row)
    return res, bad


def cmd_lacunary(args):
    p = _even_p(args)
    E = [int(t) for t in args.E.split(",") if t.strip()]
    _need(len(E) >= 1 and len(set(E)) == len(E), "--E must list distinct integers")
    res, bad = [], []
    for i, rng in enumerate(_rngs(args.seed, args.instances)):
        bs = [random_matrix(rng, args.dim) for _ in E]
        r = pt.lacunary_khintchine_check(E, bs, p, plus=args.plus, slack=args.tol)
        row = {"instance": i, **r.as_dict(), "Z": pt.lambda_set_Z(E, p, plus=args.plus), "plus": args.plus}
        res.append(row)
        if not r.holds:
            bad.append(row)
    return res, bad


def cmd_cb_limit(args):
    _need(args.m_max >= 1, "--m-max must be >= 1")
    res, bad = [], []
    for i, rng in enumerate(_rngs(args.seed, args.instances)):
        f = nc.random_nc(rng, args.dim, args.n)
        r = nc.cb_oh_limit(f, args.m_max)
        mono = all(b >= a - 1e-10 for a, b in zip(r.values, r.values[1:]))
        row = {
            "anchor": "Lambda_(2^m) norms increase towards the CB(OH) limit",
            "instance": i,
            "p_values": list(r.ps),
            "norms": list(r.values),
            "gaps": list(r.gaps),
            "guard_tripped_at_p": r.guard_p,
            "monotone": mono,
        }
        res.append(row)
        if not mono:
            bad.append(row)
    return res, bad


def cmd_nc_burkholder4(args):
    res = []
    n = args.n
    _need(n >= 1 and (n & (n - 1)) == 0, "--n must be a power of 2")
    chain = nc.dyadic_interval_chain(n)
    for i, rng in enumerate(_rngs(args.seed, args.instances)):
        f = nc.random_nc(rng, args.dim, n)
        res.append({"instance": i, **nc.nc_burkholder4(f, chain).as_dict()})
    return res, []


# ---- fuzz campaigns -------------------------------------------------------


def _fz_cauchy_schwarz(rng, args):
    d = int(rng.integers(1, args.dim + 1))
    space = lc.FiniteMeasureSpace(rng.uniform(0.1, 1.0, int(rng.integers(1, 5))))
    return lc.cauchy_schwarz_check(lc.random_field(rng, space, d), lc.random_field(rng, space, int(rng.integers(1, args.dim + 1)))).as_dict()


def _fz_holder(rng, args):
    p = args.p
    space = lc.FiniteMeasureSpace(rng.uniform(0.1, 1.0, int(rng.integers(1, 5))))
    fs = [lc.random_field(rng, space, int(rng.integers(1, args.dim + 1))) for _ in range(p)]
    return lc.holder_check(fs, p).as_dict()


def _fz_nc_holder(rng, args):
    n = int(rng.integers(1, args.n + 1))
    fs = [nc.random_nc(rng, int(rng.integers(1, args.dim + 1)), n) for _ in range(args.p)]
    return nc.nc_holder_check(fs).as_dict()


def _fz_ordercone(rng, args):
    d = int(rng.integers(1, args.dim + 1))
    x = oc.gram_element([random_matrix(rng, d) for _ in range(int(rng.integers(1, 4)))])
    y = x + oc.gram_element([random_matrix(rng, d) for _ in range(int(rng.integers(1, 4)))])
    lhs, rhs = oc.cone_norm(x), oc.cone_norm(y)
    return {"anchor": "order cone: 0 < x < y implies ||x|| <= ||y||", "lhs": lhs, "rhs": rhs, "ratio": lhs / rhs, "holds": lhs <= rhs + 1e-8}


def _fz_condexp(rng, args):
    n = int(rng.integers(2, 7))
    space = lc.FiniteMeasureSpace(rng.uniform(0.1, 1.0, n))
    f = lc.random_field(rng, space, int(rng.integers(1, args.dim + 1)))
    labels = rng.integers(0, int(rng.integers(1, n + 1)), n)
    blocks = [list(np.flatnonzero(labels == k)) for k in np.unique(labels)]
    lhs = lc.lambda_norm(lc.conditional_expectation(f, blocks), args.p)
    rhs = lc.lambda_norm(f, args.p)
    return lc.ratio_report(lhs, rhs, "conditional expectation is contractive on Lambda_p").as_dict()


def _fz_nc_condexp(rng, args):
    n = int(rng.integers(1, args.n + 1))
    f = nc.random_nc(rng, int(rng.integers(1, args.dim + 1)), n)
    cuts = sorted(set(int(c) for c in rng.integers(1, n, int(rng.integers(0, n)))) if n > 1 else [])
    edges = [0] + cuts + [n]
    alg = nc.BlockSubalgebra(tuple(tuple(range(a, b)) for a, b in zip(edges, edges[1:])))
    lhs = nc.nc_lambda_norm(nc.nc_conditional_expectation(f, alg), args.p)
    return lc.ratio_report(lhs, nc.nc_lambda_norm(f, args.p), "pinching is contractive on Lambda_p(M_n)").as_dict()


def _fz_porth(rng, args):
    ds, f = mg.random_martingale_field(rng, args.levels, args.dim)
    r = mg.p_orthogonality_check(mg.martingale_differences(f, ds.filtration), args.p)
    d = r.as_dict()
    d["holds"] = bool(r.is_p_orthogonal and r.holds)
    return d


def _fz_cotlar(rng, args):
    f = ht.random_trig(rng, int(rng.integers(0, args.degree + 1)), args.dim)
    g = ht.random_trig(rng, int(rng.integers(0, args.degree + 1)), args.dim)
    c = ht.cotlar_residuals(f, g)
    return {"anchor": "cotlar identity for the hilbert transform", "residual": c.worst, "scale": c.scale, "holds": c.worst <= 1e-10 * c.scale}


def _fz_quadrature(rng, args):
    f = ht.random_trig(rng, int(rng.integers(1, args.degree + 1)), args.dim)
    a = ht.torus_lambda_norm(f, args.p)
    b = ht.torus_lambda_norm(f, args.p, extra_nodes=args.p * f.degree + 1)
    return {"anchor": "equispaced quadrature is exact for Lambda_p(T)", "value": a, "doubled": b, "holds": abs(a - b) <= 1e-12 * max(1.0, a)}


CAMPAIGNS: dict[str, Callable] = {
    "cauchy-schwarz": _fz_cauchy_schwarz,
    "holder": _fz_holder,
    "nc-holder": _fz_nc_holder,
    "ordercone": _fz_ordercone,
    "condexp": _fz_condexp,
    "nc-condexp": _fz_nc_condexp,
    "porth": _fz_porth,
    "cotlar": _fz_cotlar,
    "quadrature": _fz_quadrature,
}


def cmd_fuzz(args):
    _even_p(args)
    res, bad = [], []
    fn = CAMPAIGNS[args.campaign]
    for i, rng in enumerate(_rngs(args.seed, args.instances)):
        row = {"instance": i, "campaign": args.campaign, **fn(rng, args)}
        res.append(row)
        if not row.get("holds", True):
            bad.append(row)
    return res, bad


# ---- plumbing -------------------------------------------------------------


def _common(sp: argparse.ArgumentParser, p: int = 4) -> None:
    sp.add_argument("--p", type=int, default=p)
    sp.add_argument("--dim", type=int, default=2)
    sp.add_argument("--n", type=int, default=3)
    sp.add_argument("--levels", type=int, default=2)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--samples", type=int, default=10_000)
    sp.add_argument("--instances", type=int, default=1)
    sp.add_argument("--tol", type=float, default=1e-9)
    sp.add_argument("--out", default=None)
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    sp.add_argument("--max-dim", type=int, default=None)
    sp.add_argument("--timing", action="store_true", help="record wall-clock time in the manifest")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="opspace", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, **kw):
        sp = sub.add_parser(name, **kw)
        _common(sp)
        sp.set_defaults(func=fn)
        return sp

    add("norms", cmd_norms).add_argument("--input", default=None)
    add("burkholder", cmd_burkholder)
    add("dualdoob", cmd_dualdoob).add_argument("--m", type=int, default=2)
    add("stein", cmd_stein).add_argument("--m", type=int, default=2)
    add("rosenthal", cmd_rosenthal)
    add("hilbert", cmd_hilbert).add_argument("--degree", type=int, default=3)
    add("lpaley", cmd_lpaley)
    sp = add("khintchine", cmd_khintchine)
    sp.add_argument("kind", choices=("rademacher", "gaussian-const", "q-gaussian", "free", "spin"))
    sp.add_argument("--q", type=float, default=None)
    add("randmat", cmd_randmat).add_argument("mode", choices=("exact", "mc", "constant"))
    add("mobius", cmd_mobius).add_argument("--sum-abs", action="store_true")
    sp = add("lacunary", cmd_lacunary)
    sp.add_argument("--E", default="1,2,4,8")
    sp.add_argument("--plus", action="store_true")
    add("cb-limit", cmd_cb_limit).add_argument("--m-max", type=int, default=3)
    add("nc-burkholder4", cmd_nc_burkholder4)
    sp = add("fuzz", cmd_fuzz)
    sp.add_argument("--campaign", choices=sorted(CAMPAIGNS), default="cauchy-schwarz")
    sp.add_argument("--degree", type=int, default=3)
    return ap


def _params(args) -> dict:
    skip = {"func", "out", "format", "timing"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _csv(results: list[dict]) -> str:
    def flat(d, prefix=""):
        out = {}
        for k, v in d.items():
            key = f"{prefix}{k}"
            if isinstance(v, dict):
                out.update(flat(v, key + "."))
            elif isinstance(v, list):
                out[key] = json.dumps(v)
            else:
                out[key] = v
        return out

    rows = [flat(r) for r in results]
    cols: list[str] = []
    for r in rows:
        for k in r:
            if k not in cols:
                cols.append(k)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\r\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    if args.max_dim is not None and args.max_dim < 1:
        print("error: --max-dim must be positive", file=sys.stderr)
        return 2
    saved = os.environ.get("OPSPACE_MAX_DIM")
    if args.max_dim is not None:
        os.environ["OPSPACE_MAX_DIM"] = str(args.max_dim)
    try:
        return _execute(args, stdout)
    finally:
        if saved is None:
            os.environ.pop("OPSPACE_MAX_DIM", None)
        else:
            os.environ["OPSPACE_MAX_DIM"] = saved


def _execute(args, stdout) -> int:
    t0 = time.perf_counter()
    try:
        for name in ("instances", "dim", "levels"):
            _need(getattr(args, name) >= 1, f"--{name} must be >= 1")
        _need(args.tol >= 0, "--tol must be nonnegative")
        results, violations = args.func(args)
    except DimensionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    manifest = {
        "subcommand": args.command,
        "parameters": _params(args),
        "seed": args.seed,
        "tolerance": args.tol,
        "version": __version__,
        "max_dim": max_dim(),
        "wall_clock_s": round(time.perf_counter() - t0, 6) if args.timing else None,
    }
    report = _clean({"manifest": manifest, "results": results, "violations": violations})
    text = _csv(report["results"]) if args.format == "csv" else json.dumps(report, indent=2) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    stdout.write(text)
    return 1 if violations else 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
