"""``sievelab`` command-line entry point.

Every subcommand prints one report (``--format json|csv|pretty``) to stdout
or ``--out``.  Output depends only on the flags, never on ``--threads``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import am2, large_sieve as ls, progressions as pp
from .arithmetic import cached_tables, save_tables
from .dirichlet import character_group, gauss_sum
from .errors import DegenerateInput, InvalidArgument, OutOfTable, ResourceLimit
from .sparse_sets import condition_24_check, max_ratio, parse_set, well_distribution_scan

ANCHORS = {
    "sieve-build": "tables of Lambda, phi, mu, tau, spf and squarefree kernel s(n) for n <= x_max",
    "char-table": "Dirichlet characters chi mod q with conductor, primitivity and Gauss sum tau(chi)",
    "ls-classical": "sum_{q<=Q} q/phi(q) sum*_chi |sum a_n chi(n)|^2 <= (Q^2+N) sum |a_n|^2",
    "ls-sparse": "sum_{q in S_t(Q/t)} sum_{(a,q)=1} |sum a_n e(an/q)|^2 and its character analogue",
    "ls-bilinear": "sum_{q in S_t(Q/t)} q/phi(q) sum*_chi max_X |sum_{mn<=X} a_m b_n chi(mn)|",
    "ls-conjecture": "squares: sum_{q in S_t(Q/t)} sum_a |...|^2 vs Q^eps (Q/t |S_t(Q/t)| + N) Z",
    "bdh": "sum_{q} sum_{(a,q)=1} |psi(x;q,a) - x/phi(q)|^2 over q <= Q or q in S(Q)",
    "bdh-square": "sum_{q<=Qcap} q sum_{(a,q)=1, a mod q^2} |psi(x;q^2,a) - x/phi(q^2)|^2",
    "bv": "sum_{q} max_{(a,q)=1} |psi(y;q,a) - y/phi(q)| over q <= Q or q in S(Q)",
    "bv-square": "sum_{q<=Qcap} q max_{(a,q)=1} |psi(x;q^2,a) - x/phi(q^2)|",
    "vaughan-check": "sum_{n<=x} Lambda(n) f(n) = S1+S2+S3+S4 (Vaughan identity, U, V >= 1, UV <= x)",
    "phi-sum": "sum_{y<q<=2y} 1/phi(q^2) vs 1/(2 zeta(2) y)",
    "well-dist": "#{q in S_t: x<=q<=x+y, q=l mod k} vs (|S_t(R)| y/(kR) + 1)(Rt)^eps",
    "census-am2": "primes p <= x with s(p-1) <= p^theta, p = s m^2 + 1",
    "weighted-sum": "sum_{x<n<=2x} Lambda(n+1) #{y<q<=2y: q^2|n} vs x/(2 zeta(2) y)",
    "sparsity": "#{n <= x : s(n) <= n^theta}",
}


def _num(text: str):
    """Integer if integral (accepts ``1e6``), float otherwise."""
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"not a finite number: {text!r}")
    return int(v) if v.is_integer() and "." not in text else v


def _int(text: str) -> int:
    v = _num(text)
    if not float(v).is_integer():
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    return int(v)


def _num_list(text: str):
    return [_num(t) for t in text.split(",") if t.strip()]


def _f17(v) -> str:
    return f"{v:.17g}" if isinstance(v, float) else str(v)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_f17(v) for v in r])
    return buf.getvalue()


def _summary_csv(d: dict) -> str:
    return _csv(["key", "value"], [(k, v) for k, v in d.items() if not isinstance(v, (dict, list))])


def _tables(args, need: int):
    x_max = max(int(need), 2) if args.xmax is None else args.xmax
    if x_max < need:
        raise OutOfTable(f"--xmax {x_max} is below the {need} entries this run needs")
    return cached_tables(x_max)


# --- subcommands ------------------------------------------------------------
# each returns (params, result, csv_text)


def cmd_sieve_build(args):
    if args.xmax is None:
        raise InvalidArgument("--xmax is required")
    t = cached_tables(args.xmax)
    if args.cache_out:
        save_tables(t, args.cache_out)
    res = {"x_max": t.x_max, "prime_count": int(t.primes.size),
           "psi_x_max": pp.chebyshev_psi(t, t.x_max), "bytes": t.nbytes()}
    return {"xmax": args.xmax}, res, _summary_csv(res)


def cmd_char_table(args):
    G = character_group(args.q)
    rows = []
    for i, c in enumerate(G):
        g = gauss_sum(c)
        rows.append({"index": i, "exponents": list(c.exponents), "order": c.order,
                     "conductor": c.conductor, "primitive": c.is_primitive,
                     "principal": c.is_principal, "gauss_abs": abs(g),
                     "gauss_re": g.real, "gauss_im": g.imag})
    res = {"modulus": G.modulus, "group_order": len(G),
           "generators": [list(g) for g in G.generators], "characters": rows}
    text = _csv(["index", "exponents", "order", "conductor", "primitive", "principal", "gauss_abs"],
                [(r["index"], " ".join(map(str, r["exponents"])), r["order"], r["conductor"],
                  r["primitive"], r["principal"], r["gauss_abs"]) for r in rows])
    return {"q": args.q}, res, text


def cmd_ls_classical(args):
    trials = []
    for i in range(args.trials):
        seed = args.seed + i
        seq = ls.CoeffSequence.make(args.seq, args.N, seed=seed)
        lhs, rhs = ls.classical_ls_check(args.Q, seq, args.threads)
        trials.append({"trial": i, "seed": seed, "lhs": lhs, "rhs": rhs, "ratio": lhs / rhs,
                       "ok": lhs <= rhs * (1 + 1e-6)})
    res = {"trials": trials, "violations": sum(not t["ok"] for t in trials),
           "max_ratio": max(t["ratio"] for t in trials)}
    text = _csv(["trial", "seed", "lhs", "rhs", "ratio", "ok"],
                [(t["trial"], t["seed"], t["lhs"], t["rhs"], t["ratio"], t["ok"]) for t in trials])
    params = {"Q": args.Q, "N": args.N, "seq": args.seq, "trials": args.trials}
    return params, res, text


def _experiments_csv(exps):
    rows = []
    for e in exps:
        for name, b in e.bounds.items():
            rows.append((e.experiment, name, e.lhs, b, e.ratios[name]))
    return _csv(["experiment", "bound", "lhs", "rhs", "ratio"], rows)


def cmd_ls_sparse(args):
    S = parse_set(args.set)
    seq = ls.CoeffSequence.make(args.seq, args.N, seed=args.seed)
    exps = [ls.sparse_experiment(S, args.Q, args.t, seq, args.eps, kind, args.threads)
            for kind in ("additive", "multiplicative")]
    params = {"set": args.set, "Q": args.Q, "t": args.t, "N": args.N, "eps": args.eps, "seq": args.seq}
    return params, {"experiments": [e.to_record() for e in exps]}, _experiments_csv(exps)


def cmd_ls_bilinear(args):
    S = parse_set(args.set)
    a = ls.CoeffSequence.make(args.seq, args.M, seed=args.seed)
    b = ls.CoeffSequence.make(args.seq, args.N, seed=args.seed + 1)
    e = ls.bilinear_experiment(S, args.Q, args.t, a, b, args.eps, args.threads)
    params = {"set": args.set, "Q": args.Q, "t": args.t, "M": args.M, "N": args.N,
              "eps": args.eps, "seq": args.seq}
    return params, {"experiments": [e.to_record()]}, _experiments_csv([e])


def cmd_ls_conjecture(args):
    seeds = range(args.seed, args.seed + args.trials)
    e = ls.conjecture_experiment(args.Q, args.t, args.N, args.eps, seeds, threads=args.threads)
    params = {"Q": args.Q, "t": args.t, "N": args.N, "eps": args.eps, "trials": args.trials}
    return params, {"experiments": [e.to_record()]}, _experiments_csv([e])


def _error_report(args, rep, params):
    res = rep.to_record()
    return params, res, rep.to_csv() + "\r\n" + _summary_csv(
        {"theorem": rep.theorem, "x": rep.x, "Q": rep.Q, "set": rep.set_id, "A": rep.A,
         "lhs": rep.lhs, "normalizer": rep.normalizer, "ratio": rep.ratio})


def cmd_bdh(args):
    S = parse_set(args.set) if args.set else None
    t = _tables(args, math.floor(args.x))
    rep = pp.bdh_sum(t, args.x, args.Q, S, A=args.A, threads=args.threads)
    return _error_report(args, rep, {"x": args.x, "Q": args.Q, "set": args.set, "A": args.A})


def cmd_bdh_square(args):
    t = _tables(args, math.floor(args.x))
    rep = pp.bdh_sum(t, args.x, args.qmax, square_weight=True, A=args.A, threads=args.threads)
    return _error_report(args, rep, {"x": args.x, "qmax": args.qmax, "A": args.A})


def _ygrid(kind, x):
    if kind == "x":
        return None
    if kind == "exact":
        return "exact"
    # 20 log-spaced points in [2, x]
    return sorted(set(float(v) for v in np.geomspace(2, x, 20)) | {float(x)})


def cmd_bv(args):
    S = parse_set(args.set) if args.set else None
    t = _tables(args, math.floor(args.x))
    rep = pp.bv_sum(t, args.x, args.Q, S, A=args.A, y_grid=_ygrid(args.ygrid, args.x),
                    threads=args.threads)
    return _error_report(args, rep, {"x": args.x, "Q": args.Q, "set": args.set, "A": args.A,
                                     "ygrid": args.ygrid})


def cmd_bv_square(args):
    t = _tables(args, math.floor(args.x))
    rep = pp.bv_sum(t, args.x, args.qmax, square_weight=True, A=args.A, threads=args.threads)
    return _error_report(args, rep, {"x": args.x, "qmax": args.qmax, "A": args.A})


def _parse_f(spec: str):
    if spec == "one":
        return None
    if spec.startswith("chi:"):
        try:
            q, i = (int(v) for v in spec[4:].split(":"))
        except ValueError:
            raise InvalidArgument(f"--f expects chi:q:index, got {spec!r}")
        G = character_group(q)
        if not 0 <= i < len(G):
            raise InvalidArgument(f"character index {i} out of range for modulus {q}")
        return G.characters[i]
    raise InvalidArgument(f"--f must be 'one' or 'chi:q:index', got {spec!r}")


def cmd_vaughan(args):
    t = _tables(args, math.floor(args.x))
    d = pp.vaughan_decompose(t, args.x, args.U, args.V, _parse_f(args.f))
    return {"x": args.x, "U": args.U, "V": args.V, "f": args.f}, d.to_record(), d.to_csv()


def cmd_phi_sum(args):
    s, main, err = pp.phi_square_sum(args.y)
    res = {"sum": s, "main": main, "error": err}
    return {"y": args.y}, res, _summary_csv(res)


def cmd_well_dist(args):
    S = parse_set(args.set)
    reps = well_distribution_scan(S, args.R, [int(t) for t in args.t], args.kmax, args.eps)
    rows = [r.__dict__ for r in reps]
    res = {"reports": rows, "max_ratio": max_ratio(reps),
           "condition_24": [list(r) for r in condition_24_check(S, args.R)]}
    text = _csv(list(rows[0].keys()) if rows else ["t"], [tuple(r.values()) for r in rows])
    params = {"set": args.set, "R": args.R, "t": args.t, "kmax": args.kmax, "eps": args.eps}
    return params, res, text


def cmd_census(args):
    t = _tables(args, args.x)
    c = am2.census(t, args.x, args.theta)
    res = c.summary()
    res["label"] = "exploratory" if args.theta <= 5 / 9 else "within-theorem-range"
    return {"x": args.x, "theta": args.theta}, res | {"rows": [list(r) for r in c.rows]}, c.to_csv()


def cmd_weighted(args):
    t = _tables(args, 2 * args.x + 1)
    r = am2.weighted_sum(t, args.x, args.y).to_record()
    return {"x": args.x, "y": args.y}, r, _summary_csv(r)


def cmd_sparsity(args):
    count = am2.sparsity_count(args.x, args.theta)
    res = {"count": count, "normalized": count / args.x ** (7 / 9)}
    if args.scan:
        res["scan"] = am2.sparsity_scan(_tables(args, args.x), args.x, args.theta)
    return {"x": args.x, "theta": args.theta}, res, _summary_csv(res)


# --- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--xmax", type=_int, help="table bound (default: what the run needs)")
    common.add_argument("--format", choices=("json", "csv", "pretty"), default="pretty")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--seed", type=_int, default=0)
    common.add_argument("--threads", type=_int, default=1)

    p = argparse.ArgumentParser(prog="sievelab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn):
        sp = sub.add_parser(name, parents=[common], help=ANCHORS[name],
                            description=f"Computes: {ANCHORS[name]}")
        sp.set_defaults(fn=fn)
        return sp

    sp = add("sieve-build", cmd_sieve_build)
    sp.add_argument("--cache-out", help="write the binary table cache to this path")

    sp = add("char-table", cmd_char_table)
    sp.add_argument("--q", type=_int, required=True, help="modulus")

    seqs = ("all-ones", "single-spike", "random-unit", "random-gaussian", "zero")
    sp = add("ls-classical", cmd_ls_classical)
    sp.add_argument("--Q", type=_int, required=True)
    sp.add_argument("--N", type=_int, required=True)
    sp.add_argument("--seq", choices=seqs, default="random-unit")
    sp.add_argument("--trials", type=_int, default=1)

    for name, fn in (("ls-sparse", cmd_ls_sparse), ("ls-bilinear", cmd_ls_bilinear)):
        sp = add(name, fn)
        sp.add_argument("--set", default="squares")
        sp.add_argument("--Q", type=_int, required=True)
        sp.add_argument("--t", type=_int, default=1)
        sp.add_argument("--N", type=_int, required=True)
        sp.add_argument("--eps", type=float, default=0.1)
        sp.add_argument("--seq", choices=seqs, default="random-unit")
        if name == "ls-bilinear":
            sp.add_argument("--M", type=_int, required=True)

    sp = add("ls-conjecture", cmd_ls_conjecture)
    sp.add_argument("--Q", type=_int, required=True)
    sp.add_argument("--t", type=_int, default=1)
    sp.add_argument("--N", type=_int, required=True)
    sp.add_argument("--eps", type=float, default=0.1)
    sp.add_argument("--trials", type=_int, default=10, help="number of random seeds per sequence type")

    for name, fn in (("bdh", cmd_bdh), ("bv", cmd_bv)):
        sp = add(name, fn)
        sp.add_argument("--x", type=_num, required=True)
        sp.add_argument("--Q", type=_num, required=True)
        sp.add_argument("--set", help="moduli set; omit for the classical range q <= Q")
        sp.add_argument("--A", type=float, default=2.0)
        if name == "bv":
            sp.add_argument("--ygrid", choices=("x", "log", "exact"), default="x",
                            help="max over y: only y=x, a log-spaced grid, or the exact supremum")

    for name, fn in (("bdh-square", cmd_bdh_square), ("bv-square", cmd_bv_square)):
        sp = add(name, fn)
        sp.add_argument("--x", type=_num, required=True)
        sp.add_argument("--qmax", type=_int, required=True)
        sp.add_argument("--A", type=float, default=2.0)

    sp = add("vaughan-check", cmd_vaughan)
    sp.add_argument("--x", type=_num, required=True)
    sp.add_argument("--U", type=_num, required=True)
    sp.add_argument("--V", type=_num, required=True)
    sp.add_argument("--f", default="one", help="'one' or 'chi:q:index'")

    sp = add("phi-sum", cmd_phi_sum)
    sp.add_argument("--y", type=_int, required=True)

    sp = add("well-dist", cmd_well_dist)
    sp.add_argument("--set", default="squares")
    sp.add_argument("--R", type=_num_list, default=[100, 1000, 10000])
    sp.add_argument("--t", type=_num_list, default=[1, 2, 3, 4])
    sp.add_argument("--kmax", type=_int, default=4)
    sp.add_argument("--eps", type=float, default=0.1)

    sp = add("census-am2", cmd_census)
    sp.add_argument("--x", type=_int, required=True)
    sp.add_argument("--theta", type=float, default=5 / 9)

    sp = add("weighted-sum", cmd_weighted)
    sp.add_argument("--x", type=_int, required=True)
    sp.add_argument("--y", type=_int, required=True)

    sp = add("sparsity", cmd_sparsity)
    sp.add_argument("--x", type=_int, required=True)
    sp.add_argument("--theta", type=float, default=5 / 9)
    sp.add_argument("--scan", action="store_true", help="also count by exhaustive kernel-table scan")
    return p


def _pretty(command, params, result) -> str:
    lines = [f"{command}: {ANCHORS[command]}", f"params: {json.dumps(params, sort_keys=True)}"]
    for k, v in result.items():
        if isinstance(v, list) and len(v) > 20:
            v = f"[{len(v)} entries]"
        lines.append(f"{k}: {v}")
    return "\n".join(lines) + "\n"


def render(args, params, result, text) -> str:
    if args.format == "json":
        doc = {"subcommand": args.command, "paper_anchor": ANCHORS[args.command],
               "params": params, "seed": args.seed, "result": result}
        return json.dumps(doc, sort_keys=True, indent=2, default=_json_default) + "\n"
    if args.format == "csv":
        return text
    return _pretty(args.command, params, result)


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, tuple):
        return list(o)
    raise TypeError(f"cannot serialise {type(o).__name__}")


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    try:
        params, result, text = args.fn(args)
    except (InvalidArgument, DegenerateInput) as exc:
        print(f"sievelab {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (ResourceLimit, OutOfTable) as exc:
        print(f"sievelab {args.command}: resource limit: {exc}", file=sys.stderr)
        return 1
    out = render(args, params, result, text)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    return 0


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
