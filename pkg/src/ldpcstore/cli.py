"""Command-line front end.

Every table-producing command writes CSV (or JSON with ``--format json``)
followed by a metadata comment line carrying the package version, the seed
and a hash of the config file, so runs can be diffed byte for byte.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from . import __version__
from .construct import ConstructionSpec, construct
from .ddopt import OptProblem, optimize_threshold, tradeoff_curve
from .density import DeConfig, decoding_threshold
from .errors import ConfigError, LdpcStoreError, MissingGraphFile, RateImpossible
from .graph import DegreeDistribution, format_alist, read_alist, repair_bandwidth
from .peeling import (
    ToleranceProfile,
    data_loss_probability,
    mds_loss_probability,
    tolerance_profile,
)
from .reliability import (
    REFERENCE_ROWS,
    StorageSystemParams,
    load_config,
    mttdl_for_graph,
    mttdl_mds_report,
    mttdl_replication_report,
)

log = logging.getLogger("ldpcstore")


# -- parsing helpers ----------------------------------------------------------


def parse_rate(text: str) -> Fraction:
    """``"p/q"`` or an integer string; decimals are refused."""
    text = text.strip()
    if "." in text or "e" in text.lower():
        raise ConfigError(f"rate {text!r} must be written as a fraction p/q")
    try:
        rate = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"cannot parse rate {text!r}") from exc
    if not 0 < rate < 1:
        raise ConfigError(f"rate {text} must lie strictly between 0 and 1")
    return rate


def parse_poly(text: str) -> dict[int, float]:
    """``"0.4128:2,0.1789:3"`` -> ``{2: 0.4128, 3: 0.1789}`` (coefficient:degree)."""
    out: dict[int, float] = {}
    try:
        for item in text.split(","):
            coef, deg = item.split(":")
            out[int(deg)] = out.get(int(deg), 0.0) + float(coef)
    except ValueError as exc:
        raise ConfigError(f"cannot parse polynomial {text!r}; use coef:degree,...") from exc
    return out


def parse_range(text: str) -> list[int]:
    """``"4..7"``, ``"4-7"`` or ``"4,5,7"``; ends inclusive."""
    text = text.strip()
    if not text:
        return []
    try:
        for sep in ("..", "-"):
            if sep in text:
                a, b = text.split(sep)
                return list(range(int(a), int(b) + 1))
        return [int(x) for x in text.split(",")]
    except ValueError as exc:
        raise ConfigError(f"cannot parse range {text!r}") from exc


def parse_grid(text: str) -> list[float]:
    try:
        grid = [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse probability grid {text!r}") from exc
    if any(not 0 <= p <= 1 for p in grid):
        raise ConfigError("probabilities must lie in [0, 1]")
    return grid


def _load_graph(path):
    if not path or not os.path.exists(path):
        raise MissingGraphFile(f"graph file not found: {path}")
    return read_alist(path)


def _params(args) -> StorageSystemParams:
    return load_config(args.config) if args.config else StorageSystemParams()


def _config_hash(args) -> str:
    if not args.config:
        return "default"
    with open(args.config, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()[:16]


# -- output -------------------------------------------------------------------


def _meta(args) -> str:
    return f"# ldpcstore {__version__} seed={args.seed} config={_config_hash(args)}"


def emit_table(args, header: Sequence[str], rows: Sequence[Sequence], out=None) -> None:
    out = out or sys.stdout
    if args.format == "json":
        payload = {"rows": [dict(zip(header, r)) for r in rows],
                   "meta": {"version": __version__, "seed": args.seed,
                            "config": _config_hash(args)}}
        out.write(json.dumps(payload, indent=2, default=str) + "\n")
        return
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v) for v in r])
    buf.write(_meta(args) + "\n")
    out.write(buf.getvalue())


def emit_json(obj, path=None) -> None:
    text = json.dumps(obj, indent=2, default=str) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- commands -----------------------------------------------------------------


def cmd_construct(args) -> int:
    spec = ConstructionSpec.regular(args.n, args.m, args.dv, seed=args.seed,
                                    circulant_size=args.qc)
    g = construct(spec, attempts=args.attempts)
    text = format_alist(g)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_profile(args) -> int:
    g = _load_graph(args.alist)
    prof = tolerance_profile(g, args.samples, args.exact_upto, seed=args.seed,
                             max_level=args.max_level, workers=args.threads)
    emit_json(_profile_json(prof), args.out)
    return 0


def _profile_json(prof: ToleranceProfile) -> dict:
    return {
        "n": prof.n, "m": prof.m, "s_star": prof.s_star, "q": prof.q, "p": prof.p,
        "n_s": prof.n_s, "exact_upto": prof.exact_upto, "successes": prof.successes,
        "trials": prof.trials, "exact": prof.exact, "truncated_at": prof.truncated_at,
        "seed": prof.seed,
    }


def _load_profile(path) -> ToleranceProfile:
    with open(path) as fh:
        data = json.load(fh)
    return ToleranceProfile(**data)


def cmd_threshold(args) -> int:
    dd = DegreeDistribution(parse_poly(args.lam), parse_poly(args.rho))
    cfg = DeConfig(bisect_tol=args.bisect_tol)
    eps = decoding_threshold(dd, cfg)
    from .graph import design_rate

    R = float(design_rate(dd))
    emit_json({"epsilon_star": eps, "scaled": eps / (1 - R), "design_rate": R})
    return 0


def cmd_optimize(args) -> int:
    prob = OptProblem(parse_rate(args.rate), args.dc, d_max=args.dmax, grid_points=args.grid)
    res = optimize_threshold(prob)
    emit_json({
        "rate": str(res.R), "dc": res.d_c, "gamma": res.gamma,
        "epsilon_star": res.epsilon_star, "scaled": res.scaled,
        "lambda": {str(d): c for d, c in res.lambda_coeffs.items()}, "dv": res.dv,
    })
    return 0


def cmd_tradeoff(args) -> int:
    rate = parse_rate(args.rate)
    rows = []
    for row in tradeoff_curve(rate, parse_range(args.dc),
                              OptProblem(rate, 2, d_max=args.dmax, grid_points=args.grid)):
        r = row.result
        rows.append([row.d_c, row.gamma, r.scaled if r else None, r.dv if r else None, row.status])
    emit_table(args, ["dc", "gamma", "scaled_threshold", "dv", "status"], rows)
    return 0


@dataclass
class CompareRow:
    scheme: str
    storage_overhead: float
    repair_bw_overhead: float
    mttdl_days: float
    source: str
    citation: str = ""


def _ldpc_report(args, path, params):
    g = _load_graph(path)
    if getattr(args, "profile", None):
        prof = _load_profile(args.profile)
    else:
        prof = tolerance_profile(g, args.samples, args.exact_upto, seed=args.seed,
                                 workers=args.threads)
    return g, mttdl_for_graph(g, prof, params)


def scheme_row(args, scheme: str, params: StorageSystemParams) -> CompareRow:
    """``replicationK``, ``rs_N_K``, ``ldpc:path.alist`` or a reference key."""
    if scheme in REFERENCE_ROWS:
        ref = REFERENCE_ROWS[scheme]
        return CompareRow(ref.scheme, ref.storage_overhead, ref.repair_bw_overhead,
                          ref.mttdl_days, "reference", ref.citation)
    if scheme.startswith("replication"):
        copies = int(scheme[len("replication"):] or 3)
        rep = mttdl_replication_report(copies, params)
        return CompareRow(f"{copies}-replication", float(copies), 1.0, rep.normalized_days, "computed")
    if scheme.startswith("rs_"):
        try:
            n, k = (int(x) for x in scheme[3:].split("_"))
        except ValueError as exc:
            raise ConfigError(f"bad RS scheme {scheme!r}; use rs_N_K") from exc
        rep = mttdl_mds_report(n, k, params)
        return CompareRow(f"({n}, {k}) RS", n / k, float(k), rep.normalized_days, "computed")
    if scheme.startswith("ldpc:"):
        g, rep = _ldpc_report(args, scheme[5:], params)
        return CompareRow(f"({g.n}, {g.n - g.m}) LDPC", g.n / (g.n - g.m),
                          float(repair_bandwidth(g)), rep.normalized_days, "computed")
    raise ConfigError(f"unknown scheme {scheme!r}")


def cmd_compare(args) -> int:
    params = _params(args)
    schemes = [s for s in (args.schemes or "").split(",") if s.strip()]
    rows = [scheme_row(args, s.strip(), params) for s in schemes]
    emit_table(args, ["scheme", "storage_overhead", "repair_bw_overhead", "mttdl_days", "source", "citation"],
               [[r.scheme, r.storage_overhead, r.repair_bw_overhead, r.mttdl_days, r.source, r.citation]
                for r in rows])
    return 0


def cmd_mttdl(args) -> int:
    params = _params(args)
    if args.scheme == "ldpc":
        _, rep = _ldpc_report(args, args.alist, params)
    elif args.scheme == "rs":
        if args.n is None or args.k is None:
            raise ConfigError("rs needs --n and --k")
        rep = mttdl_mds_report(args.n, args.k, params)
    else:
        rep = mttdl_replication_report(args.n or 3, params)
    emit_json(rep.to_dict())
    return 0


def cmd_lossprob(args) -> int:
    g = _load_graph(args.alist)
    rows = []
    for p in parse_grid(args.p):
        est = data_loss_probability(g, p, args.trials, seed=args.seed, workers=args.threads)
        rows.append([p, est.estimate, est.ci_low, est.ci_high,
                     mds_loss_probability(15, 5, p), mds_loss_probability(3, 2, p)])
    emit_table(args, ["p", "ldpc_loss", "ci_lo", "ci_hi", "rs_loss", "rep3_loss"], rows)
    return 0


# -- wiring -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--config", help="key=value file with cluster parameters")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="ldpcstore", parents=[common],
                                 description="LDPC codes for distributed storage")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help):
        p = sub.add_parser(name, parents=[common], help=help)
        p.set_defaults(func=fn)
        return p

    p = add("construct", cmd_construct, "PEG (optionally circulant-lifted) construction")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--dv", type=int, default=2)
    p.add_argument("--qc", type=int, default=None, help="circulant size L")
    p.add_argument("--attempts", type=int, default=8, help="PEG restarts; largest girth wins")
    p.add_argument("--out")

    p = add("profile", cmd_profile, "erasure tolerance profile q_i, p_i")
    p.add_argument("--alist", required=True)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--exact-upto", type=int, default=0)
    p.add_argument("--max-level", type=int, default=None)
    p.add_argument("--out")

    p = add("threshold", cmd_threshold, "density-evolution threshold")
    p.add_argument("--lambda", dest="lam", required=True)
    p.add_argument("--rho", required=True)
    p.add_argument("--bisect-tol", type=float, default=1e-6)

    for name, fn, help in (("optimize", cmd_optimize, "best lambda for one check degree"),
                           ("tradeoff", cmd_tradeoff, "threshold vs repair bandwidth curve")):
        p = add(name, fn, help)
        p.add_argument("--rate", required=True)
        p.add_argument("--dc", required=True, type=int if name == "optimize" else str)
        p.add_argument("--dmax", type=int, default=16)
        p.add_argument("--grid", type=int, default=200)

    p = add("mttdl", cmd_mttdl, "normalized MTTDL of one scheme")
    p.add_argument("--scheme", choices=("ldpc", "rs", "replication"), required=True)
    p.add_argument("--alist")
    p.add_argument("--profile", help="precomputed profile JSON")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--samples", type=int, default=20_000)
    p.add_argument("--exact-upto", type=int, default=0)

    p = add("compare", cmd_compare, "storage / repair / MTTDL comparison table")
    p.add_argument("--schemes", default="",
                   help="comma list: replication3, rs_15_10, ldpc:F.alist, "
                        + ", ".join(REFERENCE_ROWS))
    p.add_argument("--samples", type=int, default=20_000)
    p.add_argument("--exact-upto", type=int, default=0)

    p = add("lossprob", cmd_lossprob, "data-loss probability under i.i.d. erasures")
    p.add_argument("--alist", required=True)
    p.add_argument("--p", required=True, help="comma-separated erasure probabilities")
    p.add_argument("--trials", type=int, default=100_000)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except MissingGraphFile as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, RateImpossible) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except LdpcStoreError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
