"""Command-line front end.

    erwlab coeffs   --p P --n N
    erwlab exact    --p P [--q Q] --n N [--moments]
    erwlab simulate --p P [--q Q] --n N --reps R --seed S [--sampler markov|memory]
    erwlab diag     ratio|besseen|llt|llt-sup|mdp ...
    erwlab infer    p-lower|position|coverage ...

CSV output starts with ``#`` lines echoing ``schema=1`` and every resolved
option (``--threads`` excepted, since it cannot change results).  Grids are
written ``a:b:step`` and include b when step divides b - a (to 1e-9).
``--config FILE`` reads ``key = value`` lines named after the long flags;
flags given on the command line win.

Exit codes: 0 ok, 2 invalid input, 3 resource cap, 4 unsupported regime.
"""
from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import coeffs, diagnostics, exact, inference, montecarlo
from .errors import DomainError, ERWError, ResourceCapError
from .model import ERWParams, sample_path_markov, sample_path_memory
from .streams import ReplicateStream

NOT_ECHOED = {"func", "out", "format", "config", "threads", "export_path"}


def parse_grid(text: str) -> np.ndarray:
    try:
        a, b, step = (float(t) for t in text.split(":"))
    except ValueError:
        raise DomainError(f"grid must look like a:b:step, got {text!r}") from None
    if step <= 0 or b < a:
        raise DomainError(f"grid {text!r} needs step > 0 and b >= a")
    count = math.floor((b - a) / step + 1e-9)
    return np.round(a + step * np.arange(count + 1), 12)


def parse_int_list(text: str) -> list[int]:
    try:
        return [int(float(t)) for t in str(text).split(",") if t.strip()]
    except ValueError:
        raise DomainError(f"expected comma-separated integers, got {text!r}") from None


def read_config(path: str) -> dict:
    cfg = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DomainError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (t.strip() for t in line.split("=", 1))
            cfg[key.lstrip("-").replace("-", "_")] = value
    return cfg


def _need(args, *names) -> None:
    for name in names:
        if getattr(args, name) is None:
            raise DomainError(f"--{name.replace('_', '-')} is required")


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in NOT_ECHOED}


def _emit(args, csv_body: str | None, payload: dict | None) -> None:
    if args.format == "json":
        assert payload is not None
        text = json.dumps({"schema": 1, "config": _config(args), **payload}, indent=2) + "\n"
    else:
        assert csv_body is not None
        head = ["# schema=1"] + [f"# {k}={v}" for k, v in _config(args).items()]
        text = "\n".join(head) + "\n" + csv_body
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --- subcommands -------------------------------------------------------------

def cmd_coeffs(args):
    _need(args, "p", "n")
    table = coeffs.build_coeffs(args.p, args.n)
    payload = None
    if args.format == "json":
        payload = {"k": list(range(1, table.n + 1)), "gamma": table.gamma.tolist(),
                   "a": table.a.tolist(), "v": table.v.tolist(), "regime": table.regime.value}
    _emit(args, table.to_csv(), payload)


def cmd_exact(args):
    _need(args, "n")
    if args.n > args.max_n:
        raise ResourceCapError(f"n={args.n} exceeds the exact-DP cap {args.max_n}; raise --max-n to override")
    _need(args, "p")
    dist = exact.exact_pmf(ERWParams(args.p, args.q, args.n), cap=args.max_n,
                           renormalize=args.renormalize)
    body = dist.to_csv()
    payload = {"support": dist.support.tolist(), "pmf": dist.pmf.tolist(),
               "a_n": dist.a_n, "v_n": dist.v_n, "mass_drift": dist.mass_drift}
    if args.moments:
        mom = exact.exact_moments(dist)
        payload["moments"] = mom
        body = "".join(f"# {k}={coeffs.fmt(v)}\n" for k, v in mom.items()) + body
    _emit(args, body, payload)


def _plan(args) -> montecarlo.SimulationPlan:
    _need(args, "p", "n")
    if args.seed is None:
        raise DomainError("--seed is required for simulation (no implicit entropy)")
    if args.reps is None:
        raise DomainError("--reps is required for simulation")
    return montecarlo.SimulationPlan(ERWParams(args.p, args.q, args.n), args.reps, args.seed,
                                     args.sampler)


def cmd_simulate(args):
    plan = _plan(args)
    ens = montecarlo.run_ensemble(plan, threads=args.threads)
    if args.export_path:
        sampler = sample_path_memory if plan.sampler == "memory" else sample_path_markov
        path = sampler(plan.params, ReplicateStream(plan.seed, 0))
        with open(args.export_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(path.to_csv())
    _emit(args, ens.to_csv(), ens.summary())


def _law(args):
    _need(args, "p", "n")
    params = ERWParams(args.p, args.q, args.n)
    if args.source == "exact":
        obj = exact.exact_pmf(params)
    else:
        plan = _plan(args)
        obj = montecarlo.run_ensemble(plan, threads=args.threads)
    return diagnostics.standardize(obj, args.normalization)


def _emit_report(args, rep: diagnostics.DiagnosticsReport, extra_lines: dict | None = None):
    body = rep.to_csv()
    if extra_lines:
        body = "".join(f"# {k}={v}\n" for k, v in extra_lines.items()) + body
    _emit(args, body, {"report": rep.envelope()})


def cmd_diag_ratio(args):
    _need(args, "p", "n")
    coeffs.require_supported(args.p)
    rep = diagnostics.cramer_ratio_curve(_law(args), parse_grid(args.x_grid))
    _emit_report(args, rep, {"threshold": coeffs.fmt(rep.extra["threshold"])})


def cmd_diag_besseen(args):
    _need(args, "p", "n")
    coeffs.require_supported(args.p)
    ns = parse_int_list(args.n)
    if args.source != "exact":
        _plan(argparse.Namespace(**{**vars(args), "n": ns[0]}))
    rep = diagnostics.besseen_curve(args.p, args.q, ns, source=args.source,
                                    reps=args.reps, seed=args.seed)
    _emit_report(args, rep, {"normalized": ";".join(coeffs.fmt(v) for v in rep.extra["normalized"])})


def cmd_diag_llt(args):
    _need(args, "p", "n")
    coeffs.require_supported(args.p)
    dist = exact.exact_pmf(ERWParams(args.p, args.q, args.n))
    if args.k_range:
        lo, hi = (int(float(t)) for t in args.k_range.split(":"))
    else:
        hi = int(math.ceil(3 * dist.scale))
        lo = -hi
    rep = diagnostics.llt_ratio(dist, np.arange(lo, hi + 1))
    sup = diagnostics.llt_sup_distance(dist)
    rep.extra["llt_sup"] = sup
    _emit_report(args, rep, {"lattice_factor": coeffs.fmt(rep.extra["lattice_factor"]),
                             "llt_sup": coeffs.fmt(sup)})


def cmd_diag_llt_sup(args):
    _need(args, "p", "n")
    coeffs.require_supported(args.p)
    rep = diagnostics.llt_sup_curve(args.p, args.q, parse_int_list(args.n))
    _emit_report(args, rep)


def cmd_diag_mdp(args):
    _need(args, "p", "n")
    coeffs.require_supported(args.p)
    rep = diagnostics.mdp_curve(ERWParams(args.p, args.q, 1), args.x, args.beta,
                                parse_int_list(args.n), kind=args.b_kind)
    _emit_report(args, rep, {"reference": coeffs.fmt(rep.extra["reference"])})


def cmd_infer_p_lower(args):
    _need(args, "n", "s")
    rep = inference.p_lower_report(inference.ConfidenceQuery(args.n, args.s, args.kappa))
    _emit_json(args, rep)


def cmd_infer_position(args):
    _need(args, "p", "n")
    lo, hi = inference.position_interval(args.p, args.n, args.kappa)
    _emit_json(args, {"schema": 1, "p": args.p, "n": args.n, "kappa": args.kappa,
                      "z": inference.z_value(args.kappa), "lower": lo, "upper": hi,
                      "assumes_q": 0.5})


def cmd_infer_coverage(args):
    plan = _plan(args)
    res = inference.coverage_experiment(args.p, args.q, args.n, args.kappa, plan.reps, plan.seed,
                                        sampler=args.sampler, threads=args.threads)
    if args.exact:
        res["exact"] = inference.exact_coverage(args.p, args.q, args.n, args.kappa)
    if args.format == "csv":
        body = ("kappa,n,p_true,coverage,reps,seed\n"
                f"{coeffs.fmt(args.kappa)},{args.n},{coeffs.fmt(args.p)},"
                f"{coeffs.fmt(res['coverage'])},{plan.reps},{plan.seed}\n")
        _emit(args, body, None)
    else:
        _emit_json(args, res)


def _emit_json(args, payload: dict):
    args.format = "json"
    _emit(args, None, payload)


# --- parser ------------------------------------------------------------------

def _common(sp, fmt_default="csv"):
    sp.add_argument("--out", help="output file (default: stdout)")
    sp.add_argument("--format", choices=("csv", "json"), default=fmt_default)
    sp.add_argument("--config", help="file of 'key = value' lines mirroring the flags")


def _walk_params(sp, q=True):
    sp.add_argument("--p", type=float, required=False, default=None)
    if q:
        sp.add_argument("--q", type=float, default=0.5)


def _mc_flags(sp):
    sp.add_argument("--reps", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--sampler", choices=montecarlo.SAMPLERS, default="markov")
    sp.add_argument("--threads", type=int, default=1, help="worker cap; never changes results")


def build_parser() -> tuple[argparse.ArgumentParser, list]:
    parser = argparse.ArgumentParser(prog="erwlab", description="Elephant random walk laboratory")
    sub = parser.add_subparsers(dest="command", required=True)
    leaves = []

    sp = sub.add_parser("coeffs", help="gamma_k, a_k, v_k table")
    _walk_params(sp, q=False)
    sp.add_argument("--n", type=int)
    _common(sp)
    sp.set_defaults(func=cmd_coeffs)
    leaves.append(sp)

    sp = sub.add_parser("exact", help="exact law of S_n")
    _walk_params(sp)
    sp.add_argument("--n", type=int)
    sp.add_argument("--moments", action="store_true")
    sp.add_argument("--max-n", type=int, default=exact.EXACT_CAP, help="override the DP size cap")
    sp.add_argument("--renormalize", action="store_true", help="renormalize every DP layer")
    _common(sp)
    sp.set_defaults(func=cmd_exact)
    leaves.append(sp)

    sp = sub.add_parser("simulate", help="Monte Carlo ensemble of terminal positions")
    _walk_params(sp)
    sp.add_argument("--n", type=int)
    _mc_flags(sp)
    sp.add_argument("--export-path", help="write replicate 0's path as k,X_k,S_k")
    _common(sp)
    sp.set_defaults(func=cmd_simulate)
    leaves.append(sp)

    dp = sub.add_parser("diag", help="normal-approximation diagnostics")
    dsub = dp.add_subparsers(dest="diagnostic", required=True)

    sp = dsub.add_parser("ratio", help="Cramer tail ratios")
    _walk_params(sp)
    sp.add_argument("--n", type=int)
    sp.add_argument("--x-grid", default="0:2:0.1")
    sp.add_argument("--source", choices=("exact", "mc"), default="exact")
    sp.add_argument("--normalization", choices=diagnostics.NORMALIZATIONS, default="martingale")
    _mc_flags(sp)
    _common(sp)
    sp.set_defaults(func=cmd_diag_ratio)
    leaves.append(sp)

    sp = dsub.add_parser("besseen", help="Berry-Esseen distance over horizons")
    _walk_params(sp)
    sp.add_argument("--n", default="100,1000,10000", help="comma-separated horizons")
    sp.add_argument("--source", choices=("exact", "mc"), default="exact")
    _mc_flags(sp)
    _common(sp)
    sp.set_defaults(func=cmd_diag_besseen)
    leaves.append(sp)

    sp = dsub.add_parser("llt", help="local limit ratio table")
    _walk_params(sp)
    sp.add_argument("--n", type=int)
    sp.add_argument("--k-range", help="lo:hi (default: +-3 standard deviations)")
    _common(sp)
    sp.set_defaults(func=cmd_diag_llt)
    leaves.append(sp)

    sp = dsub.add_parser("llt-sup", help="local limit sup distance over horizons")
    _walk_params(sp)
    sp.add_argument("--n", default="100,1000,10000")
    _common(sp)
    sp.set_defaults(func=cmd_diag_llt_sup)
    leaves.append(sp)

    sp = dsub.add_parser("mdp", help="moderate deviation rate curve")
    _walk_params(sp)
    sp.add_argument("--n", default="100,1000,10000")
    sp.add_argument("--x", type=float, default=1.0)
    sp.add_argument("--beta", type=float, default=0.25)
    sp.add_argument("--b-kind", choices=("power", "log"), default="power")
    _common(sp)
    sp.set_defaults(func=cmd_diag_mdp)
    leaves.append(sp)

    ip = sub.add_parser("infer", help="confidence limits and intervals")
    isub = ip.add_subparsers(dest="inference", required=True)

    sp = isub.add_parser("p-lower", help="lower confidence limit for p")
    sp.add_argument("--n", type=int)
    sp.add_argument("--s", type=int, help="observed S_n")
    sp.add_argument("--kappa", type=float, default=0.05)
    _common(sp, "json")
    sp.set_defaults(func=cmd_infer_p_lower)
    leaves.append(sp)

    sp = isub.add_parser("position", help="interval for S_n given p")
    _walk_params(sp, q=False)
    sp.add_argument("--n", type=int)
    sp.add_argument("--kappa", type=float, default=0.05)
    _common(sp, "json")
    sp.set_defaults(func=cmd_infer_position)
    leaves.append(sp)

    sp = isub.add_parser("coverage", help="Monte Carlo coverage of the lower limit")
    _walk_params(sp)
    sp.add_argument("--n", type=int)
    sp.add_argument("--kappa", type=float, default=0.05)
    sp.add_argument("--exact", action="store_true", help="also report the exact-law coverage")
    _mc_flags(sp)
    _common(sp, "json")
    sp.set_defaults(func=cmd_infer_coverage)
    leaves.append(sp)

    return parser, leaves


def _config_value(action, text: str):
    # switches take true/false in a config file; everything else goes through argparse typing
    if isinstance(action, argparse._StoreTrueAction):
        low = text.lower()
        if low not in ("true", "false", "1", "0", "yes", "no"):
            raise DomainError(f"config key {action.dest!r} expects true or false, got {text!r}")
        return low in ("true", "1", "yes")
    return text


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, leaves = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    try:
        if known.config:
            cfg = read_config(known.config)
            for leaf in leaves:
                actions = {a.dest: a for a in leaf._actions}
                leaf.set_defaults(**{k: _config_value(actions[k], v)
                                     for k, v in cfg.items() if k in actions})
        args = parser.parse_args(argv)
        if getattr(args, "threads", 1) < 1:
            raise DomainError("--threads must be >= 1")
        args.func(args)
    except ERWError as exc:
        print(f"erwlab: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"erwlab: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
