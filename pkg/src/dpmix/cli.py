"""Command-line entry point: ``dpmix <subcommand>`` or ``python -m dpmix``."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import diagnostics as diag
from .errors import DPMixError
from .exact import exact_joint_over_t
from .experiments import (
    CONFIG_KEYS,
    DataModel,
    ExperimentConfig,
    format_data,
    read_config_file,
    read_data,
    rows_to_csv,
    simulate_data,
    trend_experiment,
)
from .gibbs import ChainConfig, estimate_posterior_t
from .mfm import MfmConfig, mfm_posterior_s_partitions, mfm_posterior_s_assignments
from .partitions import DEFAULT_ENUMERATION_CAP, prior_num_clusters


def _load(arg: str) -> np.ndarray:
    if arg == "-":
        return read_data(sys.stdin.read(), is_text=True)
    return read_data(arg)


def _floats(s):
    return tuple(float(p) for p in s.split(",") if p.strip()) if s else ()


def cmd_prior_t(args, out):
    post = prior_num_clusters(args.n, args.alpha)
    out.write("t,prob\n")
    for t, p in enumerate(post.probs, 1):
        out.write(f"{t},{float(p)!r}\n")


def cmd_exact(args, out):
    xs = _load(args.data)
    post = exact_joint_over_t(xs, args.alpha, cap=args.cap)
    out.write("t,log_joint,prob\n")
    for t, (lj, p) in enumerate(zip(post.log_joint, post.probs), 1):
        out.write(f"{t},{float(lj)!r},{float(p)!r}\n")


def cmd_gibbs(args, out):
    xs = _load(args.data)
    cfg = ChainConfig(args.sweeps, args.burn_in, args.thin, args.seed, args.chains, args.init)
    post = estimate_posterior_t(xs, args.alpha, cfg)
    out.write("t,prob,se\n")
    last = int(np.max(np.nonzero(post.probs)[0])) + 1
    for t in range(1, last + 1):
        out.write(f"{t},{float(post.probs[t - 1])!r},{float(post.std_errors[t - 1])!r}\n")


def cmd_diagnostics(args, out):
    xs = _load(args.data)
    n = xs.size
    checks = [args.check] if args.check else ["eq5", "ratio", "ustat", "r2bound"]
    out.write("check,key,value\n")
    if "eq5" in checks and n >= 2:
        slacks = diag.all_split_slacks(xs, max_n=20) if n <= 20 else None
        if slacks is None:
            rng = np.random.default_rng(args.seed)
            labels = rng.integers(0, 2, size=(10_000, n))
            labels[:, 0] = 0
            labels[:, -1] = 1
            slacks = np.array([diag.check_split_inequality(xs, lab).slack for lab in labels])
        out.write(f"eq5,splits,{len(slacks)}\n")
        out.write(f"eq5,min_slack,{float(slacks.min())!r}\n")
        out.write(f"eq5,holds,{bool(slacks.min() >= -1e-9)}\n")
    if "ratio" in checks and 2 <= n <= args.cap:
        ratio, bound = diag.proposition_ratio_bound(xs, args.alpha, cap=args.cap)
        out.write(f"ratio,ratio_log,{ratio!r}\nratio,bound_log,{bound!r}\n")
        out.write(f"ratio,holds,{ratio >= bound - 1e-9}\n")
        out.write(f"ratio,p1_upper_bound,{diag.p1_upper_bound(xs)!r}\n")
    if "ustat" in checks:
        rng = np.random.default_rng(args.seed)
        for k in range(1, min(args.max_k, n) + 1):
            rep = diag.u_statistic(xs, k, args.budget, rng)
            out.write(f"ustat,U_{k},{rep.value!r}\nustat,U_{k}_exact,{rep.exact}\n")
            out.write(f"ustat,U_{k}_se,{rep.std_error!r}\n")
    if "r2bound" in checks and 2 <= n <= args.cap:
        log_r1, log_r2 = diag.r_statistics(xs, args.alpha, cap=args.cap)
        out.write(f"r2bound,log_R1,{log_r1!r}\nr2bound,log_R2,{log_r2!r}\n")
        out.write(f"r2bound,r1_bound_log,{diag.r1_bound_log(xs)!r}\n")
        for K in range(1, n):
            out.write(f"r2bound,K_{K},{diag.r2_lower_bound(xs, K, args.alpha)!r}\n")


def cmd_mfm(args, out):
    xs = _load(args.data)
    cfg = MfmConfig.parse(args.prior_s, args.smax, args.gamma)
    if args.path == "assignments":
        post = mfm_posterior_s_assignments(xs, cfg)
    else:
        post = mfm_posterior_s_partitions(xs, cfg)
    out.write("s,prior,posterior\n")
    for s, (p0, p) in enumerate(zip(cfg.pmf_s, post.probs), 1):
        out.write(f"{s},{p0!r},{float(p)!r}\n")


def cmd_trend(args, out):
    values = read_config_file(args.config) if args.config else {}
    # flags override the file
    for key in CONFIG_KEYS:
        flag = getattr(args, key.replace("-", "_"))
        if flag is not None:
            values[key] = str(flag)
    cfg = ExperimentConfig.from_mapping(values)
    rows = trend_experiment(cfg)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            rows_to_csv(rows, fh)
    else:
        rows_to_csv(rows, out)


def cmd_simulate(args, out):
    model = DataModel(args.model, _floats(args.weights), _floats(args.means))
    out.write(format_data(simulate_data(model, args.n, np.random.default_rng(args.seed))))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dpmix", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def data_cmd(name, help):
        sp = sub.add_parser(name, help=help)
        sp.add_argument("--data", required=True, help="file with one real per line, or - for stdin")
        sp.add_argument("--alpha", type=float, default=1.0)
        return sp

    sp = sub.add_parser("prior-t", help="CRP prior on the number of clusters")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--alpha", type=float, default=1.0)
    sp.set_defaults(func=cmd_prior_t)

    sp = data_cmd("exact", "exact posterior on t by partition enumeration")
    sp.add_argument("--cap", type=int, default=DEFAULT_ENUMERATION_CAP)
    sp.set_defaults(func=cmd_exact)

    sp = data_cmd("gibbs", "collapsed Gibbs estimate of the posterior on t")
    sp.add_argument("--sweeps", type=int, default=ChainConfig.n_sweeps)
    sp.add_argument("--burn-in", type=int, default=ChainConfig.burn_in)
    sp.add_argument("--thin", type=int, default=ChainConfig.thin)
    sp.add_argument("--chains", type=int, default=ChainConfig.n_chains)
    sp.add_argument("--init", default=ChainConfig.init)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_gibbs)

    sp = data_cmd("diagnostics", "bound checks on a dataset")
    sp.add_argument("--check", choices=["eq5", "ratio", "ustat", "r2bound"])
    sp.add_argument("--budget", type=int, default=diag.DEFAULT_USTAT_BUDGET)
    sp.add_argument("--max-k", type=int, default=5)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--cap", type=int, default=DEFAULT_ENUMERATION_CAP)
    sp.set_defaults(func=cmd_diagnostics)

    sp = sub.add_parser("mfm", help="exact posterior on s under a mixture of finite mixtures")
    sp.add_argument("--data", required=True)
    sp.add_argument("--smax", type=int, default=4)
    sp.add_argument("--gamma", type=float, default=1.0)
    sp.add_argument("--prior-s", default="geometric",
                    help="geometric (2^-s), uniform, or comma-separated weights")
    sp.add_argument("--path", choices=["partitions", "assignments"], default="partitions")
    sp.set_defaults(func=cmd_mfm)

    sp = sub.add_parser("trend", help="p(T=1|x) versus n, as CSV")
    sp.add_argument("--config", help="key = value config file")
    for key in CONFIG_KEYS:
        sp.add_argument("--" + key, help="overrides the config file")
    sp.add_argument("--out", help="write CSV here instead of stdout")
    sp.set_defaults(func=cmd_trend)

    sp = sub.add_parser("simulate", help="draw a dataset, one value per line")
    sp.add_argument("--model", default="standard-normal",
                    choices=["standard-normal", "gaussian-mixture"])
    sp.add_argument("--weights", default="")
    sp.add_argument("--means", default="")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_simulate)
    return p


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        args.func(args, out)
    except DPMixError as exc:
        print(f"dpmix: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
