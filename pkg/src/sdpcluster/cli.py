"""Command-line pipeline: generate, solve, certify, baseline, phase-diagram.

Exit codes: 0 success, 1 usage error, 2 certificate fail or missed
recovery under --expect-recovery, 3 degenerate certificate
construction, 4 numerical failure.
"""

import argparse
import os
import secrets
import sys
from pathlib import Path

import numpy as np

from .baselines import brute_force_kmeans, lloyd, mle_k2_failure_witness, spectral_init
from .certificate import construct_lambda, verify_certificate
from .datagen import (
    MixtureSpec,
    load_dataset,
    pairwise_harmonic_min,
    place_centers,
    sample_dataset,
    save_dataset,
)
from .experiments import PhaseGrid, emit_csv, run_phase_diagram, write_manifest
from .membership import (
    load_partition,
    save_membership,
    save_partition,
)
from .rounding import RoundingConfig, is_exact_recovery
from .solver import SolverConfig, build_affinity, solve_regularized, solve_sdp

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAIL = 2
EXIT_DEGENERATE = 3
EXIT_NUMERICAL = 4


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems with exit code 1."""

    def error(self, message):
        raise _UsageError(message)


def _explicit_seed(value):
    """Use the given seed, or draw one and announce it."""
    if value is not None:
        return int(value)
    seed = secrets.randbelow(2**63)
    print(f"seed={seed}")
    return seed


def _data_path(arg):
    path = Path(arg)
    return path / "data.txt" if path.is_dir() else path


def _labels_path(arg, data_arg):
    if arg is not None:
        return Path(arg)
    path = Path(data_arg)
    base = path if path.is_dir() else path.parent
    return base / "labels.txt"


def parse_config(path):
    """Flat key=value lines; '#' starts a comment; blanks ignored."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
            key, val = line.split("=", 1)
            out[key.strip()] = val.strip()
    return out


def _solver_config(args):
    return SolverConfig(
        max_iters=args.max_iters,
        tol_primal=args.tol_primal,
        tol_obj=args.tol_obj,
        rho=args.rho,
        over_relaxation=args.over_relaxation,
    )


def _add_solver_flags(sub):
    sub.add_argument("--max-iters", type=int, default=20000)
    sub.add_argument("--tol-primal", type=float, default=1e-6)
    sub.add_argument("--tol-obj", type=float, default=1e-9)
    sub.add_argument("--rho", type=float, default=1.0)
    sub.add_argument("--over-relaxation", type=float, default=1.6)


def build_parser():
    parser = _Parser(prog="sdpcluster", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)

    gen = subs.add_parser("generate", help="sample a synthetic mixture dataset")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--k", type=int, required=True)
    gen.add_argument("--p", type=int, required=True)
    gen.add_argument("--sigma2", type=float, required=True)
    gen.add_argument("--delta2", type=float, required=True)
    gen.add_argument("--seed", type=int, default=None)
    gen.add_argument("--out", required=True, help="output directory")
    gen.add_argument(
        "--mode",
        choices=("orthogonal", "simplex", "random_sphere"),
        default="orthogonal",
    )
    gen.add_argument("--sizes", default=None, help="comma-separated cluster sizes")

    sol = subs.add_parser("solve", help="solve the relaxation on a dataset")
    sol.add_argument("--data", required=True, help="dataset file or directory")
    sol.add_argument("--k", type=int, default=None)
    sol.add_argument("--out", required=True, help="membership matrix output file")
    sol.add_argument("--labels", default=None, help="truth labels (for --expect-recovery)")
    sol.add_argument("--expect-recovery", action="store_true")
    sol.add_argument(
        "--regularized",
        type=float,
        default=None,
        metavar="LAMBDA",
        help="solve the trace-penalized variant at this penalty",
    )
    sol.add_argument("--trace", default=None, help="iteration trace CSV path")
    sol.add_argument("--seed", type=int, default=None, help="rounding seed")
    _add_solver_flags(sol)

    cer = subs.add_parser("certify", help="construct and verify the dual certificate")
    cer.add_argument("--data", required=True)
    cer.add_argument("--labels", required=True)
    cer.add_argument("--beta", type=float, default=0.5)
    cer.add_argument(
        "--lambda",
        dest="lam",
        type=float,
        default=None,
        help="explicit penalty; default p*sigma2 + (beta/4)*m*Delta2 with the "
        "separation estimated from empirical cluster means",
    )
    cer.add_argument("--sigma2", type=float, default=None, help="override header value")
    cer.add_argument("--delta2", type=float, default=None, help="override plug-in separation")
    cer.add_argument("--tol", type=float, default=None)
    cer.add_argument("--tol-eig", type=float, default=None)

    base = subs.add_parser("baseline", help="reference algorithms")
    base.add_argument("--method", required=True, choices=("brute", "lloyd", "spectral", "witness"))
    base.add_argument("--data", required=True)
    base.add_argument("--k", type=int, default=None)
    base.add_argument("--seed", type=int, default=None)
    base.add_argument("--labels", default=None, help="labels giving the signs for witness")
    base.add_argument("--out", default=None, help="write the estimated labels here")
    base.add_argument("--max-iters", type=int, default=100)

    phase = subs.add_parser("phase-diagram", help="Monte Carlo recovery-rate grid")
    phase.add_argument("--config", required=True)
    phase.add_argument("--out", required=True)
    phase.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    phase.add_argument("--seed", type=int, default=None, help="override config seed")

    return parser


def _cmd_generate(args):
    seed = _explicit_seed(args.seed)
    if args.sizes is not None:
        sizes = tuple(int(s) for s in args.sizes.split(","))
    else:
        if args.n % args.k != 0:
            raise _UsageError("--n must be divisible by --k unless --sizes is given")
        sizes = (args.n // args.k,) * args.k
    centers = place_centers(args.mode, args.k, args.p, args.delta2, seed=seed)
    spec = MixtureSpec(n=args.n, sizes=sizes, sigma2=args.sigma2, seed=seed)
    data = sample_dataset(centers, spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_dataset(out / "data.txt", out / "labels.txt", data)
    print(f"data={out / 'data.txt'}")
    print(f"labels={out / 'labels.txt'}")
    return EXIT_OK


def _cmd_solve(args):
    X, n, p, K, sigma2 = load_dataset(_data_path(args.data))
    K = args.k if args.k is not None else K
    with np.errstate(over="ignore"):
        A = build_affinity(X)
    if not np.isfinite(A).all():
        print("error: affinity matrix overflowed to non-finite values", file=sys.stderr)
        return EXIT_NUMERICAL
    cfg = _solver_config(args)
    if args.regularized is not None:
        res = solve_regularized(A, args.regularized, cfg, trace_path=args.trace)
    else:
        res = solve_sdp(A, K, cfg, trace_path=args.trace)
    if res.status == "numerical_failure":
        print("status=numerical_failure")
        return EXIT_NUMERICAL
    save_membership(args.out, res.Z_hat)
    print(f"objective={format(res.objective, '.17g')}")
    print(f"iters={res.iters}")
    print(f"status={res.status}")
    print(f"trace={format(res.trace, '.17g')}")
    print(f"psd_min_eig={format(res.residuals.psd_min_eig, '.17g')}")
    print(f"rowsum_max_err={format(res.residuals.rowsum_max_err, '.17g')}")
    if args.expect_recovery:
        truth = load_partition(_labels_path(args.labels, args.data), K=K)
        rcfg = RoundingConfig(seed=_explicit_seed(args.seed))
        rec = is_exact_recovery(res.Z_hat, truth, cfg=rcfg)
        print(f"by_rounding={str(rec['by_rounding']).lower()}")
        print(f"by_frobenius={str(rec['by_frobenius']).lower()}")
        if not (rec["by_rounding"] and rec["by_frobenius"]):
            return EXIT_FAIL
    return EXIT_OK


def _cmd_certify(args):
    X, n, p, K, sigma2 = load_dataset(_data_path(args.data))
    part = load_partition(Path(args.labels))
    if args.sigma2 is not None:
        sigma2 = args.sigma2
    if args.lam is not None:
        lam = args.lam
    else:
        if args.delta2 is not None:
            delta2 = args.delta2
        else:
            means = np.column_stack(
                [X[:, idx].mean(axis=1) for idx in part.cluster_indices()]
            )
            diffs = [
                float(((means[:, a] - means[:, b]) ** 2).sum())
                for a in range(part.K)
                for b in range(a + 1, part.K)
            ]
            delta2 = min(diffs)
        m = pairwise_harmonic_min(part.cluster_sizes())
        lam = construct_lambda(sigma2, p, m, delta2, args.beta)
    report = verify_certificate(X, part, lam, tol=args.tol, tol_eig=args.tol_eig)
    print(f"lambda={format(lam, '.17g')}")
    for key, val in report.as_dict().items():
        if isinstance(val, bool):
            print(f"{key}={str(val).lower()}")
        elif isinstance(val, float):
            print(f"{key}={format(val, '.17g')}")
        else:
            print(f"{key}={val}")
    if report.failure_reason is not None:
        return EXIT_DEGENERATE
    return EXIT_OK if report.passed else EXIT_FAIL


def _write_labels(part, out):
    if out:
        save_partition(out, part)
        print(f"labels_out={out}")
    else:
        print("labels=" + ",".join(str(int(v)) for v in part.labels))


def _cmd_baseline(args):
    X, n, p, K, sigma2 = load_dataset(_data_path(args.data))
    K = args.k if args.k is not None else K
    if args.method == "witness":
        truth = load_partition(_labels_path(args.labels, args.data), K=2)
        eta = np.where(truth.labels == 1, 1.0, -1.0)
        idx = mle_k2_failure_witness(X, eta)
        print(f"witness_index={'none' if idx is None else idx}")
        return EXIT_OK
    if args.method == "brute":
        part = brute_force_kmeans(X, K)
    elif args.method == "spectral":
        part = spectral_init(X, K, seed=_explicit_seed(args.seed))
    else:
        init = spectral_init(X, K, seed=_explicit_seed(args.seed))
        part = lloyd(X, K, init, max_iters=args.max_iters)
    _write_labels(part, args.out)
    return EXIT_OK


def _grid_from_config(cfg, seed_override):
    def need(key):
        if key not in cfg:
            raise _UsageError(f"phase-diagram config is missing {key!r}")
        return cfg[key]

    seed = seed_override
    if seed is None and "seed" in cfg:
        seed = int(cfg["seed"])
    if seed is None:
        raise _UsageError(
            "phase-diagram requires an explicit seed (config key 'seed' or --seed)"
        )
    solver = SolverConfig(
        max_iters=int(cfg.get("max_iters", 20000)),
        tol_primal=float(cfg.get("tol_primal", 1e-6)),
        tol_obj=float(cfg.get("tol_obj", 1e-9)),
        rho=float(cfg.get("rho", 1.0)),
        over_relaxation=float(cfg.get("over_relaxation", 1.6)),
    )
    return PhaseGrid(
        n=int(need("n")),
        K=int(need("k")),
        p=int(need("p")),
        sigma2=float(need("sigma2")),
        ratios=tuple(float(r) for r in need("ratios").split(",")),
        trials=int(need("trials")),
        methods=tuple(cfg.get("methods", "sdp").split(",")),
        master_seed=seed,
        beta=float(cfg.get("beta", 0.5)),
        delta=float(cfg.get("delta", 1.0)),
        frob_tol=float(cfg.get("frob_tol", 1e-3)),
        record_runtime=cfg.get("record_runtime", "false").lower() == "true",
        solver=solver,
    )


def _cmd_phase(args):
    grid = _grid_from_config(parse_config(args.config), args.seed)
    rows = run_phase_diagram(grid, jobs=args.jobs)
    emit_csv(rows, args.out)
    write_manifest(str(args.out) + ".manifest", grid, jobs=args.jobs)
    print(f"csv={args.out}")
    print(f"manifest={args.out}.manifest")
    return EXIT_OK


_COMMANDS = {
    "generate": _cmd_generate,
    "solve": _cmd_solve,
    "certify": _cmd_certify,
    "baseline": _cmd_baseline,
    "phase-diagram": _cmd_phase,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except np.linalg.LinAlgError as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def entrypoint():
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
