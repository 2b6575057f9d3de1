"""Command-line entry point: ``rsplearn <command> ...``.

Exit codes: 0 success, 2 bad arguments or configuration, 3 non-ergodic chain.
"""

import argparse
import logging
import math
import sys
from pathlib import Path

from ..errors import ConfigurationError, NotErgodicError
from ..gridworld import GridSpec, build_feature_map, build_grid_mdp
from ..learner import TrainConfig, train_algorithm1
from ..markov import value_iteration
from ..perturbation import KAPPA_NAMES, regret_certificate
from ..policy import sample_demonstrations
from . import io
from .config import ExperimentConfig
from .plotting import plot_sweep
from .sweep import ROW_FIELDS, SUMMARY_FIELDS, output_paths, run_sweep, summarize, write_csv

log = logging.getLogger("rsplearn")

EXIT_USAGE = 2
EXIT_NOT_ERGODIC = 3


def cmd_gridworld_solve(args):
    spec = GridSpec.from_dict(io.read_json(args.config)) if args.config else GridSpec()
    mdp = build_grid_mdp(spec)
    policy, residuals = value_iteration(mdp, args.discount, args.tol)
    io.write_json(args.out, policy.tolist())
    if args.mdp_out:
        io.write_json(args.mdp_out, mdp.to_dict())
    if args.features_out:
        io.write_json(args.features_out, build_feature_map(spec, mdp).to_dict())
    print(f"value iteration converged in {len(residuals)} sweeps; policy written to {args.out}")


def cmd_sample(args):
    mdp = io.load_mdp(args.env)
    expert = io.load_policy(args.expert)
    samples = sample_demonstrations(mdp, expert, args.m, args.seed)
    io.write_samples(args.out, samples)
    print(f"wrote {len(samples)} samples to {args.out}")


def cmd_train(args):
    samples = io.read_samples(args.samples)
    if len(samples) < 2:
        raise ConfigurationError("training needs at least 2 samples")
    features = io.load_feature_map(args.features)
    config = TrainConfig(args.gamma, args.cap, args.tol, args.max_iters, args.seed)
    trained = train_algorithm1(samples, features, config)
    io.write_json(args.out, trained.to_dict(feature_map_ref=str(args.features)))
    print(f"chosen budget {trained.chosen_budget:g}; "
          f"hold-out log-loss {trained.holdout_logloss:.6f}; written to {args.out}")


def format_certificate(cert):
    """Aligned text table of the condition numbers and bounds."""
    def num(x):
        return "inf" if math.isinf(x) else f"{x:.6g}"

    lines = [
        f"{'true regret':<24}{num(cert.true_regret)}",
        f"{'estimation term':<24}{num(cert.estimation_term)}",
        f"{'perturbation term':<24}{num(cert.perturbation_term)}",
        f"{'averaged KL':<24}{num(cert.kl_term)}",
        f"{'R_max':<24}{num(cert.r_max)}",
        "",
        f"{'kappa variant':<24}{'kappa':>14}{'bound':>14}{'pinsker bound':>16}",
    ]
    for name in KAPPA_NAMES:
        lines.append(
            f"{name:<24}{num(cert.kappas[name]):>14}{num(cert.bound_per_kappa[name]):>14}"
            f"{num(cert.pinsker_bound_per_kappa[name]):>16}"
        )
    lines.append("")
    lines.append(f"{'tightest':<24}{cert.best_kappa} ({num(cert.min_bound)})")
    return "\n".join(lines)


def cmd_certify(args):
    mdp = io.load_mdp(args.env)
    cert = regret_certificate(mdp, io.load_rsp(args.target), io.load_rsp(args.estimate))
    io.write_json(args.out, cert.to_dict())
    print(format_certificate(cert))


def cmd_experiment(args):
    config = ExperimentConfig.load(args.config)
    if args.out:
        config = ExperimentConfig(**{**config.__dict__, "out": args.out})
    rows, timing = run_sweep(config, workers=args.workers)
    paths = output_paths(config.out)
    summary = summarize(rows)
    write_csv(paths["rows"], ROW_FIELDS, rows)
    write_csv(paths["summary"], SUMMARY_FIELDS, summary)
    write_csv(paths["timing"], ("m", "run", "policy", "seconds"), timing)
    if not args.no_figure:
        plot_sweep(summary, paths["figure"], title=f"{config.mode} sweep, {config.runs} runs")
    failed = sum(1 for r in rows if r["error"])
    print(f"{len(rows)} rows ({failed} failed) written to {paths['rows']}")
    for r in summary:
        print(f"m={r['m']:<6} {r['policy']:<14} mean={r['mean_reward']:.6f} std={r['std_reward']:.6f}")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="rsplearn",
        description="Learn sparse Boltzmann policies from demonstrations and certify their regret.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gridworld-solve", help="value-iterate the grid world and write the expert policy")
    p.add_argument("--config", type=Path, help="grid JSON config (default: the 13x13 grid)")
    p.add_argument("--discount", type=float, default=0.95)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--out", type=Path, required=True, help="policy JSON (array of actions)")
    p.add_argument("--mdp-out", type=Path, help="also dump the generic MDP JSON")
    p.add_argument("--features-out", type=Path, help="also dump the waypoint feature map JSON")
    p.set_defaults(func=cmd_gridworld_solve)

    p = sub.add_parser("sample", help="draw demonstrations from an expert's stationary law")
    p.add_argument("--env", type=Path, required=True, help="MDP JSON")
    p.add_argument("--expert", type=Path, required=True, help="action array or RSP JSON")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", type=Path, required=True, help="sample CSV")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("train", help="budget sweep with hold-out selection")
    p.add_argument("--samples", type=Path, required=True)
    p.add_argument("--features", type=Path, required=True)
    p.add_argument("--gamma", type=float, default=0.3, help="hold-out fraction")
    p.add_argument("--cap", type=float, default=16.0, help="largest L1 budget")
    p.add_argument("--seed", type=int, default=0, help="seed of the split shuffle")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--max-iters", type=int, default=2000)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("certify", help="exact regret and its perturbation bounds")
    p.add_argument("--env", type=Path, required=True)
    p.add_argument("--target", type=Path, required=True, help="RSP JSON")
    p.add_argument("--estimate", type=Path, required=True, help="RSP JSON")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("experiment", help="seeded sample-size sweep (CSV rows, summary, figure)")
    p.add_argument("--config", type=Path, required=True)
    p.add_argument("--out", help="override the config's output CSV path")
    p.add_argument("--workers", type=int, help="worker processes (default: $RSPLEARN_WORKERS or 1)")
    p.add_argument("--no-figure", action="store_true", help="skip the PNG figure")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except NotErgodicError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_ERGODIC
    except (ConfigurationError, ValueError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return 0


if __name__ == "__main__":
    sys.exit(main())
