"""Command-line entry points: simulate, train, eval, verify.

Exit codes: 0 success, 1 validation error, 2 numerical failure, 3 IO
error.  Every command is deterministic given its flags; trace files
contain only seed-determined columns so reruns are byte-identical.
"""

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import checkpoint, logreg, metrics, sessions, simulate, verify
from .config import LvmConfig, OptimConfig
from .report import DatasetFormatError, DivergenceError

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_VALIDATION)


def _apply_thread_cap():
    cap = os.environ.get("ANALYTIC_VB_THREADS")
    if not cap:
        return
    try:
        import threadpoolctl

        threadpoolctl.threadpool_limits(int(cap))
    except (ImportError, ValueError):
        pass


def parse_config_file(path):
    """Plain key = value lines; '#' starts a comment; keys use_underscores."""
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ValueError(f"{path}: line {lineno}: expected key = value")
        key, _, val = stripped.partition("=")
        values[key.strip().replace("-", "_")] = val.strip()
    return values


def _merged(config_path, flag_values, fields):
    """File values first, then flags (flags win).  fields: name -> caster."""
    merged = {}
    if config_path:
        raw = parse_config_file(config_path)
        for key, val in raw.items():
            if key not in fields:
                raise ValueError(f"unknown config key {key!r}")
            merged[key] = fields[key](val)
    for key, val in flag_values.items():
        if val is not None:
            merged[key] = val
    return merged


def _write_trace(path, trace):
    lines = ["epoch,bound,kl_term,lik_term"]
    for row in trace:
        lines.append(f"{row['epoch']},{row['bound']!r},{row['kl_term']!r},{row['lik_term']!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def cmd_simulate(args):
    if args.kind == "logreg":
        spec = simulate.SimLogRegSpec(n=args.n, d=args.d, seed=args.seed)
        data, _ = simulate.sim_logreg(spec)
        simulate.write_logreg_csv(args.out, data)
        manifest = simulate.manifest_path_for(args.out)
        manifest.write_text(json.dumps({"N": data.n, "D": data.dim, "seed": args.seed}) + "\n")
        print(f"wrote {data.n} records to {args.out}")
    else:
        spec = simulate.SimSessionSpec(
            u_train=args.u, u_test=args.u_test, p=args.p, k_true=args.k_true,
            mean_length=args.mean_length, seed=args.seed,
        )
        train, test, _ = simulate.sim_sessions(spec)
        simulate.write_sessions(args.out, train)
        manifest = simulate.manifest_path_for(args.out)
        manifest.write_text(
            json.dumps({"P": train.catalog_size, "U": train.n_sessions, "seed": args.seed}) + "\n"
        )
        if test is not None:
            test_path = Path(args.out).with_suffix(".test" + Path(args.out).suffix)
            simulate.write_sessions(test_path, test)
        print(f"wrote {train.n_sessions} sessions to {args.out}")
    return EXIT_OK


_OPTIM_FIELDS = {
    "learning_rate": float, "epochs": int, "batch_size": int,
    "optimizer": str, "momentum": float, "seed": int, "mc_samples": int,
}
_LVM_FIELDS = {
    "latent_dim": int, "negatives": int, "learning_rate": float,
    "epochs": int, "optimizer": str, "momentum": float, "seed": int,
}


def cmd_train(args):
    if args.model == "lvm":
        data = simulate.read_sessions(args.data)
        flags = {
            "latent_dim": args.k, "negatives": args.negatives, "learning_rate": args.lr,
            "epochs": args.epochs, "optimizer": args.optimizer, "seed": args.seed,
        }
        config = LvmConfig(**_merged(args.config, flags, _LVM_FIELDS))
        params, trace = sessions.fit(data, config)
        checkpoint.save_lvm_checkpoint(args.checkpoint_out, params, config.seed, vars(config))
    else:
        data = simulate.read_logreg_csv(args.data)
        prior = logreg.LogRegPrior.standard(data.dim)
        flags = {
            "learning_rate": args.lr, "epochs": args.epochs, "batch_size": args.batch_size,
            "optimizer": args.optimizer, "seed": args.seed, "mc_samples": args.mc_samples,
        }
        config = OptimConfig(**_merged(args.config, flags, _OPTIM_FIELDS))
        trainer = {"jj": logreg.fit_sgd_jj, "vbem": logreg.fit_vbem, "lrt": logreg.fit_lrt}[args.model]
        q, trace = trainer(data, prior, config)
        checkpoint.save_logreg_checkpoint(args.checkpoint_out, q, config.seed, vars(config))
    if args.trace_out:
        _write_trace(args.trace_out, trace)
    print(f"final bound: {trace[-1]['bound']!r}")
    return EXIT_OK


def cmd_eval(args):
    test = simulate.read_sessions(args.test_data)
    if args.baseline:
        if not args.train_data:
            raise ValueError("--baseline needs --train-data")
        train = simulate.read_sessions(args.train_data)
        if train.catalog_size != test.catalog_size:
            raise ValueError("train/test catalog size mismatch")
        scorer = {"pop": metrics.pop_baseline, "itemknn": metrics.itemknn_baseline}[args.baseline](train)
    else:
        if not args.checkpoint:
            raise ValueError("need --checkpoint or --baseline")
        kind, model, meta = checkpoint.load_checkpoint(args.checkpoint)
        if kind != "bouchard_lvm":
            raise ValueError(f"eval needs a session-model checkpoint, got {kind!r}")
        if model.catalog_size != test.catalog_size:
            raise ValueError(
                f"catalog size mismatch: checkpoint {model.catalog_size}, data {test.catalog_size}"
            )
        scorer = lambda context: sessions.score_items(context, model)
    report = metrics.evaluate(scorer, test, k=args.k)
    text = json.dumps(report, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)
    return EXIT_OK


def cmd_verify(args):
    ok, report = verify.run_suites(args.suite)
    text = json.dumps(report, sort_keys=True, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)
    return EXIT_OK if ok else EXIT_NUMERICAL


def build_parser():
    parser = _Parser(prog="analytic-vb", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a seeded synthetic dataset")
    p.add_argument("--kind", choices=["logreg", "sessions"], required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=900, help="logreg: number of records")
    p.add_argument("--d", type=int, default=50, help="logreg: number of features")
    p.add_argument("--u", type=int, default=200, help="sessions: training sessions")
    p.add_argument("--u-test", type=int, default=0, help="sessions: held-out sessions")
    p.add_argument("--p", type=int, default=1000, help="sessions: catalog size")
    p.add_argument("--k-true", type=int, default=4, help="sessions: generative latent size")
    p.add_argument("--mean-length", type=float, default=10.0)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("train", help="fit a model and write checkpoint + trace")
    p.add_argument("--model", choices=["jj", "vbem", "lrt", "lvm"], required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--config", help="key = value config file; flags override")
    p.add_argument("--checkpoint-out", required=True)
    p.add_argument("--trace-out")
    p.add_argument("--lr", type=float, dest="lr")
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--optimizer", choices=["sgd", "adagrad"])
    p.add_argument("--seed", type=int)
    p.add_argument("--mc-samples", type=int)
    p.add_argument("--k", type=int, help="lvm: latent dimension")
    p.add_argument("--negatives", type=int, help="lvm: sampled items; 0 = full partition")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="next-item metrics for a checkpoint or baseline")
    p.add_argument("--checkpoint")
    p.add_argument("--baseline", choices=["pop", "itemknn"])
    p.add_argument("--train-data", help="needed by the baselines")
    p.add_argument("--test-data", required=True)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("verify", help="run the oracle-backed property suites")
    p.add_argument("--suite", choices=["bounds", "gradients", "unbiasedness", "all"], default="all")
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    _apply_thread_cap()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_OK
    except DivergenceError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except DatasetFormatError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (FileNotFoundError, PermissionError, IsADirectoryError, OSError) as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError, TypeError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
