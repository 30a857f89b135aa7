"""Command line entry point: ``l1ae {gen,train,depth,decode,bench,report}``."""

import argparse
import logging
import sys

import numpy as np
import scipy.sparse as sp

from . import bench, data, io
from .model import L1AEModel, TrainConfig, preset_config, sgd_train, simple_ae_train


def _sizes(text):
    parts = [int(p) for p in text.split(",")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("sizes must be TRAIN,VALID,TEST")
    return tuple(parts)


def cmd_gen(args):
    spec = {"generator": args.generator, "d": args.d, "J": args.J, "K": args.K, "k": args.k,
            "sizes": args.sizes}
    if args.generator == "file":
        raise bench.ConfigError("gen cannot use the 'file' generator")
    ds = bench.make_dataset(spec, args.seed, normalize=args.normalize)
    data.save_sparse(ds, args.out)
    if args.manifest:
        data.write_split_manifest(ds, args.manifest)
    print(f"wrote {len(ds)} samples (d={ds.dim}) to {args.out}")


def _load(path, sizes, seed):
    ds = data.load_sparse(path)
    if sizes is not None:
        ds = data.assign_splits(ds, sizes, seed)
    return data.normalize_unit_l2(ds)


_TRAIN_KEYS = ("batch_size", "learning_rate", "n_max_epochs", "n_validation", "n_no_improve",
               "beta_learning_rate", "max_seconds")


def _train_config(args):
    if args.preset:
        depth, cfg = preset_config(args.preset, seed=args.seed)
    else:
        depth, cfg = None, TrainConfig(seed=args.seed)
    overrides = {k: getattr(args, k) for k in _TRAIN_KEYS if getattr(args, k) is not None}
    return depth, TrainConfig(**{**cfg.__dict__, **overrides})


def cmd_train(args):
    ds = _load(args.data, args.sizes, args.seed)
    depth, cfg = _train_config(args)
    depth = args.depth if args.depth is not None else depth
    if args.network == "simple_ae":
        model, history = simple_ae_train(ds, args.m, cfg)
        io.write_matrix(args.out, model.A)
    else:
        model = L1AEModel.init(args.m, ds.dim, depth or 10, seed=args.seed)
        model, history = sgd_train(model, ds, cfg)
        io.write_model(args.out, model)
    if args.history:
        io.write_history(args.history, history)
    best = min((h.valid_rmse for h in history), default=float("nan"))
    print(f"trained {args.network} m={args.m}: best valid RMSE {best:.6g}")


def cmd_depth(args):
    ds = _load(args.data, args.sizes, args.seed)
    _, cfg = _train_config(args)
    chosen, trials = bench.select_depth(ds, args.m, cfg, args.t_max, args.step,
                                        args.threshold, args.seed)
    for trial in trials:
        print(f"T={trial.depth} valid_rmse={trial.valid_rmse:.6g}")
    print(f"selected T={chosen}")


def cmd_decode(args):
    ds = _load(args.data, args.sizes, args.seed)
    X = ds.dense(args.split if args.sizes is not None else None)
    net = None
    if args.model:
        net = io.read_model(args.model)
        A = net.A
    elif args.matrix:
        A = io.read_matrix(args.matrix)
    else:
        raise bench.ConfigError("decode needs --model or --matrix")
    if args.decoder == "net" and net is None:
        raise bench.ConfigError("decoder 'net' needs --model")
    cosamp_model = None
    if args.decoder.startswith("cosamp"):
        cosamp_model = data.SparsityModel.block(ds.dim, args.J, args.K)
    Xhat, failed = bench.decode_set(A, X, args.decoder, net, cosamp_model)
    metrics = bench.compute_metrics(X, Xhat)
    if args.out:
        out = data.SparseDataset(sp.csr_matrix(Xhat), np.zeros(Xhat.shape[0], dtype=np.int8))
        data.save_sparse(out, args.out)
    print(f"exact_fraction={metrics.exact_fraction:.6g} rmse={metrics.rmse:.6g} "
          f"n={metrics.n_samples} lp_failures={failed}")


def cmd_bench(args):
    spec = bench.load_spec(args.config)
    if args.out:
        spec.output = args.out
    if not spec.output:
        raise bench.ConfigError("no output path (set 'output' in the config or pass --out)")
    if args.no_timing:
        spec.record_timing = False
    rows = bench.run_experiment(spec)
    print(f"wrote {len(rows)} rows to {spec.output}")


def cmd_report(args):
    _, text = bench.report(args.results, args.out)
    sys.stdout.write(text)


def _add_training_args(p):
    p.add_argument("--preset", help="named training preset, e.g. synthetic1")
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--learning-rate", dest="learning_rate", type=float)
    p.add_argument("--n-max-epochs", dest="n_max_epochs", type=int)
    p.add_argument("--n-validation", dest="n_validation", type=int)
    p.add_argument("--n-no-improve", dest="n_no_improve", type=int)
    p.add_argument("--beta-learning-rate", dest="beta_learning_rate", type=float,
                   help="step size for beta (default: learning rate / d)")
    p.add_argument("--max-seconds", dest="max_seconds", type=float,
                   help="wall-clock cap; the best checkpoint so far is kept")


def build_parser():
    p = argparse.ArgumentParser(prog="l1ae", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a synthetic dataset in L1AE-DS format")
    g.add_argument("generator", choices=[x for x in bench.GENERATORS if x != "file"])
    g.add_argument("--d", type=int, default=1000)
    g.add_argument("--J", type=int, default=10)
    g.add_argument("--K", type=int, default=1)
    g.add_argument("--k", type=int, default=10)
    g.add_argument("--sizes", type=_sizes, default=data.SYNTHETIC_SPLITS)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--normalize", action="store_true", help="write unit-norm samples")
    g.add_argument("--manifest", help="also write a split manifest CSV")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    t = sub.add_parser("train", help="train an l1-AE (or simple AE) on an L1AE-DS file")
    t.add_argument("data")
    t.add_argument("--m", type=int, required=True)
    t.add_argument("--network", choices=["l1ae", "simple_ae"], default="l1ae")
    t.add_argument("--depth", type=int)
    _add_training_args(t)
    t.add_argument("--sizes", type=_sizes, default=data.SYNTHETIC_SPLITS)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--history", help="CSV path for the training history")
    t.add_argument("--out", required=True, help="model (l1ae) or matrix (simple_ae) path")
    t.set_defaults(func=cmd_train)

    s = sub.add_parser("depth", help="pick the decoder depth T by a validation sweep")
    s.add_argument("data")
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--t-max", dest="t_max", type=int, default=30)
    s.add_argument("--step", type=int, default=5)
    s.add_argument("--threshold", type=float, default=0.01,
                   help="minimum relative validation improvement to keep going")
    _add_training_args(s)
    s.add_argument("--sizes", type=_sizes, default=data.SYNTHETIC_SPLITS)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_depth)

    d = sub.add_parser("decode", help="decode one split with one scheme and decoder")
    d.add_argument("data")
    d.add_argument("--model", help="L1AE-MODEL file")
    d.add_argument("--matrix", help="L1AE-MAT file")
    d.add_argument("--decoder", choices=bench.DECODERS, default="l1pos")
    d.add_argument("--split", choices=["train", "valid", "test"], default="test")
    d.add_argument("--sizes", type=_sizes,
                   help="TRAIN,VALID,TEST; without it every sample is decoded")
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--J", type=int, default=10, help="block size for CoSaMP")
    d.add_argument("--K", type=int, default=1, help="number of blocks for CoSaMP")
    d.add_argument("--out", help="write decoded vectors as L1AE-DS")
    d.set_defaults(func=cmd_decode)

    b = sub.add_parser("bench", help="run a sweep described by a YAML config")
    b.add_argument("config")
    b.add_argument("--out")
    b.add_argument("--no-timing", action="store_true",
                   help="write zero timings so reruns are byte-identical")
    b.set_defaults(func=cmd_bench)

    r = sub.add_parser("report", help="aggregate a results CSV across seeds")
    r.add_argument("results")
    r.add_argument("--out", help="also write the summary as CSV")
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (bench.ConfigError, data.SparseFormatError, io.FormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
