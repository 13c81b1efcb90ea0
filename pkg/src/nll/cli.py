"""Command-line interface.

Every flag can also be supplied through an environment variable named
``NLL_<FLAG>`` (dashes become underscores, upper-cased); explicit flags win.
All outputs are deterministic byte-for-byte given identical inputs and
seeds.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import bounds as bounds_mod
from . import experiments, oracle
from .data import (
    DATASET_KINDS,
    make_dataset,
    read_dataset,
    split,
    tabular_world,
    write_dataset,
    DiscreteDistribution,
)
from .mlp import MlpClassifier, MlpParams, TrainConfig, train_mlp
from .noise import TransitionMatrix, corrupt_labels, pair_noise, uniform_noise
from .nts import run_nts


def _env_name(flag: str) -> str:
    return "NLL_" + flag.lstrip("-").replace("-", "_").upper()


def _add(parser, flag, *, type=str, default=None, required=False, help=None, choices=None):
    env = _env_name(flag)
    if env in os.environ:
        raw = os.environ[env]
        default = type(raw) if type is not None else raw
        required = False
    parser.add_argument(flag, type=type, default=default, required=required, help=help, choices=choices)


def _dump_json(doc: dict, out: str | None) -> None:
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    sys.stdout.write(text)


def _load_train_config(path: str | None) -> TrainConfig:
    return TrainConfig.load(path) if path else TrainConfig()


# ---------------------------------------------------------------------------
# subcommand handlers


def _cmd_noise_make(args) -> int:
    maker = uniform_noise if args.kind == "uniform" else pair_noise
    t = maker(args.k, args.rate)
    Path(args.out).write_text(t.to_json(), encoding="utf-8")
    return 0


def _cmd_data_make(args) -> int:
    ds = make_dataset(args.kind, args.m, args.sigma, args.seed)
    write_dataset(ds, args.out)
    return 0


def _cmd_data_world(args) -> int:
    tabular_world().save(args.out)
    return 0


def _cmd_data_corrupt(args) -> int:
    t = TransitionMatrix.load(args.noise)
    ds = read_dataset(getattr(args, "in"), k=t.k)
    write_dataset(ds.with_labels(corrupt_labels(ds.labels, t, args.seed)), args.out)
    return 0


def _cmd_data_split(args) -> int:
    ds = read_dataset(getattr(args, "in"))
    train, val = split(ds, args.val_frac, args.seed)
    write_dataset(train, args.train_out)
    write_dataset(val, args.val_out)
    return 0


def _cmd_train(args) -> int:
    cfg = _load_train_config(args.config)
    train_ds = read_dataset(args.data)
    monitor = None
    if args.val:
        monitor = read_dataset(args.val, k=train_ds.k)
    params, ckpts = train_mlp(train_ds, cfg, monitor=monitor)
    params.save(args.out)
    with open(args.checkpoints, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("step,train_acc,val_acc\n")
        for rec in ckpts:
            val = repr(rec.noisy_val_acc) if rec.noisy_val_acc is not None else "nan"
            fh.write(f"{rec.step},{rec.train_acc!r},{val}\n")
    return 0


def _load_model(path: str, world: DiscreteDistribution | None):
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if "assignment" in doc:
        if world is None:
            raise ValueError("an assignment model needs a discrete world")
        return oracle.DiscreteClassifier(doc["assignment"], world)
    return MlpClassifier(MlpParams.from_json(json.dumps(doc)))


def _cmd_bounds_gen(args) -> int:
    p = bounds_mod.BoundParams(d_vc=args.dvc, delta=args.delta, m=args.m)
    _dump_json(
        {"bound": bounds_mod.generalization_gap_bound(p), "inputs": {"m": args.m, "d_vc": args.dvc, "delta": args.delta}},
        args.out,
    )
    return 0


def _cmd_bounds_val(args) -> int:
    _dump_json(
        {"bound": bounds_mod.validation_gap_bound(args.n, args.delta), "inputs": {"n": args.n, "delta": args.delta}},
        args.out,
    )
    return 0


def _cmd_bounds_audit(args) -> int:
    world = DiscreteDistribution.load(args.world)
    t = TransitionMatrix.load(args.noise)
    h = _load_model(args.model, world)
    freq = bounds_mod.audit_validation_bound(h, world, t, args.n, args.delta, args.trials, args.seed)
    _dump_json(
        {
            "bound": bounds_mod.validation_gap_bound(args.n, args.delta),
            "inputs": {"n": args.n, "delta": args.delta, "trials": args.trials, "seed": args.seed},
            "violations": freq,
        },
        args.out,
    )
    return 0


def _cmd_oracle_best(args) -> int:
    world = DiscreteDistribution.load(args.world)
    chosen = [bool(args.noise), bool(args.clean), bool(args.sample)]
    if sum(chosen) != 1:
        raise ValueError("choose exactly one objective: --noise FILE, --clean, or --sample FILE")
    if args.noise:
        h, value, unique = oracle.enumerate_best(world, "noisy", t=TransitionMatrix.load(args.noise))
    elif args.clean:
        h, value, unique = oracle.enumerate_best(world, "clean")
    else:
        h, value, unique = oracle.enumerate_best(world, "empirical", sample=read_dataset(args.sample, k=world.k))
    _dump_json({"value": value, "assignment": h.assignment.tolist(), "unique": unique}, args.out)
    return 0


def _cmd_nts(args) -> int:
    cfg = _load_train_config(args.config)
    train_ds = read_dataset(args.train)
    val_ds = read_dataset(args.val, k=train_ds.k)
    test_ds = read_dataset(args.test, k=train_ds.k) if args.test else None
    report = run_nts(train_ds, val_ds, cfg, clean_test=test_ds)
    Path(args.report).write_text(report.to_json(), encoding="utf-8")
    return 0


def _cmd_sweep(args) -> int:
    with open(args.config, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    stages = doc["stages"] if "stages" in doc else [doc]
    results = [experiments.run_regime_sweep(experiments.SweepConfig.from_json_dict(stage)) for stage in stages]
    result = experiments.merge_sweep_results(results)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    experiments.emit_report(result, "csv", out / "sweep.csv")
    experiments.emit_report(result, "json", out / "sweep.json")
    experiments.emit_report(result, "svg", out / "sweep.svg")
    return 0


def _cmd_demo_tabular(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report = experiments.run_tabular_demo(args.seed)
    experiments.emit_report(report, "json", out / "tabular_demo.json")
    return 0


def _cmd_audit_bounds(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report = experiments.run_bound_audit_suite(args.seed, quick=bool(args.quick))
    experiments.emit_report(report, "json", out / "bound_audits.json")
    return 0


def _cmd_nts_bench(args) -> int:
    with open(args.config, "r", encoding="utf-8") as fh:
        cfg = experiments.NtsBenchmarkConfig.from_json_dict(json.load(fh))
    report = experiments.run_nts_benchmark(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    experiments.emit_report(report, "json", out / "nts_benchmark.json")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nll", description="noisy-label learning toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    noise = sub.add_parser("noise", help="noise transition matrices").add_subparsers(dest="sub", required=True)
    p = noise.add_parser("make", help="build a uniform or pair noise matrix")
    _add(p, "--kind", choices=["uniform", "pair"], required=True)
    _add(p, "--k", type=int, required=True)
    _add(p, "--rate", type=float, required=True)
    _add(p, "--out", required=True)
    p.set_defaults(fn=_cmd_noise_make)

    data = sub.add_parser("data", help="dataset generation and manipulation").add_subparsers(dest="sub", required=True)
    p = data.add_parser("make", help="generate a synthetic dataset CSV")
    _add(p, "--kind", choices=list(DATASET_KINDS), required=True)
    _add(p, "--m", type=int, required=True)
    _add(p, "--sigma", type=float, default=0.1)
    _add(p, "--seed", type=int, default=0)
    _add(p, "--out", required=True)
    p.set_defaults(fn=_cmd_data_make)
    p = data.add_parser("world", help="write the 8-point tabular world as JSON")
    _add(p, "--out", required=True)
    p.set_defaults(fn=_cmd_data_world)
    p = data.add_parser("corrupt", help="apply class-conditional label noise to a dataset CSV")
    _add(p, "--noise", required=True)
    _add(p, "--seed", type=int, default=0)
    _add(p, "--in", required=True)
    _add(p, "--out", required=True)
    p.set_defaults(fn=_cmd_data_corrupt)
    p = data.add_parser("split", help="split a dataset CSV into train/validation")
    _add(p, "--val-frac", type=float, required=True)
    _add(p, "--seed", type=int, default=0)
    _add(p, "--in", required=True)
    _add(p, "--train-out", required=True)
    _add(p, "--val-out", required=True)
    p.set_defaults(fn=_cmd_data_split)

    p = sub.add_parser("train", help="train the MLP and record checkpoints")
    _add(p, "--data", required=True)
    _add(p, "--val", default=None)
    _add(p, "--config", default=None)
    _add(p, "--out", required=True)
    _add(p, "--checkpoints", required=True)
    p.set_defaults(fn=_cmd_train)

    bounds = sub.add_parser("bounds", help="bound evaluators and audits").add_subparsers(dest="sub", required=True)
    p = bounds.add_parser("gen", help="VC generalization gap bound")
    _add(p, "--m", type=int, required=True)
    _add(p, "--dvc", type=float, required=True)
    _add(p, "--delta", type=float, required=True)
    _add(p, "--out", default=None)
    p.set_defaults(fn=_cmd_bounds_gen)
    p = bounds.add_parser("val", help="Hoeffding validation gap bound")
    _add(p, "--n", type=int, required=True)
    _add(p, "--delta", type=float, required=True)
    _add(p, "--out", default=None)
    p.set_defaults(fn=_cmd_bounds_val)
    p = bounds.add_parser("audit", help="Monte-Carlo audit of the validation bound")
    _add(p, "--model", required=True)
    _add(p, "--world", required=True)
    _add(p, "--noise", required=True)
    _add(p, "--n", type=int, required=True)
    _add(p, "--delta", type=float, required=True)
    _add(p, "--trials", type=int, required=True)
    _add(p, "--seed", type=int, default=0)
    _add(p, "--out", default=None)
    p.set_defaults(fn=_cmd_bounds_audit)

    orc = sub.add_parser("oracle", help="exact brute-force search on discrete worlds").add_subparsers(
        dest="sub", required=True
    )
    p = orc.add_parser("best", help="enumerate the objective-maximizing classifier")
    _add(p, "--world", required=True)
    _add(p, "--noise", default=None)
    p.add_argument("--clean", action="store_true", default=os.environ.get("NLL_CLEAN", "") == "1")
    _add(p, "--sample", default=None)
    _add(p, "--out", default=None)
    p.set_defaults(fn=_cmd_oracle_best)

    p = sub.add_parser("nts", help="noisy-best teacher/student pipeline")
    _add(p, "--train", required=True)
    _add(p, "--val", required=True)
    _add(p, "--test", default=None)
    _add(p, "--config", default=None)
    _add(p, "--report", required=True)
    p.set_defaults(fn=_cmd_nts)

    p = sub.add_parser("sweep", help="regime sweep over training sizes")
    _add(p, "--config", required=True)
    _add(p, "--out", required=True)
    p.set_defaults(fn=_cmd_sweep)

    demo = sub.add_parser("demo", help="scripted demonstrations").add_subparsers(dest="sub", required=True)
    p = demo.add_parser("tabular", help="8-point world demonstration")
    _add(p, "--seed", type=int, default=0)
    _add(p, "--out", required=True)
    p.set_defaults(fn=_cmd_demo_tabular)

    audit = sub.add_parser("audit", help="bound audit suites").add_subparsers(dest="sub", required=True)
    p = audit.add_parser("bounds", help="validation and generalization bound audits")
    _add(p, "--seed", type=int, default=0)
    _add(p, "--quick", type=int, default=0)
    _add(p, "--out", required=True)
    p.set_defaults(fn=_cmd_audit_bounds)

    p = sub.add_parser("nts-bench", help="seeded repeats of the teacher/student pipeline")
    _add(p, "--config", required=True)
    _add(p, "--out", required=True)
    p.set_defaults(fn=_cmd_nts_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
