"""Command-line front door: exploration runs, point evaluation, netlist
emission, Pareto reporting, dataset fetching, exhaustive oracles.

Exit codes: 0 ok, 1 runtime failure, 2 usage/config error.
"""

from __future__ import annotations

import argparse
import csv
import json
import multiprocessing
import os
import sys
import time
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__, chromosome, oracle, report
from .adc import LevelMask, MaskError
from .area import GateCostTable, conventional_frontend_area
from .chromosome import (
    Chromosome,
    DomainError,
    GeneDomains,
    baseline_chromosome,
    build_context,
    make_operators,
    objectives,
    seed_population,
)
from .data import CsvSchema, fetch, load_csv, load_manifest, load_named, stratified_split
from .netlist import compile_encoder, count_gates, emit_hdl, to_json
from .nsga2 import FAILURE_OBJECTIVES, EvaluationFailed, GaParams, evolve


class UsageError(Exception):
    """Bad flags or configuration; maps to exit code 2."""


CONFIG_DEFAULTS = {
    "bitwidth": 4,
    "topology": [10],
    "ga": {"population": 50, "generations": 100, "crossover_prob": 0.7, "mutation_prob": 0.2},
    "gene_domains": {},
    "costs": {"comparator": 1.0, "or2": 1.0},
    "fitness_split": "test",
    "train_frac": 0.7,
    "learning_rate": 0.01,
    "seed": 0,
    "workers": 0,
}


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc}") from exc

    import jsonschema

    with resources.files("adcprune").joinpath("config_schema.json").open() as fh:
        schema = json.load(fh)
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise UsageError(f"config {path}: {exc.message} (at {where})") from exc

    merged = {**CONFIG_DEFAULTS, **doc}
    for key in ("ga", "costs"):
        merged[key] = {**CONFIG_DEFAULTS[key], **doc.get(key, {})}
    return merged


def resolve_dataset(dcfg: dict, args=None):
    if args is not None:
        dcfg = dict(dcfg)
        if getattr(args, "label_col", None) is not None:
            dcfg["label_col"] = args.label_col
        if getattr(args, "delimiter", None) is not None:
            dcfg["delimiter"] = None if args.delimiter == "ws" else args.delimiter
        if getattr(args, "no_header", False):
            dcfg["header"] = False
    if "path" in dcfg:
        schema = CsvSchema(
            label_column=dcfg.get("label_col", -1),
            delimiter=dcfg.get("delimiter", ","),
            header=dcfg.get("header", False),
            drop_columns=tuple(dcfg.get("drop_cols", ())),
        )
        return load_csv(dcfg["path"], schema)
    if "name" in dcfg:
        return load_named(dcfg["name"], dcfg.get("root"))
    raise UsageError("dataset config needs either 'path' or 'name'")


def _parse_label_col(text: str):
    try:
        return int(text)
    except ValueError:
        return text


def add_dataset_flags(parser):
    parser.add_argument("--label-col", type=_parse_label_col, default=None,
                        help="label column index or header name")
    parser.add_argument("--delimiter", default=None,
                        help="CSV delimiter; 'ws' for whitespace")
    parser.add_argument("--no-header", action="store_true",
                        help="treat the first row as data")


def make_context(cfg: dict, ds):
    domains_cfg = cfg.get("gene_domains") or {}
    domains = GeneDomains(**{k: tuple(v) for k, v in domains_cfg.items()})
    costs = GateCostTable(
        comparator_cost=cfg["costs"]["comparator"], or2_cost=cfg["costs"]["or2"]
    )
    split = stratified_split(ds, train_frac=cfg["train_frac"], seed=cfg["seed"])
    ctx = build_context(
        ds,
        split,
        bitwidth=cfg["bitwidth"],
        hidden_layers=tuple(cfg["topology"]),
        costs=costs,
        domains=domains,
        fitness_split=cfg["fitness_split"],
        seed=cfg["seed"],
        learning_rate=cfg["learning_rate"],
    )
    return ctx


# ----------------------------------------------------------------- explore

_POOL_CTX = None


def _pool_init(ctx):
    global _POOL_CTX
    _POOL_CTX = ctx


def _pool_eval(pair):
    index, genome = pair
    try:
        return objectives(genome, _POOL_CTX, index)
    except EvaluationFailed:
        return FAILURE_OBJECTIVES


def cmd_explore(args) -> int:
    cfg = load_config(args.config)
    if "output_dir" not in cfg:
        raise UsageError("config is missing output_dir")
    if getattr(args, "fitness_split", None):
        cfg["fitness_split"] = args.fitness_split
    ds = resolve_dataset(cfg["dataset"], args)
    ctx = make_context(cfg, ds)

    baseline_area = conventional_frontend_area(ctx.n_features, ctx.bitwidth, ctx.costs)
    params = GaParams(
        population=cfg["ga"]["population"],
        generations=cfg["ga"]["generations"],
        crossover_prob=cfg["ga"]["crossover_prob"],
        mutation_prob=cfg["ga"]["mutation_prob"],
        seed=cfg["seed"],
        hv_reference=(1.0, baseline_area),
    )
    rng = np.random.default_rng(cfg["seed"])
    initial = seed_population(params.population, ctx, rng)

    outdir = Path(cfg["output_dir"])
    outdir.mkdir(parents=True, exist_ok=True)
    with open(outdir / "config.json", "w") as fh:
        json.dump(cfg, fh, indent=2, sort_keys=True)
        fh.write("\n")

    workers = cfg["workers"] or os.cpu_count() or 1
    pool = None
    # generation log appended by the single main-process writer at each
    # generation boundary, so partial runs leave a usable trace
    with open(outdir / "generations.csv", "w", newline="") as gen_fh:
        gen_writer = csv.writer(gen_fh)
        gen_writer.writerow(["gen", "best_f1", "best_f2", "front0_size", "hypervolume"])

        def on_generation(row):
            gen_writer.writerow(
                [row["gen"], f"{row['best_f1']:.6f}", f"{row['best_f2']:g}",
                 row["front0_size"], f"{row['hypervolume']:.6f}"]
            )
            gen_fh.flush()
            print(
                f"gen {row['gen']:4d}  best_f1 {row['best_f1']:.4f}  "
                f"best_f2 {row['best_f2']:g}  front0 {row['front0_size']:3d}  "
                f"hv {row['hypervolume']:.4f}",
                flush=True,
            )

        try:
            if workers > 1:
                pool = multiprocessing.Pool(workers, initializer=_pool_init, initargs=(ctx,))
                evaluate_many = lambda pairs: pool.map(_pool_eval, pairs)  # noqa: E731
            else:
                evaluate_many = None
            result = evolve(
                lambda g, i: objectives(g, ctx, i),
                make_operators(ctx),
                params,
                initial=initial,
                evaluate_many=evaluate_many,
                on_generation=on_generation,
            )
        finally:
            if pool is not None:
                pool.close()
                pool.join()

    write_artifact(outdir, cfg, ctx, ds, result, baseline_area)
    print(f"artifact written to {outdir}")
    return 0


def write_artifact(outdir: Path, cfg, ctx, ds, result, baseline_area):
    base = chromosome.evaluate(baseline_chromosome(ctx), ctx, index=0)
    baseline_doc = {
        "accuracy": base.accuracy,
        "test_accuracy": base.test_accuracy,
        "area_units": base.frontend_area,
        "chromosome": json.loads(baseline_chromosome(ctx).to_json()),
    }

    seen = set()
    members = []
    for ind in result.archive:
        key = (ind.genome.to_json(), ind.eval_index)
        if key in seen:
            continue
        seen.add(key)
        members.append(ind)
    members.sort(key=lambda ind: (ind.objectives[1], ind.objectives[0], ind.genome.to_json()))

    archive_docs = []
    for i, ind in enumerate(members):
        res = chromosome.evaluate(ind.genome, ctx, index=ind.eval_index)
        if res.objectives != ind.objectives:
            raise RuntimeError(
                f"archive member {i} did not reproduce its objectives "
                f"({res.objectives} vs {ind.objectives}); evaluation is not "
                f"deterministic in (seed, index)"
            )
        archive_docs.append(
            {
                "id": i,
                "f1_acc_miss": res.accuracy_miss,
                "accuracy": res.accuracy,
                "test_accuracy": res.test_accuracy,
                "f2_area_units": res.frontend_area,
                "area_normalized_to_baseline": res.frontend_area / baseline_area,
                "chromosome": json.loads(ind.genome.to_json()),
                "area_breakdown": chromosome.area_breakdown(ind.genome, ctx),
            }
        )

    with open(outdir / "pareto.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(
            ["id", "f1_acc_miss", "accuracy", "f2_area_units",
             "area_normalized_to_baseline", "masks_hex", "weight_bits",
             "activation_bits", "batch_size", "epochs"]
        )
        for doc in archive_docs:
            ch = doc["chromosome"]
            w.writerow(
                [doc["id"], f"{doc['f1_acc_miss']:.6f}", f"{doc['accuracy']:.6f}",
                 f"{doc['f2_area_units']:g}", f"{doc['area_normalized_to_baseline']:.6f}",
                 "|".join(ch["masks"]), ch["weight_bits"], ch["activation_bits"],
                 ch["batch_size"], ch["epochs"]]
            )

    pareto_doc = {
        "version": __version__,
        "seed": cfg["seed"],
        "name": ds.name,
        "bitwidth": ctx.bitwidth,
        "baseline": baseline_doc,
        "config": cfg,
        "archive": archive_docs,
    }
    with open(outdir / "pareto.json", "w") as fh:
        json.dump(pareto_doc, fh, indent=2)
        fh.write("\n")

    final_pop = [
        {"chromosome": json.loads(ind.genome.to_json()),
         "objectives": list(ind.objectives), "eval_index": ind.eval_index}
        for ind in result.population
    ]
    with open(outdir / "final_population.json", "w") as fh:
        json.dump(final_pop, fh, indent=2)
        fh.write("\n")


# ---------------------------------------------------------------- evaluate

def cmd_evaluate(args) -> int:
    if args.config:
        cfg = load_config(args.config)
    else:
        cfg = {**CONFIG_DEFAULTS, "dataset": {}}
    if args.dataset:
        cfg["dataset"] = {"path": args.dataset}
    if args.bits:
        cfg["bitwidth"] = args.bits
    if not cfg["dataset"]:
        raise UsageError("need --dataset or a --config with a dataset entry")

    ds = resolve_dataset(cfg["dataset"], args)
    ctx = make_context(cfg, ds)
    try:
        with open(args.chromosome) as fh:
            ch = Chromosome.from_json(fh.read(), ctx.bitwidth)
    except (OSError, json.JSONDecodeError, KeyError, MaskError) as exc:
        raise UsageError(f"cannot load chromosome {args.chromosome}: {exc}") from exc

    try:
        res = chromosome.evaluate(ch, ctx, index=0)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    baseline_area = conventional_frontend_area(ctx.n_features, ctx.bitwidth, ctx.costs)
    print(f"dataset: {ds.name} ({ds.n_samples} samples, {ds.n_features} features, "
          f"{ds.n_classes} classes)")
    print(f"accuracy ({cfg['fitness_split']} fitness): {res.accuracy:.4f}"
          f"   test accuracy: {res.test_accuracy:.4f}")
    print(f"{'input':>5}  {'mask':<6} {'comparators':>11} {'or2':>5} {'total':>8}")
    for i, (mask, row) in enumerate(zip(ch.masks, chromosome.area_breakdown(ch, ctx))):
        print(f"{i:>5}  {mask.to_hex():<6} {row['comparators']:>11} "
              f"{row['or2_gates']:>5} {row['total']:>8g}")
    print(f"frontend total: {res.frontend_area:g} units; conventional {baseline_area:g}; "
          f"normalized {res.frontend_area / baseline_area:.4f}")
    return 0


# ----------------------------------------------------------------- netlist

def cmd_netlist(args) -> int:
    try:
        mask = LevelMask.from_hex(args.bits, args.mask)
    except MaskError as exc:
        raise UsageError(str(exc)) from exc
    net = compile_encoder(args.bits, mask)
    counts = count_gates(net)
    if args.format == "hdl":
        text = emit_hdl(net, module_name=f"adc_encoder_{args.bits}b_{mask.to_hex().lower()}")
    else:
        text = to_json(net)
    if args.out:
        Path(args.out).write_text(text)
        dest = args.out
    else:
        sys.stdout.write(text)
        dest = "<stdout>"
    print(
        f"bits={args.bits} mask={mask.to_hex()} comparators={mask.popcount} "
        f"OR2={counts['OR2']} AND2={counts['AND2']} INV={counts['INV']} -> {dest}",
        file=sys.stderr if dest == "<stdout>" else sys.stdout,
    )
    return 0


# ------------------------------------------------------------------ report

def cmd_report(args) -> int:
    try:
        text = report.report_runs(args.run_dirs)
    except report.ReportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(text)
    return 0


# ------------------------------------------------------------------- fetch

def cmd_fetch(args) -> int:
    names = args.names or sorted(load_manifest())
    status = 0
    for name in names:
        try:
            path = fetch(name, args.dest)
            print(f"{name}: {path}")
        except Exception as exc:  # network/key errors are runtime failures
            print(f"{name}: FAILED ({exc})", file=sys.stderr)
            status = 1
    return status


# ------------------------------------------------------------------ oracle

def cmd_oracle(args) -> int:
    failed = False
    if args.which in ("function", "all"):
        t0 = time.perf_counter()
        sweep = oracle.function_sweep(args.bits_function)
        dt = time.perf_counter() - t0
        verdict = "PASS" if sweep.passed else "FAIL"
        print(f"function oracle (N={sweep.bitwidth}): {sweep.masks} masks, "
              f"{sweep.patterns} patterns, {sweep.mismatches} mismatches "
              f"[{dt:.1f}s] {verdict}")
        failed |= not sweep.passed
    if args.which in ("area", "all"):
        t0 = time.perf_counter()
        sweep = oracle.area_sweep(args.bits_area)
        dt = time.perf_counter() - t0
        verdict = "PASS" if sweep.passed else "FAIL"
        print(f"area oracle (N={sweep.bitwidth}): {sweep.masks} masks, "
              f"{sweep.count_mismatches} count mismatches, "
              f"pearson r={sweep.pearson_r:.4f} [{dt:.1f}s] {verdict}")
        failed |= not sweep.passed
    return 1 if failed else 0


# -------------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adcprune",
        description="Co-design of level-pruned flash ADC front-ends and quantized MLPs",
    )
    parser.add_argument("--version", action="version", version=f"adcprune {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("explore", help="run the multi-objective search from a config file")
    p.add_argument("config", help="run configuration JSON (see config_schema.json)")
    p.add_argument("--fitness-split", choices=("test", "validation"),
                   help="override the config's fitness split")
    add_dataset_flags(p)
    p.set_defaults(func=cmd_explore)

    p = sub.add_parser("evaluate", help="train and score a single chromosome")
    p.add_argument("chromosome", help="chromosome JSON file")
    p.add_argument("--dataset", help="dataset CSV path")
    p.add_argument("--config", help="run configuration JSON")
    p.add_argument("--bits", type=int, help="ADC bitwidth")
    add_dataset_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("netlist", help="compile a pruned encoder netlist")
    p.add_argument("--bits", type=int, required=True)
    p.add_argument("--mask", required=True, help="mask hex literal, LSB = level 1")
    p.add_argument("--format", choices=("hdl", "json"), default="hdl")
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_netlist)

    p = sub.add_parser("report", help="render figures and summaries for run artifacts")
    p.add_argument("run_dirs", nargs="+", help="artifact directories from explore")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("fetch", help="download benchmark datasets from the manifest")
    p.add_argument("names", nargs="*", help="dataset names (default: all)")
    p.add_argument("--dest", help="cache directory (default: ADCPRUNE_CACHE or ~/.cache)")
    p.set_defaults(func=cmd_fetch)

    p = sub.add_parser("oracle", help="run the exhaustive function/area oracles")
    p.add_argument("--which", choices=("function", "area", "all"), default="all")
    p.add_argument("--bits-function", type=int, default=3)
    p.add_argument("--bits-area", type=int, default=4)
    p.set_defaults(func=cmd_oracle)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
