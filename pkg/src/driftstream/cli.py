"""Command-line front end: single runs, the synthetic experiment grid,
Wilcoxon comparison of result files and stream dumps.

Exit codes: 0 success, 1 configuration error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import io
import logging
import os
import sys
import tempfile
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from statistics import fmean
from typing import Optional, Sequence

from .active import ALUncertainty, BaselineKind
from .evaluation import (CURVE_FIELDS, RESULT_FIELDS, curve_rows, read_results, result_row,
                         run_prequential, write_csv)
from .fase import FASE, FASEAL, EnsembleConfig
from .generators import FAMILIES, FULL_LENGTH, SCENARIOS, SCHEMAS, scenario_stream
from .ingest import load_dataset, serialize_arff, serialize_csv
from .wilcoxon import TooFewPairs, wilcoxon_signed_rank

logger = logging.getLogger("driftstream")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2
ALGORITHMS = ("fase_al", "fase", "fixed", "variable", "random_var", "sel_sampling")
GRID_ALGORITHMS = ("fase_al", "fixed", "variable", "random_var", "sel_sampling")
SEED_BASE_ENV = "DRIFTSTREAM_SEED_BASE"


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: str = "sea"
    scenario: str = "nodrift"
    algorithm: str = "fase_al"
    length: Optional[int] = FULL_LENGTH
    seed: int = 1
    budget: Optional[float] = None  # None picks the per-algorithm default
    delta: float = 0.05
    step: float = 0.01
    n_learners: int = 10
    threshold: float = 0.9
    window: Optional[int] = None
    class_column: Optional[str] = None

    @property
    def effective_budget(self) -> float:
        if self.budget is not None:
            return self.budget
        return default_budget(self.algorithm)

    @property
    def is_file(self) -> bool:
        return self.dataset.lower().endswith((".arff", ".csv"))

    @property
    def dataset_name(self) -> str:
        return Path(self.dataset).stem if self.is_file else self.dataset.lower()

    def validate(self) -> "ExperimentConfig":
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"--algorithm: unknown algorithm {self.algorithm!r}")
        if self.is_file:
            if not os.path.exists(self.dataset):
                raise ConfigError(f"--dataset: no such file {self.dataset!r}")
        elif self.dataset.lower() not in FAMILIES:
            raise ConfigError(f"--dataset: unknown generator {self.dataset!r}")
        elif self.scenario not in SCENARIOS:
            raise ConfigError(f"--scenario: unknown scenario {self.scenario!r}")
        if self.length is not None and self.length < 1:
            raise ConfigError("--length must be >= 1")
        if not 0.0 <= self.effective_budget <= 1.0:
            raise ConfigError("--budget must lie in [0, 1]")
        if not 0.0 <= self.delta <= 1.0:
            raise ConfigError("--delta must lie in [0, 1]")
        if not 0.0 < self.step < 1.0:
            raise ConfigError("--step must lie in (0, 1)")
        if self.n_learners < 1:
            raise ConfigError("--n-learners must be >= 1")
        if self.window is not None and self.window < 1:
            raise ConfigError("--window must be >= 1")
        return self


def default_budget(algorithm: str) -> float:
    if algorithm == "fase":
        return 1.0
    return 0.05 if algorithm == "fase_al" else 0.1


def build_learner(cfg: ExperimentConfig, schema):
    ensemble = EnsembleConfig(n_learners=cfg.n_learners, seed=cfg.seed)
    if cfg.algorithm == "fase_al":
        return FASEAL(schema, ensemble, cfg.effective_budget, cfg.delta, cfg.step)
    if cfg.algorithm == "fase":
        return FASE(schema, ensemble)
    return ALUncertainty(schema, BaselineKind(cfg.algorithm), cfg.effective_budget,
                         cfg.threshold, cfg.step, cfg.seed)


def open_stream(cfg: ExperimentConfig):
    if cfg.is_file:
        schema, source = load_dataset(cfg.dataset, cfg.class_column)
        return schema, source, "real"
    family = cfg.dataset.lower()
    return SCHEMAS[family], scenario_stream(family, cfg.scenario, cfg.length, cfg.seed), cfg.scenario


def execute(cfg: ExperimentConfig) -> tuple[dict, list[dict]]:
    """Run one experiment; returns its result row and curve rows."""
    schema, stream, scenario = open_stream(cfg)
    learner = build_learner(cfg, schema)
    result = run_prequential(stream, learner, length=cfg.length, window=cfg.window, seed=cfg.seed)
    row = result_row(result, cfg.dataset_name, scenario, cfg.algorithm, cfg.effective_budget)
    return row, curve_rows(result, cfg.dataset_name, cfg.algorithm)


# ---------------------------------------------------------------- config plumbing

_INT_KEYS = {"length", "n_learners", "window", "jobs", "seeds"}
_FLOAT_KEYS = {"budget", "delta", "step", "threshold", "scale"}
_STR_KEYS = {"dataset", "scenario", "algorithm", "class_column", "out_dir", "format"}


def read_config_file(path: str) -> dict:
    """``key=value`` lines; ``#`` starts a comment. Keys use underscores or dashes."""
    values = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"--config: cannot read {path!r}: {exc.strerror}") from None
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep:
            raise ConfigError(f"{path}:{n}: expected key=value")
        values[key] = _coerce(key, value.strip(), f"{path}:{n}")
    return values


def _coerce(key: str, value: str, where: str):
    try:
        if key == "seed":
            return parse_seed_list(value)
        if key in _INT_KEYS:
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
    except ValueError:
        raise ConfigError(f"{where}: bad value {value!r} for {key}") from None
    if key in _STR_KEYS:
        return value
    raise ConfigError(f"{where}: unknown key {key!r}")


def parse_seed_list(text: str) -> list[int]:
    """``"1,2,5-7"`` -> [1, 2, 5, 6, 7]."""
    seeds = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        lo, dash, hi = part.partition("-")
        if dash and lo:
            seeds.extend(range(int(lo), int(hi) + 1))
        else:
            seeds.append(int(part))
    if not seeds:
        raise ValueError("empty seed list")
    return seeds


def seed_base() -> int:
    raw = os.environ.get(SEED_BASE_ENV, "0").strip() or "0"
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{SEED_BASE_ENV} must be an integer, got {raw!r}") from None


def merged(args: argparse.Namespace, keys: Sequence[str], defaults: dict) -> dict:
    """Flags beat the config file, which beats defaults."""
    from_file = read_config_file(args.config) if getattr(args, "config", None) else {}
    out = {}
    for key in keys:
        flag = getattr(args, key, None)
        if flag is not None:
            out[key] = flag
        elif key in from_file:
            out[key] = from_file[key]
        else:
            out[key] = defaults.get(key)
    return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _add_model_flags(p: argparse.ArgumentParser):
    p.add_argument("--algorithm", choices=ALGORITHMS)
    p.add_argument("--budget", type=float, help="label budget (default 0.05 fase_al, 0.1 baselines)")
    p.add_argument("--delta", type=float, help="random-branch share of the split strategy (0.05)")
    p.add_argument("--step", type=float, help="threshold adjustment step (0.01)")
    p.add_argument("--n-learners", dest="n_learners", type=int, help="ensemble size (10)")
    p.add_argument("--threshold", type=float, help="fixed-uncertainty threshold (0.9)")
    p.add_argument("--window", type=int, help="windowed-accuracy width")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="driftstream", description=__doc__.split("\n\n")[0].replace("\n", " "),
                     epilog=__doc__.split("\n\n")[1].strip())
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="one experiment, result CSV on stdout or --output")
    run.add_argument("--dataset", help=f"generator ({', '.join(FAMILIES)}) or .arff/.csv path")
    run.add_argument("--scenario", choices=SCENARIOS)
    run.add_argument("--length", type=int)
    run.add_argument("--seed", type=parse_seed_list, help="seed or list, e.g. 1,2,5-7")
    run.add_argument("--class-column", dest="class_column")
    run.add_argument("--config")
    run.add_argument("--output", help="result CSV path (default stdout)")
    run.add_argument("--curve", help="curve CSV path")
    _add_model_flags(run)

    paper = sub.add_parser("paper", help="synthetic grid over every algorithm and scenario")
    paper.add_argument("--scale", type=float, help="stream length as a fraction of 10^6 (1.0)")
    paper.add_argument("--seeds", type=int, help="runs per cell (10)")
    paper.add_argument("--jobs", type=int, help="worker processes (available cores)")
    paper.add_argument("--out-dir", dest="out_dir", help="output directory (results)")
    paper.add_argument("--datasets", help="comma list of generators (all)")
    paper.add_argument("--algorithms", help="comma list (all five active learners)")
    paper.add_argument("--real", nargs="*", default=[], help="extra .arff/.csv files")
    paper.add_argument("--config")
    _add_model_flags(paper)

    cmp_ = sub.add_parser("compare", help="Wilcoxon test over two result CSVs")
    cmp_.add_argument("first")
    cmp_.add_argument("second")
    cmp_.add_argument("--alpha", type=float, default=0.05)

    gen = sub.add_parser("generate", help="dump a synthetic stream")
    gen.add_argument("--dataset", required=True, choices=FAMILIES)
    gen.add_argument("--scenario", choices=SCENARIOS, default="nodrift")
    gen.add_argument("--length", type=int, default=1000)
    gen.add_argument("--seed", type=int, default=1)
    gen.add_argument("--format", choices=("arff", "csv"), default="arff")
    gen.add_argument("--output")
    return parser


# ---------------------------------------------------------------- subcommands

_MODEL_KEYS = ("algorithm", "budget", "delta", "step", "n_learners", "threshold", "window")
_MODEL_DEFAULTS = {"algorithm": "fase_al", "delta": 0.05, "step": 0.01, "n_learners": 10,
                   "threshold": 0.9}


def _open_out(path: Optional[str]):
    if path is None:
        return _StdoutHandle()
    return open(path, "w", newline="", encoding="utf-8")


class _StdoutHandle:
    def __enter__(self):
        return sys.stdout

    def __exit__(self, *exc):
        sys.stdout.flush()


def cmd_run(args) -> int:
    keys = ("dataset", "scenario", "length", "seed", "class_column") + _MODEL_KEYS
    defaults = dict(_MODEL_DEFAULTS, dataset="sea", scenario="nodrift", seed=[1])
    opts = merged(args, keys, defaults)
    base = seed_base()
    seeds = opts.pop("seed")
    is_file = opts["dataset"].lower().endswith((".arff", ".csv"))
    if opts["length"] is None and not is_file:
        opts["length"] = FULL_LENGTH
    configs = [ExperimentConfig(seed=s + base, **opts).validate() for s in seeds]
    rows, curves = [], []
    for cfg in configs:
        row, curve = execute(cfg)
        rows.append(row)
        curves.extend(curve)
    with _open_out(args.output) as out:
        write_csv(rows, RESULT_FIELDS, out)
    if args.curve:
        with open(args.curve, "w", newline="", encoding="utf-8") as out:
            write_csv(curves, CURVE_FIELDS, out)
    return EXIT_OK


def atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="", encoding="utf-8") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def _job(cfg: ExperimentConfig, run_dir: str) -> dict:
    """Worker entry point: one run, written to its own file pair."""
    row, curve = execute(cfg)
    stem = f"{cfg.dataset_name}_{row['scenario']}_{cfg.algorithm}_seed{cfg.seed}"
    for suffix, rows, fields in (("", [row], RESULT_FIELDS), ("_curve", curve, CURVE_FIELDS)):
        buf = io.StringIO()
        write_csv(rows, fields, buf)
        atomic_write(Path(run_dir) / f"{stem}{suffix}.csv", buf.getvalue())
    return row


def experiment_grid(opts: dict, datasets: Sequence[str], algorithms: Sequence[str],
               real: Sequence[str], n_seeds: int, scale: float) -> list[ExperimentConfig]:
    length = max(1, round(FULL_LENGTH * scale))
    base = seed_base()
    configs = []
    model = {k: opts[k] for k in _MODEL_KEYS if k != "algorithm"}
    for alg in algorithms:
        for seed in range(1 + base, n_seeds + 1 + base):
            for ds in datasets:
                for scenario in SCENARIOS:
                    configs.append(ExperimentConfig(dataset=ds, scenario=scenario, algorithm=alg,
                                                    length=length, seed=seed, **model))
            for path in real:
                configs.append(ExperimentConfig(dataset=path, scenario="real", algorithm=alg,
                                                length=None, seed=seed, **model))
    return [c.validate() for c in configs]


def summary_tables(rows: Sequence[dict]) -> str:
    """One table per scenario: datasets down, algorithms across, 'accuracy% runtime' cells."""
    cells = defaultdict(list)
    for r in rows:
        cells[(r["scenario"], r["dataset"], r["algorithm"])].append(r)
    scenarios = sorted({r["scenario"] for r in rows}, key=lambda s: (s not in SCENARIOS, s))
    out = []
    for scenario in scenarios:
        datasets = sorted({d for s, d, _ in cells if s == scenario})
        algs = [a for a in ALGORITHMS if any((scenario, d, a) in cells for d in datasets)]
        out.append(f"## {scenario}\n")
        out.append("| dataset | " + " | ".join(algs) + " |")
        out.append("|---" * (len(algs) + 1) + "|")
        for d in datasets:
            line = [d]
            for a in algs:
                runs = cells.get((scenario, d, a))
                if not runs:
                    line.append("")
                    continue
                acc = fmean(float(r["accuracy"]) for r in runs) * 100
                sec = fmean(float(r["runtime_s"]) for r in runs)
                line.append(f"{acc:.2f} {sec:.2f}")
            out.append("| " + " | ".join(line) + " |")
        out.append("")
    return "\n".join(out)


def cmd_paper(args) -> int:
    keys = ("scale", "seeds", "jobs", "out_dir") + _MODEL_KEYS
    defaults = dict(_MODEL_DEFAULTS, scale=1.0, seeds=10, jobs=os.cpu_count() or 1,
                    out_dir="results")
    opts = merged(args, keys, defaults)
    if opts["scale"] <= 0:
        raise ConfigError("--scale must be positive")
    if opts["seeds"] < 1 or opts["jobs"] < 1:
        raise ConfigError("--seeds and --jobs must be >= 1")
    datasets = args.datasets.split(",") if args.datasets else list(FAMILIES)
    algorithms = args.algorithms.split(",") if args.algorithms else list(GRID_ALGORITHMS)
    if args.algorithm:
        algorithms = [args.algorithm]
    configs = experiment_grid(opts, datasets, algorithms, args.real, opts["seeds"], opts["scale"])
    out_dir = Path(opts["out_dir"])
    run_dir = out_dir / "runs"
    run_dir.mkdir(parents=True, exist_ok=True)
    logger.info("%d runs, %d workers", len(configs), opts["jobs"])
    rows = []
    if opts["jobs"] == 1:
        for i, cfg in enumerate(configs, 1):
            rows.append(_job(cfg, str(run_dir)))
            logger.info("[%d/%d] %s", i, len(configs), rows[-1])
    else:
        with concurrent.futures.ProcessPoolExecutor(opts["jobs"]) as pool:
            futures = [pool.submit(_job, cfg, str(run_dir)) for cfg in configs]
            for i, fut in enumerate(concurrent.futures.as_completed(futures), 1):
                rows.append(fut.result())
                logger.info("[%d/%d] %s", i, len(configs), rows[-1])
    key = lambda r: (r["dataset"], r["scenario"], r["algorithm"], int(r["seed"]))
    rows.sort(key=key)
    buf = io.StringIO()
    write_csv(rows, RESULT_FIELDS, buf)
    atomic_write(out_dir / "results.csv", buf.getvalue())
    summary = summary_tables(rows)
    atomic_write(out_dir / "summary.md", summary)
    print(summary)
    return EXIT_OK


def paired_means(first: Sequence[dict], second: Sequence[dict]) -> list[tuple[tuple, float, float]]:
    """Mean accuracy per (dataset, scenario) present in both files."""
    def means(rows):
        acc = defaultdict(list)
        for r in rows:
            acc[(r["dataset"], r["scenario"])].append(r["accuracy"])
        return {k: fmean(v) for k, v in acc.items()}

    a, b = means(first), means(second)
    return [(k, a[k], b[k]) for k in sorted(a.keys() & b.keys())]


def cmd_compare(args) -> int:
    tables = []
    for path in (args.first, args.second):
        try:
            with open(path, newline="", encoding="utf-8") as f:
                tables.append(read_results(f))
        except OSError as exc:
            raise ConfigError(f"cannot read {path!r}: {exc.strerror}") from None
    pairs = paired_means(*tables)
    label_a = ",".join(sorted({r["algorithm"] for r in tables[0]})) or args.first
    label_b = ",".join(sorted({r["algorithm"] for r in tables[1]})) or args.second
    print(f"dataset,scenario,{label_a},{label_b},difference")
    for (ds, sc), x, y in pairs:
        print(f"{ds},{sc},{x:.6g},{y:.6g},{x - y:+.6g}")
    values = [(x, y) for _, x, y in pairs]
    two = wilcoxon_signed_rank(values, alpha=args.alpha)
    wins = sum(x > y for x, y in values)
    losses = sum(x < y for x, y in values)
    favored = label_a if wins > losses else label_b if losses > wins else "neither"
    # one-sided in the direction of the favored side
    one = wilcoxon_signed_rank(values, "less" if favored == label_b else "greater", alpha=args.alpha)
    print(f"pairs={len(values)} wins={wins} losses={losses} favored={favored}")
    print(f"two-sided W={two.statistic:g} p={two.p_value:.6g} significant={two.significant}")
    print(f"one-sided W={one.statistic:g} p={one.p_value:.6g} significant={one.significant}")
    return EXIT_OK


def cmd_generate(args) -> int:
    if args.length < 1:
        raise ConfigError("--length must be >= 1")
    seed = args.seed + seed_base()
    schema = SCHEMAS[args.dataset]
    stream = scenario_stream(args.dataset, args.scenario, args.length, seed)
    write = serialize_arff if args.format == "arff" else serialize_csv
    with _open_out(args.output) as out:
        if args.format == "arff":
            write(schema, stream, relation=f"{args.dataset}_{args.scenario}_seed{seed}", out=out)
        else:
            write(schema, stream, out=out)
    return EXIT_OK


COMMANDS = {"run": cmd_run, "paper": cmd_paper, "compare": cmd_compare, "generate": cmd_generate}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(message)s", stream=sys.stderr)
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_CONFIG
    except TooFewPairs as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
