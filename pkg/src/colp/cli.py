"""Command-line interface.

Subcommands: fit, discover, simulate, ablate, sweep, bench, replay.  Every
command can write a JSON-lines run record (``--out``); see the README for
the schema.  Exit codes: 0 success (a tie is a success), 2 input or
configuration error, 3 fitting failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from importlib import metadata

from .causal import (
    DEFAULT_TIE_TOL,
    CausalFitError,
    decide,
    decision_credit,
)
from .classifier import SearchConfig, SearchGateError, fit_colp
from .experiments import RunSettings, run_ablation, run_simulation, run_sweep
from .ingest import (
    QUANTILE_METHOD,
    IngestError,
    PairFile,
    example_pairs_dir,
    load_pair,
    read_manifest,
)
from .links import LINKS
from .ordinal import OptimizerConfig, OrdinalError
from .permutations import Permutation
from .sample import SampleError
from .synth import RNG_ALGORITHM, ScenarioConfig

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_FIT = 3

TIE_CONVENTION = "a tie earns tie_credit (default 0.5) toward accuracy"

log = logging.getLogger("colp")


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def ordering_names(sigma: Permutation, names: list[str]) -> list[str]:
    """Level names listed from lowest to highest rank."""
    return [names[level - 1] for level in sigma.order()]


def parse_levels(text: str) -> list[int]:
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(v) for v in text.split(",") if v.strip()]


def parse_floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


# ---------------------------------------------------------------------------
# output


class Record:
    """Collects JSON-lines output for one run."""

    def __init__(self, command: str, config: dict):
        self.lines = [
            {
                "record": "run",
                "command": command,
                "config": config,
                "seed": config.get("seed"),
                "version": _version(),
                "rng": RNG_ALGORITHM,
                "tie_convention": TIE_CONVENTION,
                "quantile_method": QUANTILE_METHOD,
            }
        ]
        self.start = time.perf_counter()

    def add(self, record_type: str, /, **fields):
        self.lines.append({"record": record_type, **fields})

    def write(self, path):
        if not path:
            return
        lines = self.lines + [{"record": "timing", "wall_time_s": time.perf_counter() - self.start}]
        with open(path, "w", encoding="utf-8") as fh:
            for line in lines:
                fh.write(json.dumps(line, sort_keys=True, allow_nan=False) + "\n")


def print_table(rows: list[dict], columns: list[str], out=None):
    out = out or sys.stdout

    def fmt(v):
        if v is None:
            return "-"
        if isinstance(v, float):
            return f"{v:.4f}"
        return str(v)

    cells = [[fmt(r.get(c)) for c in columns] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) if cells else len(c) for i, c in enumerate(columns)]
    print("  ".join(c.rjust(w) for c, w in zip(columns, widths)), file=out)
    for row in cells:
        print("  ".join(v.rjust(w) for v, w in zip(row, widths)), file=out)


def _tsv_cell(v) -> str:
    if v is None:
        return ""
    return repr(v) if isinstance(v, float) else str(v)


def write_plot_data(path, rows: list[dict], columns: list[str]):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\t".join(columns) + "\n")
        for r in rows:
            fh.write("\t".join(_tsv_cell(r.get(c)) for c in columns) + "\n")


# ---------------------------------------------------------------------------
# shared option groups


def _search_config(args) -> SearchConfig:
    return SearchConfig(
        optimizer=OptimizerConfig(tol=args.tol, max_iter=args.max_iter),
        max_exhaustive_levels=args.max_exhaustive_levels,
        reversal_shortcut=not args.full_enumeration,
        adjacent_only=args.adjacent_only,
        restarts=args.restarts,
        seed=args.seed if args.seed is not None else 0,
    )


def _settings(args) -> RunSettings:
    return RunSettings(
        search=args.search,
        search_config=_search_config(args),
        tie_tolerance=args.tie_tol,
        tie_credit=args.tie_credit,
        tau_orientation=args.tau_orientation,
        jobs=args.jobs,
    )


def _add_fit_options(p):
    p.add_argument("--link", choices=LINKS, default="logit")
    p.add_argument("--search", choices=("auto", "exhaustive", "greedy"), default="auto",
                   help="auto: exhaustive when both variables have at most 6 levels, else greedy")
    p.add_argument("--max-exhaustive-levels", type=int, default=8)
    p.add_argument("--full-enumeration", action="store_true",
                   help="fit all L! permutations instead of one per reversal pair")
    p.add_argument("--adjacent-only", action="store_true",
                   help="greedy neighborhood: swap only categories with adjacent ranks")
    p.add_argument("--restarts", type=int, default=1, help="greedy starts (identity plus random)")
    p.add_argument("--tol", type=float, default=1e-8, help="gradient infinity-norm tolerance")
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--tie-tol", type=float, default=DEFAULT_TIE_TOL)
    p.add_argument("--tie-credit", type=float, default=0.5,
                   help="accuracy credit for a tie (0 counts ties as wrong)")
    p.add_argument("--out", help="write the JSON-lines run record here")


def _add_pair_options(p):
    p.add_argument("--input", required=True, help="CSV file with a header row")
    p.add_argument("--x", required=True, help="column of the candidate cause")
    p.add_argument("--y", required=True, help="column of the candidate effect")
    p.add_argument("--discretize-x", type=int, default=None, metavar="BINS")
    p.add_argument("--discretize-y", type=int, default=None, metavar="BINS")
    p.add_argument("--seed", type=int, default=0)


def _add_sim_options(p, scenario=True):
    if scenario:
        p.add_argument("--scenario", choices=("1", "2", "3"), default="1")
    p.add_argument("--L", type=int, default=0, help="effect levels (0: scenario default)")
    p.add_argument("--S", type=int, default=0, help="cause levels (0: scenario default)")
    p.add_argument("--reps", type=int, default=200)
    p.add_argument("--seed", type=int, required=True, help="master seed (mandatory)")
    p.add_argument("--beta-sd", type=float, default=1.0)
    p.add_argument("--z-levels", type=int, default=5)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--tau-orientation", choices=("canonical", "best"), default="canonical")
    p.add_argument("--plot-data", help="write a TSV of the aggregate table here")


def _scenario(args, n, scenario="1") -> ScenarioConfig:
    return ScenarioConfig(
        scenario="s" + str(getattr(args, "scenario", scenario)),
        L=args.L,
        S=args.S,
        n=n,
        reps=args.reps,
        seed=args.seed,
        link=args.link,
        beta_sd=args.beta_sd,
        z_levels=args.z_levels,
    )


# ---------------------------------------------------------------------------
# commands


def _pair_from_args(args) -> PairFile:
    return PairFile(args.input, args.x, args.y, discretize_x=args.discretize_x, discretize_y=args.discretize_y)


def cmd_fit(args, record: Record) -> int:
    loaded = load_pair(_pair_from_args(args), min_levels=2)
    sample = loaded.sample
    fit = fit_colp(sample, args.link, args.search, _search_config(args))
    order = ordering_names(fit.sigma, sample.y_names())
    print(f"n = {sample.n} (dropped {loaded.rows_dropped}), S = {sample.S}, L = {sample.L}")
    print(f"ordering of {args.y}: {' < '.join(order)}")
    print(f"log-likelihood: {fit.log_likelihood:.6f} ({fit.search}, {fit.evaluations} fits)")
    for name, b in zip(sample.x_names(), fit.ordinal.params.beta):
        print(f"  beta[{name}] = {b:.4f}")
    record.add("item", n=sample.n, rows_dropped=loaded.rows_dropped, ordering=order,
               x_levels=sample.x_names(), y_levels=sample.y_names(), fit=fit.to_dict())
    return EXIT_OK


def _verdict_item(verdict, sample) -> dict:
    fwd = ordering_names(verdict.forward.colp.sigma, sample.y_names())
    bwd = ordering_names(verdict.backward.colp.sigma, sample.x_names())
    return {
        "decision": verdict.decision,
        "gap": verdict.log_likelihood_gap,
        "forward_ordering": fwd,
        "backward_ordering": bwd,
        "forward_log_likelihood": verdict.forward.joint_log_likelihood,
        "backward_log_likelihood": verdict.backward.joint_log_likelihood,
        "separation": verdict.separation,
        "verdict": verdict.to_dict(),
    }


def cmd_discover(args, record: Record) -> int:
    loaded = load_pair(_pair_from_args(args))
    sample = loaded.sample
    verdict = decide(sample, args.link, args.search, _search_config(args), args.tie_tol)
    item = _verdict_item(verdict, sample)
    print(f"decision: {verdict.decision}")
    print(f"log-likelihood gap (x->y minus y->x): {verdict.log_likelihood_gap:.6f}")
    print(f"ordering of {args.y} given {args.x}: {' < '.join(item['forward_ordering'])}")
    print(f"ordering of {args.x} given {args.y}: {' < '.join(item['backward_ordering'])}")
    if verdict.separation:
        print("note: at least one fit hit separation (diverging coefficients)")
    record.add("item", n=sample.n, rows_dropped=loaded.rows_dropped, cut_points=loaded.cut_points, **item)
    return EXIT_OK


def _ns(values: list[int]):
    return values if values else [1000]


def cmd_simulate(args, record: Record) -> int:
    settings = _settings(args)
    table = []
    for n in _ns(parse_levels(args.n)):
        cfg = _scenario(args, n)
        rows, summary = run_simulation(cfg, settings)
        for r in rows:
            record.add("replication", **r)
        entry = {"n": n, **summary}
        table.append(entry)
        record.add("summary", scenario=cfg.scenario, L=cfg.L, S=cfg.S, **entry)
    cols = ["n", "reps", "accuracy", "accuracy_se", "mean_tau", "tau_se", "ties", "errors"]
    print_table(table, cols)
    if args.plot_data:
        write_plot_data(args.plot_data, table, ["n", "accuracy", "accuracy_se", "mean_tau", "tau_se"])
    return EXIT_OK


def cmd_ablate(args, record: Record) -> int:
    settings = _settings(args)
    cfg = _scenario(args, int(args.n), scenario="1")
    rows, table = run_ablation(cfg, parse_floats(args.taus), settings, freeze=args.freeze)
    for r in rows:
        record.add("replication", **r)
    for t in table:
        record.add("summary", **t)
    print_table(table, ["target_tau", "achieved_tau", "reps", "accuracy", "accuracy_se"])
    if args.plot_data:
        write_plot_data(args.plot_data, table, ["achieved_tau", "accuracy", "accuracy_se"])
    return EXIT_OK


def cmd_sweep(args, record: Record) -> int:
    settings = _settings(args)
    cfg = _scenario(args, int(args.n), scenario="1")
    rows, table = run_sweep(cfg, parse_levels(args.levels), settings)
    for r in rows:
        record.add("replication", **r)
    for t in table:
        record.add("summary", **t)
    print_table(table, ["levels", "reps", "accuracy", "accuracy_se", "mean_tau", "tau_se"])
    if args.plot_data:
        write_plot_data(args.plot_data, table, ["levels", "accuracy", "accuracy_se", "mean_tau", "tau_se"])
    return EXIT_OK


def cmd_bench(args, record: Record) -> int:
    directory = args.dir or example_pairs_dir()
    pairs = read_manifest(directory)
    config = _search_config(args)
    rows = []
    for pair in pairs:
        name = os.path.basename(pair.path)
        loaded = load_pair(pair)
        sample = loaded.sample
        try:
            verdict = decide(sample, args.link, args.search, config, args.tie_tol)
        except CausalFitError as exc:
            row = {"pair": name, "x": pair.x_column, "y": pair.y_column, "truth": pair.truth,
                   "decision": "error", "credit": 0.0, "error": exc.diagnostics}
        else:
            item = _verdict_item(verdict, sample)
            row = {
                "pair": name,
                "x": pair.x_column,
                "y": pair.y_column,
                "truth": pair.truth,
                "decision": verdict.decision,
                "credit": decision_credit(verdict.decision, pair.truth, args.tie_credit),
                "gap": verdict.log_likelihood_gap,
                "n": sample.n,
                "forward_ordering": item["forward_ordering"],
                "backward_ordering": item["backward_ordering"],
                "description": pair.description,
            }
        rows.append(row)
        record.add("pair", **row)
    accuracy = sum(r["credit"] for r in rows) / len(rows)
    record.add("summary", pairs=len(rows), accuracy=accuracy, tie_credit=args.tie_credit)
    print_table(rows, ["pair", "x", "y", "truth", "decision", "gap", "credit"])
    print(f"accuracy: {accuracy:.4f} over {len(rows)} pairs")
    return EXIT_OK


COMMANDS = {
    "fit": cmd_fit,
    "discover": cmd_discover,
    "simulate": cmd_simulate,
    "ablate": cmd_ablate,
    "sweep": cmd_sweep,
    "bench": cmd_bench,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="colp", description="COLP causal discovery for categorical pairs")
    parser.add_argument("--verbose", "-v", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit COLP of y on x and report the ordering")
    _add_pair_options(p)
    _add_fit_options(p)

    p = sub.add_parser("discover", help="decide the causal direction between two columns")
    _add_pair_options(p)
    _add_fit_options(p)

    p = sub.add_parser("simulate", help="Monte-Carlo accuracy on a synthetic scenario")
    _add_sim_options(p)
    _add_fit_options(p)
    p.add_argument("--n", default="1000", help="sample size, a list (100,500) or range (100..110)")

    p = sub.add_parser("ablate", help="accuracy with the ordering frozen at given Kendall taus")
    _add_sim_options(p, scenario=False)
    _add_fit_options(p)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--taus", default="0,0.2,0.4,0.6,0.8,1")
    p.add_argument("--freeze", choices=("both", "forward"), default="both")

    p = sub.add_parser("sweep", help="accuracy and ordering tau across numbers of categories")
    _add_sim_options(p, scenario=False)
    _add_fit_options(p)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--levels", default="3..12", help="e.g. 3..12 or 3,5,7")

    p = sub.add_parser("bench", help="accuracy over a pair collection with declared truths")
    p.add_argument("--dir", default=None, help="directory with pairs.csv (default: bundled examples)")
    p.add_argument("--seed", type=int, default=0)
    _add_fit_options(p)

    p = sub.add_parser("replay", help="re-run a command from the config echoed in a run record")
    p.add_argument("record_file")
    p.add_argument("--out", help="write the new run record here")
    return parser


def _config_echo(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("out", "verbose", "plot_data")}


def run(args) -> int:
    if args.command == "replay":
        try:
            with open(args.record_file, encoding="utf-8") as fh:
                head = json.loads(fh.readline())
            config = dict(head["config"])
            command = head["command"]
        except (OSError, ValueError, KeyError) as exc:
            print(f"error: cannot read run record: {exc}", file=sys.stderr)
            return EXIT_INPUT
        defaults = vars(build_parser().parse_args(_minimal_argv(command, config)))
        defaults.update(config)
        defaults.update(out=args.out, verbose=args.verbose, plot_data=None, command=command)
        args = argparse.Namespace(**defaults)

    record = Record(args.command, _config_echo(args))
    try:
        code = COMMANDS[args.command](args, record)
    except CausalFitError as exc:
        print(f"fit failure: {exc}", file=sys.stderr)
        record.add("error", kind="CausalFitError", message=str(exc), diagnostics=exc.diagnostics)
        code = EXIT_FIT
    except OrdinalError as exc:
        # checked before ValueError, which OrdinalError derives from
        print(f"fit failure: {exc}", file=sys.stderr)
        record.add("error", kind=type(exc).__name__, message=str(exc))
        code = EXIT_FIT
    except (IngestError, SampleError, SearchGateError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        record.add("error", kind=type(exc).__name__, message=str(exc))
        code = EXIT_INPUT
    record.add("exit", code=code)
    record.write(args.out)
    return code


def _minimal_argv(command: str, config: dict) -> list[str]:
    argv = [command]
    if command in ("fit", "discover"):
        argv += ["--input", str(config["input"]), "--x", str(config["x"]), "--y", str(config["y"])]
    elif command in ("simulate", "ablate", "sweep"):
        argv += ["--seed", str(config["seed"])]
    return argv


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
