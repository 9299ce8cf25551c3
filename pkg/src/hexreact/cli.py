"""Command-line workbench wiring the library modules together.

Every subcommand is deterministic given its full flag set (seed included)
and drops a ``<out>.meta.json`` next to its primary output recording the
resolved configuration and tool version, so any artifact can be reproduced
from its metadata alone.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__, analysis, reactor
from .detector import REPORT_HEADER, FitnessConfig, report_rows, track
from .engine import frames_to_text, grid_to_pgm, run
from .evolve import EAConfig, ea_run
from .hexgrid import Grid
from .rules import load_rule, load_rules, save_rules


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _write_meta(out_path: str, args: argparse.Namespace, **extra) -> None:
    config = {
        k: v for k, v in sorted(vars(args).items()) if k != "func" and not callable(v)
    }
    meta = {
        "tool": "hexreact",
        "version": __version__,
        "command": args.command,
        "config": config,
    }
    meta.update(extra)
    _write(out_path + ".meta.json", json.dumps(meta, indent=2, default=str) + "\n")


def _add_fitness_args(p: argparse.ArgumentParser) -> None:
    d = FitnessConfig()
    g = p.add_argument_group("soup runs")
    g.add_argument("--width", type=int, default=d.width)
    g.add_argument("--height", type=int, default=d.height)
    g.add_argument("--patch-width", type=int, default=d.patch_width)
    g.add_argument("--patch-height", type=int, default=d.patch_height)
    g.add_argument("--p-a", type=float, default=d.p_a,
                   help="per-cell probability of seeding state A")
    g.add_argument("--p-b", type=float, default=d.p_b,
                   help="per-cell probability of seeding state B")
    g.add_argument("--steps", type=int, default=d.steps)
    g.add_argument("--window", type=int, default=d.window,
                   help="trailing frames kept for detection")
    g.add_argument("--p-max", type=int, default=d.p_max,
                   help="largest period the tracker will certify")
    g.add_argument("--trials", type=int, default=d.trials)


def _fitness_config(args: argparse.Namespace) -> FitnessConfig:
    return FitnessConfig(
        width=args.width,
        height=args.height,
        patch_width=args.patch_width,
        patch_height=args.patch_height,
        p_a=args.p_a,
        p_b=args.p_b,
        steps=args.steps,
        window=args.window,
        p_max=args.p_max,
        trials=args.trials,
    )


def _load_likelihoods(source: str) -> analysis.LikelihoodMatrices:
    if source == "reference":
        return analysis.reference_likelihoods()
    with open(source, "r", encoding="utf-8") as fh:
        return analysis.LikelihoodMatrices.from_csv(fh.read())


def _load_reduced(source: str) -> analysis.ReducedRuleSet:
    if source == "reference":
        return analysis.reference_reduced_set()
    with open(source, "r", encoding="utf-8") as fh:
        return analysis.ReducedRuleSet.from_csv(fh.read())


# -- subcommands ------------------------------------------------------------


def cmd_simulate(args) -> int:
    rule = load_rule(args.rule)
    grid = Grid.from_text(open(args.grid, encoding="utf-8").read())
    traj = run(grid, rule, args.steps, keep_last=args.keep_last)
    _write(args.dump, frames_to_text(traj.frames))
    if args.pgm_dir:
        os.makedirs(args.pgm_dir, exist_ok=True)
        for k, frame in enumerate(traj.frames):
            path = os.path.join(args.pgm_dir, f"frame_{traj.t0 + k:05d}.pgm")
            with open(path, "wb") as fh:
                fh.write(grid_to_pgm(frame))
    _write_meta(args.dump, args)
    print(f"wrote {len(traj.frames)} frames to {args.dump}")
    return 0


def cmd_detect(args) -> int:
    rule = load_rule(args.rule)
    grid = Grid.from_text(open(args.grid, encoding="utf-8").read())
    traj = run(grid, rule, args.steps, keep_last=args.window)
    locs = track(traj, p_max=args.p_max)
    lines = [REPORT_HEADER] + report_rows(locs)
    _write(args.out, "\n".join(lines) + "\n")
    _write_meta(args.out, args)
    census: dict[str, int] = {}
    for loc in locs:
        census[loc.loc_class] = census.get(loc.loc_class, 0) + 1
    print(f"{len(locs)} localizations: " + (
        ", ".join(f"{k}={v}" for k, v in sorted(census.items())) or "none"))
    return 0


def cmd_evolve(args) -> int:
    cfg = EAConfig(
        population=args.population,
        tournament=args.tournament,
        crossover_prob=args.crossover_prob,
        elitism=args.elitism,
        stall_generations=args.stall,
        max_generations=args.max_generations,
        fitness=_fitness_config(args),
    )
    result = ea_run(cfg, seed=args.seed, threads=args.threads)
    save_rules(
        args.out,
        [result.best_rule],
        header=(
            f"best of ea_run(seed={args.seed}): fitness {result.best_fitness!r} "
            f"after {result.generations} generations ({result.evaluations} evaluations)"
        ),
    )
    if args.history_out:
        rows = ["generation,best,mean"] + [
            f"{g},{b!r},{m!r}" for g, b, m in result.history
        ]
        _write(args.history_out, "\n".join(rows) + "\n")
    if args.append_corpus:
        with open(args.append_corpus, "a", encoding="utf-8") as fh:
            fh.write(result.best_genome + "\n")
    _write_meta(args.out, args, best_fitness=result.best_fitness,
                generations=result.generations)
    print(
        f"best fitness {result.best_fitness:.6f} after {result.generations} "
        f"generations; rule written to {args.out}"
    )
    return 0


def cmd_likelihood(args) -> int:
    rules = load_rules(args.corpus)
    if not rules:
        raise ValueError(f"{args.corpus}: no rules found")
    cfg = _fitness_config(args)
    rng = np.random.default_rng(args.seed)
    matrices, used, skipped = analysis.corpus_likelihoods(
        rules, cfg, rng, max_trials=args.max_trials
    )
    _write(args.out, matrices.to_csv())
    if args.heatmap_dir:
        os.makedirs(args.heatmap_dir, exist_ok=True)
        for which, stem in (("S", "fs"), ("A", "fa"), ("B", "fb"), ("#", "fhash")):
            with open(os.path.join(args.heatmap_dir, stem + ".pgm"), "wb") as fh:
                fh.write(analysis.heatmap_pgm(matrices, which))
    _write_meta(args.out, args, corpus_size=len(rules),
                used=len(used), skipped=[r.to_genome() for r in skipped])
    print(f"likelihoods over {len(used)}/{len(rules)} rules written to {args.out}")
    return 0


def cmd_reduce(args) -> int:
    matrices = _load_likelihoods(args.likelihoods)
    reduced = analysis.reduce_likelihoods(
        matrices, theta=args.theta, eps=args.eps, mode=args.mode, floor=args.floor
    )
    _write(args.out, reduced.to_csv())
    extra = {"class_size": reduced.count()}
    if args.diff_against:
        other = _load_reduced(args.diff_against)
        diff = analysis.diff_reduced_sets(reduced, other)
        diff_path = args.diff_out or args.out + ".diff.csv"
        rows = ["i,j,ours,other"] + [f"{i},{j},{a},{b}" for i, j, a, b in diff]
        _write(diff_path, "\n".join(rows) + "\n")
        extra["diff_entries"] = len(diff)
        print(f"reduced set ({reduced.count()} rules) written to {args.out}; "
              f"{len(diff)} entries differ from {args.diff_against}")
    else:
        print(f"reduced set ({reduced.count()} rules) written to {args.out}")
    _write_meta(args.out, args, **extra)
    return 0


def cmd_react(args) -> int:
    if args.ensemble < 1:
        raise ValueError("--ensemble must be at least 1")
    if args.system:
        with open(args.system, encoding="utf-8") as fh:
            system = reactor.parse_system(fh.read())
    else:
        system = reactor.standard_system()
    init = {"A": args.init_a, "B": args.init_b, "S": args.init_s}
    outputs = []
    for k in range(args.ensemble):
        res = reactor.ssa_run(
            system,
            init,
            args.tmax,
            np.random.default_rng(args.seed + k),
            sample_dt=args.sample_dt,
            max_events=args.max_events,
            omega=args.omega,
        )
        if args.ensemble == 1:
            path = args.out
        else:
            stem, ext = os.path.splitext(args.out)
            path = f"{stem}.{k}{ext or '.csv'}"
        _write(path, res.to_csv())
        outputs.append(path)
        print(
            f"run {k}: {res.events} events, reason={res.reason}, "
            f"final={res.final_counts()} -> {path}"
        )
    _write_meta(args.out, args, outputs=outputs, omega_used=res.omega)
    return 0


def cmd_sweep(args) -> int:
    reduced = _load_reduced(args.reduced)
    cfg = _fitness_config(args)
    rng = np.random.default_rng(args.seed)
    report = analysis.stationarity_sweep(reduced, cfg, rng, n_rules=args.rules)
    _write(args.out, report.to_csv())
    _write_meta(args.out, args, histogram=report.total_histogram(),
                mobile=report.mobile_count())
    total = report.total_histogram()
    print(
        f"swept {args.rules} rules x {cfg.trials} soups: "
        + (", ".join(f"{k}={v}" for k, v in sorted(total.items())) or "nothing tracked")
    )
    return 0


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hexreact",
        description="Hexagonal three-state automata: simulate, detect, evolve, "
        "distil rule statistics, and run the derived reaction scheme.",
    )
    parser.add_argument("--version", action="version", version=f"hexreact {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a rule on a grid and dump frames")
    p.add_argument("--rule", required=True, help="rule file (one 36-letter genome)")
    p.add_argument("--grid", required=True, help="grid text file")
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--keep-last", type=int, default=None,
                   help="keep only this many trailing frames")
    p.add_argument("--dump", required=True, help="output frame-dump path")
    p.add_argument("--pgm-dir", default=None, help="also write one PGM per frame")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("detect", help="track and classify localizations")
    p.add_argument("--rule", required=True)
    p.add_argument("--grid", required=True)
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--window", type=int, default=48)
    p.add_argument("--p-max", type=int, default=12)
    p.add_argument("--out", default="detect.csv")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("evolve", help="evolve rules for mobile localizations")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--population", type=int, default=40)
    p.add_argument("--tournament", type=int, default=2)
    p.add_argument("--crossover-prob", type=float, default=0.6)
    p.add_argument("--elitism", type=int, default=1)
    p.add_argument("--stall", type=int, default=10,
                   help="stop after this many generations without improvement")
    p.add_argument("--max-generations", type=int, default=None)
    p.add_argument("--threads", type=int, default=1,
                   help="fitness evaluation workers (1 reproduces exactly)")
    p.add_argument("--out", default="best_rule.txt")
    p.add_argument("--history-out", default=None)
    p.add_argument("--append-corpus", default=None,
                   help="also append the best genome to this rule file")
    _add_fitness_args(p)
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("likelihood", help="necessary-transition statistics of a corpus")
    p.add_argument("--corpus", required=True, help="rule file, one genome per line")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-trials", type=int, default=20,
                   help="soups tried per rule while hunting its glider")
    p.add_argument("--out", default="likelihoods.csv")
    p.add_argument("--heatmap-dir", default=None)
    _add_fitness_args(p)
    p.set_defaults(func=cmd_likelihood)

    p = sub.add_parser("reduce", help="distil likelihoods to a set-valued rule table")
    p.add_argument("--likelihoods", default="reference",
                   help="CSV path, or 'reference' for the bundled tables")
    p.add_argument("--theta", type=float, default=0.2)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--mode", choices=("mean", "floor"), default="mean")
    p.add_argument("--floor", type=float, default=None)
    p.add_argument("--out", default="reduced.csv")
    p.add_argument("--diff-against", default=None,
                   help="CSV path or 'reference': also write an entry diff")
    p.add_argument("--diff-out", default=None)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("react", help="stochastic run of the reaction scheme")
    p.add_argument("--tmax", type=float, default=40.0)
    p.add_argument("--sample-dt", type=float, default=0.25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--init-a", type=int, default=33333)
    p.add_argument("--init-b", type=int, default=33333)
    p.add_argument("--init-s", type=int, default=33333)
    p.add_argument("--omega", type=float, default=None,
                   help="volume scale (default: initial particle total)")
    p.add_argument("--max-events", type=int, default=None)
    p.add_argument("--ensemble", type=int, default=1,
                   help="number of seeded runs (seed, seed+1, ...)")
    p.add_argument("--system", default=None,
                   help="reaction file overriding the standard scheme")
    p.add_argument("--out", default="react.csv")
    p.set_defaults(func=cmd_react)

    p = sub.add_parser("sweep", help="census soups under rules from a reduced set")
    p.add_argument("--reduced", default="reference",
                   help="CSV path, or 'reference' for the bundled table")
    p.add_argument("--rules", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="sweep.csv")
    _add_fitness_args(p)
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as err:
        print(f"hexreact: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
