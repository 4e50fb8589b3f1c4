"""``benders-replay <verb> [--config PATH] [--set K=V]... [--out DIR]``

Exit codes: 0 success, 1 usage error, 2 solver failure, 3 verification mismatch.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import io
from .config import RunConfig, load_config
from .engine import SharedState, commit_replication, solve_replication
from .errors import BendersError, EmptyArchive, FormatError, InvalidConfig
from .harness import emit, emit_states, load_report, replication_seed, run_sequence, summarize
from .model import sample_scenarios

VERBS = ("generate", "solve", "sequence", "verify", "report")
GRAMMAR = "benders-replay <verb> [--config PATH] [--set K=V]... [--out DIR]"

EXIT_OK, EXIT_USAGE, EXIT_SOLVER, EXIT_MISMATCH = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="benders-replay", usage=GRAMMAR,
                description="Benders decomposition over sequences of SAA replications with information reuse.")
    p.add_argument("verb", help="one of: " + ", ".join(VERBS))
    p.add_argument("--config", metavar="PATH", help="INI file with [instance], [sequence], [solver], [output]")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="K=V",
                   help="override a config key, e.g. --set solver.method=dsp (repeatable)")
    p.add_argument("--out", metavar="DIR", help="output directory (defaults to output.dir)")
    p.add_argument("--method", help="shorthand for --set solver.method=...")
    return p


def _out_dir(cfg: RunConfig, args) -> Path:
    return Path(args.out or cfg.get("output", "dir"))


def _write_echo(out: Path, cfg: RunConfig, extra: Optional[dict] = None) -> None:
    out.mkdir(parents=True, exist_ok=True)
    data = {"config": cfg.echo()}
    data.update(extra or {})
    (out / "config_echo.json").write_text(json.dumps(data, indent=1))


def _generate(cfg: RunConfig, out: Path) -> int:
    inst = cfg.instance()
    out.mkdir(parents=True, exist_ok=True)
    io.save_instance(out / "instance.txt", inst)
    seeds = [replication_seed(cfg.master_seed, r) for r in range(1, cfg.replications + 1)]
    for K in cfg.scenario_counts:
        for r, s in enumerate(seeds, start=1):
            io.save_scenarios(out / f"scenarios_K{K}_r{r}.txt", sample_scenarios(inst, K, s))
    _write_echo(out, cfg, {"seeds": seeds})
    print(f"wrote {out / 'instance.txt'} and {len(seeds) * len(cfg.scenario_counts)} scenario files")
    return EXIT_OK


def _solve(cfg: RunConfig, out: Path) -> int:
    inst = cfg.instance()
    opt = cfg.options()
    path = cfg.get("sequence", "scenario_path")
    seed = replication_seed(cfg.master_seed, 1)
    scen = io.load_scenarios(path) if path else sample_scenarios(inst, cfg.scenario_counts[0], seed)
    shared = SharedState.empty(inst, seed=opt.seed)
    if cfg.get("output", "pool"):
        shared.pool = io.loads_pool(io.read_text(cfg.get("output", "pool")))
    if cfg.get("output", "archive"):
        shared.archive = io.loads_archive(io.read_text(cfg.get("output", "archive")))
        shared.replication = max(shared.archive.opt_origin, default=0)
    res = solve_replication(inst, scen, opt, shared)
    commit_replication(shared, res)
    out.mkdir(parents=True, exist_ok=True)
    io.write_text(out / "pool_final.txt", io.dumps_pool(shared.pool))
    io.write_text(out / "archive_final.txt", io.dumps_archive(shared.archive))
    metrics = res.metrics.to_dict()
    _write_echo(out, cfg, {"seed": seed, "value": res.value, "metrics": metrics})
    print(f"z = {res.value!r}")
    for k, v in metrics.items():
        print(f"{k:>18} {v}")
    return EXIT_OK


def _sequence(cfg: RunConfig, out: Path) -> int:
    inst = cfg.instance()
    opt = cfg.options()
    Ks = cfg.scenario_counts
    reports = []
    for K in Ks:
        target = out if len(Ks) == 1 else out / f"K{K}"
        rep = run_sequence(inst, cfg.replications, K, cfg.methods, cfg.master_seed, opt,
                           sparse_baseline=cfg.sparse_baseline, time_limit=cfg.time_limit,
                           log=lambda s: print(s, flush=True))
        rep.config["file_config"] = cfg.echo()
        for fmt in cfg.formats:
            emit(rep, fmt, target)
        emit_states(rep, target)
        reports.append(rep)
    summary = summarize(reports) if len(Ks) == 1 else {f"K{K}": summarize([r]) for K, r in zip(Ks, reports)}
    out.mkdir(parents=True, exist_ok=True)
    (out / "summary.json").write_text(json.dumps(summary, indent=1, default=str))
    return EXIT_OK


def _verify(cfg: RunConfig, out: Path) -> int:
    from .verify import all_pass, format_table, run_verify

    K = min(cfg.scenario_counts[0], 5)
    rows = run_verify(K=K, M=3, master_seed=cfg.master_seed)
    print(format_table(rows))
    ok = all_pass(rows)
    print(f"{sum(r.ok for r in rows)}/{len(rows)} checks passed")
    return EXIT_OK if ok else EXIT_MISMATCH


def _report(cfg: RunConfig, out: Path) -> int:
    paths = sorted(out.rglob("report.json"))
    if not paths:
        raise UsageError(f"no report.json found under {out}")
    reports = [load_report(p) for p in paths]
    methods = reports[0].methods
    if any(r.methods != methods for r in reports):
        raise UsageError("reports do not share the same method list")
    summary = summarize(reports)
    (out / "summary.json").write_text(json.dumps(summary, indent=1, default=str))
    cols = ("total_t", "iterations", "sp_count", "nodes", "root_gap_pct")
    print(f"{'method':<15} " + " ".join(f"{c:>12}" for c in cols))
    for m in methods:
        print(f"{m:<15} " + " ".join(f"{summary['overall'][m][c]:>12.4g}" for c in cols))
    return EXIT_OK


HANDLERS = {"generate": _generate, "solve": _solve, "sequence": _sequence, "verify": _verify, "report": _report}


def dispatch(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.verb not in VERBS:
            raise UsageError(f"unknown verb {args.verb!r}; expected one of {', '.join(VERBS)}")
        overrides = list(args.overrides)
        if args.method:
            overrides.append(f"solver.method={args.method}")
        cfg = load_config(args.config, overrides)
        return HANDLERS[args.verb](cfg, _out_dir(cfg, args))
    except UsageError as exc:
        print(f"usage: {GRAMMAR}\nerror: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EmptyArchive as exc:
        print(f"error: {exc}. Adaptive and static initialization require replication history; "
              f"pass a previous archive with --set output.archive=PATH", file=sys.stderr)
        return EXIT_USAGE
    except (InvalidConfig, FormatError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BendersError as exc:
        print(f"solver failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
