"""Command-line interface: ``egocontext run | bench | analyze | snapshot | generate``.

Exit codes: 0 success, 1 validation error, 2 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

from egocontext import snapshot
from egocontext.analysis import UntaggedAlterError, mean_strong_fraction, semantic_layer_eval
from egocontext.analysis import structure_report
from egocontext.bench import run_bench
from egocontext.config import ConfigError, RunConfig, load_config
from egocontext.events import ParseError, iter_events, load_identities, write_events
from egocontext.replay import FeatureRow, ReplayError, replay
from egocontext.social import ValidationError
from egocontext.synth import SyntheticWorldSpec, generate_benchmark, generate_world

EXIT_OK, EXIT_VALIDATION, EXIT_IO = 0, 1, 2
MODELS = ("social", "proximity", "gps")


def fmt(x) -> str:
    if isinstance(x, float):
        if math.isnan(x):
            return ""
        return format(x, ".6g")
    return str(x)


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def _write_json(path: Path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def feature_header(config: RunConfig) -> list[str]:
    return (["ego", "window_end"]
            + [f"sc_{i}" for i in range(1, config.social.layers + 1)]
            + [f"fpp_{i}" for i in range(1, config.proximity.layers + 1)]
            + [f"fpg_{i}" for i in range(1, config.gps.layers + 1)]
            + ["active_count"])


def write_features(path: Path, rows: Sequence[FeatureRow], config: RunConfig) -> None:
    _write_csv(path, feature_header(config),
               ([r.ego, r.window_end, *r.sc, *r.fpp, *r.fpg, r.active_count] for r in rows))


def _replay_file(events_path, config, identities=None, engines=None, flush=True, workers=1):
    idmap = load_identities(identities) if identities else None
    events = list(iter_events(events_path, idmap))
    rows, engines = replay(events, config, engines=engines, flush=flush, workers=workers)
    return events, rows, engines


# -- subcommands -----------------------------------------------------------------

def cmd_run(args) -> int:
    engines = None
    if args.resume:
        engines, config = snapshot.load(args.resume)
        if args.config:
            print("note: --config ignored, using the configuration stored in the snapshot",
                  file=sys.stderr)
    else:
        config = load_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    events, rows, engines = _replay_file(args.events, config, args.identities, engines,
                                         flush=False, workers=args.workers)
    if args.snapshot_out:
        snapshot.save(engines, config, args.snapshot_out)
    for ego in sorted(engines):
        rows.extend(engines[ego].flush())
    rows.sort(key=lambda r: (r.ego, r.window_end))
    write_features(out / "features.csv", rows, config)
    summaries = {ego: engines[ego].summary() for ego in sorted(engines)}
    report = {
        "events": len(events),
        "egos": len(engines),
        "rows": len(rows),
        "rebuilds": {m: sum(s["rebuilds"][m] for s in summaries.values()) for m in MODELS},
        "per_ego": summaries,
        "config": config.to_dict(),
        "errors": {"count": 0, "messages": []},
    }
    _write_json(out / "run-report.json", report)
    print(f"wrote {len(rows)} feature rows for {len(engines)} ego(s) to {out}")
    return EXIT_OK


def cmd_bench(args) -> int:
    etas = args.eta or [150, 500, 1000]
    if min(etas) <= 0 or args.contacts <= 0 or args.alters <= 0:
        raise ConfigError("bench parameters must be positive")
    report = run_bench(etas, args.contacts, args.alters, args.force_rebuild, args.seed,
                       num_layers=args.layers, bucket_width=args.bucket)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "bench-report.json", report.to_dict())
    for c in report.curves:
        print(f"eta={c.eta:5d}  post-plateau mean {c.post_plateau_mean_ms:.3f} ms  "
              f"plateau={'yes' if c.plateau else 'no'}")
    return EXIT_OK


def _load_state(path: Path, config_path, identities):
    """Engines from a snapshot file, a directory holding ``snapshot.json`` or
    an events file (replayed)."""
    if path.is_dir():
        path = path / "snapshot.json"
    if path.suffix == ".json":
        engines, config = snapshot.load(path)
        for eng in engines.values():
            eng.flush()
        return engines, config
    config = load_config(config_path)
    _, _, engines = _replay_file(path, config, identities)
    return engines, config


def cmd_analyze(args) -> int:
    engines, config = _load_state(Path(args.input), args.config, args.identities)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    structure_rows, ccdf_rows, hist_rows = [], [], []
    summary = {"egos": len(engines), "models": {}}
    for model in MODELS:
        items = []
        for ego in sorted(engines):
            st = engines[ego].networks[model]
            items.append((st.network, [r.weight for r in st.ranking]))
        items = [it for it in items if it[1]]
        rep = structure_report(items)
        for i, (c, w) in enumerate(zip(rep.mean_counts, rep.mean_weights), start=1):
            if c > 0:
                structure_rows.append([model, i, c, w])
        if items:
            ccdf_rows.extend([model, x, y] for x, y in rep.ccdf)
            hist_rows.extend([model, k, v] for k, v in rep.circles_hist.items())
        summary["models"][model] = {"egos_with_alters": rep.n_egos,
                                    "circles_hist": {str(k): v for k, v in rep.circles_hist.items()}}
    _write_csv(out / "structure.csv", ["model", "layer", "mean_count", "mean_weight"], structure_rows)
    _write_csv(out / "ccdf.csv", ["model", "n_alters", "ccdf"], ccdf_rows)
    _write_csv(out / "circles-hist.csv", ["model", "circles", "n_egos"], hist_rows)

    if not args.tags:
        print("notice: no truth-tag sidecar given (--tags); semantic evaluation skipped",
              file=sys.stderr)
        summary["semantics"] = "skipped"
    else:
        with open(args.tags, encoding="utf-8") as fh:
            tags = json.load(fh)
        sem_rows = []
        summary["semantics"] = {}
        for model in MODELS:
            nets = [engines[e].networks[model].network for e in sorted(engines)]
            members = [a for n in nets for layer in n.layers for a in layer]
            if not members:
                continue
            if not any(a.key in tags for a in members):
                print(f"notice: no {model} alters in the sidecar; {model} semantics skipped",
                      file=sys.stderr)
                continue
            ev = semantic_layer_eval(nets, tags)
            per_ego = mean_strong_fraction(nets, tags)
            for row, pe in zip(ev.as_rows(), per_ego):
                sem_rows.append([model, row["layer"], row["n_alters"], row["strong_fraction"],
                                 row["weak_fraction"], pe])
            summary["semantics"][model] = {"monotone": ev.monotone}
        _write_csv(out / "semantics.csv",
                   ["model", "layer", "n_alters", "strong_fraction", "weak_fraction",
                    "mean_ego_strong_fraction"], sem_rows)
    _write_json(out / "analysis-report.json", summary)
    print(f"analysis written to {out}")
    return EXIT_OK


def cmd_snapshot(args) -> int:
    if args.action == "save":
        config = load_config(args.config)
        _, _, engines = _replay_file(args.events, config, args.identities, flush=False)
        snapshot.save(engines, config, args.path)
        print(f"snapshot of {len(engines)} ego(s) written to {args.path}")
    else:
        engines, config = snapshot.load(args.path)
        info = {ego: engines[ego].summary() for ego in sorted(engines)}
        print(json.dumps({"version": snapshot.VERSION, "egos": info}, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_generate(args) -> int:
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    if args.kind == "bench":
        events = generate_benchmark(args.contacts, args.alters, args.seed)
        tags = None
    else:
        spec = SyntheticWorldSpec(n_egos=args.egos, duration_days=args.days, seed=args.seed)
        events, tags = generate_world(spec)
    with open(out, "w", encoding="utf-8") as fh:
        n = write_events(events, fh)
    if tags is not None:
        tag_path = out.with_suffix(".tags.json")
        _write_json(tag_path, tags)
        print(f"wrote {n} events to {out} and truth tags to {tag_path}")
    else:
        print(f"wrote {n} events to {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="egocontext", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out_default="out"):
        sp.add_argument("--config", help="JSON run configuration")
        sp.add_argument("--out", default=out_default, help="output directory")
        sp.add_argument("--seed", type=int, default=1)

    r = sub.add_parser("run", help="replay an event file and export features")
    r.add_argument("events")
    common(r)
    r.add_argument("--identities", help="JSON map of raw identifier -> alter key")
    r.add_argument("--resume", help="continue from a snapshot file")
    r.add_argument("--snapshot-out", help="write engine state here after the replay")
    r.add_argument("--workers", type=int, default=1)
    r.set_defaults(func=cmd_run)

    b = sub.add_parser("bench", help="per-update latency benchmark")
    common(b)
    b.add_argument("--eta", type=int, action="append", help="repeatable; default 150 500 1000")
    b.add_argument("--contacts", type=int, default=20_000)
    b.add_argument("--alters", type=int, default=5_000)
    b.add_argument("--layers", type=int, default=4)
    b.add_argument("--bucket", type=int, default=100, help="n_a bucket width")
    b.add_argument("--force-rebuild", action=argparse.BooleanOptionalAction, default=True)
    b.set_defaults(func=cmd_bench)

    a = sub.add_parser("analyze", help="structure and semantic reports")
    a.add_argument("input", help="events file, snapshot file or state directory")
    common(a)
    a.add_argument("--tags", help="truth-tag sidecar JSON")
    a.add_argument("--identities")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("snapshot", help="save or inspect engine snapshots")
    s_sub = s.add_subparsers(dest="action", required=True)
    ss = s_sub.add_parser("save")
    ss.add_argument("events")
    ss.add_argument("path")
    ss.add_argument("--config")
    ss.add_argument("--identities")
    sh = s_sub.add_parser("show")
    sh.add_argument("path")
    s.set_defaults(func=cmd_snapshot)

    g = sub.add_parser("generate", help="write synthetic event streams")
    g.add_argument("kind", choices=["world", "bench"])
    g.add_argument("--out", required=True, help="JSONL output path")
    g.add_argument("--seed", type=int, default=1)
    g.add_argument("--egos", type=int, default=5)
    g.add_argument("--days", type=float, default=30.0)
    g.add_argument("--contacts", type=int, default=20_000)
    g.add_argument("--alters", type=int, default=5_000)
    g.set_defaults(func=cmd_generate)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ConfigError, ReplayError, ValidationError, UntaggedAlterError,
            snapshot.SnapshotError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
