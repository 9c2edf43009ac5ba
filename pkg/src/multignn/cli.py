"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data error, 3 failed check.
Progress goes to standard error; results go to files or standard output.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import warnings
from contextlib import nullcontext
from dataclasses import replace
from pathlib import Path

import numpy as np

from .generator import GeneratorParams, random_circulant, write_generated
from .graph import GraphError, assign_ports, read_edge_csv, write_ports_csv
from .oracles import ALL_TASKS, TaskId, label_all
from .nodeid import assign_unique_ids, format_label, wl_refine

log = logging.getLogger("multignn")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_CHECK = 0, 1, 2, 3
THREADS_ENV = "MULTIGNN_THREADS"


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class CheckFailed(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits with 2 by default
        raise UsageError(f"{self.prog}: {message}")


def _thread_limit(determinism: bool):
    """Pin BLAS threads: 1 under ``--determinism``, else ``$MULTIGNN_THREADS`` if set."""
    env = os.environ.get(THREADS_ENV)
    limit = 1 if determinism else (int(env) if env else None)
    if limit is None:
        return nullcontext()
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=limit)


def _read_graph(path: str, flag: str = "--graph"):
    try:
        return read_edge_csv(path)
    except FileNotFoundError:
        raise DataError(f"{flag}: no such file {path}") from None
    except GraphError as err:
        raise DataError(f"{flag}: {err}") from None


def _resolve(g, name: str, flag: str) -> int:
    try:
        return g.node_index(name)
    except (GraphError, ValueError):
        raise DataError(f"{flag}: unknown node {name!r}") from None


def _parse_tasks(spec: str | None) -> tuple[TaskId, ...]:
    if not spec:
        return ALL_TASKS
    try:
        tasks = tuple(TaskId.parse(t.strip()) for t in spec.split(","))
    except (KeyError, ValueError) as err:
        raise UsageError(f"--tasks: {err}") from None
    return tuple(sorted(set(tasks)))


def _load_experiment(path: str):
    from .harness import load_config

    try:
        return load_config(path)
    except FileNotFoundError:
        raise DataError(f"--config: no such file {path}") from None
    except (json.JSONDecodeError, TypeError, ValueError, KeyError) as err:
        raise DataError(f"--config: {path}: {err}") from None


def _out_dir(path: str | None) -> Path:
    if not path:
        raise UsageError("--out is required")
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as err:
        raise DataError(f"--out: {err}") from None
    return out


# -- commands --------------------------------------------------------------


def cmd_gen(args) -> int:
    try:
        params = GeneratorParams(args.n, args.d, args.r, args.seed)
    except ValueError as err:
        raise UsageError(str(err)) from None
    g = random_circulant(params)
    meta = write_generated(params, g, args.out)
    log.info("wrote %d edges to %s (+ %s)", g.m, args.out, meta.name)
    return EXIT_OK


def cmd_label(args) -> int:
    g = _read_graph(args.graph)
    tasks = _parse_tasks(args.tasks)
    labels = label_all(g, tasks, args.degree_threshold, args.fan_threshold)
    labels.write_csv(args.out)
    if args.stats:
        labels.write_stats(args.stats)
    log.info("labelled %d nodes for %d tasks", g.n, len(tasks))
    return EXIT_OK


def cmd_ports(args) -> int:
    g = _read_graph(args.graph)
    write_ports_csv(assign_ports(g), args.out)
    return EXIT_OK


def cmd_nodeid(args) -> int:
    g = _read_graph(args.graph)
    root = _resolve(g, args.root, "--root")
    res = assign_unique_ids(g, root=root)
    rows = []
    for v in sorted(res.labels, key=lambda v: (len(res.labels[v]), res.labels[v])):
        rows.append({
            "node": g.node_label(v),
            "label": format_label(res.labels[v], res.base),
            "declined": [format_label(p, res.base) for p in res.declined(v)],
        })
    unreachable = [g.node_label(v) for v in res.unreachable]
    if args.format == "json":
        text = json.dumps({"base": res.base, "labels": rows, "unreachable": unreachable}, indent=2)
    else:
        lines = ["node\tlabel\tdeclined"]
        lines += [f"{r['node']}\t{r['label']}\t{' '.join(r['declined'])}" for r in rows]
        lines += [f"{v}\t-\t" for v in unreachable]
        text = "\n".join(lines)
    _emit(text, args.out)
    return EXIT_OK


def cmd_wl(args) -> int:
    g = _read_graph(args.graph)
    root = _resolve(g, args.root, "--root") if args.root is not None else None
    ports = assign_ports(g) if args.ports else None
    col = wl_refine(g, args.rounds, root, ports, args.reverse)
    final = col.final()
    doc = {
        "rounds": args.rounds,
        "classes": len(set(final)),
        "colors": {g.node_label(v): format(c, "032x") for v, c in enumerate(final)},
    }
    if args.compare:
        h = _read_graph(args.compare, "--compare")
        root2 = _resolve(h, args.compare_root, "--compare-root") if args.compare_root is not None else None
        other = wl_refine(h, args.rounds, root2, assign_ports(h) if args.ports else None, args.reverse).final()
        same_multiset = sorted(final) == sorted(other)
        same_root = root is not None and root2 is not None and final[root] == other[root2]
        doc["compare"] = {
            "same_color_multiset": same_multiset,
            "same_root_color": same_root,
            "distinguishable": not (same_multiset and (same_root or root is None)),
        }
    _emit(json.dumps(doc, indent=2), args.out)
    return EXIT_OK


def cmd_train(args) -> int:
    from .harness import export_metrics, train
    from .nn import save_checkpoint

    exp = _load_experiment(args.config)
    if args.seed is not None:
        exp = replace(exp, seeds=[args.seed])
    if args.determinism:
        exp = replace(exp, determinism=True)
    out = _out_dir(args.out)
    with _thread_limit(exp.determinism):
        result = train(exp, progress=log.info)
    report = result.report
    export_metrics([report], out / "metrics.csv", "csv")
    export_metrics([report], out / "metrics.json", "json")
    if any(s.state is not None for s in result.seeds):
        save_checkpoint(result.best_model(), out / "checkpoint.json",
                        {"tasks": report.tasks, "config_hash": report.config_hash, "hops": exp.hops})
    for line in _summary(report):
        log.info(line)
    if report.failures:
        for f in report.failures:
            log.error("%s", f)
        return EXIT_CHECK
    return EXIT_OK


def cmd_eval(args) -> int:
    from .harness import MetricsReport, evaluate, export_metrics
    from .nn import load_checkpoint

    try:
        model, extra = load_checkpoint(args.checkpoint)
    except FileNotFoundError:
        raise DataError(f"--checkpoint: no such file {args.checkpoint}") from None
    except (json.JSONDecodeError, KeyError, ValueError) as err:
        raise DataError(f"--checkpoint: {err}") from None
    g = _read_graph(args.graph)
    tasks = [TaskId.parse(t) for t in extra.get("tasks", [t.column for t in ALL_TASKS])]
    if model.cfg.edge_in_dim != g.edge_features.shape[1]:
        raise DataError(
            f"--graph: {g.edge_features.shape[1]} edge feature columns, checkpoint expects {model.cfg.edge_in_dim}"
        )
    labels = label_all(g, tasks).values
    if args.nodes:
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")  # an empty file is reported below
                mask = np.loadtxt(args.nodes, dtype=np.int64, ndmin=1)
        except (OSError, ValueError) as err:
            raise DataError(f"--nodes: {err}") from None
    else:
        mask = np.arange(g.n)
    try:
        report = evaluate(model, g, labels, mask, [t.column for t in tasks], hops=extra.get("hops", 3))
    except ValueError as err:
        raise DataError(f"--nodes: {err}") from None
    report = MetricsReport(args.name, report.tasks, report.per_seed, runtime_s=report.runtime_s)
    if args.out:
        export_metrics([report], args.out, args.format)
    else:
        print(json.dumps(report.per_seed[0], indent=2))
    return EXIT_OK


def cmd_ablate(args) -> int:
    from .harness import export_metrics, run_ablation, size_sweep

    exp = _load_experiment(args.config)
    if args.seed is not None:
        exp = replace(exp, seeds=[args.seed])
    if args.determinism:
        exp = replace(exp, determinism=True)
    with _thread_limit(exp.determinism):
        if args.sizes:
            try:
                sizes = [int(s) for s in args.sizes.split(",")]
            except ValueError:
                raise UsageError(f"--sizes: expected comma-separated integers, got {args.sizes!r}") from None
            reports = size_sweep(exp, sizes, progress=log.info)
        else:
            sequence = [s for s in args.sequence.split(",") if s] if args.sequence else []
            try:
                reports = run_ablation(exp, sequence, progress=log.info)
            except ValueError as err:
                raise UsageError(f"--sequence: {err}") from None
    export_metrics(reports, args.out, args.format)
    return EXIT_OK


def cmd_gradcheck(args) -> int:
    from .harness.train import build_datasets, full_batch
    from .nn import MultiGNN, grad_check

    exp = _load_experiment(args.config)
    seed = args.seed if args.seed is not None else exp.seeds[0]
    train_d, _, _ = build_datasets(replace(exp, model=replace(exp.model, ego_ids=False)))
    cfg = exp.model
    batch = full_batch(train_d, cfg)
    if cfg.ego_ids:
        flag = np.zeros((batch.num_nodes, 1))
        flag[0] = 1.0
        batch.node_features = np.concatenate([batch.node_features, flag], axis=1)
    model = MultiGNN(cfg, seed)
    with _thread_limit(True):
        report = grad_check(model, batch, train_d.labels, eps=args.eps,
                            minority_class_weight=cfg.minority_class_weight, seed=seed)
    print(f"max_rel_err {report.max_rel_error:.3e}")
    log.info("%s", report)
    if not report.max_rel_error < args.tolerance:
        raise CheckFailed(f"max relative error {report.max_rel_error:.3e} >= --tolerance {args.tolerance}")
    return EXIT_OK


def _summary(report) -> list[str]:
    mean, std = report.mean, report.std
    return [f"{t}: {mean[t]:.4f} +- {std[t]:.4f}" for t in report.tasks]


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


# -- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="multignn", description="Pattern detection on directed multigraphs.")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("gen", help="generate a random circulant graph")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--d", type=float, required=True, help="average degree")
    s.add_argument("--r", type=float, required=True, help="average radius")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True, help="edge CSV; a .json sidecar is written next to it")
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("label", help="ground-truth labels for the detection tasks")
    s.add_argument("--graph", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--tasks", help="comma-separated subset, e.g. deg_in,c3,sg")
    s.add_argument("--stats", help="also write positive ratios as JSON")
    s.add_argument("--degree-threshold", type=int, default=3)
    s.add_argument("--fan-threshold", type=int, default=3)
    s.set_defaults(func=cmd_label)

    s = sub.add_parser("ports", help="multigraph port numbers per edge")
    s.add_argument("--graph", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_ports)

    s = sub.add_parser("nodeid", help="unique IDs by port-numbered BFS from a root")
    s.add_argument("--graph", required=True)
    s.add_argument("--root", required=True)
    s.add_argument("--format", choices=["table", "json"], default="table")
    s.add_argument("--out")
    s.set_defaults(func=cmd_nodeid)

    s = sub.add_parser("wl", help="1-WL colour refinement")
    s.add_argument("--graph", required=True)
    s.add_argument("--rounds", type=int, default=7)
    s.add_argument("--root", help="mark this node as the ego centre")
    s.add_argument("--ports", action="store_true")
    s.add_argument("--reverse", action="store_true")
    s.add_argument("--compare", help="second graph to compare against")
    s.add_argument("--compare-root")
    s.add_argument("--out")
    s.set_defaults(func=cmd_wl)

    for name, func, text in (
        ("train", cmd_train, "train models for every seed in the config"),
        ("ablate", cmd_ablate, "cumulative adaptation ablation or size sweep"),
    ):
        s = sub.add_parser(name, help=text)
        s.add_argument("--config", required=True)
        s.add_argument("--seed", type=int, help="override the config's seed list")
        s.add_argument("--determinism", action="store_true", help="single BLAS thread")
        if name == "train":
            s.add_argument("--out", required=True, help="output directory")
        else:
            s.add_argument("--out", required=True, help="metrics file")
            s.add_argument("--format", choices=["csv", "json"], default="csv")
            s.add_argument("--sequence", default="reverse_mp,ports,ego_ids")
            s.add_argument("--sizes", help="comma-separated node counts (size sweep instead)")
        s.set_defaults(func=func)

    s = sub.add_parser("eval", help="evaluate a checkpoint on a graph")
    s.add_argument("--checkpoint", required=True)
    s.add_argument("--graph", required=True)
    s.add_argument("--nodes", help="file with node ids to score (default: all)")
    s.add_argument("--name", default="eval")
    s.add_argument("--out")
    s.add_argument("--format", choices=["csv", "json"], default="json")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("gradcheck", help="finite-difference check of the model gradients")
    s.add_argument("--config", required=True)
    s.add_argument("--seed", type=int)
    s.add_argument("--eps", type=float, default=1e-3)
    s.add_argument("--tolerance", type=float, default=1e-4)
    s.set_defaults(func=cmd_gradcheck)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as err:
        print(err, file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(message)s",
        stream=sys.stderr,
        force=True,
    )
    try:
        return args.func(args)
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as err:
        print(f"data error: {err}", file=sys.stderr)
        return EXIT_DATA
    except CheckFailed as err:
        print(f"check failed: {err}", file=sys.stderr)
        return EXIT_CHECK
    except OSError as err:
        print(f"data error: {err.filename or ''}: {err.strerror or err}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
