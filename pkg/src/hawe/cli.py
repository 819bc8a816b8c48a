"""Command line interface.

Subcommands: generate | sample | train | classify | search | count | sweep |
bench | wl-roles.  Exit codes: 0 success, 2 usage error, 3 input/validation
error, 4 runtime failure.  Every subcommand that writes artifacts also
writes ``<name>.manifest``: sorted key=value lines echoing the effective
configuration plus a sha256 per artifact, with no timestamps or absolute
paths, so byte-identical runs produce byte-identical manifests.
"""

from __future__ import annotations

import argparse
import hashlib
import sys
from pathlib import Path

import numpy as np

from . import __version__, backend
from . import evaluate as ev
from . import model as model_mod
from . import walks
from .corpus import (CorpusFormatError, build_corpus, export_corpus_tsv,
                     load_corpus, save_corpus)
from .graph import (GraphFormatError, gen_ba, gen_er, gen_pinwheel, load_graph,
                    read_id_value_tsv, save_graph, wl_roles, write_roles_tsv)

_INPUT_ERRORS = (GraphFormatError, CorpusFormatError, FileNotFoundError,
                 IsADirectoryError, PermissionError, KeyError, ValueError)


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def _write_manifest(out_dir: Path, name: str, config: dict, artifacts) -> Path:
    entries = {"command": name, "version": __version__}
    entries.update({k: str(v) for k, v in config.items()})
    for art in artifacts:
        entries[f"sha256.{Path(art).name}"] = _sha256(Path(art))
    path = out_dir / f"{name}.manifest"
    with open(path, "w", encoding="utf-8") as fh:
        for key in sorted(entries):
            fh.write(f"{key}={entries[key]}\n")
    return path


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _echo(args, paths=(), skip=("func", "out", "subcommand")) -> dict:
    """Flatten argparse namespace for the manifest.

    Arguments named in ``paths`` are input files: they are echoed by
    basename with a content digest alongside, never by location, so the
    manifest stays byte-identical across working directories.
    """
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in skip or v is None or callable(v):
            continue
        if k in paths:
            out[k] = Path(v).name
            out[f"sha256.input.{k}"] = _sha256(Path(v))
        else:
            out[k] = v
    return out


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_generate(args) -> int:
    out = _out_dir(args)
    if args.family == "pinwheel":
        graph = gen_pinwheel(args.blades, args.blade_len, args.hetero, args.seed)
        roles = wl_roles(graph)
        graph.labels = roles.roles.astype(np.int32)
        graph.label_names = [str(i) for i in range(roles.num_roles)]
    elif args.family == "er":
        graph = gen_er(args.nodes, args.edge_prob, args.types, args.seed)
    else:
        graph = gen_ba(args.nodes, args.edges_per_node, args.types, args.seed)
    nodes_path = out / "nodes.tsv"
    edges_path = out / "edges.tsv"
    save_graph(graph, nodes_path, edges_path)
    artifacts = [nodes_path, edges_path]
    if args.family == "pinwheel":
        roles_path = out / "roles.tsv"
        write_roles_tsv(graph, graph.labels, roles_path)
        artifacts.append(roles_path)
    cfg = _echo(args)
    cfg.update(num_nodes=graph.num_nodes, num_edges=graph.num_edges)
    _write_manifest(out, "generate", cfg, artifacts)
    print(f"wrote {nodes_path} and {edges_path} "
          f"({graph.num_nodes} nodes, {graph.num_edges} edges)")
    return 0


def cmd_sample(args) -> int:
    out = _out_dir(args)
    graph = load_graph(args.nodes, args.edges)
    corp, lex = build_corpus(graph, args.samples, args.walk_length, args.mode,
                             args.seed)
    corpus_path = out / "corpus.bin"
    save_corpus(corp, lex, corpus_path)
    artifacts = [corpus_path]
    if args.debug_tsv:
        tsv_path = out / "corpus.tsv"
        export_corpus_tsv(corp, lex, tsv_path)
        artifacts.append(tsv_path)
    cfg = _echo(args, paths=("nodes", "edges"))
    cfg.update(lexicon_size=len(lex), context_nodes=corp.num_nodes,
               isolated_nodes=int(corp.isolated.size),
               kernel_backend=backend.active_backend())
    _write_manifest(out, "sample", cfg, artifacts)
    if corp.isolated.size:
        print(f"skipped {corp.isolated.size} isolated node(s)")
    print(f"wrote {corpus_path} ({corp.num_nodes} nodes x {corp.samples} tokens, "
          f"lexicon {len(lex)})")
    return 0


def cmd_train(args) -> int:
    out = _out_dir(args)
    corp, lex = load_corpus(args.corpus)
    cfg = model_mod.TrainConfig(dim=args.dim, window=args.window,
                                epochs=args.epochs, lr_start=args.lr_start,
                                lr_end=args.lr_end, seed=args.seed,
                                threads=args.threads,
                                deterministic=not args.hogwild)
    model = model_mod.train(corp, lex, cfg)
    emb_path = out / "embeddings.tsv"
    model_mod.export_embeddings(model, corp.node_raw_ids, emb_path)
    manifest_cfg = _echo(args, paths=("corpus",))
    manifest_cfg.update(mode=corp.mode, corpus_samples=corp.samples,
                        corpus_walk_length=corp.walk_length,
                        kernel_backend=backend.active_backend())
    _write_manifest(out, "train", manifest_cfg, [emb_path])
    print(f"wrote {emb_path} ({model.node_vecs.shape[0]} x {model.dim})")
    return 0


def _load_labeled_embeddings(emb_path, labels_path):
    ids, matrix, _meta = model_mod.load_embeddings(emb_path)
    label_of = read_id_value_tsv(labels_path)
    names = sorted(set(label_of.values()))
    name_id = {name: i for i, name in enumerate(names)}
    labels = np.full(len(ids), -1, dtype=np.int64)
    for i, rid in enumerate(ids):
        if rid in label_of:
            labels[i] = name_id[label_of[rid]]
    return ids, matrix, labels


def cmd_classify(args) -> int:
    out = _out_dir(args)
    _ids, matrix, labels = _load_labeled_embeddings(args.embeddings, args.labels)
    report = ev.classify(matrix, labels, args.train_frac, args.repeats, args.seed)
    tsv_path = out / "report.tsv"
    with open(tsv_path, "w", encoding="utf-8") as fh:
        fh.write("# repeat\taccuracy\n")
        for i, acc in enumerate(report.accuracies):
            fh.write(f"{i}\t{acc:.9g}\n")
    txt_path = out / "report.txt"
    std = float(np.std(report.accuracies))
    with open(txt_path, "w", encoding="utf-8") as fh:
        fh.write(f"task: {report.task}\n")
        fh.write(f"rows: {report.config['rows']}  classes: {report.config['classes']}\n")
        fh.write(f"repeats: {args.repeats}  train_frac: {args.train_frac}\n")
        fh.write(f"mean accuracy: {report.mean_accuracy:.6f} (std {std:.6f})\n")
    cfg = _echo(args, paths=("embeddings", "labels"))
    cfg.update(mean_accuracy=f"{report.mean_accuracy:.9g}",
               classes=report.config["classes"], rows=report.config["rows"])
    _write_manifest(out, "classify", cfg, [tsv_path, txt_path])
    print(f"mean accuracy {report.mean_accuracy:.4f} over {args.repeats} repeats")
    return 0


def cmd_search(args) -> int:
    out = _out_dir(args)
    ids, matrix, _meta = model_mod.load_embeddings(args.embeddings)
    result = ev.topk_search(matrix, ids, args.target, args.k)
    path = out / "neighbors.tsv"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# rank\tnode_id\tdistance\n")
        for rank, (rid, dist) in enumerate(result.neighbors, start=1):
            fh.write(f"{rank}\t{rid}\t{dist:.9g}\n")
    _write_manifest(out, "search", _echo(args, paths=("embeddings",)), [path])
    print(f"wrote {path}")
    return 0


def cmd_count(args) -> int:
    exact, bound = walks.count_haws(args.length, args.types)
    lines = ["# length\tbell\texact_typed\tclosed_form_bound",
             f"{args.length}\t{walks.bell(args.length)}\t{exact}\t{bound}"]
    print("\n".join(lines))
    if args.out is not None:
        out = _out_dir(args)
        path = out / "counts.tsv"
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
        _write_manifest(out, "count", _echo(args), [path])
    return 0


def _pipeline_config(args) -> ev.PipelineConfig:
    return ev.PipelineConfig(samples=args.samples, walk_length=args.walk_length,
                             mode=args.mode, dim=args.dim, window=args.window,
                             epochs=args.epochs, lr_start=args.lr_start,
                             lr_end=args.lr_end, seed=args.seed,
                             train_frac=args.train_frac, repeats=args.repeats)


def cmd_sweep(args) -> int:
    out = _out_dir(args)
    graph = load_graph(args.nodes, args.edges)
    label_of = read_id_value_tsv(args.labels)
    names = sorted(set(label_of.values()))
    name_id = {name: i for i, name in enumerate(names)}
    labels = np.full(graph.num_nodes, -1, dtype=np.int64)
    for i, rid in enumerate(graph.raw_ids):
        if rid in label_of:
            labels[i] = name_id[label_of[rid]]
    values = [int(v) for v in args.values.split(",") if v]
    rows = ev.sweep(args.param, values, graph, labels, _pipeline_config(args))
    path = out / "sweep.tsv"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# {args.param}\tmean_accuracy\n")
        for value, acc in rows:
            fh.write(f"{value}\t{acc:.9g}\n")
    cfg = _echo(args, paths=("nodes", "edges", "labels"))
    cfg.update(kernel_backend=backend.active_backend())
    _write_manifest(out, "sweep", cfg, [path])
    for value, acc in rows:
        print(f"{args.param}={value}: mean accuracy {acc:.4f}")
    return 0


def cmd_bench(args) -> int:
    out = _out_dir(args)
    sizes = [int(v) for v in args.sizes.split(",") if v]
    rows = ev.bench_runtime(sizes, args.family, _pipeline_config(args),
                            runs=args.runs, p_numerator=args.p_numerator,
                            edges_per_node=args.edges_per_node,
                            num_types=args.types, seed=args.seed)
    path = out / "bench.tsv"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# n\tedges\tseconds\n")
        for row in rows:
            fh.write(f"{row['n']}\t{row['edges']}\t{row['seconds']:.6f}\n")
    cfg = _echo(args)
    cfg.update(kernel_backend=backend.active_backend())
    _write_manifest(out, "bench", cfg, [path])
    for row in rows:
        print(f"n={row['n']}: {row['seconds']:.3f}s ({row['edges']} edges)")
    return 0


def cmd_wl_roles(args) -> int:
    out = _out_dir(args)
    graph = load_graph(args.nodes, args.edges)
    roles = wl_roles(graph, args.max_iters)
    path = out / "roles.tsv"
    write_roles_tsv(graph, roles.roles, path)
    cfg = _echo(args, paths=("nodes", "edges"))
    cfg.update(num_roles=roles.num_roles)
    _write_manifest(out, "wl-roles", cfg, [path])
    print(f"wrote {path} ({roles.num_roles} roles)")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hawe",
        description="Structural node embeddings from anonymous-walk statistics")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("generate", help="write a synthetic graph as TSV files")
    p.add_argument("family", choices=["pinwheel", "er", "ba"])
    p.add_argument("--blades", type=int, default=8)
    p.add_argument("--blade-len", type=int, default=2)
    p.add_argument("--hetero", action="store_true",
                   help="pinwheel only: alternate blade types around the ring")
    p.add_argument("--nodes", type=int, default=1000, help="er/ba node count")
    p.add_argument("--edge-prob", type=float, default=0.01, help="er edge probability")
    p.add_argument("--edges-per-node", type=int, default=1, help="ba attachment count")
    p.add_argument("--types", type=int, default=1, help="er/ba random type count")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("sample", help="build a walk corpus from a graph")
    p.add_argument("--nodes", required=True)
    p.add_argument("--edges", required=True)
    p.add_argument("--mode", choices=list(walks.MODES), default="haw")
    p.add_argument("--samples", type=int, default=1024,
                   help="walks per node (context length)")
    p.add_argument("--walk-length", type=int, default=6, help="edges per walk")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--debug-tsv", action="store_true",
                   help="also write a human-readable corpus.tsv")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("train", help="train embeddings on a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--dim", type=int, default=128)
    p.add_argument("--window", type=int, default=5)
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--lr-start", type=float, default=0.025)
    p.add_argument("--lr-end", type=float, default=1e-4)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--hogwild", action="store_true",
                   help="allow lock-free parallel updates (non-deterministic)")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("classify", help="evaluate embeddings against labels")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--labels", required=True, help="TSV of node_id and label")
    p.add_argument("--train-frac", type=float, default=0.7)
    p.add_argument("--repeats", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("search", help="top-k nearest neighbors of one node")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("-k", "--k", type=int, default=5)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("count", help="walk-pattern counting oracles")
    p.add_argument("--length", type=int, required=True)
    p.add_argument("--types", type=int, default=1)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("sweep", help="re-run the pipeline over one knob")
    p.add_argument("--nodes", required=True)
    p.add_argument("--edges", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--param", choices=sorted(ev.SWEEPABLE), required=True)
    p.add_argument("--values", required=True, help="comma-separated integers")
    _pipeline_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bench", help="runtime scaling benchmark")
    p.add_argument("--family", choices=["er", "ba"], default="er")
    p.add_argument("--sizes", required=True, help="comma-separated node counts")
    p.add_argument("--runs", type=int, default=5)
    p.add_argument("--p-numerator", type=float, default=10.0,
                   help="er edge probability = this / n")
    p.add_argument("--edges-per-node", type=int, default=1, help="ba attachment count")
    p.add_argument("--types", type=int, default=2)
    _pipeline_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("wl-roles", help="typed WL structural roles")
    p.add_argument("--nodes", required=True)
    p.add_argument("--edges", required=True)
    p.add_argument("--max-iters", type=int, default=32)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_wl_roles)

    return parser


def _pipeline_flags(p) -> None:
    p.add_argument("--mode", choices=list(walks.MODES), default="haw")
    p.add_argument("--samples", type=int, default=1024)
    p.add_argument("--walk-length", type=int, default=6)
    p.add_argument("--dim", type=int, default=128)
    p.add_argument("--window", type=int, default=5)
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--lr-start", type=float, default=0.025)
    p.add_argument("--lr-end", type=float, default=1e-4)
    p.add_argument("--train-frac", type=float, default=0.7)
    p.add_argument("--repeats", type=int, default=50)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", default=".")


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # argparse: 0 for --help, 2 for usage errors
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _INPUT_ERRORS as exc:
        msg = " ".join(str(exc).split())
        print(f"error: {msg}", file=sys.stderr)
        return 3
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        msg = " ".join(str(exc).split())
        print(f"error: {type(exc).__name__}: {msg}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
