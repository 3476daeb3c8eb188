"""Command-line entry point wiring all pipeline stages.

Exit codes: 0 success, 1 validation or input error, 2 partial batch
failure (some documents failed but the run completed).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import pipeline
from .config import PipelineConfig, load_config
from .embed import EmbeddingTable, SGNSConfig, WalkConfig, build_walk_corpus, similar, train
from .errors import MetakgError
from .mapping import execute_mapping, load_mapping
from .mine import MiningConfig, RuleMiner, apply_rules, format_rules, parse_rules_file
from .rdf import read_ntriples, serialize_ntriples, write_ntriples
from .report import compute_report, format_report_text, write_report
from .store import TripleStore, bindings_to_json, query_from_json

log = logging.getLogger(__name__)


def _base_config(args) -> PipelineConfig:
    if getattr(args, "config", None):
        cfg = load_config(args.config)
    else:
        cfg = PipelineConfig(base_dir=".")
    if getattr(args, "workdir", None):
        cfg.workdir = os.path.abspath(args.workdir)
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    return cfg


def cmd_ingest(args):
    cfg = _base_config(args)
    if args.manifest:
        cfg.manifest = os.path.abspath(args.manifest)
    if args.dest:
        cfg.workdir = os.path.abspath(args.dest)
    cfg.delay_min = args.delay_min
    cfg.delay_max = args.delay_max
    summary = pipeline.stage_ingest(cfg)
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 2 if summary["failed"] else 0


def cmd_translate(args):
    cfg = _base_config(args)
    if args.lexicon:
        cfg.lexicon = args.lexicon
    cfg.translate_backend = args.backend
    summary = pipeline.stage_translate(cfg)
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def cmd_extract(args):
    cfg = _base_config(args)
    if args.gazetteer:
        cfg.gazetteer = args.gazetteer
    if args.stoplist:
        cfg.stoplist = args.stoplist
    cfg.keywords_per_doc = args.k
    summary = pipeline.stage_extract(cfg)
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def cmd_map(args):
    mapping = load_mapping(args.mapping)
    triples, stats = execute_mapping(mapping, args.tables)
    write_ntriples(triples, args.out)
    print(f"{stats.triple_count} triples written to {args.out} "
          f"in {stats.elapsed_s:.3f} s")
    return 0


def cmd_query(args):
    store = TripleStore.load(read_ntriples(args.graph))
    with open(args.bgp, "r", encoding="utf-8") as fh:
        query = query_from_json(json.load(fh))
    result = store.evaluate_bgp(query)
    print(json.dumps(bindings_to_json(result), indent=2, sort_keys=True))
    return 0


def cmd_report(args):
    cfg = _base_config(args)
    if args.kind == "category":
        report = compute_report(f"{cfg.workdir_path}/tables")
        write_report(report, cfg.workdir_path, figure=not args.no_figure)
        print(format_report_text(report), end="")
        return 0

    graph = args.graph or f"{cfg.workdir_path}/graph.nt"
    store = TripleStore.load(read_ntriples(graph))
    if args.kind == "shared-variables":
        rows = [{"dataset_a": a, "dataset_b": b, "shared_variables": names}
                for a, b, names in store.shared_variable_report()]
        print(json.dumps(rows, indent=2, sort_keys=True))
    else:
        counts = store.multi_category_report()
        print(json.dumps(counts, indent=2, sort_keys=True))
    return 0


def cmd_mine(args):
    store = TripleStore.load(read_ntriples(args.graph))
    config = MiningConfig(max_len=args.max_len,
                          min_head_coverage=args.min_hc,
                          min_std_confidence=args.min_std,
                          min_support=args.min_support)
    rules = RuleMiner(store, config).mine()
    text = format_rules(rules)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    print(text, end="")
    return 0


def cmd_infer(args):
    store = TripleStore.load(read_ntriples(args.graph))
    with open(args.rules, "r", encoding="utf-8") as fh:
        rules = parse_rules_file(fh.read())
    inferred = apply_rules(store, rules, args.threshold, fixpoint=args.fixpoint)
    out = sys.stdout
    if args.out:
        out = open(args.out, "w", encoding="utf-8", newline="\n")
    try:
        for triple, rule_text in inferred:
            out.write(f"# rule: {rule_text}\n")
            out.write(serialize_ntriples([triple]))
    finally:
        if args.out:
            out.close()
    print(f"{len(inferred)} triples inferred", file=sys.stderr)
    return 0


def cmd_embed(args):
    store = TripleStore.load(read_ntriples(args.graph))
    walk_cfg = WalkConfig(walks_per_node=args.walks, walk_length=args.length,
                          window=args.window, seed=args.seed)
    corpus = build_walk_corpus(store, walk_cfg)
    sgns_cfg = SGNSConfig(dims=args.dims, negatives=args.negatives,
                          epochs=args.epochs, seed=args.seed)
    table = train(corpus, sgns_cfg, window=args.window)
    table.save(args.out)
    print(f"{len(table.nodes)} nodes embedded into {args.dims} dims, "
          f"written to {args.out}")
    return 0


def cmd_similar(args):
    table = EmbeddingTable.load(args.embeddings)
    pairs = similar(table, args.node, args.k)
    print(json.dumps([{"node": n, "score": s} for n, s in pairs], indent=2))
    return 0


def cmd_serve(args):
    from .service import create_app, serve

    app = create_app(graph_path=args.graph, rules_path=args.rules,
                     embeddings_path=args.embeddings, namespace=args.namespace,
                     cors_origin=args.cors_origin, static_dir=args.static)
    serve(app, host=args.host, port=args.port)
    return 0


def cmd_all(args):
    cfg = _base_config(args)
    code = pipeline.run_all(cfg)
    print(f"pipeline finished with exit code {code}; outputs in "
          f"{cfg.workdir_path}")
    return code


def build_parser():
    parser = argparse.ArgumentParser(
        prog="metakg",
        description="Build, enrich and explore a metadata knowledge graph.",
    )
    parser.add_argument("--verbose", action="store_true",
                        help="debug-level logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="pipeline TOML config")
        p.add_argument("--workdir", help="working directory")
        p.add_argument("--seed", type=int, help="random seed override")

    p = sub.add_parser("ingest", help="fetch and reconstruct documents")
    common(p)
    p.add_argument("--manifest", help="manifest JSON file")
    p.add_argument("--dest", help="destination workdir (same as --workdir)")
    p.add_argument("--delay-min", type=float, default=1.0)
    p.add_argument("--delay-max", type=float, default=5.0)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("translate", help="fill English fields of documents")
    common(p)
    p.add_argument("--backend", choices=["dict", "http", "none"], default="dict")
    p.add_argument("--lexicon", help="TSV lexicon for the dict backend")
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("extract", help="extract entities and build tables")
    common(p)
    p.add_argument("--gazetteer", help="gazetteer JSON file")
    p.add_argument("--stoplist", help="stoplist file (default bundled)")
    p.add_argument("--k", type=int, default=8, help="keywords per document")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("map", help="execute an R2RML mapping over CSV tables")
    p.add_argument("--mapping", required=True)
    p.add_argument("--tables", required=True)
    p.add_argument("--out", default="graph.nt")
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("query", help="evaluate a BGP query file")
    p.add_argument("--graph", required=True)
    p.add_argument("--bgp", required=True, help="query JSON file")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("report", help="category/count report with figure, "
                                      "or derived-relation reports")
    common(p)
    p.add_argument("kind", nargs="?", default="category",
                   choices=["category", "shared-variables", "multi-category"])
    p.add_argument("--graph", help="graph file for derived-relation kinds "
                                   "(default workdir/graph.nt)")
    p.add_argument("--no-figure", action="store_true")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("mine", help="mine Horn rules from a graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--max-len", type=int, default=3)
    p.add_argument("--min-hc", type=float, default=0.01)
    p.add_argument("--min-std", type=float, default=0.1)
    p.add_argument("--min-support", type=int, default=2)
    p.add_argument("--out", help="rules output file")
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("infer", help="apply mined rules above a threshold")
    p.add_argument("--graph", required=True)
    p.add_argument("--rules", required=True)
    p.add_argument("--threshold", type=float, default=0.9)
    p.add_argument("--fixpoint", action="store_true")
    p.add_argument("--out", help="inferred triples output file")
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("embed", help="train node embeddings")
    p.add_argument("--graph", required=True)
    p.add_argument("--dims", type=int, default=32)
    p.add_argument("--walks", type=int, default=10)
    p.add_argument("--length", type=int, default=8)
    p.add_argument("--window", type=int, default=2)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--negatives", type=int, default=5)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out", default="embeddings.txt")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("similar", help="top-k similar nodes from embeddings")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--node", required=True)
    p.add_argument("-k", type=int, default=10)
    p.set_defaults(func=cmd_similar)

    p = sub.add_parser("serve", help="run the read-only HTTP API")
    p.add_argument("--graph", required=True)
    p.add_argument("--rules")
    p.add_argument("--embeddings")
    p.add_argument("--namespace", default="http://data.example.org/cbs/")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--cors-origin", default="*")
    p.add_argument("--static", help="static files directory (explorer UI)")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("all", help="run the whole pipeline")
    common(p)
    p.set_defaults(func=cmd_all)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except MetakgError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
