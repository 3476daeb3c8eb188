"""Stage orchestration for the command-line pipeline.

Each stage reads its inputs from the workdir, writes its outputs there,
and returns a small machine-readable summary that the CLI persists as
stage_reports/<stage>.json. Summaries hold counts and statuses only, so
re-running a stage over unchanged inputs rewrites identical files.
"""

from __future__ import annotations

import json
import logging
import os
import random

from . import extract as extract_mod
from . import ingest as ingest_mod
from . import translate as translate_mod
from .config import PipelineConfig
from .embed import SGNSConfig, WalkConfig, build_walk_corpus, train
from .errors import ValidationError
from .mapping import execute_mapping, load_mapping
from .mine import RuleMiner, apply_rules, format_rules, parse_rules_file
from .rdf import read_ntriples, serialize_ntriples, write_ntriples
from .report import compute_report, write_report
from .store import TripleStore

log = logging.getLogger(__name__)


def _workpath(cfg: PipelineConfig, *parts):
    return os.path.join(cfg.workdir_path, *parts)


def _write_stage_report(cfg, stage, summary):
    out_dir = _workpath(cfg, "stage_reports")
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, f"{stage}.json"), "w", encoding="utf-8",
              newline="\n") as fh:
        json.dump(summary, fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")


def stage_ingest(cfg: PipelineConfig, http_get=None, sleeper=None) -> dict:
    manifest_path = cfg.require("manifest", "ingest")
    manifest = ingest_mod.load_manifest(manifest_path)
    segments_dir = _workpath(cfg, "segments")
    docs_dir = _workpath(cfg, "docs")
    report = ingest_mod.fetch_documents(
        manifest, cfg.delay_min, cfg.delay_max, segments_dir,
        http_get=http_get, sleeper=sleeper, rng=random.Random(cfg.seed),
    )
    outcome = ingest_mod.build_documents(manifest, report, segments_dir, docs_dir)
    summary = {
        "documents": sorted(d.doc_id for d in outcome.documents),
        "failures": [{"doc_id": f.doc_id, "status": f.status, "detail": f.detail}
                     for f in sorted(outcome.failures, key=lambda f: f.doc_id)],
        "ok": len(outcome.documents),
        "failed": len(outcome.failures),
    }
    _write_stage_report(cfg, "ingest", summary)
    return summary


def _load_docs(cfg):
    docs_dir = _workpath(cfg, "docs")
    if not os.path.isdir(docs_dir):
        raise ValidationError(f"no documents directory: {docs_dir} (run ingest)")
    docs = []
    for name in sorted(os.listdir(docs_dir)):
        if name.endswith(".doc.json"):
            docs.append(ingest_mod.DescriptionDocument.load(
                os.path.join(docs_dir, name)))
    if not docs:
        raise ValidationError(f"no documents in {docs_dir}")
    return docs


def _make_backend(cfg):
    if cfg.translate_backend == "dict":
        lexicon_path = cfg.require("lexicon", "translate")
        return translate_mod.DictionaryBackend.from_file(lexicon_path)
    if cfg.translate_backend == "http":
        return translate_mod.HttpBackend(endpoint=cfg.mt_endpoint)
    if cfg.translate_backend == "none":
        return None
    raise ValidationError(f"unknown translate backend: {cfg.translate_backend}")


def stage_translate(cfg: PipelineConfig, backend=None) -> dict:
    docs = _load_docs(cfg)
    backend = backend if backend is not None else _make_backend(cfg)
    cache = translate_mod.TranslationCache(_workpath(cfg, "translations.cache.json"))
    docs_dir = _workpath(cfg, "docs")
    translated = 0
    for doc in docs:
        translate_mod.translate_document(doc, backend, cache)
        doc.save(os.path.join(docs_dir, f"{doc.doc_id}.doc.json"))
        translated += 1
    cache.save()
    summary = {"translated": translated, "cache_entries": len(cache)}
    _write_stage_report(cfg, "translate", summary)
    return summary


def stage_extract(cfg: PipelineConfig) -> dict:
    docs = _load_docs(cfg)
    gazetteer_path = cfg.require("gazetteer", "extract")
    gazetteers = extract_mod.load_gazetteers(gazetteer_path)
    stoplist = extract_mod.load_stoplist(
        cfg.resolve(cfg.stoplist) if cfg.stoplist else None)
    stats = extract_mod.build_corpus_stats(
        [extract_mod.document_text(d) for d in docs], stoplist)
    entities = {}
    for doc in docs:
        entities[doc.doc_id] = extract_mod.extract_document(
            doc, gazetteers, stats, k=cfg.keywords_per_doc, stoplist=stoplist)
    tables = extract_mod.build_metadata_tables(
        docs, entities, page_url_base=cfg.namespace + "page/")
    tables_dir = _workpath(cfg, "tables")
    extract_mod.write_metadata_tables(tables, tables_dir)
    summary = {
        "datasets": len(tables.datasets),
        "variables": len(tables.variables),
        "keywords": len(tables.keywords),
        "memberships": len(tables.memberships),
    }
    _write_stage_report(cfg, "extract", summary)
    return summary


def stage_map(cfg: PipelineConfig) -> dict:
    mapping_path = cfg.require("mapping_file", "map")
    mapping = load_mapping(mapping_path)
    tables_dir = _workpath(cfg, "tables")
    triples, stats = execute_mapping(mapping, tables_dir)
    write_ntriples(triples, _workpath(cfg, "graph.nt"))
    log.info("map: %d triples in %.3f s", stats.triple_count, stats.elapsed_s)
    summary = {"triples": stats.triple_count, "per_map": stats.per_map}
    _write_stage_report(cfg, "map", summary)
    return summary


def _load_store(cfg, enriched=False):
    if enriched:
        path = _workpath(cfg, "graph.enriched.nt")
        if os.path.exists(path):
            return TripleStore.load(read_ntriples(path))
    path = _workpath(cfg, "graph.nt")
    if not os.path.exists(path):
        raise ValidationError(f"no graph file: {path} (run map)")
    return TripleStore.load(read_ntriples(path))


def stage_mine(cfg: PipelineConfig) -> dict:
    store = _load_store(cfg)
    miner = RuleMiner(store, cfg.mining)
    rules = miner.mine()
    with open(_workpath(cfg, "rules.txt"), "w", encoding="utf-8",
              newline="\n") as fh:
        fh.write(format_rules(rules))
    summary = {"rules": len(rules),
               "literal_triples_skipped": miner.view.literal_objects_skipped}
    _write_stage_report(cfg, "mine", summary)
    return summary


def stage_infer(cfg: PipelineConfig) -> dict:
    store = _load_store(cfg)
    rules_path = _workpath(cfg, "rules.txt")
    if not os.path.exists(rules_path):
        raise ValidationError(f"no rules file: {rules_path} (run mine)")
    with open(rules_path, "r", encoding="utf-8") as fh:
        rules = parse_rules_file(fh.read())
    inferred = apply_rules(store, rules, cfg.mining.apply_threshold)
    with open(_workpath(cfg, "inferred.nt"), "w", encoding="utf-8",
              newline="\n") as fh:
        for triple, rule_text in inferred:
            fh.write(f"# rule: {rule_text}\n")
            fh.write(serialize_ntriples([triple]))
    enriched = store.triples() + [t for t, _ in inferred]
    write_ntriples(enriched, _workpath(cfg, "graph.enriched.nt"))
    summary = {"inferred": len(inferred),
               "rules_applied": sum(1 for r in rules
                                    if r.scores.pca_confidence
                                    >= cfg.mining.apply_threshold)}
    _write_stage_report(cfg, "infer", summary)
    return summary


def stage_embed(cfg: PipelineConfig) -> dict:
    store = _load_store(cfg, enriched=True)
    seed = cfg.embed_seed if cfg.embed_seed is not None else cfg.seed
    walk_cfg = WalkConfig(walks_per_node=cfg.walks_per_node,
                          walk_length=cfg.walk_length, window=cfg.window,
                          seed=seed)
    corpus = build_walk_corpus(store, walk_cfg)
    sgns_cfg = SGNSConfig(dims=cfg.dims, negatives=cfg.negatives,
                          epochs=cfg.epochs, alpha0=cfg.alpha0, seed=seed)
    losses = []
    table = train(corpus, sgns_cfg, window=walk_cfg.window, epoch_losses=losses)
    table.save(_workpath(cfg, "embeddings.txt"))
    summary = {"nodes": len(table.nodes), "walks": len(corpus),
               "dims": table.dims}
    _write_stage_report(cfg, "embed", summary)
    return summary


def stage_report(cfg: PipelineConfig) -> dict:
    report = compute_report(_workpath(cfg, "tables"))
    write_report(report, cfg.workdir_path)
    _write_stage_report(cfg, "report", report)
    return report


ALL_STAGES = ["ingest", "translate", "extract", "map", "mine", "infer",
              "embed", "report"]


def run_all(cfg: PipelineConfig, http_get=None, sleeper=None) -> int:
    """Run the whole pipeline; exit code 0 on success, 2 when some
    documents failed but the pipeline completed."""
    os.makedirs(cfg.workdir_path, exist_ok=True)
    ingest_summary = stage_ingest(cfg, http_get=http_get, sleeper=sleeper)
    stage_translate(cfg)
    stage_extract(cfg)
    stage_map(cfg)
    stage_mine(cfg)
    stage_infer(cfg)
    stage_embed(cfg)
    stage_report(cfg)
    return 2 if ingest_summary["failed"] else 0
