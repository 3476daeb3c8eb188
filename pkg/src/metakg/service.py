"""Read-only HTTP API over a loaded graph: search, dataset detail,
related-dataset navigation, BGP query, mined rules and similarity.

The store is immutable after startup, so every handler is a pure read and
responses are stable while the input files are unchanged. The explorer UI
is served from a static directory when one is configured.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import vocab
from .errors import MetakgError, ValidationError
from .mine import HornRule, parse_rules_file
from .rdf import read_ntriples
from .store import (TriplePattern, TripleStore, Var, bindings_to_json,
                    query_from_json)
from .embed import EmbeddingTable, similar as embed_similar

log = logging.getLogger(__name__)

MAX_QUERY_PATTERNS = 10
MAX_QUERY_ROWS = 10_000
MAX_PAGE_SIZE = 100


@dataclass
class DatasetRecord:
    id: str
    iri: str
    title_en: str = ""
    title_nl: str = ""
    description_en: str = ""
    issued: str = ""
    publisher: str = ""
    landing_page: str = ""
    categories: list[str] = field(default_factory=list)
    keywords: list[str] = field(default_factory=list)
    variables: list[dict] = field(default_factory=list)

    def summary(self):
        return {
            "id": self.id,
            "title_en": self.title_en,
            "title_nl": self.title_nl,
            "categories": self.categories,
            "keyword_count": len(self.keywords),
            "variable_count": len(self.variables),
        }


class DatasetCatalog:
    """Dataset-shaped view over the triple store for the API."""

    def __init__(self, store: TripleStore, local_ns: vocab.LocalNamespace = None):
        self.store = store
        self.ns = local_ns or vocab.LocalNamespace()
        self.records: dict[str, DatasetRecord] = {}
        self._build()

    def _literals(self, subject, predicate, lang=None):
        out = []
        for t in self.store.match(TriplePattern(subject, predicate, Var("o"))):
            if t.object.is_literal() and (lang is None or t.object.lang == lang):
                out.append(t.object.value)
        return out

    def _first(self, values, default=""):
        return values[0] if values else default

    def _build(self):
        for t in self.store.match(TriplePattern(Var("d"), vocab.RDF_TYPE,
                                                vocab.DCAT_DATASET)):
            node = t.subject
            iri = node.value
            ds_id = self.ns.dataset_id(iri) or iri
            rec = DatasetRecord(id=ds_id, iri=iri)
            rec.title_en = self._first(self._literals(node, vocab.DCT_TITLE, "en"))
            rec.title_nl = self._first(self._literals(node, vocab.DCT_TITLE, "nl"))
            rec.description_en = self._first(
                self._literals(node, vocab.DCT_DESCRIPTION, "en"))
            rec.issued = self._first(self._literals(node, vocab.DCT_ISSUED))
            for x in self.store.match(TriplePattern(node, vocab.DCT_PUBLISHER,
                                                    Var("p"))):
                if x.object.is_iri():
                    rec.publisher = self._first(
                        self._literals(x.object, vocab.DCT_TITLE)) or x.object.value
            for x in self.store.match(TriplePattern(node, vocab.DCAT_LANDING_PAGE,
                                                    Var("l"))):
                if x.object.is_iri():
                    rec.landing_page = x.object.value
            for x in self.store.match(TriplePattern(node, vocab.DCT_IS_PART_OF,
                                                    Var("c"))):
                target = x.object
                if not target.is_iri():
                    continue
                is_catalog = any(True for _ in self.store.match(
                    TriplePattern(target, vocab.RDF_TYPE, vocab.DCAT_CATALOG)))
                if is_catalog:
                    label = self._first(self._literals(target, vocab.DCT_TITLE),
                                        target.value)
                    rec.categories.append(label)
            rec.categories.sort()
            rec.keywords = sorted(set(self._literals(node, vocab.DCAT_KEYWORD)))
            for x in self.store.match(TriplePattern(node, vocab.DCT_HAS_PART,
                                                    Var("v"))):
                part = x.object
                if not part.is_iri():
                    continue
                is_variable = any(True for _ in self.store.match(
                    TriplePattern(part, vocab.RDF_TYPE, self.ns.variable_class)))
                if not is_variable:
                    continue
                name = self._first(self._literals(part, vocab.DCT_IDENTIFIER))
                label = self._first(self._literals(part, vocab.DCT_TITLE))
                rec.variables.append({"name": name, "label": label})
            rec.variables.sort(key=lambda v: v["name"])
            self.records[ds_id] = rec

        self._by_keyword: dict[str, set[str]] = {}
        self._by_variable: dict[str, set[str]] = {}
        for rec in self.records.values():
            for kw in rec.keywords:
                self._by_keyword.setdefault(kw, set()).add(rec.id)
            for var in rec.variables:
                if var["name"]:
                    self._by_variable.setdefault(var["name"], set()).add(rec.id)

    def search(self, q="", category=""):
        """Scored substring search over titles, keywords and variable names."""
        needle = q.lower()
        hits = []
        for ds_id in sorted(self.records):
            rec = self.records[ds_id]
            if category and category not in rec.categories:
                continue
            if not needle:
                hits.append((0, ds_id))
                continue
            score = 0
            if needle in rec.title_en.lower() or needle in rec.title_nl.lower():
                score = 3
            elif any(needle in kw.lower() for kw in rec.keywords):
                score = 2
            elif any(needle in v["name"].lower() or needle in v["label"].lower()
                     for v in rec.variables):
                score = 1
            if score:
                hits.append((score, ds_id))
        hits.sort(key=lambda pair: (-pair[0], pair[1]))
        return [self.records[ds_id] for _, ds_id in hits]

    def related(self, rec: DatasetRecord):
        """Neighbours by shared variable names and shared keywords."""
        shared_vars: dict[str, list[str]] = {}
        shared_keys: dict[str, list[str]] = {}
        for var in rec.variables:
            for other in self._by_variable.get(var["name"], ()):
                if other != rec.id:
                    shared_vars.setdefault(other, []).append(var["name"])
        for kw in rec.keywords:
            for other in self._by_keyword.get(kw, ()):
                if other != rec.id:
                    shared_keys.setdefault(other, []).append(kw)
        out = []
        for other in sorted(set(shared_vars) | set(shared_keys)):
            other_rec = self.records[other]
            out.append({
                "id": other,
                "title_en": other_rec.title_en,
                "shared_variables": sorted(shared_vars.get(other, [])),
                "shared_keywords": sorted(shared_keys.get(other, [])),
            })
        return out

    def detail(self, ds_id):
        rec = self.records.get(ds_id)
        if rec is None:
            return None
        body = rec.summary()
        body.update({
            "description_en": rec.description_en,
            "issued": rec.issued,
            "publisher": rec.publisher,
            "landing_page": rec.landing_page,
            "keywords": rec.keywords,
            "variables": rec.variables,
            "related": self.related(rec),
        })
        return body


def _bad_request(message):
    return JSONResponse({"error": message}, status_code=400)


def _parse_positive_int(raw, name, default, maximum=None):
    if raw is None or raw == "":
        return default
    try:
        value = int(raw)
    except (TypeError, ValueError):
        raise ValidationError(f"{name} must be an integer")
    if value < 1:
        raise ValidationError(f"{name} must be >= 1")
    if maximum is not None and value > maximum:
        raise ValidationError(f"{name} must be <= {maximum}")
    return value


def create_app(graph_path=None, rules_path=None, embeddings_path=None,
               store: TripleStore = None, rules: list[HornRule] = None,
               embeddings: EmbeddingTable = None, namespace=None,
               cors_origin="*", static_dir=None) -> FastAPI:
    """Build the API application from files or pre-loaded objects."""
    if store is None:
        if graph_path is None:
            raise ValidationError("service needs a graph file or a store")
        store = TripleStore.load(read_ntriples(graph_path))
    if rules is None and rules_path and os.path.exists(rules_path):
        with open(rules_path, "r", encoding="utf-8") as fh:
            rules = parse_rules_file(fh.read())
    if embeddings is None and embeddings_path and os.path.exists(embeddings_path):
        embeddings = EmbeddingTable.load(embeddings_path)

    ns = vocab.LocalNamespace(namespace) if isinstance(namespace, str) \
        else (namespace or vocab.LocalNamespace())
    catalog = DatasetCatalog(store, ns)
    app = FastAPI(title="metakg explorer API", docs_url=None, redoc_url=None)

    @app.middleware("http")
    async def cors_headers(request: Request, call_next):
        response = await call_next(request)
        response.headers["Access-Control-Allow-Origin"] = cors_origin
        return response

    @app.get("/api/datasets")
    def list_datasets(request: Request):
        params = request.query_params
        try:
            page = _parse_positive_int(params.get("page"), "page", 1)
            page_size = _parse_positive_int(params.get("page_size"), "page_size",
                                            20, maximum=MAX_PAGE_SIZE)
        except ValidationError as exc:
            return _bad_request(str(exc))
        q = params.get("q", "")
        category = params.get("category", "")
        matches = catalog.search(q, category)
        start = (page - 1) * page_size
        items = [rec.summary() for rec in matches[start:start + page_size]]
        return {"total": len(matches), "page": page, "page_size": page_size,
                "items": items}

    @app.get("/api/datasets/{ds_id}")
    def dataset_detail(ds_id: str):
        body = catalog.detail(ds_id)
        if body is None:
            return JSONResponse({"error": f"unknown dataset: {ds_id}"},
                                status_code=404)
        return body

    @app.post("/api/query")
    async def run_query(request: Request):
        try:
            payload = json.loads(await request.body())
        except json.JSONDecodeError as exc:
            return _bad_request(f"invalid JSON: {exc}")
        where = payload.get("where") if isinstance(payload, dict) else None
        if isinstance(where, list) and len(where) > MAX_QUERY_PATTERNS:
            return JSONResponse(
                {"error": f"too many patterns (max {MAX_QUERY_PATTERNS})"},
                status_code=413)
        try:
            query = query_from_json(payload)
        except (MetakgError, KeyError, TypeError) as exc:
            return _bad_request(str(exc))
        result = store.evaluate_bgp(query)
        truncated = len(result.rows) > MAX_QUERY_ROWS
        body = bindings_to_json(result)
        if truncated:
            body["rows"] = body["rows"][:MAX_QUERY_ROWS]
        body["truncated"] = truncated
        return body

    @app.get("/api/rules")
    def list_rules():
        out = []
        for rule in rules or []:
            s = rule.scores
            out.append({
                "text": rule.canonical_text(),
                "body": [a.text() for a in rule.body],
                "head": rule.head.text(),
                "support": s.support,
                "head_coverage": s.head_coverage,
                "std_confidence": s.std_confidence,
                "pca_confidence": s.pca_confidence,
            })
        return out

    @app.get("/api/similar/{ds_id}")
    def similar_datasets(ds_id: str, request: Request):
        if embeddings is None:
            return JSONResponse({"error": "embeddings not loaded"},
                                status_code=503)
        try:
            k = _parse_positive_int(request.query_params.get("k"), "k", 10,
                                    maximum=100)
        except ValidationError as exc:
            return _bad_request(str(exc))
        rec = catalog.records.get(ds_id)
        if rec is None or rec.iri not in embeddings.index:
            return JSONResponse({"error": f"unknown dataset: {ds_id}"},
                                status_code=404)
        neighbours = embed_similar(embeddings, rec.iri, k)
        out = []
        for node, score in neighbours:
            entry = {"node": node, "score": score}
            node_id = ns.dataset_id(node)
            if node_id:
                entry["id"] = node_id
                if node_id in catalog.records:
                    entry["title_en"] = catalog.records[node_id].title_en
            out.append(entry)
        return out

    @app.get("/api/health")
    def health():
        return {"status": "ok", "triples": len(store),
                "datasets": len(catalog.records),
                "rules": len(rules or []),
                "embeddings": embeddings is not None}

    if static_dir and os.path.isdir(static_dir):
        app.mount("/", StaticFiles(directory=static_dir, html=True),
                  name="static")

    return app


def serve(app: FastAPI, host="127.0.0.1", port=8080):
    import uvicorn

    uvicorn.run(app, host=host, port=port, log_level="info")
