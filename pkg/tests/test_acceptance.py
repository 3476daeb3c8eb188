"""Acceptance criteria, one test per criterion.

Run with `pytest tests/test_acceptance.py -v -s` to see one PASS line per
criterion; any failure shows up as a regular pytest failure.
"""

import csv
import math
import os
import random
import sys
import time

import numpy as np
import pytest

from conftest import random_triples
from metakg import pipeline
from metakg.config import load_config
from metakg.embed import sgns_step
from metakg.extract import extract_dates
from metakg.mapping import execute_mapping, load_mapping
from metakg.mine import MiningConfig, mine_rules
from metakg.rdf import (Triple, make_iri, parse_ntriples, serialize_ntriples)
from metakg.store import BGPQuery, TriplePattern, TripleStore, Var
from oracles import (enumerate_rules_bruteforce, mined_rule_key,
                     nested_loop_bgp)

HAS_PART = "http://purl.org/dc/terms/hasPart"
IS_PART_OF = "http://purl.org/dc/terms/isPartOf"


def report(line):
    print(f"[PASS] {line}", file=sys.stderr)


def test_mapping_throughput_anchor(fixtures_dir, fixture_workdir, tmp_path):
    """>= 20,242 triples mapped and serialized within 8 seconds."""
    tables_dir = fixture_workdir / "tables"
    out_dir = tmp_path / "tables"
    out_dir.mkdir()
    # ~630 triples per corpus copy stay distinct after deduplication
    # (shared catalog/organization triples collapse), see fixtures/README.md
    copies = math.ceil(20_242 / 630)
    for name in ("datasets.csv", "variables.csv", "keywords.csv",
                 "memberships.csv"):
        with open(tables_dir / name, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        header, body = rows[0], rows[1:]
        doc_col = header.index("doc_id")
        out_rows = [header]
        for copy in range(copies):
            for row in body:
                clone = list(row)
                clone[doc_col] = f"{row[doc_col]}-r{copy}"
                out_rows.append(clone)
        with open(out_dir / name, "w", newline="", encoding="utf-8") as fh:
            csv.writer(fh, lineterminator="\n").writerows(out_rows)

    mapping = load_mapping(os.path.join(fixtures_dir, "mapping.ttl"))
    start = time.perf_counter()
    triples, stats = execute_mapping(mapping, str(out_dir))
    text = serialize_ntriples(triples)
    elapsed = time.perf_counter() - start
    assert stats.triple_count >= 20_242
    assert elapsed <= 8.0
    reparsed = parse_ntriples(text)
    assert len(reparsed) == stats.triple_count
    load_start = time.perf_counter()
    store = TripleStore.load(reparsed)
    load_elapsed = time.perf_counter() - load_start
    assert len(store) >= 20_242
    assert load_elapsed < 8.0
    report(f"mapping throughput: {stats.triple_count} triples mapped and "
           f"serialized in {elapsed:.2f} s (limit 8 s); {len(store)} distinct "
           f"loaded into the store in {load_elapsed:.2f} s")


def test_inverse_rule_reproduction():
    """The part-of inverse rule is mined with perfect scores on a mirror KG."""
    pairs = 10
    triples = []
    for i in range(pairs):
        a = make_iri(f"http://kg.org/a{i}")
        b = make_iri(f"http://kg.org/b{i}")
        triples.append(Triple(b, make_iri(HAS_PART), a))
        triples.append(Triple(a, make_iri(IS_PART_OF), b))
    rules = mine_rules(TripleStore.load(triples))
    wanted = f"?b <{HAS_PART}> ?a => ?a <{IS_PART_OF}> ?b"
    matching = [r for r in rules if r.canonical_text() == wanted]
    assert len(matching) == 1
    scores = matching[0].scores
    assert scores.support == pairs
    assert scores.head_coverage == 1.0
    assert scores.std_confidence == 1.0
    assert scores.pca_confidence == 1.0
    report("inverse-rule reproduction: hasPart(Y,X) => isPartOf(X,Y) at "
           "support 10, hc/std/pca exactly 1.0")


def _random_kg(rng, max_triples=200, max_relations=6):
    n_relations = rng.randrange(2, max_relations + 1)
    n_entities = rng.randrange(5, 30)
    n_triples = rng.randrange(10, max_triples + 1)
    triples = set()
    for _ in range(n_triples):
        triples.add(Triple(
            make_iri(f"http://kg.org/e{rng.randrange(n_entities)}"),
            make_iri(f"http://kg.org/rel/r{rng.randrange(n_relations)}"),
            make_iri(f"http://kg.org/e{rng.randrange(n_entities)}"),
        ))
    return sorted(triples, key=lambda t: (t.subject.value, t.predicate.value,
                                          t.object.value))


def test_miner_oracle_equivalence():
    """50 random KGs: mined rules and all four scores match brute force."""
    rng = random.Random(424242)
    config = MiningConfig()
    start = time.perf_counter()
    total_rules = 0
    for round_no in range(50):
        triples = _random_kg(rng)
        mined = mine_rules(TripleStore.load(triples), config)
        expected = enumerate_rules_bruteforce(
            triples, max_len=config.max_len,
            min_support=config.min_support,
            min_head_coverage=config.min_head_coverage,
            min_std_confidence=config.min_std_confidence)
        got = {}
        for rule in mined:
            key = mined_rule_key(rule)
            assert key not in got, f"duplicate rule in round {round_no}"
            got[key] = {
                "support": rule.scores.support,
                "head_coverage": rule.scores.head_coverage,
                "std_confidence": rule.scores.std_confidence,
                "pca_confidence": rule.scores.pca_confidence,
            }
        assert got == expected, f"round {round_no} disagreed"
        total_rules += len(mined)
    elapsed = time.perf_counter() - start
    assert elapsed <= 60.0
    report(f"miner oracle equivalence: 50 KGs, {total_rules} rules matched "
           f"exactly in {elapsed:.1f} s (limit 60 s)")


def _random_query(rng, triples):
    n_patterns = rng.randrange(1, 5)
    patterns = []
    var_pool = []
    for i in range(n_patterns):
        base = rng.choice(triples)
        elems = []
        for pos, term in ((0, base.subject), (1, base.predicate),
                          (2, base.object)):
            roll = rng.random()
            if roll < 0.45:
                elems.append(term)
            elif var_pool and roll < 0.75:
                elems.append(Var(rng.choice(var_pool)))
            else:
                name = f"v{i}{pos}"
                var_pool.append(name)
                elems.append(Var(name))
        if all(isinstance(e, Var) for e in elems):
            elems[1] = base.predicate
        patterns.append(TriplePattern(*elems))
    all_vars = sorted({v for p in patterns for v in p.variables()})
    if not all_vars:
        return None
    select = rng.sample(all_vars, rng.randrange(1, len(all_vars) + 1))
    distinct = []
    if len(all_vars) >= 2 and rng.random() < 0.25:
        distinct = [tuple(rng.sample(all_vars, 2))]
    return BGPQuery(patterns, select, distinct)


def test_bgp_oracle_equivalence():
    """100 random graphs up to 1,000 triples: exact set equality with the
    nested-loop join."""
    rng = random.Random(31337)
    graphs = 0
    queries = 0
    while graphs < 100:
        triples = list(set(random_triples(rng, rng.randrange(50, 1001))))
        store = TripleStore.load(triples)
        graphs += 1
        done = 0
        while done < 2:
            query = _random_query(rng, triples)
            if query is None:
                continue
            expected = nested_loop_bgp(store.triples(), query.patterns,
                                       query.select, query.distinct_pairs,
                                       max_intermediate=300_000)
            if expected is None:
                continue
            got = {tuple(row) for row in store.evaluate_bgp(query).rows}
            assert got == expected
            done += 1
            queries += 1
    report(f"BGP oracle equivalence: {graphs} graphs, {queries} queries, "
           "exact set equality")


def test_ntriples_round_trip():
    """1,000 generated triple sets survive serialize + parse unchanged."""
    rng = random.Random(90210)
    lang_tagged = 0
    escaped = 0
    for _ in range(1000):
        triples = random_triples(rng, rng.randrange(0, 15))
        text = serialize_ntriples(triples)
        assert parse_ntriples(text) == triples
        lang_tagged += sum(1 for t in triples if t.object.lang)
        escaped += sum(1 for t in triples
                       if any(c in t.object.value for c in '"\\\n\t\r')
                       and t.object.is_literal())
    assert lang_tagged > 0 and escaped > 0
    report(f"N-Triples round trip: 1000 sets ({lang_tagged} language-tagged, "
           f"{escaped} escaped literals) identical after parse")


def test_mini_fixture_golden(fixtures_dir):
    """Mapping the 3-row mini fixture reproduces the hand-written golden
    file byte for byte."""
    mapping = load_mapping(os.path.join(fixtures_dir, "mapping.ttl"))
    triples, _ = execute_mapping(mapping,
                                 os.path.join(fixtures_dir, "mini", "tables"))
    produced = serialize_ntriples(triples)
    with open(os.path.join(fixtures_dir, "mini", "golden.nt"),
              encoding="utf-8") as fh:
        golden = fh.read()
    assert produced == golden
    report(f"mini-fixture golden: {len(triples)} statements byte-identical "
           "to the hand-written file")


def test_sgns_gradient_check():
    """All partial derivatives within 1e-4 relative error of central
    differences over 100 random configurations; zero-vector loss exact."""
    k = 5
    _, _, _, loss0 = sgns_step(np.zeros(6), np.zeros(6), np.zeros((k, 6)),
                               alpha=0.1)
    assert abs(loss0 - (1 + k) * math.log(2)) < 1e-12

    rng = np.random.default_rng(246810)
    h = 1e-5
    checked = 0
    for _ in range(100):
        dims = int(rng.integers(2, 10))
        kk = int(rng.integers(1, 6))
        v = rng.normal(scale=0.8, size=dims)
        u_o = rng.normal(scale=0.8, size=dims)
        u_n = rng.normal(scale=0.8, size=(kk, dims))

        def loss_at(v_, o_, n_):
            return sgns_step(v_, o_, n_, alpha=0.0)[3]

        nv, no, nn, _ = sgns_step(v, u_o, u_n, alpha=1.0)
        grads = [((v - nv), lambda b: loss_at(v + b, u_o, u_n),
                  lambda b: loss_at(v - b, u_o, u_n), (dims,)),
                 ((u_o - no), lambda b: loss_at(v, u_o + b, u_n),
                  lambda b: loss_at(v, u_o - b, u_n), (dims,)),
                 ((u_n - nn), lambda b: loss_at(v, u_o, u_n + b),
                  lambda b: loss_at(v, u_o, u_n - b), (kk, dims))]
        for analytic, plus, minus, shape in grads:
            flat = analytic.reshape(-1)
            for idx in range(flat.size):
                bump = np.zeros(flat.size)
                bump[idx] = h
                bump = bump.reshape(shape)
                numeric = (plus(bump) - minus(bump)) / (2 * h)
                denom = max(abs(numeric), abs(flat[idx]), 1e-8)
                assert abs(numeric - flat[idx]) / denom < 1e-4
                checked += 1
    report(f"SGNS gradients: {checked} partials within 1e-4 of central "
           "differences; zero-vector loss exact to 1e-12")


def test_end_to_end_determinism(fixtures_dir, tmp_path):
    """Two full pipeline runs with fixed seeds produce byte-identical
    graph.nt, rules.txt and report.json within 30 seconds."""
    start = time.perf_counter()
    outputs = []
    for name in ("run1", "run2"):
        cfg = load_config(os.path.join(fixtures_dir, "fixture.toml"))
        cfg.workdir = str(tmp_path / name)
        assert pipeline.run_all(cfg) == 0
        outputs.append({
            f: (tmp_path / name / f).read_bytes()
            for f in ("graph.nt", "rules.txt", "report.json")
        })
    elapsed = time.perf_counter() - start
    assert outputs[0] == outputs[1]
    assert elapsed <= 30.0
    report(f"end-to-end determinism: graph.nt, rules.txt, report.json "
           f"byte-identical across runs ({elapsed:.1f} s for both, limit 30 s)")


def test_derived_relation_fixture_counts(fixture_workdir):
    """Shared-variable and multi-category reports return exactly the counts
    documented in fixtures/README.md."""
    from metakg.rdf import read_ntriples
    store = TripleStore.load(
        read_ntriples(str(fixture_workdir / "graph.nt")))
    shared = store.shared_variable_report()
    participants = {d for a, b, _ in shared for d in (a, b)}
    assert len(participants) == 4
    multi = store.multi_category_report()
    counts = sorted(multi.values())
    assert counts == [2, 2, 3]
    report("derived-relation counts: 4 shared-variable datasets, "
           "2 two-category and 1 three-category dataset, exactly")


def test_date_extraction_grammar():
    """The documented phrase plus a 30-case table covering all three
    branches, 100% exact match."""
    phrase = extract_dates("505 documents were downloaded on 31st March 2020")
    assert [e.normalized for e in phrase] == ["2020-03-31"]

    from test_extract import DATE_TABLE
    assert len(DATE_TABLE) == 30
    for text, expected in DATE_TABLE:
        got = [e.normalized for e in extract_dates(text)]
        assert got == expected, f"{text!r}: {got} != {expected}"
    report("date extraction: anchor phrase and 30/30 grammar cases exact")
