import json
import os
import shutil

from metakg.cli import main
from metakg.report import compute_report, format_report_text


def run_cli(*argv):
    return main(list(argv))


class TestPipelineAll:
    def test_all_on_fixture_produces_artifacts(self, fixtures_dir, tmp_path):
        workdir = tmp_path / "work"
        code = run_cli("all", "--config",
                       os.path.join(fixtures_dir, "fixture.toml"),
                       "--workdir", str(workdir))
        assert code == 0
        for name in ("graph.nt", "rules.txt", "report.json", "inferred.nt",
                     "embeddings.txt", "report.png", "report.csv"):
            assert (workdir / name).exists(), name

    def test_missing_manifest_exit_one(self, tmp_path, capsys):
        config = tmp_path / "broken.toml"
        config.write_text("""
[pipeline]
workdir = "w"
[ingest]
manifest = "does-not-exist.json"
""", encoding="utf-8")
        code = run_cli("all", "--config", str(config))
        assert code == 1
        assert "does-not-exist.json" in capsys.readouterr().err

    def test_schema_invalid_document_exit_two(self, fixtures_dir, tmp_path):
        # copy the fixture tree, corrupt one segment file
        corpus = tmp_path / "corpus"
        shutil.copytree(fixtures_dir, corpus,
                        ignore=shutil.ignore_patterns("golden", "mini", "work"))
        bad = corpus / "segments" / "pensions.segments.jsonl"
        bad.write_text('{"text": "x", "page": 0}\n', encoding="utf-8")
        manifest = json.loads((corpus / "manifest.json").read_text())
        for entry in manifest["entries"]:
            entry.pop("expected_sha256", None)
        (corpus / "manifest.json").write_text(json.dumps(manifest))
        code = run_cli("all", "--config", str(corpus / "fixture.toml"),
                       "--workdir", str(tmp_path / "work"))
        assert code == 2
        stage = json.loads((tmp_path / "work" / "stage_reports" /
                            "ingest.json").read_text())
        assert stage["failed"] == 1
        assert stage["failures"][0]["doc_id"] == "pensions"

    def test_rerun_stage_idempotent(self, fixtures_dir, fixture_workdir):
        from metakg.config import load_config
        from metakg import pipeline
        cfg = load_config(os.path.join(fixtures_dir, "fixture.toml"))
        cfg.workdir = str(fixture_workdir)
        graph_before = (fixture_workdir / "graph.nt").read_bytes()
        docs_before = {p.name: p.read_bytes()
                       for p in (fixture_workdir / "docs").iterdir()}
        pipeline.stage_ingest(cfg)
        pipeline.stage_translate(cfg)
        pipeline.stage_extract(cfg)
        pipeline.stage_map(cfg)
        docs_after = {p.name: p.read_bytes()
                      for p in (fixture_workdir / "docs").iterdir()}
        assert docs_after == docs_before
        assert (fixture_workdir / "graph.nt").read_bytes() == graph_before


class TestMapCommand:
    def test_map_cli_writes_golden(self, fixtures_dir, tmp_path, capsys):
        out = tmp_path / "graph.nt"
        code = run_cli("map", "--mapping",
                       os.path.join(fixtures_dir, "mapping.ttl"),
                       "--tables",
                       os.path.join(fixtures_dir, "mini", "tables"),
                       "--out", str(out))
        assert code == 0
        with open(os.path.join(fixtures_dir, "mini", "golden.nt"), "rb") as fh:
            assert out.read_bytes() == fh.read()
        assert "70 triples" in capsys.readouterr().out


class TestQueryCommand:
    def test_query_cli_outputs_bindings(self, fixture_workdir, tmp_path,
                                        capsys):
        query = {
            "select": ["d"],
            "where": [[
                {"type": "var", "name": "d"},
                {"type": "iri", "value": "http://www.w3.org/ns/dcat#keyword"},
                {"type": "literal", "value": "death", "lang": "en"},
            ]],
        }
        qfile = tmp_path / "q.json"
        qfile.write_text(json.dumps(query), encoding="utf-8")
        code = run_cli("query", "--graph",
                       str(fixture_workdir / "graph.nt"), "--bgp", str(qfile))
        assert code == 0
        body = json.loads(capsys.readouterr().out)
        ids = {row[0]["value"].rsplit("/", 1)[1] for row in body["rows"]}
        assert ids == {"age-at-death", "date-of-death", "cause-of-death"}


class TestReportCommand:
    def test_report_totals_are_column_sums(self, fixture_workdir):
        report = compute_report(str(fixture_workdir / "tables"))
        assert report["totals"]["datasets"] == sum(
            r["datasets"] for r in report["categories"])
        assert report["totals"]["variables"] == sum(
            r["variables"] for r in report["categories"])
        assert report["totals"] == {"datasets": 20, "variables": 49}

    def test_empty_workdir_zero_table(self, tmp_path):
        report = compute_report(str(tmp_path))
        assert report == {"categories": [],
                          "totals": {"datasets": 0, "variables": 0}}
        text = format_report_text(report)
        assert "Total" in text

    def test_report_cli_writes_figure(self, fixtures_dir, fixture_workdir,
                                      capsys):
        code = run_cli("report", "--workdir", str(fixture_workdir))
        assert code == 0
        out = capsys.readouterr().out
        assert "Health and wellbeing" in out
        assert (fixture_workdir / "report.png").exists()
        assert (fixture_workdir / "report.json").exists()

    def test_shared_variables_report_kind(self, fixture_workdir, capsys):
        code = run_cli("report", "shared-variables",
                       "--workdir", str(fixture_workdir))
        assert code == 0
        rows = json.loads(capsys.readouterr().out)
        pairs = {(r["dataset_a"].rsplit("/", 1)[1],
                  r["dataset_b"].rsplit("/", 1)[1]) for r in rows}
        assert pairs == {("age-at-death", "date-of-death"),
                         ("income-panel", "jobs-register")}

    def test_multi_category_report_kind(self, fixture_workdir, capsys):
        code = run_cli("report", "multi-category",
                       "--workdir", str(fixture_workdir))
        assert code == 0
        counts = json.loads(capsys.readouterr().out)
        assert sorted(counts.values()) == [2, 2, 3]


class TestMineInferCommands:
    def test_mine_then_infer_round_trip(self, fixture_workdir, tmp_path,
                                        capsys):
        rules_file = tmp_path / "rules.txt"
        code = run_cli("mine", "--graph", str(fixture_workdir / "graph.nt"),
                       "--out", str(rules_file))
        assert code == 0
        assert rules_file.read_text().count("=>") == 2
        out_file = tmp_path / "inferred.nt"
        code = run_cli("infer", "--graph", str(fixture_workdir / "graph.nt"),
                       "--rules", str(rules_file), "--threshold", "0.9",
                       "--out", str(out_file))
        assert code == 0
        # fixture graph is already closed under the two inverse rules
        assert out_file.read_text() == ""


class TestSimilarCommand:
    def test_similar_cli_matches_library(self, fixture_workdir, capsys):
        from metakg.embed import EmbeddingTable, similar
        node = "http://data.example.org/cbs/dataset/age-at-death"
        code = run_cli("similar", "--embeddings",
                       str(fixture_workdir / "embeddings.txt"),
                       "--node", node, "-k", "3")
        assert code == 0
        body = json.loads(capsys.readouterr().out)
        table = EmbeddingTable.load(str(fixture_workdir / "embeddings.txt"))
        expected = [{"node": n, "score": s} for n, s in similar(table, node, 3)]
        assert body == expected

    def test_unknown_node_exit_one(self, fixture_workdir, capsys):
        code = run_cli("similar", "--embeddings",
                       str(fixture_workdir / "embeddings.txt"),
                       "--node", "http://nope.org/x", "-k", "3")
        assert code == 1
