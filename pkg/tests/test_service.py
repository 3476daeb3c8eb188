import json
import os

import pytest
from fastapi.testclient import TestClient

from metakg.service import create_app


@pytest.fixture(scope="module")
def client(fixture_workdir):
    app = create_app(
        graph_path=str(fixture_workdir / "graph.enriched.nt"),
        rules_path=str(fixture_workdir / "rules.txt"),
        embeddings_path=str(fixture_workdir / "embeddings.txt"),
        cors_origin="http://localhost:5173",
    )
    return TestClient(app)


@pytest.fixture(scope="module")
def bare_client(fixture_workdir):
    """No rules, no embeddings loaded."""
    app = create_app(graph_path=str(fixture_workdir / "graph.nt"))
    return TestClient(app)


class TestSearch:
    def test_death_query_finds_age_at_death(self, client):
        body = client.get("/api/datasets", params={"q": "death"}).json()
        ids = [item["id"] for item in body["items"]]
        assert "age-at-death" in ids
        assert body["total"] == 3

    def test_empty_query_pages_everything(self, client):
        body = client.get("/api/datasets",
                          params={"page_size": "7"}).json()
        assert body["total"] == 20
        assert len(body["items"]) == 7
        page3 = client.get("/api/datasets",
                           params={"page_size": "7", "page": "3"}).json()
        assert len(page3["items"]) == 6

    def test_no_match_empty_total_zero(self, client):
        body = client.get("/api/datasets", params={"q": "zzzzz"}).json()
        assert body == {"total": 0, "page": 1, "page_size": 20, "items": []}

    def test_category_filter(self, client):
        body = client.get("/api/datasets",
                          params={"category": "Education"}).json()
        assert {i["id"] for i in body["items"]} == {
            "school-enrollment", "graduates", "student-finance"}

    def test_malformed_paging_is_400(self, client):
        assert client.get("/api/datasets?page=abc").status_code == 400
        assert client.get("/api/datasets?page=0").status_code == 400
        assert client.get("/api/datasets?page_size=101").status_code == 400

    def test_title_match_ranks_above_keyword_match(self, client):
        body = client.get("/api/datasets", params={"q": "death"}).json()
        assert body["items"][0]["title_en"].lower().count("death")

    def test_summary_shape(self, client):
        item = client.get("/api/datasets",
                          params={"q": "Age at Death"}).json()["items"][0]
        assert set(item) == {"id", "title_en", "title_nl", "categories",
                             "keyword_count", "variable_count"}
        assert item["title_nl"] == "Leeftijd bij overlijden"
        assert item["variable_count"] == 3


class TestDetail:
    def test_worked_example_navigation(self, client):
        body = client.get("/api/datasets/age-at-death").json()
        assert "death" in body["keywords"]
        related = {r["id"]: r for r in body["related"]}
        assert "date-of-death" in related
        assert "death" in related["date-of-death"]["shared_keywords"]
        assert related["date-of-death"]["shared_variables"] == ["GBAGESLACHT"]

    def test_unknown_id_404(self, client):
        assert client.get("/api/datasets/nope").status_code == 404

    def test_never_relates_to_itself(self, client):
        body = client.get("/api/datasets/age-at-death").json()
        assert "age-at-death" not in {r["id"] for r in body["related"]}

    def test_multi_category_dataset_lists_both(self, client):
        body = client.get("/api/datasets/cause-of-death").json()
        assert body["categories"] == ["Health and wellbeing", "Population"]

    def test_detail_fields(self, client):
        body = client.get("/api/datasets/age-at-death").json()
        assert body["issued"] == "2019-03-12"
        assert body["publisher"] == "Statistics Netherlands"
        assert [v["name"] for v in body["variables"]] == [
            "GBAGESLACHT", "OVLJAAR", "OVLLEEFTIJD"]


class TestQueryEndpoint:
    def _keyword_query(self):
        return {
            "select": ["d"],
            "where": [[
                {"type": "var", "name": "d"},
                {"type": "iri", "value": "http://www.w3.org/ns/dcat#keyword"},
                {"type": "literal", "value": "death", "lang": "en"},
            ]],
        }

    def test_matches_cli_output(self, client, fixture_workdir, tmp_path,
                                capsys):
        api = client.post("/api/query", json=self._keyword_query()).json()
        from metakg.cli import main
        qfile = tmp_path / "q.json"
        qfile.write_text(json.dumps(self._keyword_query()), encoding="utf-8")
        assert main(["query", "--graph", str(fixture_workdir / "graph.nt"),
                     "--bgp", str(qfile)]) == 0
        cli_body = json.loads(capsys.readouterr().out)
        assert api["rows"] == cli_body["rows"]
        assert api["vars"] == cli_body["vars"]

    def test_fully_bound_present_pattern(self, client):
        query = {
            "select": [],
            "where": [[
                {"type": "iri",
                 "value": "http://data.example.org/cbs/dataset/age-at-death"},
                {"type": "iri", "value": "http://www.w3.org/ns/dcat#keyword"},
                {"type": "literal", "value": "death", "lang": "en"},
            ]],
        }
        body = client.post("/api/query", json=query).json()
        assert body["rows"] == [[]]
        assert body["truncated"] is False

    def test_malformed_pattern_400(self, client):
        response = client.post("/api/query", json={"where": [[
            {"type": "var", "name": "bad name!"},
            {"type": "iri", "value": "http://e.org/p"},
            {"type": "literal", "value": "x"}]]})
        assert response.status_code == 400

    def test_pattern_limit_413(self, client):
        pattern = [{"type": "var", "name": "s"},
                   {"type": "iri", "value": "http://e.org/p"},
                   {"type": "var", "name": "o"}]
        response = client.post("/api/query", json={"where": [pattern] * 11})
        assert response.status_code == 413

    def test_invalid_json_400(self, client):
        response = client.post("/api/query", content=b"{nope",
                               headers={"Content-Type": "application/json"})
        assert response.status_code == 400


class TestRulesAndSimilar:
    def test_rules_served_with_scores(self, client):
        rules = client.get("/api/rules").json()
        assert len(rules) == 2
        for rule in rules:
            assert rule["pca_confidence"] == 1.0
            assert "hasPart" in rule["text"] or "isPartOf" in rule["text"]

    def test_rules_empty_without_file(self, bare_client):
        assert bare_client.get("/api/rules").json() == []

    def test_similar_matches_cli(self, client, fixture_workdir, capsys):
        api = client.get("/api/similar/age-at-death?k=3").json()
        from metakg.cli import main
        node = "http://data.example.org/cbs/dataset/age-at-death"
        assert main(["similar", "--embeddings",
                     str(fixture_workdir / "embeddings.txt"),
                     "--node", node, "-k", "3"]) == 0
        cli_body = json.loads(capsys.readouterr().out)
        assert [(x["node"], x["score"]) for x in api] == \
               [(x["node"], x["score"]) for x in cli_body]

    def test_similar_unknown_404(self, client):
        assert client.get("/api/similar/nope?k=3").status_code == 404

    def test_similar_503_without_embeddings(self, bare_client):
        response = bare_client.get("/api/similar/age-at-death")
        assert response.status_code == 503


class TestProtocol:
    def test_stateless_repeat_get_identical(self, client):
        a = client.get("/api/datasets", params={"q": "death"})
        b = client.get("/api/datasets", params={"q": "death"})
        assert a.content == b.content

    def test_cors_header_emitted(self, client):
        response = client.get("/api/health")
        assert response.headers["access-control-allow-origin"] == \
            "http://localhost:5173"

    def test_health(self, client):
        body = client.get("/api/health").json()
        assert body["datasets"] == 20
        assert body["rules"] == 2
        assert body["embeddings"] is True
