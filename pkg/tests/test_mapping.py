import os

import pytest

from metakg.errors import MappingError, ParseError
from metakg.mapping import (TurtleParser, execute_mapping, expand_template,
                            load_mapping, parse_mapping)
from metakg.rdf import serialize_ntriples


@pytest.fixture(scope="module")
def fixture_mapping(fixtures_dir):
    return load_mapping(os.path.join(fixtures_dir, "mapping.ttl"))


class TestTurtleParser:
    def test_prefixes_and_lists(self):
        text = """
        @prefix ex: <http://e.org/> .
        ex:s ex:p ex:o1 , ex:o2 ; ex:q "lit"@en .
        """
        triples = TurtleParser(text).parse()
        assert len(triples) == 3
        assert triples[2].object.lang == "en"

    def test_blank_node_property_list(self):
        text = """
        @prefix ex: <http://e.org/> .
        ex:s ex:p [ ex:q "v" ] .
        """
        triples = TurtleParser(text).parse()
        assert len(triples) == 2
        # inner property-list triples come first, then the outer statement
        assert triples[0].subject.is_blank()
        assert triples[1].object == triples[0].subject

    def test_a_keyword(self):
        text = """
        @prefix ex: <http://e.org/> .
        ex:s a ex:Thing .
        """
        triples = TurtleParser(text).parse()
        assert triples[0].predicate.value.endswith("#type")

    def test_syntax_error_position(self):
        with pytest.raises(ParseError) as err:
            TurtleParser("@prefix ex: <http://e.org/> .\nex:s ex:p").parse()
        assert err.value.line >= 2


class TestParseMapping:
    def test_fixture_mapping_has_five_maps(self, fixture_mapping):
        names = [tm.name for tm in fixture_mapping.triples_maps]
        assert names == ["DatasetMap", "CatalogMap", "OrganizationMap",
                         "VariableMap", "KeywordMap"]

    def test_empty_document(self):
        assert parse_mapping("").triples_maps == []

    def test_unknown_rr_term_named_in_error(self):
        text = """
        @prefix rr: <http://www.w3.org/ns/r2rml#> .
        <#M> rr:logicalTable [ rr:sqlQuery "SELECT 1" ] ;
             rr:subjectMap [ rr:template "http://e.org/{id}" ] .
        """
        with pytest.raises(MappingError, match="rr:sqlQuery"):
            parse_mapping(text)

    def test_dangling_parent_map(self):
        text = """
        @prefix rr: <http://www.w3.org/ns/r2rml#> .
        @prefix ex: <http://e.org/> .
        <#M> rr:logicalTable [ rr:tableName "t.csv" ] ;
             rr:subjectMap [ rr:template "http://e.org/{id}" ] ;
             rr:predicateObjectMap [
               rr:predicate ex:p ;
               rr:objectMap [ rr:parentTriplesMap <#Ghost> ;
                              rr:joinCondition [ rr:child "id" ; rr:parent "id" ] ]
             ] .
        """
        with pytest.raises(MappingError, match="Ghost"):
            parse_mapping(text)


class TestExpandTemplate:
    def test_simple_substitution(self):
        out = expand_template("http://data.example.org/cbs/dataset/{doc_id}",
                              {"doc_id": "GBAPERSOONTAB"})
        assert out == "http://data.example.org/cbs/dataset/GBAPERSOONTAB"

    def test_no_placeholders_verbatim(self):
        assert expand_template("http://e.org/fixed", {}) == "http://e.org/fixed"

    def test_iri_percent_encoding(self):
        out = expand_template("http://e.org/d/{id}", {"id": "a b"})
        assert out == "http://e.org/d/a%20b"

    def test_literal_target_keeps_raw_value(self):
        assert expand_template("{id}", {"id": "a b"}, iri_safe=False) == "a b"

    def test_doubled_braces_escape(self):
        assert expand_template("x{{y}}z{id}", {"id": "1"}) == "x{y}z1"

    def test_unresolved_placeholder_names_column_and_row(self):
        with pytest.raises(MappingError, match="unknown column 'nope'.*row 3"):
            expand_template("{nope}", {"id": "1"}, row_index=3)


class TestExecuteMapping:
    def test_mini_fixture_matches_handwritten_golden(self, fixtures_dir,
                                                     fixture_mapping):
        triples, stats = execute_mapping(
            fixture_mapping, os.path.join(fixtures_dir, "mini", "tables"))
        produced = serialize_ntriples(triples)
        with open(os.path.join(fixtures_dir, "mini", "golden.nt"),
                  encoding="utf-8") as fh:
            assert produced == fh.read()
        assert stats.triple_count == 70

    def test_empty_tables_zero_triples(self, tmp_path, fixture_mapping):
        for name in ("datasets.csv", "memberships.csv", "variables.csv",
                     "keywords.csv"):
            src = os.path.join(os.path.dirname(__file__), "..", "fixtures",
                               "mini", "tables", name)
            with open(src, encoding="utf-8") as fh:
                header = fh.readline()
            (tmp_path / name).write_text(header, encoding="utf-8")
        triples, stats = execute_mapping(fixture_mapping, str(tmp_path))
        assert triples == [] and stats.triple_count == 0

    def test_keyword_row_produces_language_tagged_triple(self, fixtures_dir,
                                                         fixture_mapping):
        triples, _ = execute_mapping(
            fixture_mapping, os.path.join(fixtures_dir, "mini", "tables"))
        kw = [t for t in triples
              if t.predicate.value.endswith("dcat#keyword")]
        assert kw
        sample = kw[0]
        assert sample.subject.value.endswith("/dataset/mini-one")
        assert sample.object.lang == "en"

    def test_missing_table_file(self, tmp_path, fixture_mapping):
        with pytest.raises(MappingError, match="not found"):
            execute_mapping(fixture_mapping, str(tmp_path))

    def test_template_column_missing_fails_at_execution(self, tmp_path):
        text = """
        @prefix rr: <http://www.w3.org/ns/r2rml#> .
        @prefix ex: <http://e.org/> .
        <#M> rr:logicalTable [ rr:tableName "t.csv" ] ;
             rr:subjectMap [ rr:template "http://e.org/{missing}" ] .
        """
        mapping = parse_mapping(text)  # parse is fine
        (tmp_path / "t.csv").write_text("id\n1\n", encoding="utf-8")
        with pytest.raises(MappingError, match="missing"):
            execute_mapping(mapping, str(tmp_path))

    def test_join_missing_column_reported(self, tmp_path):
        text = """
        @prefix rr: <http://www.w3.org/ns/r2rml#> .
        @prefix ex: <http://e.org/> .
        <#A> rr:logicalTable [ rr:tableName "a.csv" ] ;
             rr:subjectMap [ rr:template "http://e.org/a/{id}" ] ;
             rr:predicateObjectMap [
               rr:predicate ex:p ;
               rr:objectMap [ rr:parentTriplesMap <#B> ;
                              rr:joinCondition [ rr:child "id" ; rr:parent "ghost" ] ]
             ] .
        <#B> rr:logicalTable [ rr:tableName "b.csv" ] ;
             rr:subjectMap [ rr:template "http://e.org/b/{id}" ] .
        """
        (tmp_path / "a.csv").write_text("id\n1\n", encoding="utf-8")
        (tmp_path / "b.csv").write_text("id\n1\n", encoding="utf-8")
        with pytest.raises(MappingError, match="ghost"):
            execute_mapping(parse_mapping(text), str(tmp_path))

    def test_monotone_under_row_append(self, tmp_path, fixtures_dir,
                                       fixture_mapping):
        src_dir = os.path.join(fixtures_dir, "mini", "tables")
        import shutil
        for name in os.listdir(src_dir):
            shutil.copy(os.path.join(src_dir, name), tmp_path / name)
        before, _ = execute_mapping(fixture_mapping, str(tmp_path))
        with open(tmp_path / "keywords.csv", "a", encoding="utf-8",
                  newline="") as fh:
            fh.write("mini-three,gamma\n")
        after, _ = execute_mapping(fixture_mapping, str(tmp_path))
        assert set(before).issubset(set(after))
        assert len(after) == len(before) + 1

    def test_deterministic_output(self, fixtures_dir, fixture_mapping):
        tables = os.path.join(fixtures_dir, "mini", "tables")
        first = serialize_ntriples(execute_mapping(fixture_mapping, tables)[0])
        second = serialize_ntriples(execute_mapping(fixture_mapping, tables)[0])
        assert first == second

    def test_subject_totality_class_triples_first(self, fixtures_dir,
                                                  fixture_mapping):
        triples, _ = execute_mapping(
            fixture_mapping, os.path.join(fixtures_dir, "mini", "tables"))
        subjects_with_type = {t.subject for t in triples
                              if t.predicate.value.endswith("#type")}
        typed_maps_subjects = {t.subject for t in triples
                               if not t.subject.value.endswith(
                                   ("mini-one", "mini-two", "mini-three"))}
        # every non-dataset subject comes from a map with an rr:class
        assert typed_maps_subjects <= subjects_with_type
