"""R2RML-subset mapping: parse a Turtle mapping document and execute it
over CSV staging tables to produce RDF triples.

Logical tables are CSV files (rr:tableName names the file inside the
tables directory). Supported mapping terms: rr:logicalTable, rr:tableName,
rr:subjectMap, rr:template, rr:class, rr:predicateObjectMap, rr:predicate,
rr:objectMap, rr:column, rr:constant, rr:language, rr:datatype,
rr:parentTriplesMap, rr:joinCondition, rr:child, rr:parent. Anything else
in the rr: namespace is rejected rather than silently ignored.
"""

from __future__ import annotations

import csv
import logging
import time
from dataclasses import dataclass, field
from typing import Optional
from urllib.parse import quote

from .errors import MappingError, ParseError, ValidationError
from .rdf import (BLANK, IRI, LITERAL, Term, Triple, make_blank, make_iri,
                  make_literal)
from .vocab import RDF_TYPE

log = logging.getLogger(__name__)

RR = "http://www.w3.org/ns/r2rml#"

_ALLOWED_RR = {
    "logicalTable", "tableName", "subjectMap", "template", "class",
    "predicateObjectMap", "predicate", "objectMap", "column", "constant",
    "language", "datatype", "parentTriplesMap", "joinCondition", "child",
    "parent",
    # class of the maps themselves; carries no mapping semantics
    "TriplesMap",
}


# --- Turtle subset parser -------------------------------------------------


class _TurtleScanner:
    """Tokenizer/parser state over the whole document."""

    def __init__(self, text):
        self.text = text
        self.pos = 0

    def error(self, message):
        line = self.text.count("\n", 0, self.pos) + 1
        col = self.pos - (self.text.rfind("\n", 0, self.pos) + 1) + 1
        raise ParseError(message, line, col)

    def eof(self):
        return self.pos >= len(self.text)

    def skip_ws(self):
        while not self.eof():
            ch = self.text[self.pos]
            if ch in " \t\r\n":
                self.pos += 1
            elif ch == "#":
                nl = self.text.find("\n", self.pos)
                self.pos = len(self.text) if nl < 0 else nl + 1
            else:
                return

    def peek(self):
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self, token):
        if self.text.startswith(token, self.pos):
            self.pos += len(token)
            return True
        return False

    def expect(self, token):
        if not self.take(token):
            self.error(f"expected {token!r}")


DEFAULT_BASE = "http://data.example.org/mapping"


class TurtleParser:
    """Parses the Turtle subset into an ordered list of triples.

    Blank-node property lists get fresh labels; statement order (and
    therefore triples-map order) follows the document. Fragment-style
    relative IRIs like <#DatasetMap> resolve against the base.
    """

    def __init__(self, text, base=DEFAULT_BASE):
        self.scan = _TurtleScanner(text)
        self.base = base
        self.prefixes: dict[str, str] = {}
        self.triples: list[Triple] = []
        self._bnode_counter = 0

    def parse(self) -> list[Triple]:
        scan = self.scan
        scan.skip_ws()
        while not scan.eof():
            if scan.take("@prefix"):
                self._parse_prefix()
            else:
                subject = self._parse_subject()
                scan.skip_ws()
                self._parse_predicate_object_list(subject)
                scan.skip_ws()
                scan.expect(".")
            scan.skip_ws()
        return self.triples

    def _parse_prefix(self):
        scan = self.scan
        scan.skip_ws()
        name = self._read_until_char(":")
        scan.expect(":")
        scan.skip_ws()
        iri = self._parse_iriref()
        scan.skip_ws()
        scan.expect(".")
        self.prefixes[name] = iri.value

    def _read_until_char(self, stop):
        scan = self.scan
        start = scan.pos
        while not scan.eof() and scan.peek() not in stop + " \t\r\n":
            scan.pos += 1
        return scan.text[start:scan.pos]

    def _fresh_bnode(self):
        self._bnode_counter += 1
        return make_blank(f"b{self._bnode_counter}")

    def _parse_iriref(self):
        scan = self.scan
        scan.expect("<")
        start = scan.pos
        end = scan.text.find(">", start)
        if end < 0:
            scan.error("unterminated IRI")
        raw = scan.text[start:end]
        scan.pos = end + 1
        if raw.startswith("#"):
            raw = self.base + raw
        try:
            return make_iri(raw)
        except ValidationError as exc:
            scan.error(str(exc))

    def _parse_prefixed_name(self):
        scan = self.scan
        start = scan.pos
        while not scan.eof() and (scan.peek().isalnum() or scan.peek() in "_-."):
            scan.pos += 1
        prefix = scan.text[start:scan.pos]
        if not scan.take(":"):
            scan.pos = start
            scan.error("expected prefixed name")
        local_start = scan.pos
        while not scan.eof() and (scan.peek().isalnum() or scan.peek() in "_-."):
            scan.pos += 1
        local = scan.text[local_start:scan.pos]
        if local.endswith("."):
            local = local[:-1]
            scan.pos -= 1
        if prefix not in self.prefixes:
            scan.error(f"undeclared prefix {prefix!r}")
        return make_iri(self.prefixes[prefix] + local)

    def _parse_string(self):
        scan = self.scan
        scan.expect('"')
        out = []
        while True:
            if scan.eof():
                scan.error("unterminated string")
            ch = scan.text[scan.pos]
            scan.pos += 1
            if ch == '"':
                break
            if ch == "\\":
                esc = scan.text[scan.pos] if not scan.eof() else ""
                scan.pos += 1
                mapping = {"\\": "\\", '"': '"', "n": "\n", "r": "\r", "t": "\t"}
                if esc not in mapping:
                    scan.error(f"unknown escape \\{esc}")
                out.append(mapping[esc])
            else:
                out.append(ch)
        return "".join(out)

    def _parse_literal(self):
        scan = self.scan
        lexical = self._parse_string()
        if scan.take("@"):
            start = scan.pos
            while not scan.eof() and (scan.peek().isalnum() or scan.peek() == "-"):
                scan.pos += 1
            return make_literal(lexical, lang=scan.text[start:scan.pos])
        if scan.take("^^"):
            dt = self._parse_node(allow_literal=False)
            return make_literal(lexical, datatype=dt.value)
        return make_literal(lexical)

    def _parse_node(self, allow_literal=True, allow_bnode_list=False):
        scan = self.scan
        scan.skip_ws()
        ch = scan.peek()
        if ch == "<":
            return self._parse_iriref()
        if ch == '"':
            if not allow_literal:
                scan.error("literal not allowed here")
            return self._parse_literal()
        if ch == "[":
            if not allow_bnode_list:
                scan.error("blank node list not allowed here")
            return self._parse_bnode_property_list()
        if ch == "a" and scan.text[scan.pos + 1:scan.pos + 2] in (" ", "\t", "\r", "\n"):
            scan.pos += 1
            return RDF_TYPE
        return self._parse_prefixed_name()

    def _parse_subject(self):
        scan = self.scan
        scan.skip_ws()
        if scan.peek() == "[":
            return self._parse_bnode_property_list()
        if scan.peek() == "<":
            return self._parse_iriref()
        return self._parse_prefixed_name()

    def _parse_bnode_property_list(self):
        scan = self.scan
        scan.expect("[")
        node = self._fresh_bnode()
        scan.skip_ws()
        if scan.peek() != "]":
            self._parse_predicate_object_list(node)
            scan.skip_ws()
        scan.expect("]")
        return node

    def _parse_predicate_object_list(self, subject):
        scan = self.scan
        while True:
            scan.skip_ws()
            predicate = self._parse_node(allow_literal=False)
            if not predicate.is_iri():
                scan.error("predicate must be an IRI")
            while True:
                obj = self._parse_node(allow_literal=True, allow_bnode_list=True)
                self.triples.append(Triple(subject, predicate, obj))
                scan.skip_ws()
                if not scan.take(","):
                    break
            if not scan.take(";"):
                return
            scan.skip_ws()
            # tolerate trailing ';' before '.' or ']'
            if scan.peek() in ".]":
                return


# --- mapping document -----------------------------------------------------


@dataclass
class ObjectSpec:
    column: Optional[str] = None
    template: Optional[str] = None
    constant: Optional[Term] = None
    language: Optional[str] = None
    datatype: Optional[str] = None
    parent_map: Optional[str] = None
    join_child: Optional[str] = None
    join_parent: Optional[str] = None


@dataclass
class PredicateObjectMap:
    predicate: Term
    object_spec: ObjectSpec


@dataclass
class TriplesMap:
    name: str
    table: str
    subject_template: str
    classes: list[Term]
    poms: list[PredicateObjectMap]


@dataclass
class MappingDocument:
    triples_maps: list[TriplesMap]

    def by_name(self, name):
        for tm in self.triples_maps:
            if tm.name == name:
                return tm
        raise MappingError(f"no triples map named {name}")


def _check_rr_terms(triples):
    for t in triples:
        for term in (t.predicate, t.object):
            if term.kind == IRI and term.value.startswith(RR):
                local = term.value[len(RR):]
                if local not in _ALLOWED_RR:
                    raise MappingError(f"unsupported mapping term rr:{local}")


class _GraphView:
    """Lookup helper over the parsed mapping triples."""

    def __init__(self, triples):
        self.triples = triples
        self._by_sp = {}
        for t in triples:
            self._by_sp.setdefault((t.subject, t.predicate.value), []).append(t.object)

    def objects(self, subject, predicate_iri):
        return self._by_sp.get((subject, predicate_iri), [])

    def one(self, subject, predicate_iri, what):
        objs = self.objects(subject, predicate_iri)
        if len(objs) != 1:
            raise MappingError(
                f"{what}: expected exactly one {predicate_iri}, found {len(objs)}"
            )
        return objs[0]

    def optional(self, subject, predicate_iri):
        objs = self.objects(subject, predicate_iri)
        if len(objs) > 1:
            raise MappingError(f"more than one {predicate_iri} on {subject}")
        return objs[0] if objs else None


def _map_label(term: Term) -> str:
    if term.kind == BLANK:
        return "_:" + term.value
    value = term.value
    if "#" in value:
        return value.rsplit("#", 1)[1] or value
    return value


def parse_mapping(turtle_text: str) -> MappingDocument:
    """Parse and validate a mapping document.

    Structural checks happen here (unknown rr: terms, dangling parent maps);
    column-level checks happen at execution time against the table headers.
    """
    triples = TurtleParser(turtle_text).parse()
    _check_rr_terms(triples)
    graph = _GraphView(triples)

    map_subjects = []
    for t in triples:
        if t.predicate.value == RR + "logicalTable" and t.subject not in map_subjects:
            map_subjects.append(t.subject)

    maps = []
    names = set()
    for subject in map_subjects:
        name = _map_label(subject)
        logical = graph.one(subject, RR + "logicalTable", name)
        table = graph.one(logical, RR + "tableName", name)
        if table.kind != LITERAL:
            raise MappingError(f"{name}: rr:tableName must be a literal filename")
        smap = graph.one(subject, RR + "subjectMap", name)
        template = graph.one(smap, RR + "template", name)
        if template.kind != LITERAL:
            raise MappingError(f"{name}: rr:template must be a literal")
        classes = []
        for cls in graph.objects(smap, RR + "class"):
            if not cls.is_iri():
                raise MappingError(f"{name}: rr:class must be an IRI")
            classes.append(cls)
        poms = []
        for pom_node in graph.objects(subject, RR + "predicateObjectMap"):
            predicate = graph.one(pom_node, RR + "predicate", name)
            if not predicate.is_iri():
                raise MappingError(f"{name}: rr:predicate must be an IRI")
            omap = graph.one(pom_node, RR + "objectMap", name)
            spec = ObjectSpec()
            col = graph.optional(omap, RR + "column")
            if col is not None:
                spec.column = col.value
            tmpl = graph.optional(omap, RR + "template")
            if tmpl is not None:
                spec.template = tmpl.value
            const = graph.optional(omap, RR + "constant")
            if const is not None:
                spec.constant = const
            lang = graph.optional(omap, RR + "language")
            if lang is not None:
                spec.language = lang.value
            dt = graph.optional(omap, RR + "datatype")
            if dt is not None:
                if not dt.is_iri():
                    raise MappingError(f"{name}: rr:datatype must be an IRI")
                spec.datatype = dt.value
            parent = graph.optional(omap, RR + "parentTriplesMap")
            if parent is not None:
                spec.parent_map = _map_label(parent)
                join = graph.one(omap, RR + "joinCondition", name)
                spec.join_child = graph.one(join, RR + "child", name).value
                spec.join_parent = graph.one(join, RR + "parent", name).value
            chosen = [x for x in (spec.column, spec.template, spec.constant,
                                  spec.parent_map) if x is not None]
            if len(chosen) != 1:
                raise MappingError(
                    f"{name}: object map needs exactly one of rr:column, "
                    f"rr:template, rr:constant, rr:parentTriplesMap"
                )
            if spec.language and spec.datatype:
                raise MappingError(f"{name}: rr:language and rr:datatype conflict")
            poms.append(PredicateObjectMap(predicate, spec))
        maps.append(TriplesMap(name, table.value, template.value, classes, poms))
        names.add(name)

    for tm in maps:
        for pom in tm.poms:
            parent = pom.object_spec.parent_map
            if parent is not None and parent not in names:
                raise MappingError(
                    f"{tm.name}: rr:parentTriplesMap names unknown map {parent}"
                )
    return MappingDocument(maps)


def load_mapping(path) -> MappingDocument:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_mapping(fh.read())


# --- template expansion -----------------------------------------------------


def parse_template(template: str):
    """Split a template into (literal, column) parts; '{{'/'}}' escape braces."""
    parts = []
    buf = []
    i = 0
    n = len(template)
    while i < n:
        ch = template[i]
        if ch == "{":
            if template.startswith("{{", i):
                buf.append("{")
                i += 2
                continue
            end = template.find("}", i)
            if end < 0:
                raise MappingError(f"unterminated placeholder in template {template!r}")
            if buf:
                parts.append(("text", "".join(buf)))
                buf = []
            parts.append(("column", template[i + 1:end]))
            i = end + 1
        elif ch == "}":
            if template.startswith("}}", i):
                buf.append("}")
                i += 2
                continue
            raise MappingError(f"stray '}}' in template {template!r}")
        else:
            buf.append(ch)
            i += 1
    if buf:
        parts.append(("text", "".join(buf)))
    return parts


def template_columns(template: str):
    return [value for kind, value in parse_template(template) if kind == "column"]


def expand_template(template: str, row: dict, iri_safe: bool = True,
                    row_index: int = None) -> str:
    """Fill a template from a row dict.

    IRI targets percent-encode everything outside A-Za-z0-9-._~; literal
    targets substitute raw cell values.
    """
    out = []
    for kind, value in parse_template(template):
        if kind == "text":
            out.append(value)
        else:
            if value not in row:
                where = "" if row_index is None else f" (row {row_index})"
                raise MappingError(
                    f"template references unknown column {value!r}{where}"
                )
            cell = row[value]
            out.append(quote(cell, safe="") if iri_safe else cell)
    return "".join(out)


# --- logical tables -----------------------------------------------------------


@dataclass
class LogicalTable:
    name: str
    header: list[str]
    rows: list[dict[str, str]]


def load_logical_table(path, name) -> LogicalTable:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MappingError(f"{name}: empty table file")
        if len(set(header)) != len(header):
            raise MappingError(f"{name}: duplicate column names in header")
        rows = []
        for i, cells in enumerate(reader, start=1):
            if len(cells) != len(header):
                raise MappingError(
                    f"{name}: row {i} has {len(cells)} cells, header has {len(header)}"
                )
            rows.append(dict(zip(header, cells)))
    return LogicalTable(name, header, rows)


# --- execution ---------------------------------------------------------------


@dataclass
class MappingStats:
    triple_count: int = 0
    elapsed_s: float = 0.0
    per_map: dict = field(default_factory=dict)


def _validate_columns(mapping: MappingDocument, tables: dict[str, LogicalTable]):
    for tm in mapping.triples_maps:
        header = set(tables[tm.table].header)
        for col in template_columns(tm.subject_template):
            if col not in header:
                raise MappingError(
                    f"{tm.name}: subject template references missing column {col!r}"
                )
        for pom in tm.poms:
            spec = pom.object_spec
            if spec.column is not None and spec.column not in header:
                raise MappingError(
                    f"{tm.name}: object column {spec.column!r} missing from "
                    f"{tm.table}"
                )
            if spec.template is not None:
                for col in template_columns(spec.template):
                    if col not in header:
                        raise MappingError(
                            f"{tm.name}: object template references missing "
                            f"column {col!r}"
                        )
            if spec.parent_map is not None:
                if spec.join_child not in header:
                    raise MappingError(
                        f"{tm.name}: join child column {spec.join_child!r} "
                        f"missing from {tm.table}"
                    )
                parent_tm = None
                for other in mapping.triples_maps:
                    if other.name == spec.parent_map:
                        parent_tm = other
                parent_header = set(tables[parent_tm.table].header)
                if spec.join_parent not in parent_header:
                    raise MappingError(
                        f"{tm.name}: join parent column {spec.join_parent!r} "
                        f"missing from {parent_tm.table}"
                    )


def _subject_for_row(tm: TriplesMap, row, row_index):
    """Subject IRI for a row, or None when a template cell is empty (the
    row is skipped)."""
    for col in template_columns(tm.subject_template):
        if row[col] == "":
            return None
    return make_iri(expand_template(tm.subject_template, row, iri_safe=True,
                                    row_index=row_index))


def execute_mapping(mapping: MappingDocument, tables_dir) -> tuple[list[Triple], MappingStats]:
    """Run every triples map over its CSV table.

    Output order is deterministic: triples-map order, then row order, then
    rdf:type triples followed by predicate-object maps in declared order.
    Rows whose referenced cells are empty contribute no triple for that
    map entry; duplicates are emitted as-is (the store deduplicates).
    """
    import os

    start = time.perf_counter()
    tables: dict[str, LogicalTable] = {}
    for tm in mapping.triples_maps:
        if tm.table not in tables:
            path = os.path.join(tables_dir, tm.table)
            if not os.path.exists(path):
                raise MappingError(f"{tm.name}: table file not found: {path}")
            tables[tm.table] = load_logical_table(path, tm.table)
    _validate_columns(mapping, tables)

    # parent-side join indexes: map name -> join column -> value -> subjects
    parent_index: dict[tuple[str, str], dict[str, list[Term]]] = {}
    for tm in mapping.triples_maps:
        for pom in tm.poms:
            spec = pom.object_spec
            if spec.parent_map is None:
                continue
            key = (spec.parent_map, spec.join_parent)
            if key in parent_index:
                continue
            parent_tm = mapping.by_name(spec.parent_map)
            table = tables[parent_tm.table]
            idx: dict[str, list[Term]] = {}
            for i, row in enumerate(table.rows):
                subject = _subject_for_row(parent_tm, row, i)
                if subject is None:
                    continue
                value = row.get(spec.join_parent, "")
                if value == "":
                    continue
                idx.setdefault(value, []).append(subject)
            parent_index[key] = idx

    out: list[Triple] = []
    stats = MappingStats()
    for tm in mapping.triples_maps:
        count_before = len(out)
        table = tables[tm.table]
        for i, row in enumerate(table.rows):
            subject = _subject_for_row(tm, row, i)
            if subject is None:
                continue
            for cls in tm.classes:
                out.append(Triple(subject, RDF_TYPE, cls))
            for pom in tm.poms:
                spec = pom.object_spec
                if spec.column is not None:
                    cell = row[spec.column]
                    if cell == "":
                        continue
                    obj = make_literal(cell, lang=spec.language,
                                       datatype=spec.datatype)
                    out.append(Triple(subject, pom.predicate, obj))
                elif spec.template is not None:
                    if any(row[c] == "" for c in template_columns(spec.template)):
                        continue
                    obj = make_iri(expand_template(spec.template, row,
                                                   iri_safe=True, row_index=i))
                    out.append(Triple(subject, pom.predicate, obj))
                elif spec.constant is not None:
                    out.append(Triple(subject, pom.predicate, spec.constant))
                else:
                    value = row[spec.join_child]
                    if value == "":
                        continue
                    idx = parent_index[(spec.parent_map, spec.join_parent)]
                    for parent_subject in idx.get(value, []):
                        out.append(Triple(subject, pom.predicate, parent_subject))
        stats.per_map[tm.name] = len(out) - count_before
    stats.triple_count = len(out)
    stats.elapsed_s = time.perf_counter() - start
    log.info("mapping produced %d triples in %.3f s", stats.triple_count,
             stats.elapsed_s)
    return out, stats
