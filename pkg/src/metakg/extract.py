"""Entity and keyword extraction over translated document text, plus the
relational staging tables that feed the mapping engine.

Recognition is rule- and gazetteer-based: a date grammar with three
branches, word-boundary alias lookup for organizations and persons, and a
name-with-abbreviation pattern that registers abbreviations for the rest
of the document. Keywords are scored tf * ln(N/df) over the corpus.
"""

from __future__ import annotations

import csv
import datetime
import json
import logging
import math
import os
import re
from dataclasses import dataclass, field
from typing import Optional

from .errors import ValidationError

log = logging.getLogger(__name__)

DEFAULT_PUBLISHER = "Statistics Netherlands"


@dataclass(frozen=True)
class ExtractedEntity:
    kind: str  # date | organization | person | keyword
    surface: str
    normalized: str
    span: tuple[int, int]
    doc_id: str = ""

    def __post_init__(self):
        start, end = self.span
        if not (0 <= start < end):
            raise ValidationError(f"bad span: {self.span}")


# --- dates -----------------------------------------------------------------

_MONTHS = ["january", "february", "march", "april", "may", "june", "july",
           "august", "september", "october", "november", "december"]
_MONTH_NO = {name: i + 1 for i, name in enumerate(_MONTHS)}

_DAY_MONTH_YEAR = re.compile(
    r"(?<!\d)(\d{1,2})(?:st|nd|rd|th)?\s+(" + "|".join(_MONTHS) + r")\s+(\d{4})(?!\d)",
    re.IGNORECASE,
)
_NUMERIC_DMY = re.compile(r"(?<![\d-])(\d{2})-(\d{2})-(\d{4})(?![\d-])")
_NUMERIC_YMD = re.compile(r"(?<![\d-])(\d{4})-(\d{2})-(\d{2})(?![\d-])")
_BARE_YEAR = re.compile(r"(?<!\d)(19\d{2}|20\d{2})(?!\d)")


def _valid_date(year, month, day):
    try:
        datetime.date(year, month, day)
        return True
    except ValueError:
        return False


def extract_dates(text: str, doc_id: str = "") -> list[ExtractedEntity]:
    """Dates in order of appearance, normalized to ISO-8601.

    Grammar branches: '31st March 2020' style with English month names,
    numeric DD-MM-YYYY / YYYY-MM-DD, and bare years 1900-2099 that are not
    part of a longer number. Overlaps resolve longest-first.
    """
    candidates = []
    for m in _DAY_MONTH_YEAR.finditer(text):
        day, month, year = int(m.group(1)), _MONTH_NO[m.group(2).lower()], int(m.group(3))
        if _valid_date(year, month, day):
            candidates.append((m.start(), m.end(), f"{year:04d}-{month:02d}-{day:02d}"))
    for m in _NUMERIC_DMY.finditer(text):
        day, month, year = int(m.group(1)), int(m.group(2)), int(m.group(3))
        if _valid_date(year, month, day):
            candidates.append((m.start(), m.end(), f"{year:04d}-{month:02d}-{day:02d}"))
    for m in _NUMERIC_YMD.finditer(text):
        year, month, day = int(m.group(1)), int(m.group(2)), int(m.group(3))
        if _valid_date(year, month, day):
            candidates.append((m.start(), m.end(), f"{year:04d}-{month:02d}-{day:02d}"))
    for m in _BARE_YEAR.finditer(text):
        candidates.append((m.start(), m.end(), m.group(1)))

    chosen = []
    for start, end, normalized in sorted(candidates,
                                         key=lambda c: (-(c[1] - c[0]), c[0])):
        if all(end <= s or start >= e for s, e, _ in chosen):
            chosen.append((start, end, normalized))
    chosen.sort()
    return [ExtractedEntity("date", text[s:e], n, (s, e), doc_id)
            for s, e, n in chosen]


# --- gazetteers ------------------------------------------------------------

_ABBR_RE = re.compile(r"^[A-Z]{2,10}$")


@dataclass
class GazetteerEntry:
    canonical: str
    aliases: list[str] = field(default_factory=list)
    abbreviation: Optional[str] = None


@dataclass
class Gazetteer:
    entries: list[GazetteerEntry]

    def __post_init__(self):
        seen = set()
        for entry in self.entries:
            if entry.canonical in seen:
                raise ValidationError(f"duplicate canonical name: {entry.canonical}")
            seen.add(entry.canonical)
            if entry.abbreviation and not _ABBR_RE.match(entry.abbreviation):
                raise ValidationError(
                    f"abbreviation must be 2-10 uppercase chars: "
                    f"{entry.abbreviation!r}"
                )

    def alias_map(self):
        """Lowercased alias (and canonical) -> canonical."""
        out = {}
        for entry in self.entries:
            out[entry.canonical.lower()] = entry.canonical
            for alias in entry.aliases:
                out[alias.lower()] = entry.canonical
        return out

    def abbreviation_map(self):
        return {e.abbreviation: e.canonical for e in self.entries if e.abbreviation}


def load_gazetteers(path) -> dict[str, Gazetteer]:
    """JSON file with 'organizations' and 'persons' entry lists."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    out = {}
    for kind in ("organizations", "persons"):
        entries = [
            GazetteerEntry(item["canonical"], list(item.get("aliases", [])),
                           item.get("abbreviation"))
            for item in raw.get(kind, [])
        ]
        out[kind] = Gazetteer(entries)
    return out


# --- organizations and persons -----------------------------------------------

_NAME_CONNECTORS = r"of|for|and|the|van|de|der|den|het|voor|en"
_NAME_WITH_ABBR = re.compile(
    r"([A-Z][\w&.-]*(?:\s+(?:[A-Z][\w&.-]*|" + _NAME_CONNECTORS + r"))*)"
    r"\s*\(([A-Z]{2,10})\)"
)


def _alias_matches(text, alias_map):
    candidates = []
    for alias, canonical in alias_map.items():
        pattern = re.compile(r"(?<!\w)" + re.escape(alias) + r"(?!\w)", re.IGNORECASE)
        for m in pattern.finditer(text):
            candidates.append((m.start(), m.end(), canonical))
    return candidates


def extract_organizations(text: str, gazetteer: Gazetteer,
                          doc_id: str = "") -> list[ExtractedEntity]:
    """Organizations by gazetteer lookup plus abbreviation linking.

    'Full Name (ABBR)' links ABBR to the name for the rest of the document,
    so later bare occurrences normalize to the same canonical form. The
    parenthesized defining occurrence itself is not reported.
    """
    alias_map = gazetteer.alias_map()
    candidates = _alias_matches(text, alias_map)

    registered = dict(gazetteer.abbreviation_map())
    definitions = []
    for m in _NAME_WITH_ABBR.finditer(text):
        name, abbr = m.group(1), m.group(2)
        canonical = alias_map.get(name.lower(), name)
        registered[abbr] = canonical
        definitions.append((m.start(1), m.end(1), canonical))
        candidates.append((m.start(1), m.end(1), canonical))

    for abbr, canonical in registered.items():
        pattern = re.compile(r"(?<![\w(])" + re.escape(abbr) + r"(?![\w)])")
        for m in pattern.finditer(text):
            candidates.append((m.start(), m.end(), canonical))

    chosen = []
    for start, end, canonical in sorted(
            candidates, key=lambda c: (-(c[1] - c[0]), c[0], c[2])):
        if all(end <= s or start >= e for s, e, _ in chosen):
            chosen.append((start, end, canonical))
    chosen.sort()
    return [ExtractedEntity("organization", text[s:e], c, (s, e), doc_id)
            for s, e, c in chosen]


def extract_persons(text: str, gazetteer: Gazetteer,
                    doc_id: str = "") -> list[ExtractedEntity]:
    """Persons by gazetteer alias lookup only; no statistical tagging."""
    candidates = _alias_matches(text, gazetteer.alias_map())
    chosen = []
    for start, end, canonical in sorted(
            candidates, key=lambda c: (-(c[1] - c[0]), c[0], c[2])):
        if all(end <= s or start >= e for s, e, _ in chosen):
            chosen.append((start, end, canonical))
    chosen.sort()
    return [ExtractedEntity("person", text[s:e], c, (s, e), doc_id)
            for s, e, c in chosen]


# --- keywords -------------------------------------------------------------------

_WORD_RE = re.compile(r"[A-Za-z]+")


def default_stoplist_path():
    return os.path.join(os.path.dirname(__file__), "data", "stopwords_en.txt")


def load_stoplist(path=None) -> frozenset:
    with open(path or default_stoplist_path(), "r", encoding="utf-8") as fh:
        return frozenset(w.strip().lower() for w in fh if w.strip()
                         and not w.startswith("#"))


def document_text(doc) -> str:
    """Combined English text of a document (title plus paragraphs)."""
    if doc.title_en is None or doc.paragraphs_en is None:
        raise ValidationError(f"{doc.doc_id}: document is not translated yet")
    return "\n\n".join([doc.title_en] + list(doc.paragraphs_en))


def candidate_tokens(text: str, stoplist) -> list[str]:
    return [t.lower() for t in _WORD_RE.findall(text)
            if len(t) >= 3 and t.lower() not in stoplist]


@dataclass
class CorpusStats:
    n_docs: int
    df: dict[str, int]


def build_corpus_stats(doc_texts, stoplist) -> CorpusStats:
    df: dict[str, int] = {}
    for text in doc_texts:
        for token in set(candidate_tokens(text, stoplist)):
            df[token] = df.get(token, 0) + 1
    return CorpusStats(len(doc_texts), df)


def extract_keywords(doc, corpus_stats: CorpusStats, k: int = 8,
                     stoplist=None) -> list[str]:
    """Top-k keywords by tf * ln(N/df), ties broken lexicographically.

    Candidates are the filtered tokens of the document text; title tokens
    are always included in the pool.
    """
    stoplist = stoplist if stoplist is not None else load_stoplist()
    text = document_text(doc)
    tf: dict[str, int] = {}
    for token in candidate_tokens(text, stoplist):
        tf[token] = tf.get(token, 0) + 1
    n = max(corpus_stats.n_docs, 1)
    scored = []
    for token, count in tf.items():
        df = corpus_stats.df.get(token, 1)
        scored.append((count * math.log(n / df), token))
    scored.sort(key=lambda pair: (-pair[0], pair[1]))
    return [token for _, token in scored[:max(k, 0)]]


# --- per-document extraction ----------------------------------------------------


@dataclass
class DocumentEntities:
    doc_id: str
    dates: list[ExtractedEntity]
    organizations: list[ExtractedEntity]
    persons: list[ExtractedEntity]
    keywords: list[str]


def extract_document(doc, gazetteers, corpus_stats, k=8,
                     stoplist=None) -> DocumentEntities:
    text = document_text(doc)
    return DocumentEntities(
        doc_id=doc.doc_id,
        dates=extract_dates(text, doc.doc_id),
        organizations=extract_organizations(text, gazetteers["organizations"],
                                            doc.doc_id),
        persons=extract_persons(text, gazetteers["persons"], doc.doc_id),
        keywords=extract_keywords(doc, corpus_stats, k=k, stoplist=stoplist),
    )


# --- staging tables ----------------------------------------------------------------

DATASET_COLUMNS = ["doc_id", "title_nl", "title_en", "description_en",
                   "category", "issued_date", "publisher", "creator",
                   "landing_page", "all_dates"]
VARIABLE_COLUMNS = ["doc_id", "var_name", "var_label_en"]
KEYWORD_COLUMNS = ["doc_id", "keyword"]
MEMBERSHIP_COLUMNS = ["doc_id", "category"]


@dataclass
class MetadataTables:
    datasets: list[dict]
    variables: list[dict]
    keywords: list[dict]
    memberships: list[dict]


def build_metadata_tables(docs, entities_by_doc: dict[str, DocumentEntities],
                          page_url_base: str = "http://data.example.org/cbs/page/"
                          ) -> MetadataTables:
    """Assemble the staging tables from translated documents and their
    extracted entities.

    One datasets row per document; the issued date is the earliest full
    date found in the text (every extracted date is kept in an auxiliary
    column); publisher falls back to the national statistics office and
    creator stays empty when no person was found. Duplicate variable names
    within one document collapse with a warning.
    """
    datasets = []
    variables = []
    keywords = []
    memberships = []
    for doc in docs:
        entities = entities_by_doc[doc.doc_id]
        full_dates = sorted({e.normalized for e in entities.dates
                             if len(e.normalized) == 10})
        all_dates = sorted({e.normalized for e in entities.dates})
        publisher = (entities.organizations[0].normalized
                     if entities.organizations else DEFAULT_PUBLISHER)
        creator = entities.persons[0].normalized if entities.persons else ""
        landing = doc.source if doc.source.startswith(("http://", "https://")) \
            else page_url_base + doc.doc_id
        datasets.append({
            "doc_id": doc.doc_id,
            "title_nl": doc.title_nl,
            "title_en": doc.title_en or "",
            "description_en": " ".join(doc.paragraphs_en or []),
            "category": doc.category,
            "issued_date": full_dates[0] if full_dates else "",
            "publisher": publisher,
            "creator": creator,
            "landing_page": landing,
            "all_dates": ";".join(all_dates),
        })
        seen_vars = set()
        for row in doc.variable_rows:
            if row.name in seen_vars:
                log.warning("%s: duplicate variable %s collapsed",
                            doc.doc_id, row.name)
                continue
            seen_vars.add(row.name)
            variables.append({
                "doc_id": doc.doc_id,
                "var_name": row.name,
                "var_label_en": row.label_en or "",
            })
        for word in entities.keywords:
            keywords.append({"doc_id": doc.doc_id, "keyword": word.lower()})
        for category in [doc.category] + list(doc.extra_categories):
            memberships.append({"doc_id": doc.doc_id, "category": category})
    return MetadataTables(datasets, variables, keywords, memberships)


def _write_csv(path, columns, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([row[c] for c in columns])


def write_metadata_tables(tables: MetadataTables, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    _write_csv(os.path.join(out_dir, "datasets.csv"), DATASET_COLUMNS,
               tables.datasets)
    _write_csv(os.path.join(out_dir, "variables.csv"), VARIABLE_COLUMNS,
               tables.variables)
    _write_csv(os.path.join(out_dir, "keywords.csv"), KEYWORD_COLUMNS,
               tables.keywords)
    _write_csv(os.path.join(out_dir, "memberships.csv"), MEMBERSHIP_COLUMNS,
               tables.memberships)
