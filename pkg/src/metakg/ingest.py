"""Fetch description documents listed in a manifest and rebuild structured
text (paragraphs, sections, variable tables) from layout-hinted segments.

Sources are segment files in JSON Lines format, one layout segment per
line, mirroring what a PDF text extractor reports: text, page, bounding
box, font name/size and writing direction. Documents whose segment files
violate that schema are reported as failed, never fatal to the batch.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import random
import re
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Callable, Optional

from .errors import ValidationError

log = logging.getLogger(__name__)

CATEGORIES = [
    "Labour and social security",
    "Business",
    "Population",
    "Build and live",
    "Financial and business services",
    "Health and wellbeing",
    "Trade and catering",
    "Income and expenditure",
    "International trade",
    "Industry and energy",
    "Agriculture",
    "Macroeconomy",
    "Nature and environment",
    "Education",
    "Government and politics",
    "Prices",
    "Security and justice",
    "Traffic and transport",
    "Leisure and culture",
]

VARIABLE_SECTION_HEADERS = ("variabelen", "beschrijving van de variabelen")


# --- manifest ---------------------------------------------------------------


@dataclass
class ManifestEntry:
    doc_id: str
    category: str
    source: str
    expected_sha256: Optional[str] = None
    extra_categories: list[str] = field(default_factory=list)

    @property
    def is_remote(self):
        return self.source.startswith(("http://", "https://"))

    def categories(self):
        return [self.category] + list(self.extra_categories)


@dataclass
class Manifest:
    entries: list[ManifestEntry]

    def __len__(self):
        return len(self.entries)


def load_manifest(path) -> Manifest:
    """Parse and validate a manifest JSON file.

    All violations are collected and reported together: unknown categories,
    duplicate doc ids, malformed entries.
    """
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    entries_raw = raw.get("entries") if isinstance(raw, dict) else None
    if not isinstance(entries_raw, list):
        raise ValidationError(f"{path}: manifest needs an 'entries' list")
    problems = []
    entries = []
    seen_ids = set()
    for i, item in enumerate(entries_raw):
        where = f"entry {i}"
        if not isinstance(item, dict):
            problems.append(f"{where}: not an object")
            continue
        doc_id = item.get("doc_id")
        category = item.get("category")
        source = item.get("source")
        sha = item.get("expected_sha256")
        extras = item.get("extra_categories", [])
        if not isinstance(doc_id, str) or not doc_id:
            problems.append(f"{where}: missing doc_id")
            continue
        where = f"entry {i} ({doc_id})"
        if doc_id in seen_ids:
            problems.append(f"{where}: duplicate doc_id")
        seen_ids.add(doc_id)
        if category not in CATEGORIES:
            problems.append(f"{where}: unknown category {category!r}")
        if not isinstance(source, str) or not source:
            problems.append(f"{where}: missing source")
        if sha is not None and (not isinstance(sha, str)
                                or len(sha) != 64
                                or any(c not in "0123456789abcdef" for c in sha.lower())):
            problems.append(f"{where}: expected_sha256 is not 64 hex chars")
        if not isinstance(extras, list) or any(c not in CATEGORIES for c in extras):
            problems.append(f"{where}: extra_categories outside the category list")
        if (isinstance(source, str) and source
                and not source.startswith(("http://", "https://"))
                and not os.path.isabs(source)):
            source = os.path.join(os.path.dirname(os.path.abspath(path)), source)
        entries.append(ManifestEntry(doc_id, category, source,
                                     sha.lower() if isinstance(sha, str) else None,
                                     list(extras) if isinstance(extras, list) else []))
    if problems:
        raise ValidationError(f"{path}: invalid manifest:\n  " + "\n  ".join(problems))
    return Manifest(entries)


# --- fetching ----------------------------------------------------------------


@dataclass
class FetchResult:
    doc_id: str
    status: str  # ok | checksum-mismatch | fetch-failed
    sha256: Optional[str] = None
    detail: str = ""


@dataclass
class FetchReport:
    results: list[FetchResult]
    elapsed_s: float = 0.0

    def ok(self):
        return [r for r in self.results if r.status == "ok"]

    def failed(self):
        return [r for r in self.results if r.status != "ok"]


def _default_http_get(url: str) -> bytes:
    import requests

    response = requests.get(url, timeout=30)
    response.raise_for_status()
    return response.content


def fetch_documents(manifest: Manifest, delay_min_s: float, delay_max_s: float,
                    dest_dir, http_get: Callable[[str], bytes] = None,
                    sleeper: Callable[[float], None] = None,
                    rng: random.Random = None) -> FetchReport:
    """Fetch every manifest source into dest_dir as <doc_id>.segments.jsonl.

    Remote sources are spaced by a uniformly random delay in
    [delay_min_s, delay_max_s]; local sources are copied with no network
    activity and no sleeping. Checksums are verified against
    expected_sha256 when present. A single failure never aborts the batch.
    """
    if not (0 <= delay_min_s <= delay_max_s):
        raise ValidationError(
            f"bad delay range: [{delay_min_s}, {delay_max_s}]"
        )
    os.makedirs(dest_dir, exist_ok=True)
    if not os.access(dest_dir, os.W_OK):
        raise ValidationError(f"destination not writable: {dest_dir}")
    http_get = http_get or _default_http_get
    sleeper = sleeper or time.sleep
    rng = rng or random.Random()

    start = time.perf_counter()
    results = []
    any_remote_done = False
    for entry in manifest.entries:
        try:
            if entry.is_remote:
                if any_remote_done and delay_max_s > 0:
                    sleeper(rng.uniform(delay_min_s, delay_max_s))
                data = http_get(entry.source)
                any_remote_done = True
            else:
                with open(entry.source, "rb") as fh:
                    data = fh.read()
        except Exception as exc:
            log.warning("fetch failed for %s: %s", entry.doc_id, exc)
            results.append(FetchResult(entry.doc_id, "fetch-failed", detail=str(exc)))
            continue
        digest = hashlib.sha256(data).hexdigest()
        dest = os.path.join(dest_dir, f"{entry.doc_id}.segments.jsonl")
        with open(dest, "wb") as fh:
            fh.write(data)
        if entry.expected_sha256 and digest != entry.expected_sha256:
            results.append(FetchResult(
                entry.doc_id, "checksum-mismatch", sha256=digest,
                detail=f"expected {entry.expected_sha256}",
            ))
        else:
            results.append(FetchResult(entry.doc_id, "ok", sha256=digest))
    return FetchReport(results, elapsed_s=time.perf_counter() - start)


# --- layout segments -----------------------------------------------------------


@dataclass
class LayoutSegment:
    text: str
    page: int
    bbox: tuple[float, float, float, float]
    font_name: str
    font_size: float
    direction: str = "horizontal"

    def __post_init__(self):
        x0, y0, x1, y1 = self.bbox
        if x0 > x1 or y0 > y1:
            raise ValidationError(f"bad bbox: {self.bbox}")
        if self.font_size <= 0:
            raise ValidationError(f"font_size must be positive: {self.font_size}")
        if self.page <= 0:
            raise ValidationError(f"page must be positive: {self.page}")
        if self.direction not in ("horizontal", "vertical"):
            raise ValidationError(f"bad direction: {self.direction}")

    @property
    def height(self):
        return self.bbox[3] - self.bbox[1]


def parse_segments_jsonl(text: str) -> list[LayoutSegment]:
    segments = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
            segments.append(LayoutSegment(
                text=raw["text"],
                page=raw["page"],
                bbox=tuple(float(v) for v in raw["bbox"]),
                font_name=raw["font_name"],
                font_size=float(raw["font_size"]),
                direction=raw.get("direction", "horizontal"),
            ))
        except (KeyError, TypeError, ValueError, ValidationError) as exc:
            raise ValidationError(f"segment line {lineno}: {exc}") from exc
    return segments


# --- text reconstruction ---------------------------------------------------------


@dataclass
class Line:
    segments: list[LayoutSegment]

    @property
    def page(self):
        return self.segments[0].page

    @property
    def y_top(self):
        return max(s.bbox[3] for s in self.segments)

    @property
    def y_bottom(self):
        return min(s.bbox[1] for s in self.segments)

    @property
    def height(self):
        return self.y_top - self.y_bottom

    @property
    def font_size(self):
        return max(s.font_size for s in self.segments)

    @property
    def text(self):
        ordered = sorted(self.segments, key=lambda s: s.bbox[0])
        return " ".join(s.text for s in ordered)

    def overlaps(self, segment: LayoutSegment) -> bool:
        overlap = min(self.y_top, segment.bbox[3]) - max(self.y_bottom, segment.bbox[1])
        smaller = min(self.height, segment.height)
        if smaller <= 0:
            return overlap >= 0
        return overlap >= 0.5 * smaller


@dataclass
class Paragraph:
    lines: list[Line]

    @property
    def page(self):
        return self.lines[0].page

    @property
    def font_size(self):
        return max(line.font_size for line in self.lines)

    @property
    def text(self):
        out = ""
        for line in self.lines:
            chunk = line.text
            if not out:
                out = chunk
            elif (out.endswith("-") and len(out) >= 2 and out[-2].isalpha()
                  and chunk[:1].isalpha()):
                out = out[:-1] + chunk
            else:
                out = out + " " + chunk
        return out


def _median(values):
    ordered = sorted(values)
    n = len(ordered)
    if n == 0:
        return 0.0
    mid = n // 2
    return ordered[mid] if n % 2 else (ordered[mid - 1] + ordered[mid]) / 2.0


def reconstruct_text(segments) -> list[Paragraph]:
    """Merge layout segments into lines, lines into paragraphs.

    Segments sharing at least half of the smaller bbox height sit on one
    line; consecutive lines stay in one paragraph while the vertical gap is
    below 0.8x the page's median line height. Vertical-direction segments
    are dropped; hyphenated line breaks are rejoined by the paragraph text.
    Deterministic and total: any segment list produces output.
    """
    usable = [s for s in segments if s.direction == "horizontal" and s.text.strip()]
    usable.sort(key=lambda s: (s.page, -s.bbox[1], s.bbox[0]))
    lines: list[Line] = []
    for segment in usable:
        if lines and lines[-1].page == segment.page and lines[-1].overlaps(segment):
            lines[-1].segments.append(segment)
        else:
            lines.append(Line([segment]))

    paragraphs: list[Paragraph] = []
    by_page: dict[int, list[Line]] = {}
    for line in lines:
        by_page.setdefault(line.page, []).append(line)
    for page in sorted(by_page):
        page_lines = by_page[page]
        median_height = _median([ln.height for ln in page_lines])
        current = [page_lines[0]]
        for prev, nxt in zip(page_lines, page_lines[1:]):
            gap = prev.y_bottom - nxt.y_top
            if gap < 0.8 * median_height:
                current.append(nxt)
            else:
                paragraphs.append(Paragraph(current))
                current = [nxt]
        paragraphs.append(Paragraph(current))
    return paragraphs


# --- section segmentation ----------------------------------------------------------


@dataclass
class VariableRow:
    name: str
    label_nl: str
    label_en: Optional[str] = None


@dataclass
class DescriptionDocument:
    doc_id: str
    category: str
    title_nl: str
    paragraphs_nl: list[str]
    variable_rows: list[VariableRow]
    fetched_at: str
    sha256: str
    extra_categories: list[str] = field(default_factory=list)
    source: str = ""
    title_en: Optional[str] = None
    paragraphs_en: Optional[list[str]] = None
    warnings: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "category": self.category,
            "extra_categories": list(self.extra_categories),
            "source": self.source,
            "sha256": self.sha256,
            "fetched_at": self.fetched_at,
            "title_nl": self.title_nl,
            "title_en": self.title_en,
            "paragraphs_nl": list(self.paragraphs_nl),
            "paragraphs_en": self.paragraphs_en,
            "variable_rows": [
                {"name": r.name, "label_nl": r.label_nl, "label_en": r.label_en}
                for r in self.variable_rows
            ],
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_json(cls, raw: dict) -> "DescriptionDocument":
        return cls(
            doc_id=raw["doc_id"],
            category=raw["category"],
            extra_categories=list(raw.get("extra_categories", [])),
            source=raw.get("source", ""),
            sha256=raw["sha256"],
            fetched_at=raw["fetched_at"],
            title_nl=raw["title_nl"],
            title_en=raw.get("title_en"),
            paragraphs_nl=list(raw["paragraphs_nl"]),
            paragraphs_en=(list(raw["paragraphs_en"])
                           if raw.get("paragraphs_en") is not None else None),
            variable_rows=[VariableRow(r["name"], r["label_nl"], r.get("label_en"))
                           for r in raw["variable_rows"]],
            warnings=list(raw.get("warnings", [])),
        )

    def save(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(self.to_json(), fh, ensure_ascii=False, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "DescriptionDocument":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


_VAR_NAME_RE = re.compile(r"^[A-Z][A-Z0-9_]{2,}$")


def _matches_header(text: str, headers) -> bool:
    lowered = text.strip().lower()
    for header in sorted(headers, key=len, reverse=True):
        if lowered == header:
            return True
        if lowered.startswith(header):
            rest = lowered[len(header):]
            if rest and not rest[0].isalnum():
                return True
    return False


def segment_sections(doc_id: str, category: str, paragraphs: list[Paragraph],
                     fetched_at: str = "", sha256: str = "",
                     extra_categories=None, source: str = "",
                     headers=VARIABLE_SECTION_HEADERS) -> DescriptionDocument:
    """Split reconstructed paragraphs into title, description and variable
    table.

    The title is the first non-empty line with the largest font on page 1
    (falling back to the doc id with a warning). The variable table starts
    at the first paragraph matching the section-header lexicon; inside it,
    every line whose first token looks like an all-caps variable code
    becomes a variable row.
    """
    warnings = []
    page1_lines = [line for p in paragraphs for line in p.lines if p.page == 1]
    title = None
    title_paragraph = None
    if page1_lines:
        largest = max(line.font_size for line in page1_lines)
        for p in paragraphs:
            if p.page != 1:
                continue
            for line in p.lines:
                if line.font_size == largest and line.text.strip():
                    title = line.text.strip()
                    title_paragraph = p
                    break
            if title:
                break
    if title is None:
        title = doc_id
        warnings.append("no recognizable title; falling back to doc_id")

    section_start = None
    for i, p in enumerate(paragraphs):
        if _matches_header(p.text, headers):
            section_start = i
            break

    description = []
    for i, p in enumerate(paragraphs):
        if section_start is not None and i >= section_start:
            break
        if p is title_paragraph:
            continue
        description.append(p.text)

    variable_rows = []
    if section_start is not None:
        for p in paragraphs[section_start:]:
            for line in p.lines:
                tokens = line.text.split(None, 1)
                if tokens and _VAR_NAME_RE.match(tokens[0]):
                    label = tokens[1].strip() if len(tokens) > 1 else ""
                    variable_rows.append(VariableRow(tokens[0], label))

    return DescriptionDocument(
        doc_id=doc_id,
        category=category,
        title_nl=title,
        paragraphs_nl=description,
        variable_rows=variable_rows,
        fetched_at=fetched_at,
        sha256=sha256,
        extra_categories=list(extra_categories or []),
        source=source,
        warnings=warnings,
    )


# --- batch processing -----------------------------------------------------------


@dataclass
class IngestOutcome:
    documents: list[DescriptionDocument]
    failures: list[FetchResult]


def build_documents(manifest: Manifest, fetch_report: FetchReport, fetch_dir,
                    out_dir, headers=VARIABLE_SECTION_HEADERS) -> IngestOutcome:
    """Turn fetched segment files into DescriptionDocument JSON files.

    Schema-invalid segment files mark the document as failed and the batch
    continues. Re-running over unchanged inputs keeps the previous
    fetched_at so outputs stay byte-identical.
    """
    os.makedirs(out_dir, exist_ok=True)
    by_id = {e.doc_id: e for e in manifest.entries}
    documents = []
    failures = list(fetch_report.failed())
    for result in fetch_report.ok():
        entry = by_id[result.doc_id]
        seg_path = os.path.join(fetch_dir, f"{entry.doc_id}.segments.jsonl")
        out_path = os.path.join(out_dir, f"{entry.doc_id}.doc.json")
        try:
            with open(seg_path, "r", encoding="utf-8") as fh:
                segments = parse_segments_jsonl(fh.read())
        except (OSError, ValidationError) as exc:
            log.warning("segment extraction failed for %s: %s", entry.doc_id, exc)
            failures.append(FetchResult(entry.doc_id, "extract-failed",
                                        detail=str(exc)))
            continue
        fetched_at = datetime.now(timezone.utc).isoformat(timespec="seconds")
        if os.path.exists(out_path):
            try:
                previous = DescriptionDocument.load(out_path)
                if previous.sha256 == result.sha256:
                    fetched_at = previous.fetched_at
            except (ValidationError, KeyError, json.JSONDecodeError):
                pass
        paragraphs = reconstruct_text(segments)
        doc = segment_sections(
            entry.doc_id, entry.category, paragraphs,
            fetched_at=fetched_at, sha256=result.sha256 or "",
            extra_categories=entry.extra_categories, source=entry.source,
            headers=headers,
        )
        doc.save(out_path)
        documents.append(doc)
    return IngestOutcome(documents, failures)
