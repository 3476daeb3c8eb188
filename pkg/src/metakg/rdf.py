"""RDF terms, triples and the N-Triples serialization.

Terms and triples are immutable values; everything downstream (mapping,
store, mining) shares them freely.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Optional

from .errors import ParseError, ValidationError

IRI = "iri"
LITERAL = "literal"
BLANK = "blank"

_SCHEME_RE = re.compile(r"^[A-Za-z][A-Za-z0-9+.-]*:")
_LANG_RE = re.compile(r"^[a-z]{2,8}(-[a-z0-9]{1,8})*$")


@dataclass(frozen=True)
class Term:
    kind: str
    value: str
    lang: Optional[str] = None
    datatype: Optional[str] = None

    def __post_init__(self):
        if self.kind not in (IRI, LITERAL, BLANK):
            raise ValidationError(f"unknown term kind: {self.kind!r}")
        if self.kind != LITERAL and (self.lang or self.datatype):
            raise ValidationError(f"{self.kind} terms carry no lang/datatype")
        if self.lang and self.datatype:
            raise ValidationError(
                f"literal {self.value!r} has both a language tag and a datatype"
            )

    def is_iri(self):
        return self.kind == IRI

    def is_literal(self):
        return self.kind == LITERAL

    def is_blank(self):
        return self.kind == BLANK

    def __repr__(self):
        return f"Term({ntriples_term(self)})"


@dataclass(frozen=True)
class Triple:
    subject: Term
    predicate: Term
    object: Term

    def __post_init__(self):
        if self.subject.is_literal():
            raise ValidationError("triple subject must not be a literal")
        if not self.predicate.is_iri():
            raise ValidationError("triple predicate must be an IRI")


def make_iri(text: str) -> Term:
    """Validate and build an IRI term; the IRI must be absolute."""
    trimmed = text.strip()
    if not trimmed:
        raise ValidationError(f"empty IRI: {text!r}")
    if not _SCHEME_RE.match(trimmed):
        raise ValidationError(f"not an absolute IRI (no scheme): {trimmed!r}")
    return Term(IRI, trimmed)


def make_literal(lexical: str, lang: str = None, datatype: str = None) -> Term:
    """Build a literal term: plain, language-tagged or datatyped.

    Language tags are lowercased before validation; lang and datatype are
    mutually exclusive.
    """
    if lang is not None and datatype is not None:
        raise ValidationError(
            f"literal {lexical!r}: language tag and datatype are mutually exclusive"
        )
    if lang is not None:
        lang = lang.lower()
        if not _LANG_RE.match(lang):
            raise ValidationError(f"malformed language tag: {lang!r}")
    if datatype is not None:
        datatype = make_iri(datatype).value
    return Term(LITERAL, lexical, lang=lang, datatype=datatype)


def make_blank(label: str) -> Term:
    if not label or not re.match(r"^[A-Za-z0-9_]+$", label):
        raise ValidationError(f"bad blank node label: {label!r}")
    return Term(BLANK, label)


# --- N-Triples ---------------------------------------------------------

_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t"}
_UNESCAPES = {"\\": "\\", '"': '"', "n": "\n", "r": "\r", "t": "\t"}


def _escape(text):
    out = []
    for ch in text:
        out.append(_ESCAPES.get(ch, ch))
    return "".join(out)


def ntriples_term(term: Term) -> str:
    if term.kind == IRI:
        return f"<{term.value}>"
    if term.kind == BLANK:
        return f"_:{term.value}"
    body = f'"{_escape(term.value)}"'
    if term.lang:
        return f"{body}@{term.lang}"
    if term.datatype:
        return f"{body}^^<{term.datatype}>"
    return body


def serialize_ntriples(triples: Iterable[Triple]) -> str:
    """One statement per line, in input order, LF-terminated."""
    lines = []
    for t in triples:
        lines.append(
            f"{ntriples_term(t.subject)} {ntriples_term(t.predicate)} "
            f"{ntriples_term(t.object)} .\n"
        )
    return "".join(lines)


def write_ntriples(triples: Iterable[Triple], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_ntriples(triples))


class _LineScanner:
    """Cursor over one statement line; reports 1-based columns on errors."""

    def __init__(self, text, lineno):
        self.text = text
        self.pos = 0
        self.lineno = lineno

    def error(self, message):
        raise ParseError(message, self.lineno, self.pos + 1)

    def eof(self):
        return self.pos >= len(self.text)

    def peek(self):
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def skip_ws(self):
        while not self.eof() and self.text[self.pos] in " \t":
            self.pos += 1

    def expect(self, ch):
        if self.peek() != ch:
            self.error(f"expected {ch!r}")
        self.pos += 1

    def read_until(self, stop, what):
        start = self.pos
        idx = self.text.find(stop, start)
        if idx < 0:
            self.error(f"unterminated {what}")
        self.pos = idx + 1
        return self.text[start:idx]

    def read_iri(self):
        self.expect("<")
        raw = self.read_until(">", "IRI")
        try:
            return make_iri(raw)
        except ValidationError as exc:
            self.error(str(exc))

    def read_blank(self):
        self.expect("_")
        self.expect(":")
        start = self.pos
        while not self.eof() and (self.peek().isalnum() or self.peek() == "_"):
            self.pos += 1
        if self.pos == start:
            self.error("empty blank node label")
        return make_blank(self.text[start:self.pos])

    def read_string(self):
        self.expect('"')
        out = []
        while True:
            if self.eof():
                self.error("unterminated string literal")
            ch = self.text[self.pos]
            self.pos += 1
            if ch == '"':
                return "".join(out)
            if ch == "\\":
                if self.eof():
                    self.error("dangling escape")
                esc = self.text[self.pos]
                self.pos += 1
                if esc in _UNESCAPES:
                    out.append(_UNESCAPES[esc])
                elif esc == "u":
                    out.append(self._read_hex(4))
                elif esc == "U":
                    out.append(self._read_hex(8))
                else:
                    self.error(f"unknown escape \\{esc}")
            else:
                out.append(ch)

    def _read_hex(self, width):
        digits = self.text[self.pos:self.pos + width]
        if len(digits) < width or not re.match(r"^[0-9A-Fa-f]+$", digits):
            self.error(f"bad \\u escape")
        self.pos += width
        return chr(int(digits, 16))

    def read_literal(self):
        lexical = self.read_string()
        if self.peek() == "@":
            self.pos += 1
            start = self.pos
            while not self.eof() and (self.peek().isalnum() or self.peek() == "-"):
                self.pos += 1
            tag = self.text[start:self.pos]
            try:
                return make_literal(lexical, lang=tag)
            except ValidationError as exc:
                self.error(str(exc))
        if self.text[self.pos:self.pos + 2] == "^^":
            self.pos += 2
            dt = self.read_iri()
            return make_literal(lexical, datatype=dt.value)
        return make_literal(lexical)

    def read_subject(self):
        ch = self.peek()
        if ch == "<":
            return self.read_iri()
        if ch == "_":
            return self.read_blank()
        self.error("expected IRI or blank node as subject")

    def read_object(self):
        ch = self.peek()
        if ch == "<":
            return self.read_iri()
        if ch == "_":
            return self.read_blank()
        if ch == '"':
            return self.read_literal()
        self.error("expected IRI, blank node or literal as object")


def parse_ntriples(text: str) -> list[Triple]:
    """Parse N-Triples text; comment and blank lines are skipped.

    Inverse of serialize_ntriples on its output. Raises ParseError with the
    line and column of the first offending token.
    """
    triples = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        scan = _LineScanner(line, lineno)
        scan.skip_ws()
        subject = scan.read_subject()
        scan.skip_ws()
        if scan.peek() != "<":
            scan.error("expected IRI as predicate")
        predicate = scan.read_iri()
        scan.skip_ws()
        if scan.eof() or scan.peek() == ".":
            scan.error("missing object")
        obj = scan.read_object()
        scan.skip_ws()
        scan.expect(".")
        scan.skip_ws()
        if not scan.eof():
            scan.error("trailing content after statement")
        triples.append(Triple(subject, predicate, obj))
    return triples


def read_ntriples(path) -> list[Triple]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_ntriples(fh.read())
