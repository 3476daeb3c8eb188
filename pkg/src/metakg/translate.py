"""Source-to-target translation with a persistent cache.

Two backends: an offline dictionary translator (longest-match phrase
replacement over a TSV lexicon, the test and fixture default) and an HTTP
client for an external machine-translation gateway. Every translation goes
through the cache first, so a warm cache lets the pipeline run with the
backend disabled.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import threading
import time
from dataclasses import dataclass

from .errors import TranslationError, ValidationError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TranslationRequest:
    text: str
    source_lang: str = "nl"
    target_lang: str = "en"

    def __post_init__(self):
        if not self.text.strip():
            raise ValidationError("cannot translate empty text")
        if self.source_lang == self.target_lang:
            raise ValidationError("source and target language must differ")


class TranslationCache:
    """JSON-file cache keyed by sha256 of (source ++ target ++ text).

    Access is serialized by a lock; save() writes atomically so a crash
    never corrupts an existing cache file.
    """

    def __init__(self, path=None):
        self.path = path
        self._entries: dict[str, str] = {}
        self._lock = threading.Lock()
        if path and os.path.exists(path):
            with open(path, "r", encoding="utf-8") as fh:
                self._entries = json.load(fh)

    @staticmethod
    def key(req: TranslationRequest) -> str:
        raw = req.source_lang + req.target_lang + req.text
        return hashlib.sha256(raw.encode("utf-8")).hexdigest()

    def get(self, req: TranslationRequest):
        with self._lock:
            return self._entries.get(self.key(req))

    def put(self, req: TranslationRequest, translated: str):
        with self._lock:
            self._entries[self.key(req)] = translated

    def __len__(self):
        return len(self._entries)

    def save(self):
        if not self.path:
            return
        tmp = self.path + ".tmp"
        with self._lock:
            with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
                json.dump(self._entries, fh, ensure_ascii=False, indent=0,
                          sort_keys=True)
                fh.write("\n")
            os.replace(tmp, self.path)


# --- dictionary backend -------------------------------------------------------


def load_lexicon(path) -> dict[str, str]:
    """TSV lexicon, source phrase <TAB> target phrase; '#' lines ignored."""
    lexicon = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValidationError(f"{path} line {lineno}: expected two "
                                      f"tab-separated fields")
            lexicon[parts[0].strip().lower()] = parts[1].strip()
    return lexicon


_TOKEN_RE = re.compile(r"[^\W\d_]+(?:[-'][^\W\d_]+)*", re.UNICODE)


class DictionaryBackend:
    """Pure phrase-replacement translator.

    Longest match wins, scanning left to right; the first letter's case is
    preserved from the source; unknown tokens pass through unchanged.
    """

    def __init__(self, lexicon: dict[str, str]):
        self.lexicon = {k.lower(): v for k, v in lexicon.items()}
        self.max_phrase_tokens = max(
            (len(k.split()) for k in self.lexicon), default=1
        )

    @classmethod
    def from_file(cls, path):
        return cls(load_lexicon(path))

    def translate(self, text: str, source_lang="nl", target_lang="en") -> str:
        tokens = list(_TOKEN_RE.finditer(text))
        out = []
        pos = 0
        i = 0
        while i < len(tokens):
            matched = None
            matched_len = 0
            for n in range(min(self.max_phrase_tokens, len(tokens) - i), 0, -1):
                span_start = tokens[i].start()
                span_end = tokens[i + n - 1].end()
                phrase = text[span_start:span_end]
                if " ".join(phrase.split()).lower() in self.lexicon:
                    matched = self.lexicon[" ".join(phrase.split()).lower()]
                    matched_len = n
                    break
            if matched is None:
                i += 1
                continue
            span_start = tokens[i].start()
            span_end = tokens[i + matched_len - 1].end()
            out.append(text[pos:span_start])
            source_first = text[span_start]
            replacement = matched
            if replacement:
                if source_first.isupper():
                    replacement = replacement[0].upper() + replacement[1:]
                elif source_first.islower():
                    replacement = replacement[0].lower() + replacement[1:]
            out.append(replacement)
            pos = span_end
            i += matched_len
        out.append(text[pos:])
        return "".join(out)


# --- HTTP backend ----------------------------------------------------------------


class HttpBackend:
    """POST {q, source, target} to an MT gateway, read {translatedText}.

    Endpoint and API key come from arguments or the MT_ENDPOINT/MT_API_KEY
    environment variables. Failures are retried with exponential backoff
    (1 s, 2 s, 4 s by default) before giving up.
    """

    def __init__(self, endpoint=None, api_key=None, retries=3, sleeper=None,
                 session=None):
        self.endpoint = endpoint or os.environ.get("MT_ENDPOINT")
        self.api_key = api_key or os.environ.get("MT_API_KEY")
        if not self.endpoint:
            raise ValidationError("no MT endpoint configured (MT_ENDPOINT)")
        self.retries = retries
        self.sleeper = sleeper or time.sleep
        self._session = session

    def _post(self, payload):
        if self._session is None:
            import requests

            self._session = requests.Session()
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        response = self._session.post(self.endpoint, json=payload,
                                      headers=headers, timeout=30)
        response.raise_for_status()
        return response.json()

    def translate(self, text: str, source_lang="nl", target_lang="en") -> str:
        payload = {"q": text, "source": source_lang, "target": target_lang}
        last_error = None
        for attempt in range(self.retries + 1):
            if attempt > 0:
                self.sleeper(2 ** (attempt - 1))
            try:
                body = self._post(payload)
                return body["translatedText"]
            except Exception as exc:
                last_error = exc
                log.warning("MT request failed (attempt %d/%d): %s",
                            attempt + 1, self.retries + 1, exc)
        raise TranslationError(f"backend failed after {self.retries} retries: "
                               f"{last_error}")


# --- translation operations ---------------------------------------------------------


def translate(req: TranslationRequest, backend, cache: TranslationCache = None,
              context: str = "") -> str:
    """Translate one request, cache first.

    With a warm cache the backend may be None. Errors carry the caller's
    context (doc id, paragraph index) for diagnosis.
    """
    cache = cache if cache is not None else TranslationCache()
    hit = cache.get(req)
    if hit is not None:
        return hit
    if backend is None:
        raise TranslationError(
            f"cache miss with no backend configured{_ctx(context)}"
        )
    try:
        translated = backend.translate(req.text, req.source_lang, req.target_lang)
    except TranslationError as exc:
        raise TranslationError(f"{exc}{_ctx(context)}") from exc
    cache.put(req, translated)
    return translated


def _ctx(context):
    return f" [{context}]" if context else ""


def translate_document(doc, backend, cache: TranslationCache = None):
    """Fill the English fields of a DescriptionDocument in place.

    Dutch fields are never touched; already-translated fields are kept, so
    the operation is idempotent and a second run needs no backend calls.
    """
    cache = cache if cache is not None else TranslationCache()

    def run(text, context):
        return translate(TranslationRequest(text), backend, cache, context)

    if doc.title_en is None and doc.title_nl.strip():
        doc.title_en = run(doc.title_nl, f"{doc.doc_id}: title")
    if doc.paragraphs_en is None:
        doc.paragraphs_en = [
            run(p, f"{doc.doc_id}: paragraph {i}") if p.strip() else p
            for i, p in enumerate(doc.paragraphs_nl)
        ]
    for i, row in enumerate(doc.variable_rows):
        if row.label_en is None:
            row.label_en = (run(row.label_nl, f"{doc.doc_id}: variable {row.name}")
                            if row.label_nl.strip() else "")
    return doc
