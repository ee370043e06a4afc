"""Repository harvesting through a BASE-style search API.

Queries are built in the exact parameter layout the search service expects,
result documents are paged by offset, and Dublin Core fields are parsed into
RepoRecord values. The same code path serves a live endpoint or a fixture
directory laid out as ``<root>/<target>/<offset>.xml``.
"""

from __future__ import annotations

import io
import logging
import os
import re
import time
import xml.etree.ElementTree as ET
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Callable, Iterable, Protocol
from xml.sax.saxutils import escape, quoteattr

from .diagnostics import Diagnostics, Event
from .errors import HarvestError, HarvestParseError
from .textnorm import find_doi, tokenize

logger = logging.getLogger(__name__)

STAGE = "harvest"
DC_NS = "http://purl.org/dc/elements/1.1/"
DEFAULT_BASE_URL = "https://api.base-search.net/cgi-bin/BaseHttpSearchInterface.fcgi"
DEFAULT_FIELDS = (
    "dc:title",
    "dc:creator",
    "dc:contributor",
    "dc:date",
    "dc:identifier",
    "dc:relation",
    "dc:rights",
    "dc:type",
)
DEFAULT_PAGE_SIZE = 1000
ENDPOINT_ENV = "OA_AUDIT_ENDPOINT"

_LIST_FIELDS = ("creators", "contributors", "identifiers", "relations", "rights_raw")
_DC_TO_ATTR = {
    "title": "title",
    "creator": "creators",
    "contributor": "contributors",
    "date": "dates",
    "identifier": "identifiers",
    "relation": "relations",
    "rights": "rights_raw",
    "type": "doc_types",
}
_YEAR_RE = re.compile(r"(?<!\d)(\d{4})(?!\d)")
_ARTICLE_TOKENS = {"article", "articles", "articulo", "articulos", "artigo", "journalarticle", "121"}


@dataclass(frozen=True)
class HarvestRequest:
    target: str
    year_from: int
    year_to: int
    doc_type_code: str = "121"
    fields: tuple[str, ...] = DEFAULT_FIELDS
    page_size: int | None = None

    def __post_init__(self):
        if not self.target:
            raise ValueError("harvest target is required")
        if self.year_from > self.year_to:
            raise ValueError(f"empty year range {self.year_from}-{self.year_to}")
        if self.page_size is not None and self.page_size < 1:
            raise ValueError("page_size must be positive")
        object.__setattr__(self, "fields", tuple(self.fields))


@dataclass(frozen=True)
class RepoRecord:
    source_target: str
    title: str
    record_id: str = ""
    creators: tuple[str, ...] = ()
    contributors: tuple[str, ...] = ()
    year: int | None = None
    identifiers: tuple[str, ...] = ()
    relations: tuple[str, ...] = ()
    rights_raw: tuple[str, ...] = ()
    doc_type_raw: str = ""
    date_raw: tuple[str, ...] = ()

    @property
    def dois(self) -> tuple[str, ...]:
        """Canonical DOIs found in identifiers or alternate-identifier relations."""
        found: list[str] = []
        candidates = list(self.identifiers) + [
            r for r in self.relations if "altidentifier/doi" in r.lower()
        ]
        for value in candidates:
            doi = find_doi(value)
            if doi and doi not in found:
                found.append(doi)
        return tuple(found)

    def populated_fields(self) -> int:
        n = sum(1 for f in ("title", "doc_type_raw") if getattr(self, f))
        n += sum(len(getattr(self, f)) for f in _LIST_FIELDS)
        return n + (self.year is not None)

    def to_dict(self) -> dict:
        # flat fields only, so a shallow copy is enough
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, data: dict) -> "RepoRecord":
        data = dict(data)
        for key in _LIST_FIELDS + ("date_raw",):
            data[key] = tuple(data.get(key) or ())
        return cls(**data)


@dataclass
class HarvestPage:
    records: list[RepoRecord]
    offset: int
    total_reported: int


def build_query(req: HarvestRequest) -> str:
    """Parameter string for one search, without paging offset.

    >>> build_query(HarvestRequest("ftunivalicante", 2013, 2013, fields=("dc:title",)))
    'func=PerformSearch&target=ftunivalicante&query=dcyear:[2013+TO+2013]&doctype:121&fields=dc:title'
    """
    parts = [
        "func=PerformSearch",
        f"target={req.target}",
        f"query=dcyear:[{req.year_from}+TO+{req.year_to}]&doctype:{req.doc_type_code}",
    ]
    if req.page_size is not None:
        parts.append(f"hits={req.page_size}")
    parts.append("fields=" + ",".join(req.fields))
    return "&".join(parts)


def build_url(req: HarvestRequest, base_url: str = DEFAULT_BASE_URL, offset: int | None = None) -> str:
    url = f"{base_url}?{build_query(req)}"
    if offset:
        url += f"&offset={offset}"
    return url


# --- parsing -------------------------------------------------------------------

def _local(tag: str) -> tuple[str, str]:
    if tag.startswith("{"):
        ns, _, name = tag[1:].partition("}")
        return ns, name
    return "", tag


def _load_tree(document: bytes) -> ET.Element:
    path: list[str] = []
    counters: list[dict[str, int]] = [{}]
    root = None
    try:
        for event, elem in ET.iterparse(io.BytesIO(document), events=("start", "end")):
            if event == "start":
                name = _local(elem.tag)[1]
                n = counters[-1].get(name, 0) + 1
                counters[-1][name] = n
                path.append(f"{name}[{n}]")
                counters.append({})
                if root is None:
                    root = elem
            else:
                path.pop()
                counters.pop()
    except ET.ParseError as exc:
        line, col = exc.position
        where = "/" + "/".join(path) if path else "/"
        raise HarvestParseError(f"malformed markup at {where} (line {line}, column {col})") from exc
    if root is None:
        raise HarvestParseError("empty result document")
    return root


def _year_from_dates(dates: Iterable[str]) -> int | None:
    for value in dates:
        for m in _YEAR_RE.finditer(value):
            year = int(m.group(1))
            if 1500 <= year <= 2100:
                return year
    return None


def _record_values(elem: ET.Element) -> dict[str, list[str]]:
    values: dict[str, list[str]] = {}
    for child in elem:
        ns, name = _local(child.tag)
        if ns == DC_NS or (ns == "" and name in _DC_TO_ATTR):
            key = name
            texts = ["".join(child.itertext())]
        elif child.get("name", "").startswith("dc"):
            # Solr-style <str name="dctitle">, <arr name="dcidentifier"><str/>...</arr>
            key = child.get("name")[2:]
            key = {"year": "date", "typenorm": "type"}.get(key, key)
            texts = ["".join(c.itertext()) for c in child] if len(child) else ["".join(child.itertext())]
        else:
            continue
        if key not in _DC_TO_ATTR:
            continue
        for text in texts:
            text = text.strip()
            if text:
                values.setdefault(key, []).append(text)
    return values


def _int_attr(elem: ET.Element, *names: str) -> int | None:
    for name in names:
        value = elem.get(name)
        if value is not None and value.strip().isdigit():
            return int(value)
    return None


def parse_page(
    document: bytes,
    target: str = "",
    offset: int = 0,
    diagnostics: Diagnostics | None = None,
) -> HarvestPage:
    """Parse one result document; titleless records are quarantined."""
    if diagnostics is None:
        diagnostics = Diagnostics()
    root = _load_tree(document)
    container = root
    for elem in root.iter():
        if _local(elem.tag)[1] == "result" and elem.get("numFound") is not None:
            container = elem
            break
    total = _int_attr(container, "total", "numFound")
    page_offset = _int_attr(container, "offset", "start")
    target = target or root.get("target", "")
    if page_offset is None:
        page_offset = offset

    records = []
    elems = [e for e in container.iter() if _local(e.tag)[1] in ("record", "doc")]
    for i, elem in enumerate(elems):
        values = _record_values(elem)
        title = " ".join(values.get("title", [])).strip()
        ids = tuple(values.get("identifier", ()))
        record_id = elem.get("id") or (ids[0] if ids else f"{target}#{page_offset + i}")
        if not title:
            diagnostics.note(STAGE, "titleless", record_id)
            continue
        dates = tuple(values.get("date", ()))
        records.append(
            RepoRecord(
                source_target=target,
                title=title,
                record_id=record_id,
                creators=tuple(values.get("creator", ())),
                contributors=tuple(values.get("contributor", ())),
                year=_year_from_dates(dates),
                identifiers=ids,
                relations=tuple(values.get("relation", ())),
                rights_raw=tuple(values.get("rights", ())),
                doc_type_raw="; ".join(values.get("type", ())),
                date_raw=dates,
            )
        )
    if total is None:
        total = page_offset + len(elems)
    return HarvestPage(records, page_offset, total)


def parse_dc(document: bytes, target: str = "", diagnostics: Diagnostics | None = None) -> list[RepoRecord]:
    """One RepoRecord per record element; repeated DC elements accumulate."""
    return parse_page(document, target, diagnostics=diagnostics).records


def serialize_dc(records: Iterable[RepoRecord], target: str = "", total: int | None = None, offset: int = 0) -> bytes:
    """Write records as a result document that ``parse_page`` reads back."""
    records = list(records)
    total = len(records) + offset if total is None else total
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<results xmlns:dc="{DC_NS}" target={quoteattr(target)} total="{total}" offset="{offset}">',
    ]
    for r in records:
        out.append(f"  <record id={quoteattr(r.record_id)}>" if r.record_id else "  <record>")
        fields = [("title", [r.title])]
        fields += [("creator", r.creators), ("contributor", r.contributors)]
        dates = r.date_raw or ((str(r.year),) if r.year is not None else ())
        fields += [("date", dates), ("identifier", r.identifiers), ("relation", r.relations)]
        fields += [("rights", r.rights_raw), ("type", [r.doc_type_raw] if r.doc_type_raw else [])]
        for name, values in fields:
            for v in values:
                out.append(f"    <dc:{name}>{escape(v)}</dc:{name}>")
        out.append("  </record>")
    out.append("</results>")
    return ("\n".join(out) + "\n").encode("utf-8")


def is_article(record: RepoRecord) -> bool:
    return any(tok in _ARTICLE_TOKENS for tok in tokenize(record.doc_type_raw))


def filter_articles(
    records: Iterable[RepoRecord],
    window: tuple[int, int],
    diagnostics: Diagnostics | None = None,
) -> list[RepoRecord]:
    """Keep journal articles published inside ``window``.

    Articles without a usable publication year are quarantined, since a
    deposit date standing in for it would skew the window.
    """
    if diagnostics is None:
        diagnostics = Diagnostics()
    kept = []
    for r in records:
        if not is_article(r):
            continue
        if r.year is None:
            diagnostics.note(STAGE, "missing_year", r.record_id)
            continue
        if window[0] <= r.year <= window[1]:
            kept.append(r)
    return kept


# --- fetching -------------------------------------------------------------------

class TransientFetchError(Exception):
    """A failure worth retrying (5xx, timeout, dropped connection)."""


class PageSource(Protocol):
    target: str

    def fetch(self, offset: int) -> bytes: ...


class HttpSource:
    def __init__(self, base_url: str, req: HarvestRequest, session=None, timeout: float = 60.0):
        import requests

        self.base_url = base_url
        self.req = req
        self.target = req.target
        self.timeout = timeout
        self.session = session or requests.Session()
        self._requests = requests

    def fetch(self, offset: int) -> bytes:
        url = build_url(self.req, self.base_url, offset)
        try:
            resp = self.session.get(url, timeout=self.timeout)
        except (self._requests.ConnectionError, self._requests.Timeout) as exc:
            raise TransientFetchError(str(exc)) from exc
        if resp.status_code >= 500 or resp.status_code == 429:
            raise TransientFetchError(f"HTTP {resp.status_code}")
        if resp.status_code >= 400:
            raise HarvestError(f"HTTP {resp.status_code}", self.target, offset)
        return resp.content


class FixtureSource:
    """Recorded responses, one document per page: ``<root>/<target>/<offset>.xml``."""

    def __init__(self, root: str | Path, target: str):
        self.root = Path(root)
        self.target = target

    def fetch(self, offset: int) -> bytes:
        path = self.root / self.target / f"{offset}.xml"
        try:
            return path.read_bytes()
        except FileNotFoundError as exc:
            raise HarvestError(f"missing fixture page {path}", self.target, offset) from exc
        except OSError as exc:
            raise TransientFetchError(str(exc)) from exc


def make_source(endpoint: str | Path, req: HarvestRequest) -> PageSource:
    text = str(endpoint)
    if text.startswith(("http://", "https://")):
        return HttpSource(text, req)
    return FixtureSource(endpoint, req.target)


def endpoint_from_env(default: str | None = None) -> str | None:
    return os.environ.get(ENDPOINT_ENV) or default


def fetch_all(
    endpoint: str | Path | PageSource,
    req: HarvestRequest,
    *,
    retries: int = 3,
    backoff: float = 0.5,
    jobs: int = 1,
    diagnostics: Diagnostics | None = None,
    sleep: Callable[[float], None] = time.sleep,
) -> list[HarvestPage]:
    """Fetch every page of a search, in offset order.

    Transient failures are retried up to ``retries`` times with exponential
    backoff; exhausting them raises HarvestError naming target and offset.
    A malformed page after the first is skipped and noted. Records served
    twice (same record id) are kept once and counted.
    """
    if diagnostics is None:
        diagnostics = Diagnostics()
    source = endpoint if hasattr(endpoint, "fetch") else make_source(endpoint, req)
    page_size = req.page_size or DEFAULT_PAGE_SIZE
    target = req.target

    def fetch_page(offset: int) -> tuple[HarvestPage | None, list[Event]]:
        local = Diagnostics()
        attempt = 0
        while True:
            try:
                document = source.fetch(offset)
                break
            except TransientFetchError as exc:
                if attempt >= retries:
                    raise HarvestError(f"retries exhausted: {exc}", target, offset) from exc
                attempt += 1
                local.note(STAGE, "retry", f"{target}@{offset} attempt {attempt}: {exc}")
                sleep(backoff * 2 ** (attempt - 1))
        try:
            page = parse_page(document, target, offset, local)
        except HarvestParseError as exc:
            if offset == 0:
                raise HarvestError(f"first page unreadable: {exc}", target, offset) from exc
            local.note(STAGE, "malformed_page", f"{target}@{offset}: {exc}")
            return None, local.events
        if len(page.records) > page_size:
            local.note(STAGE, "malformed_page", f"{target}@{offset}: {len(page.records)} records > page size")
            return None, local.events
        page.offset = offset
        return page, local.events

    first, events = fetch_page(0)
    diagnostics.events.extend(events)
    assert first is not None
    offsets = list(range(page_size, first.total_reported, page_size))
    if jobs > 1 and len(offsets) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(fetch_page, offsets))
    else:
        results = [fetch_page(o) for o in offsets]

    pages = [first]
    for page, events in results:
        diagnostics.events.extend(events)
        if page is not None:
            pages.append(page)

    seen: set[str] = set()
    for page in pages:
        unique = []
        for r in page.records:
            if r.record_id in seen:
                diagnostics.note(STAGE, "duplicate_served", f"{target}: {r.record_id}")
                continue
            seen.add(r.record_id)
            unique.append(r)
        page.records = unique
    return pages
