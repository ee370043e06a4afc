"""Citation-database export ingestion.

Reads tagged plain-text exports (two-letter field tags, indented continuation
lines, ``ER`` record terminator) or delimited tables whose header names the
same tags, then decides institutional affiliation and government funding.
"""

from __future__ import annotations

import csv
import io
import logging
import re
from dataclasses import dataclass, fields
from functools import cached_property, lru_cache
from importlib import resources
from pathlib import Path
from typing import IO, Iterable, Iterator, Literal

import yaml

from . import query_expr
from .diagnostics import Diagnostics
from .errors import ConfigError, FormatError, InputIOError, QueryEvaluationError, QuerySyntaxError
from .textnorm import canonical_doi, fold, tokenize

logger = logging.getLogger(__name__)

STAGE = "ingest"

# tag -> PublishedRecord attribute; later aliases only fill an empty slot
TAG_FIELDS = {
    "UT": "uid",
    "DI": "doi",
    "TI": "title",
    "PY": "year",
    "SO": "journal_title",
    "SN": "issn",
    "EI": "eissn",
    "DT": "doc_type",
    "OG": "org_field",
    "AD": "address_field",
    "C1": "address_field",
    "FO": "funding_agency",
    "FU": "funding_agency",
    "FG": "grant_numbers",
    "FT": "funding_text",
    "FX": "funding_text",
}
MULTI_VALUED = {"AU", "AF", "AD", "C1", "OG", "FO", "FU", "FG"}
_HEADER_TAGS = {"FN", "VR", "EF"}
_TAG_LINE = re.compile(r"^([A-Z][A-Z0-9])(?: (.*))?$")
_YEAR = re.compile(r"^\d{4}$")

FUNDING_FIELDS = (("FO", "funding_agency"), ("FG", "grant_numbers"), ("FT", "funding_text"))


@dataclass(frozen=True)
class PublishedRecord:
    uid: str
    title: str
    year: int
    doi: str | None = None
    journal_title: str = ""
    issn: str | None = None
    doc_type: str = ""
    org_field: str = ""
    address_field: str = ""
    funding_agency: str = ""
    grant_numbers: str = ""
    funding_text: str = ""

    def to_dict(self) -> dict:
        # flat fields only, so a shallow copy is enough
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, data: dict) -> "PublishedRecord":
        return cls(**data)


@dataclass(frozen=True)
class FundingEvidence:
    matched_terms: tuple[tuple[str, str], ...] = ()

    @property
    def is_government_funded(self) -> bool:
        return bool(self.matched_terms)


@dataclass(frozen=True)
class InstitutionProfile:
    """One audited institution: affiliation evidence plus harvest target.

    ``match_on`` sets how OG and AD evidence combine: ``either`` keeps a
    record when the organization name or the address expression hits, ``og``
    and ``address`` use one source only.
    """

    acronym: str
    address_expression: str
    repo_target: str = ""
    policy_ref: str = ""
    name: str = ""
    org_names: tuple[str, ...] = ()
    match_on: Literal["either", "og", "address"] = "either"

    def __post_init__(self):
        if not self.acronym:
            raise ConfigError("institution profile without acronym")
        if self.match_on not in ("either", "og", "address"):
            raise ConfigError(f"{self.acronym}: bad match_on {self.match_on!r}")
        object.__setattr__(self, "org_names", tuple(self.org_names))
        if not self.repo_target:
            object.__setattr__(self, "repo_target", self.acronym.lower())
        if not self.policy_ref:
            object.__setattr__(self, "policy_ref", self.acronym)
        try:
            self.expression
        except QuerySyntaxError as exc:
            raise ConfigError(f"{self.acronym}: address expression: {exc}") from exc

    @cached_property
    def expression(self) -> query_expr.QueryExpr:
        return query_expr.parse(self.address_expression)

    @cached_property
    def _org_token_seqs(self) -> tuple[tuple[str, ...], ...]:
        return tuple(t for t in (tuple(tokenize(n)) for n in self.org_names) if t)


# --- parsing ------------------------------------------------------------------

def _decode(data: bytes) -> str:
    try:
        return data.decode("utf-8-sig")
    except UnicodeDecodeError:
        return data.decode("cp1252", errors="replace")


def _read_text(stream: IO[bytes] | bytes | str | Path) -> str:
    try:
        if isinstance(stream, (str, Path)):
            data = Path(stream).read_bytes()
        elif isinstance(stream, bytes):
            data = stream
        else:
            data = stream.read()
    except OSError as exc:
        raise InputIOError(f"cannot read export: {exc}") from exc
    if isinstance(data, str):
        return data.lstrip("﻿")
    return _decode(data)


def _iter_tagged(lines: list[str]) -> Iterator[tuple[int, dict[str, list[str]] | None]]:
    """Yield (first line number, tag -> values) per record; None when unterminated."""
    record: dict[str, list[str]] | None = None
    start = 0
    current: str | None = None
    for n, raw in enumerate(lines, 1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            continue
        if line[0] in " \t":
            if record is None or current is None:
                raise FormatError("continuation line outside a field", n, line)
            value = line.strip()
            if current in MULTI_VALUED:
                record[current].append(value)
            else:
                record[current][-1] += " " + value
            continue
        m = _TAG_LINE.match(line)
        if not m:
            raise FormatError("not a tagged field line", n, line)
        tag, value = m.group(1), (m.group(2) or "").strip()
        if tag in _HEADER_TAGS:
            current = None
            continue
        if tag == "ER":
            if record is not None:
                yield start, record
            record, current = None, None
            continue
        if record is None:
            record, start = {}, n
        record.setdefault(tag, []).append(value)
        current = tag
    if record is not None:
        yield start, None


def _join(tag: str, values: list[str]) -> str:
    sep = "; " if tag in MULTI_VALUED else " "
    return sep.join(v for v in values if v)


def _build(
    fields: dict[str, str],
    fallback_uid: str,
    window: tuple[int, int] | None,
    diagnostics: Diagnostics,
) -> PublishedRecord | None:
    title = fields.get("title", "").strip()
    uid = fields.get("uid", "").strip() or fallback_uid
    if not title:
        diagnostics.note(STAGE, "missing_title", uid)
        return None
    year_s = fields.get("year", "").strip()
    if not _YEAR.match(year_s):
        diagnostics.note(STAGE, "bad_year", f"{uid}: {year_s!r}")
        return None
    year = int(year_s)
    if window is not None and not window[0] <= year <= window[1]:
        diagnostics.note(STAGE, "out_of_window", f"{uid}: {year}")
        return None
    issn = fields.get("issn", "").strip() or fields.get("eissn", "").strip() or None
    return PublishedRecord(
        uid=uid,
        title=title,
        year=year,
        doi=canonical_doi(fields.get("doi")),
        journal_title=fields.get("journal_title", "").strip(),
        issn=issn,
        doc_type=fields.get("doc_type", "").strip(),
        org_field=fields.get("org_field", "").strip(),
        address_field=fields.get("address_field", "").strip(),
        funding_agency=fields.get("funding_agency", "").strip(),
        grant_numbers=fields.get("grant_numbers", "").strip(),
        funding_text=fields.get("funding_text", "").strip(),
    )


def _fields_from_tags(tags: dict[str, list[str]]) -> dict[str, str]:
    out: dict[str, str] = {}
    for tag, values in tags.items():
        attr = TAG_FIELDS.get(tag)
        if attr is None:
            continue
        value = _join(tag, values)
        if value and not out.get(attr):
            out[attr] = value
    return out


_COLUMN_ALIASES = {**TAG_FIELDS, **{v: v for v in TAG_FIELDS.values()}}


def _parse_delimited(text: str, source: str, window, diagnostics) -> list[PublishedRecord]:
    lines = text.splitlines()
    if not lines:
        return []
    header_line = lines[0]
    delimiter = "\t" if "\t" in header_line else ","
    reader = csv.reader(io.StringIO(text), delimiter=delimiter)
    header = [h.strip() for h in next(reader)]
    columns = [_COLUMN_ALIASES.get(h) or _COLUMN_ALIASES.get(h.upper()) for h in header]
    if "title" not in columns or "year" not in columns:
        raise FormatError("header does not name title and year columns", 1, header_line)
    records = []
    for i, row in enumerate(reader, 1):
        if not any(cell.strip() for cell in row):
            continue
        fields: dict[str, str] = {}
        for attr, cell in zip(columns, row):
            if attr and cell.strip() and not fields.get(attr):
                fields[attr] = cell
        rec = _build(fields, f"{source}:{i}", window, diagnostics)
        if rec is not None:
            records.append(rec)
    return records


def parse_export(
    stream: IO[bytes] | bytes | str | Path,
    format: Literal["tagged", "delimited", "auto"] = "auto",
    *,
    window: tuple[int, int] | None = None,
    source: str = "",
    diagnostics: Diagnostics | None = None,
) -> list[PublishedRecord]:
    """Parse one export file into PublishedRecord values, preserving order.

    Records without a title, with a malformed year, or outside ``window`` are
    skipped and noted in ``diagnostics``. Structural problems (an untagged
    line in a tagged file, a header naming no title/year) raise FormatError.
    Records lacking an accession number get ``<source>:<ordinal>`` as uid.
    """
    if diagnostics is None:
        diagnostics = Diagnostics()
    if not source and isinstance(stream, (str, Path)):
        source = Path(stream).name
    text = _read_text(stream)
    if not text.strip():
        return []
    if format == "auto":
        first = next(line for line in text.splitlines() if line.strip())
        format = "tagged" if _TAG_LINE.match(first) and "\t" not in first else "delimited"
    if format == "delimited":
        return _parse_delimited(text, source, window, diagnostics)
    if format != "tagged":
        raise ValueError(f"unknown export format {format!r}")

    records = []
    for ordinal, (line_no, tags) in enumerate(_iter_tagged(text.splitlines()), 1):
        fallback = f"{source}:{ordinal}"
        if tags is None:
            diagnostics.note(STAGE, "unterminated_record", f"{fallback} (line {line_no})")
            continue
        rec = _build(_fields_from_tags(tags), fallback, window, diagnostics)
        if rec is not None:
            records.append(rec)
    return records


def validate_record(rec: PublishedRecord, window: tuple[int, int] | None = None) -> list[str]:
    """Return the invariant violations of ``rec`` (empty when valid)."""
    problems = []
    if not rec.title.strip():
        problems.append("empty title")
    if not 1000 <= rec.year <= 9999:
        problems.append("year is not four digits")
    if window is not None and not window[0] <= rec.year <= window[1]:
        problems.append("year outside window")
    if rec.doi is not None and rec.doi != canonical_doi(rec.doi):
        problems.append("doi not canonical")
    return problems


# --- funding -------------------------------------------------------------------

def load_terms(source: str | Path | Iterable[str] | None = None) -> list[str]:
    """Read a term list: one term per line, ``#`` comments, optional quotes."""
    if source is None:
        text = resources.files("oa_audit").joinpath("data/funding_terms.txt").read_text("utf-8")
        lines: Iterable[str] = text.splitlines()
    elif isinstance(source, (str, Path)):
        try:
            lines = Path(source).read_text("utf-8").splitlines()
        except OSError as exc:
            raise InputIOError(f"cannot read term list: {exc}") from exc
    else:
        lines = source
    terms = []
    for line in lines:
        line = line.split("#", 1)[0].strip().strip('"').strip()
        if line:
            terms.append(line)
    return terms


DEFAULT_FUNDING_TERMS = tuple(load_terms())


@lru_cache(maxsize=64)
def _compile_terms(terms: tuple[str, ...]) -> tuple[tuple[str, tuple[str, ...]], ...]:
    compiled = {}
    for term in terms:
        toks = tuple(tokenize(term))
        if toks:
            compiled[term] = toks
    return tuple(sorted(compiled.items(), key=lambda kv: (fold(kv[0]), kv[0])))


def _contains(tokens: list[str], phrase: tuple[str, ...]) -> bool:
    k = len(phrase)
    first = phrase[0]
    for i in range(len(tokens) - k + 1):
        if tokens[i] == first and tuple(tokens[i:i + k]) == phrase:
            return True
    return False


def classify_funding(
    record: PublishedRecord, terms: Iterable[str] = DEFAULT_FUNDING_TERMS
) -> FundingEvidence:
    """Scan FO, FG and FT for government-funder terms.

    Matching is on folded tokens: a single-word term must equal a whole
    token (``MEC`` does not hit ``MECHANISM``) and a multi-word term must
    appear as a contiguous token run. Evidence is sorted by field then term,
    so it does not depend on term-list order.
    """
    compiled = _compile_terms(tuple(terms))
    hits = []
    for label, attr in FUNDING_FIELDS:
        tokens = tokenize(getattr(record, attr))
        if not tokens:
            continue
        present = set(tokens)
        for term, phrase in compiled:
            if phrase[0] in present and (len(phrase) == 1 or _contains(tokens, phrase)):
                hits.append((term, label))
    return FundingEvidence(tuple(hits))


# --- institutions --------------------------------------------------------------

def load_profiles(source: str | Path | IO[str] | None = None) -> list[InstitutionProfile]:
    """Load institution profiles from YAML (the bundled set when ``source`` is None)."""
    try:
        if source is None:
            text = resources.files("oa_audit").joinpath("data/institutions.yaml").read_text("utf-8")
        elif isinstance(source, (str, Path)):
            text = Path(source).read_text("utf-8")
        else:
            text = source.read()
    except OSError as exc:
        raise InputIOError(f"cannot read institution profiles: {exc}") from exc
    data = yaml.safe_load(text) or {}
    entries = data.get("institutions", data) if isinstance(data, dict) else data
    profiles: list[InstitutionProfile] = []
    seen: set[str] = set()
    for entry in entries or []:
        entry = dict(entry)
        acronym = str(entry.get("acronym", ""))
        if acronym in seen:
            raise ConfigError(f"duplicate institution acronym {acronym!r}")
        seen.add(acronym)
        entry["org_names"] = tuple(entry.get("org_names") or ())
        try:
            profiles.append(InstitutionProfile(**entry))
        except TypeError as exc:
            raise ConfigError(f"institution {acronym!r}: {exc}") from exc
    return profiles


def affiliated(record: PublishedRecord, profile: InstitutionProfile) -> bool:
    og_hit = False
    if profile.match_on in ("either", "og") and record.org_field:
        og_tokens = tokenize(record.org_field)
        og_hit = any(_contains(og_tokens, seq) for seq in profile._org_token_seqs)
    if og_hit or profile.match_on == "og":
        return og_hit
    try:
        return query_expr.evaluate(profile.expression, record.address_field)
    except Exception as exc:  # pragma: no cover - evaluator is total
        raise QueryEvaluationError(f"{profile.acronym}: record {record.uid}: {exc}") from exc


def filter_by_institution(
    records: Iterable[PublishedRecord], profile: InstitutionProfile
) -> list[PublishedRecord]:
    """Keep records affiliated with ``profile`` by OG name or AD expression."""
    # exports repeat the same affiliation strings many times over
    seen: dict[tuple[str, str], bool] = {}
    kept = []
    for r in records:
        key = (r.org_field, r.address_field)
        hit = seen.get(key)
        if hit is None:
            hit = seen[key] = affiliated(r, profile)
        if hit:
            kept.append(r)
    return kept
