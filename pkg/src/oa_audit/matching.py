"""Within-institution deduplication and published-to-deposit linkage.

Linking is exact: a canonical DOI or a normalized title, each only counting
when the publication years agree. Near-miss titles are never linked; they go
to a review queue for a human pass.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Literal, Sequence

import numpy as np
from rapidfuzz import process
from rapidfuzz.distance import Levenshtein

from .errors import IntegrityError
from .harvest import RepoRecord
from .ingest import PublishedRecord
from .policy import AccessStatus, classify_rights
from .textnorm import canonical_doi, title_key


@dataclass(frozen=True, order=True)
class NormalizedKey:
    text: str

    def __str__(self) -> str:
        return self.text

    def __bool__(self) -> bool:
        return bool(self.text)


def normalize_title(title: str) -> NormalizedKey:
    """Diacritic strip, case fold, full-stop removal, whitespace collapse, trim.

    >>> normalize_title("Open  Access. Monitoring.").text
    'open access monitoring'
    """
    return NormalizedKey(title_key(title or ""))


Basis = Literal["doi", "title", "none"]
_CHUNK = 2048
_EPS = 1e-9


@dataclass(frozen=True)
class MatchOutcome:
    published_uid: str
    deposit_id: str | None
    basis: Basis
    year_checked: bool = True

    def __post_init__(self):
        if (self.basis == "none") != (self.deposit_id is None):
            raise ValueError("basis 'none' iff no deposit")

    @property
    def matched(self) -> bool:
        return self.deposit_id is not None

    def to_dict(self) -> dict:
        return {
            "published_uid": self.published_uid,
            "deposit_id": self.deposit_id,
            "basis": self.basis,
            "year_checked": self.year_checked,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MatchOutcome":
        return cls(**data)


@dataclass(frozen=True)
class ReviewCandidate:
    published_uid: str
    deposit_id: str
    normalized_published_title: str
    normalized_deposit_title: str
    similarity: float


# --- deduplication -------------------------------------------------------------

def _find(parent: list[int], i: int) -> int:
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


def _survivor_order(record: RepoRecord, status: AccessStatus) -> tuple:
    # smallest sorts first; record id and full content make the pick order-free
    return (-status.kind, -record.populated_fields(), record.record_id, repr(record))


def duplicate_groups(records: Sequence[RepoRecord]) -> list[list[int]]:
    """Index groups of records linked by a shared DOI or (title key, year)."""
    parent = list(range(len(records)))
    first_seen: dict[tuple, int] = {}
    for i, rec in enumerate(records):
        keys: list[tuple] = [("doi", d) for d in rec.dois]
        key = normalize_title(rec.title)
        if key and rec.year is not None:
            keys.append(("title", key.text, rec.year))
        for k in keys:
            j = first_seen.setdefault(k, i)
            if j != i:
                a, b = _find(parent, i), _find(parent, j)
                if a != b:
                    parent[max(a, b)] = min(a, b)
    groups: dict[int, list[int]] = {}
    for i in range(len(records)):
        groups.setdefault(_find(parent, i), []).append(i)
    return list(groups.values())


def dedup_within_institution(
    records: Iterable[RepoRecord],
    status_of: Callable[[RepoRecord], AccessStatus] = classify_rights,
) -> list[RepoRecord]:
    """Collapse duplicates of one repository to one survivor each.

    The survivor is the most open record (Open > Embargoed > Closed >
    Unknown), then the one with more populated fields, then the smallest
    record id. Output is sorted by record id so it does not depend on input
    order. Records from different repositories are never merged here.
    """
    records = list(records)
    targets = {r.source_target for r in records}
    if len(targets) > 1:
        raise IntegrityError(f"dedup across repositories: {sorted(targets)}")
    survivors = []
    for group in duplicate_groups(records):
        best = min(group, key=lambda i: _survivor_order(records[i], status_of(records[i])))
        survivors.append(records[best])
    survivors.sort(key=lambda r: (r.record_id, repr(r)))
    return survivors


# --- linking --------------------------------------------------------------------

class DepositIndex:
    """Read-only lookup of deposits by canonical DOI and by (title key, year)."""

    def __init__(self, deposits: Iterable[RepoRecord]):
        self.by_doi: dict[str, list[RepoRecord]] = {}
        self.by_title: dict[tuple[str, int], list[RepoRecord]] = {}
        ordered = sorted(deposits, key=lambda r: (r.record_id, repr(r)))
        for rec in ordered:
            for doi in rec.dois:
                self.by_doi.setdefault(doi, []).append(rec)
            key = normalize_title(rec.title)
            if key and rec.year is not None:
                self.by_title.setdefault((key.text, rec.year), []).append(rec)


def link(published: Sequence[PublishedRecord], deposits: Iterable[RepoRecord]) -> list[MatchOutcome]:
    """Link each published record to at most one deposit.

    A canonical-DOI match with the same year wins, else an exact title-key
    match with the same year. Each deposit is consumed by the first published
    record (in input order) that claims it. One outcome per published record,
    in input order.
    """
    index = deposits if isinstance(deposits, DepositIndex) else DepositIndex(deposits)
    taken: set[str] = set()
    outcomes = []
    for pub in published:
        hit, basis = None, "none"
        doi = canonical_doi(pub.doi)
        if doi:
            hit = _first_free(index.by_doi.get(doi, ()), pub.year, taken)
            basis = "doi" if hit else "none"
        if hit is None:
            key = normalize_title(pub.title)
            if key:
                hit = _first_free(index.by_title.get((key.text, pub.year), ()), pub.year, taken)
                basis = "title" if hit else "none"
        if hit is None:
            outcomes.append(MatchOutcome(pub.uid, None, "none"))
        else:
            taken.add(hit.record_id)
            outcomes.append(MatchOutcome(pub.uid, hit.record_id, basis))
    return outcomes


def _first_free(candidates: Iterable[RepoRecord], year: int, taken: set[str]) -> RepoRecord | None:
    for rec in candidates:
        if rec.year == year and rec.record_id not in taken:
            return rec
    return None


# --- review queue -----------------------------------------------------------------

def title_similarity(a: str, b: str) -> float:
    """1 - edit distance / longer length; 1.0 for two empty strings."""
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - Levenshtein.distance(a, b) / longest


def review_queue(
    published_unmatched: Iterable[PublishedRecord],
    deposits_unlinked: Iterable[RepoRecord],
    threshold: float = 0.9,
    same_year: bool = True,
) -> list[ReviewCandidate]:
    """Propose near-identical title pairs for manual review.

    Pairs with ``threshold <= similarity < 1`` are returned, sorted by
    normalized published title then by similarity, highest first. Nothing
    here is ever counted as a match. With ``same_year`` (the default) only
    pairs whose years agree are scored, since a pair with different years
    could not be linked even if the titles were equal.
    """
    if not 0 < threshold < 1:
        raise ValueError(f"threshold must lie in (0, 1), got {threshold}")
    deposits: dict[int | None, list[tuple[str, str]]] = {}
    for d in deposits_unlinked:
        key = normalize_title(d.title).text
        if key:
            deposits.setdefault(d.year if same_year else None, []).append((d.record_id, key))
    queries: dict[int | None, list[tuple[str, str]]] = {}
    for p in published_unmatched:
        key = normalize_title(p.title).text
        if key:
            queries.setdefault(p.year if same_year else None, []).append((p.uid, key))
    out = []
    for block, rows in queries.items():
        if block in deposits:
            out.extend(_score_block(rows, deposits[block], threshold))
    out.sort(key=lambda c: (c.normalized_published_title, -c.similarity, c.published_uid, c.deposit_id))
    return out


def _score_block(queries: list[tuple[str, str]], deposits: list[tuple[str, str]],
                 threshold: float) -> Iterator[ReviewCandidate]:
    choices = [t for _, t in deposits]
    # all pairs are scored in C; rows are chunked to bound memory
    for start in range(0, len(queries), _CHUNK):
        rows = queries[start:start + _CHUNK]
        scores = process.cdist(
            [t for _, t in rows], choices, scorer=Levenshtein.normalized_similarity,
            score_cutoff=threshold - _EPS, dtype=np.float64,
        )
        for i, j in zip(*np.nonzero(scores)):
            uid, key = rows[i]
            rid, title = deposits[j]
            # rescore survivors exactly so the boundary does not hinge on float noise
            sim = title_similarity(key, title)
            if threshold - _EPS <= sim < 1.0:
                yield ReviewCandidate(uid, rid, key, title, sim)


REVIEW_COLUMNS = (
    "published_uid", "deposit_id", "normalized_published_title", "normalized_deposit_title", "similarity",
)


def review_queue_csv(candidates: Iterable[ReviewCandidate]) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(REVIEW_COLUMNS)
    for c in candidates:
        w.writerow([c.published_uid, c.deposit_id, c.normalized_published_title,
                    c.normalized_deposit_title, f"{c.similarity:.6f}"])
    return out.getvalue()


def check_outcomes(outcomes: Iterable[MatchOutcome], published: Iterable[PublishedRecord],
                   deposits: Iterable[RepoRecord]) -> None:
    """Raise IntegrityError when outcomes cite unknown records or reuse a deposit."""
    uids = {p.uid for p in published}
    ids = {d.record_id for d in deposits}
    used: set[str] = set()
    for o in outcomes:
        if o.published_uid not in uids:
            raise IntegrityError(f"outcome cites unknown published record {o.published_uid!r}")
        if o.deposit_id is None:
            continue
        if o.deposit_id not in ids:
            raise IntegrityError(f"outcome cites unknown deposit {o.deposit_id!r}")
        if o.deposit_id in used:
            raise IntegrityError(f"deposit {o.deposit_id!r} linked twice")
        used.add(o.deposit_id)
