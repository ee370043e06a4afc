"""Access rights, funder relations, journal archiving colours and institutional policies."""

from __future__ import annotations

import csv
import datetime as dt
import enum
import io
import logging
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import IO, Iterable, Literal, Protocol

import yaml

from .diagnostics import Diagnostics
from .errors import InputIOError, PolicyError, PolicyNotFound
from .harvest import RepoRecord
from .textnorm import title_key

logger = logging.getLogger(__name__)

STAGE = "classify"


# --- access status ----------------------------------------------------------------

class AccessKind(enum.IntEnum):
    """Ordered from least to most open; the order drives duplicate survivor choice."""

    UNKNOWN = 0
    CLOSED = 1
    EMBARGOED = 2
    OPEN = 3


@dataclass(frozen=True)
class AccessStatus:
    kind: AccessKind
    embargo_until: dt.date | None = None

    @property
    def compliant(self) -> bool:
        # embargoed deposits count toward compliance regardless of expiry
        return self.kind in (AccessKind.OPEN, AccessKind.EMBARGOED)

    @property
    def label(self) -> str:
        return self.kind.name.lower()

    def __str__(self) -> str:
        if self.embargo_until:
            return f"{self.label}({self.embargo_until.isoformat()})"
        return self.label


OPEN = AccessStatus(AccessKind.OPEN)
EMBARGOED = AccessStatus(AccessKind.EMBARGOED)
CLOSED = AccessStatus(AccessKind.CLOSED)
UNKNOWN = AccessStatus(AccessKind.UNKNOWN)

_ACCESS_SUFFIXES = {
    "openaccess": AccessKind.OPEN,
    "embargoedaccess": AccessKind.EMBARGOED,
    "closedaccess": AccessKind.CLOSED,
    "restrictedaccess": AccessKind.CLOSED,
}
_EMBARGO_END = re.compile(r"embargoend/(\d{4}-\d{2}-\d{2})", re.IGNORECASE)
_ISO_DATE = re.compile(r"^\s*(\d{4}-\d{2}-\d{2})\s*$")


def _access_term(value: str) -> AccessKind | None:
    v = value.strip().rstrip("/").lower()
    for suffix, kind in _ACCESS_SUFFIXES.items():
        if v.endswith(suffix):
            return kind
    return None


def classify_rights(
    record: RepoRecord,
    audit_date: dt.date | None = None,
    diagnostics: Diagnostics | None = None,
) -> AccessStatus:
    """Map dc:rights values to an access status.

    Terms are recognized by suffix (``.../openAccess`` etc.), restricted
    access counts as closed, and conflicting values resolve to the most open.
    An embargo end date found in rights or dates is kept on the status;
    ``audit_date`` only decides whether a lapsed embargo is logged.
    """
    kinds = {k for k in map(_access_term, record.rights_raw) if k is not None}
    if not kinds:
        return UNKNOWN
    kind = max(kinds)
    if len(kinds) > 1 and diagnostics is not None:
        found = ",".join(k.name.lower() for k in sorted(kinds))
        diagnostics.note(STAGE, "rights_conflict", f"{record.record_id}: {found}")
    if kind is not AccessKind.EMBARGOED:
        return AccessStatus(kind)
    expiry = None
    for value in record.rights_raw + record.date_raw:
        m = _EMBARGO_END.search(value)
        if m:
            expiry = _parse_date(m.group(1))
            break
    if expiry is None:
        # a bare ISO date next to embargoedAccess is the release date
        for value in record.rights_raw:
            m = _ISO_DATE.match(value)
            if m:
                expiry = _parse_date(m.group(1))
                break
    if expiry and audit_date and expiry <= audit_date:
        logger.debug("%s: embargo ended %s", record.record_id, expiry)
    return AccessStatus(AccessKind.EMBARGOED, expiry)


def _parse_date(text: str) -> dt.date | None:
    try:
        return dt.date.fromisoformat(text)
    except ValueError:
        return None


def status_from_label(label: str) -> AccessStatus:
    """Inverse of ``str(status)``, used when reading intermediate files."""
    name, _, rest = label.partition("(")
    kind = AccessKind[name.upper()]
    expiry = _parse_date(rest.rstrip(")")) if rest else None
    return AccessStatus(kind, expiry)


# --- grant relations --------------------------------------------------------------

@dataclass(frozen=True)
class GrantRelation:
    funder: str
    project_id: str
    raw: str
    program: str | None = None


_GRANT_RE = re.compile(r"^info:eu-repo/grantagreement/([^/]+)/([^/]*)/([^/]+)(?:/.*)?$", re.IGNORECASE)


def parse_grant_relation(relation: str) -> GrantRelation | None:
    """Split ``info:eu-repo/grantAgreement/Funder/Program/ProjectID[/...]``.

    Free-text acknowledgments and bare project codes return None; the raw
    string stays on the record's relations.

    >>> parse_grant_relation("info:eu-repo/grantAgreement/EC/FP7/123456")
    GrantRelation(funder='EC', project_id='123456', raw='info:eu-repo/grantAgreement/EC/FP7/123456', program='FP7')
    """
    raw = relation
    m = _GRANT_RE.match(relation.strip())
    if not m:
        return None
    funder, program, project = (g.strip() for g in m.groups())
    if not funder or not project:
        return None
    return GrantRelation(funder=funder, project_id=project, raw=raw, program=program or None)


# --- Romeo colours ----------------------------------------------------------------

class RomeoColor(enum.Enum):
    GREEN = "green"
    BLUE = "blue"
    YELLOW = "yellow"
    WHITE = "white"
    UNCLASSIFIED = "unclassified"


# lower is more restrictive; used to settle conflicting snapshot rows
_RESTRICTIVENESS = {RomeoColor.WHITE: 0, RomeoColor.YELLOW: 1, RomeoColor.BLUE: 2, RomeoColor.GREEN: 3}
_ISSN_RE = re.compile(r"^(\d{4})-?(\d{3}[\dX])$")


def normalize_issn(value: str | None) -> str | None:
    if not value:
        return None
    v = value.strip().upper().replace(" ", "")
    m = _ISSN_RE.match(v)
    return f"{m.group(1)}-{m.group(2)}" if m else None


def journal_key(title: str) -> str:
    return title_key(title)


@dataclass(frozen=True)
class RomeoSnapshotEntry:
    color: RomeoColor
    issn: str | None = None
    journal_title_key: str = ""

    def __post_init__(self):
        if not self.issn and not self.journal_title_key:
            raise ValueError("snapshot entry needs an ISSN or a journal title")
        if self.color is RomeoColor.UNCLASSIFIED:
            raise ValueError("snapshot entries carry a real colour")


class ColorSource(Protocol):
    def color_for(self, journal_title: str, issn: str | None) -> RomeoColor: ...


class RomeoSnapshot:
    """Pinned, dated copy of journal archiving colours.

    File format: delimited with header ``issn,journal_title,color`` and an
    optional ``# snapshot-date: YYYY-MM-DD`` comment line.
    """

    def __init__(self, entries: Iterable[RomeoSnapshotEntry] = (), date: str | None = None):
        self.date = date
        self.by_issn: dict[str, RomeoColor] = {}
        self.by_title: dict[str, RomeoColor] = {}
        self.entries = list(entries)
        for e in self.entries:
            if e.issn:
                self._put(self.by_issn, e.issn, e.color)
            if e.journal_title_key:
                self._put(self.by_title, e.journal_title_key, e.color)

    @staticmethod
    def _put(index: dict[str, RomeoColor], key: str, color: RomeoColor) -> None:
        prev = index.get(key)
        if prev is None or _RESTRICTIVENESS[color] < _RESTRICTIVENESS[prev]:
            if prev is not None:
                logger.info("snapshot conflict for %s: %s vs %s", key, prev.value, color.value)
            index[key] = color

    @classmethod
    def load(cls, source: str | Path | IO[str]) -> "RomeoSnapshot":
        try:
            text = Path(source).read_text("utf-8") if isinstance(source, (str, Path)) else source.read()
        except OSError as exc:
            raise InputIOError(f"cannot read Romeo snapshot: {exc}") from exc
        date = None
        body = []
        for line in text.splitlines():
            if line.lstrip().startswith("#"):
                m = re.search(r"snapshot-date:\s*(\S+)", line)
                if m:
                    date = m.group(1)
                continue
            body.append(line)
        entries = []
        reader = csv.DictReader(io.StringIO("\n".join(body)), delimiter="\t" if body and "\t" in body[0] else ",")
        for n, row in enumerate(reader, 2):
            try:
                color = RomeoColor(row.get("color", "").strip().lower())
                entries.append(
                    RomeoSnapshotEntry(
                        color=color,
                        issn=normalize_issn(row.get("issn")),
                        journal_title_key=journal_key(row.get("journal_title") or ""),
                    )
                )
            except ValueError as exc:
                raise PolicyError(f"Romeo snapshot row {n}: {exc}") from exc
        return cls(entries, date)

    def dump(self) -> str:
        out = io.StringIO()
        if self.date:
            out.write(f"# snapshot-date: {self.date}\n")
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["issn", "journal_title", "color"])
        for e in self.entries:
            w.writerow([e.issn or "", e.journal_title_key, e.color.value])
        return out.getvalue()

    def color_for(self, journal_title: str, issn: str | None) -> RomeoColor:
        return lookup_color(journal_title, issn, self)


def lookup_color(journal_title: str, issn: str | None, snapshot: RomeoSnapshot) -> RomeoColor:
    """ISSN match first, then normalized title, else UNCLASSIFIED."""
    for candidate in (issn or "").replace(";", ",").split(","):
        key = normalize_issn(candidate)
        if key and key in snapshot.by_issn:
            return snapshot.by_issn[key]
    if journal_title:
        color = snapshot.by_title.get(journal_key(journal_title))
        if color is not None:
            return color
    return RomeoColor.UNCLASSIFIED


# --- institutional policies -------------------------------------------------------

Stance = Literal["mandate", "recommend", "none"]
OptOut = Literal["none", "immediate-oa-only", "full"]
PUBLISHER_STIPULATED = "publisher"
_VERSIONS = {"submitted", "accepted", "published", "unspecified"}


@dataclass(frozen=True)
class PolicyProfile:
    acronym: str
    stance: Stance
    shieber_suber_type: int | None = None
    effective_date: dt.date | None = None
    allowed_embargo_months: int | str | None = None
    deposit_opt_out: OptOut | None = None
    versions_accepted: frozenset[str] = field(default_factory=frozenset)
    policy_text: str = ""
    embargo_note: str = ""
    deposit_timing: str = ""
    copyright_reservation: str = ""

    def __post_init__(self):
        if self.stance not in ("mandate", "recommend", "none"):
            raise PolicyError(f"{self.acronym}: bad stance {self.stance!r}")
        t = self.shieber_suber_type
        if t is not None and (not isinstance(t, int) or isinstance(t, bool) or not 1 <= t <= 6):
            raise PolicyError(f"{self.acronym}: policy type must be 1-6, got {t!r}")
        if self.stance == "none" and t is not None:
            raise PolicyError(f"{self.acronym}: no policy but type {t}")
        if self.deposit_opt_out not in (None, "none", "immediate-oa-only", "full"):
            raise PolicyError(f"{self.acronym}: bad opt-out {self.deposit_opt_out!r}")
        m = self.allowed_embargo_months
        if m is not None and m != PUBLISHER_STIPULATED and not (isinstance(m, int) and m >= 0):
            raise PolicyError(f"{self.acronym}: bad embargo {m!r}")
        bad = set(self.versions_accepted) - _VERSIONS
        if bad:
            raise PolicyError(f"{self.acronym}: unknown versions {sorted(bad)}")
        object.__setattr__(self, "versions_accepted", frozenset(self.versions_accepted))


class PolicyRegistry:
    def __init__(self, profiles: Iterable[PolicyProfile]):
        self._by_acronym: dict[str, PolicyProfile] = {}
        for p in profiles:
            if p.acronym in self._by_acronym:
                raise PolicyError(f"duplicate policy acronym {p.acronym!r}")
            self._by_acronym[p.acronym] = p

    def __getitem__(self, acronym: str) -> PolicyProfile:
        try:
            return self._by_acronym[acronym]
        except KeyError:
            raise PolicyNotFound(f"no policy registered for {acronym!r}") from None

    def __contains__(self, acronym: str) -> bool:
        return acronym in self._by_acronym

    def __iter__(self):
        return iter(self._by_acronym.values())

    def __len__(self) -> int:
        return len(self._by_acronym)


def load_policy_registry(source: str | Path | IO[str] | None = None) -> PolicyRegistry:
    """Read the YAML policy registry keyed by acronym (bundled copy when None)."""
    try:
        if source is None:
            text = resources.files("oa_audit").joinpath("data/policies.yaml").read_text("utf-8")
        elif isinstance(source, (str, Path)):
            text = Path(source).read_text("utf-8")
        else:
            text = source.read()
    except OSError as exc:
        raise InputIOError(f"cannot read policy registry: {exc}") from exc
    # duplicate keys must not be silently merged by the YAML loader
    data = yaml.load(text, Loader=_UniqueKeyLoader) or {}
    profiles = []
    for acronym, entry in (data.get("policies") or {}).items():
        entry = dict(entry or {})
        eff = entry.pop("effective_date", None)
        if isinstance(eff, str):
            eff = _parse_date(eff)
        try:
            profiles.append(
                PolicyProfile(
                    acronym=str(acronym),
                    effective_date=eff,
                    versions_accepted=frozenset(entry.pop("versions_accepted", None) or ()),
                    **entry,
                )
            )
        except TypeError as exc:
            raise PolicyError(f"policy {acronym!r}: {exc}") from exc
    return PolicyRegistry(profiles)


class _UniqueKeyLoader(yaml.SafeLoader):
    pass


def _construct_unique_mapping(loader, node, deep=False):
    seen = set()
    for key_node, _ in node.value:
        key = loader.construct_object(key_node, deep=deep)
        if key in seen:
            raise PolicyError(f"duplicate policy acronym {key!r}")
        seen.add(key)
    return loader.construct_mapping(node, deep=deep)


_UniqueKeyLoader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_unique_mapping)
