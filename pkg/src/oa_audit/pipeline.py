"""Audit orchestration: ingest, harvest, match and report as separate stages.

Each stage reads and writes JSON files under ``<out>/stages`` so that a
person can review the match output before the report is produced.
``run_audit`` simply runs the four stages in order, so a staged run and an
end-to-end run write the same bytes.
"""

from __future__ import annotations

import datetime as dt
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from . import harvest as hv
from .diagnostics import Diagnostics
from .errors import ConfigError, InputIOError, PolicyNotFound
from .harvest import HarvestRequest, RepoRecord
from .ingest import (
    DEFAULT_FUNDING_TERMS,
    InstitutionProfile,
    PublishedRecord,
    classify_funding,
    filter_by_institution,
    load_profiles,
    load_terms,
    parse_export,
)
from .matching import MatchOutcome, check_outcomes, dedup_within_institution, link, review_queue, review_queue_csv
from .metrics import ComplianceReport, assemble, emit_report, tally
from .policy import RomeoSnapshot, classify_rights, load_policy_registry, status_from_label

logger = logging.getLogger(__name__)

STAGE_DIR = "stages"
STAGE_FILES = {
    "ingest": "ingest.json",
    "harvest": "harvest.json",
    "match": "match.json",
}
REVIEW_FILE = "review_queue.csv"
DIAGNOSTICS_FILE = "diagnostics.json"


@dataclass
class AuditConfig:
    institutions: list[str] | str = "all"
    year_from: int = 2012
    year_to: int = 2014
    published: list[Path] = field(default_factory=list)
    published_format: str = "auto"
    fixtures: Path | None = None
    endpoint: str | None = None
    romeo: Path | None = None
    terms: Path | None = None
    policies: Path | None = None
    profiles: Path | None = None
    threshold: float = 0.9
    out: Path = Path("audit-out")
    format: str = "delimited"
    jobs: int = 1
    audit_date: dt.date | None = None
    retries: int = 3
    backoff: float = 0.5
    page_size: int | None = None

    def __post_init__(self):
        self.published = [Path(p) for p in self.published]
        for name in ("fixtures", "romeo", "terms", "policies", "profiles"):
            value = getattr(self, name)
            if value is not None:
                setattr(self, name, Path(value))
        self.out = Path(self.out)
        if isinstance(self.institutions, str) and self.institutions != "all":
            self.institutions = [a.strip() for a in self.institutions.split(",") if a.strip()]

    @property
    def window(self) -> tuple[int, int]:
        return (self.year_from, self.year_to)

    @property
    def stage_dir(self) -> Path:
        return self.out / STAGE_DIR

    def harvest_endpoint(self) -> str | Path | None:
        return self.endpoint or hv.endpoint_from_env() or self.fixtures

    def validate(self, stage: str = "all") -> None:
        """Raise ConfigError for an unusable configuration."""
        if not self.institutions:
            raise ConfigError("no institutions selected")
        if self.year_from > self.year_to:
            raise ConfigError(f"empty year range {self.year_from}-{self.year_to}")
        if not 0 < self.threshold < 1:
            raise ConfigError(f"threshold must lie in (0, 1), got {self.threshold}")
        if self.format not in ("delimited", "structured"):
            raise ConfigError(f"unknown report format {self.format!r}")
        if self.jobs < 1:
            raise ConfigError("jobs must be at least 1")
        if stage in ("all", "ingest"):
            if not self.published:
                raise ConfigError("no published-record export given")
            for p in self.published:
                if not p.is_file():
                    raise ConfigError(f"published export not found: {p}")
        if stage in ("all", "harvest"):
            endpoint = self.harvest_endpoint()
            if endpoint is None:
                raise ConfigError("no harvest endpoint or fixture directory given")
            if not str(endpoint).startswith(("http://", "https://")) and not Path(endpoint).is_dir():
                raise ConfigError(f"fixture directory not found: {endpoint}")
        for name in ("romeo", "terms", "policies", "profiles"):
            path = getattr(self, name)
            if path is not None and not path.is_file():
                raise ConfigError(f"{name} file not found: {path}")

    @classmethod
    def from_file(cls, path: str | Path, **overrides: Any) -> "AuditConfig":
        """Read a YAML config; keyword overrides (flags given on the command line) win."""
        try:
            data = yaml.safe_load(Path(path).read_text("utf-8")) or {}
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except yaml.YAMLError as exc:
            raise ConfigError(f"bad config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"config {path} is not a mapping")
        data = {k.replace("-", "_"): v for k, v in data.items()}
        data.update({k: v for k, v in overrides.items() if v is not None})
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        if isinstance(data.get("published"), (str, Path)):
            data["published"] = [data["published"]]
        if isinstance(data.get("audit_date"), str):
            data["audit_date"] = dt.date.fromisoformat(data["audit_date"])
        return cls(**data)


# --- shared helpers ---------------------------------------------------------------

def select_profiles(config: AuditConfig) -> list[InstitutionProfile]:
    profiles = load_profiles(config.profiles)
    by_acronym = {p.acronym: p for p in profiles}
    if config.institutions == "all":
        chosen = sorted(by_acronym)
    else:
        chosen = sorted(set(config.institutions))
        missing = [a for a in chosen if a not in by_acronym]
        if missing:
            raise ConfigError(f"unknown institutions: {missing}")
    if not chosen:
        raise ConfigError("no institutions selected")
    return [by_acronym[a] for a in chosen]


def _write_json(path: Path, data: Any) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            # compact output keeps the C encoder in play for large stages
            fh.write(json.dumps(data, ensure_ascii=False, separators=(",", ":")))
            fh.write("\n")
    except OSError as exc:
        raise InputIOError(f"cannot write {path}: {exc}") from exc


def _read_stage(config: AuditConfig, stage: str) -> dict:
    path = config.stage_dir / STAGE_FILES[stage]
    if not path.is_file():
        raise ConfigError(f"missing {stage} output {path}; run the {stage} stage first")
    try:
        return json.loads(path.read_text("utf-8"))
    except (OSError, ValueError) as exc:
        raise InputIOError(f"cannot read {path}: {exc}") from exc


def _check_window(config: AuditConfig, data: dict, stage: str) -> None:
    if tuple(data.get("window", ())) != config.window:
        raise ConfigError(f"{stage} output covers {data.get('window')}, not {list(config.window)}")


# --- stages -----------------------------------------------------------------------

def stage_ingest(config: AuditConfig, dry_run: bool = False) -> dict:
    """Parse exports, attach records to institutions, flag government funding.

    With ``dry_run`` nothing is written; the returned data still carries the
    per-institution membership used for the count summary.
    """
    config.validate("ingest")
    profiles = select_profiles(config)
    terms = tuple(load_terms(config.terms)) if config.terms else DEFAULT_FUNDING_TERMS
    diag = Diagnostics()
    # uid order makes the result independent of the order files were given in
    records: dict[str, PublishedRecord] = {}
    for path in sorted(config.published, key=str):
        for rec in parse_export(path, config.published_format, window=config.window, diagnostics=diag):
            prev = records.get(rec.uid)
            if prev is None or json.dumps(rec.to_dict(), sort_keys=True) < json.dumps(prev.to_dict(), sort_keys=True):
                if prev is not None:
                    diag.note("ingest", "duplicate_uid", rec.uid)
                records[rec.uid] = rec
            else:
                diag.note("ingest", "duplicate_uid", rec.uid)
    ordered = [records[uid] for uid in sorted(records)]
    members: dict[str, list[str]] = {}
    used: set[str] = set()
    for profile in profiles:
        hits = filter_by_institution(ordered, profile)
        members[profile.acronym] = [r.uid for r in hits]
        used.update(members[profile.acronym])
    funding = {}
    for rec in ordered:
        if rec.uid in used:
            evidence = classify_funding(rec, terms)
            funding[rec.uid] = [list(t) for t in evidence.matched_terms]
    data = {
        "window": list(config.window),
        "institutions": members,
        "records": [r.to_dict() for r in ordered if r.uid in used],
        "funding": funding,
        "parsed": len(ordered),
        "diagnostics": diag.to_dict(),
    }
    if not dry_run:
        _write_json(config.stage_dir / STAGE_FILES["ingest"], data)
    return data


def _harvest_one(config: AuditConfig, profile: InstitutionProfile, endpoint) -> tuple[list[RepoRecord], Diagnostics]:
    diag = Diagnostics()
    req = HarvestRequest(profile.repo_target, config.year_from, config.year_to, page_size=config.page_size)
    pages = hv.fetch_all(endpoint, req, retries=config.retries, backoff=config.backoff, diagnostics=diag)
    records = [r for page in pages for r in page.records]
    return hv.filter_articles(records, config.window, diag), diag


def stage_harvest(config: AuditConfig) -> dict:
    """Fetch each institution's repository records for the window."""
    config.validate("harvest")
    profiles = select_profiles(config)
    endpoint = config.harvest_endpoint()
    if config.jobs > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(lambda p: _harvest_one(config, p, endpoint), profiles))
    else:
        results = [_harvest_one(config, p, endpoint) for p in profiles]
    diag = Diagnostics()
    deposits = {}
    for profile, (records, local) in zip(profiles, results):
        diag.extend(local)
        deposits[profile.acronym] = [r.to_dict() for r in records]
    data = {"window": list(config.window), "deposits": deposits, "diagnostics": diag.to_dict()}
    _write_json(config.stage_dir / STAGE_FILES["harvest"], data)
    return data


def stage_match(config: AuditConfig) -> dict:
    """Deduplicate deposits, classify rights, link, and queue near misses."""
    config.validate("match")
    ingest = _read_stage(config, "ingest")
    harvested = _read_stage(config, "harvest")
    _check_window(config, ingest, "ingest")
    _check_window(config, harvested, "harvest")
    records = {r["uid"]: PublishedRecord.from_dict(r) for r in ingest["records"]}
    diag = Diagnostics()
    result = {}
    queue = []
    for acronym in sorted(ingest["institutions"]):
        if acronym not in harvested["deposits"]:
            raise ConfigError(f"harvest output has no deposits for {acronym}")
        published = [records[uid] for uid in ingest["institutions"][acronym]]
        raw = [RepoRecord.from_dict(d) for d in harvested["deposits"][acronym]]
        statuses = {}

        def status_of(rec: RepoRecord):
            key = rec.record_id
            if key not in statuses:
                statuses[key] = classify_rights(rec, config.audit_date, diag)
            return statuses[key]

        deposits = dedup_within_institution(raw, status_of)
        if len(deposits) < len(raw):
            diag.note("match", "duplicates_removed", f"{acronym}: {len(raw) - len(deposits)}")
        outcomes = link(published, deposits)
        check_outcomes(outcomes, published, deposits)
        linked = {o.deposit_id for o in outcomes if o.deposit_id}
        unmatched = [p for p, o in zip(published, outcomes) if o.deposit_id is None]
        queue.extend(review_queue(unmatched, [d for d in deposits if d.record_id not in linked], config.threshold))
        result[acronym] = {
            "outcomes": [o.to_dict() for o in outcomes],
            "statuses": {d.record_id: str(status_of(d)) for d in deposits if d.record_id in linked},
            "deposits_after_dedup": len(deposits),
        }
    queue.sort(key=lambda c: (c.normalized_published_title, -c.similarity, c.published_uid, c.deposit_id))
    data = {"window": list(config.window), "institutions": result, "diagnostics": diag.to_dict()}
    _write_json(config.stage_dir / STAGE_FILES["match"], data)
    try:
        (config.out / REVIEW_FILE).write_text(review_queue_csv(queue), encoding="utf-8")
    except OSError as exc:
        raise InputIOError(f"cannot write review queue: {exc}") from exc
    return data


def stage_report(config: AuditConfig) -> ComplianceReport:
    """Tally matched records per year and write the compliance report."""
    config.validate("report")
    ingest = _read_stage(config, "ingest")
    harvested = _read_stage(config, "harvest")
    matched = _read_stage(config, "match")
    for name, data in (("ingest", ingest), ("harvest", harvested), ("match", matched)):
        _check_window(config, data, name)
    registry = load_policy_registry(config.policies)
    snapshot = RomeoSnapshot.load(config.romeo) if config.romeo else RomeoSnapshot()
    records = {r["uid"]: PublishedRecord.from_dict(r) for r in ingest["records"]}
    funding = {uid: bool(terms) for uid, terms in ingest["funding"].items()}
    colors = {uid: snapshot.color_for(r.journal_title, r.issn) for uid, r in records.items()}
    insts = []
    for acronym in sorted(matched["institutions"]):
        entry = matched["institutions"][acronym]
        outcomes = [MatchOutcome.from_dict(o) for o in entry["outcomes"]]
        statuses = {k: status_from_label(v) for k, v in entry["statuses"].items()}
        per_year = {}
        for year in range(config.year_from, config.year_to + 1):
            part = [o for o in outcomes if records[o.published_uid].year == year]
            per_year[year] = tally(part, statuses, funding, colors, acronym, year)
        try:
            policy = registry[acronym]
            stance, ptype = policy.stance, policy.shieber_suber_type
        except PolicyNotFound:
            stance, ptype = "", None
        insts.append(assemble(acronym, per_year, config.window, stance, ptype))
    diag = Diagnostics()
    for data in (ingest, harvested, matched):
        diag.extend(Diagnostics.from_dict(data["diagnostics"]))
    report = ComplianceReport(
        window=config.window,
        institutions=insts,
        snapshot_date=snapshot.date,
        audit_date=config.audit_date.isoformat() if config.audit_date else None,
        diagnostics=diag.counts(),
    )
    emit_report(report, config.format, config.out)
    _write_json(config.out / DIAGNOSTICS_FILE, _sorted_events(diag))
    return report


def _sorted_events(diag: Diagnostics) -> dict:
    data = diag.to_dict()
    data["events"] = sorted(data["events"])
    return data


STAGES = {
    "ingest": stage_ingest,
    "harvest": stage_harvest,
    "match": stage_match,
    "report": stage_report,
}


def run_audit(config: AuditConfig) -> ComplianceReport:
    """Run every stage in order; raises AuditError subclasses on fatal problems."""
    config.validate("all")
    stage_ingest(config)
    stage_harvest(config)
    stage_match(config)
    return stage_report(config)

