"""Open-access compliance auditing for institutional repositories.

The pipeline joins a citation-index export to repository records harvested
for the same institutions and years, then reports deposit ratios, compliance
indices and the journal-policy potential for self-archiving.
"""

from .errors import AuditError, ConfigError, HarvestError, InputIOError, IntegrityError
from .harvest import HarvestRequest, RepoRecord, fetch_all, parse_dc
from .ingest import InstitutionProfile, PublishedRecord, classify_funding, load_profiles, parse_export
from .matching import MatchOutcome, dedup_within_institution, link, normalize_title, review_queue
from .metrics import ComplianceReport, InstitutionYearCounts, deposit_ratio, gci, ici, pai, potential_oa, tally
from .pipeline import AuditConfig, run_audit
from .policy import AccessStatus, RomeoColor, RomeoSnapshot, classify_rights, load_policy_registry
from .query_expr import evaluate, parse

__version__ = "0.1.0"

__all__ = [
    "AccessStatus", "AuditConfig", "AuditError", "ComplianceReport", "ConfigError", "HarvestError",
    "HarvestRequest", "InputIOError", "InstitutionProfile", "InstitutionYearCounts", "IntegrityError",
    "MatchOutcome", "PublishedRecord", "RepoRecord", "RomeoColor", "RomeoSnapshot", "classify_funding",
    "classify_rights", "dedup_within_institution", "deposit_ratio", "evaluate", "fetch_all", "gci", "ici",
    "link", "load_policy_registry", "load_profiles", "normalize_title", "pai", "parse", "parse_dc",
    "parse_export", "potential_oa", "review_queue", "run_audit", "tally",
]
