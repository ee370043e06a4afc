"""Per-institution tallies, compliance indices and report emission.

Every percentage keeps its exact rational value next to the one-decimal
figure that is printed. Rounding is half away from zero. A zero denominator
gives an undefined percentage, which prints as ``NA`` and is never treated
as zero.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping

from .errors import IntegrityError, InputIOError
from .ingest import FundingEvidence
from .matching import MatchOutcome
from .policy import AccessKind, AccessStatus, RomeoColor

STATUSES = ("open", "embargoed", "closed", "unknown")
COLORS = ("green", "blue", "yellow", "white", "unclassified")
UNDEFINED = "NA"


# --- percentages -------------------------------------------------------------------

@dataclass(frozen=True)
class Percentage:
    """A percentage with its exact value and the printed one-decimal figure.

    ``exact`` is None when the index is undefined. ``shown`` is normally the
    exact value rounded; sums and differences of printed figures carry their
    own ``shown`` so that a report row adds up the way a reader checks it.
    """

    exact: Fraction | None
    shown: Decimal | None

    @classmethod
    def ratio(cls, num: int, den: int) -> "Percentage":
        if den == 0:
            return UNDEFINED_PCT
        exact = Fraction(100 * num, den)
        return cls(exact, round_half_away(exact))

    @property
    def defined(self) -> bool:
        return self.exact is not None

    def __add__(self, other: "Percentage") -> "Percentage":
        if not (self.defined and other.defined):
            return UNDEFINED_PCT
        return Percentage(self.exact + other.exact, self.shown + other.shown)

    def __sub__(self, other: "Percentage") -> "Percentage":
        if not (self.defined and other.defined):
            return UNDEFINED_PCT
        return Percentage(self.exact - other.exact, self.shown - other.shown)

    def __float__(self) -> float:
        if self.exact is None:
            return float("nan")
        return float(self.exact)

    def text(self) -> str:
        return UNDEFINED if self.shown is None else f"{self.shown:.1f}"

    def exact_text(self) -> str:
        return UNDEFINED if self.exact is None else repr(float(self.exact))

    def to_json(self) -> dict | None:
        if self.exact is None:
            return None
        return {"shown": self.text(), "exact": f"{self.exact.numerator}/{self.exact.denominator}"}

    @classmethod
    def from_json(cls, data: dict | None) -> "Percentage":
        if data is None:
            return UNDEFINED_PCT
        return cls(Fraction(data["exact"]), Decimal(data["shown"]))


UNDEFINED_PCT = Percentage(None, None)


def round_half_away(value: Fraction) -> Decimal:
    """Round to one decimal place, halves away from zero, in exact arithmetic.

    >>> round_half_away(Fraction(1, 4) * 10)
    Decimal('2.5')
    >>> round_half_away(Fraction(-1, 20))
    Decimal('-0.1')
    >>> round_half_away(Fraction(3000, 136))
    Decimal('22.1')
    """
    tenths = value * 10
    q, r = divmod(abs(tenths.numerator), tenths.denominator)
    if 2 * r >= tenths.denominator:
        q += 1
    return Decimal(-q if tenths < 0 else q).scaleb(-1)


# --- counts --------------------------------------------------------------------------

def _zeros(keys: tuple[str, ...]) -> dict[str, int]:
    return {k: 0 for k in keys}


@dataclass
class InstitutionYearCounts:
    acronym: str
    year: str
    wos_total: int = 0
    wos_gov: int = 0
    deposited: int = 0
    deposited_gov: int = 0
    by_status: dict[str, int] = field(default_factory=lambda: _zeros(STATUSES))
    by_status_gov: dict[str, int] = field(default_factory=lambda: _zeros(STATUSES))
    by_color: dict[str, int] = field(default_factory=lambda: _zeros(COLORS))
    by_color_gov: dict[str, int] = field(default_factory=lambda: _zeros(COLORS))

    def check(self) -> None:
        """Raise IntegrityError when the count invariants do not hold."""
        problems = []
        if sum(self.by_status.values()) != self.deposited:
            problems.append("status partition does not sum to deposited")
        if sum(self.by_status_gov.values()) != self.deposited_gov:
            problems.append("funded status partition does not sum to deposited_gov")
        if not self.deposited <= self.wos_total:
            problems.append("deposited exceeds wos_total")
        if not (self.deposited_gov <= self.wos_gov <= self.wos_total):
            problems.append("funded counts exceed their totals")
        if sum(self.by_color.values()) != self.wos_total:
            problems.append("colour counts do not sum to wos_total")
        if sum(self.by_color_gov.values()) != self.wos_gov:
            problems.append("funded colour counts do not sum to wos_gov")
        for name in ("by_status", "by_color"):
            inst, gov = getattr(self, name), getattr(self, name + "_gov")
            if any(gov[k] > inst[k] for k in inst):
                problems.append(f"{name}_gov exceeds {name}")
        if problems:
            raise IntegrityError(f"{self.acronym} {self.year}: " + "; ".join(problems))

    def merged(self, other: "InstitutionYearCounts", year: str) -> "InstitutionYearCounts":
        out = InstitutionYearCounts(self.acronym, year)
        for name in ("wos_total", "wos_gov", "deposited", "deposited_gov"):
            setattr(out, name, getattr(self, name) + getattr(other, name))
        for name in ("by_status", "by_status_gov", "by_color", "by_color_gov"):
            mine, theirs = getattr(self, name), getattr(other, name)
            setattr(out, name, {k: mine[k] + theirs[k] for k in mine})
        return out

    def to_dict(self) -> dict:
        return {
            "acronym": self.acronym,
            "year": self.year,
            "wos_total": self.wos_total,
            "wos_gov": self.wos_gov,
            "deposited": self.deposited,
            "deposited_gov": self.deposited_gov,
            "by_status": dict(self.by_status),
            "by_status_gov": dict(self.by_status_gov),
            "by_color": dict(self.by_color),
            "by_color_gov": dict(self.by_color_gov),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "InstitutionYearCounts":
        return cls(**{k: (dict(v) if isinstance(v, dict) else v) for k, v in data.items()})


def _gov_flag(value: bool | FundingEvidence) -> bool:
    if isinstance(value, FundingEvidence):
        return value.is_government_funded
    return bool(value)


def tally(
    outcomes: Iterable[MatchOutcome],
    statuses: Mapping[str, AccessStatus],
    funding: Mapping[str, bool | FundingEvidence],
    colors: Mapping[str, RomeoColor],
    acronym: str,
    year: str | int = "all",
) -> InstitutionYearCounts:
    """Count one institution-year partition.

    ``statuses`` is keyed by deposit id; ``funding`` and ``colors`` by
    published uid. A missing key is a referential error. Unknown rights count
    as deposited and never as compliant.
    """
    c = InstitutionYearCounts(acronym, str(year))
    for o in outcomes:
        try:
            gov = _gov_flag(funding[o.published_uid])
            color = colors[o.published_uid]
        except KeyError:
            raise IntegrityError(f"{acronym}: outcome cites unknown published record {o.published_uid!r}") from None
        c.wos_total += 1
        c.by_color[color.value] += 1
        if gov:
            c.wos_gov += 1
            c.by_color_gov[color.value] += 1
        if o.deposit_id is None:
            continue
        try:
            status = statuses[o.deposit_id]
        except KeyError:
            raise IntegrityError(f"{acronym}: outcome cites unknown deposit {o.deposit_id!r}") from None
        label = AccessKind(status.kind).name.lower()
        c.deposited += 1
        c.by_status[label] += 1
        if gov:
            c.deposited_gov += 1
            c.by_status_gov[label] += 1
    c.check()
    return c


# --- indices ----------------------------------------------------------------------

def ici(c: InstitutionYearCounts) -> Percentage:
    return Percentage.ratio(c.by_status["open"] + c.by_status["embargoed"], c.wos_total)


def gci(c: InstitutionYearCounts) -> Percentage:
    return Percentage.ratio(c.by_status_gov["open"] + c.by_status_gov["embargoed"], c.wos_gov)


def deposit_ratio(c: InstitutionYearCounts, gov_only: bool = False) -> Percentage:
    if gov_only:
        return Percentage.ratio(c.deposited_gov, c.wos_gov)
    return Percentage.ratio(c.deposited, c.wos_total)


def pai(c: InstitutionYearCounts, gov_only: bool = False) -> dict[str, Percentage]:
    """Share of articles per journal colour; ``unclassified`` is the residual."""
    counts = c.by_color_gov if gov_only else c.by_color
    den = c.wos_gov if gov_only else c.wos_total
    return {color: Percentage.ratio(counts[color], den) for color in COLORS}


def potential_oa(shares: Mapping[str, Percentage]) -> Percentage:
    """Green plus blue: what could have been self-archived as post-print."""
    return shares["green"] + shares["blue"]


def gap(real: Percentage, potential: Percentage) -> tuple[Percentage, bool]:
    """``potential - real`` and whether it is negative (an anomaly)."""
    diff = potential - real
    return diff, bool(diff.defined and diff.exact < 0)


@dataclass(frozen=True)
class Indices:
    deposit_inst: Percentage
    deposit_gov: Percentage
    ici: Percentage
    gci: Percentage
    pai: dict[str, Percentage]
    pai_gov: dict[str, Percentage]
    potential_oa: Percentage
    potential_oa_gov: Percentage
    gap_inst: Percentage
    gap_gov: Percentage
    anomalies: tuple[str, ...]

    @classmethod
    def of(cls, c: InstitutionYearCounts) -> "Indices":
        shares, shares_gov = pai(c), pai(c, gov_only=True)
        real, real_gov = ici(c), gci(c)
        pot, pot_gov = potential_oa(shares), potential_oa(shares_gov)
        g, neg = gap(real, pot)
        g_gov, neg_gov = gap(real_gov, pot_gov)
        anomalies = tuple(name for name, flag in (("negative_gap_inst", neg), ("negative_gap_gov", neg_gov)) if flag)
        return cls(
            deposit_inst=deposit_ratio(c), deposit_gov=deposit_ratio(c, gov_only=True),
            ici=real, gci=real_gov, pai=shares, pai_gov=shares_gov,
            potential_oa=pot, potential_oa_gov=pot_gov,
            gap_inst=g, gap_gov=g_gov, anomalies=anomalies,
        )

    def columns(self) -> dict[str, Percentage]:
        """Percentage columns in report order."""
        cols = {"deposit_inst_pct": self.deposit_inst, "ici_pct": self.ici,
                "deposit_gov_pct": self.deposit_gov, "gci_pct": self.gci}
        cols.update({f"pai_{k}_pct": v for k, v in self.pai.items()})
        cols["potential_oa_pct"] = self.potential_oa
        cols["gap_inst_pct"] = self.gap_inst
        cols.update({f"pai_gov_{k}_pct": v for k, v in self.pai_gov.items()})
        cols["potential_oa_gov_pct"] = self.potential_oa_gov
        cols["gap_gov_pct"] = self.gap_gov
        return cols


# --- report ------------------------------------------------------------------------

@dataclass
class InstitutionReport:
    acronym: str
    years: dict[str, InstitutionYearCounts]
    window: InstitutionYearCounts
    stance: str = ""
    policy_type: int | None = None

    def check(self) -> None:
        total = None
        for counts in self.years.values():
            total = counts if total is None else total.merged(counts, self.window.year)
        if total is not None and total.to_dict() != self.window.to_dict():
            raise IntegrityError(f"{self.acronym}: window totals differ from the sum of years")


def window_label(window: tuple[int, int]) -> str:
    return f"{window[0]}-{window[1]}"


def assemble(acronym: str, per_year: Mapping[int | str, InstitutionYearCounts], window: tuple[int, int],
             stance: str = "", policy_type: int | None = None) -> InstitutionReport:
    """Sum per-year counts into the window row (never averaging percentages)."""
    label = window_label(window)
    total = InstitutionYearCounts(acronym, label)
    years = {}
    for y in sorted(per_year, key=str):
        years[str(y)] = per_year[y]
        total = total.merged(per_year[y], label)
    total.check()
    return InstitutionReport(acronym, years, total, stance, policy_type)


@dataclass
class ComplianceReport:
    window: tuple[int, int]
    institutions: list[InstitutionReport]
    snapshot_date: str | None = None
    audit_date: str | None = None
    diagnostics: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        self.window = tuple(self.window)
        self.institutions = sorted(self.institutions, key=lambda r: r.acronym)

    def rows(self, per_year: bool = False) -> list[InstitutionYearCounts]:
        out = []
        for inst in self.institutions:
            if per_year:
                out.extend(inst.years[y] for y in sorted(inst.years))
            else:
                out.append(inst.window)
        return out

    def to_dict(self) -> dict:
        return {
            "window": list(self.window),
            "snapshot_date": self.snapshot_date,
            "audit_date": self.audit_date,
            "diagnostics": dict(sorted(self.diagnostics.items())),
            "institutions": [
                {
                    "acronym": inst.acronym,
                    "stance": inst.stance,
                    "policy_type": inst.policy_type,
                    "window": _row_dict(inst.window),
                    "years": [_row_dict(inst.years[y]) for y in sorted(inst.years)],
                }
                for inst in self.institutions
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ComplianceReport":
        insts = []
        for entry in data["institutions"]:
            years = {row["counts"]["year"]: InstitutionYearCounts.from_dict(row["counts"]) for row in entry["years"]}
            insts.append(InstitutionReport(
                entry["acronym"], years, InstitutionYearCounts.from_dict(entry["window"]["counts"]),
                entry.get("stance", ""), entry.get("policy_type"),
            ))
        return cls(tuple(data["window"]), insts, data.get("snapshot_date"), data.get("audit_date"),
                   dict(data.get("diagnostics") or {}))


def _row_dict(c: InstitutionYearCounts) -> dict:
    idx = Indices.of(c)
    return {
        "counts": c.to_dict(),
        "indices": {name: pct.to_json() for name, pct in idx.columns().items()},
        "anomaly_flags": list(idx.anomalies),
    }


COUNT_COLUMNS = ("wos_total", "wos_gov", "deposited", "deposited_gov")
PCT_COLUMNS = tuple(Indices.of(InstitutionYearCounts("", "")).columns())
REPORT_COLUMNS = (
    ("acronym", "year") + COUNT_COLUMNS + STATUSES + PCT_COLUMNS + ("anomaly_flags",)
    + tuple(f"{s}_gov" for s in STATUSES)
    + tuple(f"{k}_n" for k in COLORS) + tuple(f"{k}_gov_n" for k in COLORS)
    + tuple(f"{p}_exact" for p in PCT_COLUMNS)
)


def report_row(c: InstitutionYearCounts) -> list[str]:
    idx = Indices.of(c)
    pcts = idx.columns()
    row = [c.acronym, c.year]
    row += [str(getattr(c, n)) for n in COUNT_COLUMNS]
    row += [str(c.by_status[s]) for s in STATUSES]
    row += [p.text() for p in pcts.values()]
    row.append(";".join(idx.anomalies))
    row += [str(c.by_status_gov[s]) for s in STATUSES]
    row += [str(c.by_color[k]) for k in COLORS] + [str(c.by_color_gov[k]) for k in COLORS]
    row += [p.exact_text() for p in pcts.values()]
    return row


def report_csv(report: ComplianceReport, per_year: bool = False) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(REPORT_COLUMNS)
    for c in report.rows(per_year):
        w.writerow(report_row(c))
    return out.getvalue()


def report_json(report: ComplianceReport) -> str:
    return json.dumps(report.to_dict(), indent=2, sort_keys=False, ensure_ascii=False) + "\n"


def read_report_json(source: str | Path) -> ComplianceReport:
    try:
        data = json.loads(Path(source).read_text("utf-8"))
    except OSError as exc:
        raise InputIOError(f"cannot read report: {exc}") from exc
    return ComplianceReport.from_dict(data)


def read_report_csv(source: str | Path) -> list[dict[str, str]]:
    try:
        with open(source, newline="", encoding="utf-8") as fh:
            return list(csv.DictReader(fh))
    except OSError as exc:
        raise InputIOError(f"cannot read report: {exc}") from exc


REPORT_FILES = {
    "delimited": ("compliance.csv", "compliance_by_year.csv"),
    "structured": ("compliance.json",),
}


def emit_report(report: ComplianceReport, format: str, out_dir: str | Path) -> list[Path]:
    """Write the report files for ``format`` and return their paths.

    ``delimited`` writes one window row per institution plus a per-year file;
    ``structured`` writes both granularities into one JSON document. Output
    is byte-stable for a fixed report.
    """
    if format not in REPORT_FILES:
        raise ValueError(f"unknown report format {format!r}")
    out = Path(out_dir)
    if format == "delimited":
        payloads = [report_csv(report), report_csv(report, per_year=True)]
    else:
        payloads = [report_json(report)]
    written = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        for name, text in zip(REPORT_FILES[format], payloads):
            path = out / name
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            written.append(path)
    except OSError as exc:
        raise InputIOError(f"cannot write report to {out}: {exc}") from exc
    return written
