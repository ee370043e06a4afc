import datetime as dt
import io
from collections import Counter

import pytest

from oa_audit.diagnostics import Diagnostics
from oa_audit.errors import PolicyError, PolicyNotFound
from oa_audit.harvest import RepoRecord
from oa_audit.policy import (
    AccessKind,
    PolicyProfile,
    RomeoColor,
    RomeoSnapshot,
    classify_rights,
    lookup_color,
    load_policy_registry,
    normalize_issn,
    parse_grant_relation,
    status_from_label,
)

SEM = "info:eu-repo/semantics/"

# printed policy type per institution with a policy
POLICY_TYPES = {
    "UNED": 1, "UC3M": 4, "CEU": 5, "UCM": 3, "UAH": 5, "UBU": 4, "UNICAN": 5, "UHU": 3, "ULPGC": 3,
    "UPCT": 5, "UPM": 3, "UAB": 3, "UB": 3, "UdG": 5, "UdL": 5, "UVIC": 5, "UOC": 1, "UPC": 3,
    "UPV": 5, "UPF": 5,
}
MANDATES = {"UC3M", "UCM", "UBU", "UHU", "ULPGC", "UNED", "UPM", "URJC", "UAB", "UB", "UOC", "UPC"}
NO_POLICY = {"UAM", "UA", "EHU", "UJI", "UPO", "UPNA", "UV"}


def rec(*rights, dates=()):
    return RepoRecord("t", "x", "id", rights_raw=tuple(rights), date_raw=tuple(dates))


@pytest.mark.parametrize(
    "rights,kind",
    [
        ((SEM + "openAccess",), AccessKind.OPEN),
        ((SEM + "embargoedAccess",), AccessKind.EMBARGOED),
        ((SEM + "closedAccess",), AccessKind.CLOSED),
        ((SEM + "restrictedAccess",), AccessKind.CLOSED),
        (("openAccess",), AccessKind.OPEN),
        (("Copyright the authors", SEM + "closedAccess"), AccessKind.CLOSED),
        (("Creative Commons BY 4.0",), AccessKind.UNKNOWN),
        ((), AccessKind.UNKNOWN),
    ],
)
def test_rights_vocabulary(rights, kind):
    assert classify_rights(rec(*rights)).kind is kind


def test_conflict_resolves_to_most_open_and_is_noted():
    diag = Diagnostics()
    status = classify_rights(rec(SEM + "closedAccess", SEM + "openAccess"), diagnostics=diag)
    assert status.kind is AccessKind.OPEN
    assert diag.count("rights_conflict") == 1


def test_embargo_end_date_kept():
    status = classify_rights(rec(SEM + "embargoedAccess", dates=["2013", "info:eu-repo/date/embargoEnd/2014-06-30"]))
    assert status.embargo_until == dt.date(2014, 6, 30)
    assert status.compliant
    assert status_from_label(str(status)) == status
    bare = classify_rights(rec(SEM + "embargoedAccess", "2015-01-01"))
    assert bare.embargo_until == dt.date(2015, 1, 1)


def test_compliance_flags():
    assert classify_rights(rec(SEM + "openAccess")).compliant
    assert not classify_rights(rec(SEM + "closedAccess")).compliant
    assert not classify_rights(rec()).compliant


def test_grant_relations():
    g = parse_grant_relation("info:eu-repo/grantAgreement/MINECO/Plan Nacional/CTQ2011-24560/ES/extra")
    assert (g.funder, g.program, g.project_id) == ("MINECO", "Plan Nacional", "CTQ2011-24560")
    assert parse_grant_relation("info:eu-repo/grantAgreement/EC//123").program is None
    assert parse_grant_relation("Funded by MINECO") is None
    assert parse_grant_relation("CTQ2011-24560") is None


SNAPSHOT = """# snapshot-date: 2016-09-01
issn,journal_title,color
1234-5678,Journal of Tests,green
,Acta Ejemplar,blue
8765432X,,yellow
1111-1111,Shared Title,green
2222-2222,Shared Title,white
"""


def test_snapshot_lookup_order():
    snap = RomeoSnapshot.load(io.StringIO(SNAPSHOT))
    assert snap.date == "2016-09-01"
    assert lookup_color("Anything", "1234-5678", snap) is RomeoColor.GREEN
    assert lookup_color("ACTA  EJEMPLAR.", None, snap) is RomeoColor.BLUE
    assert lookup_color("", "8765-432x", snap) is RomeoColor.YELLOW
    assert lookup_color("Journal of Tests", "9999-9999", snap) is RomeoColor.GREEN
    assert lookup_color("Unknown", None, snap) is RomeoColor.UNCLASSIFIED
    # conflicting rows for one title settle on the more restrictive colour
    assert lookup_color("Shared Title", None, snap) is RomeoColor.WHITE
    assert RomeoSnapshot.load(io.StringIO(snap.dump())).by_issn == snap.by_issn


def test_snapshot_rejects_bad_colour():
    with pytest.raises(PolicyError):
        RomeoSnapshot.load(io.StringIO("issn,journal_title,color\n1234-5678,X,purple\n"))


def test_issn_forms():
    assert normalize_issn("12345678") == "1234-5678"
    assert normalize_issn("1234-567x") == "1234-567X"
    assert normalize_issn("12-345") is None


def test_bundled_registry_matches_printed_policies():
    reg = load_policy_registry()
    assert len(reg) == 28
    stances = Counter(p.stance for p in reg)
    assert stances == {"mandate": 12, "recommend": 9, "none": 7}
    assert {p.acronym for p in reg if p.stance == "mandate"} == MANDATES
    assert {p.acronym for p in reg if p.stance == "none"} == NO_POLICY
    for acronym, t in POLICY_TYPES.items():
        assert reg[acronym].shieber_suber_type == t
    uned = reg["UNED"]
    assert uned.effective_date == dt.date(2014, 7, 14)
    assert uned.allowed_embargo_months == 12
    assert uned.deposit_opt_out == "immediate-oa-only"
    assert reg["UC3M"].allowed_embargo_months == "publisher"


def test_registry_errors():
    with pytest.raises(PolicyNotFound):
        load_policy_registry()["URV"]
    with pytest.raises(PolicyError):
        load_policy_registry(io.StringIO("policies:\n  A: {stance: none}\n  A: {stance: none}\n"))
    with pytest.raises(PolicyError):
        PolicyProfile("X", "none", shieber_suber_type=3)
    with pytest.raises(PolicyError):
        PolicyProfile("X", "mandate", shieber_suber_type=7)
    with pytest.raises(PolicyError):
        PolicyProfile("X", "mandate", versions_accepted=frozenset({"preprint"}))
