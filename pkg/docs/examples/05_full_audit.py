"""An end-to-end audit over recorded fixtures.

The pipeline reads exports, assigns institutions, harvests repository pages
(here from a directory of recorded pages instead of a live endpoint), merges
duplicates, links, tallies and writes the report. The same run is available
from the command line as ``oa-audit run``.
"""

import tempfile
from pathlib import Path

from oa_audit.harvest import RepoRecord, serialize_dc
from oa_audit.metrics import read_report_csv
from oa_audit.pipeline import AuditConfig, run_audit

work = Path(tempfile.mkdtemp())

# %% One export with three in-window articles from the Universitat de Vic.
(work / "export.txt").write_text("\n".join([
    "FN Clarivate Analytics Web of Science", "VR 1.0",
    "PT J", "TI Thermal stability of polymer membranes", "SO JOURNAL OF MEMBRANE SCIENCE", "SN 0376-7388",
    "C1 Univ Vic, Vic, Spain.", "FU Ministerio de Economia y Competitividad", "PY 2013", "UT WOS:1", "ER", "",
    "PT J", "TI Kinetic model of enzyme pathways", "SO ENZYME REVIEWS",
    "C1 Univ Vic, Vic, Spain.", "PY 2014", "DI 10.1000/kin.2014.7", "UT WOS:2", "ER", "",
    "PT J", "TI Coastal sediment transport", "SO ENZYME REVIEWS",
    "C1 Univ Vic, Vic, Spain.", "PY 2012", "UT WOS:3", "ER", "",
    "EF", "",
]), encoding="utf-8")

# %% Recorded harvest pages live at <fixtures>/<target>/<offset>.xml.
sem = "info:eu-repo/semantics/"
deposits = [
    RepoRecord("uvic", "Thermal stability of polymer membranes", "oai:uvic:1", year=2013,
               rights_raw=(sem + "openAccess",), doc_type_raw=sem + "article"),
    RepoRecord("uvic", "Kinetics of enzymes", "oai:uvic:2", year=2014, identifiers=("doi:10.1000/KIN.2014.7",),
               rights_raw=(sem + "closedAccess",), doc_type_raw=sem + "article"),
]
(work / "pages" / "uvic").mkdir(parents=True)
(work / "pages" / "uvic" / "0.xml").write_bytes(serialize_dc(deposits, "uvic", len(deposits), 0))

# %% Journal colours come from a dated local snapshot.
(work / "romeo.csv").write_text(
    "# snapshot-date: 2016-09-01\nissn,journal_title,color\n0376-7388,Journal of Membrane Science,green\n"
)

config = AuditConfig(institutions=["UVIC"], published=[work / "export.txt"], fixtures=work / "pages",
                     romeo=work / "romeo.csv", out=work / "out")
report = run_audit(config)

# %% Files written, and the window row of the delimited report.
print(sorted(str(p.relative_to(config.out)) for p in config.out.rglob("*") if p.is_file()))
row = read_report_csv(config.out / "compliance.csv")[0]
print({k: row[k] for k in ("acronym", "wos_total", "deposited", "deposit_inst_pct", "ici_pct", "gci_pct")})
