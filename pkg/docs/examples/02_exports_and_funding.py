"""Reading a citation export and flagging government-funded articles.

An export is either tagged (two-letter field codes, records ending in ``ER``)
or tab-delimited with a header row. Funding is decided from the funding
agency, grant and acknowledgment fields: an article counts as government
funded when one of the listed funder terms occurs there as whole tokens.
"""

from oa_audit.diagnostics import Diagnostics
from oa_audit.ingest import classify_funding, filter_by_institution, load_profiles, parse_export

EXPORT = b"""FN Clarivate Analytics Web of Science
VR 1.0
PT J
TI Thermal stability of polymer membranes
SO JOURNAL OF MEMBRANE SCIENCE
SN 0376-7388
C1 [Garcia, A] Univ Vic, Ctr Estudis Sanitaris, Vic, Spain.
FU Spanish Ministry of Economy and Competitiveness [CTQ2014-51912]
PY 2013
DI 10.1000/jms.2013.001
UT WOS:000000000000001
ER

PT J
TI Coastal sediment transport
C1 [Smith, J] Univ Porto, Fac Engn, Oporto, Portugal.
FX We thank the MECHANISM consortium for field access.
PY 2013
UT WOS:000000000000002
ER

PT J
TI An older paper
C1 Univ Vic, Vic, Spain.
PY 2009
UT WOS:000000000000003
ER
EF
"""

# %% Parse with a window; out-of-window records are dropped and counted.
diag = Diagnostics()
records = parse_export(EXPORT, window=(2012, 2014), source="demo", diagnostics=diag)
for r in records:
    print(r.uid, r.year, r.doi, r.title)
print(diag.counts())

# %% Keep the records of one institution.
uvic = next(p for p in load_profiles() if p.acronym == "UVIC")
mine = filter_by_institution(records, uvic)
print([r.uid for r in mine])

# %% Funding: "MECHANISM" contains a listed term as a substring, which is not enough.
for r in records:
    evidence = classify_funding(r)
    print(r.uid, evidence.is_government_funded, evidence.matched_terms)
