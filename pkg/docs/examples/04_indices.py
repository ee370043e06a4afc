"""Compliance indices from linked records.

For one institution and period:

- Deposit % is the share of indexed articles found in the repository.
- ICI is the share deposited as open or embargoed.
- GCI is the same share restricted to government-funded articles.
- PAI gives, per journal archiving colour, the share of articles. Potential
  open access is green plus blue, and the gap is potential minus ICI.

Percentages are exact fractions, rounded half away from zero for display.
"""

from oa_audit.matching import MatchOutcome
from oa_audit.metrics import Indices, tally
from oa_audit.policy import RomeoColor, status_from_label

# %% Ten articles, six deposited with mixed access, four government funded.
outcomes = [MatchOutcome(f"p{i}", f"d{i}" if i < 6 else None, "title" if i < 6 else "none") for i in range(10)]
statuses = {f"d{i}": status_from_label(label) for i, label in
            enumerate(["open", "open", "embargoed", "closed", "closed", "unknown"])}
funding = {f"p{i}": i % 3 == 0 for i in range(10)}
palette = [RomeoColor.GREEN] * 4 + [RomeoColor.BLUE] * 2 + [RomeoColor.WHITE] * 2 + [RomeoColor.UNCLASSIFIED] * 2
colors = {f"p{i}": c for i, c in enumerate(palette)}

counts = tally(outcomes, statuses, funding, colors, acronym="DEMO")
print(counts.wos_total, counts.deposited, dict(counts.by_status))

# %% The indices. Undefined ratios print as NA rather than 0.
ix = Indices.of(counts)
for name, value in ix.columns().items():
    print(f"{name:28} {value.text()}")
print("anomalies:", ix.anomalies)
