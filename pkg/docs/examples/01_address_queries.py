"""Deciding which institution an article belongs to.

Citation-index exports carry affiliation strings such as
``Univ Politecn Valencia, Inst Tecnol Quim, Valencia, Spain``. Each bundled
institution profile holds an address expression written in a small query
language: quoted phrases with ``*``/``?`` wildcards, OR, implicit AND, NOT,
and ``(a NEAR/n b)`` for proximity.
"""

from oa_audit.errors import QuerySyntaxError
from oa_audit.ingest import load_profiles
from oa_audit.query_expr import evaluate, parse

# %% Expressions parse into a small tree that prints back canonically.
expr = parse('"Univ* Politec* Valencia" OR (UPV NEAR/5 Valencia)')
print(expr)

addresses = [
    "Univ Politecn Valencia, Inst Tecnol Quim, Valencia, Spain",
    "UPV, Dept Math, Camino de Vera, Valencia, Spain",
    "Univ Valencia, Dept Zool, Burjassot, Spain",
]
for address in addresses:
    print(f"{evaluate(expr, address)!s:5}  {address}")

# %% Matching is token based and folds case and accents,
# so "Politécnica" and "POLITECN" behave alike.
print(evaluate(parse('"Univ* Politec*"'), "UNIVERSIDAD POLITÉCNICA DE MADRID"))

# %% Adjacent groups are AND-ed, which makes exclusions read naturally.
uji = parse('"Univ* Jaume" UJI (NOT Kyoto)')
print(evaluate(uji, "Univ Jaume 1, UJI, Castellon, Spain"), evaluate(uji, "Univ Jaume 1, UJI, Kyoto, Japan"))

# %% Syntax errors point at the offending character.
try:
    parse('"Univ* Vic" OR')
except QuerySyntaxError as exc:
    print("rejected:", exc)

# %% The 28 bundled profiles, each with its own expression.
profiles = load_profiles()
print(len(profiles), "profiles, e.g.", profiles[0].acronym, "->", profiles[0].address_expression[:60], "...")
