"""Shared text folding helpers: diacritics, case, tokens and DOIs."""

from __future__ import annotations

import re
import unicodedata

_TOKEN_RE = re.compile(r"[^\W_]+")
_SPACE_RE = re.compile(r"\s+")
_DOI_RE = re.compile(r"10\.\d{4,9}/\S+", re.IGNORECASE)
_DOI_PREFIXES = (
    "https://doi.org/",
    "http://doi.org/",
    "https://dx.doi.org/",
    "http://dx.doi.org/",
    "info:doi/",
    "urn:doi:",
    "doi:",
)


def strip_diacritics(text: str) -> str:
    if text.isascii():
        return text
    decomposed = unicodedata.normalize("NFKD", text)
    return "".join(ch for ch in decomposed if not unicodedata.combining(ch))


def fold(text: str) -> str:
    """Diacritic- and case-insensitive form of ``text``."""
    # casefold can emit combining marks (e.g. U+0130), hence the second strip
    return strip_diacritics(strip_diacritics(text).casefold())


def title_key(title: str) -> str:
    """Matching key for a title.

    Strips diacritics, case-folds, removes full stops, collapses whitespace
    runs to one space and trims.

    >>> title_key("Open  Access. Monitoring.")
    'open access monitoring'
    """
    text = fold(title).replace(".", "")
    return _SPACE_RE.sub(" ", text).strip()


def tokenize(text: str) -> list[str]:
    """Split folded text on every non-alphanumeric character."""
    return _TOKEN_RE.findall(fold(text))


def canonical_doi(value: str | None) -> str | None:
    """Lowercase DOI with resolver prefixes and whitespace removed.

    >>> canonical_doi(" https://doi.org/10.1000/XYZ ")
    '10.1000/xyz'
    """
    if value is None:
        return None
    doi = value.strip().lower()
    changed = True
    while changed:
        changed = False
        for prefix in _DOI_PREFIXES:
            if doi.startswith(prefix):
                doi = doi[len(prefix):].strip()
                changed = True
    return doi or None


def find_doi(value: str) -> str | None:
    """Extract a DOI embedded anywhere in an identifier string."""
    m = _DOI_RE.search(value.strip())
    if not m:
        return None
    return canonical_doi(m.group(0).rstrip(".,;"))
