"""Corpus loading, validation, and text measurement utilities.

A corpus file is line-delimited JSON (UTF-8, LF): one object per line with
fields ``id``, ``article``, ``reference_summary``, and an optional flat
string map ``metadata``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

# Flat token cost charged for the instruction wrapper around the article.
PROMPT_OVERHEAD_TOKENS = 64

# Closed list of protected abbreviations for sentence counting. Unknown
# abbreviations over-count rather than crash.
ABBREVIATIONS = ("e.g.", "i.e.", "vs.", "Fig.", "et al.", "approx.", "Dr.", "No.")

_TERMINATORS = ".!?"


class CorpusError(Exception):
    """Base class for corpus file problems."""


class IoError(CorpusError):
    """Corpus path missing or unreadable."""


class FormatError(CorpusError):
    """Malformed record; carries the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class DuplicateId(CorpusError):
    """Repeated entry id; carries the line of the second occurrence."""

    def __init__(self, line_no: int, entry_id: str):
        super().__init__(f"line {line_no}: duplicate id {entry_id!r}")
        self.line_no = line_no
        self.entry_id = entry_id


@dataclass(frozen=True)
class CorpusEntry:
    """One drug: the annotated food-effect text and its labeling summary."""

    id: str
    article: str
    reference_summary: str
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.id:
            raise ValueError("entry id must be non-empty")

    def to_dict(self) -> dict:
        record = {
            "id": self.id,
            "article": self.article,
            "reference_summary": self.reference_summary,
        }
        if self.metadata:
            record["metadata"] = dict(self.metadata)
        return record


@dataclass(frozen=True)
class Issue:
    code: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    entry_id: str
    ok: bool
    issues: tuple[Issue, ...]
    token_estimate: int
    reference_sentence_count: int


def load_corpus(path: str | Path) -> list[CorpusEntry]:
    """Parse a corpus file into entries, preserving file order.

    Raises IoError, FormatError (with line number), or DuplicateId (with the
    line of the repeated occurrence). Blank lines are skipped.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read corpus file {path}: {exc}") from exc

    entries: list[CorpusEntry] = []
    seen: dict[str, int] = {}
    # LF is the record separator; splitlines() would also break on
    # Unicode line separators that are legal inside JSON strings.
    for line_no, line in enumerate(text.split("\n"), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FormatError(line_no, f"invalid JSON: {exc.msg}") from exc
        entries.append(_parse_record(record, line_no, seen))
    return entries


def save_corpus(entries: list[CorpusEntry], path: str | Path) -> None:
    """Write entries in the on-disk format; load_corpus(save_corpus(x)) == x."""
    path = Path(path)
    lines = [json.dumps(e.to_dict(), ensure_ascii=False, sort_keys=True) for e in entries]
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")


def _parse_record(record, line_no: int, seen: dict[str, int]) -> CorpusEntry:
    if not isinstance(record, dict):
        raise FormatError(line_no, "record is not an object")
    for name in ("id", "article", "reference_summary"):
        if name not in record:
            raise FormatError(line_no, f"missing field {name!r}")
        if not isinstance(record[name], str):
            raise FormatError(line_no, f"field {name!r} is not a string")
    entry_id = record["id"]
    if not entry_id:
        raise FormatError(line_no, "field 'id' is empty")
    if entry_id in seen:
        raise DuplicateId(line_no, entry_id)
    seen[entry_id] = line_no
    metadata = record.get("metadata", {})
    if not isinstance(metadata, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in metadata.items()
    ):
        raise FormatError(line_no, "field 'metadata' is not a flat string map")
    return CorpusEntry(
        id=entry_id,
        article=record["article"],
        reference_summary=record["reference_summary"],
        metadata=metadata,
    )


def validate_entry(entry: CorpusEntry, budget: int) -> ValidationReport:
    """Check an entry against the token budget and emptiness rules.

    Always returns a report; ``ok`` is true iff no issues were found.
    """
    if budget <= 0:
        raise ValueError("budget must be positive")
    issues: list[Issue] = []
    if not entry.article.strip():
        issues.append(Issue("EMPTY_ARTICLE", "article is blank"))
    if not entry.reference_summary.strip():
        issues.append(Issue("EMPTY_REFERENCE", "reference summary is blank"))
    token_estimate = estimate_tokens(entry.article)
    total = token_estimate + PROMPT_OVERHEAD_TOKENS
    if total > budget:
        issues.append(
            Issue(
                "TOKEN_BUDGET_EXCEEDED",
                f"estimated {token_estimate} tokens + {PROMPT_OVERHEAD_TOKENS} "
                f"prompt overhead = {total} > budget {budget}",
            )
        )
    return ValidationReport(
        entry_id=entry.id,
        ok=not issues,
        issues=tuple(issues),
        token_estimate=token_estimate,
        reference_sentence_count=count_sentences(entry.reference_summary),
    )


def estimate_tokens(text: str) -> int:
    """Estimate tokens as ceil(4/3 x word count); words are whitespace runs."""
    words = len(text.split())
    return (4 * words + 2) // 3


def count_sentences(text: str) -> int:
    """Count sentences using a fixed, deterministic boundary rule.

    A terminator ('.', '!', '?') ends a sentence when followed by whitespace
    then an uppercase letter, or by nothing but trailing whitespace. Periods
    inside decimal numbers and after the protected abbreviations do not
    count. Non-blank text with no qualifying terminator counts as one.
    """
    if not text.strip():
        return 0
    boundaries = []
    for i, ch in enumerate(text):
        if ch not in _TERMINATORS:
            continue
        if ch == "." and (_is_decimal_point(text, i) or _is_abbreviation(text, i)):
            continue
        if _is_boundary(text, i):
            boundaries.append(i)
    if not boundaries:
        return 1
    count = len(boundaries)
    if text[boundaries[-1] + 1 :].strip():
        count += 1  # trailing unterminated fragment
    return count


def _is_decimal_point(text: str, i: int) -> bool:
    return 0 < i < len(text) - 1 and text[i - 1].isdigit() and text[i + 1].isdigit()


def _is_abbreviation(text: str, i: int) -> bool:
    head = text[: i + 1]
    for abbr in ABBREVIATIONS:
        if not head.endswith(abbr):
            continue
        start = len(head) - len(abbr)
        if start == 0 or not text[start - 1].isalnum():
            return True
    return False


def _is_boundary(text: str, i: int) -> bool:
    rest = text[i + 1 :]
    if not rest.strip():
        return True
    if not rest[0].isspace():
        return False
    return rest.lstrip()[0].isupper()
