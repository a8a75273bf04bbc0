"""Reference-based ROUGE scoring with fixed tokenization and aggregation.

Reports F1 alongside precision and recall for ROUGE-1, ROUGE-2, and
ROUGE-L (whole-summary LCS). No stemming, no stopword removal; the single
tokenizer below is the only preprocessing, so results are reproducible
run-to-run.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass

from .corpus import CorpusEntry
from .prompting import SessionTranscript

# Maximal runs of Unicode letters/digits; underscores split, so a
# subscript-styled "C_max" yields ["c", "max"] while "Cmax" stays one token.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


class MissingEntry(Exception):
    """A transcript references an entry id absent from the corpus."""


@dataclass(frozen=True)
class RougeScore:
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_counts(cls, match: float, candidate_total: int, reference_total: int) -> "RougeScore":
        p = match / candidate_total if candidate_total > 0 else 0.0
        r = match / reference_total if reference_total > 0 else 0.0
        f1 = 2 * p * r / (p + r) if p + r > 0 else 0.0
        return cls(p, r, f1)

    def to_dict(self) -> dict:
        return {"precision": self.precision, "recall": self.recall, "f1": self.f1}


def tokenize(text: str) -> list[str]:
    """Lowercase and split into letter/digit runs; everything else separates."""
    return _TOKEN_RE.findall(text.lower())


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def rouge_n(candidate: str, reference: str, n: int) -> RougeScore:
    """Clipped n-gram overlap between candidate and reference."""
    if n < 1:
        raise ValueError("n must be >= 1")
    cand = _ngrams(tokenize(candidate), n)
    ref = _ngrams(tokenize(reference), n)
    match = sum(min(count, ref[gram]) for gram, count in cand.items())
    return RougeScore.from_counts(match, sum(cand.values()), sum(ref.values()))


def rouge_l(candidate: str, reference: str) -> RougeScore:
    """LCS-based overlap over whole-text token sequences."""
    cand = tokenize(candidate)
    ref = tokenize(reference)
    return RougeScore.from_counts(_lcs_length(cand, ref), len(cand), len(ref))


def _lcs_length(xs: list[str], ys: list[str]) -> int:
    # single-row dynamic program
    if not xs or not ys:
        return 0
    row = [0] * (len(ys) + 1)
    for x in xs:
        prev = 0
        for j, y in enumerate(ys, start=1):
            current = row[j]
            row[j] = prev + 1 if x == y else max(row[j], row[j - 1])
            prev = current
    return row[-1]


@dataclass(frozen=True)
class RougeCell:
    rouge1: RougeScore
    rouge2: RougeScore
    rougeL: RougeScore
    n: int

    def to_dict(self) -> dict:
        return {
            "rouge1": self.rouge1.to_dict(),
            "rouge2": self.rouge2.to_dict(),
            "rougeL": self.rougeL.to_dict(),
            "n": self.n,
        }


@dataclass
class RougeTable:
    rows: dict[tuple[str, str], RougeCell]
    skipped_incomplete: int = 0

    def to_dict(self) -> dict:
        return {
            "rows": [
                {"model_id": model, "turn_name": turn, **cell.to_dict()}
                for (model, turn), cell in sorted(self.rows.items())
            ],
            "skipped_incomplete": self.skipped_incomplete,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, sort_keys=True, indent=2)

    def render_text(self) -> str:
        """Fixed-width table: rows are turns, columns models, cells R1/R2/RL.

        Cells print F1 x 100 to two decimals, the layout used for published
        per-turn comparisons.
        """
        models = sorted({model for model, _ in self.rows})
        turns = sorted({turn for _, turn in self.rows})
        if not models:
            return "(no scored transcripts)"

        def cell(model: str, turn: str) -> str:
            entry = self.rows.get((model, turn))
            if entry is None:
                return "-"
            return "/".join(
                f"{score.f1 * 100:.2f}"
                for score in (entry.rouge1, entry.rouge2, entry.rougeL)
            )

        header = ["turn"] + models
        body = [[turn] + [cell(model, turn) for model in models] for turn in turns]
        widths = [
            max(len(row[i]) for row in [header] + body) for i in range(len(header))
        ]
        lines = ["ROUGE-1/2/L (F1 x 100)"]
        for row in [header] + body:
            lines.append("  ".join(value.ljust(widths[i]) for i, value in enumerate(row)))
        return "\n".join(lines)


def score_transcripts(
    transcripts: list[SessionTranscript], corpus: list[CorpusEntry]
) -> RougeTable:
    """Score every turn of every completed transcript against its reference.

    Cell values are unweighted arithmetic means over entries; incomplete
    transcripts are skipped and counted in ``skipped_incomplete``.
    """
    references = {entry.id: entry.reference_summary for entry in corpus}
    sums: dict[tuple[str, str], list] = {}
    skipped = 0
    for transcript in sorted(transcripts, key=lambda t: (t.model_id, t.entry_id)):
        if transcript.entry_id not in references:
            raise MissingEntry(f"transcript references unknown entry {transcript.entry_id!r}")
        if not transcript.complete:
            skipped += 1
            continue
        reference = references[transcript.entry_id]
        for turn in transcript.turns:
            scores = (
                rouge_n(turn.response_text, reference, 1),
                rouge_n(turn.response_text, reference, 2),
                rouge_l(turn.response_text, reference),
            )
            bucket = sums.setdefault(
                (transcript.model_id, turn.turn_name), [[0.0] * 3, [0.0] * 3, [0.0] * 3, 0]
            )
            for i, score in enumerate(scores):
                bucket[i][0] += score.precision
                bucket[i][1] += score.recall
                bucket[i][2] += score.f1
            bucket[3] += 1

    rows = {}
    for key, (s1, s2, sl, n) in sums.items():
        rows[key] = RougeCell(
            rouge1=RougeScore(*(v / n for v in s1)),
            rouge2=RougeScore(*(v / n for v in s2)),
            rougeL=RougeScore(*(v / n for v in sl)),
            n=n,
        )
    return RougeTable(rows=rows, skipped_incomplete=skipped)
