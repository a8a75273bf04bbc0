"""Annotation records, selection validation, majority voting, distributions."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .tasks import (
    BlindingKey,
    CONSISTENCY,
    EvalItem,
    PAIRWISE,
    PREFERENCE,
)

PAIRWISE_CHOICES = ("A", "B", "TIE")
CONSISTENCY_CHOICES = ("YES", "NO")

MODEL_1_WON = "MODEL_1_WON"
MODEL_2_WON = "MODEL_2_WON"
TIE = "TIE"


class VoteError(Exception):
    pass


class VoteCountMismatch(VoteError):
    pass


class UnknownItem(VoteError):
    pass


class ValidationError(VoteError):
    """Selection does not fit the item's task or label set."""


@dataclass(frozen=True)
class AnnotationRecord:
    assessor_id: str
    item_id: str
    selection: dict | str  # PREFERENCE: {"most": [...], "least": [...]}; else a choice string
    justification: str | None = None
    timestamp: str = ""

    def to_dict(self) -> dict:
        return {
            "assessor_id": self.assessor_id,
            "item_id": self.item_id,
            "selection": self.selection,
            "justification": self.justification,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AnnotationRecord":
        return cls(
            assessor_id=data["assessor_id"],
            item_id=data["item_id"],
            selection=data["selection"],
            justification=data.get("justification"),
            timestamp=data.get("timestamp", ""),
        )


def validate_selection(item: EvalItem, selection) -> None:
    """Raise ValidationError unless the selection is legal for the item."""
    if item.task == PREFERENCE:
        if not isinstance(selection, dict) or set(selection) != {"most", "least"}:
            raise ValidationError("preference selection needs 'most' and 'least' lists")
        most, least = selection["most"], selection["least"]
        if not isinstance(most, list) or not isinstance(least, list):
            raise ValidationError("'most' and 'least' must be lists of labels")
        labels = set(item.labels())
        if not set(most) <= labels or not set(least) <= labels:
            raise ValidationError(f"labels must be drawn from {sorted(labels)}")
        if len(set(most)) != len(most) or len(set(least)) != len(least):
            raise ValidationError("labels may not repeat within a selection")
        if not most:
            raise ValidationError("'most' may not be empty")
        if set(most) & set(least):
            raise ValidationError("'most' and 'least' must be disjoint")
    elif item.task == PAIRWISE:
        if selection not in PAIRWISE_CHOICES:
            raise ValidationError(f"pairwise selection must be one of {PAIRWISE_CHOICES}")
    elif item.task == CONSISTENCY:
        if selection not in CONSISTENCY_CHOICES:
            raise ValidationError(f"consistency selection must be one of {CONSISTENCY_CHOICES}")
    else:
        raise ValidationError(f"unknown task {item.task!r}")


def unblind_pairwise_vote(vote: str, key: BlindingKey, item_id: str) -> str:
    """Map a display-label vote to the model behind it; ties pass through."""
    if item_id not in key.origins:
        raise UnknownItem(f"no key entry for item {item_id!r}")
    if vote == "TIE":
        return TIE
    return key.origin_of(item_id, vote)


def majority_vote_pairwise(
    votes: list[str], key: BlindingKey, item_id: str, *, panel_size: int = 3
) -> str:
    """Aggregate one item's panel votes after unblinding.

    A value held by a strict majority wins; otherwise the result is TIE,
    which at the default panel of three reduces to the rule that three
    mutually different votes resolve to a tie.
    """
    if panel_size < 1 or panel_size % 2 == 0:
        raise ValueError("panel_size must be a positive odd number")
    if len(votes) != panel_size:
        raise VoteCountMismatch(f"need exactly {panel_size} votes, got {len(votes)}")
    unblinded = [unblind_pairwise_vote(v, key, item_id) for v in votes]
    value, count = Counter(unblinded).most_common(1)[0]
    if count <= panel_size // 2:
        return TIE
    if value == TIE:
        return TIE
    model_1, model_2 = key.meta["models"]
    if value == model_1:
        return MODEL_1_WON
    if value == model_2:
        return MODEL_2_WON
    raise UnknownItem(f"origin {value!r} is not one of the task's models")


def majority_vote_consistency(votes: list[str], *, panel_size: int = 3) -> str:
    if panel_size < 1 or panel_size % 2 == 0:
        raise ValueError("panel_size must be a positive odd number")
    if len(votes) != panel_size:
        raise VoteCountMismatch(f"need exactly {panel_size} votes, got {len(votes)}")
    for vote in votes:
        if vote not in CONSISTENCY_CHOICES:
            raise ValidationError(f"consistency vote must be one of {CONSISTENCY_CHOICES}")
    value, count = Counter(votes).most_common(1)[0]
    if count <= panel_size // 2:
        raise VoteCountMismatch("no majority; is panel_size even?")
    return value


def vote_distribution_task1(
    records: list[AnnotationRecord], key: BlindingKey, *, panel_size: int = 3
) -> dict:
    """Per-turn counts of most/least votes plus unanimous-most entries.

    Each assessor contributes one count per selected turn (multi-select
    counts each turn once); an empty least set contributes nothing. An
    entry is unanimous for a turn when every panel member's most set
    contains it.
    """
    turn_names = sorted({t for origins in key.origins.values() for t in origins.values()})
    most: Counter = Counter()
    least: Counter = Counter()
    by_item: dict[str, list[AnnotationRecord]] = {}
    for record in records:
        if record.item_id not in key.origins:
            raise UnknownItem(f"no key entry for item {record.item_id!r}")
        origins = key.origins[record.item_id]
        for label in record.selection["most"]:
            most[origins[label]] += 1
        for label in record.selection["least"]:
            least[origins[label]] += 1
        by_item.setdefault(record.item_id, []).append(record)

    unanimous: Counter = Counter()
    for item_id, item_records in by_item.items():
        if len(item_records) != panel_size:
            continue
        origins = key.origins[item_id]
        for turn in turn_names:
            if all(
                turn in {origins[label] for label in r.selection["most"]}
                for r in item_records
            ):
                unanimous[turn] += 1

    return {
        "most": {t: most.get(t, 0) for t in turn_names},
        "least": {t: least.get(t, 0) for t in turn_names},
        "unanimous_most": {t: unanimous.get(t, 0) for t in turn_names},
    }
