"""Blinded evaluation task generation with seeded randomization.

Items carry only display labels and payload text; the label-to-origin
mapping lives in a BlindingKey that is persisted separately and never
served to assessors.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field

from ..corpus import CorpusEntry
from ..prompting import SessionTranscript

PREFERENCE = "PREFERENCE"
PAIRWISE = "PAIRWISE"
CONSISTENCY = "CONSISTENCY"
TASKS = (PREFERENCE, PAIRWISE, CONSISTENCY)

PREFERENCE_LABELS = ("1", "2", "3")
PAIRWISE_LABELS = ("A", "B")


class TaskGenerationError(Exception):
    pass


class IncompleteTranscript(TaskGenerationError):
    pass


class MissingModel(TaskGenerationError):
    pass


class MissingEntry(TaskGenerationError):
    pass


@dataclass(frozen=True)
class EvalItem:
    item_id: str
    task: str
    entry_id: str
    payload: dict

    def to_dict(self) -> dict:
        return {
            "item_id": self.item_id,
            "task": self.task,
            "entry_id": self.entry_id,
            "payload": self.payload,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EvalItem":
        return cls(data["item_id"], data["task"], data["entry_id"], data["payload"])

    def labels(self) -> tuple[str, ...]:
        if self.task == PREFERENCE:
            return PREFERENCE_LABELS
        if self.task == PAIRWISE:
            return PAIRWISE_LABELS
        return ()


@dataclass
class BlindingKey:
    """Display label -> true origin, per item; stored apart from the items.

    ``meta`` records task-level provenance (model ids, seed) needed to
    unblind aggregates later.
    """

    task: str
    origins: dict[str, dict[str, str]] = field(default_factory=dict)
    entry_ids: dict[str, str] = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def origin_of(self, item_id: str, label: str) -> str:
        return self.origins[item_id][label]

    def records(self) -> list[dict]:
        return [
            {"item_id": item_id, "entry_id": self.entry_ids[item_id], "origins": origins}
            for item_id, origins in sorted(self.origins.items())
        ]

    @classmethod
    def from_records(cls, task: str, records: list[dict], meta: dict) -> "BlindingKey":
        key = cls(task=task, meta=meta)
        for record in records:
            key.origins[record["item_id"]] = dict(record["origins"])
            key.entry_ids[record["item_id"]] = record["entry_id"]
        return key


def derived_rng(seed: int, *parts: str) -> random.Random:
    """Generator keyed by (seed, parts): stable under corpus reordering."""
    digest = hashlib.sha256("|".join([str(seed), *parts]).encode("utf-8")).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def _item_id(task: str, entry_id: str) -> str:
    return f"{task.lower()}-{entry_id}"


def _by_entry(
    transcripts: list[SessionTranscript], *, turns_required: int | None = None
) -> dict[str, SessionTranscript]:
    grouped: dict[str, SessionTranscript] = {}
    for transcript in transcripts:
        if not transcript.complete:
            raise IncompleteTranscript(
                f"entry {transcript.entry_id} has an incomplete transcript"
            )
        if turns_required is not None and len(transcript.turns) != turns_required:
            raise IncompleteTranscript(
                f"entry {transcript.entry_id} has {len(transcript.turns)} turns, "
                f"need {turns_required}"
            )
        grouped[transcript.entry_id] = transcript
    return grouped


def generate_task1(
    transcripts: list[SessionTranscript], seed: int
) -> tuple[list[EvalItem], BlindingKey]:
    """Per entry, one preference item showing the three turns shuffled.

    Transcripts must all come from one model and be complete three-turn
    sessions. The same seed reproduces the same permutations byte-for-byte.
    """
    models = {t.model_id for t in transcripts}
    if len(models) != 1:
        raise TaskGenerationError(f"task 1 takes one model's transcripts, got {sorted(models)}")
    sessions = _by_entry(transcripts, turns_required=3)

    items: list[EvalItem] = []
    key = BlindingKey(task=PREFERENCE, meta={"model_id": models.pop(), "seed": seed})
    for entry_id in sorted(sessions):
        turns = sessions[entry_id].turns
        order = list(range(3))
        derived_rng(seed, "task1", entry_id).shuffle(order)
        summaries = {
            label: turns[order[i]].response_text
            for i, label in enumerate(PREFERENCE_LABELS)
        }
        origins = {
            label: turns[order[i]].turn_name for i, label in enumerate(PREFERENCE_LABELS)
        }
        item_id = _item_id(PREFERENCE, entry_id)
        items.append(EvalItem(item_id, PREFERENCE, entry_id, {"summaries": summaries}))
        key.origins[item_id] = origins
        key.entry_ids[item_id] = entry_id
    return items, key


def generate_task2(
    transcripts: list[SessionTranscript],
    seed: int,
    *,
    models: tuple[str, str] | None = None,
    corpus: list[CorpusEntry] | None = None,
) -> tuple[list[EvalItem], BlindingKey]:
    """Per entry, one blinded A/B item pairing the two models' final summaries.

    The A/B assignment is a seeded per-entry coin flip and the item list
    order is shuffled from the same seed. When a corpus is supplied, each
    payload also carries the reference summary for display.
    """
    by_model: dict[str, dict[str, SessionTranscript]] = {}
    for transcript in transcripts:
        by_model.setdefault(transcript.model_id, {})
    if models is None:
        if len(by_model) != 2:
            raise MissingModel(f"task 2 needs exactly two models, got {sorted(by_model)}")
        models = tuple(sorted(by_model))
    model_1, model_2 = models
    for model in models:
        if model not in by_model:
            raise MissingModel(f"no transcripts for model {model!r}")
    for transcript in transcripts:
        if transcript.model_id in models:
            by_model[transcript.model_id][transcript.entry_id] = transcript
            if not transcript.complete:
                raise IncompleteTranscript(
                    f"entry {transcript.entry_id} has an incomplete transcript"
                )

    references = {e.id: e.reference_summary for e in corpus} if corpus else {}
    entry_ids = sorted(set(by_model[model_1]) | set(by_model[model_2]))
    items: list[EvalItem] = []
    key = BlindingKey(task=PAIRWISE, meta={"models": list(models), "seed": seed})
    for entry_id in entry_ids:
        for model in models:
            if entry_id not in by_model[model]:
                raise MissingModel(f"model {model!r} has no transcript for entry {entry_id!r}")
        first_is_model_1 = derived_rng(seed, "task2", entry_id).random() < 0.5
        a_model, b_model = (model_1, model_2) if first_is_model_1 else (model_2, model_1)
        payload = {
            "summaries": {
                "A": by_model[a_model][entry_id].final_summary,
                "B": by_model[b_model][entry_id].final_summary,
            }
        }
        if entry_id in references:
            payload["reference"] = references[entry_id]
        item_id = _item_id(PAIRWISE, entry_id)
        items.append(EvalItem(item_id, PAIRWISE, entry_id, payload))
        key.origins[item_id] = {"A": a_model, "B": b_model}
        key.entry_ids[item_id] = entry_id
    derived_rng(seed, "task2", "__order__").shuffle(items)
    return items, key


def generate_task3(
    transcripts: list[SessionTranscript], corpus: list[CorpusEntry]
) -> list[EvalItem]:
    """Per entry, one consistency item pairing reference and final summary."""
    models = {t.model_id for t in transcripts}
    if len(models) != 1:
        raise TaskGenerationError(f"task 3 takes one model's transcripts, got {sorted(models)}")
    sessions = _by_entry(transcripts)
    references = {e.id: e.reference_summary for e in corpus}
    items = []
    for entry_id in sorted(sessions):
        if entry_id not in references:
            raise MissingEntry(f"entry {entry_id!r} not in corpus")
        items.append(
            EvalItem(
                _item_id(CONSISTENCY, entry_id),
                CONSISTENCY,
                entry_id,
                {
                    "reference": references[entry_id],
                    "candidate": sessions[entry_id].final_summary,
                },
            )
        )
    return items


def consistency_key(items: list[EvalItem], model_id: str) -> BlindingKey:
    """Key for task 3: every candidate originates from the one judged model."""
    key = BlindingKey(task=CONSISTENCY, meta={"model_id": model_id})
    for item in items:
        key.origins[item.item_id] = {"candidate": model_id}
        key.entry_ids[item.item_id] = item.entry_id
    return key
