"""File-backed data store: one directory holds every pipeline artifact.

Layout under the data dir:

    corpus.jsonl                 ingested corpus (canonical serialization)
    transcripts/<model>/<id>.json, transcripts/manifest.json
    tasks/items_<task>.jsonl     blinded items, server order
    keys/key_<task>.jsonl        blinding keys; this directory is never served
    keys/meta_<task>.json        task-level provenance (models, seed)
    annotations.jsonl            append-only assessor submissions
    judge/pairwise.jsonl, judge/consistency.jsonl
    config/assessors.json        assessor id -> bearer token
"""

from __future__ import annotations

import json
import threading
from datetime import datetime, timezone
from pathlib import Path

from ..corpus import CorpusEntry, load_corpus
from ..human_eval import (
    AnnotationRecord,
    BlindingKey,
    CONSISTENCY,
    EvalItem,
    PAIRWISE,
    PREFERENCE,
    validate_selection,
)

TASK_ALIASES = {
    "1": PREFERENCE,
    "2": PAIRWISE,
    "3": CONSISTENCY,
    "preference": PREFERENCE,
    "pairwise": PAIRWISE,
    "consistency": CONSISTENCY,
}


class StoreError(Exception):
    pass


class UnknownAssessor(StoreError):
    pass


class UnknownTask(StoreError):
    pass


class TaskNotGenerated(StoreError):
    pass


class Duplicate(StoreError):
    """A second submission for the same (assessor, item); first write wins."""


class UnknownItemId(StoreError):
    pass


def resolve_task(task: str) -> str:
    name = TASK_ALIASES.get(str(task).lower())
    if name is None:
        raise UnknownTask(f"unknown task {task!r}; use 1|2|3 or a task name")
    return name


def _utc_now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


def _read_jsonl(path: Path) -> list[dict]:
    records = []
    with path.open(encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records


def _write_jsonl(path: Path, records: list[dict]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    text = "".join(
        json.dumps(r, ensure_ascii=False, sort_keys=True) + "\n" for r in records
    )
    path.write_text(text, encoding="utf-8")


class DataStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self._write_lock = threading.Lock()
        self._submitted: set[tuple[str, str]] | None = None

    # --- paths ---------------------------------------------------------

    @property
    def corpus_path(self) -> Path:
        return self.root / "corpus.jsonl"

    @property
    def transcripts_dir(self) -> Path:
        return self.root / "transcripts"

    @property
    def tasks_dir(self) -> Path:
        return self.root / "tasks"

    @property
    def keys_dir(self) -> Path:
        return self.root / "keys"

    @property
    def annotations_path(self) -> Path:
        return self.root / "annotations.jsonl"

    @property
    def judge_dir(self) -> Path:
        return self.root / "judge"

    @property
    def credentials_path(self) -> Path:
        return self.root / "config" / "assessors.json"

    def items_path(self, task: str) -> Path:
        return self.tasks_dir / f"items_{task.lower()}.jsonl"

    def key_path(self, task: str) -> Path:
        return self.keys_dir / f"key_{task.lower()}.jsonl"

    def key_meta_path(self, task: str) -> Path:
        return self.keys_dir / f"meta_{task.lower()}.json"

    # --- corpus --------------------------------------------------------

    def load_corpus(self) -> list[CorpusEntry]:
        if not self.corpus_path.exists():
            raise StoreError(f"no corpus at {self.corpus_path}; run ingest first")
        return load_corpus(self.corpus_path)

    # --- tasks and keys -------------------------------------------------

    def write_task(self, items: list[EvalItem], key: BlindingKey | None) -> None:
        if not items:
            raise StoreError("refusing to write an empty task")
        task = items[0].task
        _write_jsonl(self.items_path(task), [item.to_dict() for item in items])
        if key is not None:
            _write_jsonl(self.key_path(task), key.records())
            self.key_meta_path(task).write_text(
                json.dumps(key.meta, ensure_ascii=False, sort_keys=True, indent=2) + "\n",
                encoding="utf-8",
            )

    def load_items(self, task: str) -> list[EvalItem]:
        task = resolve_task(task)
        path = self.items_path(task)
        if not path.exists():
            raise TaskNotGenerated(f"task {task} has not been generated")
        return [EvalItem.from_dict(r) for r in _read_jsonl(path)]

    def load_key(self, task: str) -> BlindingKey:
        task = resolve_task(task)
        path = self.key_path(task)
        if not path.exists():
            raise TaskNotGenerated(f"no blinding key for task {task}")
        meta = {}
        if self.key_meta_path(task).exists():
            meta = json.loads(self.key_meta_path(task).read_text(encoding="utf-8"))
        return BlindingKey.from_records(task, _read_jsonl(path), meta)

    def generated_tasks(self) -> list[str]:
        return [t for t in (PREFERENCE, PAIRWISE, CONSISTENCY) if self.items_path(t).exists()]

    # --- assessors -------------------------------------------------------

    def assessors(self) -> dict[str, str]:
        if not self.credentials_path.exists():
            return {}
        return json.loads(self.credentials_path.read_text(encoding="utf-8"))

    def require_assessor(self, assessor_id: str) -> str:
        """Return the assessor's token; raise if the id is not configured."""
        assessors = self.assessors()
        if assessor_id not in assessors:
            raise UnknownAssessor(f"assessor {assessor_id!r} is not configured")
        return assessors[assessor_id]

    # --- annotations -----------------------------------------------------

    def annotations(self) -> list[AnnotationRecord]:
        if not self.annotations_path.exists():
            return []
        return [AnnotationRecord.from_dict(r) for r in _read_jsonl(self.annotations_path)]

    def _submitted_pairs(self) -> set[tuple[str, str]]:
        if self._submitted is None:
            self._submitted = {
                (r.assessor_id, r.item_id) for r in self.annotations()
            }
        return self._submitted

    def _find_item(self, item_id: str) -> EvalItem:
        for task in self.generated_tasks():
            for item in self.load_items(task):
                if item.item_id == item_id:
                    return item
        raise UnknownItemId(f"no item {item_id!r} in any generated task")

    def append_annotation(
        self, record: AnnotationRecord, *, clock=_utc_now_iso
    ) -> AnnotationRecord:
        """Validate and append one submission; duplicates are rejected."""
        item = self._find_item(record.item_id)
        validate_selection(item, record.selection)
        stamped = AnnotationRecord(
            assessor_id=record.assessor_id,
            item_id=record.item_id,
            selection=record.selection,
            justification=record.justification,
            timestamp=record.timestamp or clock(),
        )
        with self._write_lock:
            pair = (record.assessor_id, record.item_id)
            if pair in self._submitted_pairs():
                raise Duplicate(
                    f"assessor {record.assessor_id!r} already annotated {record.item_id!r}"
                )
            line = json.dumps(stamped.to_dict(), ensure_ascii=False, sort_keys=True)
            with self.annotations_path.open("a", encoding="utf-8") as handle:
                handle.write(line + "\n")
                handle.flush()
            self._submitted_pairs().add(pair)
        return stamped

    # --- views -----------------------------------------------------------

    def pending_for(self, assessor_id: str, task: str) -> list[EvalItem]:
        """Items the assessor has not yet annotated, in stored order."""
        self.require_assessor(assessor_id)
        items = self.load_items(task)
        done = {
            item_id for a, item_id in self._submitted_pairs() if a == assessor_id
        }
        return [item for item in items if item.item_id not in done]

    def progress(self, assessor_id: str) -> dict:
        self.require_assessor(assessor_id)
        tasks = {}
        for task in self.generated_tasks():
            items = self.load_items(task)
            done = {
                item_id for a, item_id in self._submitted_pairs() if a == assessor_id
            }
            remaining = [i.item_id for i in items if i.item_id not in done]
            tasks[task] = {
                "total": len(items),
                "completed": len(items) - len(remaining),
                "remaining": remaining,
            }
        return {"assessor_id": assessor_id, "tasks": tasks}

    # --- judge artifacts ---------------------------------------------------

    def write_judge_records(self, kind: str, records: list[dict]) -> None:
        _write_jsonl(self.judge_dir / f"{kind}.jsonl", records)

    def judge_records(self, kind: str) -> list[dict]:
        path = self.judge_dir / f"{kind}.jsonl"
        if not path.exists():
            return []
        return _read_jsonl(path)
