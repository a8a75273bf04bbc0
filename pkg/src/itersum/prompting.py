"""Three-turn iterative prompting: session driver, batch runner, transcripts.

Each session sends the task instruction with the article, then the
keyword-constrained refinement, then the length-constrained compression,
carrying the full chat history into every turn. Transcripts are persisted
one file per (entry, model) plus a batch manifest.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .corpus import CorpusEntry, count_sentences
from .llm_client import AuthError, ChatMessage, LlmClientError, ModelConfig

TURN_1_TEMPLATE = "Summarize the following text related to food effect studies.\n{article}"
TURN_2_TEMPLATE = "Add facts of AUC, Cmax, and Tmax in the summary."
TURN_3_TEMPLATE = "Summarize it in 2-3 sentences and keep the detail of AUC, Cmax, and Tmax."

DEFAULT_KEYWORDS = ("AUC", "Cmax", "Tmax")

MANIFEST_NAME = "manifest.json"


class PromptingError(Exception):
    pass


class EmptyCorpus(PromptingError):
    pass


class BatchConfigMismatch(PromptingError):
    """Existing manifest was produced under different corpus/script/seed."""


@dataclass(frozen=True)
class TurnTemplate:
    name: str
    template: str


@dataclass(frozen=True)
class PromptScript:
    name: str
    turns: tuple[TurnTemplate, ...]
    length_min: int
    length_max: int
    keywords: tuple[str, ...] = DEFAULT_KEYWORDS

    def __post_init__(self):
        if not self.turns:
            raise ValueError("script must have at least one turn")
        with_placeholder = [t.name for t in self.turns if "{article}" in t.template]
        if with_placeholder != [self.turns[0].name]:
            raise ValueError("exactly the first turn's template must contain {article}")
        if not 1 <= self.length_min <= self.length_max:
            raise ValueError("need 1 <= length_min <= length_max")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "turns": [{"name": t.name, "template": t.template} for t in self.turns],
            "length_min": self.length_min,
            "length_max": self.length_max,
            "keywords": list(self.keywords),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PromptScript":
        return cls(
            name=data["name"],
            turns=tuple(TurnTemplate(t["name"], t["template"]) for t in data["turns"]),
            length_min=data["length_min"],
            length_max=data["length_max"],
            keywords=tuple(data.get("keywords", DEFAULT_KEYWORDS)),
        )


def default_script() -> PromptScript:
    """The canonical three-turn script with a 2-3 sentence target length."""
    return PromptScript(
        name="three-turn",
        turns=(
            TurnTemplate("turn1", TURN_1_TEMPLATE),
            TurnTemplate("turn2", TURN_2_TEMPLATE),
            TurnTemplate("turn3", TURN_3_TEMPLATE),
        ),
        length_min=2,
        length_max=3,
    )


def render_turn_prompt(template: str, article: str) -> str:
    # replace() rather than str.format so braces in the article are inert
    return template.replace("{article}", article)


@dataclass(frozen=True)
class TurnRecord:
    turn_name: str
    prompt_text: str
    response_text: str
    request_message_count: int
    timestamp: str

    def to_dict(self) -> dict:
        return {
            "turn_name": self.turn_name,
            "prompt_text": self.prompt_text,
            "response_text": self.response_text,
            "request_message_count": self.request_message_count,
            "timestamp": self.timestamp,
        }


@dataclass(frozen=True)
class SessionTranscript:
    entry_id: str
    model_id: str
    script_name: str
    seed: int
    turns: tuple[TurnRecord, ...]
    final_summary: str
    complete: bool = True
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "entry_id": self.entry_id,
            "model_id": self.model_id,
            "script_name": self.script_name,
            "seed": self.seed,
            "turns": [t.to_dict() for t in self.turns],
            "final_summary": self.final_summary,
            "complete": self.complete,
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SessionTranscript":
        return cls(
            entry_id=data["entry_id"],
            model_id=data["model_id"],
            script_name=data["script_name"],
            seed=data["seed"],
            turns=tuple(TurnRecord(**t) for t in data["turns"]),
            final_summary=data["final_summary"],
            complete=data["complete"],
            error=data.get("error"),
        )


def _utc_now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


def run_session(
    client,
    config: ModelConfig,
    entry: CorpusEntry,
    script: PromptScript,
    *,
    seed: int = 0,
    clock=_utc_now_iso,
) -> SessionTranscript:
    """Drive one strictly sequential multi-turn session for one entry.

    Turn k sends all prior user/assistant pairs plus the new prompt, so its
    request holds 2k-1 messages. A client failure ends the session early;
    the partial transcript is returned flagged incomplete, with the error
    annotated by entry and turn.
    """
    history: list[ChatMessage] = []
    records: list[TurnRecord] = []
    error: str | None = None
    for turn in script.turns:
        prompt = render_turn_prompt(turn.template, entry.article)
        request = history + [ChatMessage("user", prompt)]
        try:
            reply = client.complete(config, request)
        except AuthError as exc:
            # a bad credential dooms every call; no point recording and moving on
            raise AuthError(f"entry {entry.id}, {turn.name}: {exc}") from exc
        except LlmClientError as exc:
            error = f"entry {entry.id}, {turn.name}: {exc}"
            break
        records.append(
            TurnRecord(turn.name, prompt, reply.content, len(request), clock())
        )
        history = request + [reply]
    complete = len(records) == len(script.turns)
    return SessionTranscript(
        entry_id=entry.id,
        model_id=config.model_id,
        script_name=script.name,
        seed=seed,
        turns=tuple(records),
        final_summary=records[-1].response_text if complete else "",
        complete=complete,
        error=error,
    )


def check_length_compliance(summary: str, script: PromptScript) -> dict:
    """Report whether a summary's sentence count falls inside the script bounds."""
    count = count_sentences(summary)
    return {
        "compliant": script.length_min <= count <= script.length_max,
        "sentence_count": count,
    }


def length_compliance_rate(summaries: list[str], script: PromptScript) -> float:
    if not summaries:
        raise ValueError("no summaries to check")
    hits = sum(1 for s in summaries if check_length_compliance(s, script)["compliant"])
    return hits / len(summaries)


def corpus_digest(corpus: list[CorpusEntry]) -> str:
    """SHA-256 over the canonical serialized corpus."""
    canonical = "\n".join(
        json.dumps(e.to_dict(), ensure_ascii=False, sort_keys=True) for e in corpus
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _atomic_write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dump_json(data) -> str:
    return json.dumps(data, ensure_ascii=False, sort_keys=True, indent=2) + "\n"


def transcript_path(out_dir: str | Path, model_id: str, entry_id: str) -> Path:
    return Path(out_dir) / model_id / f"{entry_id}.json"


def write_transcript(out_dir: str | Path, transcript: SessionTranscript) -> Path:
    path = transcript_path(out_dir, transcript.model_id, transcript.entry_id)
    _atomic_write_text(path, _dump_json(transcript.to_dict()))
    return path


def read_transcript(path: str | Path) -> SessionTranscript:
    return SessionTranscript.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def load_transcripts(out_dir: str | Path) -> list[SessionTranscript]:
    """Read every persisted transcript under out_dir, sorted for stable output."""
    out_dir = Path(out_dir)
    found = []
    for path in sorted(out_dir.glob("*/*.json")):
        found.append(read_transcript(path))
    found.sort(key=lambda t: (t.model_id, t.entry_id))
    return found


def run_batch(
    client,
    configs: list[ModelConfig],
    corpus: list[CorpusEntry],
    script: PromptScript,
    seed: int,
    out_dir: str | Path,
    *,
    clock=_utc_now_iso,
) -> list[SessionTranscript]:
    """Run (or resume) one session per (entry, config) and persist everything.

    Already-completed (entry, model) pairs recorded in the manifest are
    loaded from disk and skipped; failed ones are retried. Session failures
    are recorded in the manifest without aborting the batch.
    """
    if not corpus:
        raise EmptyCorpus("corpus must be non-empty")
    for config in configs:
        if os.sep in config.model_id or config.model_id in (".", ".."):
            raise ValueError(f"model_id {config.model_id!r} is not filesystem-safe")

    out_dir = Path(out_dir)
    digest = corpus_digest(corpus)
    manifest = _load_or_init_manifest(out_dir, digest, script, configs, seed, clock)

    transcripts: list[SessionTranscript] = []
    for config in configs:
        sessions = manifest["sessions"].setdefault(config.model_id, {})
        for entry in corpus:
            state = sessions.get(entry.id)
            if state and state["status"] == "completed":
                transcripts.append(
                    read_transcript(transcript_path(out_dir, config.model_id, entry.id))
                )
                continue
            transcript = run_session(
                client, config, entry, script, seed=seed, clock=clock
            )
            write_transcript(out_dir, transcript)
            sessions[entry.id] = {
                "status": "completed" if transcript.complete else "failed",
                "error": transcript.error,
                "timestamp": clock(),
            }
            _atomic_write_text(out_dir / MANIFEST_NAME, _dump_json(manifest))
            transcripts.append(transcript)
    return transcripts


def _load_or_init_manifest(out_dir, digest, script, configs, seed, clock):
    path = out_dir / MANIFEST_NAME
    config_dicts = [c.public_dict() for c in configs]
    if path.exists():
        manifest = json.loads(path.read_text(encoding="utf-8"))
        same = (
            manifest["corpus_digest"] == digest
            and manifest["script"] == script.to_dict()
            and manifest["seed"] == seed
        )
        if not same:
            raise BatchConfigMismatch(
                f"{path} was produced with a different corpus, script, or seed"
            )
        known = {c["model_id"] for c in manifest["configs"]}
        for c in config_dicts:
            if c["model_id"] not in known:
                manifest["configs"].append(c)
        return manifest
    manifest = {
        "corpus_digest": digest,
        "script": script.to_dict(),
        "configs": config_dicts,
        "seed": seed,
        "created_at": clock(),
        "sessions": {},
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    _atomic_write_text(path, _dump_json(manifest))
    return manifest


def read_manifest(out_dir: str | Path) -> dict:
    return json.loads((Path(out_dir) / MANIFEST_NAME).read_text(encoding="utf-8"))
