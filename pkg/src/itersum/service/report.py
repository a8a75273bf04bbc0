"""Final report assembly: every available section, deterministically.

Sections are built only from persisted artifacts, so two runs over the same
data directory produce byte-identical output. Missing inputs leave a
section empty with a reason rather than failing the whole report.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..corpus import count_sentences
from ..human_eval import (
    AgreementStats,
    AnnotationRecord,
    BlindingKey,
    CONSISTENCY,
    DegenerateInput,
    InsufficientData,
    MODEL_1_WON,
    MODEL_2_WON,
    NoCommonEntries,
    PAIRWISE,
    PREFERENCE,
    TIE,
    UndefinedAlpha,
    agreement_overlap,
    kendall_tau,
    krippendorff_alpha,
    majority_vote_consistency,
    majority_vote_pairwise,
    task1_alpha_encoding,
    unblind_pairwise_vote,
    vote_distribution_task1,
)
from ..metrics import MissingEntry, RougeTable, rouge_l, score_transcripts
from ..prompting import (
    MANIFEST_NAME,
    PromptScript,
    default_script,
    load_transcripts,
    read_manifest,
)
from .store import DataStore, StoreError, TaskNotGenerated

PANEL_SIZE = 3


@dataclass
class MetricReport:
    rouge_table: RougeTable | None = None
    length_compliance: dict | None = None
    task1_distribution: dict | None = None
    pairwise_win_rates: dict = field(default_factory=dict)
    consistency_rates: dict = field(default_factory=dict)
    agreement: AgreementStats = field(default_factory=AgreementStats)
    provenance: dict = field(default_factory=dict)
    reasons: dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "rouge_table": self.rouge_table.to_dict() if self.rouge_table else None,
            "length_compliance": self.length_compliance,
            "task1_distribution": self.task1_distribution,
            "pairwise_win_rates": self.pairwise_win_rates,
            "consistency_rates": self.consistency_rates,
            "agreement": self.agreement.to_dict(),
            "provenance": self.provenance,
            "reasons": dict(sorted(self.reasons.items())),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, sort_keys=True, indent=2) + "\n"


def _records_for(store: DataStore, task: str) -> tuple[list[AnnotationRecord], BlindingKey] | None:
    try:
        key = store.load_key(task)
    except TaskNotGenerated:
        return None
    records = [r for r in store.annotations() if r.item_id in key.origins]
    return records, key


def _full_panels(records: list[AnnotationRecord]) -> dict[str, list[AnnotationRecord]]:
    grouped: dict[str, list[AnnotationRecord]] = {}
    for record in records:
        grouped.setdefault(record.item_id, []).append(record)
    return {
        item_id: sorted(panel, key=lambda r: r.assessor_id)
        for item_id, panel in grouped.items()
        if len(panel) == PANEL_SIZE
    }


def build_report(data_dir: str | Path) -> MetricReport:
    store = DataStore(data_dir)
    report = MetricReport()

    corpus = None
    try:
        corpus = store.load_corpus()
    except StoreError:
        report.reasons["corpus"] = "no corpus ingested"

    manifest = None
    if (store.transcripts_dir / MANIFEST_NAME).exists():
        manifest = read_manifest(store.transcripts_dir)
    script = PromptScript.from_dict(manifest["script"]) if manifest else default_script()

    transcripts = (
        load_transcripts(store.transcripts_dir) if store.transcripts_dir.exists() else []
    )
    completed = [t for t in transcripts if t.complete]

    _build_rouge(report, corpus, transcripts, completed)
    _build_length_compliance(report, completed, script)
    _build_task1(report, store, corpus, completed)
    _build_pairwise(report, store)
    _build_consistency(report, store)
    _build_provenance(report, store, manifest)
    return report


def _build_rouge(report, corpus, transcripts, completed):
    if corpus is None:
        report.reasons["rouge_table"] = "no corpus ingested"
    elif not transcripts:
        report.reasons["rouge_table"] = "no transcripts"
    else:
        try:
            report.rouge_table = score_transcripts(transcripts, corpus)
        except MissingEntry as exc:
            report.reasons["rouge_table"] = str(exc)


def _build_length_compliance(report, completed, script):
    if not completed:
        report.reasons["length_compliance"] = "no completed transcripts"
        return
    by_model: dict[str, list[str]] = {}
    for transcript in completed:
        by_model.setdefault(transcript.model_id, []).append(transcript.final_summary)
    report.length_compliance = {
        model: {
            "rate": sum(
                1
                for s in summaries
                if script.length_min <= count_sentences(s) <= script.length_max
            )
            / len(summaries),
            "n": len(summaries),
        }
        for model, summaries in sorted(by_model.items())
    }


def _build_task1(report, store, corpus, completed):
    bundle = _records_for(store, PREFERENCE)
    if bundle is None:
        report.reasons["task1_distribution"] = "task 1 not generated"
        return
    records, key = bundle
    if not records:
        report.reasons["task1_distribution"] = "no annotations"
        return
    report.task1_distribution = vote_distribution_task1(records, key, panel_size=PANEL_SIZE)

    try:
        matrix_most, matrix_least = task1_alpha_encoding(records, key)
        report.agreement.alpha_most = _safe_alpha(
            report, "alpha_most", matrix_most.rows()
        )
        report.agreement.alpha_least = _safe_alpha(
            report, "alpha_least", matrix_least.rows()
        )
    except InsufficientData as exc:
        report.agreement.notes["alpha_most"] = str(exc)
        report.agreement.notes["alpha_least"] = str(exc)

    _build_tau(report, records, key, corpus, completed)


def _vote_counts_by_unit(records, key):
    """Most/least vote counts per (entry, turn), the Figure-6-style series."""
    counts_most: dict[tuple[str, str], int] = {}
    counts_least: dict[tuple[str, str], int] = {}
    for record in records:
        origins = key.origins[record.item_id]
        entry_id = key.entry_ids[record.item_id]
        for label in record.selection["most"]:
            unit = (entry_id, origins[label])
            counts_most[unit] = counts_most.get(unit, 0) + 1
        for label in record.selection["least"]:
            unit = (entry_id, origins[label])
            counts_least[unit] = counts_least.get(unit, 0) + 1
    return counts_most, counts_least


def _build_tau(report, records, key, corpus, completed):
    """Correlate per-(entry, turn) vote counts with that turn's ROUGE-L F1."""
    if corpus is None:
        report.agreement.notes["tau_most"] = "no corpus for per-turn ROUGE"
        report.agreement.notes["tau_least"] = "no corpus for per-turn ROUGE"
        return
    model_id = key.meta.get("model_id")
    sessions = {t.entry_id: t for t in completed if t.model_id == model_id}
    references = {e.id: e.reference_summary for e in corpus}
    counts_most, counts_least = _vote_counts_by_unit(records, key)

    pairs_most, pairs_least = [], []
    for item_id in sorted(key.origins):
        entry_id = key.entry_ids[item_id]
        session = sessions.get(entry_id)
        if session is None or entry_id not in references:
            continue
        for turn in session.turns:
            f1 = rouge_l(turn.response_text, references[entry_id]).f1
            pairs_most.append((counts_most.get((entry_id, turn.turn_name), 0), f1))
            pairs_least.append((counts_least.get((entry_id, turn.turn_name), 0), f1))
    try:
        report.agreement.tau_most = kendall_tau(pairs_most)
    except DegenerateInput as exc:
        report.agreement.notes["tau_most"] = str(exc)
    try:
        report.agreement.tau_least = kendall_tau(pairs_least)
    except DegenerateInput as exc:
        report.agreement.notes["tau_least"] = str(exc)


def _build_pairwise(report, store):
    human_finals = {}
    bundle = _records_for(store, PAIRWISE)
    if bundle is None:
        report.reasons["pairwise_human"] = "task 2 not generated"
    else:
        records, key = bundle
        panels = _full_panels(records)
        if not panels:
            report.reasons["pairwise_human"] = "no annotations"
        else:
            human_finals = {
                key.entry_ids[item_id]: majority_vote_pairwise(
                    [r.selection for r in panel], key, item_id, panel_size=PANEL_SIZE
                )
                for item_id, panel in panels.items()
            }
            n = len(human_finals)
            report.pairwise_win_rates["human"] = {
                "models": list(key.meta.get("models", [])),
                "model_1_rate": sum(1 for v in human_finals.values() if v == MODEL_1_WON) / n,
                "tie_rate": sum(1 for v in human_finals.values() if v == TIE) / n,
                "model_2_rate": sum(1 for v in human_finals.values() if v == MODEL_2_WON) / n,
                "n": n,
            }
            _build_pairwise_alpha(report, records, key)

    judge_records = store.judge_records("pairwise")
    valid = [r for r in judge_records if r.get("valid")]
    if not valid:
        report.reasons["pairwise_judge"] = "no judge comparisons"
    else:
        n = len(valid)
        report.pairwise_win_rates["judge"] = {
            "models": [valid[0]["model_1"], valid[0]["model_2"]],
            "model_1_rate": sum(1 for r in valid if r["final"] == MODEL_1_WON) / n,
            "tie_rate": sum(1 for r in valid if r["final"] == TIE) / n,
            "model_2_rate": sum(1 for r in valid if r["final"] == MODEL_2_WON) / n,
            "n": n,
        }

    _build_human_judge_alpha(report, human_finals, valid)


def _build_pairwise_alpha(report, records, key):
    assessors = sorted({r.assessor_id for r in records})
    by_item: dict[str, dict[str, str]] = {}
    for record in records:
        by_item.setdefault(record.item_id, {})[record.assessor_id] = unblind_pairwise_vote(
            record.selection, key, record.item_id
        )
    matrix = [
        [by_item[item_id].get(a) for a in assessors] for item_id in sorted(by_item)
    ]
    report.agreement.alpha_pairwise = _safe_alpha(report, "alpha_pairwise", matrix)


def _build_human_judge_alpha(report, human_finals, valid_judge_records):
    if not human_finals or not valid_judge_records:
        report.agreement.notes.setdefault(
            "alpha_human_judge", "needs both human majorities and judge comparisons"
        )
        return
    judge_finals = {r["entry_id"]: r["final"] for r in valid_judge_records}
    common = sorted(set(human_finals) & set(judge_finals))
    if not common:
        report.agreement.notes["alpha_human_judge"] = "no common entries"
        return
    matrix = [[human_finals[e], judge_finals[e]] for e in common]
    report.agreement.alpha_human_judge = _safe_alpha(report, "alpha_human_judge", matrix)


def _build_consistency(report, store):
    bundle = _records_for(store, CONSISTENCY)
    human_map = {}
    if bundle is None:
        report.reasons["consistency_human"] = "task 3 not generated"
    else:
        records, key = bundle
        panels = _full_panels(records)
        if not panels:
            report.reasons["consistency_human"] = "no annotations"
        else:
            human_map = {
                key.entry_ids[item_id]: majority_vote_consistency(
                    [r.selection for r in panel], panel_size=PANEL_SIZE
                )
                for item_id, panel in panels.items()
            }
            report.consistency_rates["human"] = {
                "rate": sum(1 for v in human_map.values() if v == "YES") / len(human_map),
                "n": len(human_map),
            }
            assessors = sorted({r.assessor_id for r in records})
            by_item: dict[str, dict[str, str]] = {}
            for record in records:
                by_item.setdefault(record.item_id, {})[record.assessor_id] = record.selection
            matrix = [
                [by_item[item_id].get(a) for a in assessors] for item_id in sorted(by_item)
            ]
            report.agreement.alpha_consistency = _safe_alpha(
                report, "alpha_consistency", matrix
            )

    judge_records = [r for r in store.judge_records("consistency") if r.get("status") == "OK"]
    if not judge_records:
        report.reasons["consistency_judge"] = "no judge verdicts"
        judge_map = {}
    else:
        judge_map = {
            r["entry_id"]: ("YES" if r["consistent"] else "NO") for r in judge_records
        }
        report.consistency_rates["judge"] = {
            "rate": sum(1 for v in judge_map.values() if v == "YES") / len(judge_map),
            "n": len(judge_map),
        }

    if human_map and judge_map:
        try:
            report.agreement.human_judge_overlap = agreement_overlap(human_map, judge_map)
        except NoCommonEntries as exc:
            report.agreement.notes["human_judge_overlap"] = str(exc)
    else:
        report.agreement.notes.setdefault(
            "human_judge_overlap", "needs both human majorities and judge verdicts"
        )


def _safe_alpha(report, name, matrix):
    try:
        return krippendorff_alpha(matrix)
    except UndefinedAlpha:
        report.agreement.notes[name] = "UNDEFINED: expected disagreement is zero"
        return None
    except InsufficientData as exc:
        report.agreement.notes[name] = str(exc)
        return None


def _build_provenance(report, store, manifest):
    provenance: dict = {"seeds": {}, "timestamps": {}}
    if manifest:
        provenance["corpus_digest"] = manifest["corpus_digest"]
        provenance["seeds"]["summarize"] = manifest["seed"]
        provenance["model_configs"] = manifest["configs"]
        provenance["timestamps"]["batch_created_at"] = manifest.get("created_at")
    for task in store.generated_tasks():
        if store.key_meta_path(task).exists():
            meta = json.loads(store.key_meta_path(task).read_text(encoding="utf-8"))
            if "seed" in meta:
                provenance["seeds"][f"task_{task.lower()}"] = meta["seed"]
    report.provenance = provenance


# --- text rendering -------------------------------------------------------


def format_rate(rate: float) -> str:
    """Percent rendering used throughout the text report ("43%" style)."""
    return f"{round(rate, 2) * 100:.0f}%"


def _stat(value: float | None, note: str | None = None) -> str:
    """2-decimal statistic; UNDEFINED only for the flagged zero-D_e case."""
    if value is not None:
        return f"{value:.2f}"
    return "UNDEFINED" if note and note.startswith("UNDEFINED") else "n/a"


def render_text(report: MetricReport) -> str:
    lines: list[str] = ["EVALUATION REPORT", "================="]

    lines.append("")
    if report.rouge_table is not None:
        lines.append(report.rouge_table.render_text())
    else:
        lines.append(f"ROUGE: ({report.reasons.get('rouge_table', 'unavailable')})")

    lines.append("")
    lines.append("Length compliance")
    if report.length_compliance:
        for model, cell in report.length_compliance.items():
            lines.append(f"  {model}: {format_rate(cell['rate'])} (n={cell['n']})")
    else:
        lines.append(f"  ({report.reasons.get('length_compliance', 'unavailable')})")

    lines.append("")
    lines.append("Task 1 vote distribution")
    if report.task1_distribution:
        d = report.task1_distribution
        for turn in d["most"]:
            lines.append(
                f"  {turn}: most={d['most'][turn]} least={d['least'][turn]} "
                f"unanimous_most={d['unanimous_most'][turn]}"
            )
    else:
        lines.append(f"  ({report.reasons.get('task1_distribution', 'unavailable')})")

    lines.append("")
    lines.append("Pairwise win rates")
    for source in ("human", "judge"):
        cell = report.pairwise_win_rates.get(source)
        if cell:
            m1, m2 = cell["models"] or ("model_1", "model_2")
            lines.append(
                f"  {source} (n={cell['n']}): {m1} {format_rate(cell['model_1_rate'])} / "
                f"tie {format_rate(cell['tie_rate'])} / {m2} {format_rate(cell['model_2_rate'])}"
            )
        else:
            reason = report.reasons.get(f"pairwise_{source}", "unavailable")
            lines.append(f"  {source}: ({reason})")

    lines.append("")
    lines.append("Consistency rates")
    for source in ("human", "judge"):
        cell = report.consistency_rates.get(source)
        if cell:
            lines.append(f"  {source} (n={cell['n']}): {format_rate(cell['rate'])}")
        else:
            reason = report.reasons.get(f"consistency_{source}", "unavailable")
            lines.append(f"  {source}: ({reason})")

    lines.append("")
    lines.append("Agreement")
    agreement = report.agreement
    notes = agreement.notes
    rows = [
        ("alpha most preferred: ", agreement.alpha_most, "alpha_most"),
        ("alpha least preferred:", agreement.alpha_least, "alpha_least"),
        ("alpha pairwise:       ", agreement.alpha_pairwise, "alpha_pairwise"),
        ("alpha consistency:    ", agreement.alpha_consistency, "alpha_consistency"),
        ("alpha human vs judge: ", agreement.alpha_human_judge, "alpha_human_judge"),
        ("tau most preferred:   ", agreement.tau_most, "tau_most"),
        ("tau least preferred:  ", agreement.tau_least, "tau_least"),
    ]
    for label, value, name in rows:
        lines.append(f"  {label} {_stat(value, notes.get(name))}")
    overlap = agreement.human_judge_overlap
    lines.append(
        "  human-judge overlap:   "
        + ("n/a" if overlap is None else format_rate(overlap))
    )
    for name, note in sorted(agreement.notes.items()):
        lines.append(f"  note [{name}]: {note}")

    lines.append("")
    lines.append("Provenance")
    for chunk in json.dumps(report.provenance, sort_keys=True, indent=2).splitlines():
        lines.append(f"  {chunk}")
    return "\n".join(lines) + "\n"
