"""Command-line orchestration of the pipeline.

Exit codes: 0 success, 1 validation or usage error, 2 external-service
failure.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .. import judge as judge_mod
from ..corpus import CorpusError, load_corpus, save_corpus, validate_entry
from ..human_eval import (
    TaskGenerationError,
    VoteError,
    consistency_key,
    generate_task1,
    generate_task2,
    generate_task3,
)
from ..llm_client import (
    AuthError,
    ContextOverflow,
    HttpChatClient,
    ModelConfig,
    ProtocolError,
    SyntheticChatClient,
    TransientExhausted,
)
from ..metrics import score_transcripts
from ..prompting import PromptingError, default_script, load_transcripts, run_batch
from .report import build_report, render_text
from .store import DataStore, StoreError

_USAGE_ERRORS = (
    CorpusError,
    PromptingError,
    StoreError,
    TaskGenerationError,
    VoteError,
    judge_mod.EmptyInput,
    ValueError,
)
_EXTERNAL_ERRORS = (AuthError, ContextOverflow, TransientExhausted, ProtocolError, OSError)


@click.group()
@click.option(
    "--data-dir",
    envvar="ITERSUM_DATA_DIR",
    default="itersum-data",
    show_default=True,
    type=click.Path(path_type=Path),
    help="Directory holding all pipeline artifacts.",
)
@click.pass_context
def cli(ctx, data_dir: Path):
    """Iterative-prompting summarization pipeline and evaluation tooling."""
    ctx.obj = DataStore(data_dir)


@cli.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path(path_type=Path))
@click.option("--budget", default=4096, show_default=True, help="Token budget for validation.")
@click.pass_obj
def ingest(store: DataStore, corpus_path: Path, budget: int):
    """Validate a corpus file and copy it into the data directory."""
    entries = load_corpus(corpus_path)
    problems = 0
    for entry in entries:
        report = validate_entry(entry, budget)
        for issue in report.issues:
            problems += 1
            click.echo(f"{entry.id}: {issue.code}: {issue.message}", err=True)
    store.root.mkdir(parents=True, exist_ok=True)
    save_corpus(entries, store.corpus_path)
    click.echo(f"ingested {len(entries)} entries ({problems} validation issue(s))")


def _make_client(mock: bool):
    return SyntheticChatClient() if mock else HttpChatClient()


@cli.command()
@click.option("--model", "model_id", required=True)
@click.option("--corpus", "corpus_path", type=click.Path(path_type=Path))
@click.option("--out", "out_dir", type=click.Path(path_type=Path))
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--temperature", default=0.0, show_default=True, type=float)
@click.option("--endpoint-url", default="https://api.openai.com/v1", show_default=True)
@click.option("--max-response-tokens", default=512, show_default=True, type=int)
@click.option("--mock", is_flag=True, help="Use the deterministic offline client.")
@click.pass_obj
def summarize(store, model_id, corpus_path, out_dir, seed, temperature, endpoint_url,
              max_response_tokens, mock):
    """Run the three-turn protocol over the corpus for one model."""
    corpus = load_corpus(corpus_path) if corpus_path else store.load_corpus()
    out_dir = out_dir or store.transcripts_dir
    config = ModelConfig(
        model_id=model_id,
        temperature=temperature,
        max_response_tokens=max_response_tokens,
        endpoint_url=endpoint_url,
    )
    transcripts = run_batch(
        _make_client(mock), [config], corpus, default_script(), seed, out_dir
    )
    done = sum(1 for t in transcripts if t.complete)
    click.echo(f"{model_id}: {done}/{len(transcripts)} sessions complete under {out_dir}")


@cli.command()
@click.option("--out", "out_dir", type=click.Path(path_type=Path),
              help="Transcripts directory (default: <data-dir>/transcripts).")
@click.pass_obj
def score(store, out_dir):
    """ROUGE-score persisted transcripts against the corpus references."""
    corpus = store.load_corpus()
    transcripts = load_transcripts(out_dir or store.transcripts_dir)
    if not transcripts:
        raise StoreError("no transcripts to score")
    table = score_transcripts(transcripts, corpus)
    scores_path = store.root / "scores.json"
    scores_path.write_text(table.to_json() + "\n", encoding="utf-8")
    click.echo(table.render_text())
    click.echo(f"written to {scores_path}")


@cli.group()
def tasks():
    """Generate blinded evaluation tasks."""


@tasks.command("gen")
@click.option("--task", "task_id", required=True, type=click.Choice(["1", "2", "3"]))
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--model", "model_id", help="Model for tasks 1 and 3.")
@click.option("--models", nargs=2, help="The two models for task 2 (order fixes model_1).")
@click.pass_obj
def tasks_gen(store, task_id, seed, model_id, models):
    """Build items and keys for one evaluation task from stored transcripts."""
    transcripts = load_transcripts(store.transcripts_dir)
    if task_id == "1":
        if not model_id:
            raise click.UsageError("task 1 requires --model")
        mine = [t for t in transcripts if t.model_id == model_id]
        items, key = generate_task1(mine, seed)
    elif task_id == "2":
        corpus = store.load_corpus()
        pair = tuple(models) if models else None
        relevant = [t for t in transcripts if pair is None or t.model_id in pair]
        items, key = generate_task2(relevant, seed, models=pair, corpus=corpus)
    else:
        if not model_id:
            raise click.UsageError("task 3 requires --model")
        corpus = store.load_corpus()
        mine = [t for t in transcripts if t.model_id == model_id]
        items = generate_task3(mine, corpus)
        key = consistency_key(items, model_id)
    store.write_task(items, key)
    click.echo(f"task {task_id}: {len(items)} item(s) generated")


@cli.command("judge")
@click.option("--mode", required=True, type=click.Choice(["pairwise", "consistency"]))
@click.option("--judge-model", default="gpt-4", show_default=True)
@click.option("--models", nargs=2, help="Pairwise: the two models (default: task 2 key).")
@click.option("--model", "model_id", help="Consistency: the judged model (default: task 3 key).")
@click.option("--endpoint-url", default="https://api.openai.com/v1", show_default=True)
@click.option("--mock", is_flag=True, help="Use the deterministic offline judge.")
@click.pass_obj
def judge_cmd(store, mode, judge_model, models, model_id, endpoint_url, mock):
    """Run LLM-as-judge evaluation over stored final summaries."""
    corpus = {e.id: e for e in store.load_corpus()}
    transcripts = [t for t in load_transcripts(store.transcripts_dir) if t.complete]
    by_model: dict[str, dict[str, object]] = {}
    for t in transcripts:
        by_model.setdefault(t.model_id, {})[t.entry_id] = t
    config = ModelConfig(model_id=judge_model, temperature=0.0, endpoint_url=endpoint_url)
    client = _make_client(mock)

    if mode == "pairwise":
        pair = tuple(models) if models else tuple(store.load_key("2").meta["models"])
        model_1, model_2 = pair
        entries = sorted(
            set(by_model.get(model_1, {})) & set(by_model.get(model_2, {})) & set(corpus)
        )
        if not entries:
            raise StoreError("no entries with final summaries for both models")
        records = []
        for entry_id in entries:
            comparison = judge_mod.judge_pair_debiased(
                client,
                config,
                corpus[entry_id].reference_summary,
                by_model[model_1][entry_id].final_summary,
                by_model[model_2][entry_id].final_summary,
                entry_id,
                model_1=model_1,
                model_2=model_2,
            )
            records.append(comparison.to_dict())
        store.write_judge_records("pairwise", records)
        valid = [r for r in records if r["valid"]]
        click.echo(f"pairwise: {len(records)} comparison(s), {len(valid)} valid")
    else:
        target = model_id or store.load_key("3").meta["model_id"]
        sessions = by_model.get(target, {})
        entries = sorted(set(sessions) & set(corpus))
        if not entries:
            raise StoreError(f"no final summaries for model {target!r}")
        records = []
        for entry_id in entries:
            try:
                verdict = judge_mod.judge_consistency(
                    client,
                    config,
                    corpus[entry_id].reference_summary,
                    sessions[entry_id].final_summary,
                    entry_id,
                )
                records.append(
                    {
                        "entry_id": entry_id,
                        "model_id": target,
                        "status": "OK",
                        "consistent": verdict.consistent,
                        "explanation": verdict.explanation,
                        "raw_response": verdict.raw_response,
                    }
                )
            except judge_mod.ParseFailure as exc:
                records.append(
                    {
                        "entry_id": entry_id,
                        "model_id": target,
                        "status": "UNPARSEABLE",
                        "error": str(exc),
                    }
                )
        store.write_judge_records("consistency", records)
        ok = [r for r in records if r["status"] == "OK"]
        click.echo(f"consistency: {len(records)} verdict(s), {len(ok)} parseable")


@cli.command()
@click.option("--port", default=8800, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--ui-origin", default=None, help="Allowed CORS origin for the annotation UI.")
@click.pass_obj
def serve(store, port, host, ui_origin):
    """Serve blinded items and collect annotations over HTTP."""
    import uvicorn

    from .app import create_app

    uvicorn.run(create_app(store.root, ui_origin=ui_origin), host=host, port=port)


@cli.command("report")
@click.option("--format", "fmt", default="text", show_default=True,
              type=click.Choice(["json", "text"]))
@click.pass_obj
def report_cmd(store, fmt):
    """Assemble the metric report from everything persisted so far."""
    report = build_report(store.root)
    if fmt == "json":
        click.echo(report.to_json(), nl=False)
    else:
        click.echo(render_text(report), nl=False)


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except _EXTERNAL_ERRORS as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except _USAGE_ERRORS as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
