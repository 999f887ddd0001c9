"""Command-line entry points: chat REPL, dish ingestion, the scaling
benchmark, solver verification, and the HTTP server."""

from __future__ import annotations

import json
import os
import sys

import click

from .bench import comparison_table, run_bench, run_verify, write_bench_csv
from .engine import AdvisorEngine
from .errors import AdvisorError, SnapshotParseError
from .speech import SessionState
from .store import KnowledgeStore, parse_dish_record


def _load_store(snapshot: str | None) -> KnowledgeStore:
    snapshot = snapshot or os.environ.get("DIET_ADVISOR_SNAPSHOT", "")
    if snapshot and os.path.exists(snapshot):
        return KnowledgeStore.load_snapshot(snapshot)
    return KnowledgeStore()


@click.group()
def main():
    """Dietary advisory engine."""


@main.command()
@click.option("--snapshot", type=click.Path(), default=None,
              help="Knowledge store snapshot to load.")
@click.option("--transparency/--no-transparency", default=True,
              help="Disclose inner-speech notes after each reply.")
def chat(snapshot, transparency):
    """Interactive dialogue over a local engine."""
    engine = AdvisorEngine(_load_store(snapshot), transparency=transparency)
    session = engine.create_session()
    click.echo("diet-advisor ready. Empty line or Ctrl-D to quit.")
    while True:
        try:
            utterance = click.prompt("you", prompt_suffix="> ", default="",
                                     show_default=False)
        except (EOFError, click.Abort):
            break
        if not utterance.strip():
            break
        outcome = engine.run_turn(utterance, session)
        click.echo(f"robot> {outcome.reply_text}")
        if outcome.disclosed_notes:
            click.echo("  (inner speech)")
            for note in outcome.disclosed_notes:
                click.echo(f"    [{note.stage.label}] {note.text}")
    if session.state is not SessionState.CLOSED:
        session.close()
    click.echo("bye.")


def _iter_dish_records(path):
    """Yield (record_index, raw_object) from JSONL or one JSON document."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith(("{", "[")) and "\n{" not in stripped:
        doc = json.loads(text)
        records = doc.get("dishes", doc) if isinstance(doc, dict) else doc
        if not isinstance(records, list):
            raise SnapshotParseError("dish document must hold a list of records")
        yield from enumerate(records)
        return
    for index, line in enumerate(text.splitlines()):
        if not line.strip():
            continue
        try:
            yield index, json.loads(line)
        except json.JSONDecodeError as exc:
            raise SnapshotParseError(f"line {index + 1}: not valid JSON: {exc}",
                                     index) from exc


@main.command()
@click.argument("dishes_file", type=click.Path(exists=True))
@click.option("--snapshot", type=click.Path(), required=True,
              help="Store snapshot to update (created if missing).")
def ingest(dishes_file, snapshot):
    """Bulk-load dish records; reports each bad record and loads the rest."""
    store = _load_store(snapshot)
    loaded, failed = 0, 0
    for index, raw in _iter_dish_records(dishes_file):
        try:
            store.insert_dish(parse_dish_record(raw, index))
            loaded += 1
        except AdvisorError as exc:
            failed += 1
            click.echo(f"record {index}: SKIPPED: {exc}", err=True)
    store.save_snapshot(snapshot)
    click.echo(f"loaded {loaded} dishes ({failed} skipped) into {snapshot}")
    if failed:
        sys.exit(1)


@main.command()
@click.option("--sizes", default="50,100,150,200,250", show_default=True,
              help="Comma-separated dish pool sizes.")
@click.option("--max-dishes", default=3, show_default=True)
@click.option("--reps", default=5, show_default=True)
@click.option("--seed", default=42, show_default=True)
@click.option("--out", type=click.Path(), default="bench.csv", show_default=True)
def bench(sizes, max_dishes, reps, seed, out):
    """Solver scaling benchmark; writes a CSV and prints median timings
    next to the published reference values (shape comparison only)."""
    size_list = [int(s) for s in sizes.split(",") if s.strip()]
    rows = run_bench(size_list, max_dishes=max_dishes, reps=reps, seed=seed)
    write_bench_csv(rows, out)
    click.echo(comparison_table(rows))
    click.echo(f"wrote {len(rows)} rows to {out}")


@main.command()
@click.option("--instances", default=200, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--max-n", default=25, show_default=True)
@click.option("--max-dishes", default=3, show_default=True)
def verify(instances, seed, max_n, max_dishes):
    """Solver-vs-oracle equivalence sweep; nonzero exit on any mismatch."""
    outcome = run_verify(instances=instances, seed=seed, max_n=max_n,
                         max_dishes=max_dishes)
    click.echo(f"{outcome.instances} instances, {outcome.mismatches} mismatches, "
               f"{outcome.elapsed_seconds:.2f}s")
    if not outcome.ok:
        sys.exit(1)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.option("--snapshot", type=click.Path(), default=None)
def serve(host, port, snapshot):
    """Run the HTTP API."""
    import uvicorn

    from .service import create_app, engine_from_env

    if snapshot:
        os.environ["DIET_ADVISOR_SNAPSHOT"] = snapshot
    uvicorn.run(create_app(engine_from_env()), host=host, port=port)


if __name__ == "__main__":
    main()
