"""Command line front end.

    tiermem agent new|list|rm          manage agent snapshots on disk
    tiermem chat <id>                  interactive REPL against one agent
    tiermem ingest <id> <file>         bulk-load paragraphs into archival
    tiermem bench kv|dmr|docqa         scripted-policy benchmarks
    tiermem metrics rouge|csim         score text files
    tiermem serve                      run the HTTP service

Agents live as snapshot directories under --data-dir (default
./tiermem-data, overridable via TIERMEM_DATA_DIR). Every mutating command
loads the snapshot, works on it, and saves it back, so the CLI and the
server can share a data dir as long as they take turns.

With --json, failures print one machine-readable JSON object to stderr.
Exit codes: 0 success, 2 user error (missing agent, bad file, bad config).
"""

from __future__ import annotations

import json
import re
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

import click

from .agent import Agent, Event
from .bench import (
    csim,
    rouge_l,
    run_dmr,
    run_docqa,
    run_kv,
    run_kv_truncation_baseline,
    synthetic_docqa_fixture,
)
from .bench.docqa import DocqaQuestion
from .config import load_agent_config, parse_agent_config
from .errors import TierMemError


def _fail(ctx: click.Context, message: str, code: int = 2) -> None:
    if ctx.obj and ctx.obj.get("json"):
        click.echo(json.dumps({"error": message, "exit_code": code}), err=True)
    else:
        click.echo(f"error: {message}", err=True)
    ctx.exit(code)


def _data_dir(value: Optional[str]) -> Path:
    import os

    return Path(value or os.environ.get("TIERMEM_DATA_DIR", "tiermem-data"))


def _load_agent(ctx: click.Context, data_dir: Path, agent_id: str) -> Agent:
    snap = data_dir / agent_id
    if not (snap / "agent.json").is_file():
        _fail(ctx, f"no agent snapshot at {snap}")
    try:
        return Agent.load(snap)
    except TierMemError as exc:
        _fail(ctx, str(exc))
    raise AssertionError("unreachable")


dir_option = click.option("--data-dir", default=None, help="Agent snapshot root.")


@click.group()
@click.option("--json", "as_json", is_flag=True, help="Machine-readable errors on stderr.")
@click.pass_context
def main(ctx: click.Context, as_json: bool) -> None:
    """Tiered-memory agent runtime."""
    ctx.obj = {"json": as_json}


# --- agent management ---


@main.group()
def agent() -> None:
    """Create, list, and remove agents."""


@agent.command("new")
@click.option("--name", default="agent", help="Display name.")
@click.option("--config", "config_path", default=None, type=click.Path(), help="TOML config.")
@dir_option
@click.pass_context
def agent_new(ctx, name: str, config_path: Optional[str], data_dir: Optional[str]) -> None:
    root = _data_dir(data_dir)
    try:
        cfg = load_agent_config(config_path) if config_path else parse_agent_config({})
    except (OSError, ValueError) as exc:
        _fail(ctx, f"bad config: {exc}")
    a = Agent(cfg, name=name)
    a.save(root / a.id)
    click.echo(a.id)


@agent.command("list")
@dir_option
@click.pass_context
def agent_list(ctx, data_dir: Optional[str]) -> None:
    root = _data_dir(data_dir)
    if not root.is_dir():
        return
    for snap in sorted(root.iterdir()):
        if not (snap / "agent.json").is_file():
            continue
        meta = json.loads((snap / "agent.json").read_text())
        click.echo(f"{snap.name}  name={meta.get('name', '?')}  steps={meta.get('counters', {}).get('step_count', 0)}")


@agent.command("rm")
@click.argument("agent_id")
@dir_option
@click.pass_context
def agent_rm(ctx, agent_id: str, data_dir: Optional[str]) -> None:
    import shutil

    snap = _data_dir(data_dir) / agent_id
    if not snap.is_dir():
        _fail(ctx, f"no agent snapshot at {snap}")
    shutil.rmtree(snap)
    click.echo(f"removed {agent_id}")


# --- interaction ---


@main.command()
@click.argument("agent_id")
@click.option("--debug", is_flag=True, help="Show monologue and function calls.")
@dir_option
@click.pass_context
def chat(ctx, agent_id: str, debug: bool, data_dir: Optional[str]) -> None:
    """Interactive chat; blank line or EOF ends the session."""
    root = _data_dir(data_dir)
    a = _load_agent(ctx, root, agent_id)
    click.echo(f"chatting with {a.name} ({a.id}); empty line quits", err=True)
    while True:
        try:
            line = click.prompt("you", prompt_suffix="> ", default="", show_default=False)
        except (EOFError, click.Abort):
            break
        if not line.strip():
            break
        trace = a.step(Event(kind="user_message", payload=line, at=datetime.now(timezone.utc)))
        if debug:
            for e in trace.entries:
                if e.thoughts:
                    click.secho(f"  [monologue] {e.thoughts}", dim=True)
                if e.call_name:
                    click.secho(f"  [call] {e.call_name} {e.call_args_json}", dim=True)
                if e.result_text is not None:
                    click.secho(f"  [result] {e.result_text}", dim=True)
                if e.parse_error:
                    click.secho(f"  [parse error] {e.parse_error}", dim=True)
                if e.validation_error:
                    click.secho(f"  [invalid] {e.validation_error}", dim=True)
        for content in trace.outbound:
            click.echo(f"{a.name}> {content}")
        a.save(root / a.id)


@main.command()
@click.argument("agent_id")
@click.argument("source", type=click.Path())
@dir_option
@click.pass_context
def ingest(ctx, agent_id: str, source: str, data_dir: Optional[str]) -> None:
    """Load a text file into archival memory, one entry per paragraph."""
    root = _data_dir(data_dir)
    a = _load_agent(ctx, root, agent_id)
    try:
        text = Path(source).read_text(encoding="utf-8")
    except OSError as exc:
        _fail(ctx, f"cannot read {source}: {exc}")
    paragraphs = [p.strip() for p in re.split(r"\n\s*\n", text) if p.strip()]
    for p in paragraphs:
        a.archival.insert(p)
    a.save(root / a.id)
    if not paragraphs:
        click.echo("0 entries", err=True)
    else:
        click.echo(f"{len(paragraphs)} entries")


# --- benchmarks ---


@main.group()
def bench() -> None:
    """Scripted-policy benchmarks with deterministic seeds."""


@bench.command("kv")
@click.option("--depth", default=4, type=click.IntRange(0, 4))
@click.option("--seed", default=7, help="Pair-generation seed.")
@click.option("--orderings", default=30, help="Number of shuffle seeds.")
@click.option("--baseline", is_flag=True, help="Queue-only truncation baseline.")
@click.option("--report", default=None, type=click.Path(), help="Write per-run JSON lines.")
@click.pass_context
def bench_kv(ctx, depth: int, seed: int, orderings: int, baseline: bool, report: Optional[str]) -> None:
    runner = run_kv_truncation_baseline if baseline else run_kv
    rows = []
    for o in range(orderings):
        r = runner(depth, ordering_seed=o, pair_seed=seed)
        rows.append(r)
    acc = sum(r.correct for r in rows) / len(rows) if rows else 0.0
    if report:
        with open(report, "w", encoding="utf-8") as fh:
            for r in rows:
                fh.write(json.dumps({
                    "task": "kv-baseline" if baseline else "kv",
                    "depth": r.depth,
                    "pair_seed": seed,
                    "ordering_seed": r.ordering_seed,
                    "correct": r.correct,
                    "n_processor_calls": r.n_processor_calls,
                    "n_search_calls": r.n_search_calls,
                }) + "\n")
    click.echo(f"depth={depth} acc={acc:.3f}")


@bench.command("dmr")
@click.option("--seed", default=0)
@click.pass_context
def bench_dmr(ctx, seed: int) -> None:
    r = run_dmr(seed)
    click.echo(f"seed={seed} rouge_r={r.rouge_recall:.3f} retrieved_gold={str(r.retrieved_gold).lower()}")


@bench.command("docqa")
@click.option("--corpus", default=None, type=click.Path(), help="Passages, one per paragraph.")
@click.option("--questions", default=None, type=click.Path(), help="JSON lines {question, answer}.")
@click.option("--k", default=5, help="Passages per page / baseline window.")
@click.option("--mode", default="both", type=click.Choice(["both", "baseline", "paged"]))
@click.pass_context
def bench_docqa(ctx, corpus: Optional[str], questions: Optional[str], k: int, mode: str) -> None:
    if (corpus is None) != (questions is None):
        _fail(ctx, "--corpus and --questions go together")
    if corpus is None:
        passages, qs = synthetic_docqa_fixture()
    else:
        try:
            text = Path(corpus).read_text(encoding="utf-8")
            passages = tuple(p.strip() for p in re.split(r"\n\s*\n", text) if p.strip())
            qs = tuple(
                DocqaQuestion(question=row["question"], answer=row["answer"])
                for row in map(json.loads, Path(questions).read_text(encoding="utf-8").splitlines())
                if row
            )
        except (OSError, KeyError, json.JSONDecodeError) as exc:
            _fail(ctx, f"bad docqa inputs: {exc}")
    modes = ("baseline", "paged") if mode == "both" else (mode,)
    for m in modes:
        result = run_docqa(passages, qs, k=k, mode=m)
        click.echo(f"mode={m} k={k} acc={result.accuracy:.3f}")


# --- metrics ---


@main.group()
def metrics() -> None:
    """Text scoring utilities."""


@metrics.command("rouge")
@click.argument("candidate_file", type=click.Path())
@click.argument("reference_file", type=click.Path())
@click.pass_context
def metrics_rouge(ctx, candidate_file: str, reference_file: str) -> None:
    try:
        cand = Path(candidate_file).read_text(encoding="utf-8")
        ref = Path(reference_file).read_text(encoding="utf-8")
    except OSError as exc:
        _fail(ctx, str(exc))
    s = rouge_l(cand, ref)
    click.echo(f"P={s.precision:.4f} R={s.recall:.4f} F1={s.f1:.4f}")


@metrics.command("csim")
@click.argument("opener_file", type=click.Path())
@click.argument("fragments_file", type=click.Path())
@click.argument("human_file", type=click.Path())
@click.pass_context
def metrics_csim(ctx, opener_file: str, fragments_file: str, human_file: str) -> None:
    try:
        opener = Path(opener_file).read_text(encoding="utf-8").strip()
        fragments = [
            line.strip()
            for line in Path(fragments_file).read_text(encoding="utf-8").splitlines()
            if line.strip()
        ]
        human = Path(human_file).read_text(encoding="utf-8").strip()
    except OSError as exc:
        _fail(ctx, str(exc))
    try:
        s = csim(opener, fragments, human)
    except TierMemError as exc:
        _fail(ctx, str(exc))
    click.echo(f"csim1={s.csim1:.4f} csim3={s.csim3:.4f} csim_h={s.csim_h:.4f}")


# --- service ---


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8700)
@dir_option
def serve(host: str, port: int, data_dir: Optional[str]) -> None:
    """Run the HTTP service."""
    import uvicorn

    from .server import create_app

    uvicorn.run(create_app(_data_dir(data_dir)), host=host, port=port)


if __name__ == "__main__":
    main()
