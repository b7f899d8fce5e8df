"""Command-line entry points: chat, replay, bench, serve, and tooling."""

from __future__ import annotations

import dataclasses
import json
import pathlib
import sys

import click

from .kb import default_menu, load_kb_file, validate_facts
from .orchestrator import Orchestrator, load_script, replay as run_replay, run_bench
from .reasoner import (
    Program,
    RuleSafetyError,
    SolveError,
    StratificationError,
    render_proof,
    solve,
)
from .shared_state import SharedStore
from .terms import TermSyntaxError, parse_goal, parse_program, to_text


def _make_store(state_dir: str | None) -> SharedStore:
    return SharedStore(default_menu(), state_dir=state_dir)


def _llm_factories():
    from .nl.llm import ChatClient, LLMConfig, LLMGenerator, LLMParser

    config = LLMConfig.from_env()
    if config is None:
        raise click.ClickException(
            "no language-model endpoint configured; set DUOTALK_LLM_URL"
            " (and optionally DUOTALK_LLM_MODEL / DUOTALK_LLM_API_KEY)"
            " or drop --llm to use the built-in deterministic backend"
        )
    client = ChatClient(config)
    return (
        lambda role: LLMParser(role, client),
        lambda role: LLMGenerator(role, client),
    )


@click.group()
def main() -> None:
    """Dual-agent restaurant ordering: manager and customer consoles over
    one shared menu and shortage state."""


@main.command()
@click.option("--role", type=click.Choice(["manager", "customer"]), default="customer")
@click.option(
    "--llm/--deterministic",
    "use_llm",
    default=False,
    help="Parse and respond through a configured chat-model endpoint"
    " instead of the built-in deterministic backend.",
)
@click.option("--trace", is_flag=True, help="Show frames and predicates for each round.")
@click.option("--state-dir", type=click.Path(file_okay=False), default=None)
def chat(role: str, use_llm: bool, trace: bool, state_dir: str | None) -> None:
    """Interactive console for one session."""
    store = _make_store(state_dir)
    factories = _llm_factories() if use_llm else (None, None)
    orch = Orchestrator(store, *factories)
    session = orch.open_session(role)
    click.echo(f"bot> {session.greeting}")
    while True:
        try:
            text = click.prompt("you", prompt_suffix="> ", default="", show_default=False)
        except (EOFError, KeyboardInterrupt, click.Abort):
            click.echo()
            break
        if not text.strip():
            continue
        round_ = orch.message(session.sid, text)
        if trace:
            data = round_.as_dict()
            click.echo(f"  sem: {data['frames']}")
            click.echo(f"  act: {data['predicates']}")
        if round_.reply:
            click.echo(f"bot> {round_.reply}")
        if session.finalized:
            break
    if not session.finalized:
        result = orch.close_session(session.sid)
        if role == "customer" and result.get("ticket"):
            click.echo(f"ticket: {json.dumps(result['ticket'])}")


@main.command("replay")
@click.argument("script")
@click.option("--json", "as_json", is_flag=True, help="Emit one JSON object per line.")
def replay_cmd(script: str, as_json: bool) -> None:
    """Replay a scripted conversation (a file path or a bundled name
    such as `drive_thru_demo`)."""
    try:
        data = load_script(script)
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        raise click.ClickException(f"cannot load script {script!r}: {exc}") from None
    store = _make_store(None)
    _, rows = run_replay(store, data)
    for row in rows:
        if as_json:
            click.echo(json.dumps(row))
        elif row["event"] == "greeting":
            click.echo(f"--- {row['role']} session opens ---")
            click.echo(f"  bot: {row['reply']}")
        else:
            click.echo(f"[{row['role']}] user: {row['utterance']}")
            click.echo(f"  sem: {row['frames']}")
            click.echo(f"  act: {row['predicates']}")
            click.echo(f"  bot: {row['reply']}")


@main.command()
@click.option("--rounds", default=50, show_default=True)
@click.option("--requirements", default=10, show_default=True,
              help="Order lines staged before the timed customer rounds.")
@click.option("--role", type=click.Choice(["manager", "customer", "both"]), default="both")
def bench(rounds: int, requirements: int, role: str) -> None:
    """Time conversational rounds against the bundled menu."""
    reports = []
    if role in ("manager", "both"):
        reports.append(run_bench(_make_store(None), "manager", rounds, requirements))
    if role in ("customer", "both"):
        reports.append(run_bench(_make_store(None), "customer", rounds, requirements))
    click.echo(json.dumps(reports, indent=2))


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.option("--state-dir", type=click.Path(file_okay=False), default=None)
def serve(host: str, port: int, state_dir: str | None) -> None:
    """Serve the HTTP API."""
    import uvicorn

    from .server import create_app

    uvicorn.run(create_app(_make_store(state_dir)), host=host, port=port)


@main.group()
def kb() -> None:
    """Menu knowledge-base tooling."""


@kb.command("validate")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
def kb_validate(path: str) -> None:
    """Validate a menu file; prints one JSON finding per line."""
    text = pathlib.Path(path).read_text(encoding="utf-8")
    try:
        facts, rules = parse_program(text)
    except TermSyntaxError as exc:
        click.echo(json.dumps({"severity": "error", "code": "syntax", "message": str(exc)}))
        sys.exit(1)
    findings = list(validate_facts(facts))
    for violation in findings:
        click.echo(json.dumps(dataclasses.asdict(violation)))
    for rule in rules:
        click.echo(
            json.dumps(
                {
                    "severity": "error",
                    "code": "rules-in-kb",
                    "message": "menu files hold facts only",
                    "fact": to_text(rule.head),
                }
            )
        )
    if rules or any(v.severity == "error" for v in findings):
        sys.exit(1)
    click.echo(json.dumps({"severity": "ok", "code": "valid", "message": f"{len(facts)} facts"}))


@main.group()
def reason() -> None:
    """Rule-engine tooling."""


@reason.command("query")
@click.argument("rulefile", type=click.Path(exists=True, dir_okay=False))
@click.argument("goal")
@click.option("--proof/--no-proof", default=True, show_default=True)
def reason_query(rulefile: str, goal: str, proof: bool) -> None:
    """Solve GOAL against RULEFILE and print answers with proof trees."""
    text = pathlib.Path(rulefile).read_text(encoding="utf-8")
    try:
        facts, rules = parse_program(text)
        target = parse_goal(goal)
    except TermSyntaxError as exc:
        raise click.ClickException(str(exc)) from None
    try:
        program = Program(rules, facts)
        answers = solve(program, target)
    except (RuleSafetyError, StratificationError, SolveError) as exc:
        raise click.ClickException(str(exc)) from None
    if not answers:
        click.echo("no.")
        sys.exit(0)
    for i, answer in enumerate(answers, start=1):
        bindings = ", ".join(f"{k} = {to_text(v)}" for k, v in sorted(answer.bindings.items()))
        click.echo(f"answer {i}: {bindings or 'yes'}")
        if proof:
            click.echo(render_proof(answer.justification))


@main.group()
def state() -> None:
    """Shortage-state tooling."""


@state.command("show")
@click.option("--dir", "state_dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--tail", default=10, show_default=True, help="Recent delta-log lines to show.")
def state_show(state_dir: str, tail: int) -> None:
    """Print the persisted shortage state and recent deltas."""
    base = pathlib.Path(state_dir)
    state_file = base / "state.lp"
    if state_file.exists():
        click.echo(state_file.read_text(encoding="utf-8").rstrip())
    else:
        click.echo("% no state file")
    log_file = base / "delta.log"
    if log_file.exists():
        lines = log_file.read_text(encoding="utf-8").splitlines()
        click.echo(f"% last {min(tail, len(lines))} of {len(lines)} delta entries:")
        for line in lines[-tail:]:
            click.echo(line)


if __name__ == "__main__":
    main()
