"""Admin and interactive CLI: serve, chat, assess, imports, export."""

from __future__ import annotations

import json
import os
import sys

import click

from .config import ConfigError, load_config
from .dialogue import Engine, EngineConfig
from .errors import TutorError
from .provider import HttpProvider, PromptKind, Provider, ScriptedMockProvider
from .resources import ResourceCatalog, load_resources
from .scoring import assess_proficiency
from .store import Store
from .wordbank import WordBank, load_word_bank

# Replies used by the mock provider in `tutor chat` and offline serving.
DEFAULT_MOCK_FIXTURES = {
    PromptKind.TUTOR_REPLY: [
        "Hi! Great to see you practising. What would you like to talk about today?",
        "Nice sentence! Try this exercise. Fill in the blank: I would like ___ coffee, please.",
        "Good progress! Tell me more about your day.",
    ],
    PromptKind.LEVEL_JUDGE: ["7"],
    PromptKind.EXERCISE_FEEDBACK: [
        "Well done! 'a coffee' is exactly right. Watch the article before 'coffee'.",
    ],
    PromptKind.IMPROVEMENT_ANALYSIS: [
        '[{"area": "Articles", "confidence": 0.7, "examples": ["I want coffee"]},'
        ' {"area": "Tenses", "confidence": 0.5, "examples": ["I goed there"]},'
        ' {"area": "Punctuation", "confidence": 0.2, "examples": ["no commas"]}]',
    ],
    PromptKind.SESSION_SUMMARY: [
        "You practised everyday conversation and article usage. Keep an eye on 'a' vs 'an'.",
    ],
}


def _build_provider(config) -> Provider:
    if config.provider_kind == "http":
        return HttpProvider(
            base_url=config.provider_base_url,
            model=config.provider_model or "default",
            api_key=config.provider_api_key,
        )
    return ScriptedMockProvider(DEFAULT_MOCK_FIXTURES)


def _load_bank(path: str | None) -> WordBank:
    if path is None:
        return WordBank()
    with open(path, encoding="utf-8") as fh:
        return load_word_bank(fh)


def _load_catalog(path: str | None) -> ResourceCatalog:
    if path is None:
        return ResourceCatalog(resources=[])
    with open(path, encoding="utf-8") as fh:
        return load_resources(fh)


def _build_engine(config) -> Engine:
    os.makedirs(config.data_dir, exist_ok=True)
    store = Store(os.path.join(config.data_dir, "tutor.db"))
    engine_config = EngineConfig(
        policy=config.policy(),
        weights=config.weights(),
        wb_statistic=config.wb_statistic,
    )
    return Engine(
        store=store,
        provider=_build_provider(config),
        bank=_load_bank(config.wordbank_path),
        catalog=_load_catalog(config.resources_path),
        config=engine_config,
    )


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="Path to a tutor TOML config file.")
@click.pass_context
def main(ctx, config_path):
    """English tutoring engine."""
    try:
        ctx.obj = load_config(config_path)
    except ConfigError as exc:
        for problem in exc.problems:
            click.echo(f"config error: {problem}", err=True)
        sys.exit(1)


@main.command()
@click.pass_obj
def serve(config):
    """Run the HTTP API."""
    import uvicorn

    from .service import TokenSigner, create_app

    engine = _build_engine(config)
    signer = TokenSigner.from_data_dir(config.data_dir)
    app = create_app(engine, signer, config)
    uvicorn.run(app, host=config.host, port=config.port)


@main.command()
@click.option("--provider", "provider_kind", type=click.Choice(["mock", "http"]), default=None)
@click.option("--wordbank", type=click.Path(exists=True), default=None)
@click.option("--resources", type=click.Path(exists=True), default=None)
@click.option("--email", default="local@tutor.dev", show_default=True)
@click.pass_obj
def chat(config, provider_kind, wordbank, resources, email):
    """Interactive terminal session against a local engine."""
    if provider_kind:
        config.provider_kind = provider_kind
    if wordbank:
        config.wordbank_path = wordbank
    if resources:
        config.resources_path = resources
    engine = _build_engine(config)
    learner = engine.store.get_learner_by_email(email) or engine.store.create_learner(email)
    session_id = engine.start_session(learner.learner_id)
    click.echo(f"session {session_id} started — type /end to finish")
    while True:
        try:
            text = click.prompt("you", prompt_suffix="> ")
        except (EOFError, click.Abort):
            text = "/end"
        if text.strip() == "/end":
            summary = engine.end_session(learner.learner_id, session_id)
            click.echo(f"summary: {summary.summary}")
            break
        try:
            result = engine.handle_learner_message(learner.learner_id, session_id, text)
        except TutorError as exc:
            click.echo(f"error: {exc}", err=True)
            continue
        click.echo(f"tutor> {result.assistant_reply}")
        if result.exercise_event:
            click.echo(f"[exercise {result.exercise_event['kind']}: "
                       f"{result.exercise_event['exercise_type']}]")
        if result.analysis_event:
            for area in result.analysis_event:
                click.echo(f"[improve: {area.area} ({area.confidence:.2f})]")
        if result.recommended:
            for resource in result.recommended:
                click.echo(f"[resource: {resource.title} — {resource.url}]")


@main.command()
@click.argument("textfile", type=click.Path(exists=True))
@click.option("--provider", "provider_kind", type=click.Choice(["mock", "http"]), default=None)
@click.option("--wordbank", type=click.Path(exists=True), default=None)
@click.pass_obj
def assess(config, textfile, provider_kind, wordbank):
    """Score a text file and print the proficiency report as JSON."""
    if provider_kind:
        config.provider_kind = provider_kind
    if wordbank:
        config.wordbank_path = wordbank
    with open(textfile, encoding="utf-8") as fh:
        text = fh.read()
    if not text.strip():
        click.echo("error: input file is empty", err=True)
        sys.exit(1)
    bank = _load_bank(config.wordbank_path)
    provider = _build_provider(config)
    try:
        estimate = assess_proficiency(
            bank, provider, text,
            weights=config.weights(), wb_statistic=config.wb_statistic,
        )
    except TutorError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    wb = estimate.wordbank
    report = {
        "wordbank": {
            "average": wb.average_level,
            "median": wb.median_level,
            "coverage": wb.coverage,
            "matched_count": len(wb.matched),
        },
        "llm_level": estimate.llm_level,
        "combined_level": estimate.combined_level,
        "degraded": estimate.degraded,
    }
    click.echo(json.dumps(report, indent=2))


@main.command("import-wordbank")
@click.argument("path", type=click.Path(exists=True))
def import_wordbank(path):
    """Validate a word-bank CSV and report size and level histogram."""
    try:
        with open(path, encoding="utf-8") as fh:
            bank = load_word_bank(fh)
    except TutorError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    click.echo(f"ok: {bank.size} words")
    for level, count in bank.level_histogram().items():
        click.echo(f"  level {level:2d}: {count}")


@main.command("import-resources")
@click.argument("path", type=click.Path(exists=True))
def import_resources(path):
    """Validate a resources CSV and report per-area counts."""
    try:
        with open(path, encoding="utf-8") as fh:
            catalog = load_resources(fh)
    except TutorError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    click.echo(f"ok: {catalog.size} resources")
    for area, count in catalog.per_area_counts().items():
        click.echo(f"  {area}: {count}")


@main.command()
@click.argument("session_id")
@click.option("--format", "fmt", type=click.Choice(["json", "text"]), default="json",
              show_default=True)
@click.pass_obj
def export(config, session_id, fmt):
    """Export a session transcript from the local data directory."""
    store = Store(os.path.join(config.data_dir, "tutor.db"))
    try:
        owner = store.owner_of(session_id)
        document = store.export_transcript(owner, session_id, fmt)
    except TutorError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    if fmt == "json":
        click.echo(json.dumps(document, indent=2))
    else:
        click.echo(document)


if __name__ == "__main__":
    main()
