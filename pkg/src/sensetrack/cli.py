"""Command-line front door: replay evaluation, sweeps, synthesis, serving.

All file arguments are plain text: embeddings in the word2vec-style text
format, config and sweep grids as JSON mirroring the config field names,
cases as JSON lines.
"""

from __future__ import annotations

import json
import os
import sys

import click
import numpy as np

from .engine import OTHER, OWN, Session, SessionConfig, Utterance
from .harness import (
    MODES,
    SyntheticSpec,
    aggregate,
    generate_synthetic,
    grid_sweep,
    load_cases,
    run_case,
    save_cases,
    write_metrics,
)
from .vectors import (
    inventory_from_store,
    load_sense_inventory,
    load_vectors,
)


def _fail(message: str):
    raise click.ClickException(message)


def _load_config(path) -> SessionConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return SessionConfig.from_dict(json.load(fh))
    except (OSError, ValueError, TypeError) as exc:
        _fail(f"config {path}: {exc}")


def _load_corpus(embeddings, inventory_path):
    try:
        store = load_vectors(embeddings)
    except (OSError, ValueError) as exc:
        _fail(f"embeddings {embeddings}: {exc}")
    try:
        if inventory_path:
            inventory = load_sense_inventory(inventory_path, store)
        else:
            inventory = inventory_from_store(store)
    except (OSError, ValueError, KeyError) as exc:
        _fail(f"inventory {inventory_path}: {exc}")
    return store, inventory


@click.group()
def main():
    """Track conversation context and word interpretations online."""


@main.command()
@click.option("--cases", "cases_path", required=True, type=click.Path(exists=True))
@click.option("--embeddings", required=True, type=click.Path(exists=True))
@click.option("--inventory", "inventory_path", default=None, type=click.Path(exists=True))
@click.option("--mode", default="full", type=click.Choice(list(MODES)))
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
def replay(cases_path, embeddings, inventory_path, mode, config_path, out_dir):
    """Replay recorded cases and write metrics (JSON + per-turn CSV)."""
    store, inventory = _load_corpus(embeddings, inventory_path)
    cfg = _load_config(config_path) if config_path else SessionConfig(dim=store.dim)
    try:
        cases = load_cases(cases_path)
    except (OSError, ValueError, KeyError) as exc:
        _fail(f"cases {cases_path}: {exc}")
    results = [run_case(c, store, inventory, cfg, mode) for c in cases]
    bundle = aggregate(results)
    bundle["mode"] = mode
    os.makedirs(out_dir, exist_ok=True)
    write_metrics(
        bundle,
        os.path.join(out_dir, f"metrics_{mode}.json"),
        os.path.join(out_dir, f"trajectory_{mode}.csv"),
    )
    click.echo(
        f"{mode}: {bundle['n_cases']} cases, accuracy {bundle['accuracy']:.3f}, "
        f"mean final gold confidence {bundle['mean_final_gold_confidence']:.3f}"
    )


@main.command()
@click.option("--grid", "grid_path", required=True, type=click.Path(exists=True))
@click.option("--cases", "cases_path", required=True, type=click.Path(exists=True))
@click.option("--embeddings", required=True, type=click.Path(exists=True))
@click.option("--inventory", "inventory_path", default=None, type=click.Path(exists=True))
@click.option("--mode", default="full", type=click.Choice(list(MODES)))
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
def sweep(grid_path, cases_path, embeddings, inventory_path, mode, config_path, out_path):
    """Exhaustive grid search over config fields; one metrics row per combo."""
    store, inventory = _load_corpus(embeddings, inventory_path)
    base = _load_config(config_path) if config_path else SessionConfig(dim=store.dim)
    try:
        with open(grid_path, "r", encoding="utf-8") as fh:
            grid = json.load(fh)
        cases = load_cases(cases_path)
    except (OSError, ValueError, KeyError) as exc:
        _fail(str(exc))
    rows = grid_sweep(grid, base, store, inventory, cases, mode)
    with open(out_path, "w", encoding="utf-8") as fh:
        json.dump(rows, fh, indent=2)
        fh.write("\n")
    best = max(rows, key=lambda r: r["accuracy"])
    click.echo(f"{len(rows)} combos; best accuracy {best['accuracy']:.3f}: {best}")


@main.command()
@click.option("--spec", "spec_path", default=None, type=click.Path(exists=True))
@click.option("--seed", default=42, type=int, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
def synth(spec_path, seed, out_dir):
    """Generate a synthetic benchmark corpus (embeddings + cases)."""
    try:
        if spec_path:
            with open(spec_path, "r", encoding="utf-8") as fh:
                spec = SyntheticSpec(**json.load(fh))
        else:
            spec = SyntheticSpec()
        store, _, cases = generate_synthetic(spec, np.random.default_rng(seed))
    except (OSError, ValueError, TypeError) as exc:
        _fail(str(exc))
    os.makedirs(out_dir, exist_ok=True)
    store.save(os.path.join(out_dir, "embeddings.txt"))
    save_cases(cases, os.path.join(out_dir, "cases.jsonl"))
    click.echo(f"wrote {len(store)} vectors and {len(cases)} cases to {out_dir}")


@main.command()
@click.option("--embeddings", required=True, type=click.Path(exists=True))
@click.option("--inventory", "inventory_path", default=None, type=click.Path(exists=True))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, type=int, show_default=True)
def serve(embeddings, inventory_path, host, port):
    """Start the HTTP/JSON session service."""
    from .service import serve as run_service

    store, inventory = _load_corpus(embeddings, inventory_path)
    run_service(store, {"default": inventory}, host=host, port=port)


def _bars(per_sense: dict[str, float], width: int = 30) -> str:
    lines = []
    for sid, conf in sorted(per_sense.items(), key=lambda kv: -kv[1]):
        filled = int(round(conf * width))
        lines.append(f"  {sid:>16s} |{'#' * filled}{'.' * (width - filled)}| {conf:.2f}")
    return "\n".join(lines)


@main.command()
@click.option("--embeddings", required=True, type=click.Path(exists=True))
@click.option("--inventory", "inventory_path", default=None, type=click.Path(exists=True))
@click.option("--targets", required=True, help="comma-separated ambiguous labels to track")
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@click.option("--interactive", is_flag=True, default=False)
def session(embeddings, inventory_path, targets, config_path, interactive):
    """Terminal chat loop; prefix lines with 'me:' or 'them:' to set the role."""
    store, inventory = _load_corpus(embeddings, inventory_path)
    cfg = _load_config(config_path) if config_path else SessionConfig(dim=store.dim)
    target_list = [t.strip() for t in targets.split(",") if t.strip()]
    try:
        sess = Session(cfg, store, inventory, target_list)
    except (KeyError, ValueError) as exc:
        _fail(str(exc))
    click.echo("type 'me: ...' or 'them: ...'; empty line quits")
    t = 0
    stream = sys.stdin if not interactive else None
    while True:
        try:
            line = input("> ") if interactive else (stream.readline() or "")
        except EOFError:
            break
        line = line.strip()
        if not line:
            break
        if line.startswith("me:"):
            role, text = OWN, line[3:]
        elif line.startswith("them:"):
            role, text = OTHER, line[5:]
        else:
            click.echo("  (prefix with 'me:' or 'them:')")
            continue
        tokens = text.split()
        if not tokens:
            click.echo("  (empty utterance)")
            continue
        try:
            sess.process_turn(Utterance(role, tokens, t))
        except ValueError as exc:
            click.echo(f"  error: {exc}")
            continue
        t += 1
        for label in target_list:
            click.echo(f"{label}:")
            click.echo(_bars(sess.confidence(label).per_sense))


if __name__ == "__main__":
    main()
