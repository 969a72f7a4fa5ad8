"""Command line entry points for the dialogue toolkit."""

from __future__ import annotations

import functools
import json
from collections import Counter
from pathlib import Path

import click

from . import annotation
from . import corpus as C
from . import database as dbm
from . import goals as G
from . import harness as H
from . import nlg
from . import report


def _load_db(db_path: str | None, db_seed: int) -> dbm.Database:
    if db_path:
        return dbm.load_database(db_path)
    return dbm.generate_database(seed=db_seed)


def _db_options(cmd):
    cmd = click.option("--db", "db_path", type=click.Path(exists=True),
                       default=None,
                       help="Database JSON; generated when omitted.")(cmd)
    cmd = click.option("--db-seed", default=0, show_default=True,
                       help="Seed for the generated database.")(cmd)
    return cmd


def _friendly(fn):
    """Surface expected failures as one-line errors instead of tracebacks."""
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ValueError, RuntimeError, KeyError, OSError) as exc:
            raise click.ClickException(str(exc) or type(exc).__name__) from exc
    return wrapper


@click.group()
def main():
    """Cross-domain task-oriented dialogue toolkit."""


@main.command("gen-db")
@click.option("--seed", default=0, show_default=True)
@click.option("--attr", default=None, type=int, help="Attraction count.")
@click.option("--rest", default=None, type=int, help="Restaurant count.")
@click.option("--hotel", default=None, type=int, help="Hotel count.")
@click.option("--out", required=True, type=click.Path())
@_friendly
def gen_db(seed, attr, rest, hotel, out):
    """Generate a synthetic venue database."""
    sizes = {}
    if attr is not None:
        sizes["attraction"] = attr
    if rest is not None:
        sizes["restaurant"] = rest
    if hotel is not None:
        sizes["hotel"] = hotel
    db = dbm.generate_database(seed, sizes=sizes or None)
    dbm.save_database(db, out)
    counts = {d: len(db.entities(d)) for d in db.domains}
    click.echo(f"wrote {out}: " +
               ", ".join(f"{d}={n}" for d, n in counts.items() if n))


@main.command("gen-goals")
@_db_options
@click.option("--n", default=10, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", required=True, type=click.Path())
@_friendly
def gen_goals(db_path, db_seed, n, seed, out):
    """Sample user goals and write them as tuple-row JSON."""
    db = _load_db(db_path, db_seed)
    goals = [G.generate_goal(db, G.GoalGenConfig(seed=seed + i))
             for i in range(n)]
    Path(out).parent.mkdir(parents=True, exist_ok=True)
    Path(out).write_text(
        json.dumps([g.to_dict() for g in goals], indent=2,
                   ensure_ascii=False) + "\n", encoding="utf-8")
    hist = Counter(g.goal_type for g in goals)
    click.echo(f"wrote {out}: {n} goals " + ", ".join(
        f"{t}={hist[t]}" for t in G.GOAL_TYPES if hist[t]))


@main.command("annotate")
@_db_options
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="Output corpus; defaults to rewriting the input.")
@_friendly
def annotate_cmd(db_path, db_seed, in_path, out_path):
    """Re-annotate a corpus's utterances with the keyword annotator."""
    db = _load_db(db_path, db_seed)
    records = C.load_corpus(in_path)
    lexicon = annotation.build_lexicon(db)
    out = [H.annotate_with_keywords(db, r, lexicon) for r in records]
    C.save_corpus(out, out_path or in_path)
    click.echo(f"annotated {len(out)} dialogues -> {out_path or in_path}")


@main.command("agreement")
@click.argument("gold", type=click.Path(exists=True))
@click.argument("pred", type=click.Path(exists=True))
@click.option("--out", type=click.Path(), default=None)
@_friendly
def agreement_cmd(gold, pred, out):
    """Score one annotation pass against another."""
    rep = annotation.agreement(C.load_corpus(gold), C.load_corpus(pred))
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(
            json.dumps(rep.to_dict(), indent=2) + "\n", encoding="utf-8")
    click.echo(f"da_f1={rep.da_f1:.4f} state_accuracy={rep.state_accuracy:.4f} "
               f"turns={rep.n_turns}")


@main.command("nlg-extract")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@_friendly
def nlg_extract(in_path, out):
    """Harvest delexicalized templates from an annotated corpus."""
    records = C.load_corpus(in_path)
    store = nlg.TemplateStore().extract(records)
    store.save(out)
    click.echo(f"wrote {out}: {store.size()} templates "
               f"({store.skipped} skipped)")


@main.command("nlg-gen")
@click.option("--store", "store_path", type=click.Path(exists=True),
              default=None, help="Template store; stock store when omitted.")
@click.option("--acts", "acts_path", required=True,
              type=click.Path(exists=True),
              help="JSON file: act rows for one turn, or a list of turns.")
@click.option("--speaker", type=click.Choice(["user", "sys"]), default="sys",
              show_default=True)
@click.option("--seed", default=0, show_default=True)
@_friendly
def nlg_gen(store_path, acts_path, speaker, seed):
    """Render dialogue acts to text."""
    import random

    store = (nlg.TemplateStore.load(store_path) if store_path
             else nlg.seed_store())
    data = json.loads(Path(acts_path).read_text(encoding="utf-8"))
    if data and all(isinstance(x, (list, tuple)) and len(x) == 4
                    and not isinstance(x[0], (list, tuple)) for x in data):
        data = [data]
    rng = random.Random(seed)
    for turn_acts in data:
        click.echo(nlg.generate(turn_acts, speaker, store, rng))


@main.command("stats")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path(),
              help="Stats JSON; histogram CSV and figure land beside it.")
@_friendly
def stats_cmd(in_path, out):
    """Corpus statistics with a dialogue-length histogram and figure."""
    records = C.load_corpus(in_path)
    for path in report.corpus_report(records, out):
        click.echo(f"wrote {path}")


@main.command("import-crosswoz")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--out", type=click.Path(), default=None,
              help="Write the imported dialogues as a canonical corpus.")
@_friendly
def import_crosswoz_cmd(in_path, out):
    """Convert a released-format corpus file to the canonical schema."""
    records = C.load_crosswoz_file(in_path)
    hist = Counter(r.goal_type for r in records)
    if out:
        C.save_corpus(records, out)
    click.echo(f"imported {len(records)} dialogues: " + ", ".join(
        f"{t}={hist[t]}" for t in G.GOAL_TYPES if hist[t]))


@main.command("simulate")
@_db_options
@click.option("--n", default=1, show_default=True)
@click.option("--goal-type", type=click.Choice(G.GOAL_TYPES), default=None)
@click.option("--level", type=click.Choice(H.LEVELS), default="da",
              show_default=True)
@click.option("--wizard", type=click.Choice(H.WIZARDS), default="rule",
              show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--max-turns", default=40, show_default=True)
@click.option("--out", required=True, type=click.Path())
@_friendly
def simulate_cmd(db_path, db_seed, n, goal_type, level, wizard, seed,
                 max_turns, out):
    """Run self-play sessions and write them as a corpus."""
    db = _load_db(db_path, db_seed)
    types = (goal_type,) if goal_type else G.GOAL_TYPES
    buckets = H.sample_goals_by_type(db, (n + len(types) - 1) // len(types),
                                     seed=seed, types=types)
    goals = [g for t in types for g in buckets[t]][:n]
    records = []
    for i, goal in enumerate(goals):
        cfg = H.SimConfig(level=level, wizard=wizard, max_turns=max_turns,
                          seed=seed + i)
        rec = H.run_session(db, goal, cfg, record_id=f"sim-{i:05d}")
        records.append(rec)
        click.echo(f"{rec.id} type={rec.goal_type} turns="
                   f"{rec.metadata['n_turns']} "
                   f"finished={rec.metadata['finished']}")
    C.save_corpus(records, out)
    click.echo(f"wrote {out}: {len(records)} dialogues")


@main.command("finish-rate")
@_db_options
@click.option("--n", default=100, show_default=True,
              help="Sessions per goal type.")
@click.option("--level", type=click.Choice(H.LEVELS), default="da",
              show_default=True)
@click.option("--wizard", type=click.Choice(H.WIZARDS), default="rule",
              show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--max-turns", default=40, show_default=True)
@click.option("--out", required=True, type=click.Path(),
              help="Report JSON; rate CSV and figure land beside it.")
@_friendly
def finish_rate_cmd(db_path, db_seed, n, level, wizard, seed, max_turns, out):
    """Task finish rate per goal type, with CSV and figure output."""
    db = _load_db(db_path, db_seed)
    cfg = H.SimConfig(level=level, wizard=wizard, max_turns=max_turns,
                      seed=seed)
    rep = H.finish_rate(db, n, cfg)
    for t, d in rep.per_type.items():
        click.echo(f"{t:5s} rate={d['finish_rate']:.3f} "
                   f"avg_turns={d['avg_turns']:.1f} n={d['n']}")
    click.echo(f"overall rate={rep.overall['finish_rate']:.3f}")
    for path in report.finish_report(rep, out):
        click.echo(f"wrote {path}")


@main.command("serve")
@_db_options
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@_friendly
def serve_cmd(db_path, db_seed, host, port):
    """Serve the live session API."""
    import uvicorn

    from . import service

    db = _load_db(db_path, db_seed)
    uvicorn.run(service.create_app(db), host=host, port=port)


if __name__ == "__main__":
    main()
