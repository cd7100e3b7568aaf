"""Command line entry point: embed, summarize, evaluate, baseline."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import fields
from pathlib import Path

from .config import ConfigError, RunConfig, load_config
from .corpus import CorpusError, fallback_embed, load_corpus, write_corpus
from .numerics import DegenerateInputError, NumericError
from .pipeline import (CheckpointError, PipelineResult, _evaluate, load_model, run_pipeline,
                       save_model, summarize, write_metrics, write_outputs, write_summaries)
from .rouge import baseline_lexrank, corpus_mean, score

log = logging.getLogger("gaeisumm")

_OPTIONAL_INT = {"latent_dim", "attention_dim", "top_k"}


def _add_config_flags(ap: argparse.ArgumentParser) -> None:
    ap.add_argument("--config", type=Path, help="JSON file with RunConfig fields")
    g = ap.add_argument_group("config overrides")
    for f in fields(RunConfig):
        flag = "--" + f.name.replace("_", "-")
        if isinstance(f.default, bool):
            # BooleanOptionalAction would read "--no-position" as a negation
            g.add_argument(flag, dest=f.name, action="store_const", const=True, default=None)
        else:
            kind = int if f.name in _OPTIONAL_INT else type(f.default)
            g.add_argument(flag, dest=f.name, type=kind, default=None)


def _config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    return cfg.replace(**{f.name: getattr(args, f.name) for f in fields(RunConfig)})


def _records(args, seed: int = 0):
    records = load_corpus(args.corpus)
    if records and records[0].embeddings is None:
        records = fallback_embed(records, seed)
    return records


def cmd_embed(args) -> int:
    records = load_corpus(args.corpus)
    if records and records[0].embeddings is not None and not args.force:
        log.warning("corpus already has embeddings; pass --force to replace them")
    else:
        records = fallback_embed([r.__class__(r.id, r.sentences, None, r.reference_summary)
                                  for r in records], args.seed)
    write_corpus(records, args.out)
    print(f"wrote {len(records)} records to {args.out}")
    return 0


def cmd_summarize(args) -> int:
    if args.load_model:
        model = load_model(args.load_model)
        records = _records(args, model.config.seed)
        summaries, mean = summarize(model, records)
        result = PipelineResult(model, summaries, mean)
    else:
        cfg = _config(args)
        records = _records(args, cfg.seed)
        result = run_pipeline(records, cfg)
    paths = write_outputs(result, args.out_dir)
    if args.save_model:
        save_model(result.model, args.save_model)
        paths["model"] = Path(args.save_model)
    for name, p in paths.items():
        print(f"{name}: {p}")
    if result.corpus_mean is not None:
        m = result.corpus_mean
        print(f"corpus mean  R-1 {m.r1:.4f}  R-2 {m.r2:.4f}  R-L {m.rl:.4f}")
    return 0


def _read_jsonl(path):
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if line.strip():
                try:
                    rows.append(json.loads(line))
                except json.JSONDecodeError as e:
                    raise CorpusError(f"{path} line {lineno}: malformed JSON ({e.msg})") from None
    return rows


def cmd_evaluate(args) -> int:
    rows = _read_jsonl(args.summaries)
    refs = {}
    if args.corpus:
        refs = {r.id: r.reference_summary for r in load_corpus(args.corpus)}
    per_doc = []
    for row in rows:
        rid = row.get("id")
        ref = row.get("reference_summary", refs.get(rid))
        if ref is None:
            raise CorpusError(f"record {rid!r}: no reference summary available")
        if not isinstance(row.get("summary"), str):
            raise CorpusError(f"record {rid!r}: missing string 'summary'")
        per_doc.append((rid, score(row["summary"], ref)))
    if not per_doc:
        raise DegenerateInputError("no summaries to evaluate")
    mean = corpus_mean([s for _, s in per_doc])
    out = {"per_document": [{"id": rid, **s.as_dict()} for rid, s in per_doc],
           "corpus_mean": mean.as_dict()}
    text = json.dumps(out, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    print(f"corpus mean  R-1 {mean.r1:.4f}  R-2 {mean.r2:.4f}  R-L {mean.rl:.4f}")
    return 0


def cmd_baseline(args) -> int:
    records = _records(args, args.seed)
    selections = []
    for r in records:
        sel = baseline_lexrank(r.embeddings, args.top_k)
        selections.append((sel, []))
    summaries, mean = _evaluate(records, selections)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_summaries(out_dir / "summaries.jsonl", summaries)
    print(f"summaries: {out_dir / 'summaries.jsonl'}")
    if mean is not None:
        write_metrics(out_dir / "metrics.json", summaries, mean)
        print(f"corpus mean  R-1 {mean.r1:.4f}  R-2 {mean.r2:.4f}  R-L {mean.rl:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gaeisumm", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("embed", help="add hashed TF-IDF fallback embeddings to a corpus")
    p.add_argument("--corpus", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--force", action="store_true", help="replace existing embeddings")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("summarize", help="train and summarize, or summarize with a saved model")
    p.add_argument("--corpus", required=True, type=Path)
    p.add_argument("--out-dir", required=True, type=Path)
    p.add_argument("--save-model", type=Path)
    p.add_argument("--load-model", type=Path, help="skip training and use this checkpoint")
    _add_config_flags(p)
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("evaluate", help="ROUGE of existing summaries against references")
    p.add_argument("--summaries", required=True, type=Path)
    p.add_argument("--corpus", type=Path, help="corpus supplying reference_summary by id")
    p.add_argument("--out", type=Path, help="write metrics JSON here")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("baseline", help="LexRank-style extractive baseline")
    p.add_argument("--corpus", required=True, type=Path)
    p.add_argument("--out-dir", required=True, type=Path)
    p.add_argument("--top-k", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_baseline)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, CorpusError, CheckpointError, DegenerateInputError, NumericError,
            OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
