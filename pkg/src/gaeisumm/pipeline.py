"""Two-phase orchestration, inference, output files and checkpoints."""

from __future__ import annotations

import csv
import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import gae, summarizer
from .config import RunConfig
from .corpus import CorpusRecord, fallback_embed
from .graph import build_adjacency
from .numerics import DegenerateInputError, ParamTensor
from .rouge import RougeScore, corpus_mean, score
from .summarizer import GRU_NAMES, ScoredSentence, SummarizerParams

log = logging.getLogger(__name__)

CHECKPOINT_FORMAT = "gaeisumm-checkpoint"
CHECKPOINT_VERSION = 1


class CheckpointError(ValueError):
    pass


@dataclass
class Model:
    config: RunConfig
    summarizer: SummarizerParams
    gae_sent: gae.GaeParams | None = None
    gae_doc: gae.GaeParams | None = None


@dataclass
class DocumentSummary:
    id: str
    selected: list[int]
    summary: str
    scores: list[ScoredSentence]
    rouge: RougeScore | None = None


@dataclass
class PipelineResult:
    model: Model
    summaries: list[DocumentSummary]
    corpus_mean: RougeScore | None
    log_rows: list[tuple[str, int, float]] = field(default_factory=list)
    z_doc: np.ndarray | None = None


def ensure_embeddings(records, seed: int = 0) -> list[CorpusRecord]:
    if records and records[0].embeddings is None:
        return fallback_embed(records, seed)
    return list(records)


def _evaluate(records, selections) -> tuple[list[DocumentSummary], RougeScore | None]:
    out = []
    for r, (selected, scores) in zip(records, selections):
        text = " ".join(r.sentences[i] for i in selected)
        rs = score(text, r.reference_summary) if r.reference_summary is not None else None
        out.append(DocumentSummary(r.id, list(selected), text, list(scores), rs))
    scored = [s.rouge for s in out if s.rouge is not None]
    return out, (corpus_mean(scored) if scored else None)


def run_pipeline(records, cfg: RunConfig) -> PipelineResult:
    if not records:
        raise DegenerateInputError("no documents in corpus")
    records = ensure_embeddings(records, cfg.seed)
    docs = [r.embeddings for r in records]
    d = docs[0].shape[1]
    P = cfg.latent_for(d)
    rows = []

    # phase 1: document graph -> GAE_doc -> Z_doc
    X_doc = np.stack([summarizer.doc_embedding(X) for X in docs])
    gae_doc = None
    if cfg.no_gae_doc:
        z_doc = X_doc
    else:
        g_doc = build_adjacency(X_doc, cfg.min_edge_weight)
        # raw sentence rows live in the input space, so the targets must too
        latent_doc = d if cfg.no_gae_sent else P
        gae_doc, out, trace = gae.train_gae(g_doc, X_doc, cfg.lr_doc, cfg.epochs_doc, cfg.seed,
                                            latent_doc, cfg.decoder, stream=1)
        z_doc = out.Z
        rows += [("doc", i, v) for i, v in enumerate(trace)]

    # phase 2: joint sentence-level training
    gae_sent = None if cfg.no_gae_sent else gae.init_gae(d, P, cfg.seed, cfg.decoder, stream=2)
    res = summarizer.train(docs, z_doc, cfg, gae_sent, ids=[r.id for r in records])
    rows += [("sent", i, v) for i, v in enumerate(res.trace)]

    model = Model(cfg, res.params, res.gae_sent, gae_doc)
    summaries, mean = _evaluate(records, [(s.selected, s.scores) for s in res.selections])
    return PipelineResult(model, summaries, mean, rows, z_doc)


def summarize(model: Model, records) -> tuple[list[DocumentSummary], RougeScore | None]:
    """Inference with frozen parameters; document order fixes the cluster seeds."""
    records = ensure_embeddings(records, model.config.seed)
    cfg = model.config
    selections = []
    for i, r in enumerate(records):
        g = build_adjacency(r.embeddings, cfg.min_edge_weight)
        dp = summarizer.run_document(r.embeddings, g, model.gae_sent, model.summarizer, cfg, i)
        selections.append((dp.selected, dp.scored))
    return _evaluate(records, selections)


# --- output files ------------------------------------------------------------

def summary_record(s: DocumentSummary) -> dict:
    return {
        "id": s.id,
        "selected_indices": s.selected,
        "summary": s.summary,
        "scores": [{"index": x.index, "score_rel": x.score_rel, "score_pos": x.score_pos,
                    "score": x.score, "cluster": x.cluster} for x in s.scores],
    }


def write_summaries(path, summaries) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for s in summaries:
            fh.write(json.dumps(summary_record(s), ensure_ascii=False) + "\n")


def metrics_record(summaries, mean: RougeScore) -> dict:
    return {
        "per_document": [{"id": s.id, **s.rouge.as_dict()} for s in summaries if s.rouge is not None],
        "corpus_mean": mean.as_dict(),
    }


def write_metrics(path, summaries, mean: RougeScore) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(metrics_record(summaries, mean), fh, indent=2)
        fh.write("\n")


def write_log(path, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["phase", "epoch", "loss"])
        for phase, epoch, loss in rows:
            w.writerow([phase, epoch, repr(float(loss))])


def write_outputs(result: PipelineResult, out_dir) -> dict[str, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {"summaries": out_dir / "summaries.jsonl", "log": out_dir / "train_log.csv"}
    write_summaries(paths["summaries"], result.summaries)
    write_log(paths["log"], result.log_rows)
    if result.corpus_mean is not None:
        paths["metrics"] = out_dir / "metrics.json"
        write_metrics(paths["metrics"], result.summaries, result.corpus_mean)
    return paths


# --- checkpoints -------------------------------------------------------------

def _tensor_dict(t: ParamTensor) -> dict:
    return {"shape": list(t.shape), "value": t.value.ravel().tolist(), "m": t.m.ravel().tolist(),
            "v": t.v.ravel().tolist(), "step": t.step}


def _tensor_from(d: dict, name: str) -> ParamTensor:
    try:
        shape = tuple(int(x) for x in d["shape"])
        size = int(np.prod(shape))
        arrs = {}
        for key in ("value", "m", "v"):
            a = np.asarray(d[key], dtype=np.float64)
            if a.size != size:
                raise CheckpointError(f"{name}.{key}: {a.size} values for shape {shape}")
            arrs[key] = a.reshape(shape)
        t = ParamTensor(arrs["value"], step=int(d["step"]), name=name.rsplit(".", 1)[-1])
        t.m, t.v = arrs["m"], arrs["v"]
        return t
    except CheckpointError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise CheckpointError(f"{name}: malformed tensor ({e})") from None


def _gae_dict(p: gae.GaeParams | None):
    if p is None:
        return None
    d = {"decoder": p.decoder, "theta0": _tensor_dict(p.theta0)}
    if p.theta1 is not None:
        d["theta1"] = _tensor_dict(p.theta1)
    return d


def _gae_from(d, name):
    if d is None:
        return None
    t1 = _tensor_from(d["theta1"], name + ".theta1") if "theta1" in d else None
    return gae.GaeParams(_tensor_from(d["theta0"], name + ".theta0"), t1, d["decoder"])


def checkpoint_dict(model: Model) -> dict:
    s = model.summarizer
    return {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "config": model.config.to_dict(),
        "gae_sent": _gae_dict(model.gae_sent),
        "gae_doc": _gae_dict(model.gae_doc),
        "summarizer": {
            "alpha": s.alpha, "beta": s.beta, "margin": s.margin,
            "normalization": s.normalization,
            "gru": {n: _tensor_dict(s.gru[n]) for n in GRU_NAMES},
            "omega": _tensor_dict(s.omega), "W1": _tensor_dict(s.W1), "W2": _tensor_dict(s.W2),
        },
    }


def save_model(model: Model, path) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(checkpoint_dict(model)), encoding="utf-8")
    os.replace(tmp, path)


def load_model(path) -> Model:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointError(f"cannot read checkpoint {path}: {e}") from None
    if not isinstance(data, dict) or data.get("format") != CHECKPOINT_FORMAT:
        raise CheckpointError(f"{path} is not a {CHECKPOINT_FORMAT} file")
    if data.get("version") != CHECKPOINT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {data.get('version')!r}")
    try:
        cfg = RunConfig.from_dict(data["config"])
        s = data["summarizer"]
        params = SummarizerParams(
            {n: _tensor_from(s["gru"][n], "gru." + n) for n in GRU_NAMES},
            _tensor_from(s["omega"], "omega"), _tensor_from(s["W1"], "W1"),
            _tensor_from(s["W2"], "W2"), s["alpha"], s["beta"], s["margin"], s["normalization"])
        model = Model(cfg, params, _gae_from(data["gae_sent"], "gae_sent"),
                      _gae_from(data["gae_doc"], "gae_doc"))
    except CheckpointError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise CheckpointError(f"malformed checkpoint {path}: {e}") from None
    if model.gae_sent is not None and model.gae_sent.latent_dim != params.latent_dim:
        raise CheckpointError("sentence GAE latent size does not match the summarizer")
    return model
