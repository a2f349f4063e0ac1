"""End-to-end pipeline stages wiring the library modules together.

Every stage reads and writes only documented JSONL / checkpoint / merges
artifacts inside the configured output directory, so each intermediate
stays inspectable and re-running a stage overwrites byte-identical
outputs for identical inputs.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, fields
from datetime import datetime, timezone
from pathlib import Path

from . import bpe as bpe_mod
from .abstraction import AbstractionMap, abstract_pair, is_abstract_id
from .classify import classify
from .corpusio import (
    canonical_json,
    read_jsonl,
    read_triplets,
    write_candidates,
    write_jsonl,
    write_triplets,
)
from .dataset import save_split, split_random, split_timewise
from .errors import ConfigError
from .metrics import EvalReport, evaluate_run
from .mining import FilterPolicy, dedupe, filter_small, mine_repos
from .model import (
    ModelConfig,
    TrainConfig,
    Vocab,
    beam_search,
    load_checkpoint,
    save_checkpoint,
    train,
)
from .report import render_full_report

log = logging.getLogger(__name__)

MODES = ("raw", "abs", "bpe", "abs+bpe")

ARTIFACTS = {
    "corpus": "corpus.jsonl",
    "split_manifest": "split_manifest.json",
    "train": "train.jsonl",
    "valid": "valid.jsonl",
    "test": "test.jsonl",
    "train_tok": "train.tok.jsonl",
    "valid_tok": "valid.tok.jsonl",
    "test_tok": "test.tok.jsonl",
    "merges": "bpe.merges",
    "checkpoint": "model.ckpt",
    "train_log": "training_log.json",
    "candidates": "candidates.jsonl",
    "report": "report.json",
    "report_text": "report.txt",
    "types": "types.jsonl",
}


@dataclass
class PipelineConfig:
    repo_list: str = "repos.txt"
    out_dir: str = "out"
    filter_enabled: bool = True
    max_method_tokens: int = 50
    max_changed_tokens: int = 5
    mode: str = "abs+bpe"
    split: str = "timewise"
    boundary: str = "2020-01-01"
    train_fraction: float = 0.8
    fractions: str = "0.8,0.1,0.1"
    seed: int = 0
    num_merges: int = 8000
    since: str = ""
    until: str = ""
    d_model: int = 128
    num_heads: int = 4
    encoder_layers: int = 2
    decoder_layers: int = 2
    ffn_dim: int = 512
    max_seq_len: int = 256
    dropout: float = 0.1
    dtype: str = "float32"
    learning_rate: float = 5e-5
    batch_size: int = 4
    epochs: int = 15
    grad_clip: float = 5.0
    beam_widths: str = "1,5,10,15"
    metric_weights: str = "0.25,0.25,0.25,0.25"
    jobs: int = 1

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.split not in ("timewise", "random"):
            raise ConfigError(f"split must be timewise or random, got {self.split!r}")

    # -- parsed views -------------------------------------------------

    @property
    def beam_list(self) -> list[int]:
        return [int(x) for x in str(self.beam_widths).split(",") if str(x).strip()]

    @property
    def weight_tuple(self) -> tuple[float, float, float, float]:
        parts = [float(x) for x in str(self.metric_weights).split(",")]
        if len(parts) != 4:
            raise ConfigError("metric_weights needs exactly four values")
        return tuple(parts)  # type: ignore[return-value]

    @property
    def fraction_tuple(self) -> tuple[float, float, float]:
        parts = [float(x) for x in str(self.fractions).split(",")]
        if len(parts) != 3:
            raise ConfigError("fractions needs exactly three values")
        return tuple(parts)  # type: ignore[return-value]

    @property
    def boundary_dt(self) -> datetime:
        return _parse_date(self.boundary)

    def model_config(self, vocab_size: int) -> ModelConfig:
        return ModelConfig(
            vocab_size=vocab_size,
            d_model=self.d_model,
            num_heads=self.num_heads,
            encoder_layers=self.encoder_layers,
            decoder_layers=self.decoder_layers,
            ffn_dim=self.ffn_dim,
            max_seq_len=self.max_seq_len,
            dropout=self.dropout,
            seed=self.seed,
            dtype=self.dtype,
        )

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            learning_rate=self.learning_rate,
            batch_size=self.batch_size,
            epochs=self.epochs,
            grad_clip=self.grad_clip,
        )

    def path(self, artifact: str) -> Path:
        return Path(self.out_dir) / ARTIFACTS[artifact]


def _parse_date(text: str) -> datetime:
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt


_BOOL_TRUE = {"1", "true", "yes", "on"}
_BOOL_FALSE = {"0", "false", "no", "off"}


def _coerce(name: str, kind: type, raw: str):
    if kind is bool:
        lowered = raw.strip().lower()
        if lowered in _BOOL_TRUE:
            return True
        if lowered in _BOOL_FALSE:
            return False
        raise ConfigError(f"{name}: expected a boolean, got {raw!r}")
    try:
        return kind(raw)
    except ValueError as e:
        raise ConfigError(f"{name}: {e}") from e


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> PipelineConfig:
    """Key-value config file, then UPDATEBENCH_* environment variables,
    then explicit overrides (CLI flags), highest priority last."""
    values: dict[str, object] = {}
    known = {f.name: f.type for f in fields(PipelineConfig)}
    kinds = {f.name: type(getattr(PipelineConfig(), f.name)) for f in fields(PipelineConfig)}
    if path is not None:
        text = Path(path).read_text(encoding="utf-8")
        for line_no, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{line_no}: expected key = value")
            key, raw = (part.strip() for part in line.split("=", 1))
            if key not in known:
                raise ConfigError(f"{path}:{line_no}: unknown key {key!r}")
            values[key] = _coerce(key, kinds[key], raw)
    for key in known:
        env = os.environ.get(f"UPDATEBENCH_{key.upper()}")
        if env is not None:
            values[key] = _coerce(key, kinds[key], env)
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in known:
            raise ConfigError(f"unknown config override {key!r}")
        values[key] = value
    return PipelineConfig(**values)


def require_artifact(path: Path) -> Path:
    if not path.exists():
        raise FileNotFoundError(str(path))
    return path


# ---------------------------------------------------------------------------
# stages


def stage_mine(cfg: PipelineConfig) -> Path:
    repo_list = require_artifact(Path(cfg.repo_list))
    repos = [line.strip() for line in repo_list.read_text().splitlines()
             if line.strip() and not line.strip().startswith("#")]
    since = _parse_date(cfg.since) if cfg.since else None
    until = _parse_date(cfg.until) if cfg.until else None
    triplets = mine_repos(repos, since=since, until=until, jobs=cfg.jobs)
    triplets = dedupe(triplets)
    policy = FilterPolicy(cfg.max_method_tokens, cfg.max_changed_tokens, cfg.filter_enabled)
    kept = filter_small(triplets, policy)
    log.info("mined %d pairs (%d after filtering)", len(triplets), len(kept))
    out = cfg.path("corpus")
    out.parent.mkdir(parents=True, exist_ok=True)
    write_triplets(out, kept, with_ids=True)
    return out


def stage_split(cfg: PipelineConfig) -> Path:
    corpus = require_artifact(cfg.path("corpus"))
    triplets = read_triplets(corpus)
    if cfg.split == "timewise":
        split = split_timewise(triplets, cfg.boundary_dt, cfg.train_fraction, cfg.seed)
    else:
        split = split_random(triplets, cfg.fraction_tuple, cfg.seed)
    return save_split(split, cfg.out_dir)


def _tokenize_record(record: dict, mode: str, model: bpe_mod.BpeModel | None):
    prior = list(record["prior"])
    updated = list(record["updated"])
    mapping = None
    if mode in ("abs", "abs+bpe"):
        prior, updated, mapping = abstract_pair(prior, updated)
    if mode in ("bpe", "abs+bpe"):
        prior = bpe_mod.apply(prior, model)
        updated = bpe_mod.apply(updated, model)
    row = {"example_id": record["example_id"], "source": prior, "target": updated}
    if mapping is not None:
        row["map"] = mapping.to_dict()
    return row


def stage_tokenize(cfg: PipelineConfig) -> list[Path]:
    parts = {}
    for part in ("train", "valid", "test"):
        path = require_artifact(cfg.path(part))
        parts[part] = read_jsonl(path)
    model = None
    if cfg.mode in ("bpe", "abs+bpe"):
        train_tokens = []
        for record in parts["train"]:
            prior = list(record["prior"])
            updated = list(record["updated"])
            if cfg.mode == "abs+bpe":
                prior, updated, _ = abstract_pair(prior, updated)
            train_tokens.append(prior)
            train_tokens.append(updated)
        model = bpe_mod.learn(train_tokens, cfg.num_merges)
        bpe_mod.save_merges(model, cfg.path("merges"))
        log.info("learned %d BPE merges", len(model.merges))
    outputs = []
    for part in ("train", "valid", "test"):
        rows = [_tokenize_record(r, cfg.mode, model) for r in parts[part]]
        out = cfg.path(f"{part}_tok")
        write_jsonl(out, rows)
        outputs.append(out)
    return outputs


def stage_train(cfg: PipelineConfig) -> Path:
    train_rows = read_jsonl(require_artifact(cfg.path("train_tok")))
    valid_rows = read_jsonl(require_artifact(cfg.path("valid_tok")))
    vocab = Vocab.from_corpus(
        [r["source"] for r in train_rows] + [r["target"] for r in train_rows]
    )
    model_cfg = cfg.model_config(len(vocab))
    pairs = lambda rows: [(vocab.encode(r["source"]), vocab.encode(r["target"])) for r in rows]
    params, history = train(pairs(train_rows), pairs(valid_rows), model_cfg, cfg.train_config())
    meta = {"mode": cfg.mode, "marker": bpe_mod.DEFAULT_MARKER}
    save_checkpoint(cfg.path("checkpoint"), params, model_cfg, vocab.tokens, meta)
    cfg.path("train_log").write_text(canonical_json({"history": history}) + "\n")
    log.info("trained %d epochs; best valid loss %.4f", len(history),
             min(h["valid_loss"] for h in history))
    return cfg.path("checkpoint")


def _deabstract_lenient(tokens: list[str], mapping: AbstractionMap) -> list[str]:
    # Unmapped IDs stay literal: the candidate is kept alive but can no
    # longer match the reference, mirroring the abstraction limitation.
    return [mapping.backward.get(t, t) if is_abstract_id(t) else t for t in tokens]


def stage_recommend(cfg: PipelineConfig) -> Path:
    params, model_cfg, vocab_tokens, meta = load_checkpoint(require_artifact(cfg.path("checkpoint")))
    test_rows = read_jsonl(require_artifact(cfg.path("test_tok")))
    mode = meta.get("mode", cfg.mode)
    marker = meta.get("marker", bpe_mod.DEFAULT_MARKER)
    vocab = Vocab(vocab_tokens[4:])
    specials = set(vocab.tokens[:4])
    width = max(cfg.beam_list)
    max_len = model_cfg.max_seq_len - 1
    rows = []
    for record in test_rows:
        source = vocab.encode(record["source"])
        if len(source) > model_cfg.max_seq_len:
            log.warning("skipping %s: source too long", record["example_id"])
            rows.append((record["example_id"], []))
            continue
        candidates = beam_search(params, model_cfg, source, beam_width=width, max_len=max_len)
        mapping = AbstractionMap.from_dict(record["map"]) if "map" in record else None
        decoded = []
        for cand in candidates:
            subwords = [t for t in vocab.decode(cand.tokens) if t not in specials]
            tokens = bpe_mod.detokenize(subwords, marker) if mode in ("bpe", "abs+bpe") else subwords
            if mapping is not None:
                tokens = _deabstract_lenient(tokens, mapping)
            decoded.append(tokens)
        rows.append((record["example_id"], decoded))
    out = cfg.path("candidates")
    write_candidates(out, rows)
    return out


def stage_evaluate(cfg: PipelineConfig) -> Path:
    report = evaluate_run(
        require_artifact(cfg.path("candidates")),
        require_artifact(cfg.path("test")),
        ks=cfg.beam_list,
        weights=cfg.weight_tuple,
    )
    out = cfg.path("report")
    out.write_text(canonical_json(report.to_dict()) + "\n")
    return out


def stage_classify(cfg: PipelineConfig) -> Path:
    rows = read_jsonl(require_artifact(cfg.path("test")))
    out_rows = [
        {"example_id": r["example_id"], "update_type": classify(r.get("message", "")).value}
        for r in rows
    ]
    out = cfg.path("types")
    write_jsonl(out, out_rows)
    return out


def stage_report(cfg: PipelineConfig, timeignore_dir: str | None = None) -> Path:
    report = EvalReport.from_dict(json.loads(require_artifact(cfg.path("report")).read_text()))
    other = None
    if timeignore_dir:
        other_path = Path(timeignore_dir) / ARTIFACTS["report"]
        other = EvalReport.from_dict(json.loads(require_artifact(other_path).read_text()))
    text = render_full_report(report, other)
    out = cfg.path("report_text")
    out.write_text(text)
    return out


def run_stage(name: str, cfg: PipelineConfig, **kwargs):
    stages = {
        "mine": stage_mine,
        "split": stage_split,
        "tokenize": stage_tokenize,
        "train": stage_train,
        "recommend": stage_recommend,
        "evaluate": stage_evaluate,
        "classify": stage_classify,
        "report": stage_report,
    }
    if name not in stages:
        raise ConfigError(f"unknown stage {name!r}")
    return stages[name](cfg, **kwargs)
