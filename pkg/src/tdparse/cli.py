"""Command-line entry point: ``tdparse {gen-synth,train,parse,eval}``.

Settings resolve in three layers: built-in defaults, then an INI config
file (``--config``, section ``[tdparse]``), then command-line flags. The
``TDP_SEED`` environment variable replaces the built-in default seed.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import json
import logging
import os
import sys
from dataclasses import dataclass, fields
from pathlib import Path

from .autodiff import checkpoint as ckpt
from .baselines import LogRegConfig, LogRegModel, logreg_decode, logreg_train, simple_baseline
from .corpus import (
    DOMAIN_DEFAULT_RELATION, PROFILES, RELATIONS, CorpusError, SynthParams, generate_synthetic,
    load_documents, save_documents, split_corpus,
)
from .evaluation import dumps_report, evaluation_report, format_report
from .ranker import RankerConfig, RankerModel, decode, rank_train, write_diagnostics
from .tagger import MappingStats, TaggerConfig, TaggerModel, map_gold_edges, tag_predict, tag_train

log = logging.getLogger("tdparse")

SEED_ENV = "TDP_SEED"


class UsageError(Exception):
    """Bad flag or config value; reported like an argparse error."""


@dataclass
class RunConfig:
    # paths
    train: str | None = None
    dev: str | None = None
    test: str | None = None
    model: str | None = None
    output: str | None = None
    # stage 1
    tagger_word_dim: int = 256
    tagger_pos_dim: int = 32
    tagger_lstm_dim: int = 256
    tagger_hidden_dim: int = 256
    # stage 2
    word_dim: int = 32
    type_dim: int = 16
    lstm_dim: int = 32
    hidden_dim: int = 32
    variant: str = "attention"
    mode: str = "labeled"
    system: str = "neural"
    # training
    seed: int = 0
    learning_rate: float = 0.001
    patience: int = 5
    epochs: int | None = None
    unk_prob: float = 0.25
    # data
    domain: str = "news"
    n_docs: int = 100
    p_chain: float = 0.7
    p_time: float | None = None
    relation_dist: str | None = None
    time_relation_dist: str | None = None
    ratios: str = "0.8,0.1,0.1"

    def check(self) -> None:
        for name in ("tagger_word_dim", "tagger_pos_dim", "tagger_lstm_dim", "tagger_hidden_dim",
                     "word_dim", "type_dim", "lstm_dim", "hidden_dim"):
            if getattr(self, name) <= 0:
                raise UsageError(f"{name} must be positive, got {getattr(self, name)}")
        for name in ("tagger_lstm_dim", "lstm_dim"):
            if getattr(self, name) % 2:
                raise UsageError(f"{name} is split across two directions and must be even")
        if self.domain not in PROFILES:
            raise UsageError(f"domain must be one of {sorted(PROFILES)}, got {self.domain!r}")
        if self.epochs is not None and self.epochs < 0:
            raise UsageError("epochs must be >= 0")

    def tagger_config(self) -> TaggerConfig:
        kw = {} if self.epochs is None else {"max_epochs": self.epochs}
        return TaggerConfig(self.tagger_word_dim, self.tagger_pos_dim, self.tagger_lstm_dim,
                            self.tagger_hidden_dim, self.learning_rate, patience=self.patience,
                            unk_prob=self.unk_prob, **kw)

    def ranker_config(self) -> RankerConfig:
        kw = {} if self.epochs is None else {"max_epochs": self.epochs}
        return RankerConfig(variant=self.variant, mode=self.mode, word_dim=self.word_dim,
                            type_dim=self.type_dim, lstm_dim=self.lstm_dim, hidden_dim=self.hidden_dim,
                            default_relation=DOMAIN_DEFAULT_RELATION[self.domain],
                            learning_rate=self.learning_rate, patience=self.patience,
                            unk_prob=self.unk_prob, **kw)

    def logreg_config(self) -> LogRegConfig:
        kw = {} if self.epochs is None else {"max_epochs": self.epochs}
        return LogRegConfig(mode=self.mode, default_relation=DOMAIN_DEFAULT_RELATION[self.domain],
                            patience=self.patience, **kw)


def _coerce(field: dataclasses.Field, raw: str):
    kind = str(field.type)
    if raw.strip().lower() in ("", "none") and "None" in kind:
        return None
    for name, conv in (("int", int), ("float", float)):
        if kind.startswith(name):
            try:
                return conv(raw)
            except ValueError:
                raise UsageError(f"config value {field.name} = {raw!r} is not a valid {name}") from None
    return raw


def resolve_config(args: argparse.Namespace, environ=os.environ) -> RunConfig:
    """Defaults, then environment seed, then config file, then flags."""
    cfg = RunConfig()
    if environ.get(SEED_ENV):
        try:
            cfg.seed = int(environ[SEED_ENV])
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer, got {environ[SEED_ENV]!r}") from None
    by_name = {f.name: f for f in fields(RunConfig)}
    if getattr(args, "config", None):
        parser = configparser.ConfigParser()
        if not parser.read(args.config, encoding="utf-8"):
            raise UsageError(f"cannot read config file {args.config}")
        section = parser["tdparse"] if parser.has_section("tdparse") else parser.defaults()
        for key, raw in section.items():
            name = key.replace("-", "_")
            if name not in by_name:
                raise UsageError(f"unknown config key {key!r} in {args.config}")
            setattr(cfg, name, _coerce(by_name[name], raw))
    for name in by_name:
        value = getattr(args, name, None)
        if value is not None:
            setattr(cfg, name, value)
    cfg.check()
    return cfg


def parse_ratios(text: str) -> tuple[float, float, float]:
    try:
        ratios = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"ratios must be three comma-separated numbers, got {text!r}") from None
    if len(ratios) != 3 or any(r < 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise UsageError(f"ratios must be three non-negative numbers summing to 1, got {text!r}")
    return ratios


def parse_dist(text: str | None) -> dict[str, float] | None:
    """``"before=0.5,overlap=0.5"`` -> dict."""
    if not text:
        return None
    out = {}
    for item in text.split(","):
        key, _, value = item.partition("=")
        if key.strip() not in RELATIONS:
            raise UsageError(f"unknown relation {key.strip()!r} in {text!r}")
        try:
            out[key.strip()] = float(value) if value else 1.0
        except ValueError:
            raise UsageError(f"bad probability in {text!r}") from None
    return out


def _require_file(path: str | None, what: str) -> Path:
    if not path:
        raise UsageError(f"missing {what} path")
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"{what} file not found: {path}")
    return p


def _writable_target(path: str | None, what: str) -> Path:
    if not path:
        raise UsageError(f"missing {what} path")
    p = Path(path)
    parent = p.parent if p.parent != Path("") else Path(".")
    if not parent.is_dir() or not os.access(parent, os.W_OK):
        raise UsageError(f"cannot write {what} to {path}: directory missing or not writable")
    return p


# --- commands ---------------------------------------------------------------

def cmd_gen_synth(cfg: RunConfig, out_dir: str) -> list[Path]:
    ratios = parse_ratios(cfg.ratios)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if not os.access(out, os.W_OK):
        raise UsageError(f"output directory {out} is not writable")
    kw = {}
    if cfg.relation_dist:
        kw["relation_dist"] = parse_dist(cfg.relation_dist)
    if cfg.time_relation_dist:
        kw["time_relation_dist"] = parse_dist(cfg.time_relation_dist)
    params = SynthParams(n_docs=cfg.n_docs, p_chain=cfg.p_chain, p_time=cfg.p_time, profile=cfg.domain, **kw)
    docs = generate_synthetic(params, seed=cfg.seed)
    parts = split_corpus(docs, ratios, seed=cfg.seed)
    paths = []
    for name, part in zip(("train", "dev", "test"), parts):
        path = out / f"{name}.jsonl"
        save_documents(path, part)
        paths.append(path)
        print(f"wrote {len(part)} documents to {path}")
    return paths


def _predicted_training_docs(tagger_path: str, gold_docs, domain: str):
    tagger = TaggerModel.from_checkpoint(ckpt.load(tagger_path))
    docs, stats = [], MappingStats()
    for d in gold_docs:
        mapped, s = map_gold_edges(d, tag_predict(tagger, d), DOMAIN_DEFAULT_RELATION[domain])
        docs.append(mapped)
        stats = stats + s
    print(f"span mapping: {dataclasses.asdict(stats)}")
    return docs


def cmd_train(cfg: RunConfig, stage: int, log_path: str | None, tagger_path: str | None = None) -> str:
    train_path = _require_file(cfg.train, "training corpus")
    dev_path = _require_file(cfg.dev, "dev corpus") if cfg.dev else None
    model_path = _writable_target(cfg.model, "model checkpoint")
    log_file = _writable_target(log_path or f"{model_path}.log.json", "training log")
    if tagger_path:
        _require_file(tagger_path, "tagger checkpoint")
    train = load_documents(train_path)
    dev = load_documents(dev_path) if dev_path else []
    if stage == 1:
        model = tag_train(train, dev, cfg.tagger_config(), seed=cfg.seed)
        checkpoint, history = model.to_checkpoint(), model.history
    elif stage == 2:
        if tagger_path:
            train = _predicted_training_docs(tagger_path, train, cfg.domain)
        if cfg.system == "logistic":
            model = logreg_train(train, dev, cfg.logreg_config(), seed=cfg.seed)
            checkpoint, history = model.to_checkpoint(), model.history
        else:
            model = rank_train(train, dev, cfg.ranker_config(), seed=cfg.seed)
            checkpoint, history = model.to_checkpoint(), model.training_log.epochs
            print(f"skipped training instances: {model.training_log.skipped}")
    else:
        raise UsageError(f"stage must be 1 or 2, got {stage}")
    digest = ckpt.save(model_path, checkpoint)
    with open(log_file, "w", encoding="utf-8") as fh:
        json.dump({"stage": stage, "system": cfg.system if stage == 2 else "tagger",
                   "seed": cfg.seed, "epochs": history}, fh, indent=2, sort_keys=True)
    print(f"checkpoint {model_path} sha256 {digest}")
    return digest


def _stage2_decoder(path: str, variant_flag: str | None, mode_flag: str | None):
    c = ckpt.load(_require_file(path, "stage-2 checkpoint"))
    if c.kind == "ranker":
        model = RankerModel.from_checkpoint(c)
        if variant_flag and variant_flag != model.config.variant:
            raise UsageError(f"--variant {variant_flag} does not match checkpoint variant {model.config.variant}")
        if mode_flag and mode_flag != model.config.mode:
            raise UsageError(f"--mode {mode_flag} does not match checkpoint mode {model.config.mode}")
        return lambda doc: decode(model, doc)
    if c.kind == "logistic":
        model = LogRegModel.from_checkpoint(c)
        if variant_flag:
            raise UsageError("--variant applies to neural checkpoints only; got a logistic checkpoint")
        return lambda doc: logreg_decode(model, doc)
    raise UsageError(f"{path} holds a {c.kind!r} checkpoint, expected a stage-2 model")


def cmd_parse(cfg: RunConfig, args: argparse.Namespace) -> list:
    input_path = _require_file(args.input, "input corpus")
    output_path = _writable_target(cfg.output, "parsed corpus")
    if args.gold_spans and args.pipeline:
        raise UsageError("--gold-spans and --pipeline are mutually exclusive")
    docs = load_documents(input_path)
    if args.pipeline:
        tagger = TaggerModel.from_checkpoint(ckpt.load(_require_file(args.tagger, "tagger checkpoint")))
        docs = [tag_predict(tagger, d) for d in docs]
    if cfg.system == "simple":
        results = [simple_baseline(d, DOMAIN_DEFAULT_RELATION[cfg.domain]) for d in docs]
    else:
        decoder = _stage2_decoder(cfg.model, args.variant, args.mode)
        results = [decoder(d) for d in docs]
    save_documents(output_path, [r.document for r in results])
    if args.diagnostics:
        write_diagnostics(_writable_target(args.diagnostics, "diagnostics"), results)
    print(f"parsed {len(results)} documents into {output_path}")
    return results


def cmd_eval(gold_path: str, pred_path: str, json_path: str | None, text_path: str | None) -> dict:
    gold = load_documents(_require_file(gold_path, "gold corpus"))
    pred = load_documents(_require_file(pred_path, "predicted corpus"))
    report = evaluation_report(gold, pred)
    text = format_report(report)
    print(text)
    if text_path:
        _writable_target(text_path, "text report").write_text(text + "\n", encoding="utf-8")
    if json_path:
        _writable_target(json_path, "JSON report").write_text(dumps_report(report) + "\n", encoding="utf-8")
    return report


# --- argument parsing -----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tdparse", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log per-epoch progress")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="INI file with a [tdparse] section of RunConfig keys")
        p.add_argument("--seed", type=int, help=f"random seed (default 0, or ${SEED_ENV})")
        p.add_argument("--domain", choices=sorted(PROFILES), help="genre profile; sets the default relation")

    p = sub.add_parser("gen-synth", help="write a synthetic corpus split into train/dev/test")
    common(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--n-docs", dest="n_docs", type=int)
    p.add_argument("--p-chain", dest="p_chain", type=float, help="probability a node attaches to its predecessor")
    p.add_argument("--p-time", dest="p_time", type=float, help="probability a node is a time expression")
    p.add_argument("--relation-dist", dest="relation_dist", help="event relations, e.g. before=0.5,overlap=0.5")
    p.add_argument("--time-relation-dist", dest="time_relation_dist", help="time-expression relations")
    p.add_argument("--ratios", help="train,dev,test fractions (default 0.8,0.1,0.1)")

    p = sub.add_parser("train", help="train a stage-1 tagger or a stage-2 parser")
    common(p)
    p.add_argument("--stage", type=int, choices=(1, 2), required=True)
    p.add_argument("--system", choices=("neural", "logistic"), help="stage-2 model family")
    p.add_argument("--variant", choices=("basic", "enriched", "attention"))
    p.add_argument("--mode", choices=("unlabeled", "labeled"))
    p.add_argument("--train", help="training corpus (JSONL)")
    p.add_argument("--dev", help="dev corpus for early stopping")
    p.add_argument("--model", help="checkpoint to write")
    p.add_argument("--log", help="training log (default: <model>.log.json)")
    p.add_argument("--tagger", help="stage-1 checkpoint; train stage 2 on its predicted spans")
    p.add_argument("--epochs", type=int, help="epoch cap")
    p.add_argument("--patience", type=int)
    p.add_argument("--learning-rate", dest="learning_rate", type=float)
    for name in ("word_dim", "type_dim", "lstm_dim", "hidden_dim", "tagger_word_dim", "tagger_pos_dim",
                 "tagger_lstm_dim", "tagger_hidden_dim"):
        p.add_argument("--" + name.replace("_", "-"), dest=name, type=int)

    p = sub.add_parser("parse", help="build temporal dependency trees")
    common(p)
    p.add_argument("--input", required=True, help="corpus to parse (JSONL)")
    p.add_argument("--output", help="parsed corpus to write")
    p.add_argument("--model", help="stage-2 checkpoint (neural or logistic)")
    p.add_argument("--tagger", help="stage-1 checkpoint for --pipeline")
    p.add_argument("--gold-spans", action="store_true", help="parse over the input's own nodes (default)")
    p.add_argument("--pipeline", action="store_true", help="tag spans first, then parse")
    p.add_argument("--system", choices=("neural", "simple"), help="'simple' uses the attach-to-previous baseline")
    p.add_argument("--variant", choices=("basic", "enriched", "attention"), help="assert the checkpoint variant")
    p.add_argument("--mode", choices=("unlabeled", "labeled"), help="assert the checkpoint mode")
    p.add_argument("--diagnostics", help="JSONL file of per-node candidate probabilities")

    p = sub.add_parser("eval", help="score a parsed corpus against gold")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--json", help="write the report as JSON")
    p.add_argument("--text", help="write the text report")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        if args.command == "eval":
            cmd_eval(args.gold, args.pred, args.json, args.text)
            return 0
        if args.command == "parse":
            # parse's --mode/--variant only assert what the checkpoint holds
            cfg = resolve_config(argparse.Namespace(**{k: v for k, v in vars(args).items()
                                                        if k not in ("variant", "mode")}))
            cmd_parse(cfg, args)
            return 0
        cfg = resolve_config(args)
        if args.command == "gen-synth":
            cmd_gen_synth(cfg, args.out)
        elif args.command == "train":
            cmd_train(cfg, args.stage, args.log, args.tagger)
        return 0
    except UsageError as exc:
        parser.error(str(exc))
    except (CorpusError, ckpt.CheckpointError, ValueError, OSError) as exc:
        print(f"tdparse: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
