"""Command-line orchestration of the alignment pipeline.

Subcommands: ingest, induce, mine, train, map, interpolate, eval-bli,
eval-xlsim, sweep, run. Exit codes: 0 ok, 1 runtime error, 2 usage /
configuration error (including missing input files).
"""

import argparse
import configparser
import hashlib
import sys

import numpy as np

from . import __version__, align, contrast, embed_store, evalsuite, lexicon, retrieve
from .align import InterpolationConfig, LinearMap
from .contrast import AdapterState, TrainConfig
from .retrieve import SimilarityConfig


class ConfigError(ValueError):
    pass


def load_space(path):
    """Load either a .vec text file or an LXRW1 binary cache."""
    with open(path, "rb") as fh:
        magic = fh.read(5)
    if magic == b"LXRW1":
        return embed_store.load_cache(path)
    return embed_store.load_text_embeddings(path)


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _parse_lambdas(text):
    lams = []
    for tok in text.replace(",", " ").split():
        lam = float(tok)
        if not 0.0 <= lam <= 1.0:
            raise ConfigError(f"lambda {lam} outside [0, 1]")
        lams.append(lam)
    if not lams:
        raise ConfigError("empty lambda list")
    return sorted(set(lams))


def cmd_ingest(args):
    space = embed_store.load_text_embeddings(args.vec, max_words=args.max)
    space = embed_store.l2_normalize(space)
    embed_store.save_cache(space, args.out)
    print(f"ingested {len(space.vocab)} rows (dim {space.dim}, "
          f"{space.skipped_duplicates} duplicates and "
          f"{space.skipped_malformed_words} malformed words skipped) "
          f"-> {args.out}")
    return 0


def cmd_induce(args):
    src = embed_store.l2_normalize(load_space(args.src))
    tgt = embed_store.l2_normalize(load_space(args.tgt))
    lex = lexicon.load_lexicon(args.lexicon, role="train")
    lex, dropped = lexicon.filter_to_vocab(lex, src, tgt)
    mapped, tgt, W = align.induce_clwe(src, tgt, lex)
    embed_store.save_cache(mapped, args.out_src)
    embed_store.save_cache(tgt, args.out_tgt)
    if args.out_map:
        W.save(args.out_map)
    print(f"induced cross-lingual space from {len(lex)} pairs "
          f"({dropped} dropped as out-of-vocabulary)")
    return 0


def cmd_mine(args):
    src = load_space(args.src)
    tgt = load_space(args.tgt)
    lex = lexicon.load_lexicon(args.lexicon, role="train")
    lex, dropped = lexicon.filter_to_vocab(lex, src, tgt)
    cfg = SimilarityConfig(scale_c=args.scale_c)
    table = retrieve.mine_hard_negatives(lex, src, tgt, args.negatives,
                                         cfg=cfg, threads=args.threads)
    retrieve.save_negative_table(table, tgt, args.out)
    print(f"mined {args.negatives} negatives for {len(table.entries)} pairs "
          f"({dropped} pairs dropped) -> {args.out}")
    return 0


def _train_config(args):
    return TrainConfig(batch_size=args.batch_size,
                       n_negatives=args.negatives,
                       scale_c=args.scale_c,
                       epochs=args.epochs,
                       learning_rate=args.learning_rate,
                       weight_decay=args.weight_decay,
                       seed=args.seed)


def cmd_train(args):
    src = embed_store.l2_normalize(load_space(args.src))
    tgt = embed_store.l2_normalize(load_space(args.tgt))
    lex = lexicon.load_lexicon(args.lexicon, role="train")
    lex, _ = lexicon.filter_to_vocab(lex, src, tgt)
    table = retrieve.load_negative_table(args.negatives_file, tgt,
                                         args.negatives)
    cfg = _train_config(args)
    adapter, losses = contrast.train(lex, src, tgt, table, cfg)
    adapter.save(args.out)
    if args.loss_log:
        contrast.save_loss_log(losses, args.loss_log)
    print(f"trained adapter for {cfg.epochs} epochs; "
          f"final mean batch loss {losses[-1] if losses else 'n/a'}")
    return 0


def cmd_map(args):
    static_src = embed_store.l2_normalize(load_space(args.static_src))
    static_tgt = embed_store.l2_normalize(load_space(args.static_tgt))
    enc_src = embed_store.l2_normalize(load_space(args.enc_src))
    enc_tgt = embed_store.l2_normalize(load_space(args.enc_tgt))
    lex = lexicon.load_lexicon(args.lexicon, role="train")
    lex, _ = lexicon.filter_to_vocab(lex, static_src, static_tgt)
    lex, _ = lexicon.filter_to_vocab(lex, enc_src, enc_tgt)
    W = align.fit_static_to_encoder(static_src, static_tgt, enc_src, enc_tgt,
                                    lex)
    W.save(args.out)
    print(f"fit {W.src_dim}x{W.dst_dim} static-to-encoder map "
          f"(degenerate={W.degenerate})")
    return 0


def cmd_interpolate(args):
    static = load_space(args.static)
    enc = load_space(args.encoder)
    W = LinearMap.load(args.map)
    cfg = InterpolationConfig(lam=args.lam)
    out = align.interpolate_space(static, enc, W, cfg)
    embed_store.save_cache(out, args.out)
    print(f"interpolated space at lambda={args.lam} -> {args.out}")
    return 0


def cmd_eval_bli(args):
    src = load_space(args.src)
    tgt = load_space(args.tgt)
    test = lexicon.load_lexicon(args.test, role="test")
    cfg = SimilarityConfig(scale_c=args.scale_c)
    report = evalsuite.bli_evaluate(src, tgt, test, ks=args.ks, cfg=cfg,
                                    threads=args.threads)
    report.save_tsv(args.out)
    if args.per_item:
        report.save_per_item_tsv(args.per_item)
    print(f"p_at_1 {report.metrics['p_at_1']:.4f} -> {args.out}")
    return 0


def cmd_eval_xlsim(args):
    src = load_space(args.src)
    tgt = load_space(args.tgt)
    gold = lexicon.load_scored_pairs(args.gold)
    report = evalsuite.xlsim_evaluate(src, tgt, gold)
    report.save_tsv(args.out)
    rho = report.metrics["spearman"]
    print(f"spearman {rho if rho is None else f'{rho:.4f}'} -> {args.out}")
    return 0


def cmd_sweep(args):
    lams = _parse_lambdas(args.lambdas)
    static = load_space(args.static_src)
    static_tgt = load_space(args.static_tgt)
    enc = load_space(args.enc_src)
    enc_tgt = load_space(args.enc_tgt)
    W = LinearMap.load(args.map)
    cfg = SimilarityConfig(scale_c=args.scale_c)
    rows = []
    for lam in lams:
        icfg = InterpolationConfig(lam=lam)
        src_i = align.interpolate_space(static, enc, W, icfg)
        tgt_i = align.interpolate_space(static_tgt, enc_tgt, W, icfg)
        if args.task == "bli":
            test = lexicon.load_lexicon(args.test, role="test")
            report = evalsuite.bli_evaluate(src_i, tgt_i, test, ks=(1, 5),
                                            cfg=cfg, threads=args.threads)
            value = report.metrics[args.metric]
        else:
            gold = lexicon.load_scored_pairs(args.test)
            report = evalsuite.xlsim_evaluate(src_i, tgt_i, gold)
            value = report.metrics["spearman"]
        rows.append((lam, value))
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(f"lambda,{args.metric if args.task == 'bli' else 'spearman'}\n")
        for lam, value in rows:
            fh.write(f"{lam!r},{value if value is None else repr(value)}\n")
    print(f"swept {len(rows)} lambda values -> {args.out}")
    return 0


# ---------------------------------------------------------------------------
# declarative run configuration


def read_run_config(path):
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    read = parser.read(path)
    if not read:
        raise FileNotFoundError(path)
    return parser


def _stage_flags(cfg):
    stages = cfg["stages"] if "stages" in cfg else {}

    def flag(name, default):
        raw = stages.get(name, str(default))
        return str(raw).strip().lower() in ("1", "true", "yes", "on")

    return {name: flag(name, default) for name, default in (
        ("induce_clwe", True), ("mine", True), ("train", True),
        ("interpolate", True), ("eval_bli", True), ("eval_xlsim", False))}


def validate_run_config(cfg):
    if "paths" not in cfg:
        raise ConfigError("missing [paths] section")
    stages = _stage_flags(cfg)
    if stages["train"] and not stages["mine"]:
        raise ConfigError("stage 'train' requires stage 'mine'")
    if stages["interpolate"] and not stages["induce_clwe"]:
        raise ConfigError("stage 'interpolate' requires stage 'induce_clwe'")
    paths = cfg["paths"]
    required = ["src_static", "tgt_static", "src_encoder", "tgt_encoder",
                "train_lexicon"]
    if stages["eval_bli"]:
        required.append("test_lexicon")
    if stages["eval_xlsim"]:
        required.append("xlsim_gold")
    import os
    for key in required:
        if key not in paths:
            raise ConfigError(f"missing path '{key}' in [paths]")
        if not os.path.exists(paths[key]):
            raise FileNotFoundError(paths[key])
    return stages


def cmd_run(args):
    cfg = read_run_config(args.config)
    stages = validate_run_config(cfg)
    paths = cfg["paths"]
    hp = cfg["hyperparameters"] if "hyperparameters" in cfg else {}

    import os
    out_dir = args.out_dir or paths.get("out_dir", ".")
    os.makedirs(out_dir, exist_ok=True)

    def out(name):
        return os.path.join(out_dir, name)

    seed = args.seed if args.seed is not None else int(hp.get("seed", 0))
    threads = args.threads
    max_words = int(hp.get("max_words", 0)) or None
    scale_c = float(hp.get("scale_c", 20.0))
    sim_cfg = SimilarityConfig(scale_c=scale_c)
    tcfg = TrainConfig(batch_size=int(hp.get("batch_size", 128)),
                       n_negatives=int(hp.get("n_negatives", 10)),
                       scale_c=scale_c,
                       epochs=int(hp.get("epochs", 5)),
                       learning_rate=float(hp.get("learning_rate", 2e-5)),
                       weight_decay=float(hp.get("weight_decay", 0.01)),
                       seed=seed)
    lambdas = _parse_lambdas(hp.get("lambdas", "0.3,1.0"))

    inputs = {key: paths[key] for key in paths if key != "out_dir"}
    artifacts = []

    def load(key):
        space = load_space(paths[key])
        if max_words is not None and len(space.vocab) > max_words:
            vocab = embed_store.Vocabulary(space.vocab.words[:max_words])
            space = embed_store.EmbeddingSpace(vocab,
                                               space.matrix[:max_words],
                                               normalized=space.normalized)
        return embed_store.l2_normalize(space)

    static_src = load("src_static")
    static_tgt = load("tgt_static")
    enc_src = load("src_encoder")
    enc_tgt = load("tgt_encoder")

    train_lex = lexicon.load_lexicon(paths["train_lexicon"], role="train")
    if "xlsim_gold" in paths:
        gold = lexicon.load_scored_pairs(paths["xlsim_gold"])
        train_lex, removed = lexicon.remove_test_leakage(train_lex, gold)
        if removed:
            print(f"removed {removed} train pairs overlapping the "
                  "similarity test set")
    lex_static, _ = lexicon.filter_to_vocab(train_lex, static_src, static_tgt)
    lex_enc, _ = lexicon.filter_to_vocab(train_lex, enc_src, enc_tgt)

    if stages["induce_clwe"]:
        static_src, static_tgt, _ = align.induce_clwe(static_src, static_tgt,
                                                      lex_static)
        embed_store.save_cache(static_src, out("static_src_mapped.lxrw"))
        embed_store.save_cache(static_tgt, out("static_tgt_mapped.lxrw"))
        artifacts += ["static_src_mapped.lxrw", "static_tgt_mapped.lxrw"]

    table = None
    if stages["mine"]:
        table = retrieve.mine_hard_negatives(lex_enc, enc_src, enc_tgt,
                                             tcfg.n_negatives, cfg=sim_cfg,
                                             threads=threads)
        retrieve.save_negative_table(table, enc_tgt, out("negatives.tsv"))
        artifacts.append("negatives.tsv")

    adapter = AdapterState.identity(enc_src.dim)
    if stages["train"]:
        adapter, losses = contrast.train(lex_enc, enc_src, enc_tgt, table,
                                         tcfg)
        adapter.save(out("adapter.lxrw"))
        contrast.save_loss_log(losses, out("loss_log.csv"))
        artifacts += ["adapter.lxrw", "loss_log.csv"]

    enc_src = contrast.apply_adapter(enc_src, adapter)
    enc_tgt = contrast.apply_adapter(enc_tgt, adapter)

    eval_pairs = []  # (label, src space, tgt space)
    if stages["interpolate"]:
        lex_both, _ = lexicon.filter_to_vocab(lex_static, enc_src, enc_tgt)
        W = align.fit_static_to_encoder(static_src, static_tgt, enc_src,
                                        enc_tgt, lex_both)
        W.save(out("static_to_encoder.lxrw"))
        artifacts.append("static_to_encoder.lxrw")
        for lam in lambdas:
            icfg = InterpolationConfig(lam=lam)
            src_i = align.interpolate_space(static_src, enc_src, W, icfg)
            tgt_i = align.interpolate_space(static_tgt, enc_tgt, W, icfg)
            eval_pairs.append((f"lambda_{lam:g}", src_i, tgt_i))
    else:
        eval_pairs.append(("encoder", enc_src, enc_tgt))

    if stages["eval_bli"]:
        test = lexicon.load_lexicon(paths["test_lexicon"], role="test")
        for label, src_i, tgt_i in eval_pairs:
            report = evalsuite.bli_evaluate(src_i, tgt_i, test, ks=(1, 5),
                                            cfg=sim_cfg, threads=threads)
            name = f"bli_{label}.tsv"
            report.save_tsv(out(name))
            artifacts.append(name)
            print(f"bli {label}: p_at_1 {report.metrics['p_at_1']:.4f}")
    if stages["eval_xlsim"]:
        gold = lexicon.load_scored_pairs(paths["xlsim_gold"])
        for label, src_i, tgt_i in eval_pairs:
            report = evalsuite.xlsim_evaluate(src_i, tgt_i, gold)
            name = f"xlsim_{label}.tsv"
            report.save_tsv(out(name))
            artifacts.append(name)
            rho = report.metrics["spearman"]
            print(f"xlsim {label}: spearman "
                  f"{rho if rho is None else f'{rho:.4f}'}")

    with open(out("manifest.txt"), "w", encoding="utf-8") as fh:
        fh.write(f"lexalign_version\t{__version__}\n")
        fh.write(f"numpy_version\t{np.__version__}\n")
        fh.write(f"seed\t{seed}\n")
        fh.write(f"threads\t{threads}\n")
        fh.write(f"config\t{args.config}\t{_sha256(args.config)}\n")
        for key in sorted(inputs):
            fh.write(f"input\t{key}\t{inputs[key]}\t{_sha256(inputs[key])}\n")
        for name in artifacts:
            fh.write(f"artifact\t{name}\t{_sha256(out(name))}\n")
    return 0


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--out-dir", default=None)

    parser = argparse.ArgumentParser(
        prog="lexalign",
        description="align and evaluate cross-lingual lexical spaces")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common],
                       help="parse a .vec file into a normalized binary cache")
    p.add_argument("--vec", required=True)
    p.add_argument("--max", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("induce", parents=[common],
                       help="solve the square cross-lingual mapping")
    p.add_argument("--src", required=True)
    p.add_argument("--tgt", required=True)
    p.add_argument("--lexicon", required=True)
    p.add_argument("--out-src", required=True)
    p.add_argument("--out-tgt", required=True)
    p.add_argument("--out-map", default=None)
    p.set_defaults(func=cmd_induce)

    p = sub.add_parser("mine", parents=[common],
                       help="precompute hard negatives")
    p.add_argument("--src", required=True)
    p.add_argument("--tgt", required=True)
    p.add_argument("--lexicon", required=True)
    p.add_argument("--negatives", type=int, default=10)
    p.add_argument("--scale-c", type=float, default=20.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("train", parents=[common],
                       help="contrastively train the adapter")
    p.add_argument("--src", required=True)
    p.add_argument("--tgt", required=True)
    p.add_argument("--lexicon", required=True)
    p.add_argument("--negatives-file", required=True)
    p.add_argument("--negatives", type=int, default=10)
    p.add_argument("--batch-size", type=int, default=128)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--learning-rate", type=float, default=2e-5)
    p.add_argument("--weight-decay", type=float, default=0.01)
    p.add_argument("--scale-c", type=float, default=20.0)
    p.add_argument("--loss-log", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("map", parents=[common],
                       help="fit the static-to-encoder map")
    p.add_argument("--static-src", required=True)
    p.add_argument("--static-tgt", required=True)
    p.add_argument("--enc-src", required=True)
    p.add_argument("--enc-tgt", required=True)
    p.add_argument("--lexicon", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("interpolate", parents=[common],
                       help="interpolate the static and encoder views")
    p.add_argument("--static", required=True)
    p.add_argument("--encoder", required=True)
    p.add_argument("--map", required=True)
    p.add_argument("--lam", type=float, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_interpolate)

    p = sub.add_parser("eval-bli", parents=[common],
                       help="bilingual lexicon induction metrics")
    p.add_argument("--src", required=True)
    p.add_argument("--tgt", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--ks", type=int, nargs="+", default=[1, 5])
    p.add_argument("--scale-c", type=float, default=20.0)
    p.add_argument("--per-item", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval_bli)

    p = sub.add_parser("eval-xlsim", parents=[common],
                       help="cross-lingual word-similarity correlation")
    p.add_argument("--src", required=True)
    p.add_argument("--tgt", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval_xlsim)

    p = sub.add_parser("sweep", parents=[common],
                       help="evaluate a list of interpolation factors")
    p.add_argument("--static-src", required=True)
    p.add_argument("--static-tgt", required=True)
    p.add_argument("--enc-src", required=True)
    p.add_argument("--enc-tgt", required=True)
    p.add_argument("--map", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--task", choices=["bli", "xlsim"], default="bli")
    p.add_argument("--metric", default="p_at_1")
    p.add_argument("--lambdas", required=True)
    p.add_argument("--scale-c", type=float, default=20.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("run", parents=[common],
                       help="run the configured pipeline end to end")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_run)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (FileNotFoundError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
