"""Command-line entry points: train | tag | eval | al-simulate | serve."""

from __future__ import annotations

import argparse
import os
import sys

from . import __version__
from .active import make_pool, make_simulated_oracle, run_active_learning
from .config import load_config
from .corpus import evaluate, parse_conll, write_conll
from .ensemble import (EnsembleModel, bag_train, decode, load_ensemble,
                       save_ensemble)
from .errors import SeqlabError
from .model import load_model, save_model
from .perceptron import train
from .pipeline import train_two_stage
from .features import make_config

GRID = [(d, rw, sel) for d in ("vt", "bp") for rw in ("rw", "nrw")
        for sel in ("utl", "rnd")]


def _read_corpus(path, cfg, columns=None):
    with open(path, encoding="utf-8") as f:
        text = f.read()
    column_map = cfg.column_map()
    if columns:
        column_map = {}
        for part in columns.split(","):
            idx, _, name = part.partition(":")
            column_map[int(idx)] = name
    return parse_conll(text, column_map, outside=cfg.get("data", "outside"))


def _load_any_model(path):
    """A file is a single model; a directory is an ensemble."""
    if os.path.isdir(path):
        return load_ensemble(path)
    with open(path, encoding="utf-8") as f:
        return load_model(f.read())


def _tag_sentence(model, sentence, cfg):
    if isinstance(model, EnsembleModel):
        seq = decode(model, sentence, cfg.get("active", "decoder"),
                     cfg.get("ensemble", "nbest"))
        return [model.label_set.names[i] for i in seq]
    return model.tag(sentence)


def cmd_train(args, cfg):
    corpus = _read_corpus(args.input or cfg.get("data", "train"), cfg,
                          args.columns)
    tconfig = cfg.trainer_config()
    fconfig = cfg.feature_config()
    if args.two_stage:
        stage1_fc = make_config(args.stage1_profile)
        two = train_two_stage(corpus, tconfig, stage1_fc, fconfig)
        os.makedirs(args.out, exist_ok=True)
        for name, model in [("stage1.model", two.stage1),
                            ("stage2.model", two.stage2)]:
            with open(os.path.join(args.out, name), "w", encoding="utf-8") as f:
                f.write(save_model(model))
        print(f"wrote two-stage models to {args.out}")
        return 0
    k = cfg.get("ensemble", "k")
    if args.ensemble:
        weights = [cfg.get("ensemble", "sample_rate")] * len(corpus)
        ens = bag_train(corpus, weights, k, tconfig, fconfig,
                        seed=cfg.get("ensemble", "seed"),
                        sample_rate=cfg.get("ensemble", "sample_rate"))
        save_ensemble(ens, args.out)
        print(f"wrote {k}-member ensemble to {args.out}")
    else:
        model, stats = train(corpus, tconfig, fconfig)
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(save_model(model))
        if args.stats:
            with open(args.stats, "w", encoding="utf-8") as f:
                f.write(stats.to_csv())
        print(f"wrote model to {args.out} "
              f"({stats.epochs_run} epochs, final error rate "
              f"{stats.epoch_error_rates[-1]:.6f})")
    return 0


def cmd_tag(args, cfg):
    model = _load_any_model(args.model)
    corpus = _read_corpus(args.input, cfg, args.columns)
    predictions = [_tag_sentence(model, s.without_gold(), cfg) for s in corpus]
    columns = [name for name in ("surface", "pos", "gold")
               if all(getattr(t, name) is not None
                      for s in corpus for t in s.tokens)]
    out = write_conll(corpus, columns, predicted=predictions)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(out + "\n")
    else:
        print(out)
    return 0


def cmd_eval(args, cfg):
    model = _load_any_model(args.model)
    corpus = _read_corpus(args.gold, cfg, args.columns)
    predictions = [_tag_sentence(model, s.without_gold(), cfg) for s in corpus]
    report = evaluate(corpus, predictions)
    print(report.records() if args.records else report.format())
    return 0


def cmd_al_simulate(args, cfg):
    corpus = _read_corpus(args.input or cfg.get("data", "train"), cfg,
                          args.columns)
    test = _read_corpus(args.test or cfg.get("data", "test"), cfg,
                        args.columns)
    os.makedirs(args.out, exist_ok=True)
    configs = GRID if args.grid else [(cfg.get("active", "decoder"),
                                       cfg.get("active", "reweight"),
                                       cfg.get("active", "selection"))]
    type_names = [n for n in corpus.label_set.names
                  if n != corpus.label_set.outside]
    for decoder, rw, sel in configs:
        al = cfg.al_config(decoder=decoder, reweight=rw, selection=sel)
        pool = make_pool(corpus, al.initial_seed_count)
        oracle = make_simulated_oracle(corpus)
        curve, ensemble = run_active_learning(pool, al, oracle, test)
        name = f"curve_{decoder}_{rw}_{sel}"
        path = os.path.join(args.out, name + ".csv")
        with open(path, "w", encoding="utf-8") as f:
            f.write(curve.to_csv(type_names, timing=args.timing))
        if args.save_ensembles:
            save_ensemble(ensemble, os.path.join(args.out, name + ".ensemble"))
        print(f"{name}: rounds={len(curve.rows)} "
              f"final_f1={curve.rows[-1].micro_f1:.4f}")
    if args.plot:
        _plot_curves(args.out)
    return 0


def _plot_curves(directory):
    import csv

    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(8, 5))
    for name in sorted(os.listdir(directory)):
        if not name.endswith(".csv"):
            continue
        xs, ys = [], []
        with open(os.path.join(directory, name), encoding="utf-8") as f:
            for row in csv.DictReader(f):
                xs.append(int(row["labeled_count"]))
                ys.append(float(row["micro_f1"]))
        ax.plot(xs, ys, marker="o", label=name[len("curve_"):-len(".csv")])
    ax.set_xlabel("labeled examples")
    ax.set_ylabel("test F1")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(os.path.join(directory, "curves.png"), dpi=120)


def cmd_serve(args, cfg):
    import uvicorn

    from .service import AnnotationSession, create_app

    corpus = _read_corpus(args.input or cfg.get("data", "train"), cfg,
                          args.columns)
    test = _read_corpus(args.test or cfg.get("data", "test"), cfg,
                        args.columns)
    session = AnnotationSession(corpus, test, cfg.al_config(),
                                args.state or cfg.get("serve", "state_file"))
    app = create_app(session)
    uvicorn.run(app, host=cfg.get("serve", "host"),
                port=args.port or cfg.get("serve", "port"))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="seqlab",
        description="Sequence labeling with featurized HMM ensembles")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="INI configuration file")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="SECTION.KEY=VALUE", help="config override")
        p.add_argument("--columns", help="column map, e.g. 0:surface,1:gold")

    p = sub.add_parser("train", help="train a model or ensemble")
    common(p)
    p.add_argument("--input", help="training corpus (overrides data.train)")
    p.add_argument("--out", required=True, help="model file or ensemble dir")
    p.add_argument("--stats", help="write per-epoch training stats CSV here")
    p.add_argument("--ensemble", action="store_true",
                   help="train a bagged ensemble into --out (a directory)")
    p.add_argument("--two-stage", action="store_true",
                   help="train the two-stage entity+spatiotemporal pipeline")
    p.add_argument("--stage1-profile", default="ontonotes",
                   help="feature profile for the entity stage")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("tag", help="tag a column file, appending predictions")
    common(p)
    p.add_argument("--model", required=True)
    p.add_argument("input")
    p.add_argument("--out")
    p.set_defaults(func=cmd_tag)

    p = sub.add_parser("eval", help="phrase-level evaluation of a model")
    common(p)
    p.add_argument("--model", required=True)
    p.add_argument("gold")
    p.add_argument("--records", action="store_true",
                   help="machine-readable key=value output")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("al-simulate",
                       help="simulated active learning, one CSV per config")
    common(p)
    p.add_argument("--input", help="gold corpus acting as pool + oracle")
    p.add_argument("--test", help="held-out gold corpus")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--grid", action="store_true",
                   help="run all 8 decoder/reweight/selection configurations")
    p.add_argument("--timing", action="store_true",
                   help="record wall time in the seconds column "
                        "(off by default to keep outputs reproducible)")
    p.add_argument("--plot", action="store_true",
                   help="emit curves.png alongside the CSVs")
    p.add_argument("--save-ensembles", action="store_true")
    p.set_defaults(func=cmd_al_simulate)

    p = sub.add_parser("serve", help="run the annotation service")
    common(p)
    p.add_argument("--input", help="pool corpus (overrides data.train)")
    p.add_argument("--test", help="held-out gold corpus")
    p.add_argument("--state", help="session state file")
    p.add_argument("--port", type=int)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config, args.overrides)
        return args.func(args, cfg)
    except SeqlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
