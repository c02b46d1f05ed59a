"""Structured perceptron training with parameter averaging.

Each example is decoded with the current weights; wherever the prediction
disagrees with gold, every feature active at that position has its weight
under the predicted label decremented and under the gold label incremented
(transitions get the same treatment for disagreeing adjacent pairs).  A
snapshot of the weights is taken after every example and the released model
is the entry-wise mean of all snapshots.

Averaging is done lazily with per-row timestamps so training stays linear
in the number of updates; all intermediate values are small integers, so
the lazy sums are exact and match a naive snapshot-mean bit for bit after
the final division.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

import numpy as np

from .corpus import Corpus
from .errors import ConfigError, ContractError
from .features import (FeatureConfig, FeatureInterner, featurize_sentence,
                       validate_fields)
from .model import FhmmModel, WeightTable, _emissions, lattice_viterbi


@dataclass
class TrainerConfig:
    max_epochs: int = 100
    error_threshold: float = 1e-10
    shuffle_seed: int = 0
    nbest_for_prediction: int = 1
    markov_order: int = 1

    def __post_init__(self):
        if self.max_epochs < 1:
            raise ConfigError(f"max_epochs must be >= 1, got {self.max_epochs}")
        if self.error_threshold < 0:
            raise ConfigError("error_threshold must be >= 0")


@dataclass
class TrainingStats:
    epoch_error_rates: list[float] = field(default_factory=list)
    epoch_updates: list[int] = field(default_factory=list)
    epochs_run: int = 0
    updates: int = 0
    snapshot_count: int = 0

    def to_csv(self) -> str:
        lines = ["epoch,token_error_rate,updates"]
        for e, (err, upd) in enumerate(zip(self.epoch_error_rates,
                                           self.epoch_updates), start=1):
            lines.append(f"{e},{err!r},{upd}")
        return "\n".join(lines) + "\n"


def _transition_keys(labels, p, m, order):
    if order == 1:
        return (labels[p - 1], labels[p])
    older = labels[p - 2] if p >= 2 else m
    return (older, labels[p - 1], labels[p])


def _train(corpus: Corpus, tconfig: TrainerConfig, fconfig: FeatureConfig,
           averaged: bool) -> tuple[FhmmModel, TrainingStats]:
    if len(corpus) == 0:
        raise ConfigError("cannot train on an empty corpus")
    for sent in corpus:
        if sent.gold_labels is None:
            raise ContractError(f"sentence {sent.id!r} is not gold-labeled")
    validate_fields(fconfig, corpus)

    label_set = corpus.label_set
    m = len(label_set)
    order = tconfig.markov_order
    interner = FeatureInterner(fconfig.n_templates)
    feats = [featurize_sentence(s, fconfig, interner) for s in corpus]
    interner.freeze()
    golds = [tuple(label_set.index(g) for g in s.gold_labels) for s in corpus]

    weights = WeightTable(m, order)
    emit = weights.emit
    trans = weights.trans
    # lazy averaging state: sum of snapshots per emission row / transitions
    emit_total: dict[int, np.ndarray] = {}
    emit_last: dict[int, int] = {}
    trans_total = np.zeros_like(trans)

    rng = random.Random(tconfig.shuffle_seed)
    n = len(corpus)
    total_tokens = sum(len(s) for s in corpus)
    stats = TrainingStats()
    step = 0  # completed per-example snapshots

    def touch(fid):
        # account snapshots since this row last changed, at its old value
        row = emit.get(fid)
        if row is None:
            row = weights.emit_row(fid)
            emit_total[fid] = np.zeros(m)
            emit_last[fid] = step
        else:
            emit_total[fid] += row * (step - emit_last[fid])
            emit_last[fid] = step
        return row

    for epoch in range(tconfig.max_epochs):
        order_idx = list(range(n))
        rng.shuffle(order_idx)
        wrong_tokens = 0
        epoch_updates = 0
        for i in order_idx:
            sent_feats = feats[i]
            gold = golds[i]
            E = _emissions(sent_feats, weights)
            pred, _ = lattice_viterbi(E, trans, order)
            mismatches = [p for p in range(len(gold)) if pred[p] != gold[p]]
            wrong_tokens += len(mismatches)
            if mismatches:
                epoch_updates += 1
                for p in mismatches:
                    for fid in sent_feats[p]:
                        row = touch(fid)
                        row[gold[p]] += 1
                        row[pred[p]] -= 1
                for p in range(1, len(gold)):
                    kg = _transition_keys(gold, p, m, order)
                    kp = _transition_keys(pred, p, m, order)
                    if kg != kp:
                        trans[kg] += 1
                        trans[kp] -= 1
            step += 1
            if averaged:
                trans_total += trans
        stats.epoch_error_rates.append(wrong_tokens / total_tokens)
        stats.epoch_updates.append(epoch_updates)
        stats.updates += epoch_updates
        stats.epochs_run = epoch + 1
        if wrong_tokens / total_tokens <= tconfig.error_threshold:
            break
    stats.snapshot_count = step

    if averaged:
        for fid, row in emit.items():
            emit_total[fid] += row * (step - emit_last[fid])
        avg = WeightTable(m, order)
        avg.emit = {fid: total / step for fid, total in emit_total.items()}
        avg.trans = trans_total / step
        weights = avg
    model = FhmmModel(weights, label_set, fconfig, interner)
    return model, stats


def train(corpus: Corpus, tconfig: TrainerConfig,
          fconfig: FeatureConfig) -> tuple[FhmmModel, TrainingStats]:
    """Averaged-perceptron training; returns the snapshot-mean model."""
    return _train(corpus, tconfig, fconfig, averaged=True)


def train_unaveraged(corpus: Corpus, tconfig: TrainerConfig,
                     fconfig: FeatureConfig) -> tuple[FhmmModel, TrainingStats]:
    """Same loop but returning the final raw weights (diagnostic baseline)."""
    return _train(corpus, tconfig, fconfig, averaged=False)
