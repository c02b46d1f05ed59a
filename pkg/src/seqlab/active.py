"""Query-by-bagging active learning with sequence vote entropy and
sentence re-weighting.

Each round trains a bagged ensemble on the labeled pool, scores every
unlabeled sentence with the configured utility, and asks the oracle to
label the top batch.  Newly labeled sentences enter with inclusion weight 1
and decay by a shrinking per-round step down to the floor r, so every
member absorbs fresh examples for a few rounds before they blend back into
uniform sampling.

Everything is seeded and round seeds are derived, not streamed, so a run
can be suspended, persisted, and resumed without drift.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .corpus import Corpus, LabelSet, Sentence, evaluate
from .ensemble import (EnsembleModel, bag_train, decode, pooled_member_probs)
from .errors import ConfigError, ContractError
from .features import FeatureConfig
from .perceptron import TrainerConfig

DECODERS = ("vt", "bp")
REWEIGHT_MODES = ("rw", "nrw")
SELECTIONS = ("utl", "rnd")


@dataclass
class ALConfig:
    features: FeatureConfig
    trainer: TrainerConfig
    initial_seed_count: int = 5
    batch_size: int = 1
    rounds: int = 10
    sample_rate: float = 0.8
    nbest: int = 3
    ensemble_size: int = 5
    decoder: str = "vt"
    reweight_mode: str = "rw"
    selection: str = "utl"
    seed: int = 0
    literal_decay: bool = False

    def __post_init__(self):
        if self.initial_seed_count < 1:
            raise ConfigError("initial_seed_count must be >= 1")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if not 0.0 < self.sample_rate <= 1.0:
            raise ConfigError("sample_rate must be in (0, 1]")
        if self.decoder not in DECODERS:
            raise ConfigError(f"decoder must be one of {DECODERS}")
        if self.reweight_mode not in REWEIGHT_MODES:
            raise ConfigError(f"reweight_mode must be one of {REWEIGHT_MODES}")
        if self.selection not in SELECTIONS:
            raise ConfigError(f"selection must be one of {SELECTIONS}")


@dataclass
class Pool:
    labeled: list[Sentence]        # gold-labeled
    weights: list[float]
    unlabeled: list[Sentence]      # gold hidden from the learner

    def __post_init__(self):
        if len(self.labeled) != len(self.weights):
            raise ConfigError("weights not aligned with labeled examples")
        ids = [s.id for s in self.labeled] + [s.id for s in self.unlabeled]
        if len(set(ids)) != len(ids):
            raise ConfigError("duplicate sentence ids across the pool")


def make_pool(corpus: Corpus, initial_count: int,
              initial_weight: float = 1.0) -> Pool:
    """Seed the labeled set with the first ``initial_count`` sentences (in
    corpus order) and hide gold on the rest."""
    if initial_count < 1 or initial_count >= len(corpus):
        raise ConfigError(
            f"initial_count {initial_count} out of range for corpus of "
            f"{len(corpus)} sentences")
    labeled = list(corpus.sentences[:initial_count])
    unlabeled = [s.without_gold() for s in corpus.sentences[initial_count:]]
    return Pool(labeled, [initial_weight] * initial_count, unlabeled)


def make_simulated_oracle(corpus: Corpus) -> Callable[[Sentence], list[str]]:
    """Oracle revealing the hidden gold labels by sentence id."""
    gold = {s.id: list(s.gold_labels) for s in corpus.sentences
            if s.gold_labels is not None}

    def oracle(sentence: Sentence) -> list[str]:
        return gold[sentence.id]

    return oracle


def sve_utility(ensemble: EnsembleModel, sentence: Sentence,
                n: int) -> float:
    """Sequence vote entropy over the pooled n-best set.

    Per-member sequence probabilities are normalized over the pool, averaged
    across members, renormalized, and fed to a natural-log entropy.  Zero
    iff the pool is a singleton (unanimous members).
    """
    pool, P = pooled_member_probs(ensemble, sentence, n)
    if len(pool) == 1:
        return 0.0
    avg = P.mean(axis=0)
    avg = avg / avg.sum()
    nz = avg[avg > 0]
    return float(-(nz * np.log(nz)).sum())


def random_utility(rng: random.Random, sentence: Sentence) -> float:
    """Uniform [0,1) score; the random-sampling baseline."""
    return rng.random()


def decay_factor(t: int, r: float) -> float:
    return 0.0 if t <= 1 else 2.0 * (1.0 - r) / (t - 1)


def reweight(labeled: Sequence[Sentence], weights: Sequence[float],
             newly_labeled: Sequence[Sentence], t: int, r: float,
             literal: bool = False) -> tuple[list[Sentence], list[float]]:
    """Weights entering round t: existing examples decay by the round's
    shrinking step (floored at r), new examples enter at 1.

    ``literal`` switches to the constant-step variant max(1 - a*(t-1), r)
    with a = 2(1-r)/(t-1), kept for comparison.
    """
    if t < 1:
        raise ConfigError(f"round index must be >= 1, got {t}")
    if not 0.0 < r <= 1.0:
        raise ConfigError(f"sample rate must be in (0, 1], got {r}")
    a = decay_factor(t, r)
    if literal:
        new_weights = [max(1.0 - a * (t - 1), r) for _ in weights]
    else:
        new_weights = [max(w - a, r) for w in weights]
    return (list(labeled) + list(newly_labeled),
            new_weights + [1.0] * len(newly_labeled))


@dataclass
class CurveRow:
    round: int
    labeled_count: int
    decoder: str
    reweight: str
    selection: str
    micro_f1: float
    per_type_f1: dict[str, float]
    seconds: float


@dataclass
class LearningCurve:
    rows: list[CurveRow] = field(default_factory=list)

    def to_csv(self, type_names: Sequence[str], timing: bool = False) -> str:
        header = (["round", "labeled_count", "decoder", "reweight",
                   "selection", "micro_f1"]
                  + [f"f1_{t}" for t in type_names] + ["seconds"])
        lines = [",".join(header)]
        for row in self.rows:
            cells = [str(row.round), str(row.labeled_count), row.decoder,
                     row.reweight, row.selection, repr(row.micro_f1)]
            cells += [repr(row.per_type_f1.get(t, 0.0)) for t in type_names]
            cells.append(f"{row.seconds:.3f}" if timing else "0.000")
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"


class ActiveLearner:
    """Round state machine shared by the simulator and the annotation
    service, so a human oracle and the simulated oracle are interchangeable."""

    def __init__(self, pool: Pool, config: ALConfig, test: Corpus):
        self.config = config
        self.test = test
        self.label_set = test.label_set
        self.labeled = list(pool.labeled)
        self.unlabeled = list(pool.unlabeled)
        if config.reweight_mode == "nrw":
            self.weights = [config.sample_rate] * len(self.labeled)
        else:
            self.weights = list(pool.weights)
        self.t = 1                      # 1-based training round
        self.ensemble: Optional[EnsembleModel] = None
        self.curve = LearningCurve()
        self._ranking: Optional[list[int]] = None
        self._pending: list[tuple[Sentence, list[str]]] = []
        self.last_f1: Optional[float] = None

    # -- round lifecycle ---------------------------------------------------

    def round_seed(self) -> int:
        return self.config.seed * 1_000_003 + self.t

    def ensure_trained(self) -> EnsembleModel:
        if self.ensemble is None:
            started = time.perf_counter()
            cfg = self.config
            corpus = Corpus(tuple(self.labeled), self.label_set)
            self.ensemble = bag_train(
                corpus, self.weights, cfg.ensemble_size, cfg.trainer,
                cfg.features, seed=self.round_seed(),
                sample_rate=cfg.sample_rate)
            # a restored session may already carry this round's row
            if not self.curve.rows or self.curve.rows[-1].round != self.t - 1:
                report = self._evaluate()
                self.last_f1 = report.micro.f1
                per_type = {t: m.f1 for t, m in report.per_type.items()}
                self.curve.rows.append(CurveRow(
                    round=self.t - 1, labeled_count=len(self.labeled),
                    decoder=cfg.decoder, reweight=cfg.reweight_mode,
                    selection=cfg.selection, micro_f1=report.micro.f1,
                    per_type_f1=per_type,
                    seconds=time.perf_counter() - started))
        return self.ensemble

    def _evaluate(self):
        cfg = self.config
        preds = []
        for sent in self.test:
            seq = decode(self.ensemble, sent.without_gold(), cfg.decoder,
                         cfg.nbest)
            preds.append([self.label_set.names[i] for i in seq])
        return evaluate(self.test, preds)

    def ranking(self) -> list[int]:
        """Unlabeled indices ranked by descending utility; ties break by
        pool insertion order.  Computed once per round."""
        if self._ranking is None:
            ensemble = self.ensure_trained()
            cfg = self.config
            if cfg.selection == "rnd":
                rng = random.Random(self.round_seed() ^ 0x5EED)
                utils = [random_utility(rng, s) for s in self.unlabeled]
            else:
                utils = [sve_utility(ensemble, s, cfg.nbest)
                         for s in self.unlabeled]
            self._ranking = sorted(range(len(self.unlabeled)),
                                   key=lambda i: (-utils[i], i))
            self._utilities = utils
        return self._ranking

    # -- querying and submission ------------------------------------------

    def next_query(self) -> Optional[tuple[Sentence, float]]:
        """(sentence, utility) for the next example to label this round, or
        None when the unlabeled pool is exhausted."""
        ranking = self.ranking()
        pos = len(self._pending)
        if pos >= len(ranking):
            return None
        idx = ranking[pos]
        return self.unlabeled[idx], self._utilities[idx]

    def suggest(self, sentence: Sentence) -> tuple[list[str], list[list[float]]]:
        """Ensemble pre-annotation for the UI: per-token suggestion plus
        summed member marginals (normalized to a distribution)."""
        ensemble = self.ensure_trained()
        seq = decode(ensemble, sentence, self.config.decoder, self.config.nbest)
        total = None
        for m in ensemble.members:
            marg, _ = m.forward_backward(sentence)
            total = marg if total is None else total + marg
        total = total / ensemble.k
        return [self.label_set.names[i] for i in seq], total.tolist()

    def submit(self, sentence_id: str, labels: Sequence[str]) -> None:
        """Accept labels for the outstanding query; commits the round once
        the batch is full or the pool is exhausted."""
        query = self.next_query()
        if query is None:
            raise ContractError("no outstanding query")
        sentence, _ = query
        if sentence.id != sentence_id:
            raise ContractError(
                f"submission for {sentence_id!r} but outstanding query is "
                f"{sentence.id!r}")
        if len(labels) != len(sentence):
            raise ConfigError(
                f"{len(labels)} labels for {len(sentence)} tokens")
        for lab in labels:
            if lab not in self.label_set:
                raise ConfigError(f"unknown label {lab!r}")
        self._pending.append((sentence, list(labels)))
        exhausted = len(self._pending) >= len(self.unlabeled)
        if len(self._pending) >= self.config.batch_size or exhausted:
            self._commit()

    def _commit(self) -> None:
        cfg = self.config
        new_sentences = []
        taken_ids = set()
        for sentence, labels in self._pending:
            tokens = tuple(replace(tok, gold=lab)
                           for tok, lab in zip(sentence.tokens, labels))
            new_sentences.append(Sentence(tokens, sentence.id))
            taken_ids.add(sentence.id)
        self.unlabeled = [s for s in self.unlabeled if s.id not in taken_ids]
        if cfg.reweight_mode == "rw":
            self.labeled, self.weights = reweight(
                self.labeled, self.weights, new_sentences, self.t + 1,
                cfg.sample_rate, literal=cfg.literal_decay)
        else:
            self.labeled = self.labeled + new_sentences
            self.weights = [cfg.sample_rate] * len(self.labeled)
        self.t += 1
        self.ensemble = None
        self._ranking = None
        self._pending = []


def run_active_learning(pool: Pool, config: ALConfig,
                        oracle: Callable[[Sentence], list[str]],
                        test: Corpus) -> tuple[LearningCurve, EnsembleModel]:
    """Drive the round state machine with a programmatic oracle.

    Produces one curve row per trained round: row 0 is the ensemble on the
    initial seed set, then one row after each batch of ``batch_size`` newly
    labeled examples, for ``rounds`` query rounds or until the unlabeled
    pool runs dry.
    """
    if len(pool.unlabeled) < config.batch_size:
        raise ConfigError("unlabeled pool smaller than one batch")
    learner = ActiveLearner(pool, config, test)
    for _ in range(config.rounds):
        learner.ensure_trained()
        if not learner.unlabeled:
            break
        for _ in range(config.batch_size):
            query = learner.next_query()
            if query is None:
                break
            sentence, _ = query
            learner.submit(sentence.id, oracle(sentence))
    ensemble = learner.ensure_trained()
    return learner.curve, ensemble
