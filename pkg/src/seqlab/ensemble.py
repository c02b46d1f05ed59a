"""Bagged FHMM ensembles and the two ensemble decoders.

Members are trained on Bernoulli-sampled subsets of the labeled data (each
example included with its own inclusion probability, expectation r for
uniform weights).  Two decoders combine member outputs:

* Best Viterbi Sequence (BVS): pool the members' n-best lists, rescore every
  pooled sequence with every member, normalize each member's scores over the
  pool, and pick the sequence with the largest summed probability.  The
  output is always one of the pooled sequences.
* Best BP Sequence (BPS): sum the members' forward-backward token marginals
  and take the per-token argmax; the concatenation need not appear in any
  member's n-best list.
"""

from __future__ import annotations

import json
import os
import random
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .corpus import Corpus, Sentence
from .errors import ConfigError, ContractError
from .features import FeatureConfig
from .model import FhmmModel, load_model, save_model
from .perceptron import TrainerConfig, train

MANIFEST_NAME = "ensemble.json"
MANIFEST_VERSION = 1


@dataclass
class EnsembleModel:
    members: list[FhmmModel]
    sample_rate: float
    seed: int = 0

    def __post_init__(self):
        if len(self.members) < 1:
            raise ConfigError("ensemble needs at least one member")
        first = self.members[0]
        for m in self.members[1:]:
            if m.label_set != first.label_set:
                raise ConfigError("ensemble members disagree on label set")
            if m.feature_config.profile != first.feature_config.profile:
                raise ConfigError("ensemble members disagree on feature profile")

    @property
    def k(self) -> int:
        return len(self.members)

    @property
    def label_set(self):
        return self.members[0].label_set


def member_seed(seed: int, j: int) -> int:
    return seed * 1_000_003 + j


def draw_subset(n: int, weights: Sequence[float], rng: random.Random) -> list[int]:
    """Independent Bernoulli inclusion per example; never empty."""
    subset = [i for i in range(n) if rng.random() < weights[i]]
    if not subset:
        subset = [rng.randrange(n)]
    return subset


def bag_train(labeled: Corpus, weights: Sequence[float], k: int,
              tconfig: TrainerConfig, fconfig: FeatureConfig,
              seed: int, sample_rate: float = 0.8) -> EnsembleModel:
    """Train k members on weighted Bernoulli subsets of the labeled data."""
    if len(labeled) == 0:
        raise ConfigError("cannot bag-train on an empty corpus")
    if len(weights) != len(labeled):
        raise ConfigError(
            f"{len(weights)} weights for {len(labeled)} labeled examples")
    if k < 1:
        raise ConfigError(f"ensemble size must be >= 1, got {k}")
    members = []
    for j in range(k):
        rng = random.Random(member_seed(seed, j))
        subset = draw_subset(len(labeled), weights, rng)
        sub = Corpus(tuple(labeled.sentences[i] for i in subset),
                     labeled.label_set)
        model, _ = train(sub, tconfig, fconfig)
        members.append(model)
    return EnsembleModel(members, sample_rate, seed)


def pooled_nbest(ensemble: EnsembleModel, sentence: Sentence,
                 n: int) -> list[tuple[int, ...]]:
    """Unique sequences from all members' n-best lists, sorted
    lexicographically for deterministic downstream tie-breaks."""
    if n < 1:
        raise ContractError(f"n must be >= 1, got {n}")
    pool = set()
    for m in ensemble.members:
        for seq, _ in m.viterbi_nbest(sentence, n):
            pool.add(seq)
    return sorted(pool)


def pooled_member_probs(ensemble: EnsembleModel, sentence: Sentence,
                        n: int) -> tuple[list[tuple[int, ...]], np.ndarray]:
    """(pool, P) where P[j, i] is member j's probability of pool[i],
    normalized over the pooled set (softmax of the member's raw scores)."""
    pool = pooled_nbest(ensemble, sentence, n)
    P = np.empty((ensemble.k, len(pool)))
    for j, m in enumerate(ensemble.members):
        feats = m.featurize(sentence)
        scores = np.array([m.score_sequence(sentence, seq, feats)
                           for seq in pool])
        scores -= scores.max()
        e = np.exp(scores)
        P[j] = e / e.sum()
    return pool, P


def decode_bvs(ensemble: EnsembleModel, sentence: Sentence,
               n: int = 3) -> tuple[int, ...]:
    pool, P = pooled_member_probs(ensemble, sentence, n)
    # pool is sorted, so argmax's first-hit rule breaks ties lexicographically
    return pool[int(np.argmax(P.sum(axis=0)))]


def decode_bps(ensemble: EnsembleModel, sentence: Sentence) -> tuple[int, ...]:
    total = None
    for m in ensemble.members:
        marg, _ = m.forward_backward(sentence)
        total = marg if total is None else total + marg
    return tuple(int(np.argmax(row)) for row in total)


def decode(ensemble: EnsembleModel, sentence: Sentence, decoder: str,
           n: int = 3) -> tuple[int, ...]:
    if decoder == "vt":
        return decode_bvs(ensemble, sentence, n)
    if decoder == "bp":
        return decode_bps(ensemble, sentence)
    raise ConfigError(f"unknown decoder {decoder!r}; expected 'vt' or 'bp'")


def save_ensemble(ensemble: EnsembleModel, directory: str) -> None:
    os.makedirs(directory, exist_ok=True)
    member_files = []
    for j, m in enumerate(ensemble.members):
        name = f"member_{j}.model"
        with open(os.path.join(directory, name), "w", encoding="utf-8") as f:
            f.write(save_model(m))
        member_files.append(name)
    manifest = {
        "format": "seqlab-ensemble",
        "version": MANIFEST_VERSION,
        "k": ensemble.k,
        "sample_rate": ensemble.sample_rate,
        "seed": ensemble.seed,
        "members": member_files,
    }
    with open(os.path.join(directory, MANIFEST_NAME), "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2)


def load_ensemble(directory: str) -> EnsembleModel:
    with open(os.path.join(directory, MANIFEST_NAME), encoding="utf-8") as f:
        manifest = json.load(f)
    if manifest.get("format") != "seqlab-ensemble":
        raise ConfigError(f"{directory}: not an ensemble directory")
    if manifest["version"] > MANIFEST_VERSION:
        raise ConfigError(f"ensemble version {manifest['version']} is newer "
                          f"than supported version {MANIFEST_VERSION}")
    members = []
    for name in manifest["members"]:
        with open(os.path.join(directory, name), encoding="utf-8") as f:
            members.append(load_model(f.read()))
    return EnsembleModel(members, manifest["sample_rate"], manifest["seed"])
