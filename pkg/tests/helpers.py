"""Shared test utilities: brute-force oracles and synthetic data generators.

The oracles deliberately avoid the production lattice code: scores are
re-accumulated feature by feature and all distributions come from full
enumeration over label sequences.
"""

import itertools
import random

import numpy as np

from seqlab.corpus import Corpus, LabelSet, Sentence, Token
from seqlab.features import (FeatureConfig, FeatureInterner, Template,
                             extract, featurize_sentence)
from seqlab.model import FhmmModel, WeightTable


# ---------------------------------------------------------------------------
# Enumeration oracles


def all_sequences(m, length):
    return list(itertools.product(range(m), repeat=length))


def naive_score(model, sentence, labels):
    """Per-position weight lookup summation, independent of the lattice."""
    total = 0.0
    for p in range(len(sentence)):
        for fid in extract(sentence, p, model.feature_config, model.interner):
            row = model.weights.emit.get(fid)
            if row is not None:
                total += row[labels[p]]
    T = model.weights.trans
    m = model.weights.n_labels
    for p in range(1, len(labels)):
        if model.markov_order == 1:
            total += T[labels[p - 1], labels[p]]
        else:
            older = labels[p - 2] if p >= 2 else m
            total += T[older, labels[p - 1], labels[p]]
    return float(total)


def brute_scores(model, sentence):
    m = len(model.label_set)
    return {seq: naive_score(model, sentence, seq)
            for seq in all_sequences(m, len(sentence))}


def brute_viterbi(model, sentence):
    scores = brute_scores(model, sentence)
    best_score = max(scores.values())
    best = min(s for s, v in scores.items() if v == best_score)
    return best, best_score


def brute_nbest(model, sentence, n):
    scores = brute_scores(model, sentence)
    ranked = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked[:n]

def brute_marginals(model, sentence):
    scores = brute_scores(model, sentence)
    vals = np.array(list(scores.values()))
    shift = vals.max()
    Z = np.exp(vals - shift).sum()
    logZ = float(np.log(Z) + shift)
    m = len(model.label_set)
    marg = np.zeros((len(sentence), m))
    for seq, s in scores.items():
        p = np.exp(s - logZ)
        for pos, l in enumerate(seq):
            marg[pos, l] += p
    return marg, logZ


# ---------------------------------------------------------------------------
# Random models over a word + neighbor-word feature space


def word_window_config():
    return FeatureConfig("est", (Template("word", None, None, 0),
                                 Template("word_w", -1, None, 1),
                                 Template("word_w", 1, None, 2)))


def word_only_config():
    return FeatureConfig("est", (Template("word", None, None, 0),))


def random_model(rng, n_tokens, m, order=1, weight_range=5.0):
    """(model, sentence) with uniform random weights on every entry the
    sentence can touch."""
    label_set = LabelSet([f"L{i}" for i in range(m)], f"L{m - 1}")
    fc = word_window_config()
    interner = FeatureInterner(fc.n_templates)
    words = [f"w{rng.randrange(max(2, n_tokens))}" for _ in range(n_tokens)]
    sentence = Sentence(tuple(Token(surface=w) for w in words), "s")
    featurize_sentence(sentence, fc, interner)
    interner.freeze()
    wt = WeightTable(m, order)
    for fid in range(len(interner)):
        wt.emit_row(fid)[:] = [rng.uniform(-weight_range, weight_range)
                               for _ in range(m)]
    flat = wt.trans.reshape(-1)
    for i in range(flat.size):
        flat[i] = rng.uniform(-weight_range, weight_range)
    return FhmmModel(wt, label_set, fc, interner), sentence


# ---------------------------------------------------------------------------
# Planted-model corpus generator (separable sequence labeling task)

PLANTED_LABELS = ["O", "A", "B", "C"]


def planted_model(vocab_per_label=4, margin=3.0, labels=PLANTED_LABELS):
    """FHMM whose word emissions separate labels by ``margin``; gold data is
    whatever this model decodes, so it is realizable by construction."""
    label_set = LabelSet(list(labels), labels[0])
    fc = word_only_config()
    interner = FeatureInterner(fc.n_templates)
    wt = WeightTable(len(label_set), 1)
    words = []
    for lab in labels:
        for i in range(vocab_per_label):
            w = f"{lab.lower()}{i}"
            words.append(w)
            fid = interner.intern(0, w)
            wt.emit_row(fid)[label_set.index(lab)] = margin
    for i in range(len(label_set)):
        wt.trans[i, i] = 1.0
    return FhmmModel(wt, label_set, fc, interner), words


def planted_corpus(model, words, n_sentences, seed, min_len=5, max_len=8,
                   id_prefix=""):
    """Random word sequences labeled by the planted model's own decoder."""
    rng = random.Random(seed)
    sentences = []
    for i in range(n_sentences):
        length = rng.randint(min_len, max_len)
        surface = [rng.choice(words) for _ in range(length)]
        probe = Sentence(tuple(Token(surface=w) for w in surface),
                         f"{id_prefix}{i}")
        gold = model.tag(probe)
        tokens = tuple(Token(surface=w, gold=g)
                       for w, g in zip(surface, gold))
        sentences.append(Sentence(tokens, f"{id_prefix}{i}"))
    return Corpus(tuple(sentences), model.label_set)


def corpus_to_conll(corpus):
    lines = []
    for sent in corpus:
        for tok in sent.tokens:
            lines.append(f"{tok.surface}\t{tok.gold}")
        lines.append("")
    return "\n".join(lines)
