"""Featurized HMM: linear sequence scoring, exact decoding, and marginals.

A model scores a label sequence as the sum of emission weights for the
features active at each position under that position's label, plus
transition weights over adjacent labels (Markov order 1) or label triples
(order 2).  Probabilities are defined by globally normalizing exp(score)
over all sequences; the partition function comes from the forward pass.

All decoding is exact.  Ties break toward the lexicographically smallest
label-index sequence everywhere, which keeps every consumer deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.special import logsumexp

from .corpus import LabelSet, Sentence
from .errors import ConfigError, ContractError, ParseError
from .features import (FeatureConfig, FeatureInterner, featurize_sentence,
                       make_config, template_from_name)

MODEL_FORMAT = "seqlab-fhmm"
MODEL_VERSION = 1
BOS_NAME = "<BOS>"


class WeightTable:
    """Sparse emission weights plus dense transition weights.

    Emissions: feature id -> vector over labels (absent rows read as zero).
    Transitions: (prev, cur) matrix for order 1; (older, prev, cur) tensor
    for order 2, where older index ``n_labels`` is the begin-of-sentence
    slot used at the second token.
    """

    def __init__(self, n_labels: int, markov_order: int = 1):
        if markov_order not in (1, 2):
            raise ConfigError(f"markov_order must be 1 or 2, got {markov_order}")
        self.n_labels = n_labels
        self.markov_order = markov_order
        self.emit: dict[int, np.ndarray] = {}
        if markov_order == 1:
            self.trans = np.zeros((n_labels, n_labels))
        else:
            self.trans = np.zeros((n_labels + 1, n_labels, n_labels))

    def emit_row(self, fid: int) -> np.ndarray:
        row = self.emit.get(fid)
        if row is None:
            row = self.emit[fid] = np.zeros(self.n_labels)
        return row

    def copy(self) -> "WeightTable":
        out = WeightTable(self.n_labels, self.markov_order)
        out.emit = {fid: row.copy() for fid, row in self.emit.items()}
        out.trans = self.trans.copy()
        return out


def _emissions(feats: list[list[int]], weights: WeightTable) -> np.ndarray:
    E = np.zeros((len(feats), weights.n_labels))
    emit = weights.emit
    for p, fids in enumerate(feats):
        for fid in fids:
            row = emit.get(fid)
            if row is not None:
                E[p] += row
    return E


# ---------------------------------------------------------------------------
# Pure lattice algorithms on (E, T).  E is (length, m); T is the transition
# matrix/tensor per Markov order.


def lattice_score(E, T, order, labels) -> float:
    s = sum(E[p, l] for p, l in enumerate(labels))
    m = E.shape[1]
    if order == 1:
        for p in range(1, len(labels)):
            s += T[labels[p - 1], labels[p]]
    else:
        for p in range(1, len(labels)):
            older = labels[p - 2] if p >= 2 else m
            s += T[older, labels[p - 1], labels[p]]
    return float(s)


def lattice_viterbi(E, T, order):
    """(best sequence, score); lexicographically smallest among argmaxes.

    Uses backward max scores, then a greedy left-to-right selection: at each
    position the smallest label index attaining the optimum is chosen, which
    yields the lexicographically smallest optimal sequence.
    """
    L, m = E.shape
    if L == 1:
        l = int(np.argmax(E[0]))
        return (l,), float(E[0, l])
    if order == 1:
        beta = np.empty((L, m))
        beta[L - 1] = E[L - 1]
        for p in range(L - 2, -1, -1):
            beta[p] = E[p] + (T + beta[p + 1][None, :]).max(axis=1)
        l = int(np.argmax(beta[0]))
        score = float(beta[0, l])
        seq = [l]
        for p in range(1, L):
            l = int(np.argmax(T[seq[-1]] + beta[p]))
            seq.append(l)
        return tuple(seq), score
    # order 2: pair states (label at p-1, label at p)
    beta = np.empty((L, m, m))
    beta[L - 1] = np.broadcast_to(E[L - 1][None, :], (m, m))
    for p in range(L - 2, 0, -1):
        # beta[p][a,b] = E[p][b] + max_c(T[a,b,c] + beta[p+1][b,c])
        nxt = T[:m] + beta[p + 1][None, :, :]
        beta[p] = E[p][None, :] + nxt.max(axis=2)
    total = E[0][:, None] + T[m] + beta[1]
    flat = int(np.argmax(total))
    a, b = divmod(flat, m)
    score = float(total[a, b])
    seq = [a, b]
    for p in range(2, L):
        c = int(np.argmax(T[a, b] + beta[p][b]))
        seq.append(c)
        a, b = b, c
    return tuple(seq), score


def lattice_nbest(E, T, order, n):
    """Exact top-n sequences, sorted by (-score, sequence)."""
    if n < 1:
        raise ContractError(f"n must be >= 1, got {n}")
    L, m = E.shape

    def top(cands):
        cands.sort(key=lambda sc: (-sc[0], sc[1]))
        return cands[:n]

    if order == 1 or L == 1:
        # state: last label
        lists = {l: [(float(E[0, l]), (l,))] for l in range(m)}
        for p in range(1, L):
            new = {}
            for c in range(m):
                cands = []
                for l, hyps in lists.items():
                    t = float(T[l, c]) if order == 1 else None
                    for s, seq in hyps:
                        if order == 1:
                            cands.append((s + t + float(E[p, c]), seq + (c,)))
                        else:
                            older = seq[-2] if len(seq) >= 2 else m
                            cands.append((s + float(T[older, l, c])
                                          + float(E[p, c]), seq + (c,)))
                new[c] = top(cands)
            lists = new
        final = [sc for hyps in lists.values() for sc in hyps]
        return [(seq, s) for s, seq in top(final)]
    # order 2 with L >= 2: state = (label at p-1, label at p)
    lists = {}
    for a in range(m):
        for b in range(m):
            lists[(a, b)] = [(float(E[0, a] + T[m, a, b] + E[1, b]), (a, b))]
    for p in range(2, L):
        new = {}
        for b in range(m):
            for c in range(m):
                cands = []
                for a in range(m):
                    t = float(T[a, b, c])
                    for s, seq in lists[(a, b)]:
                        cands.append((s + t + float(E[p, c]), seq + (c,)))
                new[(b, c)] = top(cands)
        lists = new
    final = [sc for hyps in lists.values() for sc in hyps]
    return [(seq, s) for s, seq in top(final)]


def lattice_forward_backward(E, T, order):
    """(marginals, logZ) in log-space; marginals are exact posteriors."""
    L, m = E.shape
    if L == 1:
        logZ = float(logsumexp(E[0]))
        return np.exp(E[0] - logZ)[None, :].reshape(1, m), logZ
    if order == 1:
        alpha = np.empty((L, m))
        alpha[0] = E[0]
        for p in range(1, L):
            alpha[p] = E[p] + logsumexp(alpha[p - 1][:, None] + T, axis=0)
        beta = np.zeros((L, m))
        for p in range(L - 2, -1, -1):
            beta[p] = logsumexp(T + (E[p + 1] + beta[p + 1])[None, :], axis=1)
        logZ = float(logsumexp(alpha[L - 1]))
        marg = np.exp(alpha + beta - logZ)
        return marg, logZ
    # order 2: pair states
    alpha = np.empty((L, m, m))  # alpha[p][a,b]: prefix ending labels (p-1,p)=(a,b)
    alpha[1] = E[0][:, None] + T[m] + E[1][None, :]
    for p in range(2, L):
        # alpha[p][b,c] = lse_a(alpha[p-1][a,b] + T[a,b,c]) + E[p][c]
        alpha[p] = (logsumexp(alpha[p - 1][:, :, None] + T[:m], axis=0)
                    + E[p][None, :])
    beta = np.zeros((L, m, m))
    for p in range(L - 2, 0, -1):
        # beta[p][a,b] = lse_c(T[a,b,c] + E[p+1][c] + beta[p+1][b,c])
        beta[p] = logsumexp(T[:m] + (E[p + 1][None, :] + beta[p + 1])[None, :, :],
                            axis=2)
    logZ = float(logsumexp(alpha[L - 1]))
    marg = np.empty((L, m))
    post = alpha[1:] + beta[1:]  # (L-1, m, m) joint over (p-1, p) pairs
    marg[0] = np.exp(logsumexp(post[0], axis=1) - logZ)
    for p in range(1, L):
        marg[p] = np.exp(logsumexp(post[p - 1], axis=0) - logZ)
    return marg, logZ


# ---------------------------------------------------------------------------


@dataclass
class FhmmModel:
    """Immutable trained model: weights + label inventory + featurization."""

    weights: WeightTable
    label_set: LabelSet
    feature_config: FeatureConfig
    interner: FeatureInterner

    def __post_init__(self):
        if self.weights.n_labels != len(self.label_set):
            raise ConfigError("weight table / label set size mismatch")
        self.interner.freeze()

    @property
    def markov_order(self) -> int:
        return self.weights.markov_order

    def featurize(self, sentence: Sentence) -> list[list[int]]:
        return featurize_sentence(sentence, self.feature_config, self.interner)

    def emissions(self, sentence: Sentence,
                  feats: Optional[list[list[int]]] = None) -> np.ndarray:
        if feats is None:
            feats = self.featurize(sentence)
        return _emissions(feats, self.weights)

    def _check_len(self, sentence, labels):
        if len(labels) != len(sentence):
            raise ContractError(
                f"label sequence length {len(labels)} != sentence length "
                f"{len(sentence)}")

    def score_sequence(self, sentence: Sentence, labels: Sequence[int],
                       feats=None) -> float:
        self._check_len(sentence, labels)
        E = self.emissions(sentence, feats)
        return lattice_score(E, self.weights.trans, self.markov_order, labels)

    def viterbi(self, sentence: Sentence, feats=None) -> tuple[tuple[int, ...], float]:
        E = self.emissions(sentence, feats)
        return lattice_viterbi(E, self.weights.trans, self.markov_order)

    def viterbi_nbest(self, sentence: Sentence, n: int,
                      feats=None) -> list[tuple[tuple[int, ...], float]]:
        E = self.emissions(sentence, feats)
        return lattice_nbest(E, self.weights.trans, self.markov_order, n)

    def forward_backward(self, sentence: Sentence,
                         feats=None) -> tuple[np.ndarray, float]:
        E = self.emissions(sentence, feats)
        return lattice_forward_backward(E, self.weights.trans, self.markov_order)

    def sequence_probability(self, sentence: Sentence, labels: Sequence[int],
                             feats=None) -> float:
        self._check_len(sentence, labels)
        E = self.emissions(sentence, feats)
        order = self.markov_order
        score = lattice_score(E, self.weights.trans, order, labels)
        _, logZ = lattice_forward_backward(E, self.weights.trans, order)
        return float(np.exp(score - logZ))

    def label_names(self, indices: Sequence[int]) -> list[str]:
        return [self.label_set.names[i] for i in indices]

    def tag(self, sentence: Sentence) -> list[str]:
        """Viterbi labels as tag strings."""
        seq, _ = self.viterbi(sentence)
        return self.label_names(seq)


# ---------------------------------------------------------------------------
# Textual serialization.  Weights are printed with repr() so parsing them
# back gives bit-identical floats; line order is deterministic, so
# save(load(save(m))) == save(m).


def save_model(model: FhmmModel) -> str:
    lines = [
        f"{MODEL_FORMAT} {MODEL_VERSION}",
        f"markov_order\t{model.markov_order}",
        f"profile\t{model.feature_config.profile}",
        "suffix_lengths\t" + ",".join(map(str, model.feature_config.suffix_lengths)),
        "prefix_lengths\t" + ",".join(map(str, model.feature_config.prefix_lengths)),
        f"outside\t{model.label_set.outside}",
        "labels\t" + "\t".join(model.label_set.names),
    ]
    names = model.label_set.names
    templates = model.feature_config.templates
    for fid in range(len(model.interner)):
        tid, value = model.interner.describe(fid)
        row = model.weights.emit.get(fid)
        feat = f"{templates[tid].name}={value}"
        if row is None:
            lines.append(f"FEAT\t{feat}")  # keeps the interner complete
            continue
        lines.append(f"FEAT\t{feat}")
        for li, w in enumerate(row):
            if w != 0.0:
                lines.append(f"{feat}\t{names[li]}\t{float(w)!r}")
    T = model.weights.trans
    if model.markov_order == 1:
        for a in range(len(names)):
            for b in range(len(names)):
                if T[a, b] != 0.0:
                    lines.append(
                        f"TRANS\t{names[a]}\t{names[b]}\t{float(T[a, b])!r}")
    else:
        older_names = names + [BOS_NAME]
        for a in range(len(older_names)):
            for b in range(len(names)):
                for c in range(len(names)):
                    if T[a, b, c] != 0.0:
                        lines.append(f"TRANS\t{older_names[a]}\t{names[b]}"
                                     f"\t{names[c]}\t{float(T[a, b, c])!r}")
    return "\n".join(lines) + "\n"


def load_model(text: str) -> FhmmModel:
    lines = text.splitlines()
    header = lines[0].split() if lines else []
    if len(header) != 2 or header[0] != MODEL_FORMAT or not header[1].isdigit():
        got = lines[0] if lines else ""
        raise ParseError(f"not a model file (got {got!r})", line_no=1)
    if int(header[1]) > MODEL_VERSION:
        raise ParseError(f"model file version {header[1]} is newer than "
                         f"supported version {MODEL_VERSION}", line_no=1)
    meta = {}
    i = 1
    while i < len(lines) and not lines[i].startswith(("FEAT\t", "TRANS\t")):
        key, _, value = lines[i].partition("\t")
        meta[key] = value
        i += 1
    order = int(meta["markov_order"])
    label_set = LabelSet(meta["labels"].split("\t"), meta["outside"])
    config = make_config(meta["profile"],
                         tuple(int(x) for x in meta["suffix_lengths"].split(",")),
                         tuple(int(x) for x in meta["prefix_lengths"].split(",")))
    by_name = {t.name: t for t in config.templates}
    interner = FeatureInterner(config.n_templates)
    weights = WeightTable(len(label_set), order)
    names = label_set.names
    older_index = {n: j for j, n in enumerate(names + [BOS_NAME])}

    def feat_id(feat: str) -> int:
        tname, _, value = feat.partition("=")
        t = by_name.get(tname)
        if t is None:
            raise ConfigError(f"unknown template {tname!r} in model file")
        return interner.intern(t.id, value)

    for line in lines[i:]:
        if not line:
            continue
        cols = line.split("\t")
        if cols[0] == "FEAT":
            feat_id(cols[1])
        elif cols[0] == "TRANS":
            if order == 1:
                a, b, w = cols[1], cols[2], cols[3]
                weights.trans[label_set.index(a), label_set.index(b)] = float(w)
            else:
                a, b, c, w = cols[1], cols[2], cols[3], cols[4]
                weights.trans[older_index[a], label_set.index(b),
                              label_set.index(c)] = float(w)
        else:
            fid = feat_id(cols[0])
            weights.emit_row(fid)[label_set.index(cols[1])] = float(cols[2])
    return FhmmModel(weights, label_set, config, interner)
