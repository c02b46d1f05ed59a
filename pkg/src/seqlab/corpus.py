"""Corpus ingestion, the flat tag scheme, span extraction, and phrase-level scoring.

Tags are flat: every token of a phrase carries the same bare tag and a phrase
is a maximal run of identical non-outside tags.  There is no B/I marking, so
two adjacent phrases of the same type are indistinguishable; this is a
documented property of the annotation scheme, not a bug.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from typing import Iterable, NamedTuple, Optional, Sequence

from .errors import ConfigError, EvaluationError, ParseError

# Tag palette for the spatiotemporal annotation scheme.  "O" is the outside
# tag; "O-org" is the organization entity so it cannot collide with outside.
EST_TAGS = ["L", "D", "G", "T", "O-org", "P", "ST", "B", "W",
            "UL", "US", "UB", "E", "O"]

TOKEN_FIELDS = ("surface", "lemma", "pos", "ne_tag", "gold", "ignore")


class Label(NamedTuple):
    name: str
    index: int


class LabelSet:
    """Dense, ordered label inventory with a single designated outside label."""

    def __init__(self, names: Sequence[str], outside: str):
        if outside not in names:
            names = list(names) + [outside]
        if len(set(names)) != len(names):
            raise ConfigError(f"duplicate label names: {list(names)}")
        self.names = list(names)
        self.outside = outside
        self._index = {n: i for i, n in enumerate(self.names)}

    @property
    def outside_index(self) -> int:
        return self._index[self.outside]

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise ConfigError(f"unknown label {name!r}") from None

    def labels(self) -> list[Label]:
        return [Label(n, i) for i, n in enumerate(self.names)]

    def __len__(self):
        return len(self.names)

    def __contains__(self, name):
        return name in self._index

    def __eq__(self, other):
        return (isinstance(other, LabelSet)
                and self.names == other.names and self.outside == other.outside)

    def __repr__(self):
        return f"LabelSet({self.names!r}, outside={self.outside!r})"


@dataclass(frozen=True)
class Token:
    surface: str
    lemma: Optional[str] = None
    pos: Optional[str] = None
    ne_tag: Optional[str] = None
    gold: Optional[str] = None

    def __post_init__(self):
        if not self.surface:
            raise ParseError("empty token surface")


@dataclass(frozen=True)
class Sentence:
    tokens: tuple[Token, ...]
    id: str

    def __post_init__(self):
        if len(self.tokens) < 1:
            raise ParseError(f"sentence {self.id!r} has no tokens")
        golds = [t.gold is not None for t in self.tokens]
        if any(golds) and not all(golds):
            raise ParseError(f"sentence {self.id!r} is partially gold-labeled")

    def __len__(self):
        return len(self.tokens)

    @property
    def gold_labels(self) -> Optional[tuple[str, ...]]:
        if self.tokens[0].gold is None:
            return None
        return tuple(t.gold for t in self.tokens)

    def without_gold(self) -> "Sentence":
        return Sentence(tuple(replace(t, gold=None) for t in self.tokens), self.id)


@dataclass(frozen=True)
class Corpus:
    sentences: tuple[Sentence, ...]
    label_set: LabelSet

    def __post_init__(self):
        for s in self.sentences:
            for t in s.tokens:
                if t.gold is not None and t.gold not in self.label_set:
                    raise ConfigError(
                        f"sentence {s.id!r}: gold label {t.gold!r} not in label set")

    def __len__(self):
        return len(self.sentences)

    def __iter__(self):
        return iter(self.sentences)


class Span(NamedTuple):
    start: int  # inclusive
    end: int    # inclusive
    label: str


def parse_conll(text: str, column_map: Optional[dict[int, str]] = None,
                outside: str = "O") -> Corpus:
    """Parse blank-line separated column text into a Corpus.

    ``column_map`` maps 0-based column indices to token fields
    (surface/lemma/pos/ne_tag/gold/ignore); default is CoNLL-2000 style
    {0: surface, 1: pos, 2: gold}.  Unknown gold labels are collected in
    first-appearance order; ``outside`` names the designated outside label.
    When no lemma column is mapped, lemmas default to the lowercased surface.
    """
    if column_map is None:
        column_map = {0: "surface", 1: "pos", 2: "gold"}
    for field_name in column_map.values():
        if field_name not in TOKEN_FIELDS:
            raise ConfigError(f"unknown token field {field_name!r}")
    if "surface" not in column_map.values():
        raise ConfigError("column_map must include a surface column")
    has_lemma = "lemma" in column_map.values()

    sentences = []
    label_names: list[str] = []
    seen_labels = set()
    expected_cols = None
    tokens: list[Token] = []

    def flush():
        if tokens:
            sentences.append(Sentence(tuple(tokens), id=str(len(sentences))))
            tokens.clear()

    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            flush()
            continue
        cols = line.split()
        if expected_cols is None:
            expected_cols = len(cols)
            if expected_cols <= max(column_map):
                raise ParseError(
                    f"{expected_cols} columns but column_map needs "
                    f"{max(column_map) + 1}", line_no)
        elif len(cols) != expected_cols:
            raise ParseError(
                f"expected {expected_cols} columns, got {len(cols)}", line_no)
        fields = {}
        for idx, name in column_map.items():
            if name != "ignore":
                fields[name] = cols[idx]
        if not has_lemma:
            fields["lemma"] = fields["surface"].lower()
        gold = fields.get("gold")
        if gold is not None and gold not in seen_labels:
            seen_labels.add(gold)
            label_names.append(gold)
        tokens.append(Token(**fields))
    flush()

    return Corpus(tuple(sentences), LabelSet(label_names, outside))


def write_conll(corpus: Corpus, columns: Sequence[str] = ("surface", "pos", "gold"),
                predicted: Optional[Sequence[Sequence[str]]] = None) -> str:
    """Render a Corpus back to column text; inverse of parse_conll.

    When ``predicted`` is given, one extra column with the predicted label
    is appended to every token line.
    """
    lines = []
    for i, sent in enumerate(corpus.sentences):
        for p, tok in enumerate(sent.tokens):
            cols = []
            for name in columns:
                value = getattr(tok, name)
                if value is None:
                    raise ConfigError(f"token lacks field {name!r}")
                cols.append(value)
            if predicted is not None:
                cols.append(predicted[i][p])
            lines.append("\t".join(cols))
        lines.append("")
    return "\n".join(lines)


def split(corpus: Corpus, test_fraction: float, seed: int) -> tuple[Corpus, Corpus]:
    """Deterministic train/test split; |test| = round(test_fraction * |corpus|)."""
    if not 0.0 < test_fraction < 1.0:
        raise ConfigError(f"test_fraction must be in (0,1), got {test_fraction}")
    if len(corpus) == 0:
        raise ConfigError("cannot split an empty corpus")
    n = len(corpus)
    n_test = round(test_fraction * n)
    order = list(range(n))
    random.Random(seed).shuffle(order)
    test_idx = set(order[:n_test])
    train = tuple(s for i, s in enumerate(corpus.sentences) if i not in test_idx)
    test = tuple(s for i, s in enumerate(corpus.sentences) if i in test_idx)
    return (Corpus(train, corpus.label_set), Corpus(test, corpus.label_set))


def extract_spans(labels: Sequence[str], outside: str = "O") -> list[Span]:
    """Maximal runs of identical non-outside labels, as (start, end, label)."""
    spans = []
    start = None
    for i, lab in enumerate(labels):
        if lab == outside:
            if start is not None:
                spans.append(Span(start, i - 1, labels[start]))
                start = None
        elif start is None:
            start = i
        elif lab != labels[start]:
            spans.append(Span(start, i - 1, labels[start]))
            start = i
    if start is not None:
        spans.append(Span(start, len(labels) - 1, labels[start]))
    return spans


class Metrics(NamedTuple):
    precision: float
    recall: float
    f1: float
    correct: int
    predicted: int
    gold: int


@dataclass
class EvalReport:
    micro: Metrics
    per_type: dict[str, Metrics]

    def format(self) -> str:
        rows = [("type", "prec", "rec", "f1", "correct", "pred", "gold")]
        for name, m in sorted(self.per_type.items()):
            rows.append((name, f"{m.precision:.4f}", f"{m.recall:.4f}",
                         f"{m.f1:.4f}", str(m.correct), str(m.predicted),
                         str(m.gold)))
        m = self.micro
        rows.append(("ALL", f"{m.precision:.4f}", f"{m.recall:.4f}",
                     f"{m.f1:.4f}", str(m.correct), str(m.predicted),
                     str(m.gold)))
        widths = [max(len(r[c]) for r in rows) for c in range(len(rows[0]))]
        return "\n".join(
            "  ".join(cell.ljust(w) for cell, w in zip(row, widths))
            for row in rows)

    def records(self) -> str:
        """Machine-readable key=value lines."""
        out = []
        for scope, m in [("micro", self.micro)] + sorted(self.per_type.items()):
            out.append(f"{scope}.precision={m.precision!r}")
            out.append(f"{scope}.recall={m.recall!r}")
            out.append(f"{scope}.f1={m.f1!r}")
        return "\n".join(out)


def _metrics(correct: int, predicted: int, gold: int) -> Metrics:
    p = correct / predicted if predicted else 0.0
    r = correct / gold if gold else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return Metrics(p, r, f, correct, predicted, gold)


def evaluate(gold: Corpus, predicted: Sequence[Sequence[str]]) -> EvalReport:
    """Exact-match phrase scoring: a predicted span is correct iff start, end,
    and label all match a gold span."""
    if len(predicted) != len(gold):
        raise EvaluationError(
            f"{len(gold)} gold sentences but {len(predicted)} predictions")
    outside = gold.label_set.outside
    correct: dict[str, int] = {}
    n_pred: dict[str, int] = {}
    n_gold: dict[str, int] = {}
    for sent, pred in zip(gold.sentences, predicted):
        if len(pred) != len(sent):
            raise EvaluationError(
                f"sentence {sent.id!r}: {len(sent)} tokens but "
                f"{len(pred)} predicted labels")
        if sent.gold_labels is None:
            raise EvaluationError(f"sentence {sent.id!r} has no gold labels")
        gold_spans = set(extract_spans(sent.gold_labels, outside))
        pred_spans = set(extract_spans(list(pred), outside))
        for sp in gold_spans:
            n_gold[sp.label] = n_gold.get(sp.label, 0) + 1
        for sp in pred_spans:
            n_pred[sp.label] = n_pred.get(sp.label, 0) + 1
        for sp in gold_spans & pred_spans:
            correct[sp.label] = correct.get(sp.label, 0) + 1
    types = sorted(set(n_gold) | set(n_pred))
    per_type = {t: _metrics(correct.get(t, 0), n_pred.get(t, 0), n_gold.get(t, 0))
                for t in types}
    micro = _metrics(sum(correct.values()), sum(n_pred.values()),
                     sum(n_gold.values()))
    return EvalReport(micro, per_type)
