"""Two-stage tagging: a general entity model feeds stacked entity-tag
features to the full spatiotemporal model.

Stage 1 is trained with the unnamed spatial/temporal tags collapsed to
outside, producing a plain entity tagger.  Its predictions populate each
token's ne_tag field, which activates the entity-tag window features of the
stage-2 profile; stage 2 then trains and decodes the full tag set.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Iterable, Sequence

from .corpus import Corpus, LabelSet, Sentence
from .errors import ConfigError
from .features import FeatureConfig
from .model import FhmmModel
from .perceptron import TrainerConfig, train

DEFAULT_DROP_TAGS = ("G", "T")


def remap_tags(corpus: Corpus, drop: Sequence[str] = DEFAULT_DROP_TAGS) -> Corpus:
    """Collapse the given gold tags to outside and shrink the label set."""
    outside = corpus.label_set.outside
    dropped = set(drop) - {outside}
    names = [n for n in corpus.label_set.names if n not in dropped]
    sentences = []
    for sent in corpus:
        tokens = tuple(
            replace(t, gold=outside if t.gold in dropped else t.gold)
            for t in sent.tokens)
        sentences.append(Sentence(tokens, sent.id))
    return Corpus(tuple(sentences), LabelSet(names, outside))


def annotate_ne(corpus: Corpus,
                tagger: Callable[[Sentence], list[str]]) -> Corpus:
    """Fill every token's ne_tag field from a tagger's predictions."""
    sentences = []
    for sent in corpus:
        tags = tagger(sent.without_gold())
        tokens = tuple(replace(t, ne_tag=tag)
                       for t, tag in zip(sent.tokens, tags))
        sentences.append(Sentence(tokens, sent.id))
    return Corpus(tuple(sentences), corpus.label_set)


def _check_stage2_config(fconfig: FeatureConfig) -> None:
    if not any(t.kind == "netag_w" for t in fconfig.templates):
        raise ConfigError(
            f"stage-2 profile {fconfig.profile!r} has no entity-tag window "
            "templates; the two-stage pipeline would be a no-op")


@dataclass
class TwoStageModel:
    stage1: FhmmModel
    stage2: FhmmModel

    def annotate(self, corpus: Corpus) -> Corpus:
        return annotate_ne(corpus, self.stage1.tag)

    def tag(self, sentence: Sentence) -> list[str]:
        ne_tags = self.stage1.tag(sentence)
        tokens = tuple(replace(t, ne_tag=tag)
                       for t, tag in zip(sentence.tokens, ne_tags))
        return self.stage2.tag(Sentence(tokens, sentence.id))


def train_two_stage(corpus: Corpus, tconfig: TrainerConfig,
                    stage1_features: FeatureConfig,
                    stage2_features: FeatureConfig,
                    drop: Sequence[str] = DEFAULT_DROP_TAGS) -> TwoStageModel:
    """Train the entity stage on the tag-collapsed corpus, annotate the full
    corpus with its predictions, then train the full-tag stage on top."""
    _check_stage2_config(stage2_features)
    stage1_corpus = remap_tags(corpus, drop)
    stage1, _ = train(stage1_corpus, tconfig, stage1_features)
    annotated = annotate_ne(corpus, stage1.tag)
    stage2, _ = train(annotated, tconfig, stage2_features)
    return TwoStageModel(stage1, stage2)
