"""Feature templates (word-level and windowed/global) and feature interning.

A template is either word-level (looks only at the current token) or global
(looks at a [-2,2] window around it; bigram templates pair adjacent window
cells).  Templates are instantiated per offset/length so each concrete
template has a dense, stable id.  Feature values are interned to dense
integer ids; a frozen interner never allocates, so unseen values at
prediction time simply vanish (they would score zero anyway).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

from .corpus import Sentence
from .errors import ConfigError

WINDOW = (-2, -1, 0, 1, 2)
BIGRAM_OFFSETS = (-2, -1, 0, 1)  # pairs cells (o, o+1)

# Word-level kinds; lengths apply to the suffix/prefix kinds.
WORD_KINDS = ("word", "lemma", "pos", "suffix", "word_suffix",
              "prefix_suffix", "pos_suffix")
# Global (windowed) kinds.
WINDOW_KINDS = ("lemma_w", "word_w", "pos_w", "suffix_w", "netag_w",
                "pos_bi", "suffix_bi", "word_bi")

# Which template kinds each task profile enables.
PROFILES = {
    "chunk": ["word", "lemma", "pos", "suffix", "word_suffix",
              "prefix_suffix", "pos_suffix", "lemma_w", "pos_w", "suffix_w"],
    "nlpba": ["word", "lemma", "suffix", "word_suffix",
              "lemma_w", "word_w", "suffix_w", "suffix_bi", "word_bi"],
    "ontonotes": ["word", "lemma", "pos", "suffix", "word_suffix",
                  "prefix_suffix", "pos_suffix", "lemma_w", "pos_bi",
                  "word_bi"],
    "est": ["word", "lemma", "suffix", "word_suffix",
            "lemma_w", "word_w", "suffix_w", "netag_w", "word_bi"],
}

_NEEDS_POS = {"pos", "pos_suffix", "pos_w", "pos_bi"}


class Template(NamedTuple):
    kind: str
    offset: Optional[int]  # None for word-level kinds
    length: Optional[int]  # suffix/prefix length, where applicable
    id: int

    @property
    def name(self) -> str:
        parts = [self.kind]
        if self.offset is not None:
            parts.append(str(self.offset))
        if self.length is not None:
            parts.append(str(self.length))
        return ":".join(parts)


def template_from_name(name: str, tid: int) -> Template:
    parts = name.split(":")
    kind = parts[0]
    offset = length = None
    rest = [int(p) for p in parts[1:]]
    if kind in WORD_KINDS:
        if rest:
            length = rest[0]
    else:
        offset = rest[0]
        if len(rest) > 1:
            length = rest[1]
    return Template(kind, offset, length, tid)


@dataclass(frozen=True)
class FeatureConfig:
    profile: str
    templates: tuple[Template, ...]
    suffix_lengths: tuple[int, ...] = (2, 3)
    prefix_lengths: tuple[int, ...] = (2, 3)

    @property
    def n_templates(self) -> int:
        return len(self.templates)


def make_config(profile: str, suffix_lengths: Sequence[int] = (2, 3),
                prefix_lengths: Sequence[int] = (2, 3)) -> FeatureConfig:
    """Instantiate the concrete template list for a task profile."""
    if profile not in PROFILES:
        raise ConfigError(
            f"unknown profile {profile!r}; expected one of {sorted(PROFILES)}")
    templates: list[Template] = []

    def add(kind, offset=None, length=None):
        templates.append(Template(kind, offset, length, len(templates)))

    for kind in PROFILES[profile]:
        if kind in ("word", "lemma", "pos"):
            add(kind)
        elif kind in ("suffix", "word_suffix", "pos_suffix"):
            for n in suffix_lengths:
                add(kind, length=n)
        elif kind == "prefix_suffix":
            for n in prefix_lengths:
                add(kind, length=n)
        elif kind in ("lemma_w", "word_w", "pos_w", "netag_w"):
            for o in WINDOW:
                add(kind, offset=o)
        elif kind == "suffix_w":
            for o in WINDOW:
                for n in suffix_lengths:
                    add(kind, offset=o, length=n)
        elif kind in ("pos_bi", "word_bi"):
            for o in BIGRAM_OFFSETS:
                add(kind, offset=o)
        elif kind == "suffix_bi":
            for o in BIGRAM_OFFSETS:
                for n in suffix_lengths:
                    add(kind, offset=o, length=n)
        else:
            raise ConfigError(f"unknown template kind {kind!r}")
    return FeatureConfig(profile, tuple(templates),
                         tuple(suffix_lengths), tuple(prefix_lengths))


def validate_fields(config: FeatureConfig, sentences) -> None:
    """Fail fast if an enabled template needs a token field the data lacks.

    The ne_tag window templates are exempt: they activate only on sentences
    that actually carry ne_tag values (two-stage pipeline input).
    """
    needs_pos = any(t.kind in _NEEDS_POS for t in config.templates)
    if not needs_pos:
        return
    for sent in sentences:
        for tok in sent.tokens:
            if tok.pos is None:
                raise ConfigError(
                    f"profile {config.profile!r} needs part-of-speech tags "
                    f"but sentence {sent.id!r} has none")


class FeatureInterner:
    """Injective (template, value) -> dense id map with a freeze switch."""

    def __init__(self, n_templates: int):
        self.n_templates = n_templates
        self._ids: dict[tuple[int, str], int] = {}
        self._items: list[tuple[int, str]] = []
        self.frozen = False

    def intern(self, template_id: int, value: str) -> Optional[int]:
        key = (template_id, value)
        fid = self._ids.get(key)
        if fid is None and not self.frozen:
            fid = len(self._items)
            self._ids[key] = fid
            self._items.append(key)
        return fid

    def freeze(self):
        self.frozen = True

    def describe(self, fid: int) -> tuple[int, str]:
        return self._items[fid]

    def __len__(self):
        return len(self._items)


def intern_stats(interner: FeatureInterner) -> dict[str, int]:
    """Template count K and interned value count F."""
    return {"templates": interner.n_templates, "values": len(interner)}


def dump_features(interner: FeatureInterner, config: FeatureConfig) -> str:
    """One line per interned feature: template-name TAB value TAB id."""
    lines = []
    for fid in range(len(interner)):
        tid, value = interner.describe(fid)
        lines.append(f"{config.templates[tid].name}\t{value}\t{fid}")
    return "\n".join(lines)


def _cell(sentence: Sentence, p: int, getter) -> str:
    """Window cell value with per-offset boundary symbols."""
    if p < 0:
        return f"<BOS{p}>"
    if p >= len(sentence):
        return f"<EOS+{p - len(sentence) + 1}>"
    return getter(sentence.tokens[p])


def _suffix(word: str, n: int) -> str:
    return word[-n:]


def _prefix(word: str, n: int) -> str:
    return word[:n]


def _lemma(tok) -> str:
    return (tok.lemma if tok.lemma is not None else tok.surface).lower()


def extract(sentence: Sentence, position: int, config: FeatureConfig,
            interner: FeatureInterner) -> list[int]:
    """Feature ids active at one token position.

    Pure given a frozen interner; unseen values are dropped.  ne_tag window
    templates fire only when the sentence carries ne_tag values.
    """
    if not 0 <= position < len(sentence):
        raise ConfigError(
            f"position {position} out of range for sentence of length "
            f"{len(sentence)}")
    tok = sentence.tokens[position]
    has_netag = all(t.ne_tag is not None for t in sentence.tokens)
    fids = []
    for t in config.templates:
        kind = t.kind
        if kind == "word":
            value = tok.surface
        elif kind == "lemma":
            value = _lemma(tok)
        elif kind == "pos":
            value = tok.pos
        elif kind == "suffix":
            value = _suffix(tok.surface, t.length)
        elif kind == "word_suffix":
            value = tok.surface + "|" + _suffix(tok.surface, t.length)
        elif kind == "prefix_suffix":
            value = _prefix(tok.surface, t.length) + "|" + _suffix(tok.surface, t.length)
        elif kind == "pos_suffix":
            value = tok.pos + "|" + _suffix(tok.surface, t.length)
        elif kind == "lemma_w":
            value = _cell(sentence, position + t.offset, _lemma)
        elif kind == "word_w":
            value = _cell(sentence, position + t.offset, lambda x: x.surface)
        elif kind == "pos_w":
            value = _cell(sentence, position + t.offset, lambda x: x.pos)
        elif kind == "suffix_w":
            value = _cell(sentence, position + t.offset,
                          lambda x: _suffix(x.surface, t.length))
        elif kind == "netag_w":
            if not has_netag:
                continue
            value = _cell(sentence, position + t.offset, lambda x: x.ne_tag)
        elif kind == "pos_bi":
            value = (_cell(sentence, position + t.offset, lambda x: x.pos)
                     + "|" + _cell(sentence, position + t.offset + 1,
                                   lambda x: x.pos))
        elif kind == "suffix_bi":
            value = (_cell(sentence, position + t.offset,
                           lambda x: _suffix(x.surface, t.length))
                     + "|" + _cell(sentence, position + t.offset + 1,
                                   lambda x: _suffix(x.surface, t.length)))
        elif kind == "word_bi":
            value = (_cell(sentence, position + t.offset, lambda x: x.surface)
                     + "|" + _cell(sentence, position + t.offset + 1,
                                   lambda x: x.surface))
        else:  # pragma: no cover
            raise ConfigError(f"unknown template kind {kind!r}")
        if value is None:
            raise ConfigError(
                f"template {t.name} needs a token field that is absent "
                f"(sentence {sentence.id!r})")
        fid = interner.intern(t.id, value)
        if fid is not None:
            fids.append(fid)
    return fids


def featurize_sentence(sentence: Sentence, config: FeatureConfig,
                       interner: FeatureInterner) -> list[list[int]]:
    return [extract(sentence, p, config, interner)
            for p in range(len(sentence))]
