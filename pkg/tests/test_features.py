import pytest
from hypothesis import given, strategies as st

from seqlab.corpus import Sentence, Token, parse_conll
from seqlab.errors import ConfigError
from seqlab.features import (FeatureInterner, PROFILES, Template, dump_features,
                             extract, featurize_sentence, intern_stats,
                             make_config, template_from_name, validate_fields)


def sentence_of(words, pos=None, ne=None):
    tokens = []
    for i, w in enumerate(words):
        tokens.append(Token(surface=w,
                            pos=pos[i] if pos else None,
                            ne_tag=ne[i] if ne else None))
    return Sentence(tuple(tokens), "s")


class TestMakeConfig:
    def test_profiles_exist(self):
        assert set(PROFILES) == {"chunk", "nlpba", "ontonotes", "est"}

    def test_template_ids_dense(self):
        for profile in PROFILES:
            cfg = make_config(profile)
            assert [t.id for t in cfg.templates] == list(range(cfg.n_templates))

    def test_est_template_count(self):
        # 1 word + 1 lemma + 2 suffix + 2 word_suffix + 5 lemma_w + 5 word_w
        # + 10 suffix_w + 5 netag_w + 4 word_bi
        assert make_config("est").n_templates == 35

    def test_window_offsets(self):
        cfg = make_config("est")
        offs = sorted(t.offset for t in cfg.templates if t.kind == "word_w")
        assert offs == [-2, -1, 0, 1, 2]
        bi = sorted(t.offset for t in cfg.templates if t.kind == "word_bi")
        assert bi == [-2, -1, 0, 1]

    def test_unknown_profile(self):
        with pytest.raises(ConfigError):
            make_config("freebase")

    def test_custom_suffix_lengths(self):
        cfg = make_config("est", suffix_lengths=(4,))
        assert [t.length for t in cfg.templates if t.kind == "suffix"] == [4]

    def test_template_name_roundtrip(self):
        for profile in PROFILES:
            for t in make_config(profile).templates:
                assert template_from_name(t.name, t.id) == t


class TestValidateFields:
    def test_pos_profile_needs_pos(self):
        with pytest.raises(ConfigError) as exc:
            validate_fields(make_config("chunk"), [sentence_of(["a", "b"])])
        assert "'s'" in str(exc.value)

    def test_pos_present_ok(self):
        validate_fields(make_config("chunk"),
                        [sentence_of(["a", "b"], pos=["DT", "NN"])])

    def test_netag_exempt(self):
        # est has netag_w but validation passes without ne_tag values
        validate_fields(make_config("est"), [sentence_of(["a", "b"])])


class TestInterner:
    def test_injective_and_dense(self):
        it = FeatureInterner(2)
        a = it.intern(0, "x")
        b = it.intern(1, "x")
        c = it.intern(0, "y")
        assert len({a, b, c}) == 3
        assert sorted((a, b, c)) == [0, 1, 2]
        assert it.intern(0, "x") == a

    def test_frozen_returns_none_for_unseen(self):
        it = FeatureInterner(1)
        fid = it.intern(0, "seen")
        it.freeze()
        assert it.intern(0, "seen") == fid
        assert it.intern(0, "unseen") is None
        assert len(it) == 1

    def test_describe(self):
        it = FeatureInterner(1)
        fid = it.intern(0, "hello")
        assert it.describe(fid) == (0, "hello")

    def test_stats(self):
        it = FeatureInterner(3)
        it.intern(0, "a")
        it.intern(1, "a")
        assert intern_stats(it) == {"templates": 3, "values": 2}


class TestExtract:
    def test_deterministic_when_frozen(self):
        cfg = make_config("est")
        it = FeatureInterner(cfg.n_templates)
        sent = sentence_of(["west", "of", "Boston"])
        featurize_sentence(sent, cfg, it)
        it.freeze()
        a = featurize_sentence(sent, cfg, it)
        b = featurize_sentence(sent, cfg, it)
        assert a == b

    def test_unseen_word_keeps_window_features(self):
        cfg = make_config("est")
        it = FeatureInterner(cfg.n_templates)
        sent = sentence_of(["west", "of", "Boston"])
        featurize_sentence(sent, cfg, it)
        it.freeze()
        probe = sentence_of(["east", "of", "Boston"])
        fids = extract(probe, 1, cfg, it)
        # the word template for "of" was seen; features survive freezing
        assert fids
        assert all(isinstance(f, int) for f in fids)

    def test_boundary_symbols_distinct_per_offset(self):
        cfg = make_config("est")
        it = FeatureInterner(cfg.n_templates)
        sent = sentence_of(["only"])
        extract(sent, 0, cfg, it)
        values = {it.describe(f)[1] for f in range(len(it))}
        assert "<BOS-1>" in values and "<BOS-2>" in values
        assert "<EOS+1>" in values and "<EOS+2>" in values

    def test_netag_fires_only_with_ne_tags(self):
        cfg = make_config("est")
        it = FeatureInterner(cfg.n_templates)
        netag_ids = {t.id for t in cfg.templates if t.kind == "netag_w"}
        plain = sentence_of(["a", "b"])
        tagged = sentence_of(["a", "b"], ne=["O", "G"])
        plain_fids = extract(plain, 0, cfg, it)
        tagged_fids = extract(tagged, 0, cfg, it)
        plain_templates = {it.describe(f)[0] for f in plain_fids}
        tagged_templates = {it.describe(f)[0] for f in tagged_fids}
        assert not plain_templates & netag_ids
        assert tagged_templates & netag_ids

    def test_position_out_of_range(self):
        cfg = make_config("est")
        it = FeatureInterner(cfg.n_templates)
        with pytest.raises(ConfigError):
            extract(sentence_of(["a"]), 1, cfg, it)

    def test_suffix_values(self):
        cfg = make_config("est")
        it = FeatureInterner(cfg.n_templates)
        sid = next(t.id for t in cfg.templates
                   if t.kind == "suffix" and t.length == 3)
        extract(sentence_of(["Boston"]), 0, cfg, it)
        values = {it.describe(f)[1] for f in range(len(it))
                  if it.describe(f)[0] == sid}
        assert values == {"ton"}

    def test_pos_bigram_value(self):
        cfg = make_config("ontonotes")
        it = FeatureInterner(cfg.n_templates)
        bid = next(t.id for t in cfg.templates
                   if t.kind == "pos_bi" and t.offset == 0)
        sent = sentence_of(["green", "tea"], pos=["JJ", "NN"])
        extract(sent, 0, cfg, it)
        values = {it.describe(f)[1] for f in range(len(it))
                  if it.describe(f)[0] == bid}
        assert values == {"JJ|NN"}

    def test_missing_pos_raises(self):
        cfg = make_config("chunk")
        it = FeatureInterner(cfg.n_templates)
        with pytest.raises(ConfigError):
            extract(sentence_of(["a"]), 0, cfg, it)

    @given(st.lists(st.text(alphabet="abcXYZ", min_size=1, max_size=6),
                    min_size=1, max_size=6))
    def test_extract_pure_given_frozen_interner(self, words):
        cfg = make_config("nlpba")
        it = FeatureInterner(cfg.n_templates)
        sent = sentence_of(words)
        first = featurize_sentence(sent, cfg, it)
        it.freeze()
        assert featurize_sentence(sent, cfg, it) == first

    def test_dump_features_lines(self):
        cfg = make_config("est")
        it = FeatureInterner(cfg.n_templates)
        featurize_sentence(sentence_of(["west", "of", "Boston"]), cfg, it)
        dump = dump_features(it, cfg)
        lines = dump.splitlines()
        assert len(lines) == len(it)
        assert lines[0].count("\t") == 2
