import random

import pytest
from hypothesis import given, strategies as st

from seqlab.corpus import (Corpus, LabelSet, Sentence, Span, Token, evaluate,
                           extract_spans, parse_conll, split, write_conll)
from seqlab.errors import ConfigError, EvaluationError, ParseError

WEST = "west G\nof G\nBoston L\n"
TWO_COL = {0: "surface", 1: "gold"}


class TestParseConll:
    def test_west_of_boston(self):
        corpus = parse_conll(WEST, TWO_COL)
        assert len(corpus) == 1
        assert corpus.sentences[0].gold_labels == ("G", "G", "L")
        assert corpus.label_set.names == ["G", "L", "O"]
        assert corpus.label_set.outside == "O"

    def test_empty_input(self):
        corpus = parse_conll("", TWO_COL)
        assert len(corpus) == 0

    def test_two_blocks(self):
        text = "a X\nb X\n\nc Y\nd Y\ne Y\n"
        corpus = parse_conll(text, TWO_COL)
        assert len(corpus) == 2
        assert [len(s) for s in corpus] == [2, 3]

    def test_ragged_row_reports_line(self):
        with pytest.raises(ParseError) as exc:
            parse_conll("a X\nb\n", TWO_COL)
        assert "line 2" in str(exc.value)

    def test_unknown_field_rejected(self):
        with pytest.raises(ConfigError):
            parse_conll(WEST, {0: "surface", 1: "wavelength"})

    def test_default_lemma_is_lowercased_surface(self):
        corpus = parse_conll("West G\n", TWO_COL)
        assert corpus.sentences[0].tokens[0].lemma == "west"

    def test_labels_first_appearance_order(self):
        corpus = parse_conll("a T\nb G\nc T\nd O\n", TWO_COL)
        assert corpus.label_set.names == ["T", "G", "O"]

    def test_roundtrip(self):
        corpus = parse_conll(WEST, TWO_COL)
        text = write_conll(corpus, ("surface", "gold"))
        again = parse_conll(text, TWO_COL)
        assert len(again) == len(corpus)
        for a, b in zip(again, corpus):
            assert [t.surface for t in a.tokens] == [t.surface for t in b.tokens]
            assert a.gold_labels == b.gold_labels

    def test_partial_gold_rejected(self):
        with pytest.raises(ParseError):
            Sentence((Token("a", gold="X"), Token("b")), "s")


class TestSplit:
    def _corpus(self, n):
        text = "\n\n".join(f"w{i} O" for i in range(n)) + "\n"
        return parse_conll(text, TWO_COL)

    def test_counts_and_disjointness(self):
        corpus = self._corpus(10)
        train, test = split(corpus, 0.2, seed=7)
        assert len(train) == 8 and len(test) == 2
        train_ids = {s.id for s in train}
        test_ids = {s.id for s in test}
        assert not train_ids & test_ids
        assert train_ids | test_ids == {s.id for s in corpus}

    def test_deterministic(self):
        corpus = self._corpus(10)
        a = split(corpus, 0.2, seed=7)
        b = split(corpus, 0.2, seed=7)
        assert [s.id for s in a[0]] == [s.id for s in b[0]]
        assert [s.id for s in a[1]] == [s.id for s in b[1]]

    def test_est_sized_split(self):
        corpus = self._corpus(2151)
        train, test = split(corpus, 0.209, seed=0)
        assert len(train) == 1701
        assert len(test) == 450

    def test_bad_fraction(self):
        corpus = self._corpus(4)
        for frac in (0.0, 1.0, -0.3, 2.0):
            with pytest.raises(ConfigError):
                split(corpus, frac, seed=0)


class TestExtractSpans:
    def test_west_of_boston(self):
        assert extract_spans(("G", "G", "L")) == [Span(0, 1, "G"),
                                                  Span(2, 2, "L")]

    def test_all_outside(self):
        assert extract_spans(("O", "O", "O")) == []

    def test_temporal_event(self):
        assert extract_spans(("T", "T", "T", "E", "E")) == [Span(0, 2, "T"),
                                                            Span(3, 4, "E")]

    @given(st.lists(st.sampled_from(["O", "G", "L", "T"]), min_size=1,
                    max_size=30))
    def test_spans_cover_non_outside_positions(self, labels):
        spans = extract_spans(labels)
        covered = set()
        prev_end = -1
        for sp in spans:
            assert sp.start <= sp.end
            assert sp.start > prev_end  # sorted and disjoint
            prev_end = sp.end
            assert sp.label != "O"
            covered |= set(range(sp.start, sp.end + 1))
        assert covered == {i for i, lab in enumerate(labels) if lab != "O"}


def _naive_span_scores(gold_corpus, predicted):
    """Second, independent exact-match span scorer."""
    outside = gold_corpus.label_set.outside

    def spans_of(labels):
        out = set()
        i = 0
        labels = list(labels)
        while i < len(labels):
            if labels[i] == outside:
                i += 1
                continue
            j = i
            while j + 1 < len(labels) and labels[j + 1] == labels[i]:
                j += 1
            out.add((i, j, labels[i]))
            i = j + 1
        return out

    correct = pred_n = gold_n = 0
    for sent, pred in zip(gold_corpus, predicted):
        g = spans_of(sent.gold_labels)
        p = spans_of(pred)
        correct += len(g & p)
        pred_n += len(p)
        gold_n += len(g)
    prec = correct / pred_n if pred_n else 0.0
    rec = correct / gold_n if gold_n else 0.0
    f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
    return prec, rec, f1


class TestEvaluate:
    def _corpus(self, label_rows):
        sentences = []
        names, seen = [], set()
        for i, labels in enumerate(label_rows):
            tokens = tuple(Token(f"w{j}", gold=lab)
                           for j, lab in enumerate(labels))
            sentences.append(Sentence(tokens, str(i)))
            for lab in labels:
                if lab not in seen:
                    seen.add(lab)
                    names.append(lab)
        return Corpus(tuple(sentences), LabelSet(names, "O"))

    def test_perfect_prediction(self):
        corpus = self._corpus([["G", "G", "L", "O"], ["T", "O", "E"]])
        report = evaluate(corpus, [s.gold_labels for s in corpus])
        assert report.micro == report.micro._replace(precision=1.0,
                                                     recall=1.0, f1=1.0)
        for m in report.per_type.values():
            assert m.f1 == 1.0

    def test_forced_half(self):
        # gold spans {(0,1,G),(3,3,L)}, predicted {(0,1,G),(2,2,L)}
        corpus = self._corpus([["G", "G", "O", "L"]])
        report = evaluate(corpus, [["G", "G", "L", "O"]])
        assert report.micro.precision == 0.5
        assert report.micro.recall == 0.5
        assert report.micro.f1 == 0.5

    def test_zero_denominators(self):
        corpus = self._corpus([["O", "O"]])
        report = evaluate(corpus, [["O", "O"]])
        assert report.micro == report.micro._replace(precision=0.0,
                                                     recall=0.0, f1=0.0)

    def test_length_mismatch_names_sentence(self):
        corpus = self._corpus([["G", "O"]])
        with pytest.raises(EvaluationError) as exc:
            evaluate(corpus, [["G"]])
        assert "'0'" in str(exc.value)

    def test_matches_independent_scorer_on_random_fixture(self):
        rng = random.Random(13)
        tags = ["O", "G", "L", "T"]
        rows = [[rng.choice(tags) for _ in range(rng.randint(1, 12))]
                for _ in range(50)]
        corpus = self._corpus(rows)
        predicted = [[rng.choice(tags) for _ in row] for row in rows]
        report = evaluate(corpus, predicted)
        prec, rec, f1 = _naive_span_scores(corpus, predicted)
        assert report.micro.precision == pytest.approx(prec, abs=1e-12)
        assert report.micro.recall == pytest.approx(rec, abs=1e-12)
        assert report.micro.f1 == pytest.approx(f1, abs=1e-12)
        assert 0.0 <= report.micro.f1 <= 1.0

    def test_report_formats(self):
        corpus = self._corpus([["G", "G", "O", "L"]])
        report = evaluate(corpus, [["G", "G", "L", "O"]])
        text = report.format()
        assert "ALL" in text and "G" in text
        records = report.records()
        assert "micro.f1=" in records
