import pytest
from hypothesis import given, strategies as st

from convsearch._porter import porter_stem
from convsearch.textpipe import (
    AnalyzerConfig,
    analyze,
    default_stopwords,
    parse_stopwords,
    tokenize,
)


class TestTokenize:
    def test_basic_sentence(self):
        tokens = tokenize("Tell me about tiger sharks.")
        assert [t.normalized for t in tokens] == ["tell", "me", "about", "tiger", "sharks"]

    def test_empty_input(self):
        assert tokenize("") == []

    def test_punctuation_only_tokens_dropped(self):
        tokens = tokenize("sharks, sharks!")
        assert [t.normalized for t in tokens] == ["sharks", "sharks"]
        assert tokenize("... !? --") == []

    def test_hyphen_separates(self):
        assert [t.normalized for t in tokenize("tiger-shark")] == ["tiger", "shark"]

    def test_offsets_cover_surface(self):
        text = "A big, bad wolf."
        for token in tokenize(text):
            assert text[token.start : token.end] == token.surface
            assert token.normalized == token.surface.lower()
            assert token.normalized and not any(c.isspace() for c in token.normalized)

    @given(st.text(max_size=80))
    def test_never_produces_empty_tokens(self, text):
        for token in tokenize(text):
            assert token.normalized

    @given(
        st.text(alphabet=st.characters(categories=("Ll", "Nd", "Po")), max_size=30),
        st.text(alphabet=st.characters(categories=("Ll", "Nd", "Po")), max_size=30),
    )
    def test_concatenation_with_whitespace(self, a, b):
        joined = tokenize(a + " " + b)
        assert [t.normalized for t in joined] == [
            t.normalized for t in tokenize(a)
        ] + [t.normalized for t in tokenize(b)]


class TestAnalyze:
    def test_all_stopwords(self):
        assert analyze("What is it about?", AnalyzerConfig.default()) == []

    def test_porter_applied(self):
        assert analyze("tiger sharks", AnalyzerConfig.default()) == ["tiger", "shark"]

    def test_identity_up_to_case(self):
        cfg = AnalyzerConfig(stopwords=frozenset(), stemmer="none")
        assert analyze("X", cfg) == ["x"]

    def test_stopwords_checked_before_stemming(self):
        # "doing" is a stopword as-is; with stemming first it would survive as "do"... or not:
        # the contract is surface-form matching, so it must be dropped.
        cfg = AnalyzerConfig(stopwords=frozenset({"doing"}), stemmer="porter")
        assert analyze("doing", cfg) == []

    def test_idempotent_without_stemming(self):
        cfg = AnalyzerConfig(stopwords=default_stopwords(), stemmer="none")
        text = "The tiger sharks were hunting near coral reefs"
        once = analyze(text, cfg)
        assert analyze(" ".join(once), cfg) == once

    @given(st.text(max_size=60), st.sampled_from(sorted(default_stopwords())[:50]))
    def test_removing_stopword_never_shrinks_output(self, text, word):
        full = default_stopwords()
        reduced = frozenset(full - {word})
        out_full = analyze(text, AnalyzerConfig(stopwords=full))
        out_reduced = analyze(text, AnalyzerConfig(stopwords=reduced))
        assert len(out_reduced) >= len(out_full)

    def test_non_lowercase_stopword_rejected(self):
        with pytest.raises(ValueError, match="not lowercase"):
            AnalyzerConfig(stopwords=frozenset({"The"}))

    def test_unknown_stemmer_rejected(self):
        with pytest.raises(ValueError, match="stemmer"):
            AnalyzerConfig(stemmer="krovetz")

    def test_fingerprint_sensitive_to_config(self):
        a = AnalyzerConfig.default()
        b = AnalyzerConfig(stopwords=a.stopwords, stemmer="none")
        c = AnalyzerConfig(stopwords=frozenset(a.stopwords - {"the"}))
        assert len({a.fingerprint(), b.fingerprint(), c.fingerprint()}) == 3
        assert a.fingerprint() == AnalyzerConfig.default().fingerprint()


class TestStopwordFile:
    def test_comments_and_blanks_ignored(self):
        words = parse_stopwords(["# comment", "", "the", "  a  ", "AN"])
        assert words == frozenset({"the", "a", "an"})

    def test_bundled_list_loads(self):
        words = default_stopwords()
        assert {"what", "is", "it", "about", "the", "me"} <= words
        assert len(words) > 350


class TestPorter:
    @pytest.mark.parametrize(
        "word,expected",
        [
            ("caresses", "caress"),
            ("ponies", "poni"),
            ("ties", "ti"),
            ("caress", "caress"),
            ("cats", "cat"),
            ("feed", "feed"),
            ("agreed", "agre"),
            ("plastered", "plaster"),
            ("motoring", "motor"),
            ("sing", "sing"),
            ("hopping", "hop"),
            ("tanned", "tan"),
            ("falling", "fall"),
            ("hissing", "hiss"),
            ("fizzed", "fizz"),
            ("failing", "fail"),
            ("filing", "file"),
            ("sized", "size"),
            ("happy", "happi"),
            ("sky", "sky"),
            ("relational", "relat"),
            ("conditional", "condit"),
            ("troubled", "troubl"),
            ("argument", "argument"),
            ("sharks", "shark"),
            ("habitats", "habitat"),
            ("themes", "theme"),
            ("stories", "stori"),
            ("story", "stori"),
            ("controlling", "control"),
            ("it", "it"),
        ],
    )
    def test_known_stems(self, word, expected):
        assert porter_stem(word) == expected

    @given(st.text(alphabet="abcdefghijklmnopqrstuvwxyz", min_size=1, max_size=20))
    def test_total_and_nonempty(self, word):
        stem = porter_stem(word)
        assert stem
        assert stem == stem.lower()
