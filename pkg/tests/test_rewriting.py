import json
import random

import pytest

from convsearch.rewriting import (
    PRONOUNS,
    STRATEGIES,
    Annotation,
    Conversation,
    RewriteError,
    RewriteState,
    TopicExtractionError,
    Turn,
    annotate,
    default_cues,
    detect_topic_shift,
    first_topic,
    load_annotations,
    load_conversations,
    load_cues,
    propagate,
    read_rewrites,
    rewrite_conversation,
    write_rewrites,
)
from convsearch.textpipe import AnalyzerConfig, analyze


def conv(conv_id, *utterances, manual=None):
    manual = manual or {}
    return Conversation(
        conv_id,
        tuple(
            Turn(i, raw, manual.get(i)) for i, raw in enumerate(utterances, 1)
        ),
    )


NEVERENDING = conv(
    "1",
    "Tell me about the Neverending Story film.",
    "What is it about?",
    "What are the main themes?",
)

CANCER = conv(
    "2",
    "Tell me about lung cancer.",
    "What are treatment options?",
    "Tell me about throat cancer.",
    "What are the symptoms?",
)


class TestDomainTypes:
    def test_turn_indices_must_be_contiguous(self):
        with pytest.raises(ValueError, match="contiguous"):
            Conversation("c", (Turn(1, "a b"), Turn(3, "c d")))

    def test_empty_raw_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            Turn(1, "   ")

    def test_turn_id(self):
        assert NEVERENDING.turn_id(NEVERENDING.turns[1]) == "1_2"


class TestAnnotate:
    def test_object_chunk_with_determiner(self):
        ann = annotate("Tell me about the Neverending Story film.")
        assert len(ann.noun_chunks) == 1
        chunk = ann.noun_chunks[0]
        assert chunk.text == "the Neverending Story film"
        assert chunk.topic_text == "Neverending Story film"
        assert chunk.role == "object"
        assert ann.pronouns == ()  # "me" is not in the closed pronoun list

    def test_pronoun_only_utterance(self):
        ann = annotate("What is it about?")
        assert ann.noun_chunks == ()
        assert [p.surface for p in ann.pronouns] == ["it"]

    def test_whole_utterance_chunk_is_subject(self):
        ann = annotate("lung cancer")
        assert len(ann.noun_chunks) == 1
        assert ann.noun_chunks[0].role == "subject"
        assert ann.noun_chunks[0].topic_text == "lung cancer"

    def test_empty_utterance_rejected(self):
        with pytest.raises(ValueError):
            annotate("   ")

    def test_spans_inside_utterance(self):
        text = "Do these sharks hunt the small reef fish at night?"
        ann = annotate(text)
        for chunk in ann.noun_chunks:
            assert text[chunk.start : chunk.end] == chunk.text
        for pron in ann.pronouns:
            assert text[pron.start : pron.end] == pron.surface
            assert pron.surface.lower() in PRONOUNS

    def test_chunks_do_not_overlap(self):
        ann = annotate("the big cats chase the small dogs around the old barn")
        spans = sorted((c.start, c.end) for c in ann.noun_chunks)
        for (s1, e1), (s2, e2) in zip(spans, spans[1:]):
            assert e1 <= s2

    def test_no_chunk_is_a_lone_pronoun(self):
        ann = annotate("They chase them around the old barn.")
        for chunk in ann.noun_chunks:
            assert chunk.text.lower() not in PRONOUNS


class TestFirstTopic:
    def test_neverending(self):
        assert first_topic(NEVERENDING) == "Neverending Story film"

    def test_whole_utterance_topic(self):
        assert first_topic(conv("c", "lung cancer", "more")) == "lung cancer"

    def test_failure_when_no_chunk(self):
        with pytest.raises(TopicExtractionError):
            first_topic(conv("c", "What is it about?", "more stuff"))


class TestDetectTopicShift:
    def test_cue_with_following_chunk(self):
        text = "Tell me about throat cancer."
        assert detect_topic_shift(text, annotate(text)) == "throat cancer"

    def test_no_cue(self):
        text = "What are the main themes?"
        assert detect_topic_shift(text, annotate(text)) is None

    def test_what_about_cue(self):
        text = "What about throat cancer?"
        assert detect_topic_shift(text, annotate(text)) == "throat cancer"

    def test_cue_without_chunk(self):
        text = "Tell me about it."
        assert detect_topic_shift(text, annotate(text)) is None

    def test_custom_cues(self):
        text = "Switch over to maple syrup now."
        assert detect_topic_shift(text, annotate(text), cues=("switch over to",)) == "maple syrup"


class TestPropagate:
    analyzer = AnalyzerConfig.default()

    def state(self, topic):
        return RewriteState(first_topic=topic, current_topic=topic)

    def test_explicit_pronoun_replaced(self):
        out = propagate(
            "What is it about?",
            annotate("What is it about?"),
            self.state("Neverending Story film"),
            self.analyzer,
        )
        assert out == "What is Neverending Story film about?"

    def test_implicit_topic_appended(self):
        out = propagate(
            "What are the main themes?",
            annotate("What are the main themes?"),
            self.state("Neverending Story film"),
            self.analyzer,
        )
        assert out == "What are the main themes? Neverending Story film"

    def test_topic_already_explicit(self):
        text = "Tell me about the Neverending Story film."
        out = propagate(text, annotate(text), self.state("Neverending Story film"), self.analyzer)
        assert out == text

    def test_stemmed_overlap_counts_as_explicit(self):
        text = "Are tigers sharks dangerous?"
        out = propagate(text, annotate(text), self.state("tiger shark"), self.analyzer)
        assert out == text

    def test_requires_topic(self):
        with pytest.raises(ValueError):
            propagate("a b", annotate("a b"), RewriteState(), self.analyzer)


class TestStrategies:
    def test_unknown_strategy(self):
        with pytest.raises(RewriteError, match="unknown strategy"):
            rewrite_conversation(NEVERENDING, "neural")

    def test_plain_is_identity(self):
        out = rewrite_conversation(NEVERENDING, "plain")
        assert out == [
            ("1_1", "Tell me about the Neverending Story film."),
            ("1_2", "What is it about?"),
            ("1_3", "What are the main themes?"),
        ]

    def test_manual_requires_texts(self):
        with pytest.raises(RewriteError, match="manual"):
            rewrite_conversation(NEVERENDING, "manual")
        manual = conv("c", "a b", "c d", manual={1: "A", 2: "B"})
        assert [t for _, t in rewrite_conversation(manual, "manual")] == ["A", "B"]

    def test_first_query_concatenation(self):
        out = rewrite_conversation(conv("c", "A bird", "B cat"), "first_query")
        assert [t for _, t in out] == ["A bird", "A bird B cat"]

    def test_context_query_concatenation(self):
        out = rewrite_conversation(conv("c", "Q one", "Q two", "Q three", "Q four"), "context_query")
        assert [t for _, t in out] == [
            "Q one",
            "Q one Q two",
            "Q one Q two Q three",
            "Q one Q three Q four",
        ]

    def test_topic_shift_golden(self):
        assert rewrite_conversation(NEVERENDING, "topic_shift") == [
            ("1_1", "Tell me about the Neverending Story film."),
            ("1_2", "What is Neverending Story film about?"),
            ("1_3", "What are the main themes? Neverending Story film"),
        ]

    def test_topic_shift_switches_topic(self):
        out = dict(rewrite_conversation(CANCER, "topic_shift"))
        assert out["2_2"] == "What are treatment options? lung cancer"
        assert out["2_4"] == "What are the symptoms? throat cancer"
        assert "lung" not in out["2_4"]

    def test_topic_shift_equals_first_topic_without_cues(self):
        cue_free = conv(
            "c",
            "the coral reefs",
            "Where do they grow?",
            "What are common threats?",
        )
        assert rewrite_conversation(cue_free, "topic_shift") == rewrite_conversation(
            cue_free, "first_topic"
        )

    def test_first_topic_ignores_shift(self):
        out = dict(rewrite_conversation(CANCER, "first_topic"))
        assert out["2_4"] == "What are the symptoms? lung cancer"

    def test_topic_extraction_failure_falls_back_to_plain(self, caplog):
        no_topic = conv("c", "What is it about?", "What are the main themes?")
        with caplog.at_level("WARNING"):
            out = rewrite_conversation(no_topic, "topic_shift")
        assert [t for _, t in out] == ["What is it about?", "What are the main themes?"]
        assert any("falling back to plain" in r.message for r in caplog.records)

    def test_context_accumulates_chunks_and_topics(self):
        out = dict(rewrite_conversation(CANCER, "context"))
        assert out["2_1"] == "Tell me about lung cancer."
        assert out["2_2"] == "What are treatment options? lung cancer"
        assert out["2_3"] == "Tell me about throat cancer. lung cancer treatment options"
        assert out["2_4"] == "What are the symptoms? lung cancer treatment options throat cancer"

    def test_coref_uses_nearest_preceding_chunk(self):
        out = dict(rewrite_conversation(NEVERENDING, "coref"))
        assert out["1_2"] == "What is the Neverending Story film about?"
        assert out["1_3"] == "What are the main themes?"

    def test_coref_without_antecedent_keeps_pronoun(self):
        out = rewrite_conversation(conv("c", "What is it about?"), "coref")
        assert out == [("c_1", "What is it about?")]

    def test_first_topic_rewrites_contain_topic_tokens(self):
        analyzer = AnalyzerConfig.default()
        topic_terms = set(analyze(first_topic(NEVERENDING), analyzer))
        for _, text in rewrite_conversation(NEVERENDING, "first_topic"):
            assert topic_terms & set(analyze(text, analyzer))

    def test_content_words_never_deleted(self):
        analyzer = AnalyzerConfig.default()
        for strategy in STRATEGIES:
            if strategy == "manual":
                continue
            for conversation in (NEVERENDING, CANCER):
                rewritten = rewrite_conversation(conversation, strategy)
                for turn, (_, text) in zip(conversation.turns, rewritten):
                    raw_terms = [
                        term
                        for term in analyze(turn.raw, analyzer)
                        if term not in {analyze(p, analyzer)[0] for p in PRONOUNS if analyze(p, analyzer)}
                    ]
                    rewritten_terms = analyze(text, analyzer)
                    for term in set(raw_terms):
                        assert rewritten_terms.count(term) >= raw_terms.count(term)


class TestCausality:
    def _random_conversation(self, rng, conv_id):
        topics = ["tiger sharks", "maple syrup", "coral reefs", "jazz music"]
        facets = ["habitats", "flavor", "threats", "instruments", "history"]
        topic = rng.choice(topics)
        turns = [f"Tell me about {topic}."]
        for _ in range(rng.randint(2, 6)):
            kind = rng.randrange(4)
            if kind == 0:
                turns.append(f"What are the main {rng.choice(facets)}?")
            elif kind == 1:
                turns.append(f"What is their {rng.choice(facets)}?")
            elif kind == 2:
                turns.append(f"Are there other {rng.choice(facets)}?")
            else:
                turns.append(f"Tell me about {rng.choice(topics)}.")
        return conv(conv_id, *turns)

    def test_prefix_equivalence_on_random_conversations(self):
        rng = random.Random(23)
        strategies = [s for s in STRATEGIES if s != "manual"]
        for i in range(100):
            conversation = self._random_conversation(rng, f"c{i}")
            cut = rng.randint(1, len(conversation.turns))
            prefix = Conversation(conversation.conv_id, conversation.turns[:cut])
            for strategy in strategies:
                full = rewrite_conversation(conversation, strategy)
                short = rewrite_conversation(prefix, strategy)
                assert short == full[:cut], (strategy, conversation)


class TestFileFormats:
    def test_conversations_json_round_trip(self, tmp_path):
        path = tmp_path / "c.json"
        payload = [
            {
                "number": 31,
                "turn": [
                    {"number": 1, "raw_utterance": "Tell me about maple syrup."},
                    {"number": 2, "raw_utterance": "How is it made?"},
                ],
            }
        ]
        path.write_text(json.dumps(payload), "utf-8")
        manual = tmp_path / "m.tsv"
        manual.write_text("31_2\tHow is maple syrup made?\n", "utf-8")
        convs = load_conversations(path, manual)
        assert len(convs) == 1
        assert convs[0].conv_id == "31"
        assert convs[0].turns[1].manual == "How is maple syrup made?"
        assert convs[0].turns[0].manual is None

    def test_rewrites_tsv_round_trip(self, tmp_path):
        path = tmp_path / "r.tsv"
        pairs = [("31_1", "Tell me about maple syrup."), ("31_2", "How is maple syrup made?")]
        with open(path, "w", encoding="utf-8") as fh:
            write_rewrites(pairs, fh)
        assert read_rewrites(path) == pairs

    def test_cue_file(self, tmp_path):
        path = tmp_path / "cues.txt"
        path.write_text("# comment\nswitch to\n", "utf-8")
        assert load_cues(path) == ("switch to",)
        assert "tell me about" in default_cues()

    def test_external_annotations_override(self, tmp_path):
        convs = [conv("9", "zzz qqq vvv")]
        ann_path = tmp_path / "ann.jsonl"
        record = {
            "turn_id": "9_1",
            "tokens": [
                {"surface": "zzz", "tag": "VERB", "start": 0, "end": 3},
                {"surface": "qqq", "tag": "NOUN", "start": 4, "end": 7},
                {"surface": "vvv", "tag": "NOUN", "start": 8, "end": 11},
            ],
            "noun_chunks": [{"start": 4, "end": 11, "role": "object"}],
            "pronouns": [],
        }
        ann_path.write_text(json.dumps(record) + "\n", "utf-8")
        annotations = load_annotations(ann_path, convs)
        assert annotations["9_1"].noun_chunks[0].text == "qqq vvv"
        assert first_topic(convs[0], annotations) == "qqq vvv"

    def test_bad_annotation_reports_line(self, tmp_path):
        convs = [conv("9", "zzz qqq")]
        ann_path = tmp_path / "ann.jsonl"
        ann_path.write_text('{"turn_id": "9_1"}\n', "utf-8")
        with pytest.raises(ValueError, match=":1:"):
            load_annotations(ann_path, convs)
