"""Topic-aware utterance rewriting.

Building blocks:

* a deterministic heuristic annotator (closed pronoun list, lexicon + suffix
  part-of-speech tagging, noun chunks matching determiner? adjective* noun+,
  subject/object split at the first verb), overridable by externally supplied
  annotations;
* first-topic extraction from turn 1;
* cue-based topic-shift detection;
* topic propagation (explicit pronoun replacement, else implicit appending);
* named strategies combining these per conversation.

Strategies: plain, manual, first_query, context_query, coref, first_topic,
topic_shift, context.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

from .textpipe import AnalyzerConfig, Token, analyze, tokenize

log = logging.getLogger(__name__)

# Closed list: only these words count as pronouns for replacement/coref.
PRONOUNS = frozenset(
    "it its they them their this that these those he she him her".split()
)

STRATEGIES = (
    "plain",
    "manual",
    "first_query",
    "context_query",
    "coref",
    "first_topic",
    "topic_shift",
    "context",
)

_SUFFIX_ADJ = ("ous", "ful", "ive", "able", "ible", "ic")


class TopicExtractionError(ValueError):
    """The first turn yields no noun chunk to serve as the topic."""


class RewriteError(ValueError):
    pass


@dataclass(frozen=True)
class Turn:
    index: int
    raw: str
    manual: str | None = None

    def __post_init__(self):
        if not self.raw or not self.raw.strip():
            raise ValueError(f"turn {self.index}: empty raw utterance")


@dataclass(frozen=True)
class Conversation:
    conv_id: str
    turns: tuple[Turn, ...]

    def __post_init__(self):
        object.__setattr__(self, "turns", tuple(self.turns))
        for i, turn in enumerate(self.turns, 1):
            if turn.index != i:
                raise ValueError(
                    f"conversation {self.conv_id}: turn indices must be 1..n "
                    f"contiguous, found {turn.index} at position {i}"
                )

    def turn_id(self, turn: Turn) -> str:
        return f"{self.conv_id}_{turn.index}"


@dataclass(frozen=True)
class TaggedToken:
    surface: str
    tag: str
    start: int
    end: int


@dataclass(frozen=True)
class NounChunk:
    text: str
    start: int
    end: int
    role: str  # "subject" | "object"
    topic_text: str  # text with a leading determiner stripped


@dataclass(frozen=True)
class Annotation:
    tokens: tuple[TaggedToken, ...]
    noun_chunks: tuple[NounChunk, ...]
    pronouns: tuple[TaggedToken, ...]


@dataclass
class RewriteState:
    """Evolving topic context threaded through the turns of one conversation."""

    first_topic: str | None = None
    current_topic: str | None = None
    context_chunks: list[str] = field(default_factory=list)


# --- part-of-speech tagging and chunking ------------------------------------


@lru_cache(maxsize=1)
def _lexicon() -> dict:
    text = resources.files("convsearch.data").joinpath("pos_lexicon.txt").read_text("utf-8")
    table = {}
    for line in text.splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        word, tag = line.split("\t")
        table[word] = tag
    return table


def _tag_token(token: Token, position: int) -> str:
    lex = _lexicon()
    tag = lex.get(token.normalized)
    if tag is not None:
        return tag
    surface = token.surface
    if position > 0 and surface[:1].isupper():
        return "NOUN"
    if surface.isdigit():
        return "NUM"
    w = token.normalized
    if w.endswith("ly"):
        return "ADV"
    if len(w) >= 5 and (w.endswith("ing") or w.endswith("ed")):
        return "VERB"
    if len(w) >= 5 and w.endswith(_SUFFIX_ADJ):
        return "ADJ"
    return "NOUN"


def annotate(utterance: str) -> Annotation:
    """Deterministic heuristic annotation of one utterance."""
    if not utterance or not utterance.strip():
        raise ValueError("cannot annotate an empty utterance")
    tokens = tokenize(utterance)
    tagged = tuple(
        TaggedToken(t.surface, _tag_token(t, i), t.start, t.end)
        for i, t in enumerate(tokens)
    )
    first_verb = next((i for i, t in enumerate(tagged) if t.tag == "VERB"), None)

    chunks = []
    i = 0
    n = len(tagged)
    while i < n:
        j = i
        if j < n and tagged[j].tag == "DET":
            j += 1
        while j < n and tagged[j].tag == "ADJ":
            j += 1
        noun_start = j
        while j < n and tagged[j].tag == "NOUN":
            j += 1
        if j > noun_start:
            role = "object" if first_verb is not None and i > first_verb else "subject"
            head = i + 1 if tagged[i].tag == "DET" else i
            chunks.append(
                NounChunk(
                    text=utterance[tagged[i].start : tagged[j - 1].end],
                    start=tagged[i].start,
                    end=tagged[j - 1].end,
                    role=role,
                    topic_text=utterance[tagged[head].start : tagged[j - 1].end],
                )
            )
            i = j
        else:
            i += 1

    pronouns = tuple(t for t in tagged if t.surface.lower() in PRONOUNS)
    return Annotation(tokens=tagged, noun_chunks=tuple(chunks), pronouns=pronouns)


# --- core rewriting operations ----------------------------------------------


def first_topic(conversation: Conversation, annotations: dict | None = None) -> str:
    """Topic of the conversation: first subject-or-object noun chunk of turn 1,
    with a leading determiner stripped."""
    turn = conversation.turns[0]
    ann = _annotation_for(conversation, turn, annotations)
    if not ann.noun_chunks:
        raise TopicExtractionError(
            f"conversation {conversation.conv_id}: no noun chunk in first turn"
        )
    return ann.noun_chunks[0].topic_text


@lru_cache(maxsize=1)
def default_cues() -> tuple:
    text = resources.files("convsearch.data").joinpath("cues.txt").read_text("utf-8")
    return tuple(
        line.strip().lower()
        for line in text.splitlines()
        if line.strip() and not line.startswith("#")
    )


def load_cues(path) -> tuple:
    with open(path, encoding="utf-8") as fh:
        cues = tuple(
            line.strip().lower()
            for line in fh
            if line.strip() and not line.startswith("#")
        )
    if not cues:
        raise ValueError(f"cue lexicon {path} is empty")
    return cues


def detect_topic_shift(utterance: str, annotation: Annotation, cues=None) -> str | None:
    """New topic if a cue phrase occurs and a noun chunk follows it, else None."""
    cue_list = default_cues() if cues is None else cues
    lowered = utterance.lower()
    for cue in sorted(cue_list, key=len, reverse=True):
        pos = lowered.find(cue)
        if pos < 0:
            continue
        cue_end = pos + len(cue)
        for chunk in annotation.noun_chunks:
            if chunk.start >= cue_end:
                return chunk.topic_text
    return None


def propagate(
    utterance: str,
    annotation: Annotation,
    state: RewriteState,
    analyzer: AnalyzerConfig,
) -> str:
    """Topic propagation: replace the first explicit pronoun with the current
    topic; otherwise append the topic when none of its normalized tokens
    occurs in the utterance; otherwise leave the utterance unchanged."""
    topic = state.current_topic
    if topic is None:
        raise ValueError("propagate requires a current topic")
    if annotation.pronouns:
        first = annotation.pronouns[0]
        return utterance[: first.start] + topic + utterance[first.end :]
    topic_terms = set(analyze(topic, analyzer))
    if topic_terms and topic_terms.isdisjoint(analyze(utterance, analyzer)):
        return f"{utterance} {topic}"
    return utterance


# --- strategies ---------------------------------------------------------------


def rewrite_conversation(
    conversation: Conversation,
    strategy: str,
    cues=None,
    annotations: dict | None = None,
    analyzer: AnalyzerConfig | None = None,
) -> list[tuple[str, str]]:
    """Rewrite every turn under one strategy, returning (turn_id, text) pairs.

    The rewrite of turn i depends only on turns 1..i.
    """
    if strategy not in STRATEGIES:
        raise RewriteError(
            f"unknown strategy {strategy!r}; expected one of {', '.join(STRATEGIES)}"
        )
    analyzer = analyzer or _default_analyzer()
    cue_list = default_cues() if cues is None else cues
    handler = _STRATEGY_HANDLERS[strategy]
    return handler(conversation, cue_list, annotations, analyzer)


def _annotation_for(conversation, turn, annotations) -> Annotation:
    if annotations:
        ann = annotations.get(conversation.turn_id(turn))
        if ann is not None:
            return ann
    return annotate(turn.raw)


@lru_cache(maxsize=1)
def _default_analyzer() -> AnalyzerConfig:
    return AnalyzerConfig.default()


def _rewrite_plain(conversation, cues, annotations, analyzer):
    return [(conversation.turn_id(t), t.raw) for t in conversation.turns]


def _rewrite_manual(conversation, cues, annotations, analyzer):
    out = []
    for turn in conversation.turns:
        if turn.manual is None:
            raise RewriteError(
                f"turn {conversation.turn_id(turn)} has no manual rewrite"
            )
        out.append((conversation.turn_id(turn), turn.manual))
    return out


def _rewrite_first_query(conversation, cues, annotations, analyzer):
    first = conversation.turns[0].raw
    out = []
    for turn in conversation.turns:
        text = turn.raw if turn.index == 1 else f"{first} {turn.raw}"
        out.append((conversation.turn_id(turn), text))
    return out


def _rewrite_context_query(conversation, cues, annotations, analyzer):
    turns = conversation.turns
    first = turns[0].raw
    out = []
    for turn in turns:
        if turn.index == 1:
            text = turn.raw
        elif turn.index == 2:
            text = f"{first} {turn.raw}"
        else:
            text = f"{first} {turns[turn.index - 2].raw} {turn.raw}"
        out.append((conversation.turn_id(turn), text))
    return out


def _rewrite_coref(conversation, cues, annotations, analyzer):
    """Heuristic coreference: each closed-list pronoun is replaced by the
    nearest preceding non-pronoun chunk, looking back across turns."""
    out = []
    seen_chunks: list[str] = []
    for turn in conversation.turns:
        ann = _annotation_for(conversation, turn, annotations)
        text = turn.raw
        for pron in reversed(ann.pronouns):
            preceding = [c.text for c in ann.noun_chunks if c.end <= pron.start]
            candidates = seen_chunks + preceding
            if candidates:
                text = text[: pron.start] + candidates[-1] + text[pron.end :]
        seen_chunks.extend(c.text for c in ann.noun_chunks)
        out.append((conversation.turn_id(turn), text))
    return out


def _topic_strategy(conversation, cues, annotations, analyzer, shifts: bool, context: bool):
    try:
        topic = first_topic(conversation, annotations)
    except TopicExtractionError as exc:
        log.warning("%s; falling back to plain", exc)
        return _rewrite_plain(conversation, cues, annotations, analyzer)

    state = RewriteState(first_topic=topic, current_topic=topic)
    seen: set[str] = set()
    out = []
    for turn in conversation.turns:
        ann = _annotation_for(conversation, turn, annotations)
        if shifts:
            shifted = detect_topic_shift(turn.raw, ann, cues)
            if shifted is not None:
                state.current_topic = shifted
        if context:
            if state.context_chunks:
                text = f"{turn.raw} {' '.join(state.context_chunks)}"
            else:
                text = turn.raw
            for chunk_text in [c.topic_text for c in ann.noun_chunks] + [state.current_topic]:
                if chunk_text not in seen:
                    seen.add(chunk_text)
                    state.context_chunks.append(chunk_text)
        else:
            text = propagate(turn.raw, ann, state, analyzer)
        out.append((conversation.turn_id(turn), text))
    return out


def _rewrite_first_topic(conversation, cues, annotations, analyzer):
    return _topic_strategy(conversation, cues, annotations, analyzer, shifts=False, context=False)


def _rewrite_topic_shift(conversation, cues, annotations, analyzer):
    return _topic_strategy(conversation, cues, annotations, analyzer, shifts=True, context=False)


def _rewrite_context(conversation, cues, annotations, analyzer):
    return _topic_strategy(conversation, cues, annotations, analyzer, shifts=True, context=True)


_STRATEGY_HANDLERS = {
    "plain": _rewrite_plain,
    "manual": _rewrite_manual,
    "first_query": _rewrite_first_query,
    "context_query": _rewrite_context_query,
    "coref": _rewrite_coref,
    "first_topic": _rewrite_first_topic,
    "topic_shift": _rewrite_topic_shift,
    "context": _rewrite_context,
}


# --- file formats -------------------------------------------------------------


def load_conversations(path, manual_path=None) -> list[Conversation]:
    """TREC CAsT 2019 style JSON: a list of objects with `number` and
    `turn: [{number, raw_utterance}]`.  Manual rewrites come from a separate
    TSV keyed by turn_id."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    manual = load_manual_rewrites(manual_path) if manual_path else {}
    conversations = []
    for obj in data:
        conv_id = str(obj["number"])
        turns = []
        for t in obj["turn"]:
            index = int(t["number"])
            turns.append(
                Turn(
                    index=index,
                    raw=str(t["raw_utterance"]),
                    manual=manual.get(f"{conv_id}_{index}"),
                )
            )
        conversations.append(Conversation(conv_id=conv_id, turns=tuple(turns)))
    return conversations


def load_manual_rewrites(path) -> dict:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t", 1)
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected turn_id<TAB>text")
            out[parts[0]] = parts[1]
    return out


def load_annotations(path, conversations) -> dict:
    """External annotations (JSONL keyed by turn_id) that override the
    heuristic annotator.  Spans index into the raw utterance."""
    texts = {}
    for conv in conversations:
        for turn in conv.turns:
            texts[conv.turn_id(turn)] = turn.raw
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                turn_id = obj["turn_id"]
                raw = texts[turn_id]
                tokens = tuple(
                    TaggedToken(t["surface"], t["tag"], int(t["start"]), int(t["end"]))
                    for t in obj["tokens"]
                )
                chunks = []
                for c in obj["noun_chunks"]:
                    start, end, role = int(c["start"]), int(c["end"]), c["role"]
                    in_span = [t for t in tokens if t.start >= start and t.end <= end]
                    head = in_span[1] if in_span and in_span[0].tag == "DET" and len(in_span) > 1 else None
                    topic_start = head.start if head else start
                    chunks.append(
                        NounChunk(
                            text=raw[start:end],
                            start=start,
                            end=end,
                            role=role,
                            topic_text=raw[topic_start:end],
                        )
                    )
                pronouns = tuple(
                    TaggedToken(raw[int(p["start"]) : int(p["end"])], "PRON", int(p["start"]), int(p["end"]))
                    for p in obj.get("pronouns", [])
                )
            except (KeyError, ValueError, TypeError) as exc:
                raise ValueError(f"{path}:{lineno}: bad annotation record: {exc}") from exc
            out[turn_id] = Annotation(tokens=tokens, noun_chunks=tuple(chunks), pronouns=pronouns)
    return out


def write_rewrites(pairs, fh) -> None:
    for turn_id, text in pairs:
        fh.write(f"{turn_id}\t{text}\n")


def read_rewrites(path) -> list[tuple[str, str]]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t", 1)
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected turn_id<TAB>text")
            out.append((parts[0], parts[1]))
    return out
