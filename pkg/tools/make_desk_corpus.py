#!/usr/bin/env python3
"""Generate the bundled desk-scale evaluation fixture.

Emits, under tests/fixtures/desk/:
  corpus.tsv            2000 passages, id<TAB>text
  conversations.json    10 conversations (CAsT-style JSON), four with
                        mid-conversation topic shifts, plus implicit and
                        pronoun-only turns
  qrels.txt             graded judgments per turn (2 / 1 / 1 per turn)
  manual.tsv            manually resolved rewrites per turn

Deterministic: fixed seed, fixed iteration order.  Construction rules:

* relevant passages pair topic words (tf 2) with the turn's facet word (tf 1);
* per-facet distractors carry the facet at tf 2 in a shorter passage, so
  facet-only (plain) queries rank them first while topic+facet queries do not;
* overview passages carry topic words at tf 3 and answer opening/vague turns;
* a few context-linked passages contain only an earlier turn's facet word, so
  only context-style queries that drag along previous chunks can reach them;
* everything else is background noise sharing no vocabulary with any query.
"""

from __future__ import annotations

import json
import random
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from convsearch.textpipe import AnalyzerConfig, analyze

OUT_DIR = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "desk"

SEED = 42
N_PASSAGES = 2000

# conversation scripts: list of (kind, payload)
#   topic   -> opening turn (cue phrase), sets the topic
#   shift   -> mid-conversation topic change via cue phrase
#   facet   -> implicit facet turn (no topic tokens, no pronouns)
#   pronoun -> facet turn referring to the topic through a pronoun
#   vague   -> pronoun-only turn; judged against the topic overview passages
CONVERSATIONS = {
    "101": [
        ("topic", "tiger sharks"),
        ("pronoun", ("What is their {facet}?", "diet")),
        ("facet", ("What are the main {facet}?", "habitats")),
        ("shift", "hammerhead sharks"),
        ("facet", ("What are common {facet}?", "predators")),
        ("facet", ("Describe the {facet}.", "migration")),
    ],
    "102": [
        ("topic", "lung cancer"),
        ("facet", ("What are the main {facet}?", "symptoms")),
        ("pronoun", ("What are its {facet}?", "causes")),
        ("shift", "throat cancer"),
        ("facet", ("What are common {facet}?", "treatments")),
        ("facet", ("Describe the {facet}.", "prevention")),
    ],
    "103": [
        ("topic", "the Neverending Story"),
        ("vague", "What is it about?"),
        ("facet", ("What are the main {facet}?", "characters")),
        ("facet", ("Describe the {facet}.", "soundtrack")),
        ("facet", ("What are common {facet}?", "themes")),
    ],
    "104": [
        ("topic", "solar panels"),
        ("pronoun", ("What is their {facet}?", "efficiency")),
        ("facet", ("Describe the {facet}.", "installation")),
        ("shift", "wind turbines"),
        ("facet", ("What are typical {facet}?", "blades")),
        ("facet", ("Describe the {facet}.", "maintenance")),
    ],
    "105": [
        ("topic", "maple syrup"),
        ("facet", ("Describe the {facet}.", "harvest")),
        ("pronoun", ("What is its {facet}?", "flavor")),
        ("facet", ("What are common {facet}?", "recipes")),
        ("facet", ("Describe the {facet}.", "production")),
    ],
    "106": [
        ("topic", "coral reefs"),
        ("facet", ("What are the main {facet}?", "threats")),
        ("pronoun", ("Where do they {facet}?", "grow")),
        ("facet", ("Describe the {facet}.", "tourism")),
        ("facet", ("What are common {facet}?", "species")),
    ],
    "107": [
        ("topic", "electric cars"),
        ("pronoun", ("What is their {facet}?", "range")),
        ("facet", ("Describe the {facet}.", "batteries")),
        ("shift", "hydrogen engines"),
        ("facet", ("Describe the {facet}.", "combustion")),
        ("facet", ("What are typical {facet}?", "costs")),
    ],
    "108": [
        ("topic", "jazz music"),
        ("facet", ("Who are famous {facet}?", "musicians")),
        ("pronoun", ("What are its {facet}?", "origins")),
        ("facet", ("Describe the {facet}.", "festivals")),
        ("facet", ("What are common {facet}?", "instruments")),
    ],
    "109": [
        ("topic", "the Roman Empire"),
        ("facet", ("Who were famous {facet}?", "emperors")),
        ("facet", ("Describe the {facet}.", "armies")),
        ("pronoun", ("Describe its {facet}.", "collapse")),
        ("facet", ("What are typical {facet}?", "roads")),
    ],
    "110": [
        ("topic", "quantum computers"),
        ("pronoun", ("What are their {facet}?", "qubits")),
        ("facet", ("Describe the {facet}.", "algorithms")),
        ("facet", ("What are common {facet}?", "errors")),
        ("facet", ("Describe the {facet}.", "hardware")),
    ],
}

# (conv_id, turn_index) -> facet of an EARLIER turn; a grade-1 passage holding
# only that earlier facet plus neutral words is judged for this turn, so only
# queries enriched with earlier-turn vocabulary can retrieve it.
CONTEXT_LINKED = {
    ("105", 4): "flavor",
    ("108", 5): "origins",
    ("110", 4): "qubits",
}

FILLER = """
waters coast region reports survey details records summary review guides
archive journals fields samples figures charts chapters sections notes
visitors seasons winter summer autumn spring rivers valleys hills plains
photos essays lectures museums libraries schools towns villages harbors
markets bridges towers streets alleys courtyards
""".split()

DECOYS = """
knitting pottery cycling carpentry sailing camping painting chess puzzles
baking juggling origami calligraphy astronomy skiing surfing quilting
embroidery kayaking archery bowling billiards darts scrapbooks stamps
coins minerals fossils kites marbles dominoes checkers lanterns candles
soaps perfumes ribbons buttons fabrics threads needles hammers ladders
buckets ropes tents lamps stoves kettles spoons bowls
""".split()

BACKGROUND_EXTRA = """
meadows orchards vineyards pastures barns silos fences gates troughs
wagons carts sleds canoes rafts ferries docks piers buoys anchors sails
compasses maps globes atlases diaries ledgers scrolls quills parchment
envelopes parcels crates barrels casks jugs flasks vials jars shelves
cabinets drawers chests trunks racks hooks pegs nails bolts screws
wrenches pliers chisels rasps saws drills grinders sanders clocks
watches bells chimes gongs whistles horns drums banners pennants
""".split()

BACKGROUND = FILLER + DECOYS + BACKGROUND_EXTRA

# neutral template words used when assembling passage texts
TEMPLATE_WORDS = """
guidebook entry pages lore study checklist weekend ideas fans remarks
gathered beside stalls basics collected articles
""".split()


def strip_det(topic: str) -> str:
    return topic.removeprefix("the ")


def current_topics(script):
    """Current topic per turn, after any shift occurring at that turn."""
    topic = None
    out = []
    for kind, payload in script:
        if kind in ("topic", "shift"):
            topic = strip_det(payload)
        out.append(topic)
    return out


def raw_utterance(kind, payload) -> str:
    if kind in ("topic", "shift"):
        return f"Tell me about {payload}."
    if kind == "vague":
        return payload
    template, facet = payload
    return template.format(facet=facet)


def manual_utterance(kind, payload, topic) -> str:
    raw = raw_utterance(kind, payload)
    if kind in ("topic", "shift"):
        return raw
    if kind == "vague":
        return f"What is {topic} about?"
    if kind == "pronoun":
        for pronoun in ("their", "its", "they", "it"):
            target = f" {pronoun} "
            if target in raw:
                return raw.replace(target, f" {topic} ", 1)
    return f"{raw} {topic}"


def main() -> int:
    rng = random.Random(SEED)
    analyzer = AnalyzerConfig.default()

    passages: list[tuple[str, str]] = []
    qrels: list[tuple[str, str, int]] = []

    def add_passage(text: str) -> str:
        doc_id = f"P{len(passages) + 1:04d}"
        passages.append((doc_id, text))
        return doc_id

    def filler(n):
        return " ".join(rng.choice(FILLER) for _ in range(n))

    def decoys(n):
        return " ".join(rng.choice(DECOYS) for _ in range(n))

    topics: list[str] = []
    for script in CONVERSATIONS.values():
        for kind, payload in script:
            if kind in ("topic", "shift"):
                topics.append(strip_det(payload))

    # overview passages: topic tf 3, first one graded 2 by convention below
    overview_ids = {}
    for topic in topics:
        overview_ids[topic] = [
            add_passage(
                f"{topic} guidebook entry . the {topic} pages cover {topic} "
                f"lore and {filler(3 + v)} ."
            )
            for v in range(3)
        ]

    # relevant passages: one triple per (topic, facet) turn
    relevant_ids = {}
    for conv_id, script in CONVERSATIONS.items():
        topic_per_turn = current_topics(script)
        for (kind, payload), topic in zip(script, topic_per_turn):
            if kind not in ("facet", "pronoun"):
                continue
            facet = payload[1]
            relevant_ids[(topic, facet)] = [
                add_passage(
                    f"a study of the {facet} of {topic} , collected notes on "
                    f"how {topic} relate to {filler(6 + v)} ."
                )
                for v in range(3)
            ]

    # distractors: facet tf 2, short, no topic words
    facets = sorted({facet for (_, facet) in relevant_ids})
    for facet in facets:
        for v in range(3):
            add_passage(
                f"{facet} checklist : weekend {facet} ideas for {decoys(2 + v)} fans ."
            )

    # context-linked passages: earlier facet only, plus neutral words
    linked_ids = {}
    for (conv_id, turn_index), earlier_facet in sorted(CONTEXT_LINKED.items()):
        linked_ids[(conv_id, turn_index)] = add_passage(
            f"{earlier_facet} remarks gathered beside {decoys(4)} stalls ."
        )

    # background noise up to the corpus size
    while len(passages) < N_PASSAGES:
        n = rng.randint(10, 18)
        add_passage(" ".join(rng.choice(BACKGROUND) for _ in range(n)) + " .")

    # conversations, manual rewrites, qrels
    conversations_json = []
    manual_lines = []
    for conv_id, script in CONVERSATIONS.items():
        topic_per_turn = current_topics(script)
        turns = []
        for turn_index, ((kind, payload), topic) in enumerate(
            zip(script, topic_per_turn), 1
        ):
            raw = raw_utterance(kind, payload)
            turns.append({"number": turn_index, "raw_utterance": raw})
            turn_id = f"{conv_id}_{turn_index}"
            manual_lines.append(f"{turn_id}\t{manual_utterance(kind, payload, topic)}")
            if kind in ("topic", "shift", "vague"):
                doc_ids = overview_ids[topic]
            else:
                doc_ids = relevant_ids[(topic, payload[1])]
            for doc_id, grade in zip(doc_ids, (2, 1, 1)):
                qrels.append((turn_id, doc_id, grade))
            if (conv_id, turn_index) in linked_ids:
                qrels.append((turn_id, linked_ids[(conv_id, turn_index)], 1))
        conversations_json.append({"number": int(conv_id), "turn": turns})

    # no query vocabulary may leak into neutral passage text
    corpus_vocab = {t for _, text in passages for t in analyze(text, analyzer)}
    allowed = set()
    for topic in topics:
        allowed.update(analyze(topic, analyzer))
    for facet in facets:
        allowed.update(analyze(facet, analyzer))
    utterance_vocab = set()
    for conv in conversations_json:
        for turn in conv["turn"]:
            utterance_vocab.update(analyze(turn["raw_utterance"], analyzer))
    leaked = (utterance_vocab - allowed) & corpus_vocab
    assert not leaked, f"query vocabulary leaked into neutral text: {leaked}"
    neutral_vocab = {
        t
        for w in BACKGROUND + TEMPLATE_WORDS
        for t in analyze(w, analyzer)
    }
    assert not neutral_vocab & allowed, neutral_vocab & allowed

    OUT_DIR.mkdir(parents=True, exist_ok=True)
    with open(OUT_DIR / "corpus.tsv", "w", encoding="utf-8") as fh:
        for doc_id, text in passages:
            fh.write(f"{doc_id}\t{text}\n")
    with open(OUT_DIR / "conversations.json", "w", encoding="utf-8") as fh:
        json.dump(conversations_json, fh, indent=1)
        fh.write("\n")
    with open(OUT_DIR / "qrels.txt", "w", encoding="utf-8") as fh:
        for turn_id, doc_id, grade in qrels:
            fh.write(f"{turn_id} 0 {doc_id} {grade}\n")
    with open(OUT_DIR / "manual.tsv", "w", encoding="utf-8") as fh:
        fh.write("\n".join(manual_lines) + "\n")

    n_turns = sum(len(s) for s in CONVERSATIONS.values())
    print(
        f"wrote {len(passages)} passages, {len(CONVERSATIONS)} conversations "
        f"({n_turns} turns), {len(qrels)} judgments -> {OUT_DIR}"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
