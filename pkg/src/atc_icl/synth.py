"""Deterministic generator for a persuasive-essay-shaped synthetic corpus.

The official essay corpus is distributed under a research license and cannot
be bundled here. This generator writes a stand-in with the same on-disk
layout (``essayNNN.txt`` / ``essayNNN.ann`` pairs plus a split CSV) and the
same aggregate shape: essay, paragraph, sentence, token, and per-class
component counts are hit exactly by construction. Content is meaningless
filler text, which is irrelevant for exercising parsing, selection,
prompting, ensembling, and evaluation end to end without the licensed data.

Everything is driven by one seeded RNG, so a given (shape, seed) pair always
produces byte-identical files on every platform.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from pathlib import Path
from random import Random

from .corpus import Label

SPLIT_FILE_NAME = "train-test-split.csv"


@dataclass(frozen=True)
class CorpusShape:
    essays: int
    train: int
    paragraphs: int
    major_claims: int
    claims: int
    premises: int
    sentences: int
    tokens: int

    @property
    def components(self) -> int:
        return self.major_claims + self.claims + self.premises


#: Shape of the official corpus: 402 essays (322 train / 80 test), 1833 body
#: paragraphs, 751/1506/3832 components, 7116 sentences, 147271 tokens.
PE_SHAPE = CorpusShape(
    essays=402,
    train=322,
    paragraphs=1833,
    major_claims=751,
    claims=1506,
    premises=3832,
    sentences=7116,
    tokens=147271,
)


def small_shape(n_essays: int, train: int) -> CorpusShape:
    """A consistent scaled-down shape for quick fixtures."""
    paragraphs = 4 * n_essays + n_essays // 4
    body = paragraphs - 2 * n_essays
    major_claims = n_essays + n_essays // 3
    singles = 2 * n_essays - major_claims
    claims = body + singles + body // 3
    premises = 2 * body + n_essays
    components = major_claims + claims + premises
    sentences = components + 2 * n_essays + n_essays // 2
    return CorpusShape(
        essays=n_essays,
        train=train,
        paragraphs=paragraphs,
        major_claims=major_claims,
        claims=claims,
        premises=premises,
        sentences=sentences,
        tokens=sentences * 20 + 7 * n_essays,
    )


_TOPICS = [
    "public cycling networks", "school uniforms", "urban green spaces",
    "nuclear power plants", "remote working", "space exploration programs",
    "plastic packaging bans", "museum entrance fees", "organic farming",
    "high speed rail lines", "social media platforms", "standardized testing",
    "public libraries", "electric vehicles", "national service programs",
    "genetically modified crops", "tourism taxes", "animal testing",
    "online education", "minimum wage increases", "youth sports funding",
    "historic building preservation", "renewable energy subsidies",
    "urban car restrictions", "universal basic income", "school meal programs",
    "artificial intelligence regulation", "public broadcasting", "recycling mandates",
    "community gardens",
]

_ANGLES = [
    "Why cities should support", "The hidden costs of", "A case against",
    "Rethinking the future of", "What students gain from", "The lasting value of",
    "How societies benefit from", "The overlooked risks of", "In defense of",
    "Why governments must fund", "The real price of", "Lessons learned from",
    "The quiet decline of", "A balanced view on",
]

_LEADS = [
    "Moreover", "Furthermore", "Clearly", "Additionally", "Indeed",
    "Consequently", "Therefore", "Besides", "Similarly", "Undoubtedly",
    "First", "Second", "Finally", "Also", "Thus", "Hence",
]

_WORDS = [
    "people", "cities", "students", "families", "communities", "schools",
    "policies", "programs", "resources", "benefits", "choices", "measures",
    "support", "growth", "health", "safety", "freedom", "progress",
    "education", "environment", "economy", "society", "culture", "traffic",
    "energy", "nature", "public", "local", "modern", "daily", "common",
    "important", "necessary", "valuable", "helpful", "harmful", "expensive",
    "sustainable", "practical", "effective", "limited", "widespread",
    "improve", "reduce", "provide", "create", "protect", "encourage",
    "require", "increase", "prevent", "promote", "deliver", "strengthen",
    "funding", "planning", "training", "housing", "transport", "leisure",
    "opportunities", "responsibilities", "advantages", "challenges",
    "the", "many", "most", "their", "these", "such", "every", "more",
    "for", "with", "over", "time", "and", "can", "will", "often",
]


@dataclass
class _SentencePlan:
    label: Label | None  # None = filler
    tokens: int = 0


def _validate(shape: CorpusShape) -> None:
    n = shape.essays
    if not (0 < shape.train < n):
        raise ValueError("train size must be strictly between 0 and the essay count")
    if n > len(_TOPICS) * len(_ANGLES):
        raise ValueError("not enough distinct titles for that many essays")
    base_paragraphs = shape.paragraphs // n
    if base_paragraphs < 3 or shape.paragraphs > 5 * n:
        raise ValueError("paragraph total must allow 3 to 5 paragraphs per essay")
    if not (n <= shape.major_claims <= 2 * n):
        raise ValueError("major claim total must allow 1 or 2 per essay")
    body = shape.paragraphs - 2 * n
    singles = 2 * n - shape.major_claims
    extra_claims = shape.claims - body - singles
    if not (0 <= extra_claims <= body):
        raise ValueError("claim total incompatible with the paragraph plan")
    if shape.premises < body:
        raise ValueError("need at least one premise per body paragraph")
    if shape.sentences < shape.components + 2 * n:
        raise ValueError("sentence total below component plus filler minimum")


def generate_corpus(out_dir: Path | str, shape: CorpusShape = PE_SHAPE, seed: int = 20240817) -> dict:
    """Write the synthetic corpus into ``out_dir``; returns a summary dict.

    ``out_dir`` receives one .txt/.ann pair per essay and the split CSV in
    the distribution format (``"ID";"SET"`` with TRAIN/TEST values).
    """
    _validate(shape)
    rng = Random(seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    n = shape.essays

    essay_ids = [f"essay{i + 1:03d}" for i in range(n)]
    titles = [f"{_ANGLES[i % len(_ANGLES)]} {_TOPICS[i // len(_ANGLES)]}" for i in range(n)]

    # Paragraphs per essay: base count everywhere, one extra for a sample.
    base_paragraphs = shape.paragraphs // n
    gets_extra_paragraph = set(rng.sample(range(n), shape.paragraphs - base_paragraphs * n))
    paragraph_counts = [base_paragraphs + (1 if i in gets_extra_paragraph else 0) for i in range(n)]

    # One major claim per essay in the introduction; a sample of essays gets
    # a second one in the conclusion, the rest close with a claim instead.
    has_second_mc = set(rng.sample(range(n), shape.major_claims - n))

    body_slots: list[tuple[int, int]] = []  # (essay index, paragraph index)
    for i in range(n):
        body_slots.extend((i, p) for p in range(1, paragraph_counts[i] - 1))

    claims_per_slot = {slot: 1 for slot in body_slots}
    singles = 2 * n - shape.major_claims
    extra_claims = shape.claims - len(body_slots) - singles
    for slot_index in rng.sample(range(len(body_slots)), extra_claims):
        claims_per_slot[body_slots[slot_index]] += 1

    premises_per_slot = {slot: 1 for slot in body_slots}
    for _ in range(shape.premises - len(body_slots)):
        premises_per_slot[body_slots[rng.randrange(len(body_slots))]] += 1

    fillers_per_slot = {slot: 0 for slot in body_slots}
    for _ in range(shape.sentences - shape.components - 2 * n):
        fillers_per_slot[body_slots[rng.randrange(len(body_slots))]] += 1

    # Per-paragraph sentence plans, in document order across the corpus.
    plans_per_essay: list[list[list[_SentencePlan]]] = []
    all_plans: list[_SentencePlan] = []
    for i in range(n):
        paragraphs: list[list[_SentencePlan]] = []
        intro = [_SentencePlan(None), _SentencePlan(Label.MAJOR_CLAIM)]
        paragraphs.append(intro)
        for p in range(1, paragraph_counts[i] - 1):
            slot = (i, p)
            plan = [_SentencePlan(Label.CLAIM) for _ in range(claims_per_slot[slot])]
            plan.extend(_SentencePlan(Label.PREMISE) for _ in range(premises_per_slot[slot]))
            plan.extend(_SentencePlan(None) for _ in range(fillers_per_slot[slot]))
            paragraphs.append(plan)
        closing = Label.MAJOR_CLAIM if i in has_second_mc else Label.CLAIM
        paragraphs.append([_SentencePlan(None), _SentencePlan(closing)])
        plans_per_essay.append(paragraphs)
        for paragraph in paragraphs:
            all_plans.extend(paragraph)

    # Token budget: titles are counted too, the remainder is spread over
    # sentences and nudged one token at a time onto the exact target.
    title_tokens = sum(len(t.split()) for t in titles)
    budget = shape.tokens - title_tokens
    for plan in all_plans:
        plan.tokens = rng.randint(14, 26)
    delta = budget - sum(plan.tokens for plan in all_plans)
    cursor = 0
    while delta != 0:
        plan = all_plans[cursor % len(all_plans)]
        if delta > 0 and plan.tokens < 45:
            plan.tokens += 1
            delta -= 1
        elif delta < 0 and plan.tokens > 6:
            plan.tokens -= 1
            delta += 1
        cursor += 1

    label_totals = {label: 0 for label in Label}
    sentence_total = 0
    token_total = title_tokens

    train_ids = set(rng.sample(essay_ids, shape.train))

    for i, essay_id in enumerate(essay_ids):
        text_parts = [titles[i], ""]
        components: list[tuple[Label, int, int, str]] = []
        offset = len(titles[i]) + 2  # title line plus blank separator line
        for paragraph in plans_per_essay[i]:
            sentence_strs = []
            for plan in paragraph:
                lead = rng.choice(_LEADS)
                body_words = [rng.choice(_WORDS) for _ in range(plan.tokens - 1)]
                core = " ".join(body_words)
                sentence = f"{lead} {core}."
                if plan.label is not None:
                    start = offset + len(lead) + 1
                    components.append((plan.label, start, start + len(core), core))
                    label_totals[plan.label] += 1
                offset += len(sentence) + 1  # the joining space or final newline
                sentence_total += 1
                token_total += plan.tokens
                sentence_strs.append(sentence)
            text_parts.append(" ".join(sentence_strs))
        raw_text = "\n".join(text_parts) + "\n"

        ann_lines = []
        for t_index, (label, start, end, core) in enumerate(components, start=1):
            assert raw_text[start:end] == core
            ann_lines.append(f"T{t_index}\t{label.value} {start} {end}\t{core}")
        # Relation and stance noise; parsers must skip these lines.
        if len(components) >= 2:
            ann_lines.append("R1\tsupports Arg1:T2 Arg2:T1")
            ann_lines.append("A1\tStance T1 For")
        (out / f"{essay_id}.txt").write_bytes(raw_text.encode("utf-8"))
        (out / f"{essay_id}.ann").write_bytes(("\n".join(ann_lines) + "\n").encode("utf-8"))

    split_lines = ['"ID";"SET"']
    for essay_id in essay_ids:
        tag = "TRAIN" if essay_id in train_ids else "TEST"
        split_lines.append(f'"{essay_id}";"{tag}"')
    (out / SPLIT_FILE_NAME).write_bytes(("\n".join(split_lines) + "\n").encode("utf-8"))

    assert sentence_total == shape.sentences
    assert token_total == shape.tokens
    assert label_totals[Label.MAJOR_CLAIM] == shape.major_claims
    assert label_totals[Label.CLAIM] == shape.claims
    assert label_totals[Label.PREMISE] == shape.premises

    return {
        "out_dir": str(out),
        "split_file": str(out / SPLIT_FILE_NAME),
        "seed": seed,
        **asdict(shape),
    }
