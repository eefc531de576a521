"""Prompt construction and response parsing for component classification.

A prompt is assembled from fixed instructions, an optional task-information
block (class definitions plus train-set label statistics), demonstration
essays rendered as labeled component lists, and the query essay. The model
answers one line per component in the canonical ``<index>. <label>`` format;
``parse_response`` inverts that format tolerantly.

Two inference modes share the same context layout: all-at-once asks for every
component of the query essay in a single call, one-by-one asks for a single
target component per call.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from importlib import resources as importlib_resources
from pathlib import Path
from typing import Mapping, Sequence

from .corpus import LABELS, Corpus, Essay, Label, Scope, compute_stats
from .errors import AtcError
from .features import extract_structural, render_featxt
from .gateway import ChatRequest, Gateway


class MissingInfoBlock(AtcError):
    """Prompt config asks for the info block but none was provided."""


class MissingDemonstrations(AtcError):
    """All-at-once prompts need at least one demonstration essay."""


class CountMismatch(AtcError):
    """Response did not contain exactly the expected number of label lines."""


class UnknownLabel(AtcError):
    """A response line holds no recognizable class name."""


class Unparseable(AtcError):
    """The model never produced a parseable answer within the retry budget."""


class PromptMode(Enum):
    ALL_AT_ONCE = "all_at_once"
    ONE_BY_ONE = "one_by_one"


@dataclass(frozen=True)
class PromptConfig:
    include_info: bool = False
    include_essay: bool = False
    include_fts: bool = False
    mode: PromptMode = PromptMode.ALL_AT_ONCE


@dataclass(frozen=True)
class InfoBlock:
    class_definitions: Mapping[Label, str]
    train_stats: Mapping[Label, int]


@dataclass(frozen=True)
class Prompt:
    system_text: str
    user_text: str
    demo_essay_ids: tuple[str, ...]


SYSTEM_ALL_AT_ONCE = (
    "You are an expert in argument mining. Each argument component (AC) of a "
    "persuasive essay must be classified as 'Major Claim', 'Claim', or 'Premise'. "
    "Answer with exactly one line per component, in the format '<index>. <label>', "
    "and output nothing else."
)

SYSTEM_ONE_BY_ONE = (
    "You are an expert in argument mining. Each argument component (AC) of a "
    "persuasive essay must be classified as 'Major Claim', 'Claim', or 'Premise'. "
    "Answer with a single line containing only the label of the requested component."
)

INFO_HEADER = "## Task information"
DEMO_HEADER = "## Demonstration essays"
QUERY_HEADER = "## Query essay"

ALL_AT_ONCE_INSTRUCTION = (
    "Classify all {m} argument components of the query essay. "
    "Respond with exactly {m} lines, one per component, in the format '<index>. <label>'."
)
ONE_BY_ONE_INSTRUCTION = (
    "Which class is argument component {j} of {m}? "
    "Respond with a single line containing only the label."
)
FORMAT_REMINDER = (
    "Reminder: respond with exactly {m} lines, one per component, in the format "
    "'<index>. <label>', where <label> is 'Major Claim', 'Claim', or 'Premise'. "
    "Output nothing else."
)

_MARKER_RE = re.compile(r"^\s*(?:[-*•]+\s*)?(?:\(?\d+\)?\s*[.):\-]\s*)?")
_LABEL_ALIASES = {
    "major claim": Label.MAJOR_CLAIM,
    "majorclaim": Label.MAJOR_CLAIM,
    "claim": Label.CLAIM,
    "premise": Label.PREMISE,
}


def load_class_definitions(path: Path | str | None = None) -> dict[Label, str]:
    """Read class definitions from a resource file, one ``[Name]`` section per label."""
    if path is None:
        text = (
            importlib_resources.files("atc_icl.resources")
            .joinpath("class_definitions.txt")
            .read_text(encoding="utf-8")
        )
    else:
        text = Path(path).read_text(encoding="utf-8")
    by_name = {label.display_name: label for label in LABELS}
    definitions: dict[Label, str] = {}
    current: Label | None = None
    chunks: dict[Label, list[str]] = {}
    for line in text.splitlines():
        header = re.fullmatch(r"\[(.+)\]", line.strip())
        if header:
            name = header.group(1)
            if name not in by_name:
                raise ValueError(f"unknown class section [{name}] in definitions file")
            current = by_name[name]
            chunks[current] = []
        elif current is not None:
            chunks[current].append(line)
    for label in LABELS:
        if label not in chunks:
            raise ValueError(f"definitions file lacks a section for {label.display_name}")
        definitions[label] = "\n".join(chunks[label]).strip()
    return definitions


def build_info_block(corpus: Corpus, definitions: Mapping[Label, str] | None = None) -> InfoBlock:
    """Info block with definitions and label counts from the train split."""
    stats = compute_stats(corpus, Scope.TRAIN)
    return InfoBlock(
        class_definitions=dict(definitions) if definitions else load_class_definitions(),
        train_stats=dict(stats.label_counts),
    )


def render_labels(labels: Sequence[Label]) -> str:
    """Canonical answer text: ``1. Major Claim`` etc., one line per label."""
    return "\n".join(f"{i}. {label.display_name}" for i, label in enumerate(labels, start=1))


def _render_info(info: InfoBlock) -> str:
    lines = [INFO_HEADER, "Class definitions:"]
    for label in LABELS:
        lines.append(f"{label.display_name}: {info.class_definitions[label]}")
    counts = ", ".join(
        f"{label.display_name}: {info.train_stats[label]}" for label in LABELS
    )
    lines.append(f"Argument component counts in the training set: {counts}.")
    return "\n".join(lines)


def _render_demo(essay: Essay, index: int) -> str:
    lines = [f"### Example {index}", f"Title: {essay.title}", "Argument components:"]
    for i, component in enumerate(essay.components, start=1):
        lines.append(f"{i}. {component.text} -> {component.gold_label.display_name}")
    return "\n".join(lines)


def _render_query(essay: Essay, config: PromptConfig) -> str:
    lines = [QUERY_HEADER, f"Title: {essay.title}"]
    if config.include_essay:
        lines.append("Full text:")
        lines.append(essay.raw_text.rstrip("\n"))
    lines.append(f"Argument components ({essay.m} components):")
    for i, component in enumerate(essay.components, start=1):
        lines.append(f"{i}. {component.text}")
        if config.include_fts:
            lines.append(render_featxt(extract_structural(essay, component)))
    return "\n".join(lines)


def build_prompt(
    query: Essay,
    demos: Sequence[Essay],
    config: PromptConfig,
    info: InfoBlock | None = None,
    target_index: int | None = None,
) -> Prompt:
    """Assemble the full prompt for one chat call.

    ``target_index`` (1-based) selects the component to ask about in
    one-by-one mode and must be absent in all-at-once mode, where the single
    call covers every component of the query essay.
    """
    if config.include_info and info is None:
        raise MissingInfoBlock("prompt config includes the info block but none was given")
    if config.mode is PromptMode.ALL_AT_ONCE:
        if not demos:
            raise MissingDemonstrations("all-at-once prompts need at least one demonstration")
        if target_index is not None:
            raise ValueError("target_index only applies to one-by-one mode")
    else:
        if target_index is None or not (1 <= target_index <= query.m):
            raise ValueError(f"target_index must be in 1..{query.m}")

    sections: list[str] = []
    if config.include_info and info is not None:
        sections.append(_render_info(info))
    if demos:
        demo_lines = [DEMO_HEADER]
        for i, demo in enumerate(demos, start=1):
            demo_lines.append(_render_demo(demo, i))
        sections.append("\n\n".join(demo_lines))
    sections.append(_render_query(query, config))
    if config.mode is PromptMode.ALL_AT_ONCE:
        sections.append(ALL_AT_ONCE_INSTRUCTION.format(m=query.m))
        system_text = SYSTEM_ALL_AT_ONCE
    else:
        sections.append(ONE_BY_ONE_INSTRUCTION.format(j=target_index, m=query.m))
        system_text = SYSTEM_ONE_BY_ONE

    return Prompt(
        system_text=system_text,
        user_text="\n\n".join(sections),
        demo_essay_ids=tuple(d.essay_id for d in demos),
    )


def _match_label(core: str) -> Label | None:
    normalized = re.sub(r"\s+", " ", core).strip().strip("\"'").rstrip(".").strip().lower()
    return _LABEL_ALIASES.get(normalized)


def parse_response(text: str, m: int) -> list[Label]:
    """Parse a model answer into exactly ``m`` labels.

    Tolerates list markers, case differences, and both spellings of the major
    claim. A non-empty line without a recognizable class raises
    :class:`UnknownLabel`; a parseable answer of the wrong length raises
    :class:`CountMismatch`.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    labels: list[Label] = []
    for raw_line in text.splitlines():
        line = raw_line.strip()
        if not line:
            continue
        core = _MARKER_RE.sub("", line, count=1)
        label = _match_label(core)
        if label is None:
            raise UnknownLabel(f"no recognizable class in line {line!r}")
        labels.append(label)
    if len(labels) != m:
        raise CountMismatch(f"expected {m} label lines, found {len(labels)}")
    return labels


def classify_essay(
    query: Essay,
    demos: Sequence[Essay],
    config: PromptConfig,
    gateway: Gateway,
    info: InfoBlock | None = None,
    model_name: str = "gpt-4",
    temperature: float = 0.0,
    max_output_tokens: int = 1024,
    max_retries: int = 2,
) -> tuple[list[Label], list[str]]:
    """Predict one label per component of ``query`` through the gateway.

    All-at-once mode issues a single chat call; one-by-one mode issues one
    call per component. Malformed answers are retried up to ``max_retries``
    times with an appended format reminder before :class:`Unparseable` is
    raised. Returns the labels and every raw response text, in request order.
    """
    responses: list[str] = []

    def ask(prompt: Prompt, expected: int) -> list[Label]:
        user_text = prompt.user_text
        last_error: AtcError | None = None
        for _ in range(max_retries + 1):
            response = gateway.chat(
                ChatRequest(
                    system_text=prompt.system_text,
                    user_text=user_text,
                    model_name=model_name,
                    temperature=temperature,
                    max_output_tokens=max_output_tokens,
                )
            )
            responses.append(response.text)
            try:
                return parse_response(response.text, expected)
            except (CountMismatch, UnknownLabel) as exc:
                last_error = exc
                user_text = prompt.user_text + "\n\n" + FORMAT_REMINDER.format(m=expected)
        raise Unparseable(
            f"{query.essay_id}: no parseable answer after {max_retries + 1} attempts"
        ) from last_error

    if config.mode is PromptMode.ALL_AT_ONCE:
        prompt = build_prompt(query, demos, config, info)
        return ask(prompt, query.m), responses

    labels: list[Label] = []
    for j in range(1, query.m + 1):
        prompt = build_prompt(query, demos, config, info, target_index=j)
        labels.extend(ask(prompt, 1))
    return labels, responses
