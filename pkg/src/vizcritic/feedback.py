"""Prompt assembly and LLM invocation with record/replay determinism.

Two templates drive all generated text. The analyze-clarify-guide prompt
joins a question, a fixed guideline connective, the filter's
interpretation conditions, and its design-knowledge preamble. The track
prompt joins a question with the current and previous versions' outputs
and interpretations behind fixed connectives. Assembly is byte-exact:
non-empty segments joined by single spaces, connectives always present.
"""
from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import EmptyQuestion, ReplayMiss, SchemaError, UnknownFilter

ACG_CONNECTIVE = "Solve the problem based on this guideline:"
TRACK_CURRENT_CONNECTIVE = "Here are details about the current version:"
TRACK_PREVIOUS_CONNECTIVE = "Here are details about the previous version:"

DEFAULT_SYSTEM_PREAMBLE = (
    "You are an assistant to a visualization designer. Ground every answer "
    "in the provided guideline and measured results, keep answers short, "
    "and never invent measurements."
)

MIN_QUESTIONS = 9
MAX_QUESTIONS = 12


@dataclass(frozen=True)
class AcgPrompt:
    question: str
    cond: str
    filter_suggestions: str
    assembled: str


@dataclass(frozen=True)
class TrackPrompt:
    question: str
    curr_output: str
    curr_interpretations: str
    prev_output: str
    prev_interpretations: str
    assembled: str


@dataclass(frozen=True)
class LlmParameters:
    system: str = DEFAULT_SYSTEM_PREAMBLE
    temperature: float = 0.0
    max_length: int = 1200


@dataclass(frozen=True)
class LlmExchange:
    prompt_hash: str
    prompt: str
    response: str
    backend_id: str
    parameters: LlmParameters


def _join(segments: list[str]) -> str:
    return " ".join(seg for seg in segments if seg)


def build_acg_prompt(question: str, cond: str, suggestions: str) -> AcgPrompt:
    if not question.strip():
        raise EmptyQuestion("analyze-clarify-guide prompt requires a question")
    assembled = _join([question, ACG_CONNECTIVE, cond, suggestions])
    return AcgPrompt(question=question, cond=cond, filter_suggestions=suggestions, assembled=assembled)


def build_track_prompt(
    question: str,
    curr_output: str,
    curr_interpretations: str,
    prev_output: str,
    prev_interpretations: str,
) -> TrackPrompt:
    if not question.strip():
        raise EmptyQuestion("track prompt requires a question")
    assembled = _join(
        [
            question,
            TRACK_CURRENT_CONNECTIVE,
            curr_output,
            curr_interpretations,
            TRACK_PREVIOUS_CONNECTIVE,
            prev_output,
            prev_interpretations,
        ]
    )
    return TrackPrompt(
        question=question,
        curr_output=curr_output,
        curr_interpretations=curr_interpretations,
        prev_output=prev_output,
        prev_interpretations=prev_interpretations,
        assembled=assembled,
    )


def prompt_digest(prompt: str, params: LlmParameters) -> str:
    payload = json.dumps(
        {
            "max_length": params.max_length,
            "prompt": prompt,
            "system": params.system,
            "temperature": params.temperature,
        },
        sort_keys=True,
        separators=(",", ":"),
        ensure_ascii=False,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class ExchangeStore:
    """Append-only record of LLM exchanges, one JSON object per line."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._by_digest: dict[str, LlmExchange] = {}
        if self.path.exists():
            for line in self.path.read_text(encoding="utf-8").splitlines():
                if not line.strip():
                    continue
                rec = json.loads(line)
                exchange = LlmExchange(
                    prompt_hash=rec["prompt_hash"],
                    prompt=rec["prompt"],
                    response=rec["response"],
                    backend_id=rec["backend_id"],
                    parameters=LlmParameters(**rec["parameters"]),
                )
                self._by_digest[exchange.prompt_hash] = exchange

    def get(self, digest: str) -> LlmExchange | None:
        with self._lock:
            return self._by_digest.get(digest)

    def append(self, exchange: LlmExchange) -> None:
        record = {
            "prompt_hash": exchange.prompt_hash,
            "prompt": exchange.prompt,
            "response": exchange.response,
            "backend_id": exchange.backend_id,
            "parameters": {
                "system": exchange.parameters.system,
                "temperature": exchange.parameters.temperature,
                "max_length": exchange.parameters.max_length,
            },
        }
        with self._lock:
            self._by_digest[exchange.prompt_hash] = exchange
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def generate_feedback(
    prompt: str,
    backend,
    mode: str,
    store: ExchangeStore | None = None,
    params: LlmParameters = LlmParameters(),
) -> str:
    """Resolve a prompt to text under the given mode.

    live: call the backend; record: live plus persist the exchange;
    replay: serve the stored response, never touching the backend.
    """
    if mode not in ("live", "record", "replay"):
        raise ValueError(f"unknown mode {mode!r}")
    digest = prompt_digest(prompt, params)
    if mode == "replay":
        if store is None:
            raise ReplayMiss(digest)
        exchange = store.get(digest)
        if exchange is None:
            raise ReplayMiss(digest)
        return exchange.response
    response = backend.complete(params.system, prompt, params.temperature, params.max_length)
    response = response[: params.max_length]
    if mode == "record":
        if store is None:
            raise ValueError("record mode requires an exchange store")
        store.append(
            LlmExchange(
                prompt_hash=digest,
                prompt=prompt,
                response=response,
                backend_id=backend.backend_id,
                parameters=params,
            )
        )
    return response


# --------------------------------------------------------------------------
# Bundled content: grounding preambles, interpretation conditions,
# question banks.
# --------------------------------------------------------------------------


def _load_keyed_file(name: str) -> dict[str, str]:
    text = resources.files("vizcritic.data").joinpath(name).read_text()
    entries: dict[str, str] = {}
    for line in text.splitlines():
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, sep, value = stripped.partition(" = ")
        if not sep:
            raise SchemaError(f"malformed line in {name}: {line!r}")
        entries[key.strip()] = value
    return entries


_PREAMBLES: dict[str, str] | None = None
_CONDITIONS: dict[str, str] | None = None


def grounding_preamble(filter_id: str) -> str:
    """The design-knowledge text appended to every prompt for a filter."""
    global _PREAMBLES
    if _PREAMBLES is None:
        _PREAMBLES = _load_keyed_file("preambles.txt")
    if filter_id not in _PREAMBLES:
        raise UnknownFilter(f"no grounding preamble for filter {filter_id!r}")
    return _PREAMBLES[filter_id]


def interpretation_conditions(filter_id: str) -> str:
    """The if/then interpretation rules for a filter."""
    global _CONDITIONS
    if _CONDITIONS is None:
        _CONDITIONS = _load_keyed_file("conditions.txt")
    if filter_id not in _CONDITIONS:
        raise UnknownFilter(f"no interpretation conditions for filter {filter_id!r}")
    return _CONDITIONS[filter_id]


@dataclass(frozen=True)
class QuestionBank:
    acg: dict[str, tuple[str, ...]]
    track: dict[str, str]

    def interpretation_question(self, filter_id: str) -> str:
        return self.acg[filter_id][0]

    def suggestion_question(self, filter_id: str) -> str:
        return self.acg[filter_id][1]


def load_question_bank() -> QuestionBank:
    raw = json.loads(resources.files("vizcritic.data").joinpath("questions.json").read_text())
    acg = {}
    for filter_id, questions in raw["acg"].items():
        count = len(questions)
        if not MIN_QUESTIONS <= count <= MAX_QUESTIONS:
            raise SchemaError(
                f"question bank for {filter_id!r} has {count} questions; "
                f"expected {MIN_QUESTIONS}..{MAX_QUESTIONS}"
            )
        acg[filter_id] = tuple(questions)
    return QuestionBank(acg=acg, track=dict(raw["track"]))
