"""Extract scene graphs from raw model responses and score format adherence.

The expected response shape is ``<think>...</think><answer>...</answer>``
with a JSON scene graph inside the answer segment. Strict mode demands that
full template; lenient mode tolerates a lone answer block or a bare JSON
body, because tag discipline and graph validity are separate questions when
measuring failure rates.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .graph import GraphValidation, SceneGraph, graph_from_json_dict, graph_to_json_dict

ParseMode = str  # "strict" | "lenient"

_MODES = ("strict", "lenient")

_FULL_TEMPLATE_RE = re.compile(
    r"\A\s*<think>(?P<think>.*?)</think>\s*<answer>(?P<answer>.*?)</answer>\s*\Z",
    re.DOTALL,
)
_ANSWER_RE = re.compile(r"<answer>(?P<answer>.*?)</answer>", re.DOTALL)

_json_decoder = json.JSONDecoder()


class ParseStatus(str, Enum):
    OK = "ok"
    NO_ANSWER_BLOCK = "no_answer_block"
    NO_JSON = "no_json"
    MALFORMED_JSON = "malformed_json"
    SCHEMA_VIOLATION = "schema_violation"
    MISSING_KEYWORDS = "missing_keywords"


class AnswerStructure(str, Enum):
    """How the answer segment was located inside the response."""

    FULL_TEMPLATE = "full_template"  # <think>..</think><answer>..</answer>
    ANSWER_ONLY = "answer_only"      # lone <answer>..</answer>
    BARE = "bare"                    # fenced or naked JSON body, no tags
    NONE = "none"


@dataclass
class ParseOutcome:
    status: ParseStatus
    graph: Optional[SceneGraph] = None
    think_text: Optional[str] = None
    answer_text: Optional[str] = None
    structure: AnswerStructure = AnswerStructure.NONE
    diagnostics: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.status is ParseStatus.OK

    def to_json_dict(self) -> dict:
        return {
            "status": self.status.value,
            "structure": self.structure.value,
            "diagnostics": list(self.diagnostics),
            "graph": graph_to_json_dict(self.graph) if self.graph is not None else None,
        }


def _check_mode(mode: ParseMode) -> None:
    if mode not in _MODES:
        raise ValueError(f"mode must be one of {_MODES}, got {mode!r}")


def _extract(response: str, mode: ParseMode) -> tuple[Optional[str], Optional[str], AnswerStructure]:
    match = _FULL_TEMPLATE_RE.fullmatch(response)
    if match:
        return match.group("think"), match.group("answer"), AnswerStructure.FULL_TEMPLATE
    if mode == "strict":
        return None, None, AnswerStructure.NONE
    answer = _ANSWER_RE.search(response)
    if answer:
        return None, answer.group("answer"), AnswerStructure.ANSWER_ONLY
    if "{" in response or "```" in response:
        return None, response, AnswerStructure.BARE
    return None, None, AnswerStructure.NONE


def extract_answer_block(
    response: str, mode: ParseMode = "strict"
) -> tuple[Optional[str], Optional[str]]:
    """Locate the think and answer segments; absent segments come back None."""
    _check_mode(mode)
    think, answer, _ = _extract(response, mode)
    return think, answer


def parse_response(response: str, mode: ParseMode = "strict") -> ParseOutcome:
    """Parse a raw response into a validated SceneGraph or a failure status.

    Classification is deterministic and reports the first failing stage:
    answer extraction, JSON location, JSON syntax, required keys, schema and
    graph validation. Never raises on arbitrary input text.
    """
    _check_mode(mode)
    think, answer, structure = _extract(response, mode)
    outcome = ParseOutcome(
        ParseStatus.NO_ANSWER_BLOCK,
        think_text=think,
        answer_text=answer,
        structure=structure,
    )
    if answer is None:
        return outcome

    start = answer.find("{")
    if start < 0:
        outcome.status = ParseStatus.NO_JSON
        outcome.diagnostics.append("answer segment contains no JSON object")
        return outcome
    try:
        payload, end = _json_decoder.raw_decode(answer, start)
    except (ValueError, RecursionError):
        outcome.status = ParseStatus.MALFORMED_JSON
        outcome.diagnostics.append("answer segment is not valid JSON")
        return outcome
    trailing = answer[end:].strip().strip("`").strip()
    if trailing:
        outcome.diagnostics.append(
            f"ignored {len(trailing)} characters after the first JSON object"
        )
    if not isinstance(payload, dict):
        outcome.status = ParseStatus.SCHEMA_VIOLATION
        outcome.diagnostics.append("top-level JSON value is not an object")
        return outcome

    missing = [key for key in ("objects", "relationships") if key not in payload]
    if missing:
        outcome.status = ParseStatus.MISSING_KEYWORDS
        outcome.diagnostics.append(f"missing keys: {', '.join(missing)}")
        return outcome

    validation: GraphValidation = graph_from_json_dict(payload)
    outcome.diagnostics.extend(str(v) for v in validation.violations)
    if validation.graph is None:
        outcome.status = ParseStatus.SCHEMA_VIOLATION
        return outcome

    outcome.status = ParseStatus.OK
    outcome.graph = validation.graph
    return outcome


def format_reward(outcome: ParseOutcome, mode: ParseMode = "strict") -> float:
    """Binary adherence reward derived from a parse outcome.

    1.0 iff the tag structure matched (strict: the full think/answer
    template; lenient: an answer block suffices) and the answer segment
    contains both the literal substrings "object" and "relationships". The
    keyword test is plain substring matching on the answer text, not a
    JSON-aware key check.
    """
    _check_mode(mode)
    if mode == "strict":
        structure_ok = outcome.structure is AnswerStructure.FULL_TEMPLATE
    else:
        structure_ok = outcome.structure in (
            AnswerStructure.FULL_TEMPLATE,
            AnswerStructure.ANSWER_ONLY,
        )
    if not structure_ok or outcome.answer_text is None:
        return 0.0
    answer = outcome.answer_text
    if "object" in answer and "relationships" in answer:
        return 1.0
    return 0.0
