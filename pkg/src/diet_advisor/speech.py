"""Inner speech: note-taking self-dialogue, short-term memory and the
parameter-supervision rules that drive replanning."""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

from .errors import BackendUnavailableError, InternalError
from .intents import Intent, IntentKind
from .templates import notes as note_templates


class NoteStage(Enum):
    INTENT_RECEIVED = ("IntentReceived", 0)
    PARAMS_CHECKED = ("ParamsChecked", 1)
    CLARIFICATION_ASKED = ("ClarificationAsked", 2)
    QUERY_PLANNED = ("QueryPlanned", 3)
    QUERY_OBSERVED = ("QueryObserved", 4)
    SOLVER_PLANNED = ("SolverPlanned", 5)
    SOLVER_OBSERVED = ("SolverObserved", 6)
    CONCLUSION = ("Conclusion", 7)

    def __init__(self, label: str, order: int):
        self.label = label
        self.order = order


@dataclass(frozen=True)
class InnerSpeechNote:
    """One fragment of the robot's self-dialogue."""

    stage: NoteStage
    text: str
    timestamp: float

    def __post_init__(self):
        if not self.text:
            raise InternalError("inner speech note must carry text")


@dataclass
class ShortTermMemory:
    """Ordered note fragments, truncated oldest-first under a byte budget.

    Truncation never splits a fragment; the concatenation of the surviving
    fragments is what a prompt-based backend would see as context.
    """

    budget: int = 4096
    fragments: list[InnerSpeechNote] = field(default_factory=list)

    def append(self, note: InnerSpeechNote) -> None:
        self.fragments.append(note)
        self._truncate()

    def _truncate(self) -> None:
        while len(self.fragments) > 1 and self._size() > self.budget:
            self.fragments.pop(0)

    def _size(self) -> int:
        return sum(len(f.text) + 1 for f in self.fragments)

    def as_prompt_text(self) -> str:
        return "\n".join(f.text for f in self.fragments)


class SessionState(Enum):
    AWAITING_INPUT = "awaiting_input"
    AWAITING_CLARIFICATION = "awaiting_clarification"
    EXECUTING = "executing"
    CLOSED = "closed"


# legal state-machine edges; EXECUTING is transient within a single turn
ALLOWED_TRANSITIONS = {
    SessionState.AWAITING_INPUT: {SessionState.AWAITING_CLARIFICATION,
                                  SessionState.EXECUTING, SessionState.AWAITING_INPUT,
                                  SessionState.CLOSED},
    SessionState.AWAITING_CLARIFICATION: {SessionState.AWAITING_CLARIFICATION,
                                          SessionState.EXECUTING,
                                          SessionState.AWAITING_INPUT,
                                          SessionState.CLOSED},
    SessionState.EXECUTING: {SessionState.AWAITING_INPUT,
                             SessionState.AWAITING_CLARIFICATION,
                             SessionState.CLOSED},
    SessionState.CLOSED: set(),
}

_session_counter = itertools.count(1)


@dataclass
class DialogueSession:
    """Per-conversation state: pending intent, memory, replanning budget."""

    session_id: str = ""
    state: SessionState = SessionState.AWAITING_INPUT
    pending_intent: Optional[Intent] = None
    memory: ShortTermMemory = field(default_factory=ShortTermMemory)
    replans_used: int = 0
    replan_cap: int = 3
    transparency: bool = True
    locale: str = "en"
    turn_index: int = 0

    def __post_init__(self):
        if not self.session_id:
            self.session_id = f"s{next(_session_counter):06d}"
        if self.replan_cap < 1:
            raise ValueError("replan_cap must be >= 1")

    def transition(self, new_state: SessionState) -> None:
        if new_state not in ALLOWED_TRANSITIONS[self.state]:
            raise InternalError(f"illegal transition {self.state} -> {new_state}")
        self.state = new_state

    def close(self) -> None:
        self.transition(SessionState.CLOSED)


class Decision(Enum):
    PROCEED = "proceed"
    CLARIFY = "clarify"
    REJECT = "reject"


@dataclass(frozen=True)
class Supervision:
    decision: Decision
    missing: tuple[str, ...] = ()
    reason: str = ""

    def __post_init__(self):
        if self.decision is Decision.CLARIFY and not self.missing:
            raise InternalError("Clarify must name at least one missing parameter")
        if self.decision is Decision.PROCEED and self.missing:
            raise InternalError("Proceed with missing parameters")


def supervise(intent: Intent, session: DialogueSession) -> Supervision:
    """Check whether the (already merged) intent is complete enough to act on."""
    if session.state is SessionState.CLOSED:
        raise InternalError("supervise called on a closed session")
    if intent.kind is IntentKind.OUT_OF_SCOPE:
        return Supervision(Decision.REJECT, reason="out_of_scope")
    missing = intent.missing_required()
    if missing:
        return Supervision(Decision.CLARIFY, missing=missing)
    return Supervision(Decision.PROCEED)


def merge_clarification(session: DialogueSession, fragment: Intent) -> Intent:
    """Fold a clarification reply into the pending intent.

    New values win on conflict.  A fragment of a different (in-scope) kind is
    a topic switch: it replaces the pending intent wholesale and the caller
    resets the replanning counter.
    """
    pending = session.pending_intent
    if pending is None:
        return fragment
    if fragment.kind is not pending.kind and fragment.kind is not IntentKind.OUT_OF_SCOPE:
        return fragment
    if fragment.kind is IntentKind.OUT_OF_SCOPE:
        return pending
    merged = dict(pending.params)
    merged.update(fragment.params)
    return replace(pending, params=merged)


def render_note(stage: NoteStage, template_key: str, fields: dict,
                locale: str = "en") -> str:
    templates = note_templates(locale)
    if template_key not in templates:
        raise InternalError(f"no note template named {template_key!r}")
    return templates[template_key].format(**fields)


def note(stage: NoteStage, payload: dict, session: DialogueSession,
         backend=None) -> InnerSpeechNote:
    """Render one note, append it to short-term memory and return it.

    payload carries `template` (asset key) and the template's fields.  A
    remote backend may rephrase the rendered text; if it is unreachable the
    deterministic rendering stands, so note-taking never blocks the turn.
    """
    payload = dict(payload)
    template_key = payload.pop("template")
    text = render_note(stage, template_key, payload, session.locale)
    if backend is not None:
        try:
            text = backend.rephrase(text)
        except BackendUnavailableError:
            pass
    fragment = InnerSpeechNote(stage=stage, text=text, timestamp=time.time())
    session.memory.append(fragment)
    return fragment
