"""Intent classification: request kind plus extracted action parameters.

Two interchangeable backends share one contract: the deterministic rule
backend (ordered regex rules plus slot grammars, the default and the test
baseline) and a remote chat-completion backend.  Both feed the railguard,
which demotes anything off-topic, unsupported or irreparably malformed to
OutOfScope.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

from .errors import EmptyTokenError
from .domain import canonicalize_allergen


class IntentKind(Enum):
    USER_INSERTION = "user_insertion"
    DISH_INFO = "dish_info"
    MEAL_PREPARATION = "meal_preparation"
    OUT_OF_SCOPE = "out_of_scope"


# required / optional parameter names per intent kind
PARAM_SCHEMAS: dict[IntentKind, dict[str, tuple[str, ...]]] = {
    IntentKind.USER_INSERTION: {
        "required": ("name", "calories", "carbs", "proteins", "fats"),
        "optional": ("allergies",),
    },
    IntentKind.DISH_INFO: {
        "required": ("dish_name",),
        "optional": ("user_name",),
    },
    IntentKind.MEAL_PREPARATION: {
        "required": ("user_name",),
        "optional": (),
    },
    IntentKind.OUT_OF_SCOPE: {"required": (), "optional": ()},
}

NUMERIC_PARAMS = ("calories", "carbs", "proteins", "fats")


@dataclass(frozen=True)
class Intent:
    """Classified request: kind, extracted parameters, backend note."""

    kind: IntentKind
    params: dict = field(default_factory=dict)
    confidence_note: str = ""

    def schema(self) -> dict[str, tuple[str, ...]]:
        return PARAM_SCHEMAS[self.kind]

    def missing_required(self) -> tuple[str, ...]:
        return tuple(p for p in self.schema()["required"] if p not in self.params)


@dataclass(frozen=True)
class RecognizerContext:
    """What the dialogue already knows when a new utterance arrives."""

    pending_kind: Optional[IntentKind] = None
    missing: tuple[str, ...] = ()
    memory_text: str = ""


def out_of_scope(note: str = "") -> Intent:
    return Intent(kind=IntentKind.OUT_OF_SCOPE, params={}, confidence_note=note)


# -- slot grammars -------------------------------------------------------

_NUM = r"(\d+(?:\.\d+)?)"

_NUMERIC_SLOTS = {
    "calories": [
        re.compile(_NUM + r"\s*(?:kcal|kilocalories|calories|cal)\b"),
        re.compile(r"\b(?:kcal|calories|cal)\s*[:=]?\s*" + _NUM),
    ],
    "carbs": [
        re.compile(_NUM + r"\s*(?:g(?:rams)?\s+(?:of\s+)?)?carb(?:s|ohydrates?)?\b"),
        re.compile(r"\bcarb(?:s|ohydrates?)?\s*[:=]?\s*" + _NUM),
    ],
    "proteins": [
        re.compile(_NUM + r"\s*(?:g(?:rams)?\s+(?:of\s+)?)?proteins?\b"),
        re.compile(r"\bproteins?\s*[:=]?\s*" + _NUM),
    ],
    "fats": [
        re.compile(_NUM + r"\s*(?:g(?:rams)?\s+(?:of\s+)?)?fats?\b"),
        re.compile(r"\bfats?\s*[:=]?\s*" + _NUM),
    ],
}

_ALLERGY_PATTERNS = [
    re.compile(r"allergic to\s+([^.;?!]+)"),
    re.compile(r"allerg(?:y|ies)\s*(?:to|:)?\s+([^.;?!]+)"),
]

_INSERT_NAME_PATTERNS = [
    re.compile(r"\b(?:called|named|name is)\s+([a-z][\w'-]*)"),
    re.compile(r"\b(?:user|profile|patient|account|record)\s+for\s+([a-z][\w'-]*)"),
    re.compile(r"\b(?:user|profile|patient)\s*[:,]?\s+([a-z][\w'-]*)"),
    re.compile(r"\b(?:add|register|insert)\s+([a-z][\w'-]*)\s+(?:as|with)\b"),
]

_STOPWORDS = {"a", "an", "the", "new", "user", "profile", "with", "me", "my",
              "please", "account", "record", "everyone", "all"}


def _extract_number(slot: str, text: str) -> Optional[str]:
    for pattern in _NUMERIC_SLOTS[slot]:
        match = pattern.search(text)
        if match:
            return match.group(1)
    return None


def _extract_allergies(text: str) -> Optional[list[str]]:
    for pattern in _ALLERGY_PATTERNS:
        match = pattern.search(text)
        if match:
            chunk = match.group(1)
            parts = re.split(r",|\band\b|&", chunk)
            tokens = []
            for part in parts:
                part = re.sub(r"\b(?:nothing|none|else)\b", "", part).strip(" .")
                if part:
                    try:
                        tokens.append(canonicalize_allergen(part))
                    except EmptyTokenError:
                        continue
            return tokens
    if re.search(r"\bno (?:known )?allerg(?:y|ies)\b", text):
        return []
    return None


def _extract_insert_name(text: str) -> Optional[str]:
    for pattern in _INSERT_NAME_PATTERNS:
        match = pattern.search(text)
        if match and match.group(1) not in _STOPWORDS:
            return match.group(1)
    return None


def _clean_dish(raw: str) -> str:
    dish = raw.split(",")[0].strip(" ?.!,")
    dish = re.sub(r"^(?:the|a|an|some)\s+", "", dish)
    dish = re.sub(r"\s*\b(?:please|thanks|thank you)\b\s*$", "", dish)
    return dish.strip()


_DISH_PATTERNS = [
    # "is <dish> safe/suitable for <user>"
    (re.compile(r"\bis\s+(.+?)\s+(?:safe|suitable|ok|okay|fine)\s+for\s+([a-z][\w'-]*)"), True),
    # "what's in <dish> [for <user>]" and similar lookups
    (re.compile(
        r"\b(?:what(?:'s| is) in|what does|tell me about|information (?:about|on|for)|"
        r"info (?:about|on|for)|details (?:about|of|on)|know about)\s+(.+)$"), False),
    (re.compile(
        r"\b(?:calories|carbs|carbohydrates|proteins?|fats?|nutrients|allergens|"
        r"nutritional? (?:values?|data|info(?:rmation)?))\s+"
        r"(?:are\s+|is\s+)?(?:in|of|for|does)\s+(.+)$"), False),
    (re.compile(r"\b(?:dish|about the dish)\s+(.+)$"), False),
]

_TRAILING_USER = re.compile(r"\s+for\s+([a-z][\w'-]*)\s*$")
_DISH_CONTAIN = re.compile(r"\bdoes\s+(.+?)\s+(?:contain|have)\b")

_MEAL_USER_PATTERNS = [
    re.compile(r"\bmeal(?:\s+plan)?\s+for\s+([a-z][\w'-]*)"),
    re.compile(r"\b(?:for)\s+([a-z][\w'-]*)\s*[?.!]*$"),
    re.compile(r"\bwhat (?:should|can|could)\s+([a-z][\w'-]*)\s+(?:eat|have)"),
    re.compile(r"\bfeed\s+([a-z][\w'-]*)"),
]

_RULE_USER_INSERTION = re.compile(
    r"\b(?:add|register|create|insert|sign\s*up|enroll)\b.{0,40}"
    r"\b(?:user|profile|patient|person|account)\b"
    r"|\bnew\s+(?:user|profile|patient)\b")
_RULE_MEAL_PREP = re.compile(
    r"\b(?:prepare|plan|suggest|recommend|compose|put together|build|make|generate|"
    r"propose|fix)\b.{0,40}\b(?:meals?|lunch|dinner|menu|dishes)\b"
    r"|\bmeal\s+plan\b"
    r"|\bwhat (?:should|can|could)\s+[a-z][\w'-]*\s+(?:eat|have)\b")
# lookup forms only: a bare macronutrient keyword (as in a clarification
# reply "250 carbs") must not read as a dish-information request
_RULE_DISH_INFO = re.compile(
    r"\b(?:what(?:'s| is) in|what does|tell me about|information|info|details|know about)\b"
    r"|\b(?:calories|carbs|carbohydrates|proteins?|fats?|nutrients?|allergens?|"
    r"nutritional|nutrition)\b\s+(?:values?\s+|data\s+)?(?:are\s+|is\s+)?(?:in|of|for)\b"
    r"|\bis\s+.+\s+(?:safe|suitable|ok|okay|fine)\s+for\b"
    r"|\bdoes\s+.+\s+(?:contain|have)\b"
    r"|\bdish\b")


class RuleBackend:
    """Deterministic classifier: ordered keyword rules plus slot grammars.

    A pure function of (utterance, context); never fails, never invents
    parameter values.
    """

    name = "rules"

    @property
    def identity(self) -> str:
        return "rules/v1"

    def classify(self, utterance: str, context: RecognizerContext | None = None) -> Intent:
        text = " ".join(utterance.lower().split())
        if not text:
            return out_of_scope("rules:empty")
        context = context or RecognizerContext()

        intent = self._classify_fresh(text)
        if intent.kind is IntentKind.OUT_OF_SCOPE and context.pending_kind not in (
                None, IntentKind.OUT_OF_SCOPE):
            fragment = self._fill_pending(text, context)
            if fragment is not None:
                return fragment
        return intent

    # -- fresh classification -------------------------------------------

    def _classify_fresh(self, text: str) -> Intent:
        if _RULE_USER_INSERTION.search(text):
            return self._user_insertion(text)
        if _RULE_MEAL_PREP.search(text):
            return self._meal_preparation(text)
        if _RULE_DISH_INFO.search(text):
            return self._dish_info(text)
        return out_of_scope("rules:no-match")

    def _user_insertion(self, text: str) -> Intent:
        params: dict = {}
        name = _extract_insert_name(text)
        if name:
            params["name"] = name
        for slot in NUMERIC_PARAMS:
            value = _extract_number(slot, text)
            if value is not None:
                params[slot] = value
        allergies = _extract_allergies(text)
        if allergies is not None:
            params["allergies"] = allergies
        return Intent(IntentKind.USER_INSERTION, params, "rules:user_insertion")

    def _meal_preparation(self, text: str) -> Intent:
        params: dict = {}
        for pattern in _MEAL_USER_PATTERNS:
            match = pattern.search(text)
            if match and match.group(1) not in _STOPWORDS:
                params["user_name"] = match.group(1)
                break
        return Intent(IntentKind.MEAL_PREPARATION, params, "rules:meal_preparation")

    def _dish_info(self, text: str) -> Intent:
        params: dict = {}
        match = _DISH_CONTAIN.search(text)
        if match:
            params["dish_name"] = _clean_dish(match.group(1))
            return Intent(IntentKind.DISH_INFO, params, "rules:dish_info")
        for pattern, has_user in _DISH_PATTERNS:
            match = pattern.search(text)
            if not match:
                continue
            if has_user:
                params["dish_name"] = _clean_dish(match.group(1))
                params["user_name"] = match.group(2)
            else:
                rest = match.group(1)
                user = _TRAILING_USER.search(rest)
                if user and user.group(1) not in _STOPWORDS:
                    params["user_name"] = user.group(1)
                    rest = rest[:user.start()]
                dish = _clean_dish(rest)
                if dish:
                    params["dish_name"] = dish
            break
        return Intent(IntentKind.DISH_INFO, params, "rules:dish_info")

    # -- clarification slot filling -------------------------------------

    def _fill_pending(self, text: str, context: RecognizerContext) -> Optional[Intent]:
        kind = context.pending_kind
        params: dict = {}
        if kind is IntentKind.USER_INSERTION:
            for slot in NUMERIC_PARAMS:
                value = _extract_number(slot, text)
                if value is not None:
                    params[slot] = value
            allergies = _extract_allergies(text)
            if allergies is not None:
                params["allergies"] = allergies
            name = _extract_insert_name(text)
            if name:
                params["name"] = name
            # a bare reply binds the single missing slot it plausibly answers
            if not params and len(context.missing) == 1:
                slot = context.missing[0]
                bare = text.strip(" .!?")
                if slot in NUMERIC_PARAMS and re.fullmatch(_NUM, bare):
                    params[slot] = bare
                elif slot == "name" and re.fullmatch(r"[a-z][\w'-]*", bare):
                    params[slot] = bare
        elif kind is IntentKind.DISH_INFO:
            bare = _clean_dish(text)
            # a dish name reply is short; whole sentences are not dish names
            if bare and "dish_name" in context.missing and len(bare.split()) <= 4:
                params["dish_name"] = bare
        elif kind is IntentKind.MEAL_PREPARATION:
            bare = text.strip(" .!?")
            match = re.fullmatch(r"(?:for\s+)?([a-z][\w'-]*)", bare)
            if match and "user_name" in context.missing:
                params["user_name"] = match.group(1)
        if not params:
            return None
        return Intent(kind, params, "rules:slot-fill")


# -- railguard -----------------------------------------------------------

_DENY_PATTERNS = [
    re.compile(r"\b(?:delete|remove|drop|erase|forget|discard)\b.{0,40}"
               r"\b(?:user|dish|profile|allerg|menu|target)"),
    re.compile(r"\b(?:update|rename|modify|edit|change)\b.{0,40}"
               r"\b(?:user|dish|profile|allerg|menu|target)"),
    re.compile(r"\b(?:weather|football|stocks?|news|joke|poem|song|politics)\b"),
]


def _valid_number(value) -> bool:
    try:
        return float(value) > 0
    except (TypeError, ValueError):
        return False


def railguard(intent: Intent, utterance: str) -> Intent:
    """Demote off-topic, unsupported or irreparably malformed intents.

    Schema-unknown parameter keys are stripped; a present-but-unparseable
    required value (e.g. a non-numeric calorie amount) is irreparable and
    demotes the whole intent.
    """
    text = " ".join(utterance.lower().split())
    for pattern in _DENY_PATTERNS:
        if pattern.search(text):
            return out_of_scope("railguard:deny-pattern")
    if intent.kind is IntentKind.OUT_OF_SCOPE:
        return out_of_scope(intent.confidence_note or "railguard:out-of-scope")

    schema = intent.schema()
    allowed = set(schema["required"]) | set(schema["optional"])
    params = {k: v for k, v in intent.params.items() if k in allowed}
    for key, value in params.items():
        if key in NUMERIC_PARAMS and not _valid_number(value):
            return out_of_scope(f"railguard:bad-number:{key}")
        if key in ("name", "user_name", "dish_name") and not str(value).strip():
            return out_of_scope(f"railguard:empty:{key}")
        if key == "allergies" and not isinstance(value, (list, tuple, set, frozenset)):
            return out_of_scope("railguard:bad-allergies")
    return replace(intent, params=params)
