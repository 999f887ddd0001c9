"""Versioned text assets with named placeholders; locale-swappable."""

from __future__ import annotations

import json
from functools import lru_cache
from importlib.resources import files


@lru_cache(maxsize=None)
def load_templates(locale: str = "en") -> dict:
    resource = files("diet_advisor.assets").joinpath(f"templates_{locale}.json")
    try:
        return json.loads(resource.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ValueError(f"no template asset for locale {locale!r}") from None


def notes(locale: str = "en") -> dict:
    return load_templates(locale)["notes"]


def outer(locale: str = "en") -> dict:
    return load_templates(locale)["outer"]


def intent_prompt(locale: str = "en") -> dict:
    return load_templates(locale)["intent_prompt"]
