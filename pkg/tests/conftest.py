"""Shared fixtures: a small deterministic pantry plus two registered users.

Dish ids are fixed so transcripts and structured plan payloads are stable
across runs.
"""

from __future__ import annotations

import pytest

from diet_advisor.domain import Dish, Nutrients, UserProfile
from diet_advisor.engine import AdvisorEngine
from diet_advisor.store import KnowledgeStore

PANTRY = [
    ("d001", "barley risotto", 420, 60, 14, 10, ()),
    ("d002", "chicken wrap", 480, 50, 32, 18, ("gluten",)),
    ("d003", "fruit salad", 150, 35, 2, 1, ()),
    ("d004", "greek salad", 320, 12, 8, 24, ("lactose",)),
    ("d005", "grilled chicken", 280, 2, 40, 12, ()),
    ("d006", "lentil soup", 310, 45, 18, 6, ()),
    ("d007", "pasta al pesto", 550, 70, 15, 22, ("gluten", "nuts")),
    ("d008", "rice bowl", 420, 70, 12, 9, ("soy",)),
    ("d009", "tofu stir fry", 350, 25, 22, 16, ("soy",)),
    ("d010", "yogurt bowl", 220, 30, 12, 6, ("lactose", "nuts")),
]

# anna's targets equal lentil soup + grilled chicken + rice bowl exactly,
# bruno's equal grilled chicken + rice bowl + fruit salad, so both always
# have at least one zero-deviation plan.
USERS = [
    ("u001", "anna", 1010, 117, 70, 27, ("nuts",)),
    ("u002", "bruno", 850, 107, 54, 22, ("gluten", "lactose")),
]


def build_store() -> KnowledgeStore:
    store = KnowledgeStore()
    for did, name, cal, carbs, prot, fats, allergens in PANTRY:
        store.insert_dish(Dish(id=did, name=name,
                               nutrients=Nutrients.of(cal, carbs, prot, fats),
                               allergens=allergens))
    for uid, name, cal, carbs, prot, fats, allergies in USERS:
        store.insert_user(UserProfile(id=uid, name=name,
                                      needs=Nutrients.of(cal, carbs, prot, fats),
                                      allergies=allergies))
    return store


@pytest.fixture
def store() -> KnowledgeStore:
    return build_store()


@pytest.fixture
def engine(store) -> AdvisorEngine:
    return AdvisorEngine(store)
