"""Scripted dialogues and their frozen-transcript plumbing.

Each dialogue runs on a fresh engine over the fixture store with
deterministic backends, so its transcript (replies, note texts, structured
plans) must replay identically forever.  Regenerate the fixtures after an
intentional wording change with:

    python3 tests/golden_utils.py --write
"""

from __future__ import annotations

import json
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).parent))

from diet_advisor.engine import AdvisorEngine

from conftest import build_store

GOLDEN_DIR = pathlib.Path(__file__).parent / "data" / "golden"

# name -> (replan_cap, [utterance, ...])
DIALOGUES = {
    "meal_prep_anna": (3, ["prepare a meal for Anna"]),
    "meal_prep_bruno": (3, ["can you plan dinner for Bruno?"]),
    "dish_info_simple": (3, ["what's in the lentil soup?"]),
    "dish_info_unsafe": (3, ["is the pasta al pesto safe for Anna?"]),
    "dish_info_safe": (3, ["is the rice bowl safe for Bruno?"]),
    # marco's targets equal barley risotto + chicken wrap + tofu stir fry,
    # so the follow-up meal request has an exact-match plan
    "insert_complete": (3, [
        "add a new user called Marco, 1250 kcal, 135 carbs, 68 proteins, "
        "44 fats, allergic to nuts",
        "what should Marco eat?"]),
    "insert_one_replan": (3, [
        "register a new user called Pia",
        "1600 kcal, 200 carbs, 65 proteins, 45 fats, no known allergies"]),
    "insert_two_replans": (3, [
        "register a new user",
        "she is called Uma and needs 1010 kcal and 117 carbs",
        "70 proteins and 27 fats, allergic to soy"]),
    "topic_switch": (3, [
        "register a new user",
        "what's in the greek salad?"]),
    "out_of_scope": (3, [
        "tell me a joke",
        "how old are you?"]),
    "unknown_dish_replan": (3, [
        "what's in the ambrosia?",
        "the lentil soup"]),
    "unknown_user_replan": (3, [
        "prepare a meal for Zelda",
        "anna"]),
    "duplicate_user_replan": (3, [
        "add a new user called Anna, 2000 kcal, 250 carbs, 80 proteins, 70 fats",
        "carla"]),
    "replan_cap_exhaustion": (2, [
        "register a new user",
        "no idea",
        "whatever you think is best"]),
    "infeasible_targets": (3, [
        "add a new user called Remo, 100 kcal, 10 carbs, 10 proteins, 10 fats",
        "prepare a meal for Remo"]),
}


def run_dialogue(name: str) -> dict:
    replan_cap, script = DIALOGUES[name]
    engine = AdvisorEngine(build_store(), replan_cap=replan_cap)
    session = engine.create_session()
    turns = []
    for utterance in script:
        outcome = engine.run_turn(utterance, session)
        turns.append({
            "utterance": utterance,
            "reply": outcome.reply_text,
            "intent_kind": outcome.intent_kind,
            "awaiting_clarification": outcome.awaiting_clarification,
            "notes": [{"stage": n.stage.label, "text": n.text}
                      for n in outcome.notes],
            "plans": outcome.plans,
        })
    return {"dialogue": name, "replan_cap": replan_cap, "turns": turns}


def render(transcript: dict) -> str:
    return json.dumps(transcript, indent=2, ensure_ascii=False) + "\n"


def write_all() -> None:
    GOLDEN_DIR.mkdir(parents=True, exist_ok=True)
    for name in DIALOGUES:
        path = GOLDEN_DIR / f"{name}.json"
        path.write_text(render(run_dialogue(name)), encoding="utf-8")
        print(f"wrote {path}")


if __name__ == "__main__":
    if "--write" not in sys.argv:
        sys.exit("refusing to overwrite fixtures without --write")
    write_all()
