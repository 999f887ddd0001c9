"""Outer-speech generation: query explanations, solver explanations with
nutritional breakdowns, clarification questions, refusals and confirmations.

The deterministic path renders the template assets directly; a remote
speech backend, when configured, may rephrase the rendered text but every
number in the final text comes from the structured payload.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Optional, Sequence

from .domain import Dish, Nutrients, UserProfile, NUTRIENT_FIELDS
from .errors import BackendUnavailableError, EmptyReportError, InternalError
from .queries import QueryIR, QueryKind, QueryResult
from .solver import SolverConfig, SolverReport
from .templates import outer


class ExplanationKind(Enum):
    QUERY_EXPLANATION = "query_explanation"
    SOLVER_EXPLANATION = "solver_explanation"
    CLARIFICATION = "clarification"
    REFUSAL = "refusal"
    CONFIRMATION = "confirmation"


@dataclass(frozen=True)
class Explanation:
    """User-facing text plus a machine-readable mirror of its content."""

    kind: ExplanationKind
    text: str
    structured: dict = field(default_factory=dict)


def fmt_value(value) -> str:
    """One-decimal rendering used for every number shown to the user."""
    return f"{float(value):.1f}"


def fmt_nutrients(n: Nutrients) -> str:
    return (f"{fmt_value(n.calories)} kcal, {fmt_value(n.carbs)} g carbs, "
            f"{fmt_value(n.proteins)} g proteins, {fmt_value(n.fats)} g fats")


def _polish(text: str, backend) -> str:
    """Optionally hand text to a remote speech backend; fall back silently."""
    if backend is None:
        return text
    try:
        return backend.rephrase(text)
    except BackendUnavailableError:
        return text


def _join(items: Sequence[str]) -> str:
    items = list(items)
    if not items:
        return ""
    if len(items) == 1:
        return items[0]
    return ", ".join(items[:-1]) + " and " + items[-1]


def explain_query(query: QueryIR, result: QueryResult, backend=None, *,
                  user: Optional[UserProfile] = None, total: Optional[int] = None,
                  locale: str = "en") -> Explanation:
    """Natural-language summary of what a query looked up and what came back."""
    if result.source_query != query:
        raise InternalError("result does not belong to the given query")
    t = outer(locale)

    if query.kind is QueryKind.FETCH_DISH:
        if not result.complete:
            dish_name = query.bindings["dish_name"]
            return Explanation(
                ExplanationKind.QUERY_EXPLANATION,
                _polish(t["unknown_dish"].format(dish=dish_name), backend),
                {"dish": dish_name, "found": False})
        dish: Dish = result.rows[0]
        values = {name: float(fmt_value(getattr(dish.nutrients, name)))
                  for name in NUTRIENT_FIELDS}
        allergens = sorted(dish.allergens)
        allergen_sentence = (t["dish_allergens"].format(allergens=_join(allergens))
                             if allergens else t["dish_no_allergens"])
        text = t["dish_info"].format(dish=dish.name, allergen_sentence=allergen_sentence,
                                     **{k: fmt_value(v) for k, v in values.items()})
        structured = {"dish": dish.name, "found": True, "nutrients": values,
                      "allergens": allergens}
        if user is not None:
            clash = sorted(dish.allergens & user.allergies)
            if clash:
                warning = t["dish_warning_unsafe"].format(user=user.name, clash=_join(clash))
            else:
                warning = t["dish_warning_safe"].format(user=user.name)
            text = f"{text} {warning}"
            structured["warning_for"] = user.name
            structured["allergen_clash"] = clash
        return Explanation(ExplanationKind.QUERY_EXPLANATION, _polish(text, backend),
                           structured)

    if query.kind is QueryKind.FETCH_USER_NEEDS:
        user_name = query.bindings["user_name"]
        if not result.complete:
            return Explanation(
                ExplanationKind.QUERY_EXPLANATION,
                _polish(t["unknown_user"].format(user=user_name), backend),
                {"user": user_name, "found": False})
        profile: UserProfile = result.rows[0]
        values = {name: float(fmt_value(getattr(profile.needs, name)))
                  for name in NUTRIENT_FIELDS}
        text = t["user_needs"].format(user=profile.name,
                                      targets=fmt_nutrients(profile.needs))
        return Explanation(ExplanationKind.QUERY_EXPLANATION, _polish(text, backend),
                           {"user": profile.name, "found": True, "needs": values})

    if query.kind is QueryKind.FILTER_SAFE_DISHES:
        user_name = query.bindings["user_name"]
        if not result.complete:
            return Explanation(
                ExplanationKind.QUERY_EXPLANATION,
                _polish(t["unknown_user"].format(user=user_name), backend),
                {"user": user_name, "found": False})
        kept = len(result.rows)
        total = total if total is not None else kept
        allergies = sorted(user.allergies) if user is not None else []
        if allergies:
            text = t["query_explained_filter"].format(
                user=user_name, allergens=_join(allergies), kept=kept, total=total)
        else:
            text = t["query_explained_filter_no_allergies"].format(
                user=user_name, kept=kept, total=total)
        return Explanation(ExplanationKind.QUERY_EXPLANATION, _polish(text, backend),
                           {"user": user_name, "excluded_allergens": allergies,
                            "kept": kept, "total": total})

    # CREATE_USER
    name = query.bindings["name"]
    if not result.complete:
        return Explanation(
            ExplanationKind.CLARIFICATION,
            _polish(t["duplicate_user"].format(name=name), backend),
            {"user": name, "duplicate": True})
    needs: Nutrients = query.bindings["needs"]
    allergies = list(query.bindings["allergies"])
    clause = (t["user_created_allergies"].format(allergies=_join(allergies))
              if allergies else t["user_created_no_allergies"])
    text = t["user_created"].format(
        name=name, allergy_clause=clause,
        **{k: fmt_value(getattr(needs, k)) for k in NUTRIENT_FIELDS})
    structured = {"user": name, "created": True,
                  "needs": {k: float(fmt_value(getattr(needs, k))) for k in NUTRIENT_FIELDS},
                  "allergies": allergies}
    return Explanation(ExplanationKind.CONFIRMATION, _polish(text, backend), structured)


def solution_payload(report: SolverReport, targets: Nutrients) -> list[dict]:
    """Structured plan list shared by the text explanation and the API."""
    plans = []
    target_tenths = targets.as_tenths()
    for rank, solution in enumerate(report.solutions, start=1):
        totals = solution.totals
        dev_pct = {}
        for i, name in enumerate(NUTRIENT_FIELDS):
            signed = Fraction(totals.as_tenths()[i] - target_tenths[i], target_tenths[i]) * 100
            dev_pct[name] = float(f"{float(signed):+.1f}")
        plans.append({
            "rank": rank,
            "dishes": list(solution.dish_names),
            "dish_ids": list(solution.dish_ids),
            "totals": {k: float(fmt_value(getattr(totals, k))) for k in NUTRIENT_FIELDS},
            "deviations_pct": dev_pct,
            "score_pct": float(f"{float(solution.score * 100):.1f}"),
        })
    return plans


def explain_solution(report: SolverReport, targets: Nutrients, backend=None, *,
                     user_name: str = "you", locale: str = "en") -> Explanation:
    """Ranked breakdown of each recommended combination and its deviations."""
    if not report.solutions:
        raise EmptyReportError("no solutions to explain")
    t = outer(locale)
    plans = solution_payload(report, targets)
    lines = [t["meal_header"].format(user=user_name, targets=fmt_nutrients(targets))]
    for plan in plans:
        deviations = ", ".join(
            f"{plan['deviations_pct'][name]:+.1f}% {name}" for name in NUTRIENT_FIELDS)
        totals = ", ".join(
            f"{plan['totals'][name]:.1f}" for name in NUTRIENT_FIELDS)
        lines.append(t["meal_plan_line"].format(
            rank=plan["rank"], dishes=_join(plan["dishes"]),
            totals=totals, deviations=deviations,
            score_pct=f"{plan['score_pct']:.1f}"))
    text = "\n".join(lines)
    structured = {"user": user_name, "plans": plans,
                  "targets": {k: float(fmt_value(getattr(targets, k)))
                              for k in NUTRIENT_FIELDS}}
    return Explanation(ExplanationKind.SOLVER_EXPLANATION, _polish(text, backend), structured)


def no_solution_message(user_name: str, config: SolverConfig, locale: str = "en") -> Explanation:
    t = outer(locale)
    threshold_pct = fmt_value(float(config.threshold) * 100)
    text = t["meal_none"].format(user=user_name, threshold_pct=threshold_pct)
    return Explanation(ExplanationKind.SOLVER_EXPLANATION, text,
                       {"user": user_name, "plans": [],
                        "threshold_pct": float(threshold_pct)})


def ask_clarification(missing: Sequence[str], backend=None, *, locale: str = "en") -> Explanation:
    """One question covering every missing parameter at once."""
    if not missing:
        raise InternalError("clarification requested with nothing missing")
    t = outer(locale)
    names = t["clarify_names"]
    unknown = [m for m in missing if m not in names]
    if unknown:
        raise InternalError(f"no clarification wording for parameters: {unknown}")
    question = t["clarify_question"].format(items=_join([names[m] for m in missing]))
    text = f"{t['clarify_intro']} {question}"
    return Explanation(ExplanationKind.CLARIFICATION, _polish(text, backend),
                       {"missing": list(missing)})


def refuse_out_of_scope(utterance: str, backend=None, *, locale: str = "en") -> Explanation:
    text = outer(locale)["refusal"]
    return Explanation(ExplanationKind.REFUSAL, _polish(text, backend),
                       {"utterance": utterance})


def giveup_message(cap: int, locale: str = "en") -> Explanation:
    text = outer(locale)["giveup"].format(cap=cap)
    return Explanation(ExplanationKind.REFUSAL, text, {"replan_cap": cap})
