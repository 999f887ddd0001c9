"""Graph query layer: compile validated intents, execute against the store,
and render Cypher-style query text for the explanation layer.

Compilation is deterministic: a validated intent maps to a fixed query
plan, so the query path needs no language model.  Empty results are data,
not errors; the dialogue engine uses them to trigger replanning.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .domain import Nutrients, build_profile, canonical_name
from .errors import DuplicateUserError, InternalError, NotFoundError, UnsupportedIntentError
from .intents import Intent, IntentKind
from .store import KnowledgeStore


class QueryKind(Enum):
    FETCH_DISH = "fetch_dish"
    FETCH_USER_NEEDS = "fetch_user_needs"
    FILTER_SAFE_DISHES = "filter_safe_dishes"
    CREATE_USER = "create_user"


REQUIRED_BINDINGS = {
    QueryKind.FETCH_DISH: ("dish_name",),
    QueryKind.FETCH_USER_NEEDS: ("user_name",),
    QueryKind.FILTER_SAFE_DISHES: ("user_name",),
    QueryKind.CREATE_USER: ("name", "needs", "allergies"),
}


@dataclass(frozen=True)
class QueryIR:
    """One structured graph query with exactly the bindings its kind requires."""

    kind: QueryKind
    bindings: dict

    def __post_init__(self):
        expected = set(REQUIRED_BINDINGS[self.kind])
        got = set(self.bindings)
        if got != expected:
            raise InternalError(
                f"{self.kind.value} bindings {sorted(got)} != {sorted(expected)}")

    @property
    def rendered_form(self) -> str:
        return render_query_text(self)


@dataclass
class QueryResult:
    """Rows plus the query that produced them; `complete` is False when the
    store had no matching entity (the replanning signal)."""

    rows: list
    source_query: QueryIR
    complete: bool = True
    detail: str = ""


def compile_intent(intent: Intent) -> list[QueryIR]:
    """Map a fully-supervised intent onto its query plan."""
    if intent.kind is IntentKind.OUT_OF_SCOPE:
        raise UnsupportedIntentError("out-of-scope intent reached the query compiler")
    missing = intent.missing_required()
    if missing:
        raise InternalError(f"intent still missing parameters: {missing}")
    params = intent.params

    if intent.kind is IntentKind.DISH_INFO:
        plan = [QueryIR(QueryKind.FETCH_DISH,
                        {"dish_name": canonical_name(str(params["dish_name"]))})]
        if params.get("user_name"):
            plan.append(QueryIR(QueryKind.FETCH_USER_NEEDS,
                                {"user_name": canonical_name(str(params["user_name"]))}))
        return plan

    if intent.kind is IntentKind.USER_INSERTION:
        needs = Nutrients.of(params["calories"], params["carbs"],
                             params["proteins"], params["fats"])
        return [QueryIR(QueryKind.CREATE_USER, {
            "name": canonical_name(str(params["name"])),
            "needs": needs,
            "allergies": tuple(sorted(params.get("allergies", ()))),
        })]

    # meal preparation: needs first, then the allergen filter
    user = canonical_name(str(params["user_name"]))
    return [
        QueryIR(QueryKind.FETCH_USER_NEEDS, {"user_name": user}),
        QueryIR(QueryKind.FILTER_SAFE_DISHES, {"user_name": user}),
    ]


def execute(query: QueryIR, store: KnowledgeStore) -> QueryResult:
    """Run one query against the knowledge store.

    Missing entities come back as incomplete empty results rather than
    exceptions, so the caller can replan instead of failing.
    """
    bindings = query.bindings
    if query.kind is QueryKind.FETCH_DISH:
        try:
            return QueryResult([store.get_dish(bindings["dish_name"])], query)
        except NotFoundError:
            return QueryResult([], query, complete=False, detail="not_found:dish")

    if query.kind is QueryKind.FETCH_USER_NEEDS:
        try:
            return QueryResult([store.get_user(bindings["user_name"])], query)
        except NotFoundError:
            return QueryResult([], query, complete=False, detail="not_found:user")

    if query.kind is QueryKind.FILTER_SAFE_DISHES:
        try:
            user = store.get_user(bindings["user_name"])
        except NotFoundError:
            return QueryResult([], query, complete=False, detail="not_found:user")
        return QueryResult(store.dishes_safe_for(user), query)

    # CREATE_USER
    profile = build_profile("", bindings["name"], bindings["needs"].calories,
                            bindings["needs"].carbs, bindings["needs"].proteins,
                            bindings["needs"].fats, bindings["allergies"])
    try:
        user_id = store.insert_user(profile)
    except DuplicateUserError:
        return QueryResult([], query, complete=False, detail="duplicate_user")
    return QueryResult([{"id": user_id}], query)


def _fmt(value) -> str:
    return f"{float(value):.1f}"


def render_query_text(query: QueryIR) -> str:
    """Deterministic single-line Cypher-style text for explanation prompts."""
    b = query.bindings
    if query.kind is QueryKind.FETCH_DISH:
        return (f'MATCH (d:Dish {{name: "{b["dish_name"]}"}}) '
                f'OPTIONAL MATCH (d)-[:has_allergen]->(a:Allergen) '
                f'RETURN d.name, d.calories, d.carbs, d.proteins, d.fats, collect(a.name)')
    if query.kind is QueryKind.FETCH_USER_NEEDS:
        return (f'MATCH (u:User {{name: "{b["user_name"]}"}})'
                f'-[:has_nutritional_needs]->(n:Needs) '
                f'RETURN n.calories, n.carbs, n.proteins, n.fats')
    if query.kind is QueryKind.FILTER_SAFE_DISHES:
        return (f'MATCH (d:Dish) WHERE NOT EXISTS {{ '
                f'MATCH (d)-[:has_allergen]->(:Allergen)<-[:is_allergic_to]-'
                f'(u:User {{name: "{b["user_name"]}"}}) }} '
                f'RETURN d ORDER BY d.name')
    needs = b["needs"]
    allergens = ", ".join(f'"{a}"' for a in b["allergies"])
    return (f'CREATE (u:User {{name: "{b["name"]}"}})'
            f'-[:has_nutritional_needs]->(n:Needs {{calories: {_fmt(needs.calories)}, '
            f'carbs: {_fmt(needs.carbs)}, proteins: {_fmt(needs.proteins)}, '
            f'fats: {_fmt(needs.fats)}}}) '
            f'FOREACH (name IN [{allergens}] | '
            f'MERGE (a:Allergen {{name: name}}) MERGE (u)-[:is_allergic_to]->(a))')
