"""In-process property-graph store for users, dishes and allergens.

Holds the three relations of the dietary knowledge graph (dish has-allergen,
user is-allergic-to, user has-nutritional-needs) behind simple name-keyed
operations, with a JSON snapshot format for persistence.  Mutations are
atomic under an internal lock; reads never mutate.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass
from typing import Iterable

from .domain import (
    Dish,
    Nutrients,
    UserProfile,
    canonical_name,
    validate_profile,
)
from .errors import (
    DuplicateDishError,
    DuplicateUserError,
    InvalidProfileError,
    NotFoundError,
    SchemaVersionMismatchError,
    SnapshotIoError,
    SnapshotParseError,
)

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class GraphSnapshot:
    """Immutable view of the whole store contents."""

    users: tuple[UserProfile, ...]
    dishes: tuple[Dish, ...]
    schema_version: int = SCHEMA_VERSION


class KnowledgeStore:
    """Name-keyed store of user and dish nodes.

    Lookups are case-insensitive and whitespace-insensitive; uniqueness is
    enforced on the canonical form of the name.
    """

    def __init__(self):
        self._lock = threading.RLock()
        self._users: dict[str, UserProfile] = {}
        self._dishes: dict[str, Dish] = {}

    # -- mutations -------------------------------------------------------

    def insert_user(self, profile: UserProfile) -> str:
        violations = validate_profile(profile)
        if violations:
            raise InvalidProfileError(violations)
        with self._lock:
            key = profile.key
            if key in self._users:
                raise DuplicateUserError(f"user {profile.name!r} already exists")
            stored = profile if profile.id else UserProfile(
                id=new_id(), name=profile.name, needs=profile.needs,
                allergies=profile.allergies)
            self._users[key] = stored
            return stored.id

    def insert_dish(self, dish: Dish) -> str:
        with self._lock:
            key = dish.key
            if key in self._dishes:
                raise DuplicateDishError(f"dish {dish.name!r} already exists")
            stored = dish if dish.id else Dish(
                id=new_id(), name=dish.name, nutrients=dish.nutrients,
                allergens=dish.allergens)
            self._dishes[key] = stored
            return stored.id

    # -- reads -----------------------------------------------------------

    def get_user(self, name: str) -> UserProfile:
        key = canonical_name(name)
        with self._lock:
            try:
                return self._users[key]
            except KeyError:
                raise NotFoundError(f"no user named {name!r}") from None

    def get_dish(self, name: str) -> Dish:
        key = canonical_name(name)
        with self._lock:
            try:
                return self._dishes[key]
            except KeyError:
                raise NotFoundError(f"no dish named {name!r}") from None

    def has_user(self, name: str) -> bool:
        with self._lock:
            return canonical_name(name) in self._users

    def has_dish(self, name: str) -> bool:
        with self._lock:
            return canonical_name(name) in self._dishes

    def all_users(self) -> list[UserProfile]:
        with self._lock:
            return [self._users[k] for k in sorted(self._users)]

    def all_dishes(self) -> list[Dish]:
        with self._lock:
            return [self._dishes[k] for k in sorted(self._dishes)]

    def dishes_safe_for(self, user: UserProfile) -> list[Dish]:
        """Dishes whose allergen set is disjoint from the user's allergies,
        in ascending canonical-name order."""
        with self._lock:
            return [self._dishes[k] for k in sorted(self._dishes)
                    if not (self._dishes[k].allergens & user.allergies)]

    def snapshot(self) -> GraphSnapshot:
        with self._lock:
            return GraphSnapshot(users=tuple(self.all_users()),
                                 dishes=tuple(self.all_dishes()))

    # -- persistence -----------------------------------------------------

    def save_snapshot(self, path) -> None:
        try:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(render_snapshot(self.snapshot()))
        except OSError as exc:
            raise SnapshotIoError(f"cannot write snapshot to {path}: {exc}") from exc

    @classmethod
    def load_snapshot(cls, path) -> "KnowledgeStore":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise SnapshotIoError(f"cannot read snapshot from {path}: {exc}") from exc
        snap = parse_snapshot(text)
        store = cls()
        for user in snap.users:
            store.insert_user(user)
        for dish in snap.dishes:
            store.insert_dish(dish)
        return store


def new_id() -> str:
    return uuid.uuid4().hex[:12]


# -- snapshot wire format ------------------------------------------------

def _nutrients_to_json(n: Nutrients) -> dict:
    return {"calories": float(n.calories), "carbs": float(n.carbs),
            "proteins": float(n.proteins), "fats": float(n.fats)}


def _user_to_json(u: UserProfile) -> dict:
    return {"id": u.id, "name": u.name, "needs": _nutrients_to_json(u.needs),
            "allergies": sorted(u.allergies)}


def _dish_to_json(d: Dish) -> dict:
    return {"id": d.id, "name": d.name, "nutrients": _nutrients_to_json(d.nutrients),
            "allergens": sorted(d.allergens)}


def render_snapshot(snap: GraphSnapshot) -> str:
    doc = {
        "schema_version": snap.schema_version,
        "users": [_user_to_json(u) for u in snap.users],
        "dishes": [_dish_to_json(d) for d in snap.dishes],
    }
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def _parse_nutrients(obj, where: str, index: int) -> Nutrients:
    if not isinstance(obj, dict):
        raise SnapshotParseError(f"{where}: nutrient block is not an object", index)
    try:
        return Nutrients.of(obj["calories"], obj["carbs"], obj["proteins"], obj["fats"])
    except KeyError as exc:
        raise SnapshotParseError(f"{where}: missing nutrient field {exc}", index) from exc
    except (ValueError, TypeError) as exc:
        raise SnapshotParseError(f"{where}: bad nutrient value: {exc}", index) from exc


def parse_user_record(obj, index: int) -> UserProfile:
    where = f"users[{index}]"
    if not isinstance(obj, dict):
        raise SnapshotParseError(f"{where}: record is not an object", index)
    try:
        return UserProfile(
            id=str(obj.get("id", "")) or new_id(),
            name=str(obj["name"]),
            needs=_parse_nutrients(obj["needs"], where, index),
            allergies=frozenset(obj.get("allergies", [])),
        )
    except KeyError as exc:
        raise SnapshotParseError(f"{where}: missing field {exc}", index) from exc


def parse_dish_record(obj, index: int) -> Dish:
    where = f"dishes[{index}]"
    if not isinstance(obj, dict):
        raise SnapshotParseError(f"{where}: record is not an object", index)
    try:
        nutrients = obj["nutrients"] if "nutrients" in obj else {
            k: obj[k] for k in ("calories", "carbs", "proteins", "fats") if k in obj}
        return Dish(
            id=str(obj.get("id", "")) or new_id(),
            name=str(obj["name"]),
            nutrients=_parse_nutrients(nutrients, where, index),
            allergens=frozenset(obj.get("allergens", [])),
        )
    except KeyError as exc:
        raise SnapshotParseError(f"{where}: missing field {exc}", index) from exc


def parse_snapshot(text: str) -> GraphSnapshot:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SnapshotParseError(f"snapshot is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SnapshotParseError("snapshot root must be an object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaVersionMismatchError(
            f"snapshot schema_version {version!r}, expected {SCHEMA_VERSION}")
    users = tuple(parse_user_record(obj, i) for i, obj in enumerate(doc.get("users", [])))
    dishes = tuple(parse_dish_record(obj, i) for i, obj in enumerate(doc.get("dishes", [])))
    return GraphSnapshot(users=users, dishes=dishes, schema_version=version)
