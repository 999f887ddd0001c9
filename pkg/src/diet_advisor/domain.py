"""Core value types: nutrient vectors, allergens, dishes and user profiles.

Nutrient amounts are stored as `Decimal` values quantized to one decimal
place, so totals and solver scores are exact and reproducible across
platforms.  Helpers expose the values as integer tenths for hot loops.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from typing import Iterable, Union

from .errors import EmptyTokenError

NUTRIENT_FIELDS = ("calories", "carbs", "proteins", "fats")
NUTRIENT_UNITS = {"calories": "kcal", "carbs": "g", "proteins": "g", "fats": "g"}

_TENTH = Decimal("0.1")
_WS = re.compile(r"\s+")

NumberLike = Union[int, float, str, Decimal]


def _to_tenth_decimal(value: NumberLike, what: str) -> Decimal:
    """Coerce a number to a Decimal with exactly one decimal place."""
    if isinstance(value, float) and not math.isfinite(value):
        raise ValueError(f"{what} must be finite, got {value!r}")
    try:
        dec = Decimal(str(value)).quantize(_TENTH)
    except (InvalidOperation, ValueError) as exc:
        raise ValueError(f"{what} is not a number: {value!r}") from exc
    return dec


def canonical_name(raw: str) -> str:
    """Lowercase, trim and collapse inner whitespace; shared by all name lookups."""
    token = _WS.sub(" ", raw.strip().lower())
    if not token:
        raise EmptyTokenError("name is empty after trimming")
    return token


def canonicalize_allergen(raw: str) -> str:
    """Canonical allergen token: lowercase and trimmed.

    Idempotent by construction; raises EmptyTokenError on whitespace-only input.
    """
    token = _WS.sub(" ", raw.strip().lower())
    if not token:
        raise EmptyTokenError("allergen token is empty after trimming")
    return token


def canonicalize_allergens(raw: Iterable[str]) -> frozenset[str]:
    return frozenset(canonicalize_allergen(a) for a in raw)


@dataclass(frozen=True)
class Nutrients:
    """Four-component nutrient vector: kcal plus grams of carbs/proteins/fats."""

    calories: Decimal
    carbs: Decimal
    proteins: Decimal
    fats: Decimal

    def __post_init__(self):
        for name in NUTRIENT_FIELDS:
            value = _to_tenth_decimal(getattr(self, name), name)
            if value < 0:
                raise ValueError(f"{name} must be non-negative, got {value}")
            object.__setattr__(self, name, value)

    @classmethod
    def of(cls, calories: NumberLike, carbs: NumberLike,
           proteins: NumberLike, fats: NumberLike) -> "Nutrients":
        # __post_init__ coerces and validates each component
        return cls(calories, carbs, proteins, fats)

    @classmethod
    def zero(cls) -> "Nutrients":
        return cls.of(0, 0, 0, 0)

    @classmethod
    def from_tenths(cls, tenths: tuple[int, int, int, int]) -> "Nutrients":
        return cls(*(Decimal(t) * _TENTH for t in tenths))

    def as_tenths(self) -> tuple[int, int, int, int]:
        """Integer tenths representation (exact)."""
        return tuple(int(getattr(self, name) * 10) for name in NUTRIENT_FIELDS)

    def __add__(self, other: "Nutrients") -> "Nutrients":
        return Nutrients(self.calories + other.calories, self.carbs + other.carbs,
                         self.proteins + other.proteins, self.fats + other.fats)

    def as_dict(self) -> dict[str, float]:
        return {name: float(getattr(self, name)) for name in NUTRIENT_FIELDS}


def sum_nutrients(items: Iterable[Nutrients]) -> Nutrients:
    total = Nutrients.zero()
    for item in items:
        total = total + item
    return total


@dataclass(frozen=True)
class Dish:
    """A dish node: nutrients plus the allergens it contains."""

    id: str
    name: str
    nutrients: Nutrients
    allergens: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "allergens", canonicalize_allergens(self.allergens))

    @property
    def key(self) -> str:
        return canonical_name(self.name)


@dataclass(frozen=True)
class UserProfile:
    """A user node: per-meal nutritional targets plus declared allergies."""

    id: str
    name: str
    needs: Nutrients
    allergies: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "allergies", canonicalize_allergens(self.allergies))

    @property
    def key(self) -> str:
        return canonical_name(self.name)


@dataclass(frozen=True)
class Violation:
    """One violated profile invariant."""

    code: str
    field: str | None = None

    def __str__(self):
        return f"{self.code}({self.field})" if self.field else self.code


def validate_profile(profile: UserProfile) -> list[Violation]:
    """Return every violated invariant; an empty list means the profile is valid."""
    violations = []
    if not profile.name.strip():
        violations.append(Violation("EmptyName"))
    for name in NUTRIENT_FIELDS:
        if getattr(profile.needs, name) <= 0:
            violations.append(Violation("NonPositiveTarget", name))
    return violations


def build_profile(user_id: str, name: str, calories: NumberLike, carbs: NumberLike,
                  proteins: NumberLike, fats: NumberLike,
                  allergies: Iterable[str] = ()) -> UserProfile:
    """Build a profile from raw field values, collecting every violation.

    Raises InvalidProfileError listing all problems at once, so a single
    clarification round can address them together.
    """
    from .errors import InvalidProfileError

    violations: list[Violation] = []
    values: dict[str, Decimal] = {}
    for field_name, raw in zip(NUTRIENT_FIELDS, (calories, carbs, proteins, fats)):
        try:
            dec = _to_tenth_decimal(raw, field_name)
        except ValueError:
            violations.append(Violation("NotANumber", field_name))
            continue
        if dec <= 0:
            violations.append(Violation("NonPositiveTarget", field_name))
        else:
            values[field_name] = dec
    if not name.strip():
        violations.append(Violation("EmptyName"))
    if violations:
        raise InvalidProfileError(violations)
    return UserProfile(id=user_id, name=name.strip(), needs=Nutrients(**values),
                       allergies=canonicalize_allergens(allergies))
