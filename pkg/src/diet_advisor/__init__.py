"""Dietary advisory engine: dialogue pipeline, knowledge store and meal solver."""

from .domain import (
    Dish,
    Nutrients,
    UserProfile,
    build_profile,
    canonicalize_allergen,
    validate_profile,
)
from .solver import MealSolution, SolverConfig, SolverReport, brute_force_oracle, solve
from .store import KnowledgeStore

__all__ = [
    "Dish",
    "Nutrients",
    "UserProfile",
    "build_profile",
    "canonicalize_allergen",
    "validate_profile",
    "MealSolution",
    "SolverConfig",
    "SolverReport",
    "brute_force_oracle",
    "solve",
    "KnowledgeStore",
]

__version__ = "0.1.0"
