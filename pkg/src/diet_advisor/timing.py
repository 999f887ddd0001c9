"""Per-stage latency instrumentation for dialogue turns."""

from __future__ import annotations

import time
from contextlib import contextmanager
from dataclasses import dataclass
from enum import Enum


class PipelineStage(Enum):
    INTENT_RECOGNITION = "IntentRecognition"
    INNER_SPEECH = "InnerSpeech"
    QUERY_GENERATION = "QueryGeneration"
    QUERY_EXECUTION = "QueryExecution"
    SOLVER = "Solver"
    QUERY_EXPLANATION = "QueryExplanation"
    SOLVER_EXPLANATION = "SolverExplanation"
    OUTER_SPEECH = "OuterSpeech"
    TOTAL_TURN = "TotalTurn"


@dataclass(frozen=True)
class StageTiming:
    """Elapsed monotonic-clock seconds for one executed stage."""

    stage: PipelineStage
    elapsed: float


class TurnTimer:
    """Collects stage timings for a single turn; stages run at most once."""

    def __init__(self):
        self.timings: list[StageTiming] = []

    @contextmanager
    def stage(self, stage: PipelineStage):
        start = time.perf_counter()
        try:
            yield
        finally:
            # clamp to the clock tick so an executed stage is always positive
            elapsed = max(time.perf_counter() - start, 1e-9)
            self.timings.append(StageTiming(stage, elapsed))
