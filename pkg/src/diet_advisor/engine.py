"""Turn orchestration: classify, supervise, query, solve, explain.

One `run_turn` call drives the whole pipeline for a single utterance,
recording inner-speech notes and per-stage timings along the way.  The
replanning loop (clarification questions, unknown entities, duplicate
names) is bounded by the session's replan cap.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

from .domain import UserProfile
from .explain import (
    Explanation,
    ask_clarification,
    explain_query,
    explain_solution,
    fmt_nutrients,
    fmt_value,
    giveup_message,
    no_solution_message,
    refuse_out_of_scope,
)
from .intents import Intent, IntentKind, RecognizerContext, RuleBackend, railguard
from .queries import QueryIR, QueryKind, QueryResult, compile_intent, execute
from .solver import SolverConfig, solve
from .speech import (
    Decision,
    DialogueSession,
    InnerSpeechNote,
    NoteStage,
    SessionState,
    merge_clarification,
    note,
    supervise,
)
from .store import KnowledgeStore
from .templates import load_templates
from .timing import PipelineStage, StageTiming, TurnTimer


@dataclass
class TurnOutcome:
    """Everything one turn produced."""

    reply_text: str
    notes: list[InnerSpeechNote] = field(default_factory=list)
    disclosed_notes: list[InnerSpeechNote] = field(default_factory=list)
    timings: list[StageTiming] = field(default_factory=list)
    plans: list[dict] = field(default_factory=list)
    intent_kind: str = ""
    awaiting_clarification: bool = False


class AdvisorEngine:
    """Binds the pipeline modules to one knowledge store."""

    def __init__(self, store: KnowledgeStore, *, intent_backend=None,
                 speech_backend=None, solver_config: Optional[SolverConfig] = None,
                 replan_cap: int = 3, transparency: bool = True, locale: str = "en"):
        self.store = store
        self.intent_backend = intent_backend or RuleBackend()
        self.speech_backend = speech_backend
        self.solver_config = solver_config or SolverConfig()
        self.replan_cap = replan_cap
        self.transparency = transparency
        self.locale = locale
        self._kind_labels = load_templates(locale).get("kind_labels", {})

    def create_session(self, *, transparency: Optional[bool] = None,
                       replan_cap: Optional[int] = None) -> DialogueSession:
        return DialogueSession(
            replan_cap=self.replan_cap if replan_cap is None else replan_cap,
            transparency=self.transparency if transparency is None else transparency,
            locale=self.locale,
        )

    # -- helpers ---------------------------------------------------------

    def _label(self, kind: IntentKind) -> str:
        return self._kind_labels.get(kind.value, kind.value.replace("_", " "))

    def _note(self, session, stage: NoteStage, template: str, **fields) -> InnerSpeechNote:
        return note(stage, {"template": template, **fields}, session, self.speech_backend)

    def _params_clause(self, intent: Intent) -> str:
        if not intent.params:
            return ""
        schema = intent.schema()
        ordered = [p for p in schema["required"] + schema["optional"] if p in intent.params]
        parts = []
        for name in ordered:
            value = intent.params[name]
            if isinstance(value, (list, tuple, set, frozenset)):
                value = ", ".join(sorted(str(v) for v in value)) or "none"
            parts.append(f"{name}={value}")
        return " with " + "; ".join(parts)

    # -- the turn --------------------------------------------------------

    def run_turn(self, utterance: str, session: DialogueSession) -> TurnOutcome:
        if session.state is SessionState.CLOSED:
            raise ValueError("session is closed")
        timer = TurnTimer()
        outcome = TurnOutcome(reply_text="")
        session.turn_index += 1

        with timer.stage(PipelineStage.TOTAL_TURN):
            self._run_turn_inner(utterance, session, timer, outcome)

        # TotalTurn was appended last; keep stage order of execution
        outcome.timings = timer.timings
        outcome.disclosed_notes = list(outcome.notes) if session.transparency else []
        if session.state is SessionState.EXECUTING:  # defensive; must not happen
            session.transition(SessionState.AWAITING_INPUT)
        return outcome

    def _run_turn_inner(self, utterance: str, session: DialogueSession,
                        timer: TurnTimer, outcome: TurnOutcome) -> None:
        record = outcome.notes.append

        with timer.stage(PipelineStage.INTENT_RECOGNITION):
            context = RecognizerContext(
                pending_kind=session.pending_intent.kind if session.pending_intent else None,
                missing=(session.pending_intent.missing_required()
                         if session.pending_intent else ()),
                memory_text=session.memory.as_prompt_text(),
            )
            intent = railguard(self.intent_backend.classify(utterance, context), utterance)

        with timer.stage(PipelineStage.INNER_SPEECH):
            record(self._note(
                session, NoteStage.INTENT_RECEIVED, "intent_received",
                utterance=utterance.strip(), kind=self._label(intent.kind),
                params_clause=self._params_clause(intent)))

            merged = intent
            if session.state is SessionState.AWAITING_CLARIFICATION and session.pending_intent:
                merged = merge_clarification(session, intent)
                if merged.kind is not session.pending_intent.kind:
                    session.replans_used = 0
                    record(self._note(session, NoteStage.PARAMS_CHECKED,
                                      "params_checked_topic_switch",
                                      kind=self._label(merged.kind)))
            supervision = supervise(merged, session)

        outcome.intent_kind = merged.kind.value

        if supervision.decision is Decision.REJECT:
            if session.state is SessionState.AWAITING_CLARIFICATION and session.pending_intent:
                # unhelpful reply while clarifying: ask again rather than abort
                missing = session.pending_intent.missing_required()
                self._clarify(session, timer, outcome, session.pending_intent, missing)
                return
            record(self._note(session, NoteStage.PARAMS_CHECKED,
                              "params_checked_out_of_scope"))
            with timer.stage(PipelineStage.OUTER_SPEECH):
                explanation = refuse_out_of_scope(utterance, self.speech_backend,
                                                  locale=session.locale)
                outcome.reply_text = explanation.text
            record(self._note(session, NoteStage.CONCLUSION, "conclusion_refusal"))
            session.transition(SessionState.AWAITING_INPUT)
            session.pending_intent = None
            return

        if supervision.decision is Decision.CLARIFY:
            record(self._note(session, NoteStage.PARAMS_CHECKED, "params_checked_missing",
                              missing=", ".join(supervision.missing)))
            self._clarify(session, timer, outcome, merged, supervision.missing)
            return

        record(self._note(session, NoteStage.PARAMS_CHECKED, "params_checked_ok",
                          params=self._params_clause(merged).removeprefix(" with ") or "none"))
        session.transition(SessionState.EXECUTING)
        try:
            self._execute_intent(session, timer, outcome, merged)
        finally:
            if session.state is SessionState.EXECUTING:
                session.transition(SessionState.AWAITING_INPUT)

    # -- replanning ------------------------------------------------------

    def _clarify(self, session, timer, outcome, pending: Intent,
                 missing: tuple[str, ...], reply_override: str | None = None) -> None:
        if session.replans_used >= session.replan_cap:
            record_note = self._note(session, NoteStage.CONCLUSION, "clarification_giveup",
                                     cap=session.replan_cap)
            outcome.notes.append(record_note)
            with timer.stage(PipelineStage.OUTER_SPEECH):
                outcome.reply_text = giveup_message(session.replan_cap, session.locale).text
            session.pending_intent = None
            session.replans_used = 0
            if session.state is not SessionState.AWAITING_INPUT:
                session.transition(SessionState.AWAITING_INPUT)
            return
        session.replans_used += 1
        outcome.notes.append(self._note(session, NoteStage.CLARIFICATION_ASKED,
                                        "clarification_asked",
                                        missing=", ".join(missing)))
        with timer.stage(PipelineStage.OUTER_SPEECH):
            if reply_override is not None:
                outcome.reply_text = reply_override
            else:
                outcome.reply_text = ask_clarification(
                    missing, self.speech_backend, locale=session.locale).text
        session.pending_intent = pending
        outcome.awaiting_clarification = True
        if session.state is not SessionState.AWAITING_CLARIFICATION:
            session.transition(SessionState.AWAITING_CLARIFICATION)

    def _replan_on_result(self, session, timer, outcome, merged: Intent,
                          result: QueryResult) -> None:
        """A query came back incomplete: note it and re-enter clarification."""
        q = result.source_query
        if result.detail == "duplicate_user":
            subject = q.bindings["name"]
            outcome.notes.append(self._note(session, NoteStage.QUERY_OBSERVED,
                                            "query_observed_duplicate", subject=subject))
            pending = replace(merged, params={k: v for k, v in merged.params.items()
                                              if k != "name"})
            explanation = explain_query(q, result, self.speech_backend,
                                        locale=session.locale)
            self._clarify(session, timer, outcome, pending, ("name",),
                          reply_override=explanation.text)
            return
        if result.detail == "not_found:dish":
            subject = q.bindings["dish_name"]
            drop = "dish_name"
        else:
            subject = q.bindings["user_name"]
            drop = "user_name"
        outcome.notes.append(self._note(session, NoteStage.QUERY_OBSERVED,
                                        "query_observed_empty",
                                        kind=q.kind.value, subject=subject))
        pending = replace(merged, params={k: v for k, v in merged.params.items()
                                          if k != drop})
        explanation = explain_query(q, result, self.speech_backend, locale=session.locale)
        self._clarify(session, timer, outcome, pending, (drop,),
                      reply_override=explanation.text)

    # -- execution -------------------------------------------------------

    def _observe(self, session, outcome, result: QueryResult) -> None:
        q = result.source_query
        if q.kind is QueryKind.FETCH_DISH:
            summary = result.rows[0].name
        elif q.kind is QueryKind.FETCH_USER_NEEDS:
            profile = result.rows[0]
            summary = f"{profile.name}, targets {fmt_nutrients(profile.needs)}"
        elif q.kind is QueryKind.FILTER_SAFE_DISHES:
            summary = f"{len(result.rows)} allergen-safe dishes"
        else:
            summary = f"created user {q.bindings['name']}"
        outcome.notes.append(self._note(
            session, NoteStage.QUERY_OBSERVED, "query_observed_rows",
            kind=q.kind.value, rows=len(result.rows),
            row_word="row" if len(result.rows) == 1 else "rows", summary=summary))

    def _execute_intent(self, session, timer, outcome, merged: Intent) -> None:
        with timer.stage(PipelineStage.QUERY_GENERATION):
            plan = compile_intent(merged)
        outcome.notes.append(self._note(
            session, NoteStage.QUERY_PLANNED, "query_planned",
            count=len(plan), query_word="query" if len(plan) == 1 else "queries",
            queries=" | ".join(q.rendered_form for q in plan)))

        results: list[QueryResult] = []
        failed: Optional[QueryResult] = None
        with timer.stage(PipelineStage.QUERY_EXECUTION):
            for q in plan:
                result = execute(q, self.store)
                if not result.complete:
                    failed = result
                    break
                results.append(result)
        if failed is not None:
            self._replan_on_result(session, timer, outcome, merged, failed)
            return
        for result in results:
            self._observe(session, outcome, result)

        if merged.kind is IntentKind.USER_INSERTION:
            self._finish_user_insertion(session, timer, outcome, results[0])
        elif merged.kind is IntentKind.DISH_INFO:
            self._finish_dish_info(session, timer, outcome, results)
        else:
            self._finish_meal_preparation(session, timer, outcome, results)

        session.pending_intent = None
        session.replans_used = 0
        session.transition(SessionState.AWAITING_INPUT)

    def _finish_user_insertion(self, session, timer, outcome, result: QueryResult) -> None:
        with timer.stage(PipelineStage.QUERY_EXPLANATION):
            explanation = explain_query(result.source_query, result, self.speech_backend,
                                        locale=session.locale)
        outcome.notes.append(self._note(session, NoteStage.CONCLUSION, "conclusion_user",
                                        name=result.source_query.bindings["name"]))
        with timer.stage(PipelineStage.OUTER_SPEECH):
            outcome.reply_text = explanation.text

    def _finish_dish_info(self, session, timer, outcome, results: list[QueryResult]) -> None:
        dish_result = results[0]
        user: Optional[UserProfile] = results[1].rows[0] if len(results) > 1 else None
        with timer.stage(PipelineStage.QUERY_EXPLANATION):
            explanation = explain_query(dish_result.source_query, dish_result,
                                        self.speech_backend, user=user,
                                        locale=session.locale)
        warning_clause = ""
        if user is not None:
            warning_clause = load_templates(session.locale)["notes"][
                "conclusion_dish_warning"].format(user=user.name)
        outcome.notes.append(self._note(session, NoteStage.CONCLUSION, "conclusion_dish",
                                        dish=dish_result.rows[0].name,
                                        warning_clause=warning_clause))
        with timer.stage(PipelineStage.OUTER_SPEECH):
            outcome.reply_text = explanation.text

    def _finish_meal_preparation(self, session, timer, outcome,
                                 results: list[QueryResult]) -> None:
        profile: UserProfile = results[0].rows[0]
        safe_dishes = results[1].rows
        with timer.stage(PipelineStage.QUERY_EXPLANATION):
            filter_explanation = explain_query(
                results[1].source_query, results[1], self.speech_backend,
                user=profile, total=len(self.store.all_dishes()), locale=session.locale)

        config = self.solver_config
        outcome.notes.append(self._note(
            session, NoteStage.SOLVER_PLANNED, "solver_planned",
            max_dishes=config.max_dishes, dish_count=len(safe_dishes),
            targets=fmt_nutrients(profile.needs),
            threshold_pct=fmt_value(float(config.threshold) * 100)))

        with timer.stage(PipelineStage.SOLVER):
            report = solve(safe_dishes, profile.needs, config)

        if report.solutions:
            outcome.notes.append(self._note(
                session, NoteStage.SOLVER_OBSERVED, "solver_observed_found",
                count=len(report.solutions),
                plan_word="plan" if len(report.solutions) == 1 else "plans",
                best_pct=fmt_value(float(report.solutions[0].score) * 100)))
            with timer.stage(PipelineStage.SOLVER_EXPLANATION):
                solver_explanation = explain_solution(
                    report, profile.needs, self.speech_backend,
                    user_name=profile.name, locale=session.locale)
            outcome.plans = solver_explanation.structured["plans"]
            outcome.notes.append(self._note(
                session, NoteStage.CONCLUSION, "conclusion_meal",
                count=len(report.solutions),
                plan_word="plan" if len(report.solutions) == 1 else "plans",
                top_dishes=" + ".join(report.solutions[0].dish_names)))
            with timer.stage(PipelineStage.OUTER_SPEECH):
                outcome.reply_text = f"{filter_explanation.text}\n{solver_explanation.text}"
        else:
            outcome.notes.append(self._note(session, NoteStage.SOLVER_OBSERVED,
                                            "solver_observed_none"))
            message = no_solution_message(profile.name, config, session.locale)
            outcome.notes.append(self._note(
                session, NoteStage.CONCLUSION, "conclusion_refusal"))
            with timer.stage(PipelineStage.OUTER_SPEECH):
                outcome.reply_text = f"{filter_explanation.text}\n{message.text}"
