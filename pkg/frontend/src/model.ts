/**
 * Client-side view of the advisor API payloads.
 *
 * These mirror the server's turn records one-to-one; the client never
 * recomputes a number, it only displays what the payload carries.
 */

export interface Note {
  stage: string;
  text: string;
}

export interface StageTiming {
  stage: string;
  seconds: number;
}

export interface Plan {
  rank: number;
  dishes: string[];
  dish_ids: string[];
  totals: Record<string, number>;
  deviations_pct: Record<string, number>;
  score_pct: number;
}

/** One turn as returned by POST /sessions/{id}/messages. */
export interface TurnRecord {
  session_id: string;
  turn_index: number;
  utterance: string;
  reply: string;
  intent_kind: string;
  awaiting_clarification: boolean;
  disclosed_notes: Note[];
  timings: StageTiming[];
  plans: Plan[];
}

export type Direction = "user" | "robot";

/** One chat bubble; robot turns carry the structured extras. */
export interface ViewTurn {
  direction: Direction;
  text: string;
  clarification: boolean;
  error: boolean;
  notes: Note[];
  timings: StageTiming[];
  plans: Plan[];
}

export function userTurn(text: string): ViewTurn {
  return {
    direction: "user",
    text,
    clarification: false,
    error: false,
    notes: [],
    timings: [],
    plans: [],
  };
}

export function robotTurn(record: TurnRecord): ViewTurn {
  return {
    direction: "robot",
    text: record.reply,
    clarification: record.awaiting_clarification,
    error: false,
    notes: record.disclosed_notes,
    timings: record.timings,
    plans: record.plans,
  };
}

export function errorTurn(text: string): ViewTurn {
  return {
    direction: "robot",
    text,
    clarification: false,
    error: true,
    notes: [],
    timings: [],
    plans: [],
  };
}

/** Rebuild the bubble list from a server transcript. */
export function turnsFromTranscript(records: TurnRecord[]): ViewTurn[] {
  const turns: ViewTurn[] = [];
  for (const record of records) {
    turns.push(userTurn(record.utterance));
    turns.push(robotTurn(record));
  }
  return turns;
}
