/**
 * Fetch stub that replays recorded service responses.
 *
 * Each fixture was captured from the real HTTP API and contains the
 * session-creation exchange plus the turn records for a scripted dialogue.
 * The stub serves those bodies verbatim, in order, so the tests exercise
 * the client against genuine payloads without a live server.
 */

import { vi } from "vitest";

interface Fixture {
  create_request: Record<string, unknown>;
  create_response: { session_id: string };
  turns: Record<string, unknown>[];
}

export interface MockServer {
  /** Session options seen on POST /sessions, or null if never called. */
  createOptions: Record<string, unknown> | null;
  /** Force the next message POST to answer 409. */
  rejectNextWith409(): void;
  /** Force the next message POST to fail at the network layer. */
  failNextRequest(): void;
  restore(): void;
}

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

export function installMockServer(fixture: Fixture): MockServer {
  let turnCursor = 0;
  let pending409 = false;
  let pendingFailure = false;

  const state: MockServer = {
    createOptions: null,
    rejectNextWith409() {
      pending409 = true;
    },
    failNextRequest() {
      pendingFailure = true;
    },
    restore() {
      vi.unstubAllGlobals();
    },
  };

  const handler = async (input: RequestInfo | URL, init?: RequestInit): Promise<Response> => {
    const url = String(input);
    const method = init?.method ?? "GET";

    if (method === "POST" && url.endsWith("/sessions")) {
      state.createOptions = JSON.parse(String(init?.body ?? "{}"));
      return jsonResponse(fixture.create_response, 201);
    }
    if (method === "POST" && url.includes("/messages")) {
      if (pendingFailure) {
        pendingFailure = false;
        throw new TypeError("network connection lost");
      }
      if (pending409) {
        pending409 = false;
        return jsonResponse({ detail: "session is busy with a previous message" }, 409);
      }
      if (turnCursor >= fixture.turns.length) {
        return jsonResponse({ detail: "no more recorded turns" }, 500);
      }
      return jsonResponse(fixture.turns[turnCursor++]);
    }
    if (method === "GET" && url.includes("/transcript")) {
      return jsonResponse(fixture.turns.slice(0, turnCursor));
    }
    return jsonResponse({ detail: "not found" }, 404);
  };

  vi.stubGlobal("fetch", vi.fn(handler));
  return state;
}
