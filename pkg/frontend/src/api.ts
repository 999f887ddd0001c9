/** Thin typed client for the advisor service. */

import type { TurnRecord } from "./model.js";

export interface SessionOptions {
  transparency?: boolean;
  replan_cap?: number;
}

export class ApiError extends Error {
  status: number;

  constructor(status: number, detail: string) {
    super(detail);
    this.status = status;
  }
}

async function detailOf(response: Response): Promise<string> {
  try {
    const body = await response.json();
    if (typeof body.detail === "string") return body.detail;
  } catch {
    // fall through to the generic message
  }
  return `request failed with status ${response.status}`;
}

export class AdvisorClient {
  constructor(private baseUrl: string = "http://localhost:8000") {}

  private async post<T>(path: string, payload: unknown): Promise<T> {
    const response = await fetch(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
    if (!response.ok) {
      throw new ApiError(response.status, await detailOf(response));
    }
    return response.json() as Promise<T>;
  }

  async createSession(options: SessionOptions = {}): Promise<string> {
    const body = await this.post<{ session_id: string }>("/sessions", options);
    return body.session_id;
  }

  sendMessage(sessionId: string, text: string): Promise<TurnRecord> {
    return this.post<TurnRecord>(`/sessions/${sessionId}/messages`, { text });
  }

  async transcript(sessionId: string): Promise<TurnRecord[]> {
    const response = await fetch(`${this.baseUrl}/sessions/${sessionId}/transcript`);
    if (!response.ok) {
      throw new ApiError(response.status, await detailOf(response));
    }
    return response.json() as Promise<TurnRecord[]>;
  }
}
