/**
 * Chat application state and wiring.
 *
 * One browser tab owns one session. The transparency choice is made once,
 * at session creation, because the server fixes it per session.
 */

import { AdvisorClient, ApiError } from "./api.js";
import { ViewTurn, errorTurn, robotTurn, userTurn } from "./model.js";
import { renderConversation } from "./render.js";

export interface AppElements {
  conversation: HTMLElement;
  input: HTMLInputElement;
  sendButton: HTMLButtonElement;
  transparencyToggle: HTMLInputElement;
  notice: HTMLElement;
}

export class ChatApp {
  private sessionId: string | null = null;
  private turns: ViewTurn[] = [];
  private inFlight = false;
  private noticeText = "";
  private lastFailedText: string | null = null;

  constructor(
    private doc: Document,
    private elements: AppElements,
    private client: AdvisorClient,
  ) {}

  get transparency(): boolean {
    return this.elements.transparencyToggle.checked;
  }

  start(): void {
    const { input, sendButton, transparencyToggle } = this.elements;
    sendButton.addEventListener("click", () => {
      void this.send(input.value);
    });
    input.addEventListener("keydown", (event: KeyboardEvent) => {
      if (event.key === "Enter") void this.send(input.value);
    });
    input.addEventListener("input", () => this.refreshControls());
    transparencyToggle.addEventListener("change", () => {
      // A new transparency choice only applies to a fresh session.
      this.reset();
    });
    this.render();
  }

  /** Drop the session so the next message starts a new one. */
  reset(): void {
    this.sessionId = null;
    this.turns = [];
    this.lastFailedText = null;
    this.render();
  }

  async send(rawText: string): Promise<void> {
    const text = rawText.trim();
    if (text === "") return;
    if (this.inFlight) {
      this.showNotice("Still thinking about the previous message.");
      return;
    }
    this.inFlight = true;
    this.noticeText = "";
    this.lastFailedText = null;
    this.turns.push(userTurn(text));
    this.elements.input.value = "";
    this.render();
    try {
      if (this.sessionId === null) {
        this.sessionId = await this.client.createSession({
          transparency: this.transparency,
        });
      }
      const record = await this.client.sendMessage(this.sessionId, text);
      this.turns.push(robotTurn(record));
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        this.turns.pop();
        this.showNotice("Still thinking about the previous message.");
      } else {
        const detail = error instanceof Error ? error.message : String(error);
        this.turns.push(errorTurn(`Something went wrong: ${detail}`));
        this.lastFailedText = text;
      }
    } finally {
      this.inFlight = false;
      this.render();
    }
  }

  retryLast(): void {
    const text = this.lastFailedText;
    if (text === null) return;
    // Remove the error bubble and the failed user bubble before resending.
    this.turns.pop();
    this.turns.pop();
    this.lastFailedText = null;
    void this.send(text);
  }

  viewTurns(): readonly ViewTurn[] {
    return this.turns;
  }

  private showNotice(message: string): void {
    this.noticeText = message;
    this.refreshControls();
  }

  private refreshControls(): void {
    const empty = this.elements.input.value.trim() === "";
    this.elements.input.disabled = this.inFlight;
    this.elements.sendButton.disabled = this.inFlight || empty;
    this.elements.notice.textContent = this.noticeText;
    this.elements.notice.classList.toggle("hidden", this.noticeText === "");
  }

  private render(): void {
    renderConversation(this.doc, this.elements.conversation, this.turns, () =>
      this.retryLast(),
    );
    this.refreshControls();
  }
}

export function mount(doc: Document, client?: AdvisorClient): ChatApp {
  const elements: AppElements = {
    conversation: doc.getElementById("conversation") as HTMLElement,
    input: doc.getElementById("message-input") as HTMLInputElement,
    sendButton: doc.getElementById("send-button") as HTMLButtonElement,
    transparencyToggle: doc.getElementById("transparency-toggle") as HTMLInputElement,
    notice: doc.getElementById("notice") as HTMLElement,
  };
  const app = new ChatApp(doc, elements, client ?? new AdvisorClient());
  app.start();
  return app;
}
