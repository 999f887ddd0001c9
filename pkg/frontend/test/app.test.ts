import { afterEach, describe, expect, it } from "vitest";

import { buildApp, numericTokens, payloadNumbers } from "./dom.js";
import { installMockServer, type MockServer } from "./mockServer.js";
import mealFixture from "./fixtures/meal_dialogue.json";
import opaqueFixture from "./fixtures/opaque_dialogue.json";
import clarifyFixture from "./fixtures/clarify_dialogue.json";

let server: MockServer | null = null;

afterEach(() => {
  server?.restore();
  server = null;
});

describe("scripted meal dialogue", () => {
  it("renders user and robot bubbles in order", async () => {
    server = installMockServer(mealFixture as never);
    const { app, elements } = buildApp(true);

    const script = mealFixture.turns.map((turn) => turn.utterance);
    for (const line of script) {
      await app.send(line);
    }

    const bubbles = elements.conversation.querySelectorAll(".turn");
    expect(bubbles.length).toBe(2 * script.length);
    bubbles.forEach((bubble, i) => {
      const expected = i % 2 === 0 ? "user" : "robot";
      expect(bubble.classList.contains(expected)).toBe(true);
    });
    for (let i = 0; i < script.length; i++) {
      expect(bubbles[2 * i].textContent).toContain(script[i]);
      expect(bubbles[2 * i + 1].textContent).toContain(
        mealFixture.turns[i].reply.split("\n")[0],
      );
    }
  });

  it("creates exactly one session and reuses it", async () => {
    server = installMockServer(mealFixture as never);
    const { app } = buildApp(true);
    for (const turn of mealFixture.turns) {
      await app.send(turn.utterance);
    }
    const calls = (fetch as unknown as { mock: { calls: unknown[][] } }).mock.calls;
    const creates = calls.filter(([url]) => String(url).endsWith("/sessions"));
    expect(creates.length).toBe(1);
  });

  it("shows plan cards whose numbers all come from the payload", async () => {
    server = installMockServer(mealFixture as never);
    const { app, elements } = buildApp(true);
    await app.send(mealFixture.turns[0].utterance);

    const cards = elements.conversation.querySelectorAll(".plan-card");
    expect(cards.length).toBe(mealFixture.turns[0].plans.length);
    const allowed = payloadNumbers(mealFixture.turns[0].plans);
    for (const card of cards) {
      for (const token of numericTokens(card)) {
        expect(allowed.has(token), `token ${token} not in payload`).toBe(true);
      }
    }
  });

  it("marks the clarification turn and resolves it on the follow-up", async () => {
    server = installMockServer(clarifyFixture as never);
    const { app, elements } = buildApp(true);
    await app.send(clarifyFixture.turns[0].utterance);
    expect(elements.conversation.querySelector(".turn.clarification")).not.toBeNull();
    await app.send(clarifyFixture.turns[1].utterance);
    const robots = elements.conversation.querySelectorAll(".turn.robot");
    expect(robots[robots.length - 1].classList.contains("clarification")).toBe(false);
  });
});

describe("inner speech transparency", () => {
  it("sends the flag at session creation and shows the panel", async () => {
    server = installMockServer(mealFixture as never);
    const { app, elements } = buildApp(true);
    await app.send(mealFixture.turns[0].utterance);
    expect(server.createOptions).toEqual({ transparency: true });
    const panel = elements.conversation.querySelector(".inner-speech");
    expect(panel).not.toBeNull();
    const stages = Array.from(panel!.querySelectorAll(".note-stage")).map(
      (node) => node.textContent,
    );
    expect(stages[0]).toBe("IntentReceived");
  });

  it("omits the panel when transparency is off", async () => {
    server = installMockServer(opaqueFixture as never);
    const { app, elements } = buildApp(false);
    await app.send(opaqueFixture.turns[0].utterance);
    expect(server.createOptions).toEqual({ transparency: false });
    expect(elements.conversation.querySelector(".inner-speech")).toBeNull();
    expect(elements.conversation.querySelectorAll(".turn.robot").length).toBe(1);
  });
});

describe("timing strip", () => {
  it("appears under each robot turn with one segment per stage", async () => {
    server = installMockServer(mealFixture as never);
    const { app, elements } = buildApp(true);
    await app.send(mealFixture.turns[0].utterance);
    const strip = elements.conversation.querySelector(".timing-strip");
    expect(strip).not.toBeNull();
    const stages = mealFixture.turns[0].timings.filter((t) => t.stage !== "TotalTurn");
    expect(strip!.querySelectorAll(".timing-segment").length).toBe(stages.length);
  });
});

describe("sending and failure handling", () => {
  it("disables send on empty input and enables it on text", () => {
    server = installMockServer(mealFixture as never);
    const { elements } = buildApp(true);
    expect(elements.sendButton.disabled).toBe(true);
    elements.input.value = "hello";
    elements.input.dispatchEvent(new Event("input"));
    expect(elements.sendButton.disabled).toBe(false);
    elements.input.value = "   ";
    elements.input.dispatchEvent(new Event("input"));
    expect(elements.sendButton.disabled).toBe(true);
  });

  it("ignores empty messages entirely", async () => {
    server = installMockServer(mealFixture as never);
    const { app, elements } = buildApp(true);
    await app.send("   ");
    expect(elements.conversation.querySelectorAll(".turn").length).toBe(0);
    expect(server.createOptions).toBeNull();
  });

  it("shows an inline notice on a 409 and keeps the transcript intact", async () => {
    server = installMockServer(mealFixture as never);
    const { app, elements } = buildApp(true);
    await app.send(mealFixture.turns[0].utterance);
    server.rejectNextWith409();
    await app.send("and one for Bruno");
    expect(elements.notice.textContent).toContain("Still thinking");
    // The rejected attempt leaves no bubble behind.
    expect(elements.conversation.querySelectorAll(".turn").length).toBe(2);
    // The session keeps working afterwards.
    await app.send(mealFixture.turns[1].utterance);
    expect(elements.conversation.querySelectorAll(".turn").length).toBe(4);
  });

  it("turns a transport failure into an error bubble with a working retry", async () => {
    server = installMockServer(mealFixture as never);
    const { app, elements } = buildApp(true);
    server.failNextRequest();
    await app.send(mealFixture.turns[0].utterance);

    const errorBubble = elements.conversation.querySelector(".turn.error");
    expect(errorBubble).not.toBeNull();
    expect(errorBubble!.textContent).toContain("Something went wrong");

    const retry = errorBubble!.querySelector(".retry-button") as HTMLButtonElement;
    retry.click();
    await new Promise((resolve) => setTimeout(resolve, 0));

    expect(elements.conversation.querySelector(".turn.error")).toBeNull();
    const robots = elements.conversation.querySelectorAll(".turn.robot");
    expect(robots.length).toBe(1);
    expect(robots[0].textContent).toContain(mealFixture.turns[0].reply.split("\n")[0]);
  });
});
