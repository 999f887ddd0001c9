/** Shared DOM scaffolding for the app tests. */

import { AdvisorClient } from "../src/api.js";
import { ChatApp, type AppElements } from "../src/app.js";

export function buildChatDom(): AppElements {
  document.body.innerHTML = `
    <section id="conversation"></section>
    <p id="notice" class="hidden"></p>
    <input id="message-input" type="text" />
    <button id="send-button" type="button" disabled>Send</button>
    <input id="transparency-toggle" type="checkbox" checked />
  `;
  return {
    conversation: document.getElementById("conversation") as HTMLElement,
    input: document.getElementById("message-input") as HTMLInputElement,
    sendButton: document.getElementById("send-button") as HTMLButtonElement,
    transparencyToggle: document.getElementById("transparency-toggle") as HTMLInputElement,
    notice: document.getElementById("notice") as HTMLElement,
  };
}

export function buildApp(transparency: boolean): { app: ChatApp; elements: AppElements } {
  const elements = buildChatDom();
  elements.transparencyToggle.checked = transparency;
  const app = new ChatApp(document, elements, new AdvisorClient("http://mock"));
  app.start();
  return { app, elements };
}

/** All numeric tokens in an element, collected per text node so numbers
 * from adjacent cells never merge. */
export function numericTokens(node: Element): string[] {
  const tokens: string[] = [];
  const walker = document.createTreeWalker(node, NodeFilter.SHOW_TEXT);
  while (walker.nextNode()) {
    const text = walker.currentNode.textContent ?? "";
    tokens.push(...(text.match(/-?\d+(?:\.\d+)?/g) ?? []));
  }
  return tokens;
}

/** All numbers appearing anywhere in a JSON payload, stringified. */
export function payloadNumbers(value: unknown, out: Set<string> = new Set()): Set<string> {
  if (typeof value === "number") {
    out.add(String(value));
  } else if (Array.isArray(value)) {
    for (const item of value) payloadNumbers(item, out);
  } else if (value !== null && typeof value === "object") {
    for (const item of Object.values(value)) payloadNumbers(item, out);
  }
  return out;
}
