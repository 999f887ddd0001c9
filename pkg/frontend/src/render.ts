/**
 * Pure DOM builders for the chat view.
 *
 * Every number shown here is taken verbatim from the payload; formatting
 * means choosing where to put it, never recomputing it.
 */

import type { Note, Plan, StageTiming, ViewTurn } from "./model.js";

const NUTRIENT_ORDER = ["calories", "carbs", "proteins", "fats"];
const NUTRIENT_LABELS: Record<string, string> = {
  calories: "Calories",
  carbs: "Carbs",
  proteins: "Proteins",
  fats: "Fats",
};

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderPlanCard(doc: Document, plan: Plan): HTMLElement {
  const card = el(doc, "article", "plan-card");
  card.dataset.rank = String(plan.rank);

  const title = el(doc, "h3", "plan-title", `Plan ${plan.rank}: ${plan.dishes.join(", ")}`);
  card.appendChild(title);

  card.appendChild(el(doc, "p", "plan-score", `Total deviation ${plan.score_pct}%`));

  const table = el(doc, "table", "plan-nutrients");
  const head = el(doc, "tr");
  for (const label of ["Nutrient", "Total", "Deviation"]) {
    head.appendChild(el(doc, "th", undefined, label));
  }
  table.appendChild(head);
  for (const nutrient of NUTRIENT_ORDER) {
    const row = el(doc, "tr");
    row.appendChild(el(doc, "td", undefined, NUTRIENT_LABELS[nutrient] ?? nutrient));
    row.appendChild(el(doc, "td", "nutrient-total", String(plan.totals[nutrient])));
    row.appendChild(el(doc, "td", "nutrient-deviation", `${plan.deviations_pct[nutrient]}%`));
    table.appendChild(row);
  }
  card.appendChild(table);
  return card;
}

export function renderNotesPanel(doc: Document, notes: Note[]): HTMLElement {
  const panel = el(doc, "details", "inner-speech");
  panel.appendChild(el(doc, "summary", undefined, "Inner speech"));
  const list = el(doc, "ol", "inner-speech-notes");
  for (const note of notes) {
    const item = el(doc, "li", "inner-speech-note");
    item.appendChild(el(doc, "span", "note-stage", note.stage));
    item.appendChild(el(doc, "span", "note-text", note.text));
    list.appendChild(item);
  }
  panel.appendChild(list);
  return panel;
}

/** Horizontal bar where each stage gets a segment sized by its share of time. */
export function renderTimingStrip(doc: Document, timings: StageTiming[]): HTMLElement {
  const strip = el(doc, "div", "timing-strip");
  const stages = timings.filter((t) => t.stage !== "TotalTurn");
  const total = timings.find((t) => t.stage === "TotalTurn");
  const span = total ? total.seconds : stages.reduce((acc, t) => acc + t.seconds, 0);
  for (const timing of stages) {
    const segment = el(doc, "span", `timing-segment stage-${timing.stage}`);
    const share = span > 0 ? (100 * timing.seconds) / span : 0;
    segment.style.width = `${share}%`;
    segment.title = `${timing.stage}: ${timing.seconds}s`;
    segment.dataset.stage = timing.stage;
    segment.dataset.seconds = String(timing.seconds);
    strip.appendChild(segment);
  }
  if (total) {
    strip.dataset.totalSeconds = String(total.seconds);
  }
  return strip;
}

export function renderTurn(doc: Document, turn: ViewTurn, onRetry?: () => void): HTMLElement {
  const classes = ["turn", turn.direction];
  if (turn.clarification) classes.push("clarification");
  if (turn.error) classes.push("error");
  const bubble = el(doc, "div", classes.join(" "));

  bubble.appendChild(el(doc, "p", "turn-text", turn.text));

  for (const plan of turn.plans) {
    bubble.appendChild(renderPlanCard(doc, plan));
  }
  if (turn.notes.length > 0) {
    bubble.appendChild(renderNotesPanel(doc, turn.notes));
  }
  if (turn.timings.length > 0) {
    bubble.appendChild(renderTimingStrip(doc, turn.timings));
  }
  if (turn.error && onRetry) {
    const retry = el(doc, "button", "retry-button", "Retry");
    retry.type = "button";
    retry.addEventListener("click", onRetry);
    bubble.appendChild(retry);
  }
  return bubble;
}

export function renderConversation(
  doc: Document,
  container: HTMLElement,
  turns: ViewTurn[],
  onRetry?: () => void,
): void {
  container.replaceChildren();
  if (turns.length === 0) {
    const hint = el(
      doc,
      "p",
      "empty-hint",
      'No messages yet. Try "prepare a meal for Anna" or "what\'s in the lentil soup?".',
    );
    container.appendChild(hint);
    return;
  }
  for (const turn of turns) {
    container.appendChild(renderTurn(doc, turn, turn.error ? onRetry : undefined));
  }
}
