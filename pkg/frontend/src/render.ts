import { SessionQuery, SessionStatus } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderStatus(status: SessionStatus): string {
  const f1 =
    status.last_f1 === null ? "n/a" : status.last_f1.toFixed(3);
  return (
    `<div class="status">` +
    `<span>round ${status.round}</span>` +
    `<span>labeled ${status.labeled}</span>` +
    `<span>unlabeled ${status.unlabeled}</span>` +
    `<span>test F1 ${f1}</span>` +
    `</div>`
  );
}

/** Sentence view: one button per token (click cycles its tag) plus the
 * utility score explaining why this sentence was queried. */
export function renderQuery(query: SessionQuery, draft: string[]): string {
  const tokens = query.tokens
    .map((tok, i) => {
      const tag = draft[i] ?? tok.suggestion;
      const changed = tag !== tok.suggestion ? " changed" : "";
      return (
        `<button class="token${changed}" data-index="${i}">` +
        `<span class="surface">${escapeHtml(tok.surface)}</span>` +
        `<span class="tag">${escapeHtml(tag)}</span>` +
        `</button>`
      );
    })
    .join("");
  return (
    `<div class="query" data-sentence-id="${escapeHtml(query.sentence_id)}">` +
    `<div class="utility">utility ${query.utility.toFixed(4)}</div>` +
    `<div class="tokens">${tokens}</div>` +
    `</div>`
  );
}

export function renderPalette(labels: string[], active?: string): string {
  const buttons = labels
    .map((tag, i) => {
      const cls = tag === active ? "palette-tag active" : "palette-tag";
      const key = i < 9 ? `${i + 1}` : "";
      return (
        `<button class="${cls}" data-tag="${escapeHtml(tag)}">` +
        `${key ? `<kbd>${key}</kbd> ` : ""}${escapeHtml(tag)}</button>`
      );
    })
    .join("");
  return `<div class="palette">${buttons}</div>`;
}

export function renderExhausted(): string {
  return `<div class="done">Unlabeled pool exhausted.</div>`;
}
