import { CurrentItem, SessionStats } from "./session.js";
import { ExplanationView } from "./wire.js";

// Rendering is plain HTML-string generation so it can be unit tested
// without a DOM; main.ts assigns the result to innerHTML.

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function explanationRows(explanations: ExplanationView[]): string {
  if (explanations.length === 0) {
    return '<p class="no-expl">No explanations for this prediction.</p>';
  }
  const rows = explanations
    .map(
      (e) =>
        `<tr><td class="path">${esc(e.path)}</td>` +
        `<td class="alpha">${(e.alpha * 100).toFixed(1)}%</td>` +
        `<td class="support">${e.support}</td></tr>`,
    )
    .join("");
  return (
    '<table class="explanations"><thead><tr>' +
    "<th>path</th><th>&alpha;</th><th>supports</th>" +
    `</tr></thead><tbody>${rows}</tbody></table>`
  );
}

export function renderItem(item: CurrentItem, blind: boolean): string {
  const p = item.prediction;
  const triple =
    `<div class="triple"><span class="head">${esc(p.head)}</span> ` +
    `<span class="relation">${esc(p.relation)}</span> ` +
    `<span class="tail">${esc(p.tail)}</span></div>`;
  const progress = `<div class="progress">${item.position} / ${item.position + item.pendingTotal - 1}</div>`;
  // blind mode: the paper's "without explanation" condition — triple only
  const explanations = blind
    ? '<p class="blind-note">Explanations hidden (blind mode)</p>'
    : explanationRows(p.explanations);
  const controls =
    '<div class="controls">' +
    '<button data-action="accept">Accept (a)</button>' +
    '<button data-action="reject">Reject (r)</button>' +
    '<button data-action="skip">Skip (s)</button>' +
    "</div>";
  return progress + triple + explanations + controls;
}

export function renderCompletion(exportUrl: string): string {
  return (
    '<div class="done"><p>Queue complete.</p>' +
    `<p><a href="${esc(exportUrl)}">Download accepted triples (TSV)</a></p></div>`
  );
}

export function renderStats(stats: SessionStats): string {
  const mode = stats.blind ? "blind" : "with explanations";
  return (
    '<div class="stats">' +
    `<span>${stats.decisions} decided</span>` +
    `<span>accept rate ${(stats.acceptRate * 100).toFixed(0)}%</span>` +
    `<span>${stats.meanSeconds.toFixed(1)} s/item</span>` +
    `<span class="mode">${mode}</span>` +
    "</div>"
  );
}
