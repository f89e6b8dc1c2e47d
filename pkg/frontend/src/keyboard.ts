/** Keyboard shortcuts for the review loop. */

export type ReviewAction = "accept" | "reject" | "skip" | "toggle-blind";

const BINDINGS: Record<string, ReviewAction> = {
  a: "accept",
  y: "accept",
  r: "reject",
  n: "reject",
  s: "skip",
  b: "toggle-blind",
};

/**
 * Map a keypress to a review action, or null if unbound. Modifier chords
 * are left alone so browser shortcuts keep working; single letters match
 * case-insensitively.
 */
export function actionForKey(evt: Pick<KeyboardEvent, "key" | "altKey" | "ctrlKey" | "metaKey">): ReviewAction | null {
  if (evt.altKey || evt.ctrlKey || evt.metaKey) return null;
  return BINDINGS[evt.key.toLowerCase()] ?? null;
}
