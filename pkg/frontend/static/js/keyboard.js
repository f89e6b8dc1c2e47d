/** Keyboard shortcuts for the review loop. */
const BINDINGS = {
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
export function actionForKey(evt) {
    if (evt.altKey || evt.ctrlKey || evt.metaKey)
        return null;
    return BINDINGS[evt.key.toLowerCase()] ?? null;
}
