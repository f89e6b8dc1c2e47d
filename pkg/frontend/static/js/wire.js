/**
 * Parser and serializer for the review service's structured-text wire format.
 *
 * Records are blank-line separated blocks of `key=value` lines; values may
 * contain `=` (only the first one splits). Predictions carry their
 * explanations as `explanation.<i>.<field>` keys.
 */
export class WireError extends Error {
}
export function parseKvBlock(block) {
    const out = new Map();
    for (const raw of block.split("\n")) {
        const line = raw.trim();
        if (line === "")
            continue;
        const eq = line.indexOf("=");
        if (eq < 0)
            throw new WireError(`malformed wire line: ${raw}`);
        out.set(line.slice(0, eq), line.slice(eq + 1));
    }
    return out;
}
function need(fields, key) {
    const value = fields.get(key);
    if (value === undefined)
        throw new WireError(`missing field ${key}`);
    return value;
}
export function parsePrediction(block) {
    const fields = parseKvBlock(block);
    const explanations = [];
    for (let i = 1; fields.has(`explanation.${i}.path`); i++) {
        explanations.push({
            path: need(fields, `explanation.${i}.path`),
            alpha: Number(need(fields, `explanation.${i}.alpha`)),
            support: Number(need(fields, `explanation.${i}.support`)),
        });
    }
    return {
        id: need(fields, "id"),
        head: need(fields, "head"),
        relation: need(fields, "relation"),
        tail: need(fields, "tail"),
        score: Number(need(fields, "score")),
        status: need(fields, "status"),
        explanations,
    };
}
export function parsePredictionPage(body) {
    const blocks = body
        .split(/\n\n+/)
        .map((b) => b.trim())
        .filter((b) => b !== "");
    if (blocks.length === 0)
        throw new WireError("empty prediction response");
    const header = parseKvBlock(blocks[0]);
    return {
        total: Number(need(header, "total")),
        page: Number(need(header, "page")),
        pageSize: Number(need(header, "page_size")),
        items: blocks.slice(1).map(parsePrediction),
    };
}
export function parseStats(body) {
    return parseKvBlock(body);
}
/** Serialize an accept/reject decision for POST /api/decisions. */
export function renderDecision(predictionId, verdict, reviewer, elapsedMs) {
    if (!Number.isFinite(elapsedMs) || elapsedMs < 0) {
        throw new WireError(`bad elapsed_ms ${elapsedMs}`);
    }
    return (`prediction_id=${predictionId}\n` +
        `verdict=${verdict}\n` +
        `reviewer=${reviewer}\n` +
        `elapsed_ms=${Math.round(elapsedMs)}\n`);
}
