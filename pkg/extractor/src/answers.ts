/**
 * Answer-span extraction from a completion's text: the last \boxed{...}
 * expression when present, otherwise the trailing numeric token of the
 * final non-empty line. Mirrors the scoring toolkit's normalizer
 * assumptions without duplicating its parsing.
 */

const TRAILING_NUMBER = /[+-]?(?:\d{1,3}(?:,\d{3})+|\d+)(?:\.\d+)?%?\.?\s*$/;

function lastBoxed(text: string): string | null {
  let result: string | null = null;
  let from = 0;
  while (true) {
    const start = text.indexOf("\\boxed{", from);
    if (start === -1) return result;
    let depth = 1;
    let i = start + "\\boxed{".length;
    while (i < text.length && depth > 0) {
      if (text[i] === "{") depth++;
      else if (text[i] === "}") depth--;
      i++;
    }
    if (depth === 0) {
      result = text.slice(start + "\\boxed{".length, i - 1);
      from = i;
    } else {
      return result; // unbalanced tail; keep whatever we had
    }
  }
}

export function extractAnswerSpan(text: string): string {
  const boxed = lastBoxed(text);
  if (boxed !== null) {
    return `\\boxed{${boxed}}`;
  }
  const lines = text.split("\n").map((line) => line.trim()).filter((line) => line.length > 0);
  if (lines.length === 0) return "";
  const match = lines[lines.length - 1].match(TRAILING_NUMBER);
  if (match === null) return "";
  return match[0].trim().replace(/\.$/, "");
}
