export interface Snippet {
  before: string;
  match: string;
  after: string;
}

/** Text around an annotation span, clipped to `radius` characters per side. */
export function extractSnippet(
  text: string,
  span: [number, number],
  radius = 60,
): Snippet {
  const [start, end] = span;
  const from = Math.max(0, start - radius);
  const to = Math.min(text.length, end + radius);
  return {
    before: (from > 0 ? "…" : "") + text.slice(from, start),
    match: text.slice(start, end),
    after: text.slice(end, to) + (to < text.length ? "…" : ""),
  };
}
