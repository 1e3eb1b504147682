/** Split a text into plain/highlighted segments from codepoint spans.
 *
 * Span offsets from the API count Unicode codepoints, not UTF-16 units, so
 * the text is segmented via its codepoint array (emoji and astral-plane
 * homoglyphs would otherwise shift every following span).
 */

export interface Segment {
  text: string;
  highlighted: boolean;
}

export function segmentText(text: string, spans: [number, number][]): Segment[] {
  const codepoints = [...text];
  const sorted = [...spans]
    .filter(([start, end]) => end > start && start >= 0 && start < codepoints.length)
    .map(([start, end]): [number, number] => [start, Math.min(end, codepoints.length)])
    .sort((a, b) => a[0] - b[0]);

  const segments: Segment[] = [];
  let cursor = 0;
  for (const [start, end] of sorted) {
    if (start < cursor) continue; // overlapping spans were merged server-side
    if (start > cursor) {
      segments.push({ text: codepoints.slice(cursor, start).join(''), highlighted: false });
    }
    segments.push({ text: codepoints.slice(start, end).join(''), highlighted: true });
    cursor = end;
  }
  if (cursor < codepoints.length) {
    segments.push({ text: codepoints.slice(cursor).join(''), highlighted: false });
  }
  return segments;
}
