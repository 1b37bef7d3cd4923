/** Text highlighting: compose the best-sentence span with keyword spans.
 *
 * Output is a flat list of segments, each carrying flags for which marks
 * cover it; the renderer maps flags to CSS classes (sentence highlight and
 * keyword highlight use distinct colors and may overlap).
 */

export interface Segment {
  text: string;
  sentence: boolean;
  keyword: boolean;
}

export type Span = [number, number];

/** Locate the best sentence inside the abstract; sentences are contiguous
 * spans of the abstract so an exact substring search finds them. */
export function sentenceSpan(abstract: string, sentence: string): Span | null {
  const start = abstract.indexOf(sentence);
  if (start === -1) return null;
  return [start, start + sentence.length];
}

export function segment(
  text: string,
  sentence: Span | null,
  keywords: Span[],
): Segment[] {
  const cuts = new Set<number>([0, text.length]);
  if (sentence) {
    cuts.add(sentence[0]);
    cuts.add(sentence[1]);
  }
  for (const [start, end] of keywords) {
    cuts.add(start);
    cuts.add(end);
  }
  const points = [...cuts].filter((p) => p >= 0 && p <= text.length).sort((a, b) => a - b);
  const inSentence = (p: number) => sentence !== null && p >= sentence[0] && p < sentence[1];
  const inKeyword = (p: number) => keywords.some(([s, e]) => p >= s && p < e);
  const segments: Segment[] = [];
  for (let i = 0; i + 1 < points.length; i += 1) {
    const [start, end] = [points[i], points[i + 1]];
    if (start === end) continue;
    segments.push({
      text: text.slice(start, end),
      sentence: inSentence(start),
      keyword: inKeyword(start),
    });
  }
  return segments;
}

export function renderSegments(segments: Segment[]): DocumentFragment {
  const fragment = document.createDocumentFragment();
  for (const seg of segments) {
    if (!seg.sentence && !seg.keyword) {
      fragment.appendChild(document.createTextNode(seg.text));
      continue;
    }
    const mark = document.createElement("mark");
    const classes = [];
    if (seg.sentence) classes.push("hl-sentence");
    if (seg.keyword) classes.push("hl-keyword");
    mark.className = classes.join(" ");
    mark.textContent = seg.text;
    fragment.appendChild(mark);
  }
  return fragment;
}
