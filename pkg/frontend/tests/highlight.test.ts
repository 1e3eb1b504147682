import { describe, expect, it } from 'vitest';

import { segmentText } from '../src/highlight.js';

describe('segmentText', () => {
  it('splits around a single span', () => {
    expect(segmentText('the event is nice', [[4, 9]])).toEqual([
      { text: 'the ', highlighted: false },
      { text: 'event', highlighted: true },
      { text: ' is nice', highlighted: false },
    ]);
  });

  it('handles spans at the edges', () => {
    expect(segmentText('abc', [[0, 1]])).toEqual([
      { text: 'a', highlighted: true },
      { text: 'bc', highlighted: false },
    ]);
    expect(segmentText('abc', [[2, 3]])).toEqual([
      { text: 'ab', highlighted: false },
      { text: 'c', highlighted: true },
    ]);
  });

  it('returns one plain segment with no spans', () => {
    expect(segmentText('plain', [])).toEqual([{ text: 'plain', highlighted: false }]);
  });

  it('counts codepoints, not UTF-16 units', () => {
    // the emoji is one codepoint but two UTF-16 units
    const text = 'a 🌀 b';
    expect(segmentText(text, [[2, 3]])).toEqual([
      { text: 'a ', highlighted: false },
      { text: '🌀', highlighted: true },
      { text: ' b', highlighted: false },
    ]);
  });

  it('clamps out-of-range spans instead of breaking', () => {
    expect(segmentText('abc', [[2, 99]])).toEqual([
      { text: 'ab', highlighted: false },
      { text: 'c', highlighted: true },
    ]);
    expect(segmentText('abc', [[99, 120]])).toEqual([{ text: 'abc', highlighted: false }]);
  });

  it('drops empty and overlapping leftovers deterministically', () => {
    expect(segmentText('abcdef', [[1, 3], [2, 4]])).toEqual([
      { text: 'a', highlighted: false },
      { text: 'bc', highlighted: true },
      { text: 'def', highlighted: false },
    ]);
    expect(segmentText('abc', [[1, 1]])).toEqual([{ text: 'abc', highlighted: false }]);
  });

  it('round-trips the original text', () => {
    const text = 'the quiet 🌀 harbor at dawn';
    const joined = segmentText(text, [[4, 9], [10, 11]])
      .map((segment) => segment.text)
      .join('');
    expect(joined).toBe(text);
  });
});
