import { describe, expect, it } from "vitest";

import { segment, sentenceSpan } from "../src/highlight.js";

describe("sentenceSpan", () => {
  it("locates the sentence inside the abstract", () => {
    const abstract = "First part here. Second part there. Third closes.";
    expect(sentenceSpan(abstract, "Second part there.")).toEqual([17, 35]);
  });

  it("returns null when the text is absent", () => {
    expect(sentenceSpan("Some abstract.", "Missing sentence.")).toBeNull();
  });
});

describe("segment", () => {
  it("splits text into marked and unmarked runs", () => {
    const text = "aaa bbb ccc";
    const segments = segment(text, [4, 7], [[0, 3]]);
    expect(segments).toEqual([
      { text: "aaa", sentence: false, keyword: true },
      { text: " ", sentence: false, keyword: false },
      { text: "bbb", sentence: true, keyword: false },
      { text: " ccc", sentence: false, keyword: false },
    ]);
    expect(segments.map((s) => s.text).join("")).toBe(text);
  });

  it("handles overlap of sentence and keyword marks", () => {
    const text = "xxyyzz";
    const segments = segment(text, [0, 4], [[2, 6]]);
    expect(segments).toEqual([
      { text: "xx", sentence: true, keyword: false },
      { text: "yy", sentence: true, keyword: true },
      { text: "zz", sentence: false, keyword: true },
    ]);
  });

  it("round-trips the full text with no spans", () => {
    const segments = segment("plain text", null, []);
    expect(segments).toEqual([{ text: "plain text", sentence: false, keyword: false }]);
  });
});
