import { describe, expect, it } from "vitest";

import { maxCite, parsePlan, PlanError, renderPlan } from "../src/plan.js";

const DEMO_PLAN =
  "Please generate 5 sentences in 200 words. Cite [1] on line 2. " +
  "Cite [2], [3] on line 3. Cite [4] on line 5.";

describe("parsePlan", () => {
  it("parses the worked-example plan", () => {
    const plan = parsePlan(DEMO_PLAN);
    expect(plan.numSentences).toBe(5);
    expect(plan.numWords).toBe(200);
    expect(plan.directives).toEqual([
      { line: 2, cites: [1] },
      { line: 3, cites: [2, 3] },
      { line: 5, cites: [4] },
    ]);
  });

  it("accepts a minimal plan", () => {
    expect(parsePlan("Please generate 1 sentences.")).toEqual({
      numSentences: 1,
      numWords: null,
      directives: [],
    });
  });

  it("treats 'at' and 'on' as equivalent", () => {
    const at = parsePlan("Please generate 3 sentences. Cite [1] at line 2.");
    const on = parsePlan("Please generate 3 sentences. Cite [1] on line 2.");
    expect(at).toEqual(on);
  });

  it("is case and whitespace flexible", () => {
    const plan = parsePlan("  PLEASE  GENERATE 2 SENTENCES .  cite [ 1 ],[2] AT LINE 1 .");
    expect(plan.numSentences).toBe(2);
    expect(plan.directives).toEqual([{ line: 1, cites: [1, 2] }]);
  });

  it("reports the failing offset for bad headers", () => {
    try {
      parsePlan("Write five sentences please.");
      expect.unreachable();
    } catch (error) {
      expect(error).toBeInstanceOf(PlanError);
      expect((error as PlanError).position).toBe(0);
    }
  });

  it("reports the failing offset for bad directives", () => {
    try {
      parsePlan("Please generate 2 sentences. And then?");
      expect.unreachable();
    } catch (error) {
      expect((error as PlanError).position).toBe(29);
    }
  });

  it("rejects out-of-range lines", () => {
    expect(() => parsePlan("Please generate 5 sentences. Cite [2] at line 9.")).toThrow(
      /line 9/,
    );
  });

  it("rejects duplicated (line, cite) pairs", () => {
    expect(() =>
      parsePlan("Please generate 3 sentences. Cite [1] at line 2. Cite [1] on line 2."),
    ).toThrow(/twice/);
  });
});

describe("renderPlan", () => {
  it("emits the canonical 'at line' form", () => {
    expect(
      renderPlan({ numSentences: 2, numWords: 50, directives: [{ line: 1, cites: [1] }] }),
    ).toBe("Please generate 2 sentences in 50 words. Cite [1] at line 1.");
  });

  it("round-trips through parsePlan", () => {
    const plans = [
      { numSentences: 1, numWords: null, directives: [] },
      { numSentences: 7, numWords: 120, directives: [{ line: 3, cites: [2, 5] }] },
      parsePlan(DEMO_PLAN),
    ];
    for (const plan of plans) {
      expect(parsePlan(renderPlan(plan))).toEqual(plan);
    }
  });
});

describe("maxCite", () => {
  it("finds the highest planned citation", () => {
    expect(maxCite(parsePlan(DEMO_PLAN))).toBe(4);
    expect(maxCite(parsePlan("Please generate 1 sentences."))).toBe(0);
  });
});
