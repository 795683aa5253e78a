import { describe, expect, it } from "vitest";

import {
  extent,
  linearScale,
  logScale,
  padded,
  polylinePath,
  seriesColor,
  svgDocument,
  tickLabel,
  tickStep,
} from "../src/svg.js";

describe("tickStep", () => {
  it("picks 1-2-5 spacing near the requested count", () => {
    expect(tickStep(10, 5)).toBe(2);
    expect(tickStep(1, 5)).toBe(0.2);
    expect(tickStep(100, 4)).toBe(50);
    expect(tickStep(11, 6)).toBe(2);
  });
});

describe("linearScale", () => {
  it("maps the domain onto the range", () => {
    const s = linearScale([0, 10], [100, 300]);
    expect(s(0)).toBe(100);
    expect(s(10)).toBe(300);
    expect(s(5)).toBe(200);
  });

  it("inverts for descending ranges (screen y)", () => {
    const s = linearScale([0, 1], [400, 0]);
    expect(s(0)).toBe(400);
    expect(s(1)).toBe(0);
    expect(s(0.25)).toBe(300);
  });

  it("produces in-domain sorted ticks", () => {
    const ticks = linearScale([1, 12], [0, 1]).ticks();
    expect(ticks.length).toBeGreaterThanOrEqual(4);
    expect(ticks[0]!).toBeGreaterThanOrEqual(1);
    expect(ticks[ticks.length - 1]!).toBeLessThanOrEqual(12);
    expect([...ticks].sort((a, b) => a - b)).toEqual(ticks);
    // steps land on round values, no float crumbs in the labels
    for (const t of ticks) expect(`${t}`).not.toMatch(/000000|999999/);
  });
});

describe("logScale", () => {
  it("maps decades evenly", () => {
    const s = logScale([1, 100], [0, 200]);
    expect(s(1)).toBe(0);
    expect(s(10)).toBeCloseTo(100, 9);
    expect(s(100)).toBe(200);
  });

  it("ticks at powers of ten across wide domains", () => {
    const ticks = logScale([1e-9, 1e-3], [0, 1]).ticks();
    expect(ticks).toContain(1e-6);
    expect(ticks.length).toBe(7);
  });

  it("still produces ticks inside a single decade", () => {
    const ticks = logScale([1.6e7, 4.3e8], [0, 1]).ticks();
    expect(ticks.length).toBeGreaterThanOrEqual(2);
    const narrow = logScale([1.7e8, 2.7e8], [0, 1]).ticks();
    expect(narrow.length).toBeGreaterThanOrEqual(2);
  });

  it("rejects non-positive domains", () => {
    expect(() => logScale([0, 1], [0, 1])).toThrow(RangeError);
    expect(() => logScale([-1, 1], [0, 1])).toThrow(RangeError);
  });
});

describe("helpers", () => {
  it("extent finds both ends and rejects empty input", () => {
    expect(extent([3, -1, 7, 2])).toEqual([-1, 7]);
    expect(() => extent([])).toThrow(RangeError);
  });

  it("padded widens the domain on both sides", () => {
    const [lo, hi] = padded([0, 10], 0.1);
    expect(lo).toBeCloseTo(-1, 12);
    expect(hi).toBeCloseTo(11, 12);
    const [flo, fhi] = padded([5, 5], 0.1);
    expect(flo).toBeLessThan(5);
    expect(fhi).toBeGreaterThan(5);
  });

  it("tickLabel switches to powers for extreme magnitudes", () => {
    expect(tickLabel(5)).toBe("5");
    expect(tickLabel(0.2)).toBe("0.2");
    expect(tickLabel(1e-6)).toBe("1e-6");
    expect(tickLabel(2e8)).toBe("2x1e8");
    expect(tickLabel(0)).toBe("0");
  });

  it("polylinePath emits one move and then lines", () => {
    const d = polylinePath([0, 1, 2], [5, 6, 7]);
    expect(d).toBe("M 0 5 L 1 6 L 2 7");
  });

  it("seriesColor cycles the palette", () => {
    expect(seriesColor(0)).toBe(seriesColor(10));
    expect(seriesColor(1)).not.toBe(seriesColor(2));
  });
});

describe("svgDocument", () => {
  it("wraps the body in a standalone svg", () => {
    const doc = svgDocument(400, 300, "a title", "<g/>");
    expect(doc.startsWith("<?xml")).toBe(true);
    expect(doc).toContain('viewBox="0 0 400 300"');
    expect(doc).toContain("a title");
    expect(doc.trimEnd().endsWith("</svg>")).toBe(true);
  });
});
