import { describe, expect, it } from "vitest";

import {
  normalizeBox,
  positionToBox,
  validateResourceList,
  type ResourceListDoc,
} from "../src/resourceList";

function doc(entries: ResourceListDoc["entries"]): ResourceListDoc {
  return { origin: "https://a.com/", width: 100, height: 80, entries };
}

describe("validateResourceList", () => {
  it("accepts a well-formed list", () => {
    const violations = validateResourceList(
      doc([
        { position: [[0, 0], [10, 10]], type: "image", url: "/x.png" },
        { position: [[5, 5], [50, 60]], type: "internal-link", url: "/about", text: "About" },
      ]),
    );
    expect(violations).toEqual([]);
  });

  it("reports out-of-order corners", () => {
    const violations = validateResourceList(
      doc([{ position: [[10, 0], [5, 10]], type: "image", url: "/x.png" }]),
    );
    expect(violations.map((v) => v.code)).toEqual(["box-order"]);
    expect(violations[0].entryIndex).toBe(0);
  });

  it("reports empty urls", () => {
    const violations = validateResourceList(
      doc([{ position: [[0, 0], [10, 10]], type: "image", url: "" }]),
    );
    expect(violations.map((v) => v.code)).toEqual(["empty-url"]);
  });

  it("reports negative and non-finite coordinates", () => {
    expect(
      validateResourceList(
        doc([{ position: [[-1, 0], [10, 10]], type: "image", url: "/x" }]),
      ).map((v) => v.code),
    ).toContain("box-negative");
    expect(
      validateResourceList(
        doc([{ position: [[0, 0], [Number.NaN, 10]], type: "image", url: "/x" }]),
      ).map((v) => v.code),
    ).toEqual(["box-nonfinite"]);
  });

  it("reports unknown kinds and bad page sizes", () => {
    const bad: ResourceListDoc = {
      origin: "https://a.com/",
      width: 0,
      height: 80,
      entries: [
        { position: [[0, 0], [1, 1]], type: "video" as never, url: "/v" },
      ],
    };
    const codes = validateResourceList(bad).map((v) => v.code);
    expect(codes).toContain("page-size");
    expect(codes).toContain("bad-kind");
  });
});

describe("normalizeBox", () => {
  it("orders corners", () => {
    expect(normalizeBox({ x1: 30, y1: 40, x2: 10, y2: 20 }, 100, 80)).toEqual({
      x1: 10,
      y1: 20,
      x2: 30,
      y2: 40,
    });
  });

  it("clamps into the page", () => {
    expect(normalizeBox({ x1: -20, y1: -5, x2: 120, y2: 90 }, 100, 80)).toEqual({
      x1: 0,
      y1: 0,
      x2: 100,
      y2: 80,
    });
  });

  it("round-trips through position pairs", () => {
    const box = { x1: 1, y1: 2, x2: 3, y2: 4 };
    expect(positionToBox([[1, 2], [3, 4]])).toEqual(box);
  });
});
