import { describe, expect, it } from "vitest";

import { MapViewState, colorFor } from "../src/state.js";
import type { MapPoint } from "../src/types.js";

const points: MapPoint[] = [
  { doc_id: "a", x: 0, y: 0, title: "A", year: 2001, venue: "J1" },
  { doc_id: "b", x: 1, y: 1, title: "B", year: 2014, venue: "J2" },
  { doc_id: "c", x: 2, y: 0, title: "C", year: null, venue: "" },
];

describe("MapViewState", () => {
  it("rejects selecting a document that is not in the payload", () => {
    const state = new MapViewState();
    state.setPoints(points);
    expect(() => state.select("nope")).toThrow();
    state.select("b");
    expect(state.selectedDocId).toBe("b");
  });

  it("drops a stale selection when new points arrive", () => {
    const state = new MapViewState();
    state.setPoints(points);
    state.select("c");
    state.setPoints(points.slice(0, 2));
    expect(state.selectedDocId).toBeNull();
  });

  it("filters highlights to known documents", () => {
    const state = new MapViewState();
    state.setPoints(points);
    state.setHighlights(["a", "ghost", "c"]);
    expect([...state.highlightSet].sort()).toEqual(["a", "c"]);
  });

  it("buckets years in fives and labels missing fields", () => {
    const state = new MapViewState();
    state.setPoints(points);
    state.colorKey = "year";
    expect(state.categoryOf(points[0])).toBe("2000-2004");
    expect(state.categoryOf(points[1])).toBe("2010-2014");
    expect(state.categoryOf(points[2])).toBe("(no year)");
    state.colorKey = "venue";
    expect(state.categoryOf(points[2])).toBe("(none)");
  });

  it("assigns stable distinct colors per category", () => {
    const categories = ["x", "y", "z"];
    const assigned = categories.map((c) => colorFor(c, categories));
    expect(new Set(assigned).size).toBe(3);
    expect(colorFor("y", categories)).toBe(assigned[1]);
  });
});
