import type { MapPoint, Verdict } from "./types.js";

export type ColorKey = "venue" | "year";

export interface ViewTransform {
  k: number; // zoom factor on top of the fitted base scale
  tx: number;
  ty: number;
}

/**
 * Client view state: what is loaded, selected, highlighted and rated.
 * Every number displayed in the UI comes from an API response; this
 * object only remembers which responses are on screen.
 */
export class MapViewState {
  points: MapPoint[] = [];
  byId = new Map<string, MapPoint>();
  transform: ViewTransform = { k: 1, tx: 0, ty: 0 };
  selectedDocId: string | null = null;
  highlightSet = new Set<string>();
  colorKey: ColorKey = "venue";
  ratings = new Map<string, Verdict>();

  setPoints(points: MapPoint[]): void {
    this.points = points;
    this.byId = new Map(points.map((p) => [p.doc_id, p]));
    if (this.selectedDocId && !this.byId.has(this.selectedDocId)) {
      this.selectedDocId = null;
    }
    for (const docId of [...this.highlightSet]) {
      if (!this.byId.has(docId)) this.highlightSet.delete(docId);
    }
  }

  select(docId: string | null): void {
    if (docId !== null && !this.byId.has(docId)) {
      throw new Error(`selected document ${docId} is not on the map`);
    }
    this.selectedDocId = docId;
  }

  setHighlights(docIds: Iterable<string>): void {
    this.highlightSet = new Set([...docIds].filter((d) => this.byId.has(d)));
  }

  clearHighlights(): void {
    this.highlightSet.clear();
  }

  setRating(docId: string, verdict: Verdict): void {
    this.ratings.set(docId, verdict);
  }

  /** Category label used for coloring a point. */
  categoryOf(point: MapPoint): string {
    if (this.colorKey === "venue") return point.venue || "(none)";
    if (point.year == null) return "(no year)";
    const bucket = Math.floor(point.year / 5) * 5;
    return `${bucket}-${bucket + 4}`;
  }

  categories(): string[] {
    const seen = new Set<string>();
    for (const p of this.points) seen.add(this.categoryOf(p));
    return [...seen].sort();
  }
}

const PALETTE = [
  "#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2",
  "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
];

export function colorFor(category: string, categories: string[]): string {
  const index = Math.max(0, categories.indexOf(category));
  return PALETTE[index % PALETTE.length];
}
