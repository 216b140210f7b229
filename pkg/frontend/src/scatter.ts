import { MapViewState, colorFor } from "./state.js";
import type { MapPoint } from "./types.js";

export interface Mark {
  doc_id: string;
  sx: number; // screen coordinates in CSS pixels
  sy: number;
}

const MARK_RADIUS = 4;
const HIT_RADIUS = 9;
const MARGIN = 24;

/**
 * Canvas scatter of the whole corpus. One mark per document, pan/zoom
 * preserved across data interactions, hover tooltips, click to select.
 * The mark list is maintained as plain data so behavior is testable
 * without reading pixels back.
 */
export class ScatterView {
  onSelect: (docId: string | null) => void = () => {};
  onHover: (docId: string | null) => void = () => {};

  private ctx: CanvasRenderingContext2D | null;
  private base = { sx: 1, sy: 1, xMin: 0, yMin: 0 };
  private dragging = false;
  private dragMoved = false;
  private lastPointer = { x: 0, y: 0 };
  private hovered: string | null = null;

  constructor(
    private canvas: HTMLCanvasElement,
    public state: MapViewState,
    private width = 800,
    private height = 600,
  ) {
    this.canvas.width = width;
    this.canvas.height = height;
    this.ctx = canvas.getContext ? canvas.getContext("2d") : null;
    canvas.addEventListener("pointerdown", this.pointerDown);
    canvas.addEventListener("pointermove", this.pointerMove);
    canvas.addEventListener("pointerup", this.pointerUp);
    canvas.addEventListener("wheel", this.wheel, { passive: false });
  }

  setData(points: MapPoint[]): void {
    this.state.setPoints(points);
    this.fit();
    this.render();
  }

  /** Fit the data bounding box into the canvas with a margin. */
  private fit(): void {
    const pts = this.state.points;
    if (!pts.length) return;
    const xs = pts.map((p) => p.x);
    const ys = pts.map((p) => p.y);
    const xMin = Math.min(...xs);
    const xMax = Math.max(...xs);
    const yMin = Math.min(...ys);
    const yMax = Math.max(...ys);
    const spanX = xMax - xMin || 1;
    const spanY = yMax - yMin || 1;
    this.base = {
      sx: (this.width - 2 * MARGIN) / spanX,
      sy: (this.height - 2 * MARGIN) / spanY,
      xMin,
      yMin,
    };
  }

  toScreen(p: MapPoint): [number, number] {
    const { k, tx, ty } = this.state.transform;
    const bx = MARGIN + (p.x - this.base.xMin) * this.base.sx;
    const by = this.height - MARGIN - (p.y - this.base.yMin) * this.base.sy;
    return [bx * k + tx, by * k + ty];
  }

  /** Every rendered mark; cardinality always equals the loaded payload. */
  marks(): Mark[] {
    return this.state.points.map((p) => {
      const [sx, sy] = this.toScreen(p);
      return { doc_id: p.doc_id, sx, sy };
    });
  }

  hitTest(sx: number, sy: number): string | null {
    let best: string | null = null;
    let bestDist = HIT_RADIUS * HIT_RADIUS;
    for (const mark of this.marks()) {
      const dx = mark.sx - sx;
      const dy = mark.sy - sy;
      const d2 = dx * dx + dy * dy;
      if (d2 <= bestDist) {
        best = mark.doc_id;
        bestDist = d2;
      }
    }
    return best;
  }

  zoomAt(sx: number, sy: number, factor: number): void {
    const t = this.state.transform;
    const k = Math.min(50, Math.max(0.2, t.k * factor));
    const real = k / t.k;
    t.tx = sx - real * (sx - t.tx);
    t.ty = sy - real * (sy - t.ty);
    t.k = k;
    this.render();
  }

  panBy(dx: number, dy: number): void {
    this.state.transform.tx += dx;
    this.state.transform.ty += dy;
    this.render();
  }

  render(): void {
    const ctx = this.ctx;
    if (!ctx) return; // headless test environment: geometry still works
    ctx.clearRect(0, 0, this.width, this.height);
    const categories = this.state.categories();
    for (const p of this.state.points) {
      const [sx, sy] = this.toScreen(p);
      const selected = p.doc_id === this.state.selectedDocId;
      const highlighted = this.state.highlightSet.has(p.doc_id);
      ctx.beginPath();
      ctx.arc(sx, sy, selected ? MARK_RADIUS + 2 : MARK_RADIUS, 0, 2 * Math.PI);
      ctx.fillStyle = colorFor(this.state.categoryOf(p), categories);
      ctx.globalAlpha = this.state.highlightSet.size && !highlighted && !selected ? 0.25 : 0.9;
      ctx.fill();
      ctx.globalAlpha = 1;
      if (highlighted) {
        ctx.beginPath();
        ctx.arc(sx, sy, MARK_RADIUS + 4, 0, 2 * Math.PI);
        ctx.strokeStyle = "#111";
        ctx.lineWidth = 1.5;
        ctx.stroke();
      }
      if (selected) {
        ctx.beginPath();
        ctx.arc(sx, sy, MARK_RADIUS + 6, 0, 2 * Math.PI);
        ctx.strokeStyle = "#d62728";
        ctx.lineWidth = 2;
        ctx.stroke();
      }
      const verdict = this.state.ratings.get(p.doc_id);
      if (verdict) {
        ctx.beginPath();
        ctx.arc(sx + MARK_RADIUS + 2, sy - MARK_RADIUS - 2, 2.5, 0, 2 * Math.PI);
        ctx.fillStyle = verdict === "relevant" ? "#2ca02c" : "#d62728";
        ctx.fill();
      }
    }
  }

  private pointerDown = (ev: PointerEvent): void => {
    this.dragging = true;
    this.dragMoved = false;
    this.lastPointer = { x: ev.offsetX, y: ev.offsetY };
  };

  private pointerMove = (ev: PointerEvent): void => {
    if (this.dragging) {
      const dx = ev.offsetX - this.lastPointer.x;
      const dy = ev.offsetY - this.lastPointer.y;
      if (Math.abs(dx) + Math.abs(dy) > 2) this.dragMoved = true;
      this.lastPointer = { x: ev.offsetX, y: ev.offsetY };
      this.panBy(dx, dy);
      return;
    }
    const hit = this.hitTest(ev.offsetX, ev.offsetY);
    if (hit !== this.hovered) {
      this.hovered = hit;
      this.onHover(hit);
    }
  };

  private pointerUp = (ev: PointerEvent): void => {
    const wasDrag = this.dragMoved;
    this.dragging = false;
    this.dragMoved = false;
    if (wasDrag) return;
    const hit = this.hitTest(ev.offsetX, ev.offsetY);
    if (hit) {
      this.state.select(hit);
      this.render();
      this.onSelect(hit);
    }
  };

  private wheel = (ev: WheelEvent): void => {
    ev.preventDefault();
    this.zoomAt(ev.offsetX, ev.offsetY, ev.deltaY < 0 ? 1.15 : 1 / 1.15);
  };
}
