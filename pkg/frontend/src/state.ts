import type { AnnotationDoc, UiLabel } from "./types.js";

/** Drags shorter than this are treated as accidental clicks. */
export const MIN_DRAG_PX = 3;

/** Serialized coordinates are quantized to this many decimals. */
const COORD_DECIMALS = 2;

function round2(v: number): number {
  const f = 10 ** COORD_DECIMALS;
  return Math.round(v * f) / f;
}

export function dragLength(x1: number, y1: number, x2: number, y2: number): number {
  return Math.hypot(x2 - x1, y2 - y1);
}

/** Squared distance from a point to a segment, for hit testing. */
export function distanceToSegment(
  px: number,
  py: number,
  label: UiLabel,
): number {
  const vx = label.x2 - label.x1;
  const vy = label.y2 - label.y1;
  const norm2 = vx * vx + vy * vy;
  let t = norm2 === 0 ? 0 : ((px - label.x1) * vx + (py - label.y1) * vy) / norm2;
  t = Math.max(0, Math.min(1, t));
  const cx = label.x1 + t * vx;
  const cy = label.y1 + t * vy;
  return Math.hypot(px - cx, py - cy);
}

/**
 * Label list with selection and a pure undo/redo snapshot stack.
 *
 * Every mutating operation pushes the previous label array (labels are
 * immutable once created), so n undos after n operations restore the
 * initial set exactly.
 */
export class LabelStore {
  private labels: readonly UiLabel[] = [];
  private undoStack: (readonly UiLabel[])[] = [];
  private redoStack: (readonly UiLabel[])[] = [];
  private nextId = 1;
  private selected: number | null = null;

  get count(): number {
    return this.labels.length;
  }

  get selectedId(): number | null {
    return this.selected;
  }

  all(): readonly UiLabel[] {
    return this.labels;
  }

  canUndo(): boolean {
    return this.undoStack.length > 0;
  }

  canRedo(): boolean {
    return this.redoStack.length > 0;
  }

  private commit(next: readonly UiLabel[]): void {
    this.undoStack.push(this.labels);
    this.redoStack = [];
    this.labels = next;
  }

  /** Returns the new label, or null when the drag is too short to count. */
  addFromDrag(x1: number, y1: number, x2: number, y2: number): UiLabel | null {
    if (dragLength(x1, y1, x2, y2) < MIN_DRAG_PX) {
      return null;
    }
    const label: UiLabel = { id: this.nextId++, x1, y1, x2, y2 };
    this.commit([...this.labels, label]);
    this.selected = label.id;
    return label;
  }

  select(id: number | null): void {
    this.selected = id !== null && this.labels.some((l) => l.id === id) ? id : null;
  }

  /** Select the label nearest to (x, y) within tolerance, if any. */
  selectAt(x: number, y: number, tolerancePx = 6): UiLabel | null {
    let best: UiLabel | null = null;
    let bestDist = tolerancePx;
    for (const label of this.labels) {
      const d = distanceToSegment(x, y, label);
      if (d <= bestDist) {
        best = label;
        bestDist = d;
      }
    }
    this.selected = best ? best.id : null;
    return best;
  }

  deleteSelected(): boolean {
    if (this.selected === null) {
      return false;
    }
    const id = this.selected;
    this.commit(this.labels.filter((l) => l.id !== id));
    this.selected = null;
    return true;
  }

  clear(): void {
    if (this.labels.length === 0) {
      return;
    }
    this.commit([]);
    this.selected = null;
  }

  undo(): boolean {
    const prev = this.undoStack.pop();
    if (prev === undefined) {
      return false;
    }
    this.redoStack.push(this.labels);
    this.labels = prev;
    this.selected = null;
    return true;
  }

  redo(): boolean {
    const next = this.redoStack.pop();
    if (next === undefined) {
      return false;
    }
    this.undoStack.push(this.labels);
    this.labels = next;
    this.selected = null;
    return true;
  }

  /** Exact annotation JSON schema document for the service. */
  serialize(imageId: string, width: number, height: number): AnnotationDoc {
    return {
      image: imageId,
      width,
      height,
      labels: this.labels.map((l) => ({
        x1: round2(l.x1),
        y1: round2(l.y1),
        x2: round2(l.x2),
        y2: round2(l.y2),
      })),
    };
  }

  /** Replace the label set from a stored document; starts a fresh history. */
  load(doc: AnnotationDoc): void {
    this.labels = doc.labels.map((l) => ({ id: this.nextId++, ...l }));
    this.undoStack = [];
    this.redoStack = [];
    this.selected = null;
  }
}
