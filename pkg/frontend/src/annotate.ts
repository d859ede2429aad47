/**
 * Bounding-box annotation over a page design image.
 *
 * AnnotationSession holds the working copy of the resource list in page
 * coordinates (zoom never leaks into the data); the DOM binding translates
 * pointer positions into page space and repaints an overlay canvas.
 */

import type { WorkbenchClient } from "./api";
import { ApiError } from "./api";
import {
  Box,
  RESOURCE_KINDS,
  ResourceEntry,
  ResourceKind,
  ResourceListDoc,
  Violation,
  boxToPosition,
  normalizeBox,
  positionToBox,
  validateResourceList,
} from "./resourceList";

export interface DraftEntry {
  box: Box;
  kind: ResourceKind;
  url: string;
  text: string;
}

const MIN_DRAW_SIZE = 2; // page px; smaller drags are treated as clicks

export class AnnotationSession {
  entries: DraftEntry[] = [];
  selected: number | null = null;
  dirty = false;
  private draft: Box | null = null;

  constructor(
    public readonly pageId: string,
    public origin: string,
    public readonly width: number,
    public readonly height: number,
  ) {}

  static fromDocument(pageId: string, doc: ResourceListDoc): AnnotationSession {
    const session = new AnnotationSession(pageId, doc.origin, doc.width, doc.height);
    session.entries = doc.entries.map((entry) => ({
      box: positionToBox(entry.position),
      kind: entry.type,
      url: entry.url,
      text: entry.text ?? "",
    }));
    return session;
  }

  toDocument(): ResourceListDoc {
    return {
      origin: this.origin,
      width: this.width,
      height: this.height,
      entries: this.entries.map((draft) => {
        const entry: ResourceEntry = {
          position: boxToPosition(draft.box),
          type: draft.kind,
          url: draft.url,
        };
        if (draft.text.trim() !== "") {
          entry.text = draft.text;
        }
        return entry;
      }),
    };
  }

  /** Begin drawing a new box at a page-space point. */
  beginDraw(x: number, y: number): void {
    this.draft = { x1: x, y1: y, x2: x, y2: y };
  }

  dragTo(x: number, y: number): void {
    if (this.draft) {
      this.draft.x2 = x;
      this.draft.y2 = y;
    }
  }

  /** Finish the draft; boxes are clamped into the page. Returns the new index. */
  endDraw(): number | null {
    if (!this.draft) {
      return null;
    }
    const box = normalizeBox(this.draft, this.width, this.height);
    this.draft = null;
    if (box.x2 - box.x1 < MIN_DRAW_SIZE || box.y2 - box.y1 < MIN_DRAW_SIZE) {
      return null;
    }
    this.entries.push({ box, kind: "image", url: "", text: "" });
    this.selected = this.entries.length - 1;
    this.dirty = true;
    return this.selected;
  }

  get draftBox(): Box | null {
    return this.draft;
  }

  select(index: number | null): void {
    this.selected = index;
  }

  /** Index of the topmost entry containing the point, or null. */
  hitTest(x: number, y: number): number | null {
    for (let i = this.entries.length - 1; i >= 0; i--) {
      const b = this.entries[i].box;
      if (x >= b.x1 && x <= b.x2 && y >= b.y1 && y <= b.y2) {
        return i;
      }
    }
    return null;
  }

  updateSelected(patch: Partial<Omit<DraftEntry, "box">>): void {
    if (this.selected === null) {
      return;
    }
    Object.assign(this.entries[this.selected], patch);
    this.dirty = true;
  }

  /** Drag one edge of the selected box; the result is clamped into the page. */
  dragEdge(edge: "left" | "right" | "top" | "bottom", to: number): void {
    if (this.selected === null) {
      return;
    }
    const box = { ...this.entries[this.selected].box };
    if (edge === "left") box.x1 = to;
    else if (edge === "right") box.x2 = to;
    else if (edge === "top") box.y1 = to;
    else box.y2 = to;
    this.entries[this.selected].box = normalizeBox(box, this.width, this.height);
    this.dirty = true;
  }

  moveSelected(dx: number, dy: number): void {
    if (this.selected === null) {
      return;
    }
    const b = this.entries[this.selected].box;
    const moved = { x1: b.x1 + dx, y1: b.y1 + dy, x2: b.x2 + dx, y2: b.y2 + dy };
    this.entries[this.selected].box = normalizeBox(moved, this.width, this.height);
    this.dirty = true;
  }

  deleteSelected(): void {
    if (this.selected === null) {
      return;
    }
    this.entries.splice(this.selected, 1);
    this.selected = null;
    this.dirty = true;
  }

  validate(): Violation[] {
    return validateResourceList(this.toDocument());
  }

  get canSave(): boolean {
    return this.validate().length === 0;
  }
}

/** Convert canvas-space coordinates into page space at the given zoom. */
export function toPageCoords(canvasX: number, canvasY: number, zoom: number): [number, number] {
  return [canvasX / zoom, canvasY / zoom];
}

interface Painter {
  clearRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
}

/** Repaint every box (selected one highlighted) plus the in-progress draft. */
export function paintOverlay(
  ctx: Painter,
  session: AnnotationSession,
  zoom: number,
): void {
  ctx.clearRect(0, 0, session.width * zoom, session.height * zoom);
  session.entries.forEach((entry, i) => {
    ctx.lineWidth = i === session.selected ? 3 : 1.5;
    ctx.strokeStyle = i === session.selected ? "#ff3b30" : "#0466c8";
    const b = entry.box;
    ctx.strokeRect(b.x1 * zoom, b.y1 * zoom, (b.x2 - b.x1) * zoom, (b.y2 - b.y1) * zoom);
  });
  const draft = session.draftBox;
  if (draft) {
    const b = normalizeBox(draft, session.width, session.height);
    ctx.lineWidth = 1;
    ctx.strokeStyle = "#888888";
    ctx.strokeRect(b.x1 * zoom, b.y1 * zoom, (b.x2 - b.x1) * zoom, (b.y2 - b.y1) * zoom);
  }
}

/** Wire the annotation view into `root` and return the live session. */
export async function mountAnnotator(
  root: HTMLElement,
  api: WorkbenchClient,
  pageId: string,
): Promise<AnnotationSession> {
  const doc = await api.getResources(pageId);
  const session = AnnotationSession.fromDocument(pageId, doc);
  let zoom = 1;

  root.innerHTML = `
    <div class="annotator">
      <div class="toolbar">
        <label>Zoom <input type="range" min="0.25" max="3" step="0.25" value="1" class="zoom"></label>
        <button class="save" disabled>Save</button>
        <button class="delete">Delete box</button>
        <span class="status"></span>
      </div>
      <div class="stage" style="position: relative">
        <img class="design" src="${api.pageImageUrl(pageId)}" draggable="false" alt="page design">
        <canvas class="overlay" style="position: absolute; left: 0; top: 0"></canvas>
      </div>
      <div class="inspector">
        <label>Kind <select class="kind">${RESOURCE_KINDS.map(
          (kind) => `<option value="${kind}">${kind}</option>`,
        ).join("")}</select></label>
        <label>URL <input type="text" class="url" placeholder="https://..."></label>
        <label>Text <input type="text" class="text"></label>
        <div class="violations" role="alert"></div>
      </div>
    </div>`;

  const canvas = root.querySelector<HTMLCanvasElement>(".overlay")!;
  const image = root.querySelector<HTMLImageElement>(".design")!;
  const saveButton = root.querySelector<HTMLButtonElement>(".save")!;
  const deleteButton = root.querySelector<HTMLButtonElement>(".delete")!;
  const kindSelect = root.querySelector<HTMLSelectElement>(".kind")!;
  const urlInput = root.querySelector<HTMLInputElement>(".url")!;
  const textInput = root.querySelector<HTMLInputElement>(".text")!;
  const violationsBox = root.querySelector<HTMLDivElement>(".violations")!;
  const status = root.querySelector<HTMLSpanElement>(".status")!;
  const zoomInput = root.querySelector<HTMLInputElement>(".zoom")!;

  function resize(): void {
    canvas.width = session.width * zoom;
    canvas.height = session.height * zoom;
    image.style.width = `${session.width * zoom}px`;
    image.style.height = `${session.height * zoom}px`;
  }

  function refresh(): void {
    let ctx: CanvasRenderingContext2D | null = null;
    try {
      ctx = canvas.getContext("2d");
    } catch {
      // canvas unavailable (e.g. non-browser DOM); state still updates
    }
    if (ctx) {
      paintOverlay(ctx, session, zoom);
    }
    const violations = session.validate();
    violationsBox.textContent = violations.map((v) => v.message).join("; ");
    saveButton.disabled = violations.length > 0;
    const entry = session.selected !== null ? session.entries[session.selected] : null;
    kindSelect.value = entry?.kind ?? "image";
    urlInput.value = entry?.url ?? "";
    textInput.value = entry?.text ?? "";
    status.textContent = session.dirty ? "unsaved changes" : "saved";
  }

  function pointer(event: MouseEvent): [number, number] {
    const rect = canvas.getBoundingClientRect();
    return toPageCoords(event.clientX - rect.left, event.clientY - rect.top, zoom);
  }

  let drawing = false;
  canvas.addEventListener("mousedown", (event) => {
    const [x, y] = pointer(event);
    const hit = session.hitTest(x, y);
    if (hit !== null) {
      session.select(hit);
    } else {
      drawing = true;
      session.beginDraw(x, y);
    }
    refresh();
  });
  canvas.addEventListener("mousemove", (event) => {
    if (drawing) {
      const [x, y] = pointer(event);
      session.dragTo(x, y);
      refresh();
    }
  });
  canvas.addEventListener("mouseup", () => {
    if (drawing) {
      drawing = false;
      session.endDraw();
      refresh();
    }
  });

  kindSelect.addEventListener("change", () => {
    session.updateSelected({ kind: kindSelect.value as ResourceKind });
    refresh();
  });
  urlInput.addEventListener("input", () => {
    session.updateSelected({ url: urlInput.value });
    refresh();
  });
  textInput.addEventListener("input", () => {
    session.updateSelected({ text: textInput.value });
    refresh();
  });
  deleteButton.addEventListener("click", () => {
    session.deleteSelected();
    refresh();
  });
  zoomInput.addEventListener("input", () => {
    zoom = Number(zoomInput.value) || 1;
    resize();
    refresh();
  });

  saveButton.addEventListener("click", async () => {
    try {
      await api.putResources(pageId, session.toDocument());
      session.dirty = false;
      status.textContent = "saved";
    } catch (error) {
      if (error instanceof ApiError && error.violations.length) {
        violationsBox.textContent = error.violations
          .map((v) => v.message)
          .join("; ");
      } else {
        status.textContent = `save failed: ${String(error)}`;
      }
      return;
    }
    refresh();
  });

  resize();
  refresh();
  return session;
}
