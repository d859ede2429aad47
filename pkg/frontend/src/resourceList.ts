/**
 * Resource-list wire types and the client-side validation mirror.
 *
 * The rules here replicate the server's invariants so the UI can refuse a
 * save before the request leaves the browser; the server remains the
 * authority and re-validates every PUT.
 */

export type ResourceKind =
  | "internal-link"
  | "external-link"
  | "backend-route"
  | "image"
  | "background-image";

export const RESOURCE_KINDS: ResourceKind[] = [
  "internal-link",
  "external-link",
  "backend-route",
  "image",
  "background-image",
];

export interface Box {
  x1: number;
  y1: number;
  x2: number;
  y2: number;
}

export interface ResourceEntry {
  position: [[number, number], [number, number]];
  type: ResourceKind;
  url: string;
  text?: string;
}

export interface ResourceListDoc {
  origin: string;
  width: number;
  height: number;
  entries: ResourceEntry[];
}

export interface Violation {
  code: string;
  message: string;
  entryIndex?: number;
}

export function boxToPosition(box: Box): [[number, number], [number, number]] {
  return [
    [box.x1, box.y1],
    [box.x2, box.y2],
  ];
}

export function positionToBox(position: [[number, number], [number, number]]): Box {
  return {
    x1: position[0][0],
    y1: position[0][1],
    x2: position[1][0],
    y2: position[1][1],
  };
}

/** Order corners and clamp into the page rectangle. */
export function normalizeBox(box: Box, width: number, height: number): Box {
  const clamp = (v: number, hi: number) => Math.min(Math.max(v, 0), hi);
  const x1 = clamp(Math.min(box.x1, box.x2), width);
  const x2 = clamp(Math.max(box.x1, box.x2), width);
  const y1 = clamp(Math.min(box.y1, box.y2), height);
  const y2 = clamp(Math.max(box.y1, box.y2), height);
  return { x1, y1, x2, y2 };
}

/** The same checks the server runs; an empty array means the list can be saved. */
export function validateResourceList(doc: ResourceListDoc): Violation[] {
  const violations: Violation[] = [];
  if (!(doc.width > 0) || !(doc.height > 0)) {
    violations.push({
      code: "page-size",
      message: `page dimensions must be positive, got ${doc.width}x${doc.height}`,
    });
  }
  doc.entries.forEach((entry, i) => {
    const box = positionToBox(entry.position);
    const coords = [box.x1, box.y1, box.x2, box.y2];
    if (coords.some((v) => !Number.isFinite(v))) {
      violations.push({
        code: "box-nonfinite",
        message: `entry ${i}: non-finite coordinate`,
        entryIndex: i,
      });
      return;
    }
    if (coords.some((v) => v < 0)) {
      violations.push({
        code: "box-negative",
        message: `entry ${i}: negative coordinate`,
        entryIndex: i,
      });
    }
    if (box.x1 > box.x2 || box.y1 > box.y2) {
      violations.push({
        code: "box-order",
        message: `entry ${i}: corners out of order`,
        entryIndex: i,
      });
    }
    if (!entry.url) {
      violations.push({
        code: "empty-url",
        message: `entry ${i}: empty url`,
        entryIndex: i,
      });
    }
    if (!RESOURCE_KINDS.includes(entry.type)) {
      violations.push({
        code: "bad-kind",
        message: `entry ${i}: unknown kind ${entry.type}`,
        entryIndex: i,
      });
    }
  });
  return violations;
}
