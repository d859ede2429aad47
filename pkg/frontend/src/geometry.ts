/**
 * In-browser geometry extraction: walk every element of a rendered document
 * and record tag, page-space bounding box, computed visibility, target URLs,
 * and trimmed text, in the workbench's geometry-dump format.
 *
 * This module is deliberately import-free so its compiled form can be
 * injected verbatim into a headless browser page (the renderer driver strips
 * the trailing export statement).
 */

interface DumpElement {
  tag: string;
  box: [[number, number], [number, number]];
  visible: boolean;
  href?: string;
  src?: string;
  backgroundImage?: string;
  text?: string;
}

interface GeometryDump {
  origin: string;
  viewport: { width: number; height: number };
  elements: DumpElement[];
}

function cssUrl(value: string): string | undefined {
  const match = /url\(\s*(['"]?)([^)'"]*)\1\s*\)/.exec(value);
  return match && match[2] ? match[2] : undefined;
}

function isVisible(style: CSSStyleDeclaration, width: number, height: number): boolean {
  if (style.display === "none" || style.visibility === "hidden") {
    return false;
  }
  const opacity = parseFloat(style.opacity);
  if (!Number.isNaN(opacity) && opacity <= 0) {
    return false;
  }
  return width > 0 && height > 0;
}

function extractGeometry(doc: Document): GeometryDump {
  const win = doc.defaultView;
  if (!win) {
    throw new Error("document is not attached to a window");
  }
  const rootEl = doc.documentElement;
  const width = Math.max(rootEl.scrollWidth, rootEl.clientWidth);
  const height = Math.max(rootEl.scrollHeight, rootEl.clientHeight);
  const scrollX = win.scrollX || 0;
  const scrollY = win.scrollY || 0;

  const elements: DumpElement[] = [];
  for (const el of Array.from(doc.querySelectorAll("*"))) {
    const tag = el.tagName.toLowerCase();
    if (tag === "html" || tag === "head" || tag === "script" || tag === "style") {
      continue;
    }
    let rect: { left: number; top: number; width: number; height: number };
    let measured = true;
    try {
      rect = el.getBoundingClientRect();
    } catch {
      rect = { left: 0, top: 0, width: 0, height: 0 };
      measured = false;
    }
    // page coordinates, clamped at the origin
    const x1 = Math.max(rect.left + scrollX, 0);
    const y1 = Math.max(rect.top + scrollY, 0);
    const x2 = Math.max(rect.left + scrollX + rect.width, x1);
    const y2 = Math.max(rect.top + scrollY + rect.height, y1);

    const style = win.getComputedStyle(el);
    const record: DumpElement = {
      tag,
      box: [
        [x1, y1],
        [x2, y2],
      ],
      visible: measured && isVisible(style, rect.width, rect.height),
    };

    if (tag === "a") {
      const href = el.getAttribute("href");
      if (href) {
        record.href = href;
      }
    }
    if (tag === "img") {
      const src = el.getAttribute("src");
      if (src) {
        record.src = src;
      }
    }
    const background = cssUrl(style.backgroundImage || "");
    if (background) {
      record.backgroundImage = background;
    }
    const text = (el.textContent ?? "").trim();
    if (text) {
      record.text = text;
    }
    elements.push(record);
  }

  return {
    origin: doc.location ? doc.location.href : "",
    viewport: { width, height },
    elements,
  };
}

function extractGeometryJson(doc: Document): string {
  return JSON.stringify(extractGeometry(doc), null, 2) + "\n";
}

export { extractGeometry, extractGeometryJson };
export type { DumpElement, GeometryDump };
