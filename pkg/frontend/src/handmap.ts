// Interactive hand map rendered from the layout JSON ("layout/1").
// Stimulation sites are clickable; the VGND disc is inert; active channels
// get the "active" class (activity comes from server snapshots only).

import { el, svgEl } from "./dom.js";

interface LayoutElectrode {
  id: number;
  role: string;
  region: string;
  center: [number, number];
  diameter_cm: number;
}

interface LayoutSegment {
  kind: "line" | "arc";
  p0?: [number, number];
  p1?: [number, number];
  center?: [number, number];
  radius?: number;
  start_angle?: number;
  end_angle?: number;
}

export interface LayoutDoc {
  schema: string;
  contour: LayoutSegment[];
  electrodes: LayoutElectrode[];
  traces: { electrode_id: number; points: [number, number][]; width_cm: number }[];
}

export interface HandMapHandlers {
  onElectrodeClick(id: number): void;
}

function contourPoints(contour: LayoutSegment[]): [number, number][] {
  const pts: [number, number][] = [];
  for (const seg of contour) {
    if (seg.kind === "line" && seg.p0 && seg.p1) {
      pts.push(seg.p0, seg.p1);
    } else if (seg.kind === "arc" && seg.center && seg.radius !== undefined) {
      const a0 = seg.start_angle ?? 0;
      const a1 = seg.end_angle ?? 0;
      const steps = 24;
      for (let k = 0; k <= steps; k++) {
        const a = a0 + ((a1 - a0) * k) / steps;
        pts.push([
          seg.center[0] + seg.radius * Math.cos(a),
          seg.center[1] + seg.radius * Math.sin(a),
        ]);
      }
    }
  }
  return pts;
}

function validate(layout: unknown): LayoutDoc {
  const doc = layout as LayoutDoc;
  if (!doc || doc.schema !== "layout/1") {
    throw new Error(`unsupported layout schema: ${doc ? doc.schema : typeof doc}`);
  }
  if (!Array.isArray(doc.electrodes) || doc.electrodes.length !== 16) {
    throw new Error("layout must carry 16 electrodes");
  }
  if (!Array.isArray(doc.contour) || !Array.isArray(doc.traces)) {
    throw new Error("layout is missing contour or traces");
  }
  return doc;
}

export function renderHandMap(
  doc: Document, layout: unknown, active: Set<number>,
  handlers: HandMapHandlers, enabled: boolean,
): Element {
  let parsed: LayoutDoc;
  try {
    parsed = validate(layout);
  } catch (err) {
    return el(doc, "div", { class: "error-banner" },
      `Cannot render hand map: ${(err as Error).message}`);
  }

  const pts = contourPoints(parsed.contour);
  const xs = pts.map((p) => p[0]);
  const ys = pts.map((p) => p[1]);
  const pad = 0.5;
  const minX = Math.min(...xs) - pad;
  const maxX = Math.max(...xs) + pad;
  const minY = Math.min(...ys) - pad;
  const maxY = Math.max(...ys) + pad;
  // layout y grows toward the fingers; flip into screen coordinates
  const tx = (p: [number, number]) => [p[0] - minX, maxY - p[1]] as [number, number];

  const svg = svgEl(doc, "svg", {
    class: "hand-map",
    viewBox: `0 0 ${(maxX - minX).toFixed(3)} ${(maxY - minY).toFixed(3)}`,
  });

  const outline = svgEl(doc, "polygon", {
    class: "contour",
    points: pts.map((p) => tx(p).map((v) => v.toFixed(3)).join(",")).join(" "),
    fill: "none", stroke: "#555", "stroke-width": "0.06",
  });
  svg.append(outline);

  for (const trace of parsed.traces) {
    svg.append(svgEl(doc, "polyline", {
      class: "trace",
      points: trace.points.map((p) => tx(p).map((v) => v.toFixed(3)).join(",")).join(" "),
      fill: "none", stroke: "#9ab", "stroke-width": String(trace.width_cm),
    }));
  }

  for (const site of parsed.electrodes) {
    const [cx, cy] = tx(site.center);
    const isStim = site.role === "stimulation";
    const classes = ["electrode", isStim ? "stimulation" : "vgnd"];
    if (active.has(site.id) && isStim) classes.push("active");
    const circle = svgEl(doc, "circle", {
      class: classes.join(" "),
      "data-electrode": String(site.id),
      cx: cx.toFixed(3), cy: cy.toFixed(3),
      r: (site.diameter_cm / 2).toFixed(3),
      fill: active.has(site.id) && isStim ? "#e33" : (isStim ? "#cde" : "#bbb"),
      stroke: "#333", "stroke-width": "0.03",
    });
    if (isStim) {
      circle.setAttribute("cursor", "pointer");
      circle.addEventListener("click", () => {
        if (enabled) handlers.onElectrodeClick(site.id);
      });
    } else {
      circle.setAttribute("pointer-events", "none");
    }
    svg.append(circle);
  }
  return svg;
}
