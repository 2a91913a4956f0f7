// @vitest-environment happy-dom
import { describe, expect, it } from "vitest";

import { renderHandMap } from "../src/handmap.js";

export function fakeLayout(): Record<string, unknown> {
  const electrodes = [];
  for (let finger = 0; finger < 5; finger++) {
    for (let slot = 0; slot < 3; slot++) {
      electrodes.push({
        id: finger * 3 + slot,
        role: "stimulation",
        region: ["fingertip", "near-palm", "finger-root"][slot],
        center: [finger * 2.0, 4.0 - slot * 1.5],
        diameter_cm: 0.6,
      });
    }
  }
  electrodes.push({ id: 15, role: "vgnd", region: "palm",
                    center: [4.0, -2.0], diameter_cm: 0.6 });
  return {
    schema: "layout/1",
    electrodes,
    contour: [
      { kind: "line", p0: [-2, -4], p1: [10, -4] },
      { kind: "line", p0: [10, -4], p1: [10, 6] },
      { kind: "arc", center: [4, 6], radius: 6, start_angle: 0, end_angle: Math.PI },
      { kind: "line", p0: [-2, 6], p1: [-2, -4] },
    ],
    traces: [
      { electrode_id: 0, points: [[0, 4], [0, -3], [-1, -3.5]], width_cm: 0.08 },
    ],
  };
}

describe("hand map", () => {
  it("renders 15 clickable sites and one inert VGND", () => {
    const clicked: number[] = [];
    const svg = renderHandMap(document, fakeLayout(), new Set(),
      { onElectrodeClick: (id) => clicked.push(id) }, true);
    document.body.append(svg);
    const circles = svg.querySelectorAll("circle.electrode");
    expect(circles.length).toBe(16);
    const stim = svg.querySelectorAll("circle.stimulation");
    const vgnd = svg.querySelectorAll("circle.vgnd");
    expect(stim.length).toBe(15);
    expect(vgnd.length).toBe(1);
    expect(vgnd[0].getAttribute("pointer-events")).toBe("none");
    (stim[3] as SVGElement).dispatchEvent(new Event("click"));
    expect(clicked).toEqual([Number(stim[3].getAttribute("data-electrode"))]);
    (vgnd[0] as SVGElement).dispatchEvent(new Event("click"));
    expect(clicked.length).toBe(1); // VGND stays inert
  });

  it("does not dispatch clicks while disabled", () => {
    const clicked: number[] = [];
    const svg = renderHandMap(document, fakeLayout(), new Set(),
      { onElectrodeClick: (id) => clicked.push(id) }, false);
    document.body.append(svg);
    const stim = svg.querySelectorAll("circle.stimulation");
    (stim[0] as SVGElement).dispatchEvent(new Event("click"));
    expect(clicked).toEqual([]);
  });

  it("marks active channels distinctly", () => {
    const svg = renderHandMap(document, fakeLayout(), new Set([4]),
      { onElectrodeClick: () => undefined }, true);
    document.body.append(svg);
    const active = svg.querySelectorAll("circle.active");
    expect(active.length).toBe(1);
    expect(active[0].getAttribute("data-electrode")).toBe("4");
  });

  it("no site highlighted on an empty plan", () => {
    const svg = renderHandMap(document, fakeLayout(), new Set(),
      { onElectrodeClick: () => undefined }, true);
    document.body.append(svg);
    expect(svg.querySelectorAll("circle.active").length).toBe(0);
  });

  it("renders an error banner on malformed layout", () => {
    const banner = renderHandMap(document, { schema: "layout/2" }, new Set(),
      { onElectrodeClick: () => undefined }, true);
    expect(banner.className).toContain("error-banner");
    expect(banner.textContent).toContain("layout/2");
  });
});
