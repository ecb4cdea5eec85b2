/** Minimal deterministic SVG assembly: no dates, no ids, no randomness,
 * so re-rendering a spec byte-identically is automatic. */

import { Scale, fmtTick } from "./scale.js";

export const WIDTH = 760;
export const HEIGHT = 480;
export const MARGIN = { top: 42, right: 24, bottom: 56, left: 76 };

export const PALETTE = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#9467bd",
  "#ff7f0e",
  "#8c564b",
  "#17becf",
];

export function esc(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function tag(
  name: string,
  attrs: Record<string, string | number>,
  body = "",
): string {
  const a = Object.entries(attrs)
    .map(([k, v]) => `${k}="${typeof v === "number" ? fmtCoord(v) : esc(v)}"`)
    .join(" ");
  return body === "" && name !== "text"
    ? `<${name} ${a}/>`
    : `<${name} ${a}>${body}</${name}>`;
}

function fmtCoord(v: number): string {
  return Number.isFinite(v) ? String(Math.round(v * 100) / 100) : "0";
}

/** Polyline split into segments at non-finite or out-of-log-domain points. */
export function seriesPath(
  xv: number[],
  yv: number[],
  xs: Scale,
  ys: Scale,
  color: string,
  width = 1.6,
  dash = "",
): string {
  const segs: string[] = [];
  let cur: string[] = [];
  for (let i = 0; i < xv.length; i++) {
    const ok =
      Number.isFinite(xv[i]) &&
      Number.isFinite(yv[i]) &&
      (!xs.log || xv[i] > 0) &&
      (!ys.log || yv[i] > 0);
    if (ok) {
      cur.push(`${fmtCoord(xs.map(xv[i]))},${fmtCoord(ys.map(yv[i]))}`);
    } else if (cur.length > 0) {
      segs.push(cur.join(" "));
      cur = [];
    }
  }
  if (cur.length > 0) segs.push(cur.join(" "));
  const attrs: Record<string, string | number> = {
    class: "series",
    fill: "none",
    stroke: color,
    "stroke-width": width,
  };
  if (dash !== "") attrs["stroke-dasharray"] = dash;
  return segs
    .map((pts) => tag("polyline", { ...attrs, points: pts }))
    .join("\n");
}

export interface FrameSpec {
  title: string;
  xLabel: string;
  yLabel: string;
  xs: Scale;
  ys: Scale;
}

/** Axes, ticks, grid, labels wrapped around pre-rendered body elements. */
export function chart(spec: FrameSpec, body: string[]): string {
  const { xs, ys } = spec;
  const x0 = MARGIN.left;
  const x1 = WIDTH - MARGIN.right;
  const y0 = HEIGHT - MARGIN.bottom;
  const y1 = MARGIN.top;
  const parts: string[] = [];
  parts.push(
    tag("rect", {
      x: 0,
      y: 0,
      width: WIDTH,
      height: HEIGHT,
      fill: "#ffffff",
    }),
  );
  for (const t of xs.ticks) {
    const px = xs.map(t);
    parts.push(
      tag("line", {
        x1: px,
        y1: y0,
        x2: px,
        y2: y1,
        stroke: "#e6e6e6",
        "stroke-width": 0.8,
      }),
    );
    parts.push(
      tag(
        "text",
        {
          x: px,
          y: y0 + 20,
          "text-anchor": "middle",
          "font-size": 12,
          fill: "#333333",
        },
        esc(fmtTick(t)),
      ),
    );
  }
  for (const t of ys.ticks) {
    const py = ys.map(t);
    parts.push(
      tag("line", {
        x1: x0,
        y1: py,
        x2: x1,
        y2: py,
        stroke: "#e6e6e6",
        "stroke-width": 0.8,
      }),
    );
    parts.push(
      tag(
        "text",
        {
          x: x0 - 8,
          y: py + 4,
          "text-anchor": "end",
          "font-size": 12,
          fill: "#333333",
        },
        esc(fmtTick(t)),
      ),
    );
  }
  parts.push(
    tag("rect", {
      x: x0,
      y: y1,
      width: x1 - x0,
      height: y0 - y1,
      fill: "none",
      stroke: "#333333",
      "stroke-width": 1,
    }),
  );
  parts.push(...body);
  parts.push(
    tag(
      "text",
      {
        x: (x0 + x1) / 2,
        y: HEIGHT - 14,
        "text-anchor": "middle",
        "font-size": 14,
        fill: "#111111",
      },
      esc(spec.xLabel),
    ),
  );
  parts.push(
    tag(
      "text",
      {
        x: 20,
        y: (y0 + y1) / 2,
        "text-anchor": "middle",
        "font-size": 14,
        fill: "#111111",
        transform: `rotate(-90 20 ${(y0 + y1) / 2})`,
      },
      esc(spec.yLabel),
    ),
  );
  parts.push(
    tag(
      "text",
      {
        x: (x0 + x1) / 2,
        y: 24,
        "text-anchor": "middle",
        "font-size": 16,
        "font-weight": "bold",
        fill: "#111111",
      },
      esc(spec.title),
    ),
  );
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="sans-serif">`,
    ...parts,
    "</svg>",
  ].join("\n");
}

/** Legend block in the upper-right corner of the plot area. */
export function legend(entries: { label: string; color: string; dash?: string }[]): string[] {
  const x = WIDTH - MARGIN.right - 180;
  const out: string[] = [];
  entries.forEach((e, i) => {
    const y = MARGIN.top + 16 + 18 * i;
    const attrs: Record<string, string | number> = {
      x1: x,
      y1: y - 4,
      x2: x + 26,
      y2: y - 4,
      stroke: e.color,
      "stroke-width": 2,
    };
    if (e.dash) attrs["stroke-dasharray"] = e.dash;
    out.push(tag("line", attrs));
    out.push(
      tag(
        "text",
        { x: x + 32, y, "font-size": 12, fill: "#333333" },
        esc(e.label),
      ),
    );
  });
  return out;
}
