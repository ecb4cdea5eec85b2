/**
 * The four figure kinds rendered from nlkglab outputs.
 *
 * Inputs arrive as parsed tables (or checkpoint state files for the
 * profiles kind); each renderer validates the producing schema before
 * touching values, overlays every input it is given, and returns a
 * complete SVG document string.
 */
import {
  EmptySeriesError,
  StateFile,
  Table,
  column,
  requireColumns,
} from "./csv.js";
import {
  Scale,
  extent,
  linearScale,
  logScale,
  positiveExtent,
} from "./scale.js";
import {
  HEIGHT,
  MARGIN,
  PALETTE,
  WIDTH,
  chart,
  legend,
  seriesPath,
  tag,
} from "./svg.js";

export interface PlotOptions {
  logX?: boolean;
  logY?: boolean;
}

export const KINDS = ["fgr_scan", "decay", "functionals", "profiles"] as const;
export type Kind = (typeof KINDS)[number];

const FGR_COLUMNS = [
  "p",
  "xi",
  "gamma_re",
  "gamma_im",
  "gamma_abs",
  "gamma_reduced_abs",
  "agreement",
  "flags",
];

const TRAJ_COLUMNS = [
  "t",
  "re_z1",
  "im_z1",
  "re_z2",
  "im_z2",
  "abs_z2",
  "energy",
  "eta_sigmaA",
  "eta_l2kappa",
  "eta_h1a",
  "zdot_minus_ztilde",
];

const FUNCTIONAL_COLUMNS = ["t", "J_FGR", "I1_1", "I1_2", "I2_1", "I2_2"];

function axis(
  log: boolean | undefined,
  series: number[][],
  rLo: number,
  rHi: number,
): Scale {
  if (log) {
    const [lo, hi] = positiveExtent(series);
    return logScale(lo, hi, rLo, rHi);
  }
  const [lo, hi] = extent(series);
  return linearScale(lo, hi, rLo, rHi);
}

function xAxis(log: boolean | undefined, series: number[][]): Scale {
  return axis(log, series, MARGIN.left, WIDTH - MARGIN.right);
}

function yAxis(log: boolean | undefined, series: number[][]): Scale {
  return axis(log, series, HEIGHT - MARGIN.bottom, MARGIN.top);
}

export function renderFgrScan(tables: Table[], opts: PlotOptions = {}): string {
  tables.forEach((t) => requireColumns(t, FGR_COLUMNS));
  const ps = tables.map((t) => column(t, "p"));
  const gs = tables.map((t) => column(t, "gamma_abs"));
  const xs = xAxis(opts.logX, ps);
  const ys = yAxis(opts.logY, gs);
  const body: string[] = [];
  tables.forEach((t, i) => {
    const color = PALETTE[i % PALETTE.length];
    body.push(seriesPath(ps[i], gs[i], xs, ys, color));
    // flagged scan points (continuity dips, fit warnings) get open markers
    t.rows.forEach((row, k) => {
      const f = row["flags"];
      if (typeof f === "string" && f.trim() !== "") {
        body.push(
          tag("circle", {
            class: "flagged",
            cx: xs.map(ps[i][k]),
            cy: ys.map(gs[i][k]),
            r: 5,
            fill: "none",
            stroke: color,
            "stroke-width": 1.6,
          }),
        );
      }
    });
  });
  if (tables.length > 1) {
    body.push(
      ...legend(
        tables.map((t, i) => ({
          label: t.label,
          color: PALETTE[i % PALETTE.length],
        })),
      ),
    );
  }
  return chart(
    {
      title: "resonance coefficient scan",
      xLabel: "p",
      yLabel: "|gamma|",
      xs,
      ys,
    },
    body,
  );
}

export function renderDecay(tables: Table[], opts: PlotOptions = {}): string {
  tables.forEach((t) => requireColumns(t, TRAJ_COLUMNS));
  const ts = tables.map((t) => column(t, "t"));
  const zs = tables.map((t) => column(t, "abs_z2"));
  const logY = opts.logY !== false;
  const xs = xAxis(opts.logX, ts);
  const ys = yAxis(logY, zs);
  const body: string[] = [];
  tables.forEach((_, i) => {
    body.push(seriesPath(ts[i], zs[i], xs, ys, PALETTE[i % PALETTE.length]));
  });

  // fitted power law from the first file's recorded exponent, anchored at
  // the final sample so curve and data meet at the right edge
  const expStr = tables[0].meta["fitted_decay_exponent"] ?? "";
  const e = Number(expStr);
  if (Number.isFinite(e)) {
    const t0 = ts[0];
    const z0 = zs[0];
    let last = -1;
    for (let k = 0; k < t0.length; k++) {
      if (t0[k] > 0 && z0[k] > 0) last = k;
    }
    if (last >= 0) {
      const tEnd = t0[last];
      const zEnd = z0[last];
      const tLo = Math.max(t0.find((v) => v > 0) ?? tEnd, tEnd / 100);
      const fitT: number[] = [];
      const fitZ: number[] = [];
      for (let k = 0; k <= 64; k++) {
        const t = tLo * Math.pow(tEnd / tLo, k / 64);
        fitT.push(t);
        fitZ.push(zEnd * Math.pow(t / tEnd, e));
      }
      body.push(seriesPath(fitT, fitZ, xs, ys, "#111111", 1.2, "6 4"));
    }
    body.push(
      tag(
        "text",
        {
          class: "exponent-annotation",
          "data-exponent": expStr,
          x: MARGIN.left + 12,
          y: MARGIN.top + 20,
          "font-size": 13,
          fill: "#111111",
        },
        `fitted exponent ${e.toPrecision(4)}`,
      ),
    );
  }
  if (tables.length > 1) {
    body.push(
      ...legend(
        tables.map((t, i) => ({
          label: t.label,
          color: PALETTE[i % PALETTE.length],
        })),
      ),
    );
  }
  return chart(
    {
      title: "internal mode decay",
      xLabel: "t",
      yLabel: "|z2|",
      xs,
      ys,
    },
    body,
  );
}

export function renderFunctionals(
  tables: Table[],
  opts: PlotOptions = {},
): string {
  tables.forEach((t) => requireColumns(t, FUNCTIONAL_COLUMNS));
  const names = FUNCTIONAL_COLUMNS.slice(1);
  const ts = tables.map((t) => column(t, "t"));
  const series = tables.map((t) => names.map((n) => column(t, n)));
  const xs = xAxis(opts.logX, ts);
  const ys = yAxis(opts.logY, series.flat());
  const body: string[] = [];
  if (!ys.log && ys.domain[0] < 0 && ys.domain[1] > 0) {
    body.push(
      tag("line", {
        x1: MARGIN.left,
        y1: ys.map(0),
        x2: WIDTH - MARGIN.right,
        y2: ys.map(0),
        stroke: "#999999",
        "stroke-width": 1,
        "stroke-dasharray": "2 3",
      }),
    );
  }
  tables.forEach((_, i) => {
    const dash = i === 0 ? "" : i === 1 ? "6 4" : "2 3";
    names.forEach((_, j) => {
      body.push(
        seriesPath(ts[i], series[i][j], xs, ys, PALETTE[j % PALETTE.length], 1.4, dash),
      );
    });
  });
  const entries = names.map((n, j) => ({
    label: n,
    color: PALETTE[j % PALETTE.length],
  }));
  if (tables.length > 1) {
    tables.forEach((t, i) => {
      entries.push({
        label: `${t.label}${i === 0 ? " (solid)" : " (dashed)"}`,
        color: "#333333",
      });
    });
  }
  body.push(...legend(entries));
  return chart(
    {
      title: "monitoring functionals",
      xLabel: "t",
      yLabel: "value",
      xs,
      ys,
    },
    body,
  );
}

export function renderProfiles(
  states: StateFile[],
  opts: PlotOptions = {},
): string {
  if (states.length === 0) {
    throw new EmptySeriesError("profiles: no state files given");
  }
  const xsAll = states.map((s) => s.x);
  const ysAll = states.flatMap((s) => [s.u1, s.u2]);
  const xs = xAxis(opts.logX, xsAll);
  const ys = yAxis(opts.logY, ysAll);
  const body: string[] = [];
  const entries: { label: string; color: string; dash?: string }[] = [];
  states.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    body.push(seriesPath(s.x, s.u1, xs, ys, color, 1.6));
    body.push(seriesPath(s.x, s.u2, xs, ys, color, 1.2, "5 3"));
    const t = s.meta["t"];
    const label = t !== undefined ? `t = ${Number(t).toPrecision(4)}` : s.label;
    entries.push({ label: `${label}  u1`, color });
    entries.push({ label: `${label}  u2`, color, dash: "5 3" });
  });
  body.push(...legend(entries));
  return chart(
    {
      title: "state profiles",
      xLabel: "x",
      yLabel: "u",
      xs,
      ys,
    },
    body,
  );
}
