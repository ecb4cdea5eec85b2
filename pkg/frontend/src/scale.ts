/** Axis scales and tick selection for the SVG charts. */

export interface Scale {
  map(v: number): number;
  ticks: number[];
  domain: [number, number];
  log: boolean;
}

/** Finite-value extent over several series; pads a degenerate range. */
export function extent(series: number[][]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const ys of series) {
    for (const y of ys) {
      if (Number.isFinite(y)) {
        if (y < lo) lo = y;
        if (y > hi) hi = y;
      }
    }
  }
  if (lo > hi) {
    return [0, 1];
  }
  if (lo === hi) {
    const pad = Math.abs(lo) > 0 ? Math.abs(lo) * 0.1 : 1;
    return [lo - pad, hi + pad];
  }
  return [lo, hi];
}

/** Positive-value extent for log axes. */
export function positiveExtent(series: number[][]): [number, number] {
  const pos = series.map((ys) => ys.filter((y) => Number.isFinite(y) && y > 0));
  const [lo, hi] = extent(pos);
  return lo > 0 ? [lo, hi] : [1e-12, 1];
}

function niceStep(span: number, target: number): number {
  const raw = span / target;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  for (const m of [1, 2, 5, 10]) {
    if (m * mag >= raw) return m * mag;
  }
  return 10 * mag;
}

export function linearScale(
  lo: number,
  hi: number,
  rLo: number,
  rHi: number,
): Scale {
  const step = niceStep(hi - lo, 6);
  const t0 = Math.ceil(lo / step) * step;
  const ticks: number[] = [];
  for (let t = t0; t <= hi + 1e-9 * step; t += step) {
    // snap near-zero accumulation error so labels print clean
    ticks.push(Math.abs(t) < step * 1e-9 ? 0 : t);
  }
  const k = (rHi - rLo) / (hi - lo);
  return {
    map: (v) => rLo + (v - lo) * k,
    ticks,
    domain: [lo, hi],
    log: false,
  };
}

export function logScale(
  lo: number,
  hi: number,
  rLo: number,
  rHi: number,
): Scale {
  const la = Math.log10(lo);
  const lb = Math.log10(hi);
  const ticks: number[] = [];
  for (let d = Math.ceil(la); d <= Math.floor(lb) + 1e-9; d += 1) {
    ticks.push(Math.pow(10, d));
  }
  if (ticks.length === 0) {
    ticks.push(lo, hi);
  }
  const k = (rHi - rLo) / (lb - la);
  return {
    map: (v) => rLo + (Math.log10(v) - la) * k,
    ticks,
    domain: [lo, hi],
    log: true,
  };
}

export function fmtTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) {
    return v.toExponential(0).replace("e+", "e");
  }
  const s = v.toPrecision(4);
  return s.includes(".") ? s.replace(/\.?0+$/, "") : s;
}
