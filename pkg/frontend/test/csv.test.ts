import { readFileSync } from "node:fs";
import { join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import {
  EmptySeriesError,
  SchemaError,
  column,
  parseState,
  parseTable,
  requireColumns,
} from "../src/csv.js";

const DATA = fileURLToPath(new URL("../testdata/", import.meta.url));

function load(name: string): string {
  return readFileSync(join(DATA, name), "utf8");
}

describe("parseTable", () => {
  it("reads the scan table with its config header", () => {
    const t = parseTable(load("fgr_scan.csv"), "fgr_scan.csv");
    expect(t.meta["command"]).toBe("fgr-scan");
    expect(t.columns).toContain("p");
    expect(t.columns).toContain("gamma_abs");
    expect(t.rows.length).toBe(16);
    const p = column(t, "p");
    expect(p[0]).toBeCloseTo(1.7, 12);
    expect(p[p.length - 1]).toBeCloseTo(2.0, 12);
  });

  it("keeps trailer scalars from the functional table", () => {
    const t = parseTable(load("virial.csv"), "virial.csv");
    expect(t.meta["ddt_fgr"]).toBeDefined();
    expect(t.meta["budget_z2_quartic"]).toBeDefined();
    expect(Number(t.meta["budget_z2_quartic"])).toBeGreaterThan(0);
    requireColumns(t, ["t", "J_FGR", "I1_1", "I1_2", "I2_1", "I2_2"]);
  });

  it("records the fitted exponent on trajectories", () => {
    const t = parseTable(load("traj.csv"), "traj.csv");
    expect(t.meta["status"]).toBe("completed");
    expect(Number(t.meta["fitted_decay_exponent"])).not.toBeNaN();
    expect(column(t, "abs_z2")[0]).toBeCloseTo(0.1, 6);
  });

  it("rejects a missing column by name", () => {
    const t = parseTable(load("traj.csv"), "traj.csv");
    expect(() => column(t, "gamma_abs")).toThrow(SchemaError);
    expect(() => requireColumns(t, ["t", "nope"])).toThrow(/nope/);
  });

  it("rejects comment-only and header-only files", () => {
    expect(() => parseTable("# a = 1\n# b = 2\n", "x")).toThrow(
      EmptySeriesError,
    );
    expect(() => parseTable("# a = 1\nt,y\n", "x")).toThrow(EmptySeriesError);
  });
});

describe("parseState", () => {
  it("rebuilds the node grid from the header", () => {
    const s = parseState(load("state_000000.txt"), "state_000000.txt");
    const n = Number(s.meta["n"]);
    const L = Number(s.meta["L"]);
    expect(s.u1.length).toBe(n);
    expect(s.u2.length).toBe(n);
    expect(s.x[0]).toBe(0);
    expect(s.x[n - 1]).toBeCloseTo(L, 9);
    // the initial state is the profile: positive peak at the origin
    expect(s.u1[0]).toBeGreaterThan(1.0);
  });

  it("rejects row-count mismatches and missing geometry", () => {
    expect(() =>
      parseState("# L = 10\n# n = 4\n1 2\n3 4\n", "x"),
    ).toThrow(SchemaError);
    expect(() => parseState("1 2\n3 4\n", "x")).toThrow(SchemaError);
    expect(() => parseState("# L = 10\n# n = 2\n1 2 3\n4 5 6\n", "x")).toThrow(
      SchemaError,
    );
    expect(() => parseState("# L = 10\n# n = 2\n", "x")).toThrow(
      EmptySeriesError,
    );
  });
});
