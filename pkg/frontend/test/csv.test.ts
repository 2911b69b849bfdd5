import { describe, expect, it } from "vitest";

import { SchemaError, column, groupByVehicle, parseCsv, requireColumns } from "../src/csv";

describe("parseCsv", () => {
  it("parses numeric columns and keeps raw text", () => {
    const table = parseCsv("a,b,parity\n1,2.5,even\n3,,odd\n");
    expect(table.rowCount).toBe(2);
    expect(column(table, "a")).toEqual([1, 3]);
    expect(column(table, "b")[0]).toBe(2.5);
    expect(Number.isNaN(column(table, "b")[1])).toBe(true);
    expect(table.text.get("parity")).toEqual(["even", "odd"]);
  });

  it("rejects ragged rows", () => {
    expect(() => parseCsv("a,b\n1\n")).toThrow(/cells/);
  });

  it("groups trace rows by vehicle id in file order", () => {
    const table = parseCsv("s,i\n0,0\n1,0\n0,1\n1,1\n");
    const groups = groupByVehicle(table);
    expect([...groups.keys()]).toEqual([0, 1]);
    expect(groups.get(1)).toEqual([2, 3]);
  });
});

describe("requireColumns", () => {
  it("names exactly the missing columns", () => {
    const table = parseCsv("s,i,parity\n0,0,even\n");
    try {
      requireColumns(table, ["s", "tau_realized", "u"], "trace.csv");
      expect.unreachable();
    } catch (err) {
      expect(err).toBeInstanceOf(SchemaError);
      expect((err as SchemaError).missing).toEqual(["tau_realized", "u"]);
      expect(String(err)).toContain("trace.csv");
    }
  });
});
