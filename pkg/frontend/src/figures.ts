/**
 * Figure catalogue: which inputs each figure needs, which columns it reads,
 * and how its chart is assembled.
 *
 * fig2   safety region curve with marked minimum          (curve.csv)
 * fig4   desired time-gap profiles vs location            (profile_samples.csv)
 * fig5   desired velocity profiles vs location            (profile_samples.csv)
 * fig6   realized time-gaps vs location                   (trace.csv)
 * fig7   realized velocities vs location                  (trace.csv)
 * fig8   trajectories: location vs time                   (trace.csv)
 * fig9   control accelerations vs location                (trace.csv)
 * fig10  operating points over the safety curve           (trace.csv + curve.csv)
 */

import { Table, column, groupByVehicle, requireColumns } from "./csv";
import { ChartSpec, Series, renderChart } from "./svg";

export type InputKind = "trace" | "curve" | "design";

export interface FigureResult {
  svg: string;
  /** extra facts recorded into the output index */
  meta: Record<string, number | string>;
}

export interface FigureDef {
  id: string;
  inputs: InputKind[];
  build: (tables: Map<InputKind, Table>) => FigureResult;
}

const EVEN_COLOR = "#1f77b4";
const ODD_COLOR = "#d62728";
const CURVE_COLOR = "#2ca02c";

// show points below the curve only when they genuinely violate the audit
// tolerance, not when they ride the boundary within rounding
const BELOW_CURVE_TOL = 1e-6;

function vehicleSeries(
  trace: Table,
  xCol: string,
  yCol: string,
  kind: Series["kind"] = "line",
  stride = 1,
): Series[] {
  const groups = groupByVehicle(trace);
  const parity = trace.text.get("parity")!;
  const xs = column(trace, xCol);
  const ys = column(trace, yCol);
  const series: Series[] = [];
  for (const rows of groups.values()) {
    const y = rows.map((r) => ys[r]);
    if (!y.some(Number.isFinite)) {
      continue; // e.g. the lead vehicle has no realized gap
    }
    const isEven = parity[rows[0]] === "even";
    series.push({
      label: isEven ? "even vehicles" : "odd vehicles",
      color: isEven ? EVEN_COLOR : ODD_COLOR,
      kind,
      stride,
      x: rows.map((r) => xs[r]),
      y,
    });
  }
  return series;
}

function chart(spec: ChartSpec, meta: Record<string, number | string> = {}): FigureResult {
  return { svg: renderChart(spec), meta };
}

function buildFig2(tables: Map<InputKind, Table>): FigureResult {
  const curve = tables.get("curve")!;
  const v = column(curve, "v");
  const tau = column(curve, "tau");
  const marked = column(curve, "is_minimum");
  const minRow = marked.findIndex((m) => m === 1);
  return chart({
    title: "Safe region: minimum time-gap vs velocity",
    xLabel: "velocity [m/s]",
    yLabel: "time-gap [s]",
    series: [{ label: "safety boundary", color: CURVE_COLOR, kind: "line", x: v, y: tau }],
    marker: minRow >= 0
      ? { x: v[minRow], y: tau[minRow], label: `minimum (${v[minRow].toFixed(2)}, ${tau[minRow].toFixed(3)})` }
      : undefined,
  });
}

function buildFig4(tables: Map<InputKind, Table>): FigureResult {
  const design = tables.get("design")!;
  const s = column(design, "s");
  return chart({
    title: "Desired time-gap profiles",
    xLabel: "location [m]",
    yLabel: "time-gap [s]",
    series: [
      { label: "odd vehicles", color: ODD_COLOR, kind: "line", x: s, y: column(design, "tau_odd") },
      { label: "even vehicles", color: EVEN_COLOR, kind: "line", x: s, y: column(design, "tau_even") },
    ],
  });
}

function buildFig5(tables: Map<InputKind, Table>): FigureResult {
  const design = tables.get("design")!;
  const s = column(design, "s");
  return chart({
    title: "Desired velocity profiles",
    xLabel: "location [m]",
    yLabel: "velocity [m/s]",
    series: [
      { label: "even / lead desired", color: EVEN_COLOR, kind: "line", x: s, y: column(design, "v_des") },
      { label: "odd (boundary)", color: ODD_COLOR, kind: "line", x: s, y: column(design, "v_odd"), dash: "6,3" },
    ],
  });
}

function buildFig6(tables: Map<InputKind, Table>): FigureResult {
  const trace = tables.get("trace")!;
  return chart({
    title: "Realized time-gaps",
    xLabel: "location [m]",
    yLabel: "time-gap [s]",
    series: vehicleSeries(trace, "s", "tau_realized"),
  });
}

function buildFig7(tables: Map<InputKind, Table>): FigureResult {
  const trace = tables.get("trace")!;
  return chart({
    title: "Realized velocities",
    xLabel: "location [m]",
    yLabel: "velocity [m/s]",
    series: vehicleSeries(trace, "s", "v"),
  });
}

function buildFig8(tables: Map<InputKind, Table>): FigureResult {
  const trace = tables.get("trace")!;
  return chart({
    title: "Vehicle trajectories",
    xLabel: "time [s]",
    yLabel: "location [m]",
    series: vehicleSeries(trace, "t", "s"),
  });
}

function buildFig9(tables: Map<InputKind, Table>): FigureResult {
  const trace = tables.get("trace")!;
  return chart({
    title: "Control accelerations",
    xLabel: "location [m]",
    yLabel: "acceleration [m/s^2]",
    series: vehicleSeries(trace, "s", "u"),
  });
}

function buildFig10(tables: Map<InputKind, Table>): FigureResult {
  const trace = tables.get("trace")!;
  const curve = tables.get("curve")!;
  const margins = column(trace, "safety_margin");
  let belowCurve = 0;
  for (const margin of margins) {
    if (Number.isFinite(margin) && margin < -BELOW_CURVE_TOL) {
      belowCurve += 1;
    }
  }
  const rows = column(trace, "v").length;
  const stride = Math.max(1, Math.ceil(rows / 4000));
  const scatter = vehicleSeries(trace, "v", "tau_realized", "scatter", stride);
  return chart(
    {
      title: "Operating points over the safety boundary",
      xLabel: "velocity [m/s]",
      yLabel: "time-gap [s]",
      series: [
        { label: "safety boundary", color: CURVE_COLOR, kind: "line", x: column(curve, "v"), y: column(curve, "tau") },
        ...scatter,
      ],
    },
    { belowCurveCount: belowCurve },
  );
}

const TRACE_BASE = ["s", "i", "parity", "t", "v"];

export const FIGURES: FigureDef[] = [
  { id: "fig2", inputs: ["curve"], build: buildFig2 },
  { id: "fig4", inputs: ["design"], build: buildFig4 },
  { id: "fig5", inputs: ["design"], build: buildFig5 },
  { id: "fig6", inputs: ["trace"], build: buildFig6 },
  { id: "fig7", inputs: ["trace"], build: buildFig7 },
  { id: "fig8", inputs: ["trace"], build: buildFig8 },
  { id: "fig9", inputs: ["trace"], build: buildFig9 },
  { id: "fig10", inputs: ["trace", "curve"], build: buildFig10 },
];

export const REQUIRED_COLUMNS: Record<string, Partial<Record<InputKind, string[]>>> = {
  fig2: { curve: ["v", "tau", "is_minimum"] },
  fig4: { design: ["s", "tau_odd", "tau_even"] },
  fig5: { design: ["s", "v_odd", "v_des"] },
  fig6: { trace: [...TRACE_BASE, "tau_realized"] },
  fig7: { trace: TRACE_BASE },
  fig8: { trace: TRACE_BASE },
  fig9: { trace: [...TRACE_BASE, "u"] },
  fig10: { trace: [...TRACE_BASE, "tau_realized", "safety_margin"], curve: ["v", "tau"] },
};

export function validateInputs(
  id: string,
  tables: Map<InputKind, Table>,
  fileNames: Map<InputKind, string>,
): void {
  const requirements = REQUIRED_COLUMNS[id] ?? {};
  for (const [kind, cols] of Object.entries(requirements)) {
    const table = tables.get(kind as InputKind);
    if (!table) {
      throw new Error(`${id}: missing --${kind} input`);
    }
    requireColumns(table, cols!, fileNames.get(kind as InputKind) ?? kind);
  }
}
