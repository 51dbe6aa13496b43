import { num, parseCsv, requireColumns, requireRows } from "../csv.js";
import { PALETTE, el, finish, fmt, frame } from "../svg.js";

export const REQUIRED = ["run", "t", "H", "F_inf"];

/** Lyapunov value along mean-field trajectories from flow.csv (monotone up). */
export function renderTrajectory(csvText: string): string {
  const table = parseCsv(csvText);
  const idx = requireColumns(table, REQUIRED, "trajectory");
  requireRows(table, "trajectory");
  const rows = table.rows.map((r) => ({
    run: r[idx.get("run")!],
    t: num(r[idx.get("t")!]),
    H: num(r[idx.get("H")!]),
  }));
  const runs = [...new Set(rows.map((r) => r.run))];
  const tMax = Math.max(...rows.map((r) => r.t));
  const hMin = Math.min(...rows.map((r) => r.H));
  const hMax = Math.max(...rows.map((r) => r.H));
  const pad = 0.05 * (hMax - hMin || 1);
  const f = frame(
    [0, tMax || 1],
    [hMin - pad, hMax + pad],
    "flow time t",
    "Lyapunov value H",
    "Lyapunov function along the flow",
  );
  runs.forEach((run, j) => {
    const pts = rows
      .filter((r) => r.run === run)
      .map((r) => `${fmt(f.x(r.t))},${fmt(f.y(r.H))}`)
      .join(" ");
    f.body.push(
      el("polyline", {
        points: pts,
        fill: "none",
        stroke: PALETTE[j % PALETTE.length],
        "stroke-width": 1.5,
      }),
    );
  });
  return finish(f.body);
}
