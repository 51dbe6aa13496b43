import { num, parseCsv, requireColumns, requireRows } from "../csv.js";
import { PALETTE, WIDTH, el, finish, fmt, frame, legend, text } from "../svg.js";

export const REQUIRED = ["alpha", "S_size", "count", "frequency", "admissible", "threshold_K"];

/**
 * Stacked-bar phase diagram over the reinforcement grid from sweep.csv:
 * one bar per alpha, segments colored by support size, hatched border when
 * the size lies outside the admissible band.
 */
export function renderPhase(csvText: string): string {
  const table = parseCsv(csvText);
  const idx = requireColumns(table, REQUIRED, "phase");
  requireRows(table, "phase");
  const rows = table.rows.map((r) => ({
    alpha: num(r[idx.get("alpha")!]),
    size: num(r[idx.get("S_size")!]),
    freq: num(r[idx.get("frequency")!]),
    admissible: r[idx.get("admissible")!] === "1",
  }));
  const alphas = [...new Set(rows.map((r) => r.alpha))].sort((a, b) => a - b);
  const sizes = [...new Set(rows.map((r) => r.size))].sort((a, b) => a - b);
  const f = frame(
    [-0.5, alphas.length - 0.5],
    [0, 1.02],
    "reinforcement strength alpha",
    "frequency of |S|",
    "localization phase diagram",
  );
  alphas.forEach((alpha, i) => {
    let acc = 0;
    for (const size of sizes) {
      const row = rows.find((r) => r.alpha === alpha && r.size === size);
      if (!row || row.freq <= 0) continue;
      const x0 = f.x(i - 0.35);
      const x1 = f.x(i + 0.35);
      const y0 = f.y(acc);
      const y1 = f.y(acc + row.freq);
      f.body.push(
        el("rect", {
          x: fmt(x0),
          y: fmt(y1),
          width: fmt(x1 - x0),
          height: fmt(y0 - y1),
          fill: PALETTE[sizes.indexOf(size) % PALETTE.length],
          stroke: row.admissible ? "none" : "black",
          "stroke-width": row.admissible ? 0 : 1.5,
          "stroke-dasharray": row.admissible ? "none" : "4,2",
        }),
      );
      acc += row.freq;
    }
    f.body.push(text(f.x(i), f.y(0) + 32, `a=${alpha}`, "middle", 11));
  });
  legend(
    f.body,
    sizes.map((s, j) => [`|S| = ${s}`, PALETTE[j % PALETTE.length]] as [string, string]),
    WIDTH - 110,
    48,
  );
  return finish(f.body);
}
