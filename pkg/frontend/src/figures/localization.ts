import { num, parseCsv, requireColumns, requireRows } from "../csv.js";
import { PALETTE, el, finish, fmt, frame, text } from "../svg.js";

export const REQUIRED = ["seed", "S_size", "sup_dev_from_uniform", "max_v_bound_ok"];

/** Histogram of final-window support sizes from localize.csv. */
export function renderLocalization(csvText: string): string {
  const table = parseCsv(csvText);
  const idx = requireColumns(table, REQUIRED, "localization");
  requireRows(table, "localization");
  const sizes = table.rows.map((r) => num(r[idx.get("S_size")!]));
  const counts = new Map<number, number>();
  for (const s of sizes) counts.set(s, (counts.get(s) ?? 0) + 1);
  const keys = [...counts.keys()].sort((a, b) => a - b);
  const total = sizes.length;
  const maxFreq = Math.max(...keys.map((k) => counts.get(k)! / total));
  const f = frame(
    [Math.min(...keys) - 0.75, Math.max(...keys) + 0.75],
    [0, Math.max(0.05, maxFreq * 1.1)],
    "support size |S|",
    "frequency",
    `localization histogram (${total} runs)`,
  );
  for (const k of keys) {
    const freq = counts.get(k)! / total;
    const x0 = f.x(k - 0.35);
    const x1 = f.x(k + 0.35);
    const y0 = f.y(0);
    const y1 = f.y(freq);
    f.body.push(
      el("rect", {
        x: fmt(x0),
        y: fmt(y1),
        width: fmt(x1 - x0),
        height: fmt(y0 - y1),
        fill: PALETTE[0],
      }),
    );
    f.body.push(text(f.x(k), y1 - 5, freq.toFixed(3), "middle", 10));
  }
  return finish(f.body);
}
