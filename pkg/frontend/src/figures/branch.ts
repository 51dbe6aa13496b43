import { SchemaError, num, parseCsv, requireColumns, requireRows } from "../csv.js";
import { PALETTE, STABILITY_COLORS, WIDTH, el, finish, fmt, frame, legend } from "../svg.js";

export const REQUIRED = ["alpha", "kind", "K", "M", "p", "beta", "classification"];

/**
 * Two-level equilibrium branches from equilibria.csv over an alpha grid:
 * mixture weight p against beta = (alpha-1)/alpha, one series per (K, M),
 * markers colored by stability classification.
 */
export function renderBranch(csvText: string): string {
  const table = parseCsv(csvText);
  const idx = requireColumns(table, REQUIRED, "branch");
  requireRows(table, "branch");
  const rows = table.rows
    .filter((r) => r[idx.get("kind")!] === "two_level")
    .map((r) => ({
      K: r[idx.get("K")!],
      M: r[idx.get("M")!],
      p: num(r[idx.get("p")!]),
      beta: num(r[idx.get("beta")!]),
      cls: r[idx.get("classification")!],
    }));
  if (rows.length === 0) {
    throw new SchemaError(
      "branch figure needs two_level rows: run the equilibria mode over an alpha grid with alpha > 1",
    );
  }
  const branches = [...new Set(rows.map((r) => `${r.K}/${r.M}`))].sort();
  const f = frame(
    [0, 1],
    [0, 1.02],
    "beta = (alpha - 1)/alpha",
    "mixture weight p",
    "two-level equilibrium branches",
  );
  branches.forEach((b, j) => {
    const pts = rows
      .filter((r) => `${r.K}/${r.M}` === b)
      .sort((u, v) => u.beta - v.beta || u.p - v.p);
    const color = PALETTE[j % PALETTE.length];
    f.body.push(
      el("polyline", {
        points: pts.map((r) => `${fmt(f.x(r.beta))},${fmt(f.y(r.p))}`).join(" "),
        fill: "none",
        stroke: color,
        "stroke-width": 1,
        "stroke-dasharray": "2,2",
      }),
    );
    for (const r of pts) {
      f.body.push(
        el("circle", {
          cx: fmt(f.x(r.beta)),
          cy: fmt(f.y(r.p)),
          r: 3,
          fill: STABILITY_COLORS[r.cls] ?? "black",
          stroke: color,
          "stroke-width": 1,
        }),
      );
    }
  });
  legend(
    f.body,
    branches.map((b, j) => [`K/M = ${b}`, PALETTE[j % PALETTE.length]] as [string, string]),
    WIDTH - 130,
    48,
  );
  return finish(f.body);
}
