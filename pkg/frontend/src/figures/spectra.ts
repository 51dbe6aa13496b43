import { num, parseCsv, requireColumns, requireRows } from "../csv.js";
import { STABILITY_COLORS, el, finish, fmt, frame, legend, text, WIDTH } from "../svg.js";

export const REQUIRED = ["alpha", "kind", "K", "M", "eigenvalue", "multiplicity", "classification"];

/**
 * Strip plot of the field-differential spectra from stability.csv: one line
 * of eigenvalues per equilibrium, point area growing with multiplicity,
 * color by classification, with the zero axis marked.
 */
export function renderSpectra(csvText: string): string {
  const table = parseCsv(csvText);
  const idx = requireColumns(table, REQUIRED, "spectra");
  requireRows(table, "spectra");
  const rows = table.rows.map((r) => ({
    label: `a=${r[idx.get("alpha")!]} ${r[idx.get("kind")!]} K=${r[idx.get("K")!]} M=${r[idx.get("M")!]}`,
    eig: num(r[idx.get("eigenvalue")!]),
    mult: num(r[idx.get("multiplicity")!]),
    cls: r[idx.get("classification")!],
  }));
  const labels = [...new Set(rows.map((r) => r.label))];
  const eMin = Math.min(...rows.map((r) => r.eig));
  const eMax = Math.max(...rows.map((r) => r.eig));
  const pad = 0.1 * (eMax - eMin || 1);
  const f = frame(
    [eMin - pad, eMax + pad],
    [-0.5, labels.length - 0.5],
    "eigenvalue of the field differential",
    "equilibrium",
    "stability spectra",
  );
  if (eMin < 0 && eMax > 0) {
    f.body.push(
      el("line", {
        x1: fmt(f.x(0)),
        y1: fmt(f.y(-0.5)),
        x2: fmt(f.x(0)),
        y2: fmt(f.y(labels.length - 0.5)),
        stroke: "black",
        "stroke-width": 1,
        "stroke-dasharray": "4,3",
      }),
    );
  }
  rows.forEach((r) => {
    const yIdx = labels.indexOf(r.label);
    f.body.push(
      el("circle", {
        cx: fmt(f.x(r.eig)),
        cy: fmt(f.y(yIdx)),
        r: fmt(2 + Math.sqrt(r.mult) * 1.5),
        fill: STABILITY_COLORS[r.cls] ?? "black",
        "fill-opacity": 0.75,
      }),
    );
  });
  labels.forEach((lab, i) => {
    f.body.push(text(68, f.y(i) - 8, lab, "start", 9));
  });
  legend(
    f.body,
    Object.entries(STABILITY_COLORS) as Array<[string, string]>,
    WIDTH - 110,
    48,
  );
  return finish(f.body);
}
