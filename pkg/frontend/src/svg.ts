/** Deterministic SVG assembly: fixed canvas, palette and number formatting. */

export const WIDTH = 640;
export const HEIGHT = 420;
export const MARGIN = { top: 36, right: 24, bottom: 48, left: 64 };

/** Fixed color cycle (no environment-dependent styling). */
export const PALETTE = [
  "#4c78a8",
  "#f58518",
  "#54a24b",
  "#e45756",
  "#72b7b2",
  "#b279a2",
  "#9d755d",
  "#bab0ac",
];

export const STABILITY_COLORS: Record<string, string> = {
  stable: "#54a24b",
  unstable: "#e45756",
  marginal: "#f58518",
};

export function fmt(x: number): string {
  if (!Number.isFinite(x)) return String(x);
  const s = x.toFixed(2);
  return s === "-0.00" ? "0.00" : s;
}

export interface Scale {
  (x: number): number;
  domain: [number, number];
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  const f = ((x: number) => r0 + ((x - d0) / span) * (r1 - r0)) as Scale;
  f.domain = domain;
  return f;
}

/** Round tick steps of the 1-2-5 family covering the domain. */
export function ticks(domain: [number, number], count = 5): number[] {
  const [lo, hi] = domain;
  const span = hi - lo;
  if (span <= 0) return [lo];
  const raw = span / count;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  const norm = raw / mag;
  const step = (norm >= 5 ? 10 : norm >= 2 ? 5 : norm >= 1 ? 2 : 1) * mag;
  const out: number[] = [];
  for (let t = Math.ceil(lo / step) * step; t <= hi + 1e-12; t += step) {
    out.push(Math.abs(t) < step / 1e6 ? 0 : t);
  }
  return out;
}

export function el(tag: string, attrs: Record<string, string | number>, body = ""): string {
  const parts = Object.entries(attrs)
    .map(([k, v]) => `${k}="${v}"`)
    .join(" ");
  return body === "" ? `<${tag} ${parts}/>` : `<${tag} ${parts}>${body}</${tag}>`;
}

export function text(x: number, y: number, body: string, anchor = "middle", size = 12): string {
  return el(
    "text",
    { x: fmt(x), y: fmt(y), "text-anchor": anchor, "font-size": size, "font-family": "sans-serif" },
    body,
  );
}

export interface Frame {
  x: Scale;
  y: Scale;
  body: string[];
}

/** Axes, tick marks and labels for a plot area inside the fixed canvas. */
export function frame(
  xDomain: [number, number],
  yDomain: [number, number],
  xLabel: string,
  yLabel: string,
  title: string,
): Frame {
  const x = linearScale(xDomain, [MARGIN.left, WIDTH - MARGIN.right]);
  const y = linearScale(yDomain, [HEIGHT - MARGIN.bottom, MARGIN.top]);
  const body: string[] = [];
  body.push(el("rect", { x: 0, y: 0, width: WIDTH, height: HEIGHT, fill: "white" }));
  const x0 = MARGIN.left;
  const x1 = WIDTH - MARGIN.right;
  const y0 = HEIGHT - MARGIN.bottom;
  const y1 = MARGIN.top;
  for (const t of ticks(xDomain)) {
    const px = x(t);
    body.push(el("line", { x1: fmt(px), y1: fmt(y0), x2: fmt(px), y2: fmt(y1), stroke: "#dddddd", "stroke-width": 1 }));
    body.push(text(px, y0 + 18, trimTick(t)));
  }
  for (const t of ticks(yDomain)) {
    const py = y(t);
    body.push(el("line", { x1: fmt(x0), y1: fmt(py), x2: fmt(x1), y2: fmt(py), stroke: "#dddddd", "stroke-width": 1 }));
    body.push(text(x0 - 8, py + 4, trimTick(t), "end"));
  }
  body.push(el("line", { x1: fmt(x0), y1: fmt(y0), x2: fmt(x1), y2: fmt(y0), stroke: "black", "stroke-width": 1 }));
  body.push(el("line", { x1: fmt(x0), y1: fmt(y0), x2: fmt(x0), y2: fmt(y1), stroke: "black", "stroke-width": 1 }));
  body.push(text((x0 + x1) / 2, HEIGHT - 12, xLabel));
  body.push(
    el(
      "g",
      { transform: `translate(16,${fmt((y0 + y1) / 2)}) rotate(-90)` },
      text(0, 0, yLabel),
    ),
  );
  body.push(text(WIDTH / 2, 20, title, "middle", 14));
  return { x, y, body };
}

function trimTick(t: number): string {
  const a = Math.abs(t);
  if (t === 0) return "0";
  if (a >= 1000 || a < 0.01) return t.toExponential(0);
  return String(Math.round(t * 1000) / 1000);
}

export function finish(body: string[]): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
    `viewBox="0 0 ${WIDTH} ${HEIGHT}">` +
    body.join("") +
    "</svg>"
  );
}

export function legend(body: string[], entries: Array<[string, string]>, xAt: number, yAt: number): void {
  entries.forEach(([label, color], i) => {
    const y = yAt + i * 18;
    body.push(el("rect", { x: fmt(xAt), y: fmt(y - 9), width: 12, height: 12, fill: color }));
    body.push(text(xAt + 18, y + 1, label, "start", 11));
  });
}
