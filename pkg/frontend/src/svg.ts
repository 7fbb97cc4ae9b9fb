/** Minimal SVG assembly: linear scales, axes, paths. No DOM required. */

export interface Frame {
  width: number;
  height: number;
  margin: { top: number; right: number; bottom: number; left: number };
}

export const DEFAULT_FRAME: Frame = {
  width: 720,
  height: 480,
  margin: { top: 40, right: 30, bottom: 50, left: 70 },
};

export class LinearScale {
  constructor(
    readonly domain: [number, number],
    readonly range: [number, number],
  ) {}

  apply(x: number): number {
    const [d0, d1] = this.domain;
    const [r0, r1] = this.range;
    const t = d1 === d0 ? 0.5 : (x - d0) / (d1 - d0);
    return r0 + t * (r1 - r0);
  }

  ticks(count = 6): number[] {
    const [d0, d1] = this.domain;
    const span = d1 - d0;
    if (span <= 0) return [d0];
    const step = niceStep(span / count);
    const start = Math.ceil(d0 / step) * step;
    const out: number[] = [];
    for (let v = start; v <= d1 + 1e-12 * Math.abs(span); v += step) {
      out.push(Number(v.toPrecision(12)));
    }
    return out;
  }
}

function niceStep(raw: number): number {
  const power = Math.pow(10, Math.floor(Math.log10(raw)));
  const base = raw / power;
  if (base <= 1) return power;
  if (base <= 2) return 2 * power;
  if (base <= 5) return 5 * power;
  return 10 * power;
}

export function extent(values: number[], padFraction = 0.05): [number, number] {
  let lo = Math.min(...values);
  let hi = Math.max(...values);
  if (lo === hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const pad = (hi - lo) * padFraction;
  return [lo - pad, hi + pad];
}

export function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function polylinePath(points: Array<[number, number]>): string {
  return points
    .map(([x, y], i) => `${i === 0 ? "M" : "L"}${x.toFixed(2)},${y.toFixed(2)}`)
    .join(" ");
}

export class SvgBuilder {
  private parts: string[] = [];

  constructor(readonly frame: Frame) {}

  rect(x: number, y: number, w: number, h: number, fill: string, opacity = 1): void {
    this.parts.push(
      `<rect x="${x.toFixed(2)}" y="${y.toFixed(2)}" width="${w.toFixed(2)}" ` +
        `height="${h.toFixed(2)}" fill="${fill}" fill-opacity="${opacity}"/>`,
    );
  }

  path(d: string, stroke: string, width = 2, dash?: string): void {
    const dashAttr = dash ? ` stroke-dasharray="${dash}"` : "";
    this.parts.push(`<path d="${d}" fill="none" stroke="${stroke}" stroke-width="${width}"${dashAttr}/>`);
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke: string, width = 1, dash?: string): void {
    const dashAttr = dash ? ` stroke-dasharray="${dash}"` : "";
    this.parts.push(
      `<line x1="${x1.toFixed(2)}" y1="${y1.toFixed(2)}" x2="${x2.toFixed(2)}" ` +
        `y2="${y2.toFixed(2)}" stroke="${stroke}" stroke-width="${width}"${dashAttr}/>`,
    );
  }

  circle(cx: number, cy: number, r: number, fill: string): void {
    this.parts.push(`<circle cx="${cx.toFixed(2)}" cy="${cy.toFixed(2)}" r="${r}" fill="${fill}"/>`);
  }

  text(x: number, y: number, content: string, options: { size?: number; anchor?: string; fill?: string; className?: string } = {}): void {
    const size = options.size ?? 12;
    const anchor = options.anchor ?? "start";
    const fill = options.fill ?? "#222";
    const cls = options.className ? ` class="${options.className}"` : "";
    this.parts.push(
      `<text x="${x.toFixed(2)}" y="${y.toFixed(2)}" font-size="${size}" ` +
        `text-anchor="${anchor}" fill="${fill}" font-family="sans-serif"${cls}>${escapeXml(content)}</text>`,
    );
  }

  axes(xScale: LinearScale, yScale: LinearScale, xLabel: string, yLabel: string): void {
    const { width, height, margin } = this.frame;
    const x0 = margin.left;
    const x1 = width - margin.right;
    const y0 = height - margin.bottom;
    const y1 = margin.top;
    this.line(x0, y0, x1, y0, "#444");
    this.line(x0, y0, x0, y1, "#444");
    for (const t of xScale.ticks()) {
      const px = xScale.apply(t);
      this.line(px, y0, px, y0 + 5, "#444");
      this.text(px, y0 + 18, formatTick(t), { anchor: "middle", size: 11 });
    }
    for (const t of yScale.ticks()) {
      const py = yScale.apply(t);
      this.line(x0 - 5, py, x0, py, "#444");
      this.text(x0 - 8, py + 4, formatTick(t), { anchor: "end", size: 11 });
    }
    this.text((x0 + x1) / 2, height - 10, xLabel, { anchor: "middle" });
    this.parts.push(
      `<text x="18" y="${(y0 + y1) / 2}" font-size="12" text-anchor="middle" fill="#222" ` +
        `font-family="sans-serif" transform="rotate(-90 18 ${(y0 + y1) / 2})">${escapeXml(yLabel)}</text>`,
    );
  }

  render(title: string): string {
    const { width, height } = this.frame;
    return (
      `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}">\n` +
      `<rect width="${width}" height="${height}" fill="white"/>\n` +
      `<text x="${width / 2}" y="22" font-size="15" text-anchor="middle" ` +
      `font-family="sans-serif" fill="#111">${escapeXml(title)}</text>\n` +
      this.parts.join("\n") +
      `\n</svg>\n`
    );
  }
}

function formatTick(v: number): string {
  if (v !== 0 && (Math.abs(v) >= 1e5 || Math.abs(v) < 1e-3)) {
    return v.toExponential(1);
  }
  return String(Number(v.toPrecision(6)));
}

export function plotScales(frame: Frame, xDomain: [number, number], yDomain: [number, number]) {
  const x = new LinearScale(xDomain, [frame.margin.left, frame.width - frame.margin.right]);
  const y = new LinearScale(yDomain, [frame.height - frame.margin.bottom, frame.margin.top]);
  return { x, y };
}
